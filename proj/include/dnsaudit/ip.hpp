#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace dnsaudit {

/// IPv4 or IPv6 address held in network byte order. IPv4 uses the first four
/// bytes of `bytes`; the rest stay zero so comparisons are well defined.
class IpAddress {
 public:
  enum class Family : std::uint8_t { V4 = 4, V6 = 6 };

  IpAddress() = default;

  static std::optional<IpAddress> parse(std::string_view text);
  static IpAddress v4(std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d);
  static IpAddress from_bytes(Family family, const std::uint8_t* data);

  Family family() const noexcept { return family_; }
  bool is_v4() const noexcept { return family_ == Family::V4; }
  std::size_t size() const noexcept { return is_v4() ? 4 : 16; }
  const std::array<std::uint8_t, 16>& bytes() const noexcept { return bytes_; }

  std::string to_string() const;

  /// Name under in-addr.arpa / ip6.arpa used for PTR lookups.
  std::string reverse_name() const;

  /// True when both addresses are of the same family and agree on the first
  /// `prefix_bits` bits.
  bool same_prefix(const IpAddress& other, unsigned prefix_bits) const noexcept;

  friend bool operator==(const IpAddress&, const IpAddress&) = default;
  friend auto operator<=>(const IpAddress&, const IpAddress&) = default;

 private:
  Family family_ = Family::V4;
  std::array<std::uint8_t, 16> bytes_{};
};

}  // namespace dnsaudit
