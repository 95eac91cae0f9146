#include "dnsaudit/ip.hpp"

#include <arpa/inet.h>

#include <cstring>

namespace dnsaudit {

std::optional<IpAddress> IpAddress::parse(std::string_view text) {
  std::string s(text);
  IpAddress out;
  if (inet_pton(AF_INET, s.c_str(), out.bytes_.data()) == 1) {
    out.family_ = Family::V4;
    return out;
  }
  if (inet_pton(AF_INET6, s.c_str(), out.bytes_.data()) == 1) {
    out.family_ = Family::V6;
    return out;
  }
  return std::nullopt;
}

IpAddress IpAddress::v4(std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d) {
  IpAddress out;
  out.bytes_ = {a, b, c, d};
  return out;
}

IpAddress IpAddress::from_bytes(Family family, const std::uint8_t* data) {
  IpAddress out;
  out.family_ = family;
  std::memcpy(out.bytes_.data(), data, family == Family::V4 ? 4 : 16);
  return out;
}

std::string IpAddress::to_string() const {
  char buf[INET6_ADDRSTRLEN] = {};
  inet_ntop(is_v4() ? AF_INET : AF_INET6, bytes_.data(), buf, sizeof buf);
  return buf;
}

std::string IpAddress::reverse_name() const {
  std::string out;
  if (is_v4()) {
    for (int i = 3; i >= 0; --i) out += std::to_string(bytes_[i]) + ".";
    return out + "in-addr.arpa.";
  }
  static constexpr char kHex[] = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    out.push_back(kHex[bytes_[i] & 0xf]);
    out.push_back('.');
    out.push_back(kHex[bytes_[i] >> 4]);
    out.push_back('.');
  }
  return out + "ip6.arpa.";
}

bool IpAddress::same_prefix(const IpAddress& other, unsigned prefix_bits) const noexcept {
  if (family_ != other.family_) return false;
  unsigned max_bits = static_cast<unsigned>(size()) * 8;
  if (prefix_bits > max_bits) prefix_bits = max_bits;
  unsigned full = prefix_bits / 8;
  for (unsigned i = 0; i < full; ++i) {
    if (bytes_[i] != other.bytes_[i]) return false;
  }
  unsigned rem = prefix_bits % 8;
  if (rem == 0) return true;
  auto mask = static_cast<std::uint8_t>(0xff << (8 - rem));
  return (bytes_[full] & mask) == (other.bytes_[full] & mask);
}

}  // namespace dnsaudit
