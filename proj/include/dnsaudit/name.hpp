#pragma once

#include <compare>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dnsaudit {

/// Raised when a textual domain name violates RFC 1035 length or label rules.
class NameError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Fully-qualified, lowercase domain name. Always stored with a trailing dot;
/// the root is ".".
class DomainName {
 public:
  static constexpr std::size_t kMaxLabel = 63;
  static constexpr std::size_t kMaxName = 253;

  DomainName() : text_(".") {}

  /// Parses and normalizes `text`; throws NameError on invalid input.
  static DomainName parse(std::string_view text);
  static std::optional<DomainName> try_parse(std::string_view text) noexcept;
  static DomainName from_labels(const std::vector<std::string>& labels);

  const std::string& str() const noexcept { return text_; }
  bool is_root() const noexcept { return text_ == "."; }

  std::vector<std::string> labels() const;
  std::size_t label_count() const;

  /// Parent zone name; the root is its own parent.
  DomainName parent() const;

  /// True when this name equals `zone` or lies below it.
  bool is_subdomain_of(const DomainName& zone) const noexcept;

  /// Prepends one label: DomainName("example.test").child("www").
  DomainName child(std::string_view label) const;

  friend bool operator==(const DomainName&, const DomainName&) = default;
  friend auto operator<=>(const DomainName&, const DomainName&) = default;

 private:
  explicit DomainName(std::string normalized) : text_(std::move(normalized)) {}

  std::string text_;
};

}  // namespace dnsaudit
