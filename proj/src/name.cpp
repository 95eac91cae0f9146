#include "dnsaudit/name.hpp"

#include <cctype>

namespace dnsaudit {

namespace {

bool valid_label_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '*';
}

}  // namespace

DomainName DomainName::parse(std::string_view text) {
  if (text.empty()) throw NameError("empty domain name");
  if (text == ".") return DomainName{};

  std::string out;
  out.reserve(text.size() + 1);
  std::size_t label_len = 0;
  for (char c : text) {
    if (c == '.') {
      if (label_len == 0) throw NameError("empty label in '" + std::string(text) + "'");
      label_len = 0;
      out.push_back('.');
      continue;
    }
    if (!valid_label_char(c)) {
      throw NameError("invalid character in '" + std::string(text) + "'");
    }
    if (++label_len > kMaxLabel) {
      throw NameError("label longer than 63 octets in '" + std::string(text) + "'");
    }
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (out.back() != '.') out.push_back('.');
  // 253 presentation octets excluding the trailing dot.
  if (out.size() - 1 > kMaxName) throw NameError("domain name longer than 253 octets");
  return DomainName{std::move(out)};
}

std::optional<DomainName> DomainName::try_parse(std::string_view text) noexcept {
  try {
    return parse(text);
  } catch (const NameError&) {
    return std::nullopt;
  }
}

DomainName DomainName::from_labels(const std::vector<std::string>& labels) {
  if (labels.empty()) return DomainName{};
  std::string joined;
  for (const auto& l : labels) {
    joined += l;
    joined.push_back('.');
  }
  return parse(joined);
}

std::vector<std::string> DomainName::labels() const {
  std::vector<std::string> out;
  if (is_root()) return out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text_.size(); ++i) {
    if (text_[i] == '.') {
      out.emplace_back(text_.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

std::size_t DomainName::label_count() const {
  if (is_root()) return 0;
  std::size_t n = 0;
  for (char c : text_) n += (c == '.');
  return n;
}

DomainName DomainName::parent() const {
  if (is_root()) return *this;
  auto dot = text_.find('.');
  if (dot + 1 >= text_.size()) return DomainName{};
  return DomainName{text_.substr(dot + 1)};
}

bool DomainName::is_subdomain_of(const DomainName& zone) const noexcept {
  if (zone.is_root()) return true;
  if (text_.size() < zone.text_.size()) return false;
  if (text_.size() == zone.text_.size()) return text_ == zone.text_;
  auto offset = text_.size() - zone.text_.size();
  return text_[offset - 1] == '.' && text_.compare(offset, std::string::npos, zone.text_) == 0;
}

DomainName DomainName::child(std::string_view label) const {
  std::string joined(label);
  joined.push_back('.');
  if (!is_root()) joined += text_;
  return parse(joined);
}

}  // namespace dnsaudit
