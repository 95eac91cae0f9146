#pragma once

#include <filesystem>
#include <string_view>
#include <vector>

#include "dnsaudit/ip.hpp"
#include "dnsaudit/name.hpp"

namespace dnsaudit {

struct RootHint {
  DomainName name;
  IpAddress address;

  friend bool operator==(const RootHint&, const RootHint&) = default;
};

/// Root hints text: one `<ns_name> <ip_address>` pair per line, `#` comments.
/// Throws std::runtime_error naming the offending line.
std::vector<RootHint> parse_root_hints(std::string_view text);
std::vector<RootHint> load_root_hints(const std::filesystem::path& path);

/// IPv4 addresses of the thirteen live root server letters.
const std::vector<RootHint>& default_root_hints();

}  // namespace dnsaudit
