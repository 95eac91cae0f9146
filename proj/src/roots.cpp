#include "dnsaudit/roots.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dnsaudit {

std::vector<RootHint> parse_root_hints(std::string_view text) {
  std::vector<RootHint> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string name, addr, extra;
    if (!(fields >> name)) continue;
    if (!(fields >> addr) || (fields >> extra)) {
      throw std::runtime_error("root hints line " + std::to_string(lineno) +
                               ": expected '<ns_name> <ip_address>'");
    }
    auto parsed_name = DomainName::try_parse(name);
    auto ip = IpAddress::parse(addr);
    if (!parsed_name || !ip) {
      throw std::runtime_error("root hints line " + std::to_string(lineno) + ": bad name or address");
    }
    out.push_back({*parsed_name, *ip});
  }
  if (out.empty()) throw std::runtime_error("root hints: no entries");
  return out;
}

std::vector<RootHint> load_root_hints(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open root hints file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_root_hints(buf.str());
}

const std::vector<RootHint>& default_root_hints() {
  static const std::vector<RootHint> hints = parse_root_hints(R"(
a.root-servers.net 198.41.0.4
b.root-servers.net 170.247.170.2
c.root-servers.net 192.33.4.12
d.root-servers.net 199.7.91.13
e.root-servers.net 192.203.230.10
f.root-servers.net 192.5.5.241
g.root-servers.net 192.112.36.4
h.root-servers.net 198.97.190.53
i.root-servers.net 192.36.148.17
j.root-servers.net 192.58.128.30
k.root-servers.net 193.0.14.129
l.root-servers.net 199.7.83.42
m.root-servers.net 202.12.27.33
)");
  return hints;
}

}  // namespace dnsaudit
