#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dnsaudit/name.hpp"

namespace dnsaudit {

struct SyntheticSpec {
  std::size_t domains = 200;
  std::size_t servers = 30;  // hosting servers, besides the root and TLD servers
  std::size_t unresolvable = 0;
  std::uint64_t seed = 1;
};

struct SyntheticUniverse {
  std::string fixture;  // fixture DSL text
  std::vector<DomainName> domains;
  std::vector<DomainName> unresolvable;  // subset of `domains`
};

/// A seeded universe of domains under `test.` hosted on a shared pool of
/// servers with randomly injected faults (dead transports, lame and stealth
/// servers, open AXFR and recursion, stale serials, loops, missing PTR,
/// AAAA and DNSSEC). Equal inputs give identical text.
SyntheticUniverse generate_universe(const SyntheticSpec& spec);

}  // namespace dnsaudit
