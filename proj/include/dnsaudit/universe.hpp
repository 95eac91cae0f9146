#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "dnsaudit/message.hpp"
#include "dnsaudit/roots.hpp"
#include "dnsaudit/transport.hpp"

namespace dnsaudit {

/// Fixture load failure. `line()` is 0 for whole-file validation errors.
class FixtureError : public std::runtime_error {
 public:
  FixtureError(int line, const std::string& what)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

struct ZoneInstance {
  std::uint32_t serial = 1;
  bool signed_zone = false;
};

struct FixtureServer {
  DomainName name;
  std::vector<IpAddress> addresses;
  bool udp_enabled = true;
  bool tcp_enabled = true;
  bool recursion_offered = false;
  // Sets RA=1 without resolving anything (`ra=on`).
  bool advertises_recursion = false;
  bool shared_addresses = false;
  std::set<DomainName> axfr_allowed;
  std::map<DomainName, ZoneInstance> authoritative_zones;
  // zone -> zone whose NS set is handed out as a referral instead
  std::map<DomainName, DomainName> referral_overrides;
};

struct Delegation {
  DomainName child;
  DomainName parent;
  std::vector<DomainName> ns;
  std::vector<std::pair<DomainName, IpAddress>> glue;
};

/// In-process DNS hierarchy. Fill the public fields (or use parse_universe),
/// then call finalize(); afterwards the universe is immutable and every
/// lookup is safe from any number of threads.
class FixtureUniverse {
 public:
  /// Validates invariants and builds lookup indices. Throws FixtureError.
  void finalize();

  std::vector<FixtureServer> servers;
  std::vector<RootHint> roots;
  std::optional<DomainName> canary;
  // Records from `rr` lines, keyed by zone.
  std::map<DomainName, std::vector<ResourceRecord>> zone_records;
  std::vector<Delegation> delegations;

  const FixtureServer* server_at(const IpAddress& address) const;
  const FixtureServer* server_named(const DomainName& name) const;
  const Delegation* delegation_of(const DomainName& child) const;

  /// Every zone declared on at least one server.
  std::set<DomainName> hosted_zones() const;
  /// Deepest hosted zone enclosing `name`.
  std::optional<DomainName> enclosing_zone(const DomainName& name) const;

  /// Addresses a name maps to by fixture knowledge: explicit A/AAAA records,
  /// server declarations, CNAME chains (depth 8).
  std::vector<IpAddress> addresses_of(const DomainName& name) const;

  /// Full record set of `zone` as served by one instance: SOA, apex NS,
  /// rr-line data, implicit server address records, delegation NS and glue,
  /// and DNSKEY when signed. RRSIGs are synthesized on demand.
  std::vector<ResourceRecord> zone_content(const DomainName& zone, const ZoneInstance& inst) const;

  /// Names of every declared zone apex NS set (apex NS rr lines, else the
  /// delegation's NS list, else the hosting servers).
  std::vector<DomainName> apex_ns(const DomainName& zone) const;

 private:
  std::vector<IpAddress> addresses_of(const DomainName& name, int depth) const;
  std::vector<ResourceRecord> build_base_content(const DomainName& zone) const;

  std::map<IpAddress, std::size_t> by_address_;
  std::map<DomainName, std::size_t> by_name_;
  std::map<DomainName, std::vector<IpAddress>> explicit_addresses_;
  std::map<DomainName, DomainName> cnames_;
  std::map<DomainName, std::vector<ResourceRecord>> base_content_;
  std::set<DomainName> hosted_;
};

FixtureUniverse parse_universe(std::string_view text);
FixtureUniverse load_universe(const std::filesystem::path& path);

/// Server behavior for one question. Returns the response message stream
/// (one message except for AXFR), or nullopt when the server stays silent.
std::optional<std::vector<DnsMessage>> simulated_response(const FixtureUniverse& universe,
                                                          const IpAddress& server,
                                                          const DnsQuestion& question,
                                                          TransportKind kind);

/// simulated_response folded into one observation; rtt is always zero.
DnsObservation simulated_query(const FixtureUniverse& universe, const IpAddress& server,
                               const DnsQuestion& question, TransportKind kind);

class SimTransport final : public Transport {
 public:
  explicit SimTransport(const FixtureUniverse& universe) : universe_(universe) {}

  DnsObservation exchange(const IpAddress& server, const DnsQuestion& question, TransportKind kind,
                          std::chrono::milliseconds) override {
    return simulated_query(universe_, server, question, kind);
  }

 private:
  const FixtureUniverse& universe_;
};

}  // namespace dnsaudit
