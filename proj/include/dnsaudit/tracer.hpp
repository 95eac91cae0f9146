#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dnsaudit/error.hpp"
#include "dnsaudit/probes.hpp"

namespace dnsaudit {

enum class ServerSource : std::uint8_t { ParentOnly, ChildOnly, Both };

const char* to_string(ServerSource source);

/// A name server as a set of addresses. Two endpoints denote the same server
/// when their address sets intersect (CNAME-paired names sharing one IP).
struct ServerEndpoint {
  std::optional<DomainName> ns_name;
  std::vector<IpAddress> addresses;

  bool same_server(const ServerEndpoint& other) const;

  friend bool operator==(const ServerEndpoint&, const ServerEndpoint&) = default;
};

struct ServerRef {
  DomainName ns_name;
  // Other NS names that resolved onto the same addresses.
  std::vector<DomainName> aliases;
  ServerEndpoint endpoint;
  ServerSource source = ServerSource::Both;
  std::optional<bool> is_authoritative;

  bool parent_listed() const { return source != ServerSource::ChildOnly; }
  bool child_listed() const { return source != ServerSource::ParentOnly; }
  /// Stable identity used for aggregation across domains: the lowest address,
  /// or the name when no address is known.
  std::string identity() const;

  friend bool operator==(const ServerRef&, const ServerRef&) = default;
};

struct LoopHop {
  DomainName zone;
  DomainName server;
  IpAddress address;

  friend bool operator==(const LoopHop&, const LoopHop&) = default;
};

struct DelegationTrace {
  DomainName domain;
  DomainName parent_zone;
  std::vector<ServerRef> servers;
  // NS name -> addresses supplied in the parent's additional section.
  std::map<DomainName, std::vector<IpAddress>> glue;
  // Addresses of the parent-zone servers that referred to the domain.
  std::vector<IpAddress> parent_servers;
  bool loop_detected = false;
  std::vector<LoopHop> loop_path;
  bool unresolvable = false;
  std::size_t depth = 0;
  std::vector<std::string> evidence;

  friend bool operator==(const DelegationTrace&, const DelegationTrace&) = default;
};

struct TraceOptions {
  std::size_t max_depth = 16;
};

/// Walks every referral path from every root down to the domain's servers,
/// probes each candidate server for authority (SOA, RD=0, AA bit) and
/// records loops. Never throws for remote failures; TransportError from a
/// broken local network propagates.
DelegationTrace trace(const Prober& prober, const DomainName& domain, const TraceOptions& options = {});

struct ServerClassification {
  std::vector<ServerRef> parent_set;
  std::vector<ServerRef> child_set;
  std::vector<ServerRef> stealth_set;
  std::vector<ServerRef> lame_parent_set;
};

/// Throws ContractViolation when `trace.unresolvable`.
ServerClassification classify_servers(const DelegationTrace& trace);

}  // namespace dnsaudit
