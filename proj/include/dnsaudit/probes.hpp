#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dnsaudit/roots.hpp"
#include "dnsaudit/transport.hpp"

namespace dnsaudit {

struct ZoneTransferResult {
  bool granted = false;
  std::size_t record_count = 0;  // records streamed, trailing SOA excluded
  std::string reason;            // "granted", "unreachable", "refused", ...
};

struct RecursionCheck {
  bool offers_recursion = false;
  std::string reason;
};

struct ResolveResult {
  bool resolved = false;  // an authoritative (or final) answer was reached
  Rcode rcode = Rcode::ServFail;
  std::vector<ResourceRecord> answers;  // CNAME chain first, then data

  std::vector<ResourceRecord> of_type(RRType type) const;
};

/// The specialized probes the tests consume, plus a small iterative resolver
/// that starts from the root hints. Holds no mutable state; concurrent use is
/// safe as long as the transport is.
class Prober {
 public:
  Prober(Transport& transport, std::vector<RootHint> roots, ProbeConfig config = {});

  const std::vector<RootHint>& roots() const noexcept { return roots_; }
  const ProbeConfig& config() const noexcept { return config_; }

  DnsObservation query(const IpAddress& server, const DnsQuestion& question, TransportKind kind) const;

  /// UDP first; retries over TCP when the answer is truncated, and also when
  /// UDP stays silent if `tcp_on_silence` is set.
  DnsObservation ask(const IpAddress& server, const DnsQuestion& question,
                     bool tcp_on_silence = false) const;

  ZoneTransferResult attempt_zone_transfer(const IpAddress& server, const DomainName& zone) const;
  RecursionCheck check_recursion(const IpAddress& server, const DomainName& canary) const;
  std::optional<std::uint32_t> fetch_soa_serial(const IpAddress& server, const DomainName& zone) const;
  std::optional<DomainName> reverse_lookup(const IpAddress& address) const;

  /// Iterative resolution from the roots, chasing CNAMEs (at most 8).
  ResolveResult resolve(const DomainName& name, RRType type) const;
  /// A and AAAA of `name`, A first.
  std::vector<IpAddress> resolve_addresses(const DomainName& name) const;

 private:
  ResolveResult resolve(const DomainName& name, RRType type, int depth) const;
  std::vector<IpAddress> resolve_addresses(const DomainName& name, int depth) const;

  Transport* transport_;
  std::vector<RootHint> roots_;
  ProbeConfig config_;
};

}  // namespace dnsaudit
