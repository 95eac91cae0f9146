#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "dnsaudit/outcome.hpp"
#include "dnsaudit/tracer.hpp"

namespace dnsaudit {

/// The domain has no reachable authoritative server and is left out of
/// every statistic.
class DomainExcluded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class PtrClass : std::uint8_t { NoPtr, PtrDangling, PtrForwardMismatch, Consistent };

const char* to_string(PtrClass c);

/// The 13 configuration tests. Each test takes a resolvable trace and throws
/// ContractViolation otherwise.
class MisconfigSuite {
 public:
  /// `canary` is the foreign name used to detect open recursion; without it
  /// the recursion test reports itself inapplicable.
  MisconfigSuite(const Prober& prober, std::optional<DomainName> canary);

  TestOutcome test_udp_availability(const DelegationTrace& trace) const;
  TestOutcome test_tcp_availability(const DelegationTrace& trace) const;
  TestOutcome test_single_authoritative(const DelegationTrace& trace) const;
  TestOutcome test_parent_nonauth(const DelegationTrace& trace) const;
  TestOutcome test_stealth(const DelegationTrace& trace) const;
  TestOutcome test_loops(const DelegationTrace& trace) const;
  TestOutcome test_public_zone_transfer(const DelegationTrace& trace) const;
  TestOutcome test_public_recursion(const DelegationTrace& trace) const;
  TestOutcome test_secondary_sync(const DelegationTrace& trace) const;
  TestOutcome test_server_colocation(const DelegationTrace& trace) const;
  TestOutcome test_reverse_mapping(const DelegationTrace& trace) const;
  TestOutcome test_ipv6_support(const DelegationTrace& trace) const;
  TestOutcome test_dnssec_support(const DelegationTrace& trace) const;

  TestOutcome run(TestId id, const DelegationTrace& trace) const;
  /// One outcome per test in ordinal order. Throws DomainExcluded for an
  /// unresolvable trace.
  std::vector<TestOutcome> run_all(const DelegationTrace& trace) const;

  PtrClass classify_address(const IpAddress& address) const;

 private:
  const Prober& prober_;
  std::optional<DomainName> canary_;
};

}  // namespace dnsaudit
