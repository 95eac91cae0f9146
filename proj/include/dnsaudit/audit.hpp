#pragma once

#include <optional>
#include <vector>

#include "dnsaudit/metric.hpp"
#include "dnsaudit/suite.hpp"

namespace dnsaudit {

struct AuditConfig {
  WeightTable weights = WeightTable::defaults();
  bool eq3_literal = false;
  TraceOptions trace;
  std::optional<DomainName> canary;
};

struct AuditResult {
  DelegationTrace trace;
  bool excluded = false;
  // Empty when excluded.
  std::vector<TestOutcome> outcomes;
  DomainMetric metric;
};

/// Trace, run the 13 tests and score one domain. Unresolvable domains come
/// back with `excluded` set instead of throwing.
AuditResult audit_domain(const Prober& prober, const DomainName& domain, const AuditConfig& config);

}  // namespace dnsaudit
