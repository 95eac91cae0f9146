#include "dnsaudit/audit.hpp"

namespace dnsaudit {

AuditResult audit_domain(const Prober& prober, const DomainName& domain, const AuditConfig& config) {
  AuditResult out;
  out.trace = trace(prober, domain, config.trace);
  if (out.trace.unresolvable) {
    out.excluded = true;
    return out;
  }
  MisconfigSuite suite(prober, config.canary);
  out.outcomes = suite.run_all(out.trace);
  out.metric = domain_metric(out.outcomes, config.weights, config.eq3_literal);
  out.metric.normalized = normalize_single(out.metric.raw, config.weights, config.eq3_literal);
  return out;
}

}  // namespace dnsaudit
