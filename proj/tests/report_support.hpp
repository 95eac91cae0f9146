#pragma once

#include <map>
#include <string>
#include <vector>

#include "dnsaudit/store.hpp"

namespace testing {

// A completed report whose failing tests implicate the given identities.
inline dnsaudit::StoredReport synthetic_report(const std::string& domain,
                                               const std::vector<std::string>& servers,
                                               const std::map<dnsaudit::TestId, std::vector<std::string>>& failures,
                                               const std::string& run_id = "r") {
  dnsaudit::StoredReport r;
  r.domain = domain;
  r.run_id = run_id;
  r.status = dnsaudit::ReportStatus::Completed;
  for (auto id : dnsaudit::kAllTests) {
    auto it = failures.find(id);
    auto n_tot = std::max<std::size_t>(servers.size(), 1);
    if (it == failures.end()) {
      r.outcomes.push_back(dnsaudit::make_outcome(id, 0, n_tot));
    } else {
      auto o = dnsaudit::make_outcome(id, std::max<std::size_t>(1, std::min(it->second.size(), n_tot)), n_tot);
      o.implicated = it->second;
      r.outcomes.push_back(o);
    }
  }
  for (const auto& s : servers) {
    dnsaudit::ServerSummary sum;
    sum.name = "ns." + s + ".";
    sum.addresses = {s};
    sum.source = "both";
    sum.authoritative = true;
    sum.identity = s;
    r.servers.push_back(sum);
  }
  return r;
}

inline dnsaudit::StoredReport excluded_report(const std::string& domain, const std::string& run_id = "r") {
  dnsaudit::StoredReport r;
  r.domain = domain;
  r.run_id = run_id;
  r.status = dnsaudit::ReportStatus::ExcludedUnresolvable;
  return r;
}

}  // namespace testing
