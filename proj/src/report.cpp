#include "dnsaudit/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

namespace dnsaudit {

namespace {

std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

double ratio(std::size_t num, std::size_t den) {
  return den ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

const TestOutcome* find_outcome(const StoredReport& r, TestId id) {
  for (const auto& o : r.outcomes) {
    if (o.test_id == id) return &o;
  }
  return nullptr;
}

bool failed(const TestOutcome* o) { return o && o->applicable && o->indicator == 1; }

}  // namespace

std::vector<CdfPoint> metric_cdf(const std::vector<double>& metrics, const std::vector<double>& thresholds) {
  if (metrics.empty()) throw ReportError("CDF of an empty metric list");
  if (!std::is_sorted(thresholds.begin(), thresholds.end())) throw ReportError("CDF thresholds must be ascending");
  std::vector<double> sorted = metrics;
  std::sort(sorted.begin(), sorted.end());
  std::vector<CdfPoint> out;
  out.reserve(thresholds.size());
  for (double t : thresholds) {
    auto n = std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin();
    out.push_back({t, ratio(static_cast<std::size_t>(n), sorted.size())});
  }
  return out;
}

std::vector<double> cdf_thresholds(double step) {
  if (!(step > 0.0) || step > 10.0) throw ReportError("CDF step must be in (0, 10]");
  auto steps = static_cast<std::size_t>(std::floor(10.0 / step + 1e-9));
  std::vector<double> out;
  for (std::size_t k = 0; k <= steps; ++k) out.push_back(std::min(10.0, static_cast<double>(k) * step));
  if (out.back() < 10.0) out.push_back(10.0);
  return out;
}

std::vector<StoredReport> latest_per_domain(const std::vector<StoredReport>& reports) {
  std::vector<StoredReport> out;
  std::map<std::string, std::size_t> slot;
  for (const auto& r : reports) {
    auto [it, fresh] = slot.emplace(r.domain, out.size());
    if (fresh) {
      out.push_back(r);
    } else {
      out[it->second] = r;
    }
  }
  return out;
}

DatasetSummary summarize(const std::vector<StoredReport>& input, const WeightTable& weights, bool eq3_literal,
                         double cdf_step, std::string label) {
  DatasetSummary s;
  s.label = std::move(label);
  std::vector<const StoredReport*> completed;
  auto reports = latest_per_domain(input);
  for (const auto& r : reports) {
    switch (r.status) {
      case ReportStatus::Completed: completed.push_back(&r); break;
      case ReportStatus::ExcludedUnresolvable: ++s.excluded; break;
      case ReportStatus::Aborted: ++s.aborted; break;
    }
  }
  s.completed = completed.size();
  s.total = s.completed + s.excluded;
  if (completed.empty()) throw ReportError("store holds no completed reports");
  s.excluded_fraction = ratio(s.excluded, s.total);

  std::vector<double> raw;
  std::set<std::string> servers;
  for (const auto* r : completed) {
    try {
      raw.push_back(domain_metric(r->outcomes, weights, eq3_literal).raw);
    } catch (const std::exception& e) {
      throw ReportError(r->domain + ": " + e.what());
    }
    for (const auto& srv : r->servers) servers.insert(srv.identity);
  }
  s.distinct_servers = servers.size();

  for (auto id : kAllTests) {
    TestSummary t;
    t.test_id = id;
    std::set<std::string> bad;
    for (const auto* r : completed) {
      const auto* o = find_outcome(*r, id);
      if (!failed(o)) continue;
      ++t.failing_domains;
      bad.insert(o->implicated.begin(), o->implicated.end());
    }
    t.domain_fraction = ratio(t.failing_domains, s.completed);
    t.failing_servers = bad.size();
    t.server_fraction = ratio(bad.size(), s.distinct_servers);
    s.tests.push_back(t);
  }

  auto norm = normalize(raw);
  s.m_max = norm.m_max;
  for (std::size_t i = 0; i < completed.size(); ++i) s.normalized.emplace_back(completed[i]->domain, norm.normalized[i]);
  s.cdf = metric_cdf(norm.normalized, cdf_thresholds(cdf_step));
  return s;
}

ServerImpact server_impact(const std::vector<StoredReport>& input, TestId test_id, std::size_t k) {
  if (k == 0) throw ReportError("k must be at least 1");
  ServerImpact out;
  out.test_id = test_id;
  std::vector<std::set<std::string>> affected;
  std::map<std::string, std::size_t> counts;
  for (const auto& r : latest_per_domain(input)) {
    if (r.status != ReportStatus::Completed) continue;
    const auto* o = find_outcome(r, test_id);
    if (!failed(o) || o->implicated.empty()) continue;
    std::set<std::string> servers(o->implicated.begin(), o->implicated.end());
    for (const auto& srv : servers) ++counts[srv];
    affected.push_back(std::move(servers));
  }
  out.affected_domains = affected.size();

  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (ranked.size() > k) ranked.resize(k);

  std::set<std::string> fixed;
  for (const auto& [server, count] : ranked) {
    fixed.insert(server);
    std::size_t resolved = std::count_if(affected.begin(), affected.end(), [&](const std::set<std::string>& d) {
      return std::includes(fixed.begin(), fixed.end(), d.begin(), d.end());
    });
    out.ranking.push_back({server, count, ratio(count, affected.size()), ratio(resolved, affected.size())});
  }
  return out;
}

std::string summary_csv(const DatasetSummary& s) {
  std::string out =
      "dataset,total,completed,excluded,excluded_fraction,aborted,distinct_servers,m_max,"
      "test_id,test,failing_domains,domain_fraction,failing_servers,server_fraction\n";
  for (const auto& t : s.tests) {
    out += csv_field(s.label) + ',' + std::to_string(s.total) + ',' + std::to_string(s.completed) + ',' +
           std::to_string(s.excluded) + ',' + fixed4(s.excluded_fraction) + ',' + std::to_string(s.aborted) + ',' +
           std::to_string(s.distinct_servers) + ',' + fixed4(s.m_max) + ',' + std::to_string(ordinal(t.test_id)) +
           ',' + csv_field(test_name(t.test_id)) + ',' + std::to_string(t.failing_domains) + ',' +
           fixed4(t.domain_fraction) + ',' + std::to_string(t.failing_servers) + ',' + fixed4(t.server_fraction) +
           '\n';
  }
  return out;
}

std::string cdf_csv(const std::vector<CdfPoint>& cdf) {
  std::string out = "threshold,fraction\n";
  for (const auto& p : cdf) out += fixed4(p.threshold) + ',' + fixed4(p.fraction) + '\n';
  return out;
}

std::string impact_csv(const std::vector<ServerImpact>& impacts) {
  std::string out = "test_id,rank,server,affected_domains,domain_fraction,cumulative_fraction\n";
  for (const auto& imp : impacts) {
    for (std::size_t i = 0; i < imp.ranking.size(); ++i) {
      const auto& e = imp.ranking[i];
      out += std::to_string(ordinal(imp.test_id)) + ',' + std::to_string(i + 1) + ',' + csv_field(e.server) + ',' +
             std::to_string(e.affected_domains) + ',' + fixed4(e.domain_fraction) + ',' +
             fixed4(e.cumulative_fraction) + '\n';
    }
  }
  return out;
}

ReportFiles emit_reports(const DatasetSummary& summary, const std::vector<ServerImpact>& impacts,
                         const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ReportError("cannot create " + dir.string() + ": " + ec.message());
  ReportFiles files{dir / "summary.csv", dir / "cdf.csv", dir / "impact.csv"};
  auto write = [](const std::filesystem::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << body;
    out.flush();
    if (!out) throw ReportError("cannot write " + path.string());
  };
  write(files.summary, summary_csv(summary));
  write(files.cdf, cdf_csv(summary.cdf));
  write(files.impact, impact_csv(impacts));
  return files;
}

}  // namespace dnsaudit
