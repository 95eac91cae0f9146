#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "dnsaudit/store.hpp"

namespace dnsaudit {

class ReportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CdfPoint {
  double threshold = 0.0;
  double fraction = 0.0;

  friend bool operator==(const CdfPoint&, const CdfPoint&) = default;
};

/// Fraction of metrics <= each threshold. Throws ReportError on an empty
/// metric list or unsorted thresholds.
std::vector<CdfPoint> metric_cdf(const std::vector<double>& metrics, const std::vector<double>& thresholds);

/// 0, step, 2*step, ... up to 10 inclusive.
std::vector<double> cdf_thresholds(double step = 0.1);

struct TestSummary {
  TestId test_id = TestId::UdpAvailability;
  std::size_t failing_domains = 0;
  double domain_fraction = 0.0;
  std::size_t failing_servers = 0;
  double server_fraction = 0.0;
};

struct DatasetSummary {
  std::string label;
  std::size_t total = 0;  // completed + excluded
  std::size_t completed = 0;
  std::size_t excluded = 0;
  std::size_t aborted = 0;
  double excluded_fraction = 0.0;
  std::size_t distinct_servers = 0;
  std::vector<TestSummary> tests;
  double m_max = 0.0;
  // (domain, normalized metric) for each completed domain, store order.
  std::vector<std::pair<std::string, double>> normalized;
  std::vector<CdfPoint> cdf;
};

/// Latest record per domain wins when a store holds several runs.
std::vector<StoredReport> latest_per_domain(const std::vector<StoredReport>& reports);

/// Metrics are recomputed from the stored outcomes with `weights` and
/// normalized over this store. Throws ReportError without completed reports.
DatasetSummary summarize(const std::vector<StoredReport>& reports, const WeightTable& weights,
                         bool eq3_literal = false, double cdf_step = 0.1, std::string label = "dataset");

struct ImpactEntry {
  std::string server;
  std::size_t affected_domains = 0;
  double domain_fraction = 0.0;
  // Share of affected domains fully fixed by fixing this and every
  // higher-ranked server.
  double cumulative_fraction = 0.0;

  friend bool operator==(const ImpactEntry&, const ImpactEntry&) = default;
};

struct ServerImpact {
  TestId test_id = TestId::UdpAvailability;
  std::size_t affected_domains = 0;  // failing domains with >= 1 implicated server
  std::vector<ImpactEntry> ranking;
};

/// Ranked by affected-domain count, descending, ties by server identity.
/// Truncated to `k` entries. Throws ReportError when k = 0.
ServerImpact server_impact(const std::vector<StoredReport>& reports, TestId test_id, std::size_t k);

struct ReportFiles {
  std::filesystem::path summary;
  std::filesystem::path cdf;
  std::filesystem::path impact;
};

std::string summary_csv(const DatasetSummary& summary);
std::string cdf_csv(const std::vector<CdfPoint>& cdf);
std::string impact_csv(const std::vector<ServerImpact>& impacts);

/// Writes summary.csv, cdf.csv and impact.csv into `dir` (created when
/// missing). Throws ReportError naming the file that could not be written.
ReportFiles emit_reports(const DatasetSummary& summary, const std::vector<ServerImpact>& impacts,
                         const std::filesystem::path& dir);

}  // namespace dnsaudit
