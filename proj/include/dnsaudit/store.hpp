#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "dnsaudit/audit.hpp"

namespace dnsaudit {

class StoreError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ReportStatus : std::uint8_t { Completed, ExcludedUnresolvable, Aborted };

const char* to_string(ReportStatus status);
std::optional<ReportStatus> parse_report_status(std::string_view text);

struct ServerSummary {
  std::string name;
  std::vector<std::string> aliases;
  std::vector<std::string> addresses;
  std::string source;
  std::optional<bool> authoritative;
  std::string identity;

  friend bool operator==(const ServerSummary&, const ServerSummary&) = default;
};

/// One line of the store.
///
/// {"domain", "run_id", "ts" (microseconds since the Unix epoch), "status",
///  "outcomes": [{"test", "indicator", "n_err", "n_tot", "applicable",
///                "evidence", "implicated"}],
///  "raw_metric" (null unless completed), "servers": [{"name", "aliases",
///  "addresses", "source", "authoritative", "identity"}],
///  "trace": {"parent_zone", "loop_detected", "depth", "evidence"},
///  "note"}
struct StoredReport {
  std::string domain;
  std::string run_id;
  std::int64_t ts = 0;
  ReportStatus status = ReportStatus::Completed;
  std::vector<TestOutcome> outcomes;
  std::optional<double> raw_metric;
  std::vector<ServerSummary> servers;
  std::string parent_zone;
  bool loop_detected = false;
  std::size_t depth = 0;
  std::vector<std::string> trace_evidence;
  std::string note;

  friend bool operator==(const StoredReport&, const StoredReport&) = default;
};

StoredReport make_report(const AuditResult& audit, std::string run_id, std::int64_t ts);
StoredReport aborted_report(const DomainName& domain, std::string run_id, std::int64_t ts, std::string note);

std::string to_json_line(const StoredReport& report);
/// Throws StoreError on malformed input.
StoredReport from_json_line(std::string_view line);

/// Reads every complete line. A final line without a newline (a crashed
/// append) is ignored; any other malformed line throws StoreError naming
/// the line number.
std::vector<StoredReport> read_store(const std::filesystem::path& path);

/// Append-only writer; each append is one flushed line. Opening truncates a
/// trailing partial line. Thread-safe.
class ReportStore {
 public:
  explicit ReportStore(std::filesystem::path path);

  const std::filesystem::path& path() const noexcept { return path_; }
  /// Throws StoreError when the line cannot be written.
  void append(const StoredReport& report);
  /// (domain, run_id) pairs already stored.
  std::set<std::pair<std::string, std::string>> keys() const;

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::mutex mu_;
};

}  // namespace dnsaudit
