#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dnsaudit/random.hpp"
#include "dnsaudit/store.hpp"

namespace dnsaudit {

class BatchError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// One domain per line, `#` comments, blank lines skipped. Throws
/// BatchError naming the line of an invalid name.
std::vector<DomainName> parse_domain_list(std::string_view text);
std::vector<DomainName> read_domain_list(const std::filesystem::path& path);

inline constexpr double kUnlimitedRate = std::numeric_limits<double>::infinity();

struct BatchPlan {
  std::vector<DomainName> domains;
  double rate = 1.0;  // domains per second; infinity disables the limiter
  std::uint64_t seed = 0;
  std::size_t parallelism = 8;

  double projected_seconds() const;
  std::string summary() const;
};

/// Throws BatchError for an empty list, a non-positive rate or zero
/// parallelism.
BatchPlan plan(std::vector<DomainName> domains, std::uint64_t seed, double rate = 1.0,
               std::size_t parallelism = 8);

/// Dispatch slots at least ceil(1e6 / rate) microseconds apart. The bucket
/// starts empty: the first slot is one period after construction.
class RateLimiter {
 public:
  using Clock = std::chrono::steady_clock;

  explicit RateLimiter(double rate, Clock::time_point start = Clock::now());

  /// Blocks until the next slot and returns the moment it was granted.
  Clock::time_point acquire();

 private:
  std::optional<std::chrono::microseconds> period_;
  Clock::time_point next_;
  std::mutex mu_;
};

struct BatchOptions {
  std::string run_id = "run";
  AuditConfig audit;
  /// Checked before each dispatch; returning true stops the batch.
  std::function<bool()> should_stop;
  /// Called from the writer after each stored report.
  std::function<void(const StoredReport&, std::size_t stored)> on_report;
};

struct BatchStats {
  std::size_t completed = 0;
  std::size_t excluded = 0;
  std::size_t aborted = 0;
  std::size_t skipped = 0;  // already stored under this run id
  std::size_t planned = 0;
  bool interrupted = false;
  bool store_failed = false;
  std::string failure;
  std::chrono::duration<double> elapsed{0};

  std::size_t stored() const noexcept { return completed + excluded + aborted; }
  double effective_rate() const;
};

/// Audits every planned domain not yet stored under `options.run_id`.
/// A store write failure stops dispatch; records already written stay.
BatchStats run(const BatchPlan& plan, const Prober& prober, ReportStore& store, const BatchOptions& options);

}  // namespace dnsaudit
