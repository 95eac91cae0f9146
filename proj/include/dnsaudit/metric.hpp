#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "dnsaudit/error.hpp"
#include "dnsaudit/outcome.hpp"

namespace dnsaudit {

/// Input for which a metric quantity is not defined (n_tot = 0, p outside
/// [0, 1]).
class MetricError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class WeightFileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ScalingMode : std::uint8_t { PerServer, Fixed };

struct WeightEntry {
  double weight = 0.0;
  ScalingMode mode = ScalingMode::Fixed;

  friend bool operator==(const WeightEntry&, const WeightEntry&) = default;
};

class WeightTable {
 public:
  /// W = 10 4 8 8 4 6 5 5 2 2 2 2 2, per-server scaling for tests 1 2 4 5 8.
  static WeightTable defaults();
  /// `<ordinal> <weight> <S|1>` per line, `#` comments. Unlisted tests keep
  /// their default. Throws WeightFileError naming the line.
  static WeightTable parse(std::string_view text);
  static WeightTable load(const std::filesystem::path& path);

  const WeightEntry& operator[](TestId id) const { return entries_[index_of(id)]; }
  /// Throws MetricError for weights outside [0, 10].
  void set(TestId id, WeightEntry entry);

  friend bool operator==(const WeightTable&, const WeightTable&) = default;

 private:
  std::array<WeightEntry, kTestCount> entries_{};
};

/// n_err / n_tot. Throws MetricError when n_tot = 0 or n_err > n_tot.
double failure_probability(std::size_t n_err, std::size_t n_tot);

/// Fixed: 1. Per-server: min(1, p / 0.5), or max(1, p / 0.5) when
/// `literal_max` is set.
double scaled_factor(double p, ScalingMode mode, bool literal_max = false);

struct Contribution {
  TestId test_id = TestId::UdpAvailability;
  double value = 0.0;

  friend bool operator==(const Contribution&, const Contribution&) = default;
};

struct DomainMetric {
  double raw = 0.0;
  std::optional<double> normalized;
  std::vector<Contribution> per_test_contributions;
};

/// Sum of W * S * T over the 13 outcomes in ordinal order. Throws
/// ContractViolation unless every test appears exactly once.
DomainMetric domain_metric(const std::vector<TestOutcome>& outcomes, const WeightTable& weights,
                           bool literal_max = false);

struct Normalization {
  double m_max = 0.0;
  std::vector<double> normalized;
};

/// 10 * M / M_max per entry; all zeros when M_max = 0. Throws
/// ContractViolation on an empty list.
Normalization normalize(const std::vector<double>& raw);

/// Largest raw metric the weight table allows; the yardstick for scoring a
/// single domain without a dataset.
double theoretical_max(const WeightTable& weights, bool literal_max = false);

/// 10 * raw / theoretical_max, or 0 when the maximum is 0.
double normalize_single(double raw, const WeightTable& weights, bool literal_max = false);

}  // namespace dnsaudit
