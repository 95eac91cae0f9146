#include "dnsaudit/metric.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

namespace dnsaudit {

namespace {

constexpr double kDimensioningProbability = 0.5;

}  // namespace

WeightTable WeightTable::defaults() {
  constexpr std::array<double, kTestCount> w = {10, 4, 8, 8, 4, 6, 5, 5, 2, 2, 2, 2, 2};
  constexpr std::array<bool, kTestCount> per_server = {true, true, false, true, true, false, false,
                                                      true, false, false, false, false, false};
  WeightTable t;
  for (std::size_t i = 0; i < kTestCount; ++i) {
    t.entries_[i] = {w[i], per_server[i] ? ScalingMode::PerServer : ScalingMode::Fixed};
  }
  return t;
}

void WeightTable::set(TestId id, WeightEntry entry) {
  if (!(entry.weight >= 0.0 && entry.weight <= 10.0)) {
    throw MetricError("weight for test " + std::to_string(ordinal(id)) + " outside [0, 10]");
  }
  entries_[index_of(id)] = entry;
}

WeightTable WeightTable::parse(std::string_view text) {
  auto table = defaults();
  std::set<int> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string ord_text, weight_text, mode_text, extra;
    if (!(fields >> ord_text)) continue;
    auto fail = [&](const std::string& msg) -> WeightFileError {
      return WeightFileError("line " + std::to_string(lineno) + ": " + msg);
    };
    if (!(fields >> weight_text >> mode_text) || (fields >> extra)) {
      throw fail("expected '<ordinal> <weight> <S|1>'");
    }
    int ord = 0;
    double weight = 0.0;
    try {
      std::size_t used = 0;
      ord = std::stoi(ord_text, &used);
      if (used != ord_text.size()) throw std::invalid_argument("");
      weight = std::stod(weight_text, &used);
      if (used != weight_text.size()) throw std::invalid_argument("");
    } catch (const std::logic_error&) {
      throw fail("not a number");
    }
    auto id = test_from_ordinal(ord);
    if (!id) throw fail("unknown test ordinal " + ord_text);
    if (!seen.insert(ord).second) throw fail("test " + ord_text + " listed twice");
    ScalingMode mode;
    if (mode_text == "S" || mode_text == "s") {
      mode = ScalingMode::PerServer;
    } else if (mode_text == "1") {
      mode = ScalingMode::Fixed;
    } else {
      throw fail("scaling must be S or 1");
    }
    try {
      table.set(*id, {weight, mode});
    } catch (const MetricError& e) {
      throw fail(e.what());
    }
  }
  return table;
}

WeightTable WeightTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw WeightFileError("cannot read weight file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse(buf.str());
  } catch (const WeightFileError& e) {
    throw WeightFileError(path.string() + ": " + e.what());
  }
}

double failure_probability(std::size_t n_err, std::size_t n_tot) {
  if (n_tot == 0) throw MetricError("failure probability undefined for n_tot = 0");
  if (n_err > n_tot) throw MetricError("n_err exceeds n_tot");
  return static_cast<double>(n_err) / static_cast<double>(n_tot);
}

double scaled_factor(double p, ScalingMode mode, bool literal_max) {
  if (!(p >= 0.0 && p <= 1.0)) throw MetricError("probability outside [0, 1]");
  if (mode == ScalingMode::Fixed) return 1.0;
  double ratio = p / kDimensioningProbability;
  return literal_max ? std::max(1.0, ratio) : std::min(1.0, ratio);
}

DomainMetric domain_metric(const std::vector<TestOutcome>& outcomes, const WeightTable& weights,
                           bool literal_max) {
  std::array<const TestOutcome*, kTestCount> by_id{};
  for (const auto& o : outcomes) {
    auto i = index_of(o.test_id);
    if (i >= kTestCount) throw ContractViolation("outcome with unknown test id");
    if (by_id[i]) throw ContractViolation("duplicate outcome for test " + std::to_string(ordinal(o.test_id)));
    by_id[i] = &o;
  }
  DomainMetric m;
  for (auto id : kAllTests) {
    const auto* o = by_id[index_of(id)];
    if (!o) throw ContractViolation("missing outcome for test " + std::to_string(ordinal(id)));
    double value = 0.0;
    if (o->applicable && o->indicator == 1) {
      const auto& w = weights[id];
      double s = w.mode == ScalingMode::Fixed
                     ? 1.0
                     : scaled_factor(failure_probability(o->n_err, o->n_tot), w.mode, literal_max);
      value = w.weight * s;
    }
    m.raw += value;
    m.per_test_contributions.push_back({id, value});
  }
  return m;
}

Normalization normalize(const std::vector<double>& raw) {
  if (raw.empty()) throw ContractViolation("normalize needs at least one metric");
  Normalization n;
  n.m_max = *std::max_element(raw.begin(), raw.end());
  n.normalized.reserve(raw.size());
  for (double m : raw) n.normalized.push_back(n.m_max > 0.0 ? 10.0 * m / n.m_max : 0.0);
  return n;
}

double theoretical_max(const WeightTable& weights, bool literal_max) {
  double total = 0.0;
  for (auto id : kAllTests) {
    const auto& w = weights[id];
    total += w.weight * (literal_max && w.mode == ScalingMode::PerServer ? 2.0 : 1.0);
  }
  return total;
}

double normalize_single(double raw, const WeightTable& weights, bool literal_max) {
  double max = theoretical_max(weights, literal_max);
  return max > 0.0 ? 10.0 * raw / max : 0.0;
}

}  // namespace dnsaudit
