// Acceptance checks. One line per criterion; the exit status is non-zero
// when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "dnsaudit/batch.hpp"
#include "dnsaudit/cli.hpp"
#include "dnsaudit/loopback.hpp"
#include "dnsaudit/metric.hpp"
#include "dnsaudit/report.hpp"
#include "dnsaudit/synthetic.hpp"
#include "report_support.hpp"
#include "support.hpp"

using namespace dnsaudit;
using Clock = std::chrono::steady_clock;

namespace {

constexpr double kMetricBudgetSeconds = 1.0;
constexpr double kIsolationBudgetSeconds = 10.0;
constexpr double kNormalizationTolerance = 1e-9;
constexpr double kRate = 5.0;
constexpr double kRateMinElapsedSeconds = 5.0;
constexpr std::int64_t kWindowMicros = 1'000'000;
constexpr std::size_t kWindowLimit = 5;
constexpr double kDeskRunBudgetSeconds = 60.0;

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (ok) return;
    if (pass) detail = what;
    pass = false;
  }
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << std::fixed << v;
  return s.str();
}

// Independent evaluator of the weighted sum with the published weights.
double brute_force_metric(const std::vector<TestOutcome>& outcomes) {
  const double weight[13] = {10, 4, 8, 8, 4, 6, 5, 5, 2, 2, 2, 2, 2};
  const bool scaled[13] = {true, true, false, true, true, false, false, true, false, false, false, false, false};
  std::size_t err[13] = {}, tot[13] = {};
  int failed[13] = {};
  for (const auto& o : outcomes) {
    int i = ordinal(o.test_id) - 1;
    err[i] = o.n_err;
    tot[i] = o.n_tot;
    failed[i] = o.indicator;
  }
  double m = 0.0;
  for (int i = 0; i < 13; ++i) {
    if (!failed[i]) continue;
    double s = 1.0;
    if (scaled[i]) s = std::min(1.0, (static_cast<double>(err[i]) / static_cast<double>(tot[i])) / 0.5);
    m += weight[i] * s;
  }
  return m;
}

std::vector<TestOutcome> random_outcomes(std::mt19937_64& rng) {
  std::vector<TestOutcome> v;
  for (auto id : kAllTests) {
    std::size_t n_tot = 1 + rng() % 8;
    std::size_t n_err = rng() % 3 == 0 ? 0 : rng() % (n_tot + 1);
    v.push_back(make_outcome(id, n_err, n_tot));
  }
  std::shuffle(v.begin(), v.end(), rng);
  return v;
}

Verdict metric_exactness() {
  Verdict v;
  std::mt19937_64 rng(20141029);
  auto weights = WeightTable::defaults();
  auto t0 = Clock::now();
  std::size_t mismatches = 0;
  for (int i = 0; i < 1000; ++i) {
    auto outcomes = random_outcomes(rng);
    if (domain_metric(outcomes, weights).raw != brute_force_metric(outcomes)) ++mismatches;
  }
  double elapsed = seconds_since(t0);
  v.require(mismatches == 0, std::to_string(mismatches) + " of 1000 vectors differ");
  v.require(elapsed < kMetricBudgetSeconds, "took " + fmt(elapsed) + " s");
  if (v.pass) v.detail = "1000 vectors bit-exact in " + fmt(elapsed) + " s";
  return v;
}

Verdict probability_anchors() {
  Verdict v;
  v.require(failure_probability(1, 5) == 0.2, "P(1,5) != 0.2");
  v.require(failure_probability(1, 2) == 0.5, "P(1,2) != 0.5");
  v.require(scaled_factor(0.5, ScalingMode::PerServer, false) == 1.0, "S(0.5) != 1 under min");
  v.require(scaled_factor(0.5, ScalingMode::PerServer, true) == 1.0, "S(0.5) != 1 under max");
  if (v.pass) v.detail = "P(1,5)=0.2, P(1,2)=0.5, S(0.5)=1 under both variants";
  return v;
}

Verdict normalization() {
  Verdict v;
  auto hand = normalize({8, 16, 4});
  v.require(hand.normalized == std::vector<double>{5, 10, 2.5}, "{8,16,4} did not map to {5,10,2.5}");
  std::mt19937_64 rng(5);
  auto weights = WeightTable::defaults();
  double worst = 0.0;
  for (int store = 0; store < 100; ++store) {
    std::vector<StoredReport> reports;
    std::size_t n = 1 + rng() % 40;
    for (std::size_t i = 0; i < n; ++i) {
      StoredReport r;
      r.domain = "d" + std::to_string(i) + ".test.";
      r.outcomes = random_outcomes(rng);
      reports.push_back(r);
    }
    reports[0].outcomes[0] = make_outcome(reports[0].outcomes[0].test_id, 1, 1);
    auto s = summarize(reports, weights);
    double top = 0.0;
    for (const auto& [d, m] : s.normalized) top = std::max(top, m);
    worst = std::max(worst, std::fabs(top - 10.0));
  }
  v.require(worst <= kNormalizationTolerance, "max normalized off by " + std::to_string(worst));
  if (v.pass) v.detail = "hand case exact; 100 random stores peak at 10 (max error " + std::to_string(worst) + ")";
  return v;
}

Verdict isolation() {
  Verdict v;
  const std::vector<std::string> files = {
      "t01_udp",         "t02_tcp",           "t03_single_auth", "t04_parent_nonauth", "t05_stealth",
      "t06_loop",        "t07_zone_transfer", "t08_recursion",   "t09_stale_secondary", "t10_colocation",
      "t11_reverse",     "t12_ipv6",          "t13_dnssec"};
  auto t0 = Clock::now();
  for (std::size_t k = 0; k < files.size(); ++k) {
    testing::SimWorld w(testing::fixture("isolation/" + files[k] + ".zl"));
    auto r = w.audit("example.test");
    std::vector<int> got(kTestCount, 0), want(kTestCount, 0);
    want[k] = 1;
    for (const auto& o : r.outcomes) got[index_of(o.test_id)] = o.indicator;
    std::string shown;
    for (int g : got) shown += std::to_string(g);
    v.require(!r.excluded && got == want, files[k] + " gave " + shown);
  }
  double elapsed = seconds_since(t0);
  v.require(elapsed < kIsolationBudgetSeconds, "took " + fmt(elapsed) + " s");
  if (v.pass) v.detail = "13 fixtures give unit vectors in " + fmt(elapsed) + " s";
  return v;
}

// Referral graph over (zone, server address) states reachable from the
// roots, then Kahn elimination: any state left over sits on a cycle.
bool oracle_has_cycle(const FixtureUniverse& u, const DomainName& domain) {
  using State = std::pair<DomainName, IpAddress>;
  std::map<State, std::set<State>> edges;
  std::vector<State> todo;
  for (const auto& r : u.roots) todo.push_back({DomainName(), r.address});
  while (!todo.empty()) {
    auto s = todo.back();
    todo.pop_back();
    if (edges.count(s)) continue;
    auto& out = edges[s];
    DnsQuestion q{domain, RRType::NS, false};
    auto obs = simulated_query(u, s.second, q, TransportKind::Udp);
    if (!obs.responded || obs.truncated) obs = simulated_query(u, s.second, q, TransportKind::Tcp);
    if (!obs.responded || obs.authoritative_answer || obs.rcode != Rcode::NoError) continue;
    for (const auto& ns : obs.in_section(Section::Authority, RRType::NS)) {
      if (!domain.is_subdomain_of(ns.owner)) continue;
      const auto& target = std::get<DomainName>(ns.rdata);
      std::set<IpAddress> addrs;
      for (const auto& g : obs.section(Section::Additional)) {
        if (g.owner == target && (g.type == RRType::A || g.type == RRType::AAAA)) {
          addrs.insert(std::get<IpAddress>(g.rdata));
        }
      }
      for (const auto& a : u.addresses_of(target)) addrs.insert(a);
      for (const auto& a : addrs) {
        out.insert({ns.owner, a});
        todo.push_back({ns.owner, a});
      }
    }
  }
  std::map<State, int> indegree;
  for (const auto& [s, out] : edges) {
    indegree[s];
    for (const auto& t : out) ++indegree[t];
  }
  std::vector<State> ready;
  for (const auto& [s, d] : indegree) {
    if (d == 0) ready.push_back(s);
  }
  std::size_t removed = 0;
  while (!ready.empty()) {
    auto s = ready.back();
    ready.pop_back();
    ++removed;
    for (const auto& t : edges[s]) {
      if (--indegree[t] == 0) ready.push_back(t);
    }
  }
  return removed != indegree.size();
}

Verdict loop_detection() {
  Verdict v;
  struct Case {
    std::string file;
    std::string domain;
    bool cyclic;
  };
  const std::vector<Case> cases = {
      {"cyclic1_tld_self", "example.test", true},          {"cyclic2_child_upward", "example.test", true},
      {"cyclic3_to_root", "example.test", true},           {"cyclic4_deep", "sub.example.test", true},
      {"cyclic5_second_root", "example.test", true},       {"acyclic1_healthy", "example.test", false},
      {"acyclic2_lame_refused", "example.test", false},    {"acyclic3_deep", "sub.example.test", false},
      {"acyclic4_tld_hosts_child", "example.test", false}, {"acyclic5_downward_override", "example.test", false},
  };
  for (const auto& c : cases) {
    testing::SimWorld w(testing::fixture("loops/" + c.file + ".zl"));
    auto d = DomainName::parse(c.domain);
    bool oracle = oracle_has_cycle(w.u, d);
    bool traced = trace(w.prober, d).loop_detected;
    v.require(oracle == c.cyclic, c.file + ": oracle disagrees with the fixture design");
    v.require(traced == oracle, c.file + ": loop_detected=" + (traced ? "true" : "false") + ", oracle " +
                                    (oracle ? "true" : "false"));
  }
  if (v.pass) v.detail = "5 cyclic detected, 5 acyclic clean, all match the cycle oracle";
  return v;
}

// Exhaustive recount: per candidate server, a fresh scan of every domain.
std::vector<ImpactEntry> impact_oracle(const std::vector<StoredReport>& store, TestId id, std::size_t k,
                                       std::size_t* affected_out) {
  std::vector<const StoredReport*> latest;
  std::set<std::string> seen;
  for (auto it = store.rbegin(); it != store.rend(); ++it) {
    if (seen.insert(it->domain).second) latest.push_back(&*it);
  }
  std::vector<std::set<std::string>> affected;
  std::set<std::string> candidates;
  for (const auto* r : latest) {
    if (r->status != ReportStatus::Completed) continue;
    for (const auto& o : r->outcomes) {
      if (o.test_id != id || !o.applicable || o.indicator != 1 || o.implicated.empty()) continue;
      affected.emplace_back(o.implicated.begin(), o.implicated.end());
      candidates.insert(o.implicated.begin(), o.implicated.end());
    }
  }
  *affected_out = affected.size();
  std::vector<std::pair<std::size_t, std::string>> counted;
  for (const auto& c : candidates) {
    std::size_t n = 0;
    for (const auto& d : affected) n += d.count(c);
    counted.push_back({n, c});
  }
  std::sort(counted.begin(), counted.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<ImpactEntry> out;
  for (std::size_t r = 0; r < counted.size() && r < k; ++r) {
    std::size_t fixed = 0;
    for (const auto& d : affected) {
      bool all = true;
      for (const auto& s : d) {
        bool in_prefix = false;
        for (std::size_t j = 0; j <= r; ++j) in_prefix = in_prefix || counted[j].second == s;
        all = all && in_prefix;
      }
      fixed += all;
    }
    double den = static_cast<double>(affected.size());
    out.push_back({counted[r].second, counted[r].first, static_cast<double>(counted[r].first) / den,
                   static_cast<double>(fixed) / den});
  }
  return out;
}

Verdict impact_oracle_check() {
  Verdict v;
  std::mt19937_64 rng(77);
  const TestId tests[] = {TestId::ParentNonAuthoritative, TestId::StealthServer, TestId::ZoneTransfer,
                          TestId::PublicRecursion};
  std::size_t compared = 0;
  for (int store_no = 0; store_no < 20; ++store_no) {
    std::vector<StoredReport> store;
    for (int d = 0; d < 50; ++d) {
      std::string domain = "d" + std::to_string(d) + ".test.";
      if (rng() % 10 == 0) {
        store.push_back(testing::excluded_report(domain));
        continue;
      }
      std::vector<std::string> servers;
      std::size_t n = 1 + rng() % 4;
      while (servers.size() < n) {
        auto s = "192.0.2." + std::to_string(1 + rng() % 12);
        if (std::find(servers.begin(), servers.end(), s) == servers.end()) servers.push_back(s);
      }
      std::map<TestId, std::vector<std::string>> failures;
      for (auto t : tests) {
        if (rng() % 3) continue;
        std::vector<std::string> bad;
        for (const auto& s : servers) {
          if (rng() % 2) bad.push_back(s);
        }
        failures[t] = bad;
      }
      // Every fifth domain also has an older record that must be ignored.
      if (d % 5 == 0) store.push_back(testing::synthetic_report(domain, servers, {{TestId::ZoneTransfer, servers}}, "old"));
      store.push_back(testing::synthetic_report(domain, servers, failures));
    }
    std::shuffle(store.begin(), store.end(), rng);
    // Keep each domain's newest record last.
    std::stable_partition(store.begin(), store.end(), [](const StoredReport& r) { return r.run_id == "old"; });
    for (auto t : tests) {
      std::size_t k = 1 + rng() % 12;
      std::size_t affected = 0;
      auto want = impact_oracle(store, t, k, &affected);
      auto got = server_impact(store, t, k);
      ++compared;
      v.require(got.affected_domains == affected && got.ranking == want,
                "store " + std::to_string(store_no) + ", test " + std::to_string(ordinal(t)) + " differs");
    }
  }
  if (v.pass) v.detail = std::to_string(compared) + " rankings over 20 stores match the recount";
  return v;
}

Verdict batch_determinism_and_rate() {
  Verdict v;
  auto syn = generate_universe({25, 8, 0, 7});
  auto a = plan(syn.domains, 11, kRate).domains;
  auto b = plan(syn.domains, 11, kRate).domains;
  auto sorted = a, original = syn.domains;
  std::sort(sorted.begin(), sorted.end());
  std::sort(original.begin(), original.end());
  v.require(a == b, "same seed gave different orders");
  v.require(sorted == original, "plan is not a permutation of the input");

  testing::SimWorld w(parse_universe(syn.fixture));
  testing::TempDir dir;
  ReportStore store(dir / "rate.ndjson");
  BatchOptions opt;
  opt.audit = w.config();
  auto stats = run(plan(syn.domains, 11, kRate, 8), w.prober, store, opt);
  double elapsed = stats.elapsed.count();
  v.require(stats.stored() == 25, "stored " + std::to_string(stats.stored()) + " of 25");
  v.require(elapsed >= kRateMinElapsedSeconds, "elapsed " + fmt(elapsed) + " s");

  std::vector<std::int64_t> ts;
  for (const auto& r : read_store(store.path())) ts.push_back(r.ts);
  std::sort(ts.begin(), ts.end());
  std::size_t peak = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    std::size_t n = 0;
    for (std::size_t j = i; j < ts.size() && ts[j] < ts[i] + kWindowMicros; ++j) ++n;
    peak = std::max(peak, n);
  }
  v.require(peak <= kWindowLimit, std::to_string(peak) + " starts within one second");
  if (v.pass) {
    v.detail = "stable permutation; 25 domains at rate 5 took " + fmt(elapsed) + " s, peak " + std::to_string(peak) +
               " starts per second";
  }
  return v;
}

Verdict exclusion_rule() {
  Verdict v;
  testing::SimWorld w(testing::fixture("batch20.zl"));
  auto domains = read_domain_list(testing::fixture("batch20.txt"));
  testing::TempDir dir;
  ReportStore store(dir / "b20.ndjson");
  BatchOptions opt;
  opt.audit = w.config();
  auto stats = run(plan(domains, 1, kUnlimitedRate, 4), w.prober, store, opt);
  auto s = summarize(read_store(store.path()), WeightTable::defaults());
  v.require(stats.completed == 18 && stats.excluded == 2,
            "batch gave " + std::to_string(stats.completed) + "/" + std::to_string(stats.excluded));
  v.require(s.completed == 18 && s.excluded == 2 && s.total == 20, "summary counts wrong");
  v.require(s.normalized.size() == 18, "normalized list is not over 18 domains");
  for (const auto& t : s.tests) {
    v.require(t.domain_fraction == static_cast<double>(t.failing_domains) / 18.0,
              "test " + std::to_string(ordinal(t.test_id)) + " fraction not over 18");
  }
  if (v.pass) v.detail = "completed=18, excluded=2, fractions over 18";
  return v;
}

Verdict transport_substitutability() {
  Verdict v;
  auto u = load_universe(testing::fixture("worst.zl"));
  testing::SimWorld sim(load_universe(testing::fixture("worst.zl")));
  LoopbackServer server(u);
  SocketTransport sockets(server.endpoint_map());
  Prober wire(sockets, u.roots, testing::fast_config());
  auto d = DomainName::parse("example.test");
  auto in_process = audit_domain(sim.prober, d, sim.config());
  auto over_sockets = audit_domain(wire, d, sim.config());
  v.require(in_process.trace == over_sockets.trace, "traces differ");
  v.require(in_process.outcomes == over_sockets.outcomes, "outcomes differ");
  v.require(in_process.metric.raw == over_sockets.metric.raw, "metrics differ");
  if (v.pass) v.detail = "trace, 13 outcomes and metric identical (raw " + fmt(in_process.metric.raw) + ")";
  return v;
}

Verdict cdf_properties() {
  Verdict v;
  auto hand = metric_cdf({0, 1, 1, 3}, {1, 2, 3});
  v.require(hand == std::vector<CdfPoint>{{1, 0.75}, {2, 0.75}, {3, 1.0}}, "hand case wrong");
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> metric(0.0, 10.0);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> m(1 + rng() % 100);
    for (auto& x : m) x = metric(rng);
    if (rng() % 2) m[0] = 10.0;
    auto cdf = metric_cdf(m, cdf_thresholds(0.1 + 0.1 * static_cast<double>(rng() % 20)));
    for (std::size_t j = 1; j < cdf.size(); ++j) v.require(cdf[j].fraction >= cdf[j - 1].fraction, "CDF decreases");
    v.require(cdf.back().fraction == 1.0, "CDF does not end at 1");
  }
  if (v.pass) v.detail = "hand case exact; 200 random CDFs monotone and ending at 1";
  return v;
}

int cli(std::vector<std::string> args, std::string* out_text = nullptr) {
  args.insert(args.begin(), "dnsaudit");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str() + err.str();
  return code;
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::stringstream s(line);
    std::string field;
    while (std::getline(s, field, ',')) row.push_back(field);
    rows.push_back(row);
  }
  return rows;
}

Verdict desk_run() {
  Verdict v;
  testing::TempDir dir;
  auto zl = (dir / "u.zl").string(), list = (dir / "list.txt").string();
  auto store = (dir / "store.ndjson").string(), out = (dir / "report").string();
  auto t0 = Clock::now();
  std::string log;
  v.require(cli({"fixtures", "generate", "--domains", "200", "--servers", "30", "--seed", "2014", "--out-fixture", zl,
                 "--out-list", list}) == kExitOk,
            "generate failed");
  v.require(cli({"batch", "--input", list, "--store", store, "--fixture", zl, "--no-rate-limit", "--seed", "9",
                 "--progress-every", "0"},
                &log) == kExitOk,
            "batch failed: " + log);
  v.require(cli({"report", "--store", store, "--out", out, "--top-servers", "4", "5", "7", "8", "--k", "5"}, &log) ==
                kExitOk,
            "report failed: " + log);
  double elapsed = seconds_since(t0);
  v.require(elapsed < kDeskRunBudgetSeconds, "took " + fmt(elapsed) + " s");
  if (!v.pass) return v;

  auto summary = read_csv(dir / "report" / "summary.csv");
  v.require(summary.size() == 14, "summary.csv has " + std::to_string(summary.size()) + " lines");
  for (std::size_t i = 1; i < summary.size(); ++i) {
    v.require(summary[i].size() == 14 && summary[i][1] == "200", "summary row " + std::to_string(i) + " malformed");
    if (summary[i].size() != 14) continue;
    double df = std::stod(summary[i][11]), sf = std::stod(summary[i][13]);
    v.require(df >= 0 && df <= 1 && sf >= 0 && sf <= 1, "fraction outside [0, 1]");
  }
  auto cdf = read_csv(dir / "report" / "cdf.csv");
  v.require(cdf.size() == 102, "cdf.csv has " + std::to_string(cdf.size()) + " lines");
  for (std::size_t i = 2; i < cdf.size(); ++i) v.require(std::stod(cdf[i][1]) >= std::stod(cdf[i - 1][1]), "CDF decreases");
  v.require(cdf.back() == std::vector<std::string>{"10.0000", "1.0000"}, "CDF does not end at (10, 1)");
  auto impact = read_csv(dir / "report" / "impact.csv");
  std::map<std::string, int> ranks;
  for (std::size_t i = 1; i < impact.size(); ++i) ++ranks[impact[i][0]];
  for (const char* t : {"4", "5", "7", "8"}) {
    v.require(ranks[t] >= 1 && ranks[t] <= 5, std::string("test ") + t + " has " + std::to_string(ranks[t]) + " ranks");
  }
  v.require(ranks.size() == 4, "impact report covers other tests");
  if (v.pass) v.detail = "200 domains / 30 servers: summary, CDF and top-5 impact in " + fmt(elapsed) + " s";
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"metric exactness", metric_exactness},
      {"probability and scaling anchors", probability_anchors},
      {"normalization", normalization},
      {"pairwise test isolation", isolation},
      {"loop soundness and completeness", loop_detection},
      {"server impact oracle", impact_oracle_check},
      {"batch determinism and rate", batch_determinism_and_rate},
      {"exclusion rule", exclusion_rule},
      {"transport substitutability", transport_substitutability},
      {"CDF properties", cdf_properties},
      {"end-to-end desk run", desk_run},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    failures += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << "  " << (i + 1) << ". " << criteria[i].first << ": " << v.detail
              << std::endl;
  }
  std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failures ? 1 : 0;
}
