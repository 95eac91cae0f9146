#include "dnsaudit/cli.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <ostream>
#include <thread>

#include "dnsaudit/batch.hpp"
#include "dnsaudit/loopback.hpp"
#include "dnsaudit/report.hpp"
#include "dnsaudit/synthetic.hpp"

namespace dnsaudit {

namespace {

namespace fs = std::filesystem;

constexpr const char* kLiveCanary = "www.iana.org.";

std::atomic<bool> g_interrupted{false};

extern "C" void on_signal(int) { g_interrupted = true; }

struct SignalGuard {
  using Handler = void (*)(int);
  Handler old_int, old_term;
  SignalGuard() {
    g_interrupted = false;
    old_int = std::signal(SIGINT, on_signal);
    old_term = std::signal(SIGTERM, on_signal);
  }
  ~SignalGuard() {
    std::signal(SIGINT, old_int);
    std::signal(SIGTERM, old_term);
  }
};

/// Failure carrying the exit code it maps to.
struct CliFailure {
  int code;
  std::string message;
};

void require_file(const std::string& path, const char* what) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw CliFailure{kExitNoInput, std::string("cannot open ") + what + " " + path};
}

struct SourceOptions {
  std::string fixture;
  std::string roots;
  std::string canary;
  bool loopback = false;
  int timeout_ms = 3000;
  int retries = 2;
};

void add_source_options(CLI::App* cmd, SourceOptions& o) {
  cmd->add_option("--fixture", o.fixture, "Serve a fixture universe instead of the live DNS");
  cmd->add_option("--roots", o.roots, "Root hints file: '<name> <ip>' per line");
  cmd->add_option("--canary", o.canary, "Foreign name used to detect open recursion");
  cmd->add_flag("--loopback", o.loopback, "With --fixture: serve the universe over 127.0.0.1 sockets");
  cmd->add_option("--timeout-ms", o.timeout_ms, "UDP timeout per attempt")->check(CLI::PositiveNumber);
  cmd->add_option("--retries", o.retries, "UDP retries")->check(CLI::NonNegativeNumber);
}

/// Transport, roots and canary for one command, built from either a fixture
/// or the live network.
struct Source {
  std::unique_ptr<FixtureUniverse> universe;
  std::unique_ptr<LoopbackServer> loopback;
  std::unique_ptr<Transport> transport;
  std::optional<Prober> prober;
  std::optional<DomainName> canary;
};

Source open_source(const SourceOptions& o) {
  Source src;
  std::vector<RootHint> roots;
  ProbeConfig config;
  config.udp_timeout = std::chrono::milliseconds(o.timeout_ms);
  config.tcp_timeout = std::chrono::milliseconds(std::max(o.timeout_ms, 1000) * 5 / 3);
  config.udp_retries = o.retries;

  if (o.loopback && o.fixture.empty()) throw CliFailure{kExitUsage, "--loopback needs --fixture"};
  if (!o.fixture.empty()) {
    require_file(o.fixture, "fixture");
    try {
      src.universe = std::make_unique<FixtureUniverse>(load_universe(o.fixture));
    } catch (const FixtureError& e) {
      throw CliFailure{kExitDataError, o.fixture + ": " + e.what()};
    }
    roots = src.universe->roots;
    src.canary = src.universe->canary;
    if (o.loopback) {
      src.loopback = std::make_unique<LoopbackServer>(*src.universe);
      src.transport = std::make_unique<SocketTransport>(src.loopback->endpoint_map());
    } else {
      src.transport = std::make_unique<SimTransport>(*src.universe);
    }
  } else {
    roots = default_root_hints();
    src.canary = DomainName::parse(kLiveCanary);
    src.transport = std::make_unique<SocketTransport>();
  }
  if (!o.roots.empty()) {
    require_file(o.roots, "root hints");
    try {
      roots = load_root_hints(o.roots);
    } catch (const std::exception& e) {
      throw CliFailure{kExitDataError, e.what()};
    }
  }
  if (roots.empty()) throw CliFailure{kExitDataError, "no root hints"};
  if (!o.canary.empty()) {
    auto c = DomainName::try_parse(o.canary);
    if (!c) throw CliFailure{kExitUsage, "invalid canary name " + o.canary};
    src.canary = *c;
  }
  src.prober.emplace(*src.transport, std::move(roots), config);
  return src;
}

WeightTable load_weights(const std::string& path) {
  if (path.empty()) return WeightTable::defaults();
  require_file(path, "weight file");
  try {
    return WeightTable::load(path);
  } catch (const WeightFileError& e) {
    throw CliFailure{kExitDataError, e.what()};
  }
}

std::string fmt4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

void print_table(std::ostream& out, const AuditResult& r, const AuditConfig& cfg) {
  const auto& t = r.trace;
  out << "domain       " << t.domain.str() << "\n";
  out << "parent zone  " << t.parent_zone.str() << "\n";
  out << "servers      " << t.servers.size() << " (delegation depth " << t.depth << ")\n";
  for (const auto& s : t.servers) {
    out << "  " << std::left << std::setw(28) << s.ns_name.str() << " ";
    std::string addrs;
    for (const auto& a : s.endpoint.addresses) addrs += (addrs.empty() ? "" : " ") + a.to_string();
    out << std::setw(34) << addrs + " " << std::setw(12) << to_string(s.source)
        << (s.is_authoritative == true ? "authoritative" : s.is_authoritative == false ? "non-authoritative" : "no answer")
        << "\n";
    for (const auto& a : s.aliases) out << "    alias " << a.str() << "\n";
  }
  for (const auto& e : t.evidence) out << "  note: " << e << "\n";
  if (r.excluded) {
    out << "excluded: no authoritative server found\n";
    return;
  }

  out << "\n" << std::right << std::setw(3) << "#" << "  " << std::left << std::setw(30) << "test" << std::setw(8)
      << "result" << std::setw(12) << "n_err/n_tot" << std::setw(8) << "weight" << std::setw(7) << "scale"
      << "contribution\n";
  std::size_t failed = 0;
  for (std::size_t i = 0; i < r.outcomes.size(); ++i) {
    const auto& o = r.outcomes[i];
    const auto& w = cfg.weights[o.test_id];
    std::string result = !o.applicable ? "n/a" : o.indicator ? "FAIL" : "pass";
    if (o.applicable && o.indicator) ++failed;
    std::string counts = std::to_string(o.n_err) + "/" + std::to_string(o.n_tot);
    char weight[32];
    std::snprintf(weight, sizeof weight, "%g", w.weight);
    out << std::right << std::setw(3) << ordinal(o.test_id) << "  " << std::left << std::setw(30)
        << test_name(o.test_id) << std::setw(8) << result << std::setw(12) << counts << std::setw(8) << weight
        << std::setw(7) << (w.mode == ScalingMode::PerServer ? "S" : "1")
        << fmt4(r.metric.per_test_contributions[i].value) << "\n";
    if (!o.applicable || o.indicator) {
      for (const auto& e : o.evidence) out << "       - " << e << "\n";
    }
  }
  out << "\n" << (kTestCount - failed) << "/" << kTestCount << " passed\n";
  out << "raw metric   " << fmt4(r.metric.raw) << "\n";
  out << "normalized   " << fmt4(r.metric.normalized.value_or(0.0)) << " (against theoretical maximum "
      << fmt4(theoretical_max(cfg.weights, cfg.eq3_literal)) << ")\n";
}

std::int64_t now_us() {
  return std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

struct CheckArgs {
  std::string domain;
  SourceOptions source;
  std::string weights;
  bool eq3_literal = false;
  std::string format = "table";
};

int cmd_check(const CheckArgs& a, std::ostream& out) {
  auto domain = DomainName::try_parse(a.domain);
  if (!domain || domain->is_root()) throw CliFailure{kExitUsage, "invalid domain name '" + a.domain + "'"};
  AuditConfig cfg;
  cfg.weights = load_weights(a.weights);
  cfg.eq3_literal = a.eq3_literal;
  auto src = open_source(a.source);
  cfg.canary = src.canary;

  auto result = audit_domain(*src.prober, *domain, cfg);
  if (a.format == "ndjson") {
    out << to_json_line(make_report(result, "check", now_us())) << "\n";
  } else {
    print_table(out, result, cfg);
  }
  if (result.excluded) return kExitUnresolvable;
  bool any = std::any_of(result.outcomes.begin(), result.outcomes.end(),
                         [](const TestOutcome& o) { return o.applicable && o.indicator == 1; });
  return any ? kExitTestsFailed : kExitOk;
}

struct BatchArgs {
  std::string input;
  std::string store;
  double rate = 1.0;
  bool unlimited = false;
  std::uint64_t seed = 0;
  std::size_t parallelism = 8;
  std::string run_id = "run";
  std::string weights;
  bool eq3_literal = false;
  std::size_t progress_every = 10;
  SourceOptions source;
};

int cmd_batch(const BatchArgs& a, std::ostream& out, std::ostream& err) {
  require_file(a.input, "domain list");
  std::vector<DomainName> domains;
  try {
    domains = read_domain_list(a.input);
  } catch (const BatchError& e) {
    throw CliFailure{kExitDataError, a.input + ": " + e.what()};
  }
  BatchPlan p;
  try {
    p = plan(std::move(domains), a.seed, a.unlimited ? kUnlimitedRate : a.rate, a.parallelism);
  } catch (const BatchError& e) {
    throw CliFailure{kExitDataError, e.what()};
  }
  BatchOptions opts;
  opts.run_id = a.run_id;
  opts.audit.weights = load_weights(a.weights);
  opts.audit.eq3_literal = a.eq3_literal;
  auto src = open_source(a.source);
  opts.audit.canary = src.canary;

  std::unique_ptr<ReportStore> store;
  try {
    store = std::make_unique<ReportStore>(a.store);
  } catch (const StoreError& e) {
    throw CliFailure{kExitPartialAbort, e.what()};
  }

  out << "plan: " << p.summary() << "\n";
  SignalGuard guard;
  opts.should_stop = [] { return g_interrupted.load(); };
  opts.on_report = [&](const StoredReport& r, std::size_t stored) {
    if (a.progress_every && stored % a.progress_every == 0) {
      out << "progress: " << stored << " stored, last " << r.domain << " " << to_string(r.status) << "\n";
    }
  };

  BatchStats st;
  try {
    st = run(p, *src.prober, *store, opts);
  } catch (const StoreError& e) {
    throw CliFailure{kExitDataError, e.what()};
  }
  out << "completed " << st.completed << ", excluded " << st.excluded << ", aborted " << st.aborted << ", skipped "
      << st.skipped << " of " << st.planned << "\n";
  out << "elapsed " << fmt4(st.elapsed.count()) << " s, configured rate "
      << (std::isinf(p.rate) ? std::string("unlimited") : fmt4(p.rate) + "/s") << ", effective rate "
      << fmt4(st.effective_rate()) << "/s\n";
  if (st.store_failed) {
    err << "store write failed: " << st.failure << "\n";
    return kExitPartialAbort;
  }
  if (st.interrupted) {
    err << "interrupted; rerun with the same --run-id to resume\n";
    return kExitPartialAbort;
  }
  return st.aborted ? kExitPartialAbort : kExitOk;
}

struct ReportArgs {
  std::string store;
  std::string out_dir;
  std::vector<int> top_tests;
  std::size_t k = 10;
  double cdf_step = 0.1;
  std::string weights;
  bool eq3_literal = false;
  std::string label = "dataset";
};

int cmd_report(const ReportArgs& a, std::ostream& out) {
  require_file(a.store, "store");
  std::vector<StoredReport> reports;
  try {
    reports = read_store(a.store);
  } catch (const StoreError& e) {
    throw CliFailure{kExitDataError, e.what()};
  }
  auto weights = load_weights(a.weights);
  DatasetSummary summary;
  try {
    summary = summarize(reports, weights, a.eq3_literal, a.cdf_step, a.label);
  } catch (const ReportError& e) {
    throw CliFailure{kExitDataError, e.what()};
  }
  std::vector<int> tests = a.top_tests;
  if (tests.empty()) tests = {4, 5, 7, 8};
  std::vector<ServerImpact> impacts;
  for (int t : tests) {
    auto id = test_from_ordinal(t);
    if (!id) throw CliFailure{kExitUsage, "unknown test id " + std::to_string(t)};
    impacts.push_back(server_impact(reports, *id, a.k));
  }
  ReportFiles files;
  try {
    files = emit_reports(summary, impacts, a.out_dir);
  } catch (const ReportError& e) {
    throw CliFailure{kExitPartialAbort, e.what()};
  }
  out << "domains " << summary.total << " (completed " << summary.completed << ", excluded " << summary.excluded
      << "), M_max " << fmt4(summary.m_max) << "\n";
  out << "wrote " << files.summary.string() << ", " << files.cdf.string() << ", " << files.impact.string() << "\n";
  return kExitOk;
}

struct FixtureArgs {
  std::string path;
  double duration = 0;
  SyntheticSpec spec;
  std::string out_fixture;
  std::string out_list;
};

int cmd_fixtures_validate(const FixtureArgs& a, std::ostream& out) {
  require_file(a.path, "fixture");
  try {
    auto u = load_universe(a.path);
    out << a.path << ": ok, " << u.servers.size() << " servers, " << u.hosted_zones().size() << " zones, "
        << u.delegations.size() << " delegations\n";
  } catch (const FixtureError& e) {
    throw CliFailure{kExitDataError, a.path + ": " + e.what()};
  }
  return kExitOk;
}

int cmd_fixtures_serve(const FixtureArgs& a, std::ostream& out) {
  require_file(a.path, "fixture");
  std::unique_ptr<FixtureUniverse> u;
  try {
    u = std::make_unique<FixtureUniverse>(load_universe(a.path));
  } catch (const FixtureError& e) {
    throw CliFailure{kExitDataError, a.path + ": " + e.what()};
  }
  LoopbackServer server(*u);
  for (const auto& b : server.bindings()) {
    out << b.logical.to_string() << " udp 127.0.0.1:" << b.endpoint.udp_port << " tcp 127.0.0.1:"
        << b.endpoint.tcp_port << "\n";
  }
  out.flush();
  SignalGuard guard;
  auto until = std::chrono::steady_clock::now() + std::chrono::duration<double>(a.duration);
  while (!g_interrupted && (a.duration <= 0 || std::chrono::steady_clock::now() < until)) {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  return kExitOk;
}

int cmd_fixtures_generate(const FixtureArgs& a, std::ostream& out) {
  SyntheticUniverse g;
  try {
    g = generate_universe(a.spec);
  } catch (const std::invalid_argument& e) {
    throw CliFailure{kExitUsage, e.what()};
  }
  auto write = [](const std::string& path, const std::string& body) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f << body;
    f.flush();
    if (!f) throw CliFailure{kExitPartialAbort, "cannot write " + path};
  };
  write(a.out_fixture, g.fixture);
  std::string list;
  for (const auto& d : g.domains) list += d.str() + "\n";
  write(a.out_list, list);
  out << "wrote " << a.out_fixture << " and " << a.out_list << " (" << g.domains.size() << " domains, "
      << g.unresolvable.size() << " unresolvable)\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"DNS delegation and misconfiguration auditor"};
  app.require_subcommand(1);

  CheckArgs check;
  auto* c = app.add_subcommand("check", "Audit one domain");
  c->add_option("domain", check.domain, "Domain to audit")->required();
  add_source_options(c, check.source);
  c->add_option("--weights", check.weights, "Weight file: '<test> <weight> <S|1>' per line");
  c->add_flag("--eq3-literal", check.eq3_literal, "Scale per-server weights by max(1, P/0.5)");
  c->add_option("--format", check.format, "Output format")->check(CLI::IsMember({"table", "ndjson"}));

  BatchArgs batch;
  auto* b = app.add_subcommand("batch", "Audit a list of domains into a report store");
  b->add_option("--input", batch.input, "Domain list, one per line")->required();
  b->add_option("--store", batch.store, "NDJSON report store (appended)")->required();
  b->add_option("--rate", batch.rate, "Domains dispatched per second")->check(CLI::PositiveNumber);
  b->add_flag("--no-rate-limit", batch.unlimited, "Dispatch as fast as workers allow");
  b->add_option("--seed", batch.seed, "Shuffle seed");
  b->add_option("--parallelism", batch.parallelism, "Concurrent audits")->check(CLI::Range(1, 1024));
  b->add_option("--run-id", batch.run_id, "Run identifier; stored pairs are skipped on rerun");
  b->add_option("--weights", batch.weights, "Weight file");
  b->add_flag("--eq3-literal", batch.eq3_literal, "Scale per-server weights by max(1, P/0.5)");
  b->add_option("--progress-every", batch.progress_every, "Print progress every N stored reports (0: never)");
  add_source_options(b, batch.source);

  ReportArgs report;
  auto* r = app.add_subcommand("report", "Summaries, CDF and server impact from a store");
  r->add_option("--store", report.store, "NDJSON report store")->required();
  r->add_option("--out", report.out_dir, "Output directory")->required();
  r->add_option("--top-servers", report.top_tests, "Test ids to rank servers for (default 4 5 7 8)");
  r->add_option("--k", report.k, "Ranking length")->check(CLI::PositiveNumber);
  r->add_option("--cdf-step", report.cdf_step, "CDF threshold step")->check(CLI::Range(0.001, 10.0));
  r->add_option("--weights", report.weights, "Weight file");
  r->add_flag("--eq3-literal", report.eq3_literal, "Scale per-server weights by max(1, P/0.5)");
  r->add_option("--label", report.label, "Dataset label");

  FixtureArgs fx;
  auto* f = app.add_subcommand("fixtures", "Fixture universe tools");
  f->require_subcommand(1);
  auto* fv = f->add_subcommand("validate", "Load and validate a fixture");
  fv->add_option("path", fx.path)->required();
  auto* fs_ = f->add_subcommand("serve", "Serve a fixture on loopback sockets");
  fs_->add_option("path", fx.path)->required();
  fs_->add_option("--duration", fx.duration, "Seconds to serve (default: until interrupted)");
  auto* fg = f->add_subcommand("generate", "Write a synthetic universe and its domain list");
  fg->add_option("--domains", fx.spec.domains)->check(CLI::PositiveNumber);
  fg->add_option("--servers", fx.spec.servers)->check(CLI::Range(4, 250));
  fg->add_option("--unresolvable", fx.spec.unresolvable);
  fg->add_option("--seed", fx.spec.seed);
  fg->add_option("--out-fixture", fx.out_fixture)->required();
  fg->add_option("--out-list", fx.out_list)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (c->parsed()) return cmd_check(check, out);
    if (b->parsed()) return cmd_batch(batch, out, err);
    if (r->parsed()) return cmd_report(report, out);
    if (fv->parsed()) return cmd_fixtures_validate(fx, out);
    if (fs_->parsed()) return cmd_fixtures_serve(fx, out);
    if (fg->parsed()) return cmd_fixtures_generate(fx, out);
  } catch (const CliFailure& e) {
    err << "error: " << e.message << "\n";
    if (e.code == kExitUsage) err << app.help();
    return e.code;
  } catch (const TransportError& e) {
    err << "error: local network failure: " << e.what() << "\n";
    return kExitPartialAbort;
  }
  return kExitUsage;
}

}  // namespace dnsaudit
