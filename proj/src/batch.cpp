#include "dnsaudit/batch.hpp"

#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

namespace dnsaudit {

std::vector<DomainName> parse_domain_list(std::string_view text) {
  std::vector<DomainName> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    auto last = line.find_last_not_of(" \t\r");
    auto name = line.substr(first, last - first + 1);
    auto parsed = DomainName::try_parse(name);
    if (!parsed || parsed->is_root()) {
      throw BatchError("line " + std::to_string(lineno) + ": invalid domain '" + name + "'");
    }
    out.push_back(*parsed);
  }
  return out;
}

std::vector<DomainName> read_domain_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw BatchError("cannot read domain list " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_domain_list(buf.str());
}

double BatchPlan::projected_seconds() const {
  if (std::isinf(rate)) return 0.0;
  return static_cast<double>(domains.size()) / rate;
}

std::string BatchPlan::summary() const {
  std::ostringstream out;
  out << domains.size() << " domains, seed " << seed << ", parallelism " << parallelism << ", ";
  if (std::isinf(rate)) {
    out << "rate unlimited";
  } else {
    out << "rate " << rate << "/s, projected duration >= " << projected_seconds() << " s";
  }
  return out.str();
}

BatchPlan plan(std::vector<DomainName> domains, std::uint64_t seed, double rate, std::size_t parallelism) {
  if (domains.empty()) throw BatchError("domain list is empty");
  if (!(rate > 0.0)) throw BatchError("rate must be positive");
  if (parallelism < 1) throw BatchError("parallelism must be at least 1");
  seeded_shuffle(domains, seed);
  return BatchPlan{std::move(domains), rate, seed, parallelism};
}

RateLimiter::RateLimiter(double rate, Clock::time_point start) {
  if (!(rate > 0.0)) throw BatchError("rate must be positive");
  if (std::isinf(rate)) {
    next_ = start;
    return;
  }
  period_ = std::chrono::microseconds(static_cast<std::int64_t>(std::ceil(1e6 / rate)));
  next_ = start + *period_;
}

RateLimiter::Clock::time_point RateLimiter::acquire() {
  std::lock_guard lock(mu_);
  if (!period_) return Clock::now();
  std::this_thread::sleep_until(next_);
  auto now = Clock::now();
  next_ = now + *period_;
  return now;
}

double BatchStats::effective_rate() const {
  double secs = elapsed.count();
  return secs > 0.0 ? static_cast<double>(stored()) / secs : 0.0;
}

BatchStats run(const BatchPlan& plan, const Prober& prober, ReportStore& store, const BatchOptions& options) {
  using Clock = RateLimiter::Clock;
  BatchStats stats;
  stats.planned = plan.domains.size();

  auto stored = store.keys();
  std::vector<DomainName> pending;
  for (const auto& d : plan.domains) {
    if (stored.count({d.str(), options.run_id})) {
      ++stats.skipped;
    } else {
      pending.push_back(d);
    }
  }

  const auto steady_base = Clock::now();
  const auto wall_base = std::chrono::duration_cast<std::chrono::microseconds>(
                             std::chrono::system_clock::now().time_since_epoch())
                             .count();
  auto stamp = [&](Clock::time_point t) {
    return wall_base + std::chrono::duration_cast<std::chrono::microseconds>(t - steady_base).count();
  };

  RateLimiter limiter(plan.rate, steady_base);
  std::mutex dispatch_mu, write_mu;
  std::size_t next = 0;
  std::atomic<bool> stop{false};

  auto worker = [&] {
    for (;;) {
      std::size_t i;
      std::int64_t ts;
      {
        std::lock_guard lock(dispatch_mu);
        if (stop || next >= pending.size()) return;
        if (options.should_stop && options.should_stop()) {
          stats.interrupted = true;
          stop = true;
          return;
        }
        i = next++;
        ts = stamp(limiter.acquire());
      }

      StoredReport report;
      try {
        report = make_report(audit_domain(prober, pending[i], options.audit), options.run_id, ts);
      } catch (const std::exception& e) {
        report = aborted_report(pending[i], options.run_id, ts, e.what());
      }

      std::lock_guard lock(write_mu);
      if (stats.store_failed) return;
      try {
        store.append(report);
      } catch (const StoreError& e) {
        stats.store_failed = true;
        stats.failure = e.what();
        stop = true;
        return;
      }
      switch (report.status) {
        case ReportStatus::Completed: ++stats.completed; break;
        case ReportStatus::ExcludedUnresolvable: ++stats.excluded; break;
        case ReportStatus::Aborted: ++stats.aborted; break;
      }
      if (options.on_report) options.on_report(report, stats.stored());
    }
  };

  std::size_t threads = std::min(plan.parallelism, std::max<std::size_t>(pending.size(), 1));
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  stats.elapsed = Clock::now() - steady_base;
  return stats;
}

}  // namespace dnsaudit
