#include <doctest.h>

#include <algorithm>

#include "dnsaudit/batch.hpp"
#include "dnsaudit/synthetic.hpp"
#include "support.hpp"

using namespace dnsaudit;

namespace {

std::vector<DomainName> names(std::size_t n) {
  std::vector<DomainName> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(DomainName::parse("d" + std::to_string(i) + ".test"));
  return out;
}

class BrokenTransport final : public Transport {
 public:
  DnsObservation exchange(const IpAddress&, const DnsQuestion&, TransportKind, std::chrono::milliseconds) override {
    throw TransportError("no route to host");
  }
};

}  // namespace

TEST_SUITE("batch") {

TEST_CASE("domain lists") {
  auto v = parse_domain_list("# list\nexample.test\n  Other.TEST  # trailing\n\n");
  CHECK(v == std::vector<DomainName>{DomainName::parse("example.test"), DomainName::parse("other.test")});
  CHECK_THROWS_WITH_AS(parse_domain_list("ok.test\nbad..name\n"), doctest::Contains("line 2"), BatchError);
  CHECK_THROWS_AS(read_domain_list("/nonexistent/list.txt"), BatchError);
}

TEST_CASE("plan validation") {
  CHECK_THROWS_AS(plan({}, 1), BatchError);
  CHECK_THROWS_AS(plan(names(3), 1, 0.0), BatchError);
  CHECK_THROWS_AS(plan(names(3), 1, -2.0), BatchError);
  CHECK_THROWS_AS(plan(names(3), 1, 1.0, 0), BatchError);
  auto p = plan(names(10), 1, 5.0);
  CHECK(p.projected_seconds() == 2.0);
  CHECK(plan(names(10), 1, kUnlimitedRate).projected_seconds() == 0.0);
  CHECK(p.summary().find("10 domains") != std::string::npos);
}

TEST_CASE("plans are seeded permutations") {
  auto input = names(40);
  auto a = plan(input, 42).domains;
  auto b = plan(input, 42).domains;
  auto c = plan(input, 43).domains;
  CHECK(a == b);
  CHECK(a != c);
  CHECK(a != input);
  auto sorted_a = a, sorted_in = input;
  std::sort(sorted_a.begin(), sorted_a.end());
  std::sort(sorted_in.begin(), sorted_in.end());
  CHECK(sorted_a == sorted_in);
}

TEST_CASE("shuffle matches a hand-rolled Fisher-Yates") {
  std::vector<int> v(20);
  for (int i = 0; i < 20; ++i) v[i] = i;
  auto expected = v;
  std::mt19937_64 rng(99);
  for (std::size_t i = expected.size() - 1; i > 0; --i) {
    std::uint64_t bound = i + 1;
    std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do x = rng();
    while (x >= limit);
    std::swap(expected[i], expected[x % bound]);
  }
  seeded_shuffle(v, 99);
  CHECK(v == expected);
}

TEST_CASE("rate limiter spacing") {
  auto start = RateLimiter::Clock::now();
  RateLimiter lim(50.0, start);
  std::vector<RateLimiter::Clock::time_point> grants;
  for (int i = 0; i < 6; ++i) grants.push_back(lim.acquire());
  CHECK(grants[0] - start >= std::chrono::microseconds(20000));
  for (std::size_t i = 1; i < grants.size(); ++i) CHECK(grants[i] - grants[i - 1] >= std::chrono::microseconds(20000));

  RateLimiter open(kUnlimitedRate);
  auto t0 = RateLimiter::Clock::now();
  for (int i = 0; i < 1000; ++i) open.acquire();
  CHECK(RateLimiter::Clock::now() - t0 < std::chrono::milliseconds(100));
}

TEST_CASE("run, resume and counts") {
  auto syn = generate_universe({12, 6, 2, 5});
  testing::SimWorld w(parse_universe(syn.fixture));
  testing::TempDir dir;
  ReportStore store(dir / "s.ndjson");
  BatchOptions opt;
  opt.run_id = "a";
  opt.audit = w.config();
  std::size_t callbacks = 0;
  opt.on_report = [&](const StoredReport&, std::size_t) { ++callbacks; };

  auto p = plan(syn.domains, 3, kUnlimitedRate, 4);
  auto stats = run(p, w.prober, store, opt);
  CHECK(stats.completed == 10);
  CHECK(stats.excluded == 2);
  CHECK(stats.aborted == 0);
  CHECK(callbacks == 12);
  CHECK(read_store(store.path()).size() == 12);

  auto again = run(p, w.prober, store, opt);
  CHECK(again.skipped == 12);
  CHECK(again.stored() == 0);

  opt.run_id = "b";
  auto other = run(p, w.prober, store, opt);
  CHECK(other.stored() == 12);
  CHECK(read_store(store.path()).size() == 24);
}

TEST_CASE("local failures become aborted records") {
  BrokenTransport t;
  Prober prober(t, {{DomainName::parse("a.root.test"), IpAddress::v4(10, 0, 0, 1)}}, testing::fast_config());
  testing::TempDir dir;
  ReportStore store(dir / "s.ndjson");
  auto stats = run(plan(names(3), 1, kUnlimitedRate, 2), prober, store, {});
  CHECK(stats.aborted == 3);
  auto back = read_store(store.path());
  REQUIRE(back.size() == 3);
  CHECK(back[0].note.find("no route") != std::string::npos);
}

TEST_CASE("stop request interrupts dispatch") {
  testing::SimWorld w(testing::fixture("healthy.zl"));
  testing::TempDir dir;
  ReportStore store(dir / "s.ndjson");
  BatchOptions opt;
  std::atomic<int> calls{0};
  opt.should_stop = [&] { return calls++ >= 2; };
  auto stats = run(plan(names(10), 1, kUnlimitedRate, 1), w.prober, store, opt);
  CHECK(stats.interrupted);
  CHECK(stats.stored() == 2);
}

TEST_CASE("store failure stops the batch") {
  testing::SimWorld w(testing::fixture("healthy.zl"));
  ReportStore store("/dev/full");
  auto stats = run(plan(names(5), 1, kUnlimitedRate, 1), w.prober, store, {});
  CHECK(stats.store_failed);
  CHECK_FALSE(stats.failure.empty());
  CHECK(stats.stored() == 0);
}

}
