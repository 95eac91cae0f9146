#include <doctest.h>

#include <algorithm>

#include "dnsaudit/suite.hpp"
#include "dnsaudit/tracer.hpp"
#include "support.hpp"

using namespace dnsaudit;

namespace {

struct Checked {
  explicit Checked(const std::string& fixture, const std::string& domain = "example.test")
      : world(testing::fixture(fixture)),
        trace(dnsaudit::trace(world.prober, DomainName::parse(domain))),
        suite(world.prober, world.u.canary) {}

  TestOutcome run(TestId id) const { return suite.run(id, trace); }

  testing::SimWorld world;
  DelegationTrace trace;
  MisconfigSuite suite;
};

std::vector<int> failing(const std::vector<TestOutcome>& outcomes) {
  std::vector<int> out;
  for (const auto& o : outcomes) {
    if (o.indicator) out.push_back(ordinal(o.test_id));
  }
  return out;
}

bool mentions(const TestOutcome& o, const std::string& text) {
  return std::any_of(o.evidence.begin(), o.evidence.end(),
                     [&](const std::string& e) { return e.find(text) != std::string::npos; });
}

}  // namespace

TEST_SUITE("suite") {

TEST_CASE("healthy domain passes everything") {
  Checked c("healthy.zl");
  auto all = c.suite.run_all(c.trace);
  REQUIRE(all.size() == kTestCount);
  for (std::size_t i = 0; i < all.size(); ++i) {
    CHECK(all[i].test_id == kAllTests[i]);
    CHECK(all[i].applicable);
  }
  CHECK(failing(all).empty());
}

TEST_CASE("combined faults fail their tests and nothing else") {
  Checked c("worst.zl");
  CHECK(failing(c.suite.run_all(c.trace)) == std::vector<int>{4, 7, 8});
}

TEST_CASE("UDP failure implicates the silent server") {
  Checked c("isolation/t01_udp.zl");
  auto o = c.run(TestId::UdpAvailability);
  CHECK(o.indicator == 1);
  CHECK(o.n_err == 1);
  CHECK(o.n_tot == 2);
  CHECK(o.implicated == std::vector<std::string>{"198.51.100.53"});
}

TEST_CASE("TCP failure") {
  Checked c("isolation/t02_tcp.zl");
  auto o = c.run(TestId::TcpAvailability);
  CHECK(o.indicator == 1);
  CHECK(o.n_err == 1);
  CHECK(o.implicated == std::vector<std::string>{"198.51.100.53"});
}

TEST_CASE("one authoritative server behind two names") {
  Checked c("isolation/t03_single_auth.zl");
  CHECK(c.run(TestId::SingleAuthoritative).indicator == 1);
  CHECK_FALSE(c.run(TestId::SecondarySync).applicable);
  CHECK_FALSE(c.run(TestId::Colocation).applicable);
}

TEST_CASE("lame and stealth servers") {
  Checked lame("isolation/t04_parent_nonauth.zl");
  auto o = lame.run(TestId::ParentNonAuthoritative);
  CHECK(o.n_err == 1);
  CHECK(o.n_tot == 3);
  CHECK(o.implicated == std::vector<std::string>{"203.0.113.53"});

  Checked stealth("isolation/t05_stealth.zl");
  auto s = stealth.run(TestId::StealthServer);
  CHECK(s.n_err == 1);
  CHECK(s.n_tot == 3);
  CHECK(s.implicated == std::vector<std::string>{"203.0.113.53"});
}

TEST_CASE("loop test implicates servers on the cycle") {
  Checked c("isolation/t06_loop.zl");
  auto o = c.run(TestId::DelegationLoop);
  CHECK(o.indicator == 1);
  CHECK(std::find(o.implicated.begin(), o.implicated.end(), "10.0.2.1") != o.implicated.end());
}

TEST_CASE("zone transfer, recursion and serials") {
  Checked axfr("isolation/t07_zone_transfer.zl");
  CHECK(axfr.run(TestId::ZoneTransfer).implicated == std::vector<std::string>{"198.51.100.53"});

  Checked rec("isolation/t08_recursion.zl");
  CHECK(rec.run(TestId::PublicRecursion).implicated == std::vector<std::string>{"198.51.100.53"});

  Checked stale("isolation/t09_stale_secondary.zl");
  auto o = stale.run(TestId::SecondarySync);
  CHECK(o.indicator == 1);
  CHECK(o.implicated == std::vector<std::string>{"198.51.100.53"});
}

TEST_CASE("recursion test needs a canary") {
  testing::SimWorld w(testing::fixture("isolation/t08_recursion.zl"));
  auto t = trace(w.prober, DomainName::parse("example.test"));
  MisconfigSuite blind(w.prober, std::nullopt);
  auto o = blind.test_public_recursion(t);
  CHECK_FALSE(o.applicable);
  CHECK(o.indicator == 0);
}

TEST_CASE("co-location needs every pair in one network") {
  Checked same("isolation/t10_colocation.zl");
  CHECK(same.run(TestId::Colocation).indicator == 1);
  Checked apart("healthy.zl");
  CHECK(apart.run(TestId::Colocation).indicator == 0);
}

TEST_CASE("reverse mapping classes") {
  Checked c("isolation/t11_reverse.zl");
  CHECK(c.suite.classify_address(*IpAddress::parse("192.0.2.53")) == PtrClass::Consistent);
  CHECK(c.suite.classify_address(*IpAddress::parse("198.51.100.53")) == PtrClass::NoPtr);
  auto o = c.run(TestId::ReverseMapping);
  CHECK(o.n_err == 1);
  CHECK(o.n_tot == 4);
  CHECK(std::string(to_string(PtrClass::PtrForwardMismatch)) == "ptr_forward_mismatch");
}

TEST_CASE("IPv6 categories") {
  Checked c("isolation/t12_ipv6.zl");
  auto o = c.run(TestId::Ipv6Support);
  CHECK(o.indicator == 1);
  CHECK(o.n_err == 3);
  CHECK(o.n_tot == 3);
}

TEST_CASE("DNSSEC presence and chain status") {
  Checked unsigned_zone("isolation/t13_dnssec.zl");
  CHECK(unsigned_zone.run(TestId::DnssecSupport).indicator == 1);

  Checked signed_zone("healthy.zl");
  auto o = signed_zone.run(TestId::DnssecSupport);
  CHECK(o.indicator == 0);
  CHECK(mentions(o, "full chain"));
}

TEST_CASE("unresolvable domain is excluded") {
  testing::SimWorld w(testing::fixture("healthy.zl"));
  auto t = trace(w.prober, DomainName::parse("missing.test"));
  MisconfigSuite s(w.prober, w.u.canary);
  CHECK_THROWS_AS(s.run_all(t), DomainExcluded);
  CHECK_THROWS_AS(s.test_udp_availability(t), ContractViolation);
}

TEST_CASE("outcome helpers") {
  auto o = make_outcome(TestId::TcpAvailability, 0, 3);
  CHECK(o.indicator == 0);
  CHECK(make_outcome(TestId::TcpAvailability, 2, 3).indicator == 1);
  auto na = inapplicable_outcome(TestId::SecondarySync, "one server");
  CHECK_FALSE(na.applicable);
  CHECK(na.indicator == 0);
  CHECK(test_from_ordinal(13) == TestId::DnssecSupport);
  CHECK_FALSE(test_from_ordinal(14));
  CHECK_FALSE(test_from_ordinal(0));
}

}
