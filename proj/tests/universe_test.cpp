#include <doctest.h>

#include "dnsaudit/roots.hpp"
#include "dnsaudit/universe.hpp"
#include "support.hpp"

using namespace dnsaudit;

namespace {

const char* kMinimal =
    "root a.root.test 10.0.0.1\n"
    "server a.root.test ip=10.0.0.1\n"
    "server ns1.example.test ip=192.0.2.53\n"
    "zone . on a.root.test serial=1\n"
    "zone example.test on ns1.example.test serial=9\n"
    "delegate example.test from . ns=ns1.example.test\n";

int error_line(const std::string& text) {
  try {
    parse_universe(text);
  } catch (const FixtureError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST_SUITE("universe") {

TEST_CASE("every bundled fixture loads") {
  for (const auto& entry : std::filesystem::recursive_directory_iterator(FIXTURE_DIR)) {
    if (entry.path().extension() != ".zl") continue;
    CAPTURE(entry.path().string());
    CHECK_NOTHROW(load_universe(entry.path()));
  }
}

TEST_CASE("parse errors name the line") {
  CHECK(error_line(std::string(kMinimal) + "bogus directive\n") == 7);
  CHECK(error_line(std::string(kMinimal) + "server ns2.example.test ip=300.1.1.1\n") == 7);
  CHECK(error_line(std::string(kMinimal) + "zone x.test on ns1.example.test serial=abc\n") == 7);
  CHECK(error_line(std::string(kMinimal) + "rr example.test @ A not-an-ip\n") == 7);
  CHECK(error_line("root a.root.test\n") == 1);
}

TEST_CASE("whole-file validation") {
  // Zone on an undeclared server.
  CHECK_THROWS_AS(parse_universe(std::string(kMinimal) + "zone b.test on nowhere.test serial=1\n"), FixtureError);
  // Two servers on one address.
  CHECK_THROWS_AS(parse_universe(std::string(kMinimal) + "server ns2.example.test ip=192.0.2.53\n"),
                  FixtureError);
  CHECK_NOTHROW(parse_universe(std::string(kMinimal) +
                               "server ns2.example.test ip=192.0.2.53 shared=yes\n"));
  // No roots.
  CHECK_THROWS_AS(parse_universe("server a.root.test ip=10.0.0.1\nzone . on a.root.test serial=1\n"),
                  FixtureError);
}

TEST_CASE("authoritative answers, referrals and silence") {
  auto u = parse_universe(kMinimal);
  auto root = IpAddress::v4(10, 0, 0, 1);
  auto ns1 = IpAddress::v4(192, 0, 2, 53);

  auto ref = simulated_query(u, root, {DomainName::parse("www.example.test"), RRType::A, false}, TransportKind::Udp);
  CHECK(ref.responded);
  CHECK_FALSE(ref.authoritative_answer);
  REQUIRE(ref.in_section(Section::Authority, RRType::NS).size() == 1);
  CHECK(ref.in_section(Section::Additional, RRType::A).size() == 1);

  auto soa = simulated_query(u, ns1, {DomainName::parse("example.test"), RRType::SOA, false}, TransportKind::Udp);
  CHECK(soa.authoritative_answer);
  REQUIRE(soa.answers(RRType::SOA).size() == 1);
  CHECK(std::get<SoaData>(soa.answers(RRType::SOA)[0].rdata).serial == 9);

  auto nx = simulated_query(u, ns1, {DomainName::parse("nope.example.test"), RRType::A, false}, TransportKind::Udp);
  CHECK(nx.rcode == Rcode::NxDomain);
  CHECK(nx.authoritative_answer);

  auto refused = simulated_query(u, ns1, {DomainName::parse("other.test"), RRType::A, false}, TransportKind::Udp);
  CHECK(refused.rcode == Rcode::Refused);

  auto nobody = simulated_query(u, IpAddress::v4(203, 0, 113, 1), {DomainName::parse("example.test"), RRType::A, false},
                                TransportKind::Udp);
  CHECK_FALSE(nobody.responded);
}

TEST_CASE("server switches") {
  testing::SimWorld w(testing::fixture("isolation/t01_udp.zl"));
  auto ns2 = *IpAddress::parse("198.51.100.53");
  DnsQuestion q{DomainName::parse("example.test"), RRType::SOA, false};
  CHECK_FALSE(simulated_query(w.u, ns2, q, TransportKind::Udp).responded);
  CHECK(simulated_query(w.u, ns2, q, TransportKind::Tcp).responded);
}

TEST_CASE("AXFR stream is bracketed by SOA") {
  testing::SimWorld w(testing::fixture("isolation/t07_zone_transfer.zl"));
  auto open = w.prober.attempt_zone_transfer(*IpAddress::parse("198.51.100.53"), DomainName::parse("example.test"));
  CHECK(open.granted);
  CHECK(open.record_count > 4);
  auto closed = w.prober.attempt_zone_transfer(*IpAddress::parse("192.0.2.53"), DomainName::parse("example.test"));
  CHECK_FALSE(closed.granted);
}

TEST_CASE("fixture address knowledge follows CNAMEs") {
  testing::SimWorld w(testing::fixture("isolation/t03_single_auth.zl"));
  auto via_alias = w.u.addresses_of(DomainName::parse("ns2.example.test"));
  auto direct = w.u.addresses_of(DomainName::parse("ns1.example.test"));
  CHECK(via_alias == direct);
  CHECK(direct.size() == 2);
}

TEST_CASE("iterative resolution from the roots") {
  testing::SimWorld w(testing::fixture("healthy.zl"));
  auto r = w.prober.resolve(DomainName::parse("www.example.test"), RRType::AAAA);
  CHECK(r.resolved);
  REQUIRE(r.of_type(RRType::AAAA).size() == 1);
  CHECK(std::get<IpAddress>(r.of_type(RRType::AAAA)[0].rdata) == *IpAddress::parse("2001:db8:1::80"));
  CHECK(w.prober.reverse_lookup(*IpAddress::parse("192.0.2.53")) == DomainName::parse("ns1.example.test"));
  CHECK(w.prober.resolve(DomainName::parse("missing.example.test"), RRType::A).rcode == Rcode::NxDomain);
}

TEST_CASE("root hints") {
  auto hints = parse_root_hints("# comment\na.root.test 10.0.0.1\n\nb.root.test 2001:db8::1\n");
  REQUIRE(hints.size() == 2);
  CHECK(hints[1].address == *IpAddress::parse("2001:db8::1"));
  CHECK_THROWS_AS(parse_root_hints("a.root.test\n"), std::runtime_error);
  CHECK(default_root_hints().size() == 13);
  CHECK(load_root_hints(testing::fixture("../share/root.hints")) == default_root_hints());
}

}
