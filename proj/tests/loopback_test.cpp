#include <doctest.h>

#include "dnsaudit/loopback.hpp"
#include "dnsaudit/tracer.hpp"
#include "support.hpp"

using namespace dnsaudit;

TEST_SUITE("loopback") {

TEST_CASE("every fixture address gets a real endpoint") {
  auto u = load_universe(testing::fixture("healthy.zl"));
  LoopbackServer server(u);
  std::size_t addresses = 0;
  for (const auto& s : u.servers) addresses += s.addresses.size();
  CHECK(server.bindings().size() == addresses);
  for (const auto& b : server.bindings()) {
    CHECK(b.endpoint.address == IpAddress::v4(127, 0, 0, 1));
    CHECK(b.endpoint.udp_port != 0);
    CHECK(b.endpoint.tcp_port != 0);
  }
}

TEST_CASE("socket answers equal in-process answers") {
  auto u = load_universe(testing::fixture("truncation.zl"));
  LoopbackServer server(u);
  SocketTransport sockets(server.endpoint_map());
  DnsQuestion q{DomainName::parse("big.test"), RRType::NS, false};
  auto tld = IpAddress::v4(10, 0, 1, 1);
  for (auto kind : {TransportKind::Udp, TransportKind::Tcp}) {
    auto wire = sockets.exchange(tld, q, kind, std::chrono::milliseconds(1000));
    auto sim = simulated_query(u, tld, q, kind);
    CHECK(wire.responded);
    CHECK(wire.same_content(sim));
  }
}

TEST_CASE("zone transfer over a stream") {
  auto u = load_universe(testing::fixture("isolation/t07_zone_transfer.zl"));
  LoopbackServer server(u);
  SocketTransport sockets(server.endpoint_map());
  Prober wire(sockets, u.roots, testing::fast_config());
  SimTransport sim_t(u);
  Prober sim(sim_t, u.roots, testing::fast_config());
  auto ns2 = *IpAddress::parse("198.51.100.53");
  auto a = wire.attempt_zone_transfer(ns2, DomainName::parse("example.test"));
  auto b = sim.attempt_zone_transfer(ns2, DomainName::parse("example.test"));
  CHECK(a.granted);
  CHECK(a.record_count == b.record_count);
}

TEST_CASE("unknown and disabled endpoints stay silent") {
  auto u = load_universe(testing::fixture("isolation/t01_udp.zl"));
  LoopbackServer server(u);
  SocketTransport sockets(server.endpoint_map());
  DnsQuestion q{DomainName::parse("example.test"), RRType::SOA, false};
  auto short_wait = std::chrono::milliseconds(150);
  CHECK_FALSE(sockets.exchange(IpAddress::v4(203, 0, 113, 9), q, TransportKind::Udp, short_wait).responded);
  CHECK_FALSE(sockets.exchange(*IpAddress::parse("198.51.100.53"), q, TransportKind::Udp, short_wait).responded);
  CHECK(sockets.exchange(*IpAddress::parse("198.51.100.53"), q, TransportKind::Tcp, short_wait).responded);
}

TEST_CASE("trace over sockets matches the simulation") {
  auto u = load_universe(testing::fixture("isolation/t06_loop.zl"));
  LoopbackServer server(u);
  SocketTransport sockets(server.endpoint_map());
  Prober wire(sockets, u.roots, testing::fast_config());
  SimTransport sim_t(u);
  Prober sim(sim_t, u.roots, testing::fast_config());
  auto d = DomainName::parse("example.test");
  CHECK(trace(wire, d) == trace(sim, d));
}

}
