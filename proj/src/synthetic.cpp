#include "dnsaudit/synthetic.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

#include "dnsaudit/ip.hpp"
#include "dnsaudit/random.hpp"

namespace dnsaudit {

namespace {

struct Host {
  std::string name;
  IpAddress v4;
  std::optional<IpAddress> v6;
};

std::string zone_of_reverse(const IpAddress& a) { return a.is_v4() ? "in-addr.arpa" : "ip6.arpa"; }

}  // namespace

SyntheticUniverse generate_universe(const SyntheticSpec& spec) {
  if (spec.servers < 4) throw std::invalid_argument("synthetic universe needs at least 4 servers");
  if (spec.domains == 0 || spec.domains > 60000) throw std::invalid_argument("domain count out of range");
  if (spec.unresolvable > spec.domains) throw std::invalid_argument("more unresolvable domains than domains");
  if (spec.servers > 250) throw std::invalid_argument("at most 250 servers");

  std::mt19937_64 rng(spec.seed);
  auto chance = [&](double p) { return uniform_unit(rng) < p; };
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(uniform_below(rng, n)); };

  SyntheticUniverse out;
  std::ostringstream f;
  f << "# synthetic universe: " << spec.domains << " domains, " << spec.servers << " servers, seed " << spec.seed
    << "\n";
  f << "root a.root.test 10.255.0.1\n";
  f << "canary www.canary.test\n";
  f << "server a.root.test ip=10.255.0.1\n";
  f << "server ns1.tld.test ip=10.255.0.2\n";
  f << "server ns2.tld.test ip=10.255.0.3\n";
  f << "zone . on a.root.test serial=1\n";
  f << "zone in-addr.arpa on a.root.test serial=1\n";
  f << "zone ip6.arpa on a.root.test serial=1\n";
  f << "zone test on ns1.tld.test serial=1\n";
  f << "zone test on ns2.tld.test serial=1\n";
  f << "delegate test from . ns=ns1.tld.test,ns2.tld.test\n";
  f << "rr test www.canary.test A 10.255.0.99\n";

  std::vector<Host> hosts;
  for (std::size_t i = 0; i < spec.servers; ++i) {
    Host h;
    h.name = "ns" + std::to_string(i) + ".hosting.test";
    // Consecutive pairs share a /24.
    h.v4 = IpAddress::v4(198, 18, static_cast<std::uint8_t>(i / 2), static_cast<std::uint8_t>(10 + i));
    if (chance(0.5)) h.v6 = IpAddress::parse("2001:db8:" + std::to_string(i + 1) + "::53");
    f << "server " << h.name << " ip=" << h.v4.to_string();
    if (h.v6) f << "," << h.v6->to_string();
    if (chance(0.05)) f << " udp=off";
    if (chance(0.07)) f << " tcp=off";
    if (chance(0.12)) f << " rd=on";
    f << "\n";
    hosts.push_back(h);
  }
  for (std::size_t i = 0; i < hosts.size(); ++i) {
    for (const auto& a : {std::optional<IpAddress>(hosts[i].v4), hosts[i].v6}) {
      if (!a) continue;
      double u = uniform_unit(rng);
      std::string target;
      if (u < 0.75) {
        target = hosts[i].name;
      } else if (u < 0.85) {
        target = hosts[(i + 1) % hosts.size()].name;
      } else {
        continue;
      }
      auto rev = a->reverse_name();
      rev.pop_back();
      f << "rr " << zone_of_reverse(*a) << " " << rev << " PTR " << target << "\n";
    }
  }

  std::set<std::size_t> broken;
  {
    std::vector<std::size_t> idx(spec.domains);
    for (std::size_t j = 0; j < spec.domains; ++j) idx[j] = j;
    seeded_shuffle(idx, spec.seed ^ 0x9e3779b97f4a7c15ull);
    broken.insert(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(spec.unresolvable));
  }

  std::size_t broken_seen = 0;
  for (std::size_t j = 0; j < spec.domains; ++j) {
    std::string dom = "dom" + std::to_string(j) + ".test";
    out.domains.push_back(DomainName::parse(dom));

    std::vector<std::size_t> order(hosts.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = 0; i < 4; ++i) std::swap(order[i], order[i + pick(order.size() - i)]);

    if (broken.count(j)) {
      out.unresolvable.push_back(out.domains.back());
      // Alternate between no delegation at all and a delegation to servers
      // that never heard of the zone.
      if (broken_seen++ % 2 == 1) {
        f << "delegate " << dom << " from test ns=" << hosts[order[0]].name << "," << hosts[order[1]].name << "\n";
      }
      continue;
    }

    double u = uniform_unit(rng);
    std::size_t k = u < 0.10 ? 1 : (u < 0.70 ? 2 : 3);
    std::vector<std::size_t> listed(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    std::optional<std::size_t> lame, stealth;
    if (chance(0.08)) lame = order[3];
    else if (chance(0.06)) stealth = order[3];

    std::uint32_t serial = 2014100000u + static_cast<std::uint32_t>(j);
    bool stale = k >= 2 && chance(0.08);
    bool signed_zone = chance(0.35);
    for (std::size_t n = 0; n < listed.size() + (stealth ? 1 : 0); ++n) {
      std::size_t h = n < listed.size() ? listed[n] : *stealth;
      std::uint32_t s = stale && n == listed.size() - 1 ? serial - 1 : serial;
      f << "zone " << dom << " on " << hosts[h].name << " serial=" << s;
      if (chance(0.06)) f << " axfr=open";
      if (signed_zone) f << " signed=yes";
      f << "\n";
    }

    std::vector<std::size_t> parent = listed;
    if (lame) parent.push_back(*lame);
    f << "delegate " << dom << " from test ns=";
    for (std::size_t n = 0; n < parent.size(); ++n) f << (n ? "," : "") << hosts[parent[n]].name;
    f << "\n";
    if (stealth) {
      for (auto h : parent) f << "rr " << dom << " @ NS " << hosts[h].name << "\n";
      f << "rr " << dom << " @ NS " << hosts[*stealth].name << "\n";
    }
    if (signed_zone && chance(0.6)) f << "rr test " << dom << " DS 12345 8 2 " << std::string(64, 'a') << "\n";
    if (chance(0.03)) f << "loop " << dom << " on ns2.tld.test refer=test\n";

    std::string v4 = "100.64." + std::to_string(j / 250) + "." + std::to_string(j % 250 + 1);
    f << "rr " << dom << " @ A " << v4 << "\n";
    f << "rr " << dom << " www." << dom << " A " << v4 << "\n";
    if (chance(0.4)) f << "rr " << dom << " www." << dom << " AAAA 2001:db8:ffff::" << std::hex << j + 1 << std::dec << "\n";
    if (chance(0.6)) {
      f << "rr " << dom << " @ MX 10 mail." << dom << "\n";
      f << "rr " << dom << " mail." << dom << " A " << v4 << "\n";
      if (chance(0.5)) f << "rr " << dom << " mail." << dom << " AAAA 2001:db8:fffe::" << std::hex << j + 1 << std::dec << "\n";
    }
  }
  out.fixture = f.str();
  return out;
}

}  // namespace dnsaudit
