#include "dnsaudit/suite.hpp"

#include <algorithm>

namespace dnsaudit {

const char* to_string(PtrClass c) {
  switch (c) {
    case PtrClass::NoPtr: return "no_ptr";
    case PtrClass::PtrDangling: return "ptr_dangling";
    case PtrClass::PtrForwardMismatch: return "ptr_forward_mismatch";
    case PtrClass::Consistent: return "consistent";
  }
  return "?";
}

namespace {

std::string label(const ServerRef& s) {
  std::string out = s.ns_name.str() + " (";
  for (std::size_t i = 0; i < s.endpoint.addresses.size(); ++i) {
    if (i) out += ", ";
    out += s.endpoint.addresses[i].to_string();
  }
  return out + ")";
}

void require_resolvable(const DelegationTrace& trace) {
  if (trace.unresolvable) throw ContractViolation("test run on unresolvable domain " + trace.domain.str());
}

void implicate(TestOutcome& out, const ServerRef& s, std::string why) {
  out.evidence.push_back(label(s) + ": " + std::move(why));
  if (std::find(out.implicated.begin(), out.implicated.end(), s.identity()) == out.implicated.end()) {
    out.implicated.push_back(s.identity());
  }
}

// Fixed-scale tests report n_tot = n_err = indicator.
TestOutcome flag(TestId id, bool failed) { return make_outcome(id, failed ? 1 : 0, failed ? 1 : 0); }

bool answers_soa(const Prober& p, const IpAddress& addr, const DomainName& zone, TransportKind kind) {
  return p.query(addr, {zone, RRType::SOA, false}, kind).responded;
}

bool has_record(const DnsObservation& obs, const DomainName& owner, RRType type) {
  auto rrs = obs.answers(type);
  return std::any_of(rrs.begin(), rrs.end(), [&](const ResourceRecord& rr) { return rr.owner == owner; });
}

bool covers(const DnsObservation& obs, const DomainName& owner, RRType covered) {
  for (const auto& rr : obs.answers(RRType::RRSIG)) {
    if (rr.owner == owner && rrsig_type_covered(rr) == covered) return true;
  }
  return false;
}

}  // namespace

MisconfigSuite::MisconfigSuite(const Prober& prober, std::optional<DomainName> canary)
    : prober_(prober), canary_(std::move(canary)) {}

TestOutcome MisconfigSuite::test_udp_availability(const DelegationTrace& trace) const {
  require_resolvable(trace);
  auto out = make_outcome(TestId::UdpAvailability, 0, trace.servers.size());
  for (const auto& s : trace.servers) {
    bool ok = std::any_of(s.endpoint.addresses.begin(), s.endpoint.addresses.end(), [&](const IpAddress& a) {
      return answers_soa(prober_, a, trace.domain, TransportKind::Udp);
    });
    if (!ok) {
      ++out.n_err;
      implicate(out, s, s.endpoint.addresses.empty() ? "no address" : "no UDP response");
    }
  }
  out.indicator = out.n_err ? 1 : 0;
  return out;
}

TestOutcome MisconfigSuite::test_tcp_availability(const DelegationTrace& trace) const {
  require_resolvable(trace);
  auto out = make_outcome(TestId::TcpAvailability, 0, trace.servers.size());
  for (const auto& s : trace.servers) {
    // Addresses dead on both transports are left to test 1.
    for (const auto& a : s.endpoint.addresses) {
      if (!answers_soa(prober_, a, trace.domain, TransportKind::Udp)) continue;
      if (answers_soa(prober_, a, trace.domain, TransportKind::Tcp)) continue;
      ++out.n_err;
      implicate(out, s, "answers UDP but not TCP at " + a.to_string());
      break;
    }
  }
  out.indicator = out.n_err ? 1 : 0;
  return out;
}

TestOutcome MisconfigSuite::test_single_authoritative(const DelegationTrace& trace) const {
  require_resolvable(trace);
  std::vector<const ServerRef*> auth;
  for (const auto& s : trace.servers) {
    if (s.is_authoritative == true) auth.push_back(&s);
  }
  auto out = flag(TestId::SingleAuthoritative, auth.size() == 1);
  if (auth.size() == 1) implicate(out, *auth.front(), "only authoritative server");
  return out;
}

TestOutcome MisconfigSuite::test_parent_nonauth(const DelegationTrace& trace) const {
  auto cls = classify_servers(trace);
  auto out = make_outcome(TestId::ParentNonAuthoritative, cls.lame_parent_set.size(), cls.parent_set.size());
  for (const auto& s : cls.lame_parent_set) implicate(out, s, "listed by parent, not authoritative");
  return out;
}

TestOutcome MisconfigSuite::test_stealth(const DelegationTrace& trace) const {
  auto cls = classify_servers(trace);
  auto out = make_outcome(TestId::StealthServer, cls.stealth_set.size(), cls.child_set.size());
  for (const auto& s : cls.stealth_set) implicate(out, s, "listed only in the child zone");
  return out;
}

TestOutcome MisconfigSuite::test_loops(const DelegationTrace& trace) const {
  require_resolvable(trace);
  auto out = flag(TestId::DelegationLoop, trace.loop_detected);
  if (trace.loop_detected) {
    for (const auto& e : trace.evidence) {
      if (e.rfind("referral loop", 0) == 0) out.evidence.push_back(e);
    }
    for (const auto& hop : trace.loop_path) {
      auto id = hop.address.to_string();
      if (std::find(out.implicated.begin(), out.implicated.end(), id) == out.implicated.end()) {
        out.implicated.push_back(id);
      }
    }
  }
  return out;
}

TestOutcome MisconfigSuite::test_public_zone_transfer(const DelegationTrace& trace) const {
  require_resolvable(trace);
  auto out = make_outcome(TestId::ZoneTransfer, 0, trace.servers.size());
  for (const auto& s : trace.servers) {
    for (const auto& a : s.endpoint.addresses) {
      auto xfr = prober_.attempt_zone_transfer(a, trace.domain);
      if (!xfr.granted) continue;
      ++out.n_err;
      implicate(out, s, "grants AXFR at " + a.to_string() + " (" + std::to_string(xfr.record_count) + " records)");
      break;
    }
  }
  out.indicator = out.n_err ? 1 : 0;
  return out;
}

TestOutcome MisconfigSuite::test_public_recursion(const DelegationTrace& trace) const {
  require_resolvable(trace);
  if (!canary_) return inapplicable_outcome(TestId::PublicRecursion, "no canary name configured");
  auto out = make_outcome(TestId::PublicRecursion, 0, trace.servers.size());
  for (const auto& s : trace.servers) {
    for (const auto& a : s.endpoint.addresses) {
      auto rc = prober_.check_recursion(a, *canary_);
      if (!rc.offers_recursion) continue;
      ++out.n_err;
      implicate(out, s, "recursion open at " + a.to_string() + ", " + rc.reason);
      break;
    }
  }
  out.indicator = out.n_err ? 1 : 0;
  return out;
}

TestOutcome MisconfigSuite::test_secondary_sync(const DelegationTrace& trace) const {
  require_resolvable(trace);
  std::vector<std::pair<const ServerRef*, std::uint32_t>> serials;
  for (const auto& s : trace.servers) {
    if (s.is_authoritative != true) continue;
    for (const auto& a : s.endpoint.addresses) {
      if (auto serial = prober_.fetch_soa_serial(a, trace.domain)) {
        serials.emplace_back(&s, *serial);
        break;
      }
    }
  }
  if (serials.size() < 2) {
    return inapplicable_outcome(TestId::SecondarySync, "fewer than two authoritative serials");
  }
  std::uint32_t newest = 0;
  for (const auto& [s, serial] : serials) newest = std::max(newest, serial);
  bool diverged = std::any_of(serials.begin(), serials.end(), [&](const auto& p) { return p.second != newest; });
  auto out = flag(TestId::SecondarySync, diverged);
  for (const auto& [s, serial] : serials) {
    if (serial != newest) {
      implicate(out, *s, "serial " + std::to_string(serial) + " behind " + std::to_string(newest));
    }
  }
  return out;
}

TestOutcome MisconfigSuite::test_server_colocation(const DelegationTrace& trace) const {
  require_resolvable(trace);
  std::vector<const ServerRef*> placed;
  for (const auto& s : trace.servers) {
    if (!s.endpoint.addresses.empty()) placed.push_back(&s);
  }
  if (placed.size() < 2) {
    return inapplicable_outcome(TestId::Colocation, "fewer than two servers with addresses");
  }
  auto near = [](const ServerRef& x, const ServerRef& y) {
    for (const auto& a : x.endpoint.addresses) {
      for (const auto& b : y.endpoint.addresses) {
        if (a.same_prefix(b, a.is_v4() ? 24 : 48)) return true;
      }
    }
    return false;
  };
  bool colocated = true;
  for (std::size_t i = 0; i < placed.size() && colocated; ++i) {
    for (std::size_t j = i + 1; j < placed.size() && colocated; ++j) colocated = near(*placed[i], *placed[j]);
  }
  auto out = flag(TestId::Colocation, colocated);
  if (colocated) {
    for (const auto* s : placed) implicate(out, *s, "shares one /24 (IPv4) or /48 (IPv6) network");
  }
  return out;
}

PtrClass MisconfigSuite::classify_address(const IpAddress& address) const {
  auto ptr = prober_.reverse_lookup(address);
  if (!ptr) return PtrClass::NoPtr;
  auto forward = prober_.resolve_addresses(*ptr);
  if (forward.empty()) return PtrClass::PtrDangling;
  if (std::find(forward.begin(), forward.end(), address) == forward.end()) return PtrClass::PtrForwardMismatch;
  return PtrClass::Consistent;
}

TestOutcome MisconfigSuite::test_reverse_mapping(const DelegationTrace& trace) const {
  require_resolvable(trace);
  auto out = make_outcome(TestId::ReverseMapping, 0, 0);
  for (const auto& s : trace.servers) {
    for (const auto& a : s.endpoint.addresses) {
      ++out.n_tot;
      auto c = classify_address(a);
      if (c == PtrClass::Consistent) {
        out.evidence.push_back(a.to_string() + ": consistent");
        continue;
      }
      ++out.n_err;
      implicate(out, s, a.to_string() + " " + to_string(c));
    }
  }
  out.indicator = out.n_err ? 1 : 0;
  return out;
}

TestOutcome MisconfigSuite::test_ipv6_support(const DelegationTrace& trace) const {
  require_resolvable(trace);
  auto has_aaaa = [&](const DomainName& name) { return !prober_.resolve(name, RRType::AAAA).of_type(RRType::AAAA).empty(); };
  auto out = make_outcome(TestId::Ipv6Support, 0, 0);
  auto category = [&](const char* what, const std::vector<DomainName>& names) {
    if (names.empty()) {
      out.evidence.push_back(std::string(what) + ": none published, skipped");
      return;
    }
    ++out.n_tot;
    bool ok = std::any_of(names.begin(), names.end(), has_aaaa);
    if (!ok) ++out.n_err;
    out.evidence.push_back(std::string(what) + (ok ? ": AAAA present" : ": no AAAA"));
  };

  std::vector<DomainName> ns;
  for (const auto& s : trace.servers) {
    ns.push_back(s.ns_name);
    ns.insert(ns.end(), s.aliases.begin(), s.aliases.end());
  }
  category("NS", ns);

  std::vector<DomainName> mx;
  for (const auto& rr : prober_.resolve(trace.domain, RRType::MX).of_type(RRType::MX)) {
    mx.push_back(std::get<MxData>(rr.rdata).exchange);
  }
  category("MX", mx);

  auto www = trace.domain.child("www");
  std::vector<DomainName> web;
  if (!prober_.resolve(www, RRType::A).answers.empty() || has_aaaa(www)) web.push_back(www);
  category("WWW", web);

  out.indicator = out.n_err ? 1 : 0;
  return out;
}

TestOutcome MisconfigSuite::test_dnssec_support(const DelegationTrace& trace) const {
  require_resolvable(trace);
  const auto& zone = trace.domain;
  auto out = make_outcome(TestId::DnssecSupport, 0, 0);

  std::optional<IpAddress> server;
  for (const auto& s : trace.servers) {
    if (s.is_authoritative != true) continue;
    for (const auto& a : s.endpoint.addresses) {
      auto soa = prober_.ask(a, {zone, RRType::SOA, false}, true);
      if (soa.responded && soa.authoritative_answer) {
        server = a;
        break;
      }
    }
    if (server) break;
  }
  if (!server) return inapplicable_outcome(TestId::DnssecSupport, "no responsive authoritative server");

  auto check = [&](bool present, const std::string& what) {
    ++out.n_tot;
    if (!present) ++out.n_err;
    out.evidence.push_back(what + (present ? ": present" : ": missing"));
  };

  auto dnskey = prober_.ask(*server, {zone, RRType::DNSKEY, false}, true);
  check(has_record(dnskey, zone, RRType::DNSKEY), "DNSKEY");
  auto apex_sigs = prober_.ask(*server, {zone, RRType::RRSIG, false}, true);
  check(covers(apex_sigs, zone, RRType::NS), "RRSIG(NS)");

  auto apex_a = prober_.ask(*server, {zone, RRType::A, false}, true);
  if (has_record(apex_a, zone, RRType::A)) {
    check(covers(apex_sigs, zone, RRType::A), "RRSIG(A) at apex");
  } else {
    auto www = zone.child("www");
    auto www_a = prober_.ask(*server, {www, RRType::A, false}, true);
    if (has_record(www_a, www, RRType::A)) {
      auto www_sigs = prober_.ask(*server, {www, RRType::RRSIG, false}, true);
      check(covers(www_sigs, www, RRType::A), "RRSIG(A) at www");
    } else {
      out.evidence.push_back("no apex or www A RRset to cover");
    }
  }

  out.indicator = out.n_err ? 1 : 0;
  if (out.indicator == 0) {
    bool ds = false;
    for (const auto& p : trace.parent_servers) {
      ds = has_record(prober_.ask(p, {zone, RRType::DS, false}, true), zone, RRType::DS);
      if (ds) break;
    }
    out.evidence.push_back(ds ? "full chain" : "island, awaiting parent");
  }
  return out;
}

TestOutcome MisconfigSuite::run(TestId id, const DelegationTrace& trace) const {
  switch (id) {
    case TestId::UdpAvailability: return test_udp_availability(trace);
    case TestId::TcpAvailability: return test_tcp_availability(trace);
    case TestId::SingleAuthoritative: return test_single_authoritative(trace);
    case TestId::ParentNonAuthoritative: return test_parent_nonauth(trace);
    case TestId::StealthServer: return test_stealth(trace);
    case TestId::DelegationLoop: return test_loops(trace);
    case TestId::ZoneTransfer: return test_public_zone_transfer(trace);
    case TestId::PublicRecursion: return test_public_recursion(trace);
    case TestId::SecondarySync: return test_secondary_sync(trace);
    case TestId::Colocation: return test_server_colocation(trace);
    case TestId::ReverseMapping: return test_reverse_mapping(trace);
    case TestId::Ipv6Support: return test_ipv6_support(trace);
    case TestId::DnssecSupport: return test_dnssec_support(trace);
  }
  throw ContractViolation("unknown test id");
}

std::vector<TestOutcome> MisconfigSuite::run_all(const DelegationTrace& trace) const {
  if (trace.unresolvable) throw DomainExcluded(trace.domain.str() + ": no authoritative server found");
  std::vector<TestOutcome> out;
  out.reserve(kTestCount);
  for (auto id : kAllTests) out.push_back(run(id, trace));
  return out;
}

}  // namespace dnsaudit
