#include "dnsaudit/probes.hpp"

#include <algorithm>

namespace dnsaudit {

namespace {

constexpr int kMaxResolveDepth = 8;
constexpr int kMaxReferrals = 16;

bool usable(const DnsObservation& obs) {
  if (!obs.responded) return false;
  switch (obs.rcode) {
    case Rcode::NoError:
    case Rcode::NxDomain:
      return true;
    default:
      return false;
  }
}

}  // namespace

std::vector<ResourceRecord> ResolveResult::of_type(RRType type) const {
  std::vector<ResourceRecord> out;
  for (const auto& rr : answers) {
    if (rr.type == type) out.push_back(rr);
  }
  return out;
}

Prober::Prober(Transport& transport, std::vector<RootHint> roots, ProbeConfig config)
    : transport_(&transport), roots_(std::move(roots)), config_(config) {}

DnsObservation Prober::query(const IpAddress& server, const DnsQuestion& question,
                             TransportKind kind) const {
  return dnsaudit::query(*transport_, server, question, kind, config_);
}

DnsObservation Prober::ask(const IpAddress& server, const DnsQuestion& question,
                           bool tcp_on_silence) const {
  auto obs = query(server, question, TransportKind::Udp);
  if ((obs.responded && obs.truncated) || (!obs.responded && tcp_on_silence)) {
    auto tcp = query(server, question, TransportKind::Tcp);
    if (tcp.responded || !obs.responded) return tcp;
  }
  return obs;
}

ZoneTransferResult Prober::attempt_zone_transfer(const IpAddress& server, const DomainName& zone) const {
  ZoneTransferResult out;
  auto obs = query(server, {zone, RRType::AXFR, false}, TransportKind::Tcp);
  if (!obs.responded) {
    out.reason = "unreachable";
    return out;
  }
  if (obs.rcode != Rcode::NoError) {
    out.reason = obs.rcode == Rcode::Refused ? "refused" : to_string(obs.rcode);
    return out;
  }
  auto stream = obs.section(Section::Answer);
  auto is_zone_soa = [&](const ResourceRecord& rr) { return rr.type == RRType::SOA && rr.owner == zone; };
  if (stream.size() < 2 || !is_zone_soa(stream.front()) || !is_zone_soa(stream.back())) {
    out.reason = stream.empty() ? "empty" : "incomplete";
    return out;
  }
  out.granted = true;
  out.record_count = stream.size() - 1;
  out.reason = "granted";
  return out;
}

RecursionCheck Prober::check_recursion(const IpAddress& server, const DomainName& canary) const {
  auto obs = ask(server, {canary, RRType::A, true});
  if (!obs.responded) return {false, "timeout"};
  if (!obs.recursion_available) return {false, "no-ra"};
  if (obs.section(Section::Answer).empty()) return {false, "empty-answer"};
  return {true, "resolved " + canary.str()};
}

std::optional<std::uint32_t> Prober::fetch_soa_serial(const IpAddress& server, const DomainName& zone) const {
  auto obs = ask(server, {zone, RRType::SOA, false});
  if (!obs.responded || !obs.authoritative_answer || obs.rcode != Rcode::NoError) return std::nullopt;
  for (const auto& rr : obs.answers(RRType::SOA)) {
    if (rr.owner == zone) return std::get<SoaData>(rr.rdata).serial;
  }
  return std::nullopt;
}

std::optional<DomainName> Prober::reverse_lookup(const IpAddress& address) const {
  auto result = resolve(DomainName::parse(address.reverse_name()), RRType::PTR);
  for (const auto& rr : result.of_type(RRType::PTR)) return *target_name(rr);
  return std::nullopt;
}

ResolveResult Prober::resolve(const DomainName& name, RRType type) const { return resolve(name, type, 0); }

std::vector<IpAddress> Prober::resolve_addresses(const DomainName& name) const {
  return resolve_addresses(name, 0);
}

std::vector<IpAddress> Prober::resolve_addresses(const DomainName& name, int depth) const {
  std::vector<IpAddress> out;
  for (auto type : {RRType::A, RRType::AAAA}) {
    for (const auto& rr : resolve(name, type, depth).of_type(type)) {
      const auto& ip = std::get<IpAddress>(rr.rdata);
      if (std::find(out.begin(), out.end(), ip) == out.end()) out.push_back(ip);
    }
  }
  return out;
}

ResolveResult Prober::resolve(const DomainName& name, RRType type, int depth) const {
  ResolveResult failed;
  if (depth > kMaxResolveDepth) return failed;

  std::vector<IpAddress> servers;
  for (const auto& r : roots_) servers.push_back(r.address);
  DomainName zone;

  for (int step = 0; step < kMaxReferrals; ++step) {
    bool advanced = false;
    for (const auto& server : servers) {
      auto obs = ask(server, {name, type, false}, true);
      if (!usable(obs)) continue;

      if (obs.authoritative_answer) {
        ResolveResult out;
        out.resolved = true;
        out.rcode = obs.rcode;
        out.answers = obs.section(Section::Answer);
        // Walk the CNAME chain inside the answer; resolve the tail if the
        // server did not supply it.
        DomainName cursor = name;
        for (int hops = 0; hops < kMaxResolveDepth; ++hops) {
          auto has = [&](RRType t) {
            return std::any_of(out.answers.begin(), out.answers.end(),
                               [&](const ResourceRecord& rr) { return rr.owner == cursor && rr.type == t; });
          };
          if (type == RRType::CNAME || has(type)) break;
          auto cname = std::find_if(out.answers.begin(), out.answers.end(), [&](const ResourceRecord& rr) {
            return rr.owner == cursor && rr.type == RRType::CNAME;
          });
          if (cname == out.answers.end()) break;
          cursor = *target_name(*cname);
        }
        if (cursor != name && std::none_of(out.answers.begin(), out.answers.end(),
                                           [&](const ResourceRecord& rr) { return rr.owner == cursor; })) {
          auto tail = resolve(cursor, type, depth + 1);
          out.rcode = tail.rcode;
          out.resolved = tail.resolved;
          out.answers.insert(out.answers.end(), tail.answers.begin(), tail.answers.end());
        }
        return out;
      }

      // Downward referral?
      std::optional<DomainName> cut;
      std::vector<DomainName> targets;
      for (const auto& rr : obs.in_section(Section::Authority, RRType::NS)) {
        if (!name.is_subdomain_of(rr.owner) || rr.owner.label_count() <= zone.label_count()) continue;
        if (cut && rr.owner != *cut) continue;
        cut = rr.owner;
        targets.push_back(*target_name(rr));
      }
      if (!cut) continue;

      std::vector<IpAddress> next;
      for (const auto& ns : targets) {
        bool glued = false;
        for (const auto& rr : obs.section(Section::Additional)) {
          if (rr.owner != ns || (rr.type != RRType::A && rr.type != RRType::AAAA)) continue;
          glued = true;
          const auto& ip = std::get<IpAddress>(rr.rdata);
          if (std::find(next.begin(), next.end(), ip) == next.end()) next.push_back(ip);
        }
        if (glued || ns.is_subdomain_of(*cut)) continue;
        for (const auto& ip : resolve_addresses(ns, depth + 1)) {
          if (std::find(next.begin(), next.end(), ip) == next.end()) next.push_back(ip);
        }
      }
      if (next.empty()) continue;
      zone = *cut;
      servers = std::move(next);
      advanced = true;
      break;
    }
    if (!advanced) return failed;
  }
  return failed;
}

}  // namespace dnsaudit
