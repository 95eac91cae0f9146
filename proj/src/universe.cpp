#include "dnsaudit/universe.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace dnsaudit {

namespace {

constexpr std::uint32_t kTtl = 3600;
constexpr std::size_t kAxfrRecordsPerMessage = 40;

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  put16(out, static_cast<std::uint16_t>(v >> 16));
  put16(out, static_cast<std::uint16_t>(v));
}

// Placeholder rdata; presence is all that is ever checked.
ResourceRecord synth_dnskey(const DomainName& zone) {
  OpaqueData key;
  put16(key.bytes, 257);
  key.bytes.push_back(3);
  key.bytes.push_back(8);
  key.bytes.insert(key.bytes.end(), 32, 0xAB);
  return {zone, RRType::DNSKEY, kTtl, key, Section::Answer};
}

ResourceRecord synth_rrsig(const DomainName& owner, RRType covered, const DomainName& signer) {
  OpaqueData sig;
  put16(sig.bytes, static_cast<std::uint16_t>(covered));
  sig.bytes.push_back(8);
  sig.bytes.push_back(static_cast<std::uint8_t>(owner.label_count()));
  put32(sig.bytes, kTtl);
  put32(sig.bytes, 0x7FFFFFFF);
  put32(sig.bytes, 0x50000000);
  put16(sig.bytes, 12345);
  for (const auto& label : signer.labels()) {
    sig.bytes.push_back(static_cast<std::uint8_t>(label.size()));
    sig.bytes.insert(sig.bytes.end(), label.begin(), label.end());
  }
  sig.bytes.push_back(0);
  sig.bytes.insert(sig.bytes.end(), 32, 0xCD);
  return {owner, RRType::RRSIG, kTtl, sig, Section::Answer};
}

ResourceRecord address_record(const DomainName& owner, const IpAddress& ip, Section section) {
  return {owner, ip.is_v4() ? RRType::A : RRType::AAAA, kTtl, ip, section};
}

bool on_off(const std::string& v, int line, const std::string& key) {
  if (v == "on" || v == "yes") return true;
  if (v == "off" || v == "no") return false;
  throw FixtureError(line, "bad value '" + v + "' for " + key);
}

DomainName parse_name(const std::string& text, int line) {
  auto n = DomainName::try_parse(text);
  if (!n) throw FixtureError(line, "bad domain name '" + text + "'");
  return *n;
}

IpAddress parse_ip(const std::string& text, int line) {
  auto ip = IpAddress::parse(text);
  if (!ip) throw FixtureError(line, "bad address '" + text + "'");
  return *ip;
}

std::pair<std::string, std::string> key_value(const std::string& tok, int line) {
  auto eq = tok.find('=');
  if (eq == std::string::npos) throw FixtureError(line, "expected key=value, got '" + tok + "'");
  return {tok.substr(0, eq), tok.substr(eq + 1)};
}

struct PendingLoop {
  int line;
  DomainName zone;
  DomainName server;
  DomainName target;
};

struct PendingZone {
  int line;
  DomainName zone;
  DomainName server;
  ZoneInstance inst;
  bool axfr_open;
};

}  // namespace

// ---------------------------------------------------------------------------
// Lookups

const FixtureServer* FixtureUniverse::server_at(const IpAddress& address) const {
  auto it = by_address_.find(address);
  return it == by_address_.end() ? nullptr : &servers[it->second];
}

const FixtureServer* FixtureUniverse::server_named(const DomainName& name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? nullptr : &servers[it->second];
}

const Delegation* FixtureUniverse::delegation_of(const DomainName& child) const {
  for (const auto& d : delegations) {
    if (d.child == child) return &d;
  }
  return nullptr;
}

std::set<DomainName> FixtureUniverse::hosted_zones() const { return hosted_; }

std::optional<DomainName> FixtureUniverse::enclosing_zone(const DomainName& name) const {
  DomainName cursor = name;
  while (true) {
    if (hosted_.count(cursor)) return cursor;
    if (cursor.is_root()) return std::nullopt;
    cursor = cursor.parent();
  }
}

std::vector<IpAddress> FixtureUniverse::addresses_of(const DomainName& name) const {
  return addresses_of(name, 0);
}

std::vector<IpAddress> FixtureUniverse::addresses_of(const DomainName& name, int depth) const {
  std::vector<IpAddress> out;
  if (depth > 8) return out;
  if (auto it = explicit_addresses_.find(name); it != explicit_addresses_.end()) {
    out = it->second;
  } else if (const auto* s = server_named(name)) {
    out = s->addresses;
  } else if (auto c = cnames_.find(name); c != cnames_.end()) {
    out = addresses_of(c->second, depth + 1);
  }
  return out;
}

std::vector<DomainName> FixtureUniverse::apex_ns(const DomainName& zone) const {
  std::vector<DomainName> out;
  if (auto it = zone_records.find(zone); it != zone_records.end()) {
    for (const auto& rr : it->second) {
      if (rr.owner == zone && rr.type == RRType::NS) out.push_back(*target_name(rr));
    }
  }
  if (!out.empty()) return out;
  if (const auto* d = delegation_of(zone)) return d->ns;
  for (const auto& s : servers) {
    if (s.authoritative_zones.count(zone)) out.push_back(s.name);
  }
  return out;
}

std::vector<ResourceRecord> FixtureUniverse::build_base_content(const DomainName& zone) const {
  std::vector<ResourceRecord> out;
  const std::vector<ResourceRecord>* explicit_rrs = nullptr;
  if (auto it = zone_records.find(zone); it != zone_records.end()) explicit_rrs = &it->second;

  bool explicit_apex_ns = false;
  if (explicit_rrs) {
    for (const auto& rr : *explicit_rrs) {
      explicit_apex_ns |= (rr.owner == zone && rr.type == RRType::NS);
    }
  }
  if (!explicit_apex_ns) {
    for (const auto& ns : apex_ns(zone)) out.push_back({zone, RRType::NS, kTtl, ns, Section::Answer});
  }
  if (explicit_rrs) out.insert(out.end(), explicit_rrs->begin(), explicit_rrs->end());

  auto below_cut = [&](const DomainName& name) {
    for (const auto& d : delegations) {
      if (d.parent == zone && name.is_subdomain_of(d.child)) return true;
    }
    return false;
  };

  // Server declarations double as address records in their enclosing zone.
  for (const auto& s : servers) {
    if (enclosing_zone(s.name) != zone || below_cut(s.name)) continue;
    bool has_explicit = false;
    if (explicit_rrs) {
      for (const auto& rr : *explicit_rrs) {
        has_explicit |= rr.owner == s.name &&
                        (rr.type == RRType::A || rr.type == RRType::AAAA || rr.type == RRType::CNAME);
      }
    }
    if (has_explicit) continue;
    for (const auto& ip : s.addresses) out.push_back(address_record(s.name, ip, Section::Answer));
  }

  for (const auto& d : delegations) {
    if (d.parent != zone) continue;
    for (const auto& ns : d.ns) out.push_back({d.child, RRType::NS, kTtl, ns, Section::Answer});
    for (const auto& [name, ip] : d.glue) out.push_back(address_record(name, ip, Section::Answer));
  }
  return out;
}

std::vector<ResourceRecord> FixtureUniverse::zone_content(const DomainName& zone,
                                                          const ZoneInstance& inst) const {
  std::vector<ResourceRecord> out;
  SoaData soa;
  auto ns = apex_ns(zone);
  soa.mname = ns.empty() ? zone : ns.front();
  soa.rname = zone.child("hostmaster");
  soa.serial = inst.serial;
  out.push_back({zone, RRType::SOA, kTtl, soa, Section::Answer});
  if (auto it = base_content_.find(zone); it != base_content_.end()) {
    out.insert(out.end(), it->second.begin(), it->second.end());
  }
  if (inst.signed_zone) out.push_back(synth_dnskey(zone));
  return out;
}

// ---------------------------------------------------------------------------
// Loading

void FixtureUniverse::finalize() {
  by_address_.clear();
  by_name_.clear();
  explicit_addresses_.clear();
  cnames_.clear();
  base_content_.clear();
  hosted_.clear();

  if (roots.empty()) throw FixtureError(0, "no roots declared");

  for (std::size_t i = 0; i < servers.size(); ++i) {
    const auto& s = servers[i];
    if (s.addresses.empty()) throw FixtureError(0, "server " + s.name.str() + " has no address");
    if (!by_name_.emplace(s.name, i).second) {
      throw FixtureError(0, "server " + s.name.str() + " declared twice");
    }
    std::set<IpAddress> own;
    for (const auto& ip : s.addresses) {
      if (!own.insert(ip).second) {
        throw FixtureError(0, "server " + s.name.str() + " lists " + ip.to_string() + " twice");
      }
      auto [it, inserted] = by_address_.emplace(ip, i);
      if (!inserted && !(s.shared_addresses || servers[it->second].shared_addresses)) {
        throw FixtureError(0, "address " + ip.to_string() + " used by both " +
                                  servers[it->second].name.str() + " and " + s.name.str() +
                                  " without shared=yes");
      }
    }
    for (const auto& [zone, inst] : s.authoritative_zones) hosted_.insert(zone);
  }

  for (const auto& r : roots) {
    const auto* s = server_at(r.address);
    if (s == nullptr) throw FixtureError(0, "root " + r.name.str() + " address " +
                                                r.address.to_string() + " is not a declared server");
    if (!s->authoritative_zones.count(DomainName{})) {
      throw FixtureError(0, "root server " + s->name.str() + " does not serve the root zone");
    }
  }

  for (const auto& [zone, rrs] : zone_records) {
    for (const auto& rr : rrs) {
      if (rr.type == RRType::A || rr.type == RRType::AAAA) {
        explicit_addresses_[rr.owner].push_back(std::get<IpAddress>(rr.rdata));
      } else if (rr.type == RRType::CNAME) {
        cnames_.emplace(rr.owner, *target_name(rr));
      }
    }
  }

  auto check_target = [&](const DomainName& ns, const std::string& context) {
    if (addresses_of(ns).empty()) {
      throw FixtureError(0, "dangling NS target " + ns.str() + " (" + context + ")");
    }
  };
  std::set<DomainName> delegated;
  for (const auto& d : delegations) {
    if (!delegated.insert(d.child).second) {
      throw FixtureError(0, "duplicate delegation of " + d.child.str());
    }
    for (const auto& ns : d.ns) check_target(ns, "delegation of " + d.child.str());
  }
  for (const auto& [zone, rrs] : zone_records) {
    for (const auto& rr : rrs) {
      if (rr.owner == zone && rr.type == RRType::NS) check_target(*target_name(rr), "apex of " + zone.str());
    }
  }
  for (const auto& s : servers) {
    for (const auto& [zone, target] : s.referral_overrides) {
      if (!hosted_.count(target) && !delegated.count(target)) {
        throw FixtureError(0, "loop on " + s.name.str() + " refers to unknown zone " + target.str());
      }
    }
  }

  for (const auto& zone : hosted_) base_content_.emplace(zone, build_base_content(zone));
}

FixtureUniverse parse_universe(std::string_view text) {
  FixtureUniverse u;
  std::vector<PendingZone> zones;
  std::vector<PendingLoop> loops;
  std::map<DomainName, int> rr_zone_line;

  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream fields(raw);
    std::vector<std::string> tok;
    for (std::string t; fields >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    const auto& directive = tok[0];

    if (directive == "root") {
      if (tok.size() != 3) throw FixtureError(line, "usage: root <ns_name> <ip>");
      u.roots.push_back({parse_name(tok[1], line), parse_ip(tok[2], line)});
    } else if (directive == "canary") {
      if (tok.size() != 2) throw FixtureError(line, "usage: canary <name>");
      u.canary = parse_name(tok[1], line);
    } else if (directive == "server") {
      if (tok.size() < 3) throw FixtureError(line, "usage: server <ns_name> ip=<addr>[,...] ...");
      FixtureServer s;
      s.name = parse_name(tok[1], line);
      for (std::size_t i = 2; i < tok.size(); ++i) {
        auto [k, v] = key_value(tok[i], line);
        if (k == "ip") {
          for (const auto& a : split(v, ',')) s.addresses.push_back(parse_ip(a, line));
        } else if (k == "udp") {
          s.udp_enabled = on_off(v, line, k);
        } else if (k == "tcp") {
          s.tcp_enabled = on_off(v, line, k);
        } else if (k == "rd") {
          s.recursion_offered = on_off(v, line, k);
        } else if (k == "ra") {
          s.advertises_recursion = on_off(v, line, k);
        } else if (k == "shared") {
          s.shared_addresses = on_off(v, line, k);
        } else {
          throw FixtureError(line, "unknown server option '" + k + "'");
        }
      }
      if (s.addresses.empty()) throw FixtureError(line, "server " + s.name.str() + " needs ip=");
      u.servers.push_back(std::move(s));
    } else if (directive == "zone") {
      if (tok.size() < 4 || tok[2] != "on") {
        throw FixtureError(line, "usage: zone <name> on <ns_name> serial=<n> [axfr=open|closed] [signed=yes|no]");
      }
      PendingZone z{line, parse_name(tok[1], line), parse_name(tok[3], line), {}, false};
      for (std::size_t i = 4; i < tok.size(); ++i) {
        auto [k, v] = key_value(tok[i], line);
        if (k == "serial") {
          try {
            auto serial = std::stoull(v);
            if (serial > 0xFFFFFFFFull) throw std::out_of_range("serial");
            z.inst.serial = static_cast<std::uint32_t>(serial);
          } catch (const std::exception&) {
            throw FixtureError(line, "bad serial '" + v + "'");
          }
        } else if (k == "axfr") {
          if (v != "open" && v != "closed") throw FixtureError(line, "axfr must be open or closed");
          z.axfr_open = v == "open";
        } else if (k == "signed") {
          z.inst.signed_zone = on_off(v, line, k);
        } else {
          throw FixtureError(line, "unknown zone option '" + k + "'");
        }
      }
      zones.push_back(z);
    } else if (directive == "rr") {
      if (tok.size() < 5) throw FixtureError(line, "usage: rr <zone> <owner> <type> <rdata>");
      auto zone = parse_name(tok[1], line);
      auto owner = tok[2] == "@" ? zone : parse_name(tok[2], line);
      if (!owner.is_subdomain_of(zone)) {
        throw FixtureError(line, "owner " + owner.str() + " is outside zone " + zone.str());
      }
      auto type = parse_rrtype(tok[3]);
      if (!type || *type == RRType::AXFR) throw FixtureError(line, "bad record type '" + tok[3] + "'");
      // rdata is the remainder of the line after the type token
      std::istringstream rest(raw);
      std::string skip;
      for (int i = 0; i < 4; ++i) rest >> skip;
      std::string rdata_text;
      std::getline(rest, rdata_text);
      ResourceRecord rr;
      rr.owner = owner;
      rr.type = *type;
      rr.ttl = kTtl;
      try {
        rr.rdata = parse_rdata(*type, rdata_text);
      } catch (const std::exception& e) {
        throw FixtureError(line, e.what());
      }
      u.zone_records[zone].push_back(std::move(rr));
      rr_zone_line.emplace(zone, line);
    } else if (directive == "delegate") {
      if (tok.size() < 5 || tok[2] != "from") {
        throw FixtureError(line, "usage: delegate <child> from <parent> ns=<name>[,...] [glue=<name>:<ip>...]");
      }
      Delegation d;
      d.child = parse_name(tok[1], line);
      d.parent = parse_name(tok[3], line);
      if (d.child == d.parent || !d.child.is_subdomain_of(d.parent)) {
        throw FixtureError(line, d.child.str() + " is not below " + d.parent.str());
      }
      for (std::size_t i = 4; i < tok.size(); ++i) {
        auto [k, v] = key_value(tok[i], line);
        if (k == "ns") {
          for (const auto& n : split(v, ',')) d.ns.push_back(parse_name(n, line));
        } else if (k == "glue") {
          for (const auto& g : split(v, ',')) {
            auto colon = g.find(':');
            if (colon == std::string::npos) throw FixtureError(line, "glue must be <name>:<ip>");
            d.glue.emplace_back(parse_name(g.substr(0, colon), line), parse_ip(g.substr(colon + 1), line));
          }
        } else {
          throw FixtureError(line, "unknown delegate option '" + k + "'");
        }
      }
      if (d.ns.empty()) throw FixtureError(line, "delegation of " + d.child.str() + " has no ns=");
      u.delegations.push_back(std::move(d));
    } else if (directive == "loop") {
      if (tok.size() != 5 || tok[2] != "on" || tok[4].rfind("refer=", 0) != 0) {
        throw FixtureError(line, "usage: loop <zone> on <ns_name> refer=<zone>");
      }
      loops.push_back({line, parse_name(tok[1], line), parse_name(tok[3], line),
                       parse_name(tok[4].substr(6), line)});
    } else {
      throw FixtureError(line, "unknown directive '" + directive + "'");
    }
  }

  auto find_server = [&](const DomainName& name, int at) -> FixtureServer& {
    for (auto& s : u.servers) {
      if (s.name == name) return s;
    }
    throw FixtureError(at, "undeclared server " + name.str());
  };
  for (const auto& z : zones) {
    auto& s = find_server(z.server, z.line);
    if (!s.authoritative_zones.emplace(z.zone, z.inst).second) {
      throw FixtureError(z.line, "duplicate zone ownership: " + z.zone.str() + " on " + s.name.str());
    }
    if (z.axfr_open) s.axfr_allowed.insert(z.zone);
  }
  for (const auto& l : loops) {
    auto& s = find_server(l.server, l.line);
    s.referral_overrides[l.zone] = l.target;
  }

  std::set<DomainName> hosted;
  for (const auto& z : zones) hosted.insert(z.zone);
  for (const auto& [zone, at] : rr_zone_line) {
    if (!hosted.count(zone)) throw FixtureError(at, "rr for zone " + zone.str() + " which no server hosts");
  }
  for (auto& d : u.delegations) {
    if (!hosted.count(d.parent)) {
      throw FixtureError(0, "delegation of " + d.child.str() + " from unhosted zone " + d.parent.str());
    }
  }

  // In-bailiwick NS targets without explicit glue get it from fixture knowledge,
  // the way a registry would insist.
  FixtureUniverse probe = u;
  probe.finalize();
  for (auto& d : u.delegations) {
    for (const auto& ns : d.ns) {
      if (!ns.is_subdomain_of(d.child)) continue;
      bool has_glue = std::any_of(d.glue.begin(), d.glue.end(), [&](const auto& g) { return g.first == ns; });
      if (has_glue) continue;
      for (const auto& ip : probe.addresses_of(ns)) d.glue.emplace_back(ns, ip);
    }
  }
  u.finalize();
  return u;
}

FixtureUniverse load_universe(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FixtureError(0, "cannot open fixture file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_universe(buf.str());
}

// ---------------------------------------------------------------------------
// Serving

namespace {

struct Answer {
  Rcode rcode = Rcode::NoError;
  bool authoritative = false;
  std::vector<ResourceRecord> records;
};

void add(std::vector<ResourceRecord>& out, ResourceRecord rr, Section section) {
  rr.section = section;
  out.push_back(std::move(rr));
}

void add_glue(const std::vector<ResourceRecord>& content, const std::vector<DomainName>& targets,
              std::vector<ResourceRecord>& out) {
  for (const auto& ns : targets) {
    for (const auto& rr : content) {
      if (rr.owner == ns && (rr.type == RRType::A || rr.type == RRType::AAAA)) add(out, rr, Section::Additional);
    }
  }
}

Answer referral_to(const FixtureUniverse& u, const DomainName& target) {
  Answer a;
  std::vector<DomainName> ns;
  if (const auto* d = u.delegation_of(target)) {
    ns = d->ns;
  } else {
    ns = u.apex_ns(target);
  }
  for (const auto& n : ns) add(a.records, {target, RRType::NS, kTtl, n, Section::Authority}, Section::Authority);
  for (const auto& n : ns) {
    for (const auto& ip : u.addresses_of(n)) a.records.push_back(address_record(n, ip, Section::Additional));
  }
  return a;
}

Answer answer_from_zone(const FixtureUniverse& u, const DomainName& zone, const ZoneInstance& inst,
                        const DnsQuestion& q) {
  Answer a;
  auto content = u.zone_content(zone, inst);
  const auto& qname = q.qname;

  // Zone cut below this zone: refer, except DS which the parent owns.
  const Delegation* cut = nullptr;
  for (const auto& d : u.delegations) {
    if (d.parent == zone && qname.is_subdomain_of(d.child)) {
      if (cut == nullptr || d.child.label_count() > cut->child.label_count()) cut = &d;
    }
  }
  if (cut != nullptr && !(qname == cut->child && q.qtype == RRType::DS)) {
    for (const auto& rr : content) {
      if (rr.owner == cut->child && rr.type == RRType::NS) add(a.records, rr, Section::Authority);
    }
    add_glue(content, cut->ns, a.records);
    return a;
  }

  a.authoritative = true;
  auto soa_authority = [&] {
    add(a.records, content.front(), Section::Authority);
  };

  if (q.qtype == RRType::RRSIG) {
    if (inst.signed_zone) {
      std::vector<RRType> types;
      for (const auto& rr : content) {
        if (rr.owner == qname && std::find(types.begin(), types.end(), rr.type) == types.end()) {
          types.push_back(rr.type);
        }
      }
      for (auto t : types) add(a.records, synth_rrsig(qname, t, zone), Section::Answer);
    }
    if (a.records.empty()) soa_authority();
    return a;
  }

  DomainName owner = qname;
  for (int hops = 0; hops < 8; ++hops) {
    std::vector<ResourceRecord> matching;
    const ResourceRecord* cname = nullptr;
    for (const auto& rr : content) {
      if (rr.owner != owner) continue;
      if (rr.type == q.qtype) matching.push_back(rr);
      if (rr.type == RRType::CNAME) cname = &rr;
    }
    if (!matching.empty()) {
      for (auto& rr : matching) add(a.records, rr, Section::Answer);
      if (q.qtype == RRType::NS || q.qtype == RRType::MX) {
        std::vector<DomainName> targets;
        for (const auto& rr : matching) {
          if (const auto* t = target_name(rr)) targets.push_back(*t);
          if (const auto* mx = std::get_if<MxData>(&rr.rdata)) targets.push_back(mx->exchange);
        }
        add_glue(content, targets, a.records);
      }
      return a;
    }
    if (cname != nullptr && q.qtype != RRType::CNAME) {
      add(a.records, *cname, Section::Answer);
      owner = *target_name(*cname);
      if (!owner.is_subdomain_of(zone)) return a;
      continue;
    }
    if (owner != qname) return a;  // chased CNAME target without data
    bool exists = std::any_of(content.begin(), content.end(),
                              [&](const ResourceRecord& rr) { return rr.owner.is_subdomain_of(qname); });
    if (!exists) a.rcode = Rcode::NxDomain;
    soa_authority();
    return a;
  }
  return a;
}

// Recursive resolution on behalf of an open resolver: answers straight from
// the deepest hosted zone, following CNAMEs across zones.
Answer resolve_in_universe(const FixtureUniverse& u, const DnsQuestion& q, int depth) {
  Answer out;
  auto zone = u.enclosing_zone(q.qname);
  if (!zone || depth > 8) {
    out.rcode = Rcode::ServFail;
    return out;
  }
  const ZoneInstance* inst = nullptr;
  for (const auto& s : u.servers) {
    if (auto it = s.authoritative_zones.find(*zone); it != s.authoritative_zones.end()) {
      inst = &it->second;
      break;
    }
  }
  auto a = answer_from_zone(u, *zone, *inst, q);
  if (!a.authoritative) {
    out.rcode = Rcode::ServFail;
    return out;
  }
  out.rcode = a.rcode;
  for (const auto& rr : a.records) {
    if (rr.section == Section::Answer) out.records.push_back(rr);
  }
  if (!out.records.empty() && out.records.back().type == RRType::CNAME && q.qtype != RRType::CNAME) {
    const auto& target = *target_name(out.records.back());
    if (!target.is_subdomain_of(*zone)) {
      auto next = resolve_in_universe(u, {target, q.qtype, true}, depth + 1);
      out.rcode = next.rcode;
      out.records.insert(out.records.end(), next.records.begin(), next.records.end());
    }
  }
  return out;
}

DnsMessage base_response(const DnsQuestion& q, const FixtureServer& s) {
  DnsMessage m;
  m.response = true;
  m.recursion_desired = q.recursion_desired;
  m.recursion_available = s.recursion_offered || s.advertises_recursion;
  m.questions.push_back(q);
  return m;
}

}  // namespace

std::optional<std::vector<DnsMessage>> simulated_response(const FixtureUniverse& u,
                                                          const IpAddress& server,
                                                          const DnsQuestion& q,
                                                          TransportKind kind) {
  const auto* s = u.server_at(server);
  if (s == nullptr) return std::nullopt;
  if (kind == TransportKind::Udp && !s->udp_enabled) return std::nullopt;
  if (kind == TransportKind::Tcp && !s->tcp_enabled) return std::nullopt;

  auto msg = base_response(q, *s);

  if (q.qtype == RRType::AXFR) {
    auto it = s->authoritative_zones.find(q.qname);
    if (kind != TransportKind::Tcp) {
      msg.rcode = Rcode::FormErr;
      return std::vector<DnsMessage>{msg};
    }
    if (it == s->authoritative_zones.end() || !s->axfr_allowed.count(q.qname)) {
      msg.rcode = Rcode::Refused;
      return std::vector<DnsMessage>{msg};
    }
    auto content = u.zone_content(q.qname, it->second);
    content.push_back(content.front());
    std::vector<DnsMessage> stream;
    for (std::size_t i = 0; i < content.size(); i += kAxfrRecordsPerMessage) {
      auto part = msg;
      part.authoritative = true;
      auto end = std::min(content.size(), i + kAxfrRecordsPerMessage);
      part.records.assign(content.begin() + static_cast<std::ptrdiff_t>(i),
                          content.begin() + static_cast<std::ptrdiff_t>(end));
      stream.push_back(std::move(part));
    }
    return stream;
  }

  // Referral overrides inject referrals to an arbitrary zone (loops).
  const DomainName* override_target = nullptr;
  std::size_t override_depth = 0;
  for (const auto& [zone, target] : s->referral_overrides) {
    if (q.qname.is_subdomain_of(zone) && (override_target == nullptr || zone.label_count() >= override_depth)) {
      override_target = &target;
      override_depth = zone.label_count();
    }
  }

  Answer a;
  const DomainName* zone = nullptr;
  for (const auto& [z, inst] : s->authoritative_zones) {
    if (q.qname.is_subdomain_of(z) && (zone == nullptr || z.label_count() > zone->label_count())) zone = &z;
  }
  if (override_target != nullptr && (zone == nullptr || override_depth >= zone->label_count())) {
    a = referral_to(u, *override_target);
  } else if (zone != nullptr) {
    a = answer_from_zone(u, *zone, s->authoritative_zones.at(*zone), q);
  } else if (s->recursion_offered && q.recursion_desired) {
    a = resolve_in_universe(u, q, 0);
  } else if (s->advertises_recursion) {
    a.rcode = Rcode::NoError;
  } else {
    a.rcode = Rcode::Refused;
  }
  msg.rcode = a.rcode;
  msg.authoritative = a.authoritative;
  msg.records = std::move(a.records);

  if (kind == TransportKind::Udp && encode_message(msg).size() > kClassicUdpLimit) {
    msg.truncated = true;
    msg.records.clear();
  }
  return std::vector<DnsMessage>{msg};
}

DnsObservation simulated_query(const FixtureUniverse& u, const IpAddress& server,
                               const DnsQuestion& q, TransportKind kind) {
  auto stream = simulated_response(u, server, q, kind);
  if (!stream) {
    DnsObservation silent;
    silent.transport = kind;
    return silent;
  }
  auto obs = observation_from(stream->front(), kind, std::chrono::milliseconds{0});
  for (std::size_t i = 1; i < stream->size(); ++i) {
    obs.records.insert(obs.records.end(), (*stream)[i].records.begin(), (*stream)[i].records.end());
  }
  return obs;
}

}  // namespace dnsaudit
