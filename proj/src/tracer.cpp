#include "dnsaudit/tracer.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace dnsaudit {

const char* to_string(ServerSource source) {
  switch (source) {
    case ServerSource::ParentOnly: return "parent_only";
    case ServerSource::ChildOnly: return "child_only";
    case ServerSource::Both: return "both";
  }
  return "?";
}

bool ServerEndpoint::same_server(const ServerEndpoint& other) const {
  for (const auto& a : addresses) {
    if (std::find(other.addresses.begin(), other.addresses.end(), a) != other.addresses.end()) return true;
  }
  return false;
}

std::string ServerRef::identity() const {
  if (endpoint.addresses.empty()) return ns_name.str();
  return std::min_element(endpoint.addresses.begin(), endpoint.addresses.end())->to_string();
}

namespace {

template <typename T>
void push_unique(std::vector<T>& v, const T& x) {
  if (std::find(v.begin(), v.end(), x) == v.end()) v.push_back(x);
}

std::string hop_text(const LoopHop& h) {
  return "(" + h.zone.str() + ", " + h.server.str() + "@" + h.address.to_string() + ")";
}

class Walker {
 public:
  Walker(const Prober& prober, const DomainName& domain, const TraceOptions& options,
         DelegationTrace& out)
      : prober_(prober), domain_(domain), options_(options), out_(out) {}

  void visit(const DomainName& zone, const DomainName& server, const IpAddress& addr, std::size_t depth);

  const std::vector<IpAddress>& addresses_for(const DomainName& name) {
    auto it = resolved_.find(name);
    if (it == resolved_.end()) it = resolved_.emplace(name, prober_.resolve_addresses(name)).first;
    return it->second;
  }

  std::vector<DomainName> parent_ns;
  std::vector<DomainName> child_ns;
  std::map<DomainName, std::vector<IpAddress>> child_addresses;
  std::optional<DomainName> parent_zone;
  bool nxdomain = false;
  bool not_delegated = false;
  bool depth_exceeded = false;
  std::size_t deepest = 0;

 private:
  enum class Color { Gray, Black };
  using Key = std::pair<DomainName, IpAddress>;

  void record_child_answer(const DnsObservation& obs);

  const Prober& prober_;
  const DomainName& domain_;
  const TraceOptions& options_;
  DelegationTrace& out_;
  std::map<Key, Color> colors_;
  std::vector<LoopHop> stack_;
  std::map<DomainName, std::vector<IpAddress>> resolved_;
};

void Walker::record_child_answer(const DnsObservation& obs) {
  for (const auto& rr : obs.answers(RRType::NS)) {
    if (rr.owner == domain_) push_unique(child_ns, *target_name(rr));
  }
  for (const auto& rr : obs.section(Section::Additional)) {
    if (rr.type != RRType::A && rr.type != RRType::AAAA) continue;
    push_unique(child_addresses[rr.owner], std::get<IpAddress>(rr.rdata));
  }
}

void Walker::visit(const DomainName& zone, const DomainName& server, const IpAddress& addr,
                   std::size_t depth) {
  Key key{zone, addr};
  if (auto it = colors_.find(key); it != colors_.end()) {
    if (it->second == Color::Gray && !out_.loop_detected) {
      out_.loop_detected = true;
      auto first = std::find_if(stack_.begin(), stack_.end(),
                                [&](const LoopHop& h) { return h.zone == zone && h.address == addr; });
      out_.loop_path.assign(first, stack_.end());
      std::string text = "referral loop:";
      for (const auto& h : out_.loop_path) text += " " + hop_text(h) + " ->";
      text += " back to " + hop_text(*first);
      out_.evidence.push_back(text);
    }
    return;
  }
  if (depth > options_.max_depth) {
    if (!depth_exceeded) {
      out_.evidence.push_back("delegation depth bound " + std::to_string(options_.max_depth) +
                              " reached below " + zone.str());
    }
    depth_exceeded = true;
    return;
  }
  colors_[key] = Color::Gray;
  stack_.push_back({zone, server, addr});
  deepest = std::max(deepest, depth);

  auto obs = prober_.ask(addr, {domain_, RRType::NS, false}, true);
  if (!obs.responded) {
    out_.evidence.push_back(server.str() + " (" + addr.to_string() + ") did not answer for zone " + zone.str());
  } else if (obs.authoritative_answer) {
    bool has_ns = !obs.answers(RRType::NS).empty();
    if (obs.rcode == Rcode::NxDomain) {
      nxdomain = true;
      out_.evidence.push_back(server.str() + " (" + zone.str() + ") answers NXDOMAIN for " + domain_.str());
    } else if (zone == domain_ || has_ns) {
      record_child_answer(obs);
    } else {
      not_delegated = true;
      out_.evidence.push_back(server.str() + " (" + zone.str() + ") holds " + domain_.str() +
                              " without a delegation");
    }
  } else {
    std::optional<DomainName> cut;
    std::vector<DomainName> targets;
    for (const auto& rr : obs.in_section(Section::Authority, RRType::NS)) {
      if (!domain_.is_subdomain_of(rr.owner)) continue;
      if (cut && rr.owner != *cut) continue;
      cut = rr.owner;
      push_unique(targets, *target_name(rr));
    }
    if (!cut) {
      out_.evidence.push_back(server.str() + " (" + addr.to_string() + ") gave a lame answer (" +
                              to_string(obs.rcode) + ") for zone " + zone.str());
    } else {
      std::map<DomainName, std::vector<IpAddress>> glue;
      for (const auto& rr : obs.section(Section::Additional)) {
        if (rr.type != RRType::A && rr.type != RRType::AAAA) continue;
        if (std::find(targets.begin(), targets.end(), rr.owner) == targets.end()) continue;
        push_unique(glue[rr.owner], std::get<IpAddress>(rr.rdata));
      }
      if (*cut == domain_) {
        if (!parent_zone) parent_zone = zone;
        push_unique(out_.parent_servers, addr);
        for (const auto& ns : targets) {
          push_unique(parent_ns, ns);
          for (const auto& ip : glue[ns]) push_unique(out_.glue[ns], ip);
        }
      }
      for (const auto& ns : targets) {
        std::vector<IpAddress> next = glue[ns];
        if (next.empty()) {
          if (ns.is_subdomain_of(*cut)) {
            out_.evidence.push_back("no glue for in-zone server " + ns.str() + " of " + cut->str());
          } else {
            next = addresses_for(ns);
          }
        }
        for (const auto& ip : next) visit(*cut, ns, ip, depth + 1);
      }
    }
  }

  stack_.pop_back();
  colors_[key] = Color::Black;
}

// Union-find over names whose address sets intersect.
std::vector<std::vector<std::size_t>> group_by_address(const std::vector<std::vector<IpAddress>>& addrs) {
  std::vector<std::size_t> parent(addrs.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < addrs.size(); ++i) {
    for (std::size_t j = i + 1; j < addrs.size(); ++j) {
      ServerEndpoint a{std::nullopt, addrs[i]}, b{std::nullopt, addrs[j]};
      if (a.same_server(b)) {
        auto ri = find(i), rj = find(j);
        if (ri != rj) parent[std::max(ri, rj)] = std::min(ri, rj);
      }
    }
  }
  std::vector<std::vector<std::size_t>> groups;
  std::map<std::size_t, std::size_t> slot;
  for (std::size_t i = 0; i < addrs.size(); ++i) {
    auto root = find(i);
    auto [it, fresh] = slot.emplace(root, groups.size());
    if (fresh) groups.emplace_back();
    groups[it->second].push_back(i);
  }
  return groups;
}

}  // namespace

DelegationTrace trace(const Prober& prober, const DomainName& domain, const TraceOptions& options) {
  DelegationTrace out;
  out.domain = domain;
  out.parent_zone = domain.parent();

  Walker walker(prober, domain, options, out);
  for (const auto& root : prober.roots()) walker.visit(DomainName{}, root.name, root.address, 0);
  out.depth = walker.deepest;
  if (walker.parent_zone) out.parent_zone = *walker.parent_zone;

  if (walker.parent_ns.empty() && walker.child_ns.empty()) {
    out.unresolvable = true;
    if (walker.nxdomain) {
      out.evidence.push_back("unresolvable: parent answers NXDOMAIN (expired or unregistered delegation)");
    } else {
      out.evidence.push_back("unresolvable: no authoritative servers found on any path");
    }
    return out;
  }

  std::vector<DomainName> names = walker.parent_ns;
  for (const auto& n : walker.child_ns) push_unique(names, n);

  std::vector<std::vector<IpAddress>> addrs;
  for (const auto& name : names) {
    std::vector<IpAddress> chosen;
    auto child = walker.child_addresses.find(name);
    auto glue = out.glue.find(name);
    if (child != walker.child_addresses.end() && !child->second.empty()) {
      chosen = child->second;
      if (glue != out.glue.end()) {
        auto a = glue->second, b = chosen;
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        if (a != b) out.evidence.push_back("glue for " + name.str() + " differs from the child's address records");
      }
    } else if (glue != out.glue.end() && !glue->second.empty()) {
      chosen = glue->second;
    } else {
      chosen = walker.addresses_for(name);
    }
    if (chosen.empty()) out.evidence.push_back("no address found for " + name.str());
    addrs.push_back(std::move(chosen));
  }

  auto in = [](const std::vector<DomainName>& v, const DomainName& n) {
    return std::find(v.begin(), v.end(), n) != v.end();
  };

  for (const auto& group : group_by_address(addrs)) {
    ServerRef ref;
    ref.ns_name = names[group.front()];
    ref.endpoint.ns_name = ref.ns_name;
    bool parent = false, child = false;
    for (auto i : group) {
      if (i != group.front()) ref.aliases.push_back(names[i]);
      for (const auto& ip : addrs[i]) push_unique(ref.endpoint.addresses, ip);
      parent |= in(walker.parent_ns, names[i]);
      child |= in(walker.child_ns, names[i]);
    }
    ref.source = parent && child ? ServerSource::Both : parent ? ServerSource::ParentOnly : ServerSource::ChildOnly;
    if (!ref.aliases.empty()) {
      std::string text = ref.ns_name.str();
      for (const auto& a : ref.aliases) text += ", " + a.str();
      out.evidence.push_back("names share addresses and count as one server: " + text);
    }

    bool any_response = false;
    for (const auto& ip : ref.endpoint.addresses) {
      auto obs = prober.ask(ip, {domain, RRType::SOA, false}, true);
      if (!obs.responded) continue;
      any_response = true;
      bool soa = false;
      for (const auto& rr : obs.answers(RRType::SOA)) soa |= rr.owner == domain;
      if (obs.authoritative_answer && obs.rcode == Rcode::NoError && soa) {
        ref.is_authoritative = true;
        break;
      }
    }
    if (!ref.is_authoritative && any_response) ref.is_authoritative = false;
    out.servers.push_back(std::move(ref));
  }

  out.unresolvable = std::none_of(out.servers.begin(), out.servers.end(),
                                  [](const ServerRef& s) { return s.is_authoritative == true; });
  if (out.unresolvable) out.evidence.push_back("unresolvable: no listed server answers authoritatively");
  return out;
}

ServerClassification classify_servers(const DelegationTrace& trace) {
  if (trace.unresolvable) {
    throw ContractViolation("classify_servers called on unresolvable trace of " + trace.domain.str());
  }
  ServerClassification out;
  for (const auto& s : trace.servers) {
    if (s.parent_listed()) out.parent_set.push_back(s);
    if (s.child_listed()) out.child_set.push_back(s);
    if (s.source == ServerSource::ChildOnly) out.stealth_set.push_back(s);
    if (s.parent_listed() && s.is_authoritative == false) out.lame_parent_set.push_back(s);
  }
  return out;
}

}  // namespace dnsaudit
