#include "dnsaudit/message.hpp"

#include <map>
#include <string>

namespace dnsaudit {

namespace {

constexpr std::uint16_t kClassIn = 1;

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) {
    out_.push_back(static_cast<std::uint8_t>(v >> 8));
    out_.push_back(static_cast<std::uint8_t>(v));
  }
  void u32(std::uint32_t v) {
    u16(static_cast<std::uint16_t>(v >> 16));
    u16(static_cast<std::uint16_t>(v));
  }
  void bytes(const std::uint8_t* p, std::size_t n) { out_.insert(out_.end(), p, p + n); }

  void name(const DomainName& n) {
    auto labels = n.labels();
    for (std::size_t i = 0; i < labels.size(); ++i) {
      std::string suffix;
      for (std::size_t j = i; j < labels.size(); ++j) suffix += labels[j] + ".";
      if (auto it = offsets_.find(suffix); it != offsets_.end()) {
        u16(static_cast<std::uint16_t>(0xC000 | it->second));
        return;
      }
      if (out_.size() < 0x3FFF) offsets_.emplace(suffix, static_cast<std::uint16_t>(out_.size()));
      u8(static_cast<std::uint8_t>(labels[i].size()));
      bytes(reinterpret_cast<const std::uint8_t*>(labels[i].data()), labels[i].size());
    }
    u8(0);
  }

  std::size_t size() const { return out_.size(); }
  void patch16(std::size_t at, std::uint16_t v) {
    out_[at] = static_cast<std::uint8_t>(v >> 8);
    out_[at + 1] = static_cast<std::uint8_t>(v);
  }

  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
  std::map<std::string, std::uint16_t> offsets_;
};

void write_rdata(Writer& w, const ResourceRecord& rr) {
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, IpAddress>) {
          w.bytes(d.bytes().data(), d.size());
        } else if constexpr (std::is_same_v<T, DomainName>) {
          w.name(d);
        } else if constexpr (std::is_same_v<T, SoaData>) {
          w.name(d.mname);
          w.name(d.rname);
          w.u32(d.serial);
          w.u32(d.refresh);
          w.u32(d.retry);
          w.u32(d.expire);
          w.u32(d.minimum);
        } else if constexpr (std::is_same_v<T, MxData>) {
          w.u16(d.preference);
          w.name(d.exchange);
        } else if constexpr (std::is_same_v<T, TxtData>) {
          for (const auto& s : d.strings) {
            w.u8(static_cast<std::uint8_t>(s.size()));
            w.bytes(reinterpret_cast<const std::uint8_t*>(s.data()), s.size());
          }
        } else {
          w.bytes(d.bytes.data(), d.bytes.size());
        }
      },
      rr.rdata);
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> wire) : wire_(wire) {}

  bool ok() const { return ok_; }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return ok_ ? wire_.size() - pos_ : 0; }

  std::uint8_t u8() {
    if (!need(1)) return 0;
    return wire_[pos_++];
  }
  std::uint16_t u16() {
    if (!need(2)) return 0;
    auto v = static_cast<std::uint16_t>((wire_[pos_] << 8) | wire_[pos_ + 1]);
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    std::uint32_t hi = u16();
    return (hi << 16) | u16();
  }
  std::vector<std::uint8_t> bytes(std::size_t n) {
    if (!need(n)) return {};
    std::vector<std::uint8_t> out(wire_.begin() + static_cast<std::ptrdiff_t>(pos_),
                                  wire_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return out;
  }

  DomainName name() {
    std::vector<std::string> labels;
    std::size_t cursor = pos_;
    std::size_t resume = 0;
    bool jumped = false;
    int jumps = 0;
    std::size_t total = 0;
    while (true) {
      if (cursor >= wire_.size()) return fail();
      std::uint8_t len = wire_[cursor];
      if ((len & 0xC0) == 0xC0) {
        if (cursor + 1 >= wire_.size()) return fail();
        std::size_t target = static_cast<std::size_t>(((len & 0x3F) << 8) | wire_[cursor + 1]);
        // Pointers must go strictly backwards; bounds the walk.
        if (target >= cursor || ++jumps > 64) return fail();
        if (!jumped) resume = cursor + 2;
        jumped = true;
        cursor = target;
        continue;
      }
      if ((len & 0xC0) != 0) return fail();
      if (len == 0) {
        ++cursor;
        break;
      }
      if (cursor + 1 + len > wire_.size()) return fail();
      labels.emplace_back(reinterpret_cast<const char*>(&wire_[cursor + 1]), len);
      total += len + 1;
      if (total > 255) return fail();
      cursor += 1 + len;
    }
    pos_ = jumped ? resume : cursor;
    try {
      return DomainName::from_labels(labels);
    } catch (const NameError&) {
      return fail();
    }
  }

  void seek(std::size_t p) {
    if (p > wire_.size()) {
      ok_ = false;
      return;
    }
    pos_ = p;
  }

 private:
  bool need(std::size_t n) {
    if (!ok_ || pos_ + n > wire_.size()) {
      ok_ = false;
      return false;
    }
    return true;
  }
  DomainName fail() {
    ok_ = false;
    return DomainName{};
  }

  std::span<const std::uint8_t> wire_;
  std::size_t pos_ = 0;
  bool ok_ = true;
};

std::optional<Rdata> read_rdata(Reader& r, RRType type, std::uint16_t rdlen) {
  std::size_t end = r.pos() + rdlen;
  if (r.remaining() < rdlen) return std::nullopt;
  Rdata out;
  switch (type) {
    case RRType::A:
    case RRType::AAAA: {
      std::size_t want = type == RRType::A ? 4 : 16;
      if (rdlen != want) return std::nullopt;
      auto b = r.bytes(want);
      out = IpAddress::from_bytes(type == RRType::A ? IpAddress::Family::V4 : IpAddress::Family::V6,
                                  b.data());
      break;
    }
    case RRType::NS:
    case RRType::CNAME:
    case RRType::PTR:
      out = r.name();
      break;
    case RRType::SOA: {
      SoaData soa;
      soa.mname = r.name();
      soa.rname = r.name();
      soa.serial = r.u32();
      soa.refresh = r.u32();
      soa.retry = r.u32();
      soa.expire = r.u32();
      soa.minimum = r.u32();
      out = soa;
      break;
    }
    case RRType::MX: {
      MxData mx;
      mx.preference = r.u16();
      mx.exchange = r.name();
      out = mx;
      break;
    }
    case RRType::TXT: {
      TxtData txt;
      while (r.ok() && r.pos() < end) {
        auto len = r.u8();
        auto b = r.bytes(len);
        txt.strings.emplace_back(b.begin(), b.end());
      }
      out = txt;
      break;
    }
    default:
      out = OpaqueData{r.bytes(rdlen)};
      break;
  }
  if (!r.ok() || r.pos() != end) return std::nullopt;
  return out;
}

}  // namespace

std::vector<std::uint8_t> encode_message(const DnsMessage& msg) {
  Writer w;
  w.u16(msg.id);
  std::uint16_t flags = 0;
  if (msg.response) flags |= 0x8000;
  flags |= static_cast<std::uint16_t>((msg.opcode & 0xF) << 11);
  if (msg.authoritative) flags |= 0x0400;
  if (msg.truncated) flags |= 0x0200;
  if (msg.recursion_desired) flags |= 0x0100;
  if (msg.recursion_available) flags |= 0x0080;
  flags |= static_cast<std::uint16_t>(static_cast<std::uint16_t>(msg.rcode) & 0xF);
  w.u16(flags);

  std::uint16_t counts[3] = {0, 0, 0};
  for (const auto& rr : msg.records) ++counts[static_cast<int>(rr.section)];
  w.u16(static_cast<std::uint16_t>(msg.questions.size()));
  w.u16(counts[0]);
  w.u16(counts[1]);
  w.u16(counts[2]);

  for (const auto& q : msg.questions) {
    w.name(q.qname);
    w.u16(static_cast<std::uint16_t>(q.qtype));
    w.u16(kClassIn);
  }
  for (auto section : {Section::Answer, Section::Authority, Section::Additional}) {
    for (const auto& rr : msg.records) {
      if (rr.section != section) continue;
      w.name(rr.owner);
      w.u16(static_cast<std::uint16_t>(rr.type));
      w.u16(kClassIn);
      w.u32(rr.ttl);
      auto len_at = w.size();
      w.u16(0);
      write_rdata(w, rr);
      w.patch16(len_at, static_cast<std::uint16_t>(w.size() - len_at - 2));
    }
  }
  return w.take();
}

std::optional<DnsMessage> decode_message(std::span<const std::uint8_t> wire) {
  Reader r(wire);
  DnsMessage msg;
  msg.id = r.u16();
  auto flags = r.u16();
  msg.response = flags & 0x8000;
  msg.opcode = static_cast<std::uint8_t>((flags >> 11) & 0xF);
  msg.authoritative = flags & 0x0400;
  msg.truncated = flags & 0x0200;
  msg.recursion_desired = flags & 0x0100;
  msg.recursion_available = flags & 0x0080;
  msg.rcode = static_cast<Rcode>(flags & 0xF);
  auto qd = r.u16();
  std::uint16_t counts[3] = {r.u16(), r.u16(), r.u16()};
  if (!r.ok()) return std::nullopt;

  for (std::uint16_t i = 0; i < qd; ++i) {
    DnsQuestion q;
    q.qname = r.name();
    q.qtype = static_cast<RRType>(r.u16());
    r.u16();  // class
    q.recursion_desired = msg.recursion_desired;
    if (!r.ok()) return std::nullopt;
    msg.questions.push_back(q);
  }
  const Section sections[3] = {Section::Answer, Section::Authority, Section::Additional};
  for (int s = 0; s < 3; ++s) {
    for (std::uint16_t i = 0; i < counts[s]; ++i) {
      ResourceRecord rr;
      rr.section = sections[s];
      rr.owner = r.name();
      rr.type = static_cast<RRType>(r.u16());
      r.u16();  // class
      rr.ttl = r.u32();
      auto rdlen = r.u16();
      if (!r.ok()) return std::nullopt;
      auto rdata = read_rdata(r, rr.type, rdlen);
      if (!rdata) return std::nullopt;
      rr.rdata = std::move(*rdata);
      msg.records.push_back(std::move(rr));
    }
  }
  if (!r.ok() || r.remaining() != 0) return std::nullopt;
  return msg;
}

DnsMessage make_query(const DnsQuestion& question, std::uint16_t id) {
  DnsMessage msg;
  msg.id = id;
  msg.recursion_desired = question.recursion_desired;
  msg.questions.push_back(question);
  return msg;
}

}  // namespace dnsaudit
