#include "dnsaudit/record.hpp"

#include <charconv>
#include <sstream>
#include <stdexcept>

namespace dnsaudit {

namespace {

struct TypeName {
  RRType type;
  const char* name;
};

constexpr TypeName kTypeNames[] = {
    {RRType::A, "A"},         {RRType::NS, "NS"},       {RRType::CNAME, "CNAME"},
    {RRType::SOA, "SOA"},     {RRType::PTR, "PTR"},     {RRType::MX, "MX"},
    {RRType::TXT, "TXT"},     {RRType::AAAA, "AAAA"},   {RRType::DS, "DS"},
    {RRType::RRSIG, "RRSIG"}, {RRType::DNSKEY, "DNSKEY"}, {RRType::AXFR, "AXFR"},
};

std::vector<std::string> split_ws(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

template <typename T>
T parse_uint(const std::string& s, const char* what) {
  T value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::invalid_argument(std::string("bad ") + what + " '" + s + "'");
  }
  return value;
}

std::vector<std::uint8_t> parse_hex(const std::string& s) {
  if (s.size() % 2 != 0) throw std::invalid_argument("odd-length hex string");
  std::vector<std::uint8_t> out;
  out.reserve(s.size() / 2);
  for (std::size_t i = 0; i < s.size(); i += 2) {
    std::uint8_t byte{};
    auto [ptr, ec] = std::from_chars(s.data() + i, s.data() + i + 2, byte, 16);
    if (ec != std::errc{} || ptr != s.data() + i + 2) {
      throw std::invalid_argument("bad hex string '" + s + "'");
    }
    out.push_back(byte);
  }
  return out;
}

std::string to_hex(const std::uint8_t* data, std::size_t n) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(kHex[data[i] >> 4]);
    out.push_back(kHex[data[i] & 0xf]);
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

void put_name_uncompressed(std::vector<std::uint8_t>& out, const DomainName& name) {
  for (const auto& label : name.labels()) {
    out.push_back(static_cast<std::uint8_t>(label.size()));
    out.insert(out.end(), label.begin(), label.end());
  }
  out.push_back(0);
}

void require_fields(const std::vector<std::string>& f, std::size_t n, RRType type) {
  if (f.size() != n) {
    throw std::invalid_argument(to_string(type) + " rdata needs " + std::to_string(n) +
                                " fields, got " + std::to_string(f.size()));
  }
}

}  // namespace

std::string to_string(RRType type) {
  for (const auto& t : kTypeNames) {
    if (t.type == type) return t.name;
  }
  return "TYPE" + std::to_string(static_cast<std::uint16_t>(type));
}

std::optional<RRType> parse_rrtype(std::string_view text) {
  std::string upper;
  for (char c : text) upper.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  for (const auto& t : kTypeNames) {
    if (upper == t.name) return t.type;
  }
  if (upper.rfind("TYPE", 0) == 0 && upper.size() > 4) {
    std::uint16_t value{};
    auto [ptr, ec] = std::from_chars(upper.data() + 4, upper.data() + upper.size(), value);
    if (ec == std::errc{} && ptr == upper.data() + upper.size()) return static_cast<RRType>(value);
  }
  return std::nullopt;
}

std::string to_string(Rcode rcode) {
  switch (rcode) {
    case Rcode::NoError: return "NOERROR";
    case Rcode::FormErr: return "FORMERR";
    case Rcode::ServFail: return "SERVFAIL";
    case Rcode::NxDomain: return "NXDOMAIN";
    case Rcode::NotImp: return "NOTIMP";
    case Rcode::Refused: return "REFUSED";
    case Rcode::Malformed: return "MALFORMED";
  }
  return "RCODE" + std::to_string(static_cast<std::uint16_t>(rcode));
}

std::string rdata_to_string(const ResourceRecord& rr) {
  return std::visit(
      [&](const auto& d) -> std::string {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, IpAddress>) {
          return d.to_string();
        } else if constexpr (std::is_same_v<T, DomainName>) {
          return d.str();
        } else if constexpr (std::is_same_v<T, SoaData>) {
          std::ostringstream os;
          os << d.mname.str() << ' ' << d.rname.str() << ' ' << d.serial << ' ' << d.refresh << ' '
             << d.retry << ' ' << d.expire << ' ' << d.minimum;
          return os.str();
        } else if constexpr (std::is_same_v<T, MxData>) {
          return std::to_string(d.preference) + " " + d.exchange.str();
        } else if constexpr (std::is_same_v<T, TxtData>) {
          std::string out;
          for (const auto& s : d.strings) {
            if (!out.empty()) out.push_back(' ');
            out += '"' + s + '"';
          }
          return out;
        } else {
          if (rr.type == RRType::RRSIG && d.bytes.size() >= 2) {
            auto covered = static_cast<RRType>((d.bytes[0] << 8) | d.bytes[1]);
            return to_string(covered) + " " + to_hex(d.bytes.data() + 2, d.bytes.size() - 2);
          }
          return to_hex(d.bytes.data(), d.bytes.size());
        }
      },
      rr.rdata);
}

Rdata parse_rdata(RRType type, std::string_view text) {
  auto f = split_ws(text);
  switch (type) {
    case RRType::A:
    case RRType::AAAA: {
      require_fields(f, 1, type);
      auto ip = IpAddress::parse(f[0]);
      if (!ip || ip->is_v4() != (type == RRType::A)) {
        throw std::invalid_argument("bad " + to_string(type) + " address '" + f[0] + "'");
      }
      return *ip;
    }
    case RRType::NS:
    case RRType::CNAME:
    case RRType::PTR:
      require_fields(f, 1, type);
      return DomainName::parse(f[0]);
    case RRType::SOA: {
      require_fields(f, 7, type);
      SoaData soa;
      soa.mname = DomainName::parse(f[0]);
      soa.rname = DomainName::parse(f[1]);
      soa.serial = parse_uint<std::uint32_t>(f[2], "serial");
      soa.refresh = parse_uint<std::uint32_t>(f[3], "refresh");
      soa.retry = parse_uint<std::uint32_t>(f[4], "retry");
      soa.expire = parse_uint<std::uint32_t>(f[5], "expire");
      soa.minimum = parse_uint<std::uint32_t>(f[6], "minimum");
      return soa;
    }
    case RRType::MX: {
      require_fields(f, 2, type);
      return MxData{parse_uint<std::uint16_t>(f[0], "preference"), DomainName::parse(f[1])};
    }
    case RRType::TXT: {
      std::string s(text);
      auto b = s.find_first_not_of(" \t");
      auto e = s.find_last_not_of(" \t");
      s = (b == std::string::npos) ? std::string{} : s.substr(b, e - b + 1);
      if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
      if (s.size() > 255) throw std::invalid_argument("TXT string longer than 255 octets");
      return TxtData{{s}};
    }
    case RRType::DS: {
      // keytag algorithm digest-type digest-hex
      require_fields(f, 4, type);
      OpaqueData out;
      put16(out.bytes, parse_uint<std::uint16_t>(f[0], "key tag"));
      out.bytes.push_back(parse_uint<std::uint8_t>(f[1], "algorithm"));
      out.bytes.push_back(parse_uint<std::uint8_t>(f[2], "digest type"));
      auto digest = parse_hex(f[3]);
      out.bytes.insert(out.bytes.end(), digest.begin(), digest.end());
      return out;
    }
    case RRType::DNSKEY: {
      // flags protocol algorithm key-hex
      require_fields(f, 4, type);
      OpaqueData out;
      put16(out.bytes, parse_uint<std::uint16_t>(f[0], "flags"));
      out.bytes.push_back(parse_uint<std::uint8_t>(f[1], "protocol"));
      out.bytes.push_back(parse_uint<std::uint8_t>(f[2], "algorithm"));
      auto key = parse_hex(f[3]);
      out.bytes.insert(out.bytes.end(), key.begin(), key.end());
      return out;
    }
    case RRType::RRSIG: {
      // covered algorithm labels original-ttl expiration inception keytag signer sig-hex
      require_fields(f, 9, type);
      auto covered = parse_rrtype(f[0]);
      if (!covered) throw std::invalid_argument("bad covered type '" + f[0] + "'");
      OpaqueData out;
      put16(out.bytes, static_cast<std::uint16_t>(*covered));
      out.bytes.push_back(parse_uint<std::uint8_t>(f[1], "algorithm"));
      out.bytes.push_back(parse_uint<std::uint8_t>(f[2], "labels"));
      put32(out.bytes, parse_uint<std::uint32_t>(f[3], "original ttl"));
      put32(out.bytes, parse_uint<std::uint32_t>(f[4], "expiration"));
      put32(out.bytes, parse_uint<std::uint32_t>(f[5], "inception"));
      put16(out.bytes, parse_uint<std::uint16_t>(f[6], "key tag"));
      put_name_uncompressed(out.bytes, DomainName::parse(f[7]));
      auto sig = parse_hex(f[8]);
      out.bytes.insert(out.bytes.end(), sig.begin(), sig.end());
      return out;
    }
    default:
      throw std::invalid_argument("unsupported record type " + to_string(type));
  }
}

std::optional<RRType> rrsig_type_covered(const ResourceRecord& rr) {
  if (rr.type != RRType::RRSIG) return std::nullopt;
  const auto* op = std::get_if<OpaqueData>(&rr.rdata);
  if (op == nullptr || op->bytes.size() < 2) return std::nullopt;
  return static_cast<RRType>((op->bytes[0] << 8) | op->bytes[1]);
}

const DomainName* target_name(const ResourceRecord& rr) {
  return std::get_if<DomainName>(&rr.rdata);
}

}  // namespace dnsaudit
