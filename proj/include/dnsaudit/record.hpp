#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dnsaudit/ip.hpp"
#include "dnsaudit/name.hpp"

namespace dnsaudit {

/// Record types the auditor asks for or inspects. Other numeric values may
/// appear in parsed responses and are carried through as-is.
enum class RRType : std::uint16_t {
  A = 1,
  NS = 2,
  CNAME = 5,
  SOA = 6,
  PTR = 12,
  MX = 15,
  TXT = 16,
  AAAA = 28,
  DS = 43,
  RRSIG = 46,
  DNSKEY = 48,
  AXFR = 252,
};

std::string to_string(RRType type);
std::optional<RRType> parse_rrtype(std::string_view text);

enum class Rcode : std::uint16_t {
  NoError = 0,
  FormErr = 1,
  ServFail = 2,
  NxDomain = 3,
  NotImp = 4,
  Refused = 5,
  // Local marker: the response arrived but could not be parsed.
  Malformed = 0x1000,
};

std::string to_string(Rcode rcode);

enum class Section : std::uint8_t { Answer, Authority, Additional };

struct SoaData {
  DomainName mname;
  DomainName rname;
  std::uint32_t serial = 0;
  std::uint32_t refresh = 3600;
  std::uint32_t retry = 600;
  std::uint32_t expire = 86400;
  std::uint32_t minimum = 300;

  friend bool operator==(const SoaData&, const SoaData&) = default;
};

struct MxData {
  std::uint16_t preference = 0;
  DomainName exchange;

  friend bool operator==(const MxData&, const MxData&) = default;
};

struct TxtData {
  std::vector<std::string> strings;

  friend bool operator==(const TxtData&, const TxtData&) = default;
};

// DS, DNSKEY, RRSIG and unknown types: kept as raw wire rdata.
struct OpaqueData {
  std::vector<std::uint8_t> bytes;

  friend bool operator==(const OpaqueData&, const OpaqueData&) = default;
};

using Rdata = std::variant<IpAddress, DomainName, SoaData, MxData, TxtData, OpaqueData>;

struct ResourceRecord {
  DomainName owner;
  RRType type = RRType::A;
  std::uint32_t ttl = 3600;
  Rdata rdata;
  Section section = Section::Answer;

  friend bool operator==(const ResourceRecord&, const ResourceRecord&) = default;
};

struct DnsQuestion {
  DomainName qname;
  RRType qtype = RRType::A;
  bool recursion_desired = false;

  friend bool operator==(const DnsQuestion&, const DnsQuestion&) = default;
};

/// Presentation form of the rdata (zone-file style).
std::string rdata_to_string(const ResourceRecord& rr);

/// Parses zone-file style rdata text for `type`. Throws std::invalid_argument.
Rdata parse_rdata(RRType type, std::string_view text);

/// Type covered by an RRSIG record, if the rdata is long enough.
std::optional<RRType> rrsig_type_covered(const ResourceRecord& rr);

/// Target name of NS/CNAME/PTR records.
const DomainName* target_name(const ResourceRecord& rr);

}  // namespace dnsaudit
