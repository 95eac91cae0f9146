#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dnsaudit/record.hpp"

namespace dnsaudit {

/// Plain DNS message: header bits, one question and a flat record list whose
/// entries are tagged with their section. Section order is preserved.
struct DnsMessage {
  std::uint16_t id = 0;
  bool response = false;
  std::uint8_t opcode = 0;
  bool authoritative = false;
  bool truncated = false;
  bool recursion_desired = false;
  bool recursion_available = false;
  Rcode rcode = Rcode::NoError;
  std::vector<DnsQuestion> questions;
  std::vector<ResourceRecord> records;
};

inline constexpr std::size_t kClassicUdpLimit = 512;

/// Wire encoding with name compression. Records are emitted grouped by
/// section (answer, authority, additional) in their original relative order.
std::vector<std::uint8_t> encode_message(const DnsMessage& msg);

/// Parses a wire message. Returns nullopt on any structural error (bad
/// pointers, truncated fields, trailing count mismatch).
std::optional<DnsMessage> decode_message(std::span<const std::uint8_t> wire);

/// Builds a query message for `question` with the given id.
DnsMessage make_query(const DnsQuestion& question, std::uint16_t id);

}  // namespace dnsaudit
