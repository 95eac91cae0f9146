#include "dnsaudit/outcome.hpp"

namespace dnsaudit {

std::optional<TestId> test_from_ordinal(int ordinal) noexcept {
  if (ordinal < 1 || ordinal > static_cast<int>(kTestCount)) return std::nullopt;
  return static_cast<TestId>(ordinal);
}

const char* test_name(TestId id) noexcept {
  switch (id) {
    case TestId::UdpAvailability: return "UDP availability";
    case TestId::TcpAvailability: return "TCP availability";
    case TestId::SingleAuthoritative: return "single authoritative server";
    case TestId::ParentNonAuthoritative: return "non-authoritative parent NS";
    case TestId::StealthServer: return "stealth server";
    case TestId::DelegationLoop: return "delegation loop";
    case TestId::ZoneTransfer: return "public zone transfer";
    case TestId::PublicRecursion: return "public recursion";
    case TestId::SecondarySync: return "secondary sync";
    case TestId::Colocation: return "server co-location";
    case TestId::ReverseMapping: return "reverse mapping";
    case TestId::Ipv6Support: return "IPv6 support";
    case TestId::DnssecSupport: return "DNSSEC support";
  }
  return "?";
}

TestOutcome make_outcome(TestId id, std::size_t n_err, std::size_t n_tot) {
  TestOutcome out;
  out.test_id = id;
  out.n_err = n_err;
  out.n_tot = n_tot;
  out.indicator = n_err >= 1 ? 1 : 0;
  return out;
}

TestOutcome inapplicable_outcome(TestId id, std::string reason) {
  TestOutcome out;
  out.test_id = id;
  out.applicable = false;
  out.evidence.push_back(std::move(reason));
  return out;
}

}  // namespace dnsaudit
