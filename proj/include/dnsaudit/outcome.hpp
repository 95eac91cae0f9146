#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dnsaudit {

enum class TestId : std::uint8_t {
  UdpAvailability = 1,
  TcpAvailability,
  SingleAuthoritative,
  ParentNonAuthoritative,
  StealthServer,
  DelegationLoop,
  ZoneTransfer,
  PublicRecursion,
  SecondarySync,
  Colocation,
  ReverseMapping,
  Ipv6Support,
  DnssecSupport,
};

inline constexpr std::size_t kTestCount = 13;

inline constexpr std::array<TestId, kTestCount> kAllTests = {
    TestId::UdpAvailability,  TestId::TcpAvailability, TestId::SingleAuthoritative,
    TestId::ParentNonAuthoritative, TestId::StealthServer, TestId::DelegationLoop,
    TestId::ZoneTransfer,     TestId::PublicRecursion, TestId::SecondarySync,
    TestId::Colocation,       TestId::ReverseMapping,  TestId::Ipv6Support,
    TestId::DnssecSupport,
};

constexpr int ordinal(TestId id) noexcept { return static_cast<int>(id); }
constexpr std::size_t index_of(TestId id) noexcept { return static_cast<std::size_t>(id) - 1; }
std::optional<TestId> test_from_ordinal(int ordinal) noexcept;
/// Short human label, e.g. "UDP availability".
const char* test_name(TestId id) noexcept;

struct TestOutcome {
  TestId test_id = TestId::UdpAvailability;
  int indicator = 0;
  std::size_t n_err = 0;
  std::size_t n_tot = 0;
  std::vector<std::string> evidence;
  // Identities (lowest address) of the servers at fault.
  std::vector<std::string> implicated;
  bool applicable = true;

  friend bool operator==(const TestOutcome&, const TestOutcome&) = default;
};

/// Builds an applicable outcome with the indicator derived from n_err.
TestOutcome make_outcome(TestId id, std::size_t n_err, std::size_t n_tot);
TestOutcome inapplicable_outcome(TestId id, std::string reason);

}  // namespace dnsaudit
