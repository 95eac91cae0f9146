#pragma once

#include <stdexcept>

namespace dnsaudit {

/// Raised when an operation is called outside its contract, e.g. classifying
/// the servers of an unresolvable trace.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace dnsaudit
