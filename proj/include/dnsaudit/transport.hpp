#pragma once

#include <chrono>
#include <functional>
#include <stdexcept>
#include <vector>

#include "dnsaudit/ip.hpp"
#include "dnsaudit/message.hpp"
#include "dnsaudit/record.hpp"

namespace dnsaudit {

enum class TransportKind : std::uint8_t { Udp, Tcp };

const char* to_string(TransportKind kind);

/// One server's answer to one probe. When `responded` is false every other
/// field except `transport` is default and `records` is empty.
struct DnsObservation {
  bool responded = false;
  TransportKind transport = TransportKind::Udp;
  bool authoritative_answer = false;
  bool recursion_available = false;
  bool truncated = false;
  Rcode rcode = Rcode::NoError;
  std::vector<ResourceRecord> records;
  std::chrono::milliseconds rtt{0};

  std::vector<ResourceRecord> section(Section s) const;
  std::vector<ResourceRecord> answers(RRType type) const;
  std::vector<ResourceRecord> in_section(Section s, RRType type) const;

  /// Equality ignoring rtt.
  bool same_content(const DnsObservation& other) const;
};

DnsObservation observation_from(const DnsMessage& msg, TransportKind kind,
                                 std::chrono::milliseconds rtt);
DnsObservation malformed_observation(TransportKind kind, std::chrono::milliseconds rtt);

/// Local failure (socket creation, bind, no route). Distinct from a remote
/// timeout, which is reported as `responded == false`.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A single request/response exchange with one server address. For AXFR
/// over TCP the returned observation carries the records of every message
/// of the stream, in order.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual DnsObservation exchange(const IpAddress& server, const DnsQuestion& question,
                                  TransportKind kind, std::chrono::milliseconds timeout) = 0;
};

struct ProbeConfig {
  std::chrono::milliseconds udp_timeout{3000};
  int udp_retries = 2;
  std::chrono::milliseconds tcp_timeout{5000};
};

/// Sends `question` with the retry policy of `config`. UDP is attempted
/// 1 + udp_retries times; TCP once. AXFR over UDP is rejected with
/// std::invalid_argument.
DnsObservation query(Transport& transport, const IpAddress& server, const DnsQuestion& question,
                     TransportKind kind, const ProbeConfig& config = {});

/// Live sockets. By default talks to port 53 of the given address; an
/// endpoint map can redirect logical addresses (used by the loopback shim).
class SocketTransport final : public Transport {
 public:
  struct Endpoint {
    IpAddress address;
    std::uint16_t udp_port = 53;
    std::uint16_t tcp_port = 53;
  };
  using EndpointMap = std::function<Endpoint(const IpAddress&)>;

  SocketTransport();
  explicit SocketTransport(EndpointMap map);

  DnsObservation exchange(const IpAddress& server, const DnsQuestion& question, TransportKind kind,
                          std::chrono::milliseconds timeout) override;

 private:
  DnsObservation exchange_udp(const Endpoint& ep, const DnsQuestion& question,
                              std::chrono::milliseconds timeout);
  DnsObservation exchange_tcp(const Endpoint& ep, const DnsQuestion& question,
                              std::chrono::milliseconds timeout);

  EndpointMap map_;
};

}  // namespace dnsaudit
