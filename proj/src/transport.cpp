#include "dnsaudit/transport.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <random>

namespace dnsaudit {

using Clock = std::chrono::steady_clock;
using std::chrono::milliseconds;

const char* to_string(TransportKind kind) { return kind == TransportKind::Udp ? "udp" : "tcp"; }

std::vector<ResourceRecord> DnsObservation::section(Section s) const {
  std::vector<ResourceRecord> out;
  for (const auto& rr : records) {
    if (rr.section == s) out.push_back(rr);
  }
  return out;
}

std::vector<ResourceRecord> DnsObservation::in_section(Section s, RRType type) const {
  std::vector<ResourceRecord> out;
  for (const auto& rr : records) {
    if (rr.section == s && rr.type == type) out.push_back(rr);
  }
  return out;
}

std::vector<ResourceRecord> DnsObservation::answers(RRType type) const {
  return in_section(Section::Answer, type);
}

bool DnsObservation::same_content(const DnsObservation& o) const {
  return responded == o.responded && transport == o.transport &&
         authoritative_answer == o.authoritative_answer &&
         recursion_available == o.recursion_available && truncated == o.truncated &&
         rcode == o.rcode && records == o.records;
}

DnsObservation observation_from(const DnsMessage& msg, TransportKind kind, milliseconds rtt) {
  DnsObservation obs;
  obs.responded = true;
  obs.transport = kind;
  obs.authoritative_answer = msg.authoritative;
  obs.recursion_available = msg.recursion_available;
  obs.truncated = msg.truncated;
  obs.rcode = msg.rcode;
  obs.records = msg.records;
  obs.rtt = rtt;
  return obs;
}

DnsObservation malformed_observation(TransportKind kind, milliseconds rtt) {
  DnsObservation obs;
  obs.responded = true;
  obs.transport = kind;
  obs.rcode = Rcode::Malformed;
  obs.rtt = rtt;
  return obs;
}

DnsObservation query(Transport& transport, const IpAddress& server, const DnsQuestion& question,
                     TransportKind kind, const ProbeConfig& config) {
  if (question.qtype == RRType::AXFR && kind != TransportKind::Tcp) {
    throw std::invalid_argument("AXFR is only sent over TCP");
  }
  if (kind == TransportKind::Tcp) return transport.exchange(server, question, kind, config.tcp_timeout);
  DnsObservation obs;
  for (int attempt = 0; attempt <= config.udp_retries; ++attempt) {
    obs = transport.exchange(server, question, kind, config.udp_timeout);
    if (obs.responded) break;
  }
  return obs;
}

namespace {

class Fd {
 public:
  explicit Fd(int fd) : fd_(fd) {}
  ~Fd() {
    if (fd_ >= 0) ::close(fd_);
  }
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  int get() const { return fd_; }

 private:
  int fd_;
};

std::uint16_t next_query_id() {
  thread_local std::mt19937 rng{std::random_device{}()};
  return static_cast<std::uint16_t>(rng());
}

socklen_t fill_sockaddr(const IpAddress& ip, std::uint16_t port, sockaddr_storage& ss) {
  std::memset(&ss, 0, sizeof ss);
  if (ip.is_v4()) {
    auto* sin = reinterpret_cast<sockaddr_in*>(&ss);
    sin->sin_family = AF_INET;
    sin->sin_port = htons(port);
    std::memcpy(&sin->sin_addr, ip.bytes().data(), 4);
    return sizeof(sockaddr_in);
  }
  auto* sin6 = reinterpret_cast<sockaddr_in6*>(&ss);
  sin6->sin6_family = AF_INET6;
  sin6->sin6_port = htons(port);
  std::memcpy(&sin6->sin6_addr, ip.bytes().data(), 16);
  return sizeof(sockaddr_in6);
}

bool is_local_failure(int err) {
  return err == ENETUNREACH || err == EADDRNOTAVAIL || err == EAFNOSUPPORT || err == ENOBUFS;
}

milliseconds remaining(Clock::time_point deadline) {
  auto left = std::chrono::duration_cast<milliseconds>(deadline - Clock::now());
  return left.count() < 0 ? milliseconds{0} : left;
}

bool wait_for(int fd, short events, Clock::time_point deadline) {
  while (true) {
    pollfd p{fd, events, 0};
    int rc = ::poll(&p, 1, static_cast<int>(remaining(deadline).count()));
    if (rc > 0) return true;
    if (rc == 0) return false;
    if (errno != EINTR) return false;
  }
}

// Reads exactly n bytes; false on EOF, error or deadline.
bool read_exact(int fd, std::uint8_t* buf, std::size_t n, Clock::time_point deadline) {
  std::size_t got = 0;
  while (got < n) {
    if (!wait_for(fd, POLLIN, deadline)) return false;
    auto rc = ::recv(fd, buf + got, n - got, 0);
    if (rc > 0) {
      got += static_cast<std::size_t>(rc);
    } else if (rc == 0) {
      return false;
    } else if (errno != EINTR && errno != EAGAIN && errno != EWOULDBLOCK) {
      return false;
    }
  }
  return true;
}

bool write_all(int fd, const std::vector<std::uint8_t>& data, Clock::time_point deadline) {
  std::size_t sent = 0;
  while (sent < data.size()) {
    if (!wait_for(fd, POLLOUT, deadline)) return false;
    auto rc = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (rc > 0) {
      sent += static_cast<std::size_t>(rc);
    } else if (rc < 0 && errno != EINTR && errno != EAGAIN && errno != EWOULDBLOCK) {
      return false;
    }
  }
  return true;
}

bool axfr_complete(const std::vector<ResourceRecord>& records) {
  if (records.size() < 2) return false;
  return records.front().type == RRType::SOA && records.back().type == RRType::SOA;
}

}  // namespace

SocketTransport::SocketTransport()
    : map_([](const IpAddress& ip) { return Endpoint{ip, 53, 53}; }) {}

SocketTransport::SocketTransport(EndpointMap map) : map_(std::move(map)) {}

DnsObservation SocketTransport::exchange(const IpAddress& server, const DnsQuestion& question,
                                         TransportKind kind, milliseconds timeout) {
  auto ep = map_(server);
  return kind == TransportKind::Udp ? exchange_udp(ep, question, timeout)
                                    : exchange_tcp(ep, question, timeout);
}

DnsObservation SocketTransport::exchange_udp(const Endpoint& ep, const DnsQuestion& question,
                                             milliseconds timeout) {
  DnsObservation silent;
  silent.transport = TransportKind::Udp;

  sockaddr_storage ss;
  socklen_t len = fill_sockaddr(ep.address, ep.udp_port, ss);
  Fd fd(::socket(ss.ss_family, SOCK_DGRAM | SOCK_CLOEXEC, 0));
  if (fd.get() < 0) throw TransportError(std::string("udp socket: ") + std::strerror(errno));
  if (::connect(fd.get(), reinterpret_cast<sockaddr*>(&ss), len) != 0) {
    if (is_local_failure(errno)) throw TransportError(std::string("udp connect: ") + std::strerror(errno));
    return silent;
  }

  auto id = next_query_id();
  auto wire = encode_message(make_query(question, id));
  auto start = Clock::now();
  auto deadline = start + timeout;
  if (::send(fd.get(), wire.data(), wire.size(), 0) < 0) {
    if (is_local_failure(errno)) throw TransportError(std::string("udp send: ") + std::strerror(errno));
    return silent;
  }

  std::vector<std::uint8_t> buf(65535);
  while (wait_for(fd.get(), POLLIN, deadline)) {
    auto rc = ::recv(fd.get(), buf.data(), buf.size(), 0);
    if (rc < 0) {
      if (errno == EINTR) continue;
      return silent;  // ICMP unreachable and friends
    }
    auto rtt = std::chrono::duration_cast<milliseconds>(Clock::now() - start);
    if (rc < 2) continue;
    if (static_cast<std::uint16_t>((buf[0] << 8) | buf[1]) != id) continue;
    auto msg = decode_message(std::span<const std::uint8_t>(buf.data(), static_cast<std::size_t>(rc)));
    if (!msg || !msg->response) return malformed_observation(TransportKind::Udp, rtt);
    return observation_from(*msg, TransportKind::Udp, rtt);
  }
  return silent;
}

DnsObservation SocketTransport::exchange_tcp(const Endpoint& ep, const DnsQuestion& question,
                                             milliseconds timeout) {
  DnsObservation silent;
  silent.transport = TransportKind::Tcp;

  sockaddr_storage ss;
  socklen_t len = fill_sockaddr(ep.address, ep.tcp_port, ss);
  Fd fd(::socket(ss.ss_family, SOCK_STREAM | SOCK_CLOEXEC | SOCK_NONBLOCK, 0));
  if (fd.get() < 0) throw TransportError(std::string("tcp socket: ") + std::strerror(errno));

  auto start = Clock::now();
  auto deadline = start + timeout;
  if (::connect(fd.get(), reinterpret_cast<sockaddr*>(&ss), len) != 0) {
    if (errno != EINPROGRESS) {
      if (is_local_failure(errno)) throw TransportError(std::string("tcp connect: ") + std::strerror(errno));
      return silent;
    }
    if (!wait_for(fd.get(), POLLOUT, deadline)) return silent;
    int err = 0;
    socklen_t elen = sizeof err;
    ::getsockopt(fd.get(), SOL_SOCKET, SO_ERROR, &err, &elen);
    if (err != 0) {
      if (is_local_failure(err)) throw TransportError(std::string("tcp connect: ") + std::strerror(err));
      return silent;
    }
  }

  auto id = next_query_id();
  auto body = encode_message(make_query(question, id));
  std::vector<std::uint8_t> framed;
  framed.push_back(static_cast<std::uint8_t>(body.size() >> 8));
  framed.push_back(static_cast<std::uint8_t>(body.size()));
  framed.insert(framed.end(), body.begin(), body.end());
  if (!write_all(fd.get(), framed, deadline)) return silent;

  DnsObservation combined;
  bool first = true;
  while (true) {
    std::uint8_t lenbuf[2];
    if (!read_exact(fd.get(), lenbuf, 2, deadline)) break;
    std::size_t mlen = static_cast<std::size_t>((lenbuf[0] << 8) | lenbuf[1]);
    std::vector<std::uint8_t> buf(mlen);
    if (!read_exact(fd.get(), buf.data(), mlen, deadline)) break;
    auto rtt = std::chrono::duration_cast<milliseconds>(Clock::now() - start);
    auto msg = decode_message(buf);
    if (!msg || !msg->response || msg->id != id) {
      if (first) return malformed_observation(TransportKind::Tcp, rtt);
      break;
    }
    if (first) {
      combined = observation_from(*msg, TransportKind::Tcp, rtt);
      first = false;
    } else {
      combined.records.insert(combined.records.end(), msg->records.begin(), msg->records.end());
      combined.rtt = rtt;
    }
    if (question.qtype != RRType::AXFR || msg->rcode != Rcode::NoError) break;
    if (axfr_complete(combined.section(Section::Answer))) break;
  }
  return first ? silent : combined;
}

}  // namespace dnsaudit
