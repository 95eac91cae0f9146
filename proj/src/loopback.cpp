#include "dnsaudit/loopback.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <map>

namespace dnsaudit {

namespace {

std::pair<int, std::uint16_t> bind_local(int type) {
  int fd = ::socket(AF_INET, type | SOCK_CLOEXEC, 0);
  if (fd < 0) throw TransportError(std::string("loopback socket: ") + std::strerror(errno));
  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  sa.sin_port = 0;
  if (::bind(fd, reinterpret_cast<sockaddr*>(&sa), sizeof sa) != 0 ||
      (type == SOCK_STREAM && ::listen(fd, 64) != 0)) {
    int err = errno;
    ::close(fd);
    throw TransportError(std::string("loopback bind: ") + std::strerror(err));
  }
  socklen_t len = sizeof sa;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&sa), &len);
  return {fd, ntohs(sa.sin_port)};
}

bool read_exact(int fd, std::uint8_t* buf, std::size_t n) {
  std::size_t got = 0;
  while (got < n) {
    auto rc = ::recv(fd, buf + got, n - got, 0);
    if (rc < 0 && errno == EINTR) continue;
    if (rc <= 0) return false;
    got += static_cast<std::size_t>(rc);
  }
  return true;
}

bool write_all(int fd, const std::vector<std::uint8_t>& data) {
  std::size_t sent = 0;
  while (sent < data.size()) {
    auto rc = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (rc < 0 && errno == EINTR) continue;
    if (rc <= 0) return false;
    sent += static_cast<std::size_t>(rc);
  }
  return true;
}

std::optional<std::vector<DnsMessage>> respond(const FixtureUniverse& u, const IpAddress& logical,
                                               std::span<const std::uint8_t> wire, TransportKind kind) {
  auto query = decode_message(wire);
  if (!query || query->response || query->questions.size() != 1) return std::nullopt;
  DnsQuestion q = query->questions.front();
  q.recursion_desired = query->recursion_desired;
  auto messages = simulated_response(u, logical, q, kind);
  if (messages) {
    for (auto& m : *messages) m.id = query->id;
  }
  return messages;
}

}  // namespace

LoopbackServer::LoopbackServer(const FixtureUniverse& universe) : universe_(universe) {
  if (::pipe2(wake_, O_CLOEXEC) != 0) throw TransportError("loopback pipe failed");

  auto open_pair = [&](const IpAddress& logical) {
    auto [ufd, uport] = bind_local(SOCK_DGRAM);
    sockets_.push_back({ufd, false, logical});
    auto [tfd, tport] = bind_local(SOCK_STREAM);
    sockets_.push_back({tfd, true, logical});
    return SocketTransport::Endpoint{IpAddress::v4(127, 0, 0, 1), uport, tport};
  };

  std::map<IpAddress, bool> seen;
  for (const auto& s : universe_.servers) {
    for (const auto& a : s.addresses) {
      if (seen.emplace(a, true).second) bindings_.push_back({a, open_pair(a)});
    }
  }
  // The sink uses an address no fixture server owns, so the universe stays silent.
  sink_ = open_pair(IpAddress{});
  thread_ = std::thread([this] { serve(); });
}

LoopbackServer::~LoopbackServer() {
  char b = 1;
  [[maybe_unused]] auto rc = ::write(wake_[1], &b, 1);
  if (thread_.joinable()) thread_.join();
  for (const auto& s : sockets_) ::close(s.fd);
  ::close(wake_[0]);
  ::close(wake_[1]);
}

SocketTransport::EndpointMap LoopbackServer::endpoint_map() const {
  std::map<IpAddress, SocketTransport::Endpoint> table;
  for (const auto& b : bindings_) table.emplace(b.logical, b.endpoint);
  auto sink = sink_;
  return [table = std::move(table), sink](const IpAddress& a) {
    auto it = table.find(a);
    return it == table.end() ? sink : it->second;
  };
}

void LoopbackServer::serve() {
  std::vector<pollfd> fds;
  fds.push_back({wake_[0], POLLIN, 0});
  for (const auto& s : sockets_) fds.push_back({s.fd, POLLIN, 0});
  for (;;) {
    int rc = ::poll(fds.data(), fds.size(), -1);
    if (rc < 0) {
      if (errno == EINTR) continue;
      return;
    }
    if (fds[0].revents) return;
    for (std::size_t i = 1; i < fds.size(); ++i) {
      if (!(fds[i].revents & POLLIN)) continue;
      const auto& s = sockets_[i - 1];
      if (s.tcp) {
        handle_tcp(s);
      } else {
        handle_udp(s);
      }
    }
  }
}

void LoopbackServer::handle_udp(const Socket& s) {
  std::vector<std::uint8_t> buf(65535);
  sockaddr_storage from{};
  socklen_t flen = sizeof from;
  auto n = ::recvfrom(s.fd, buf.data(), buf.size(), MSG_DONTWAIT, reinterpret_cast<sockaddr*>(&from), &flen);
  if (n <= 0) return;
  auto messages = respond(universe_, s.logical, {buf.data(), static_cast<std::size_t>(n)}, TransportKind::Udp);
  if (!messages || messages->empty()) return;
  auto wire = encode_message(messages->front());
  ::sendto(s.fd, wire.data(), wire.size(), 0, reinterpret_cast<sockaddr*>(&from), flen);
}

void LoopbackServer::handle_tcp(const Socket& s) {
  int conn = ::accept4(s.fd, nullptr, nullptr, SOCK_CLOEXEC);
  if (conn < 0) return;
  timeval tv{2, 0};
  ::setsockopt(conn, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
  ::setsockopt(conn, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);

  std::uint8_t len[2];
  if (read_exact(conn, len, 2)) {
    std::vector<std::uint8_t> body(static_cast<std::size_t>((len[0] << 8) | len[1]));
    if (read_exact(conn, body.data(), body.size())) {
      if (auto messages = respond(universe_, s.logical, body, TransportKind::Tcp)) {
        for (const auto& m : *messages) {
          auto wire = encode_message(m);
          std::vector<std::uint8_t> framed{static_cast<std::uint8_t>(wire.size() >> 8),
                                           static_cast<std::uint8_t>(wire.size())};
          framed.insert(framed.end(), wire.begin(), wire.end());
          if (!write_all(conn, framed)) break;
        }
      }
    }
  }
  ::close(conn);
}

}  // namespace dnsaudit
