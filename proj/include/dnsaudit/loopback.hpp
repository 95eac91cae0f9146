#pragma once

#include <atomic>
#include <thread>
#include <vector>

#include "dnsaudit/universe.hpp"

namespace dnsaudit {

/// Serves a fixture universe over real sockets on 127.0.0.1. Every fixture
/// address gets its own UDP and TCP port; endpoint_map() plugs into
/// SocketTransport so probes address servers by their fixture IPs.
class LoopbackServer {
 public:
  explicit LoopbackServer(const FixtureUniverse& universe);
  ~LoopbackServer();

  LoopbackServer(const LoopbackServer&) = delete;
  LoopbackServer& operator=(const LoopbackServer&) = delete;

  struct Binding {
    IpAddress logical;
    SocketTransport::Endpoint endpoint;
  };

  const std::vector<Binding>& bindings() const noexcept { return bindings_; }
  /// Unknown addresses map to a port pair that never answers.
  SocketTransport::EndpointMap endpoint_map() const;

 private:
  struct Socket {
    int fd;
    bool tcp;
    IpAddress logical;
  };

  void serve();
  void handle_udp(const Socket& s);
  void handle_tcp(const Socket& s);

  const FixtureUniverse& universe_;
  std::vector<Binding> bindings_;
  SocketTransport::Endpoint sink_;
  std::vector<Socket> sockets_;
  int wake_[2] = {-1, -1};
  std::thread thread_;
};

}  // namespace dnsaudit
