#pragma once

#include <atomic>
#include <filesystem>
#include <string>

#include <unistd.h>

#include "dnsaudit/audit.hpp"
#include "dnsaudit/probes.hpp"
#include "dnsaudit/universe.hpp"

namespace testing {

inline std::filesystem::path fixture(const std::string& rel) { return std::filesystem::path(FIXTURE_DIR) / rel; }

inline dnsaudit::ProbeConfig fast_config() {
  dnsaudit::ProbeConfig c;
  c.udp_timeout = std::chrono::milliseconds(300);
  c.udp_retries = 0;
  c.tcp_timeout = std::chrono::milliseconds(300);
  return c;
}

// Universe, in-process transport and prober in one place.
struct SimWorld {
  explicit SimWorld(dnsaudit::FixtureUniverse universe)
      : u(std::move(universe)), transport(u), prober(transport, u.roots, fast_config()) {}
  explicit SimWorld(const std::filesystem::path& path) : SimWorld(dnsaudit::load_universe(path)) {}

  dnsaudit::AuditConfig config() const {
    dnsaudit::AuditConfig c;
    c.canary = u.canary;
    return c;
  }
  dnsaudit::AuditResult audit(const std::string& domain) const {
    return dnsaudit::audit_domain(prober, dnsaudit::DomainName::parse(domain), config());
  }

  dnsaudit::FixtureUniverse u;
  dnsaudit::SimTransport transport;
  dnsaudit::Prober prober;
};

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("dnsaudit-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
