#include "dnsaudit/store.hpp"

#include <json.hpp>

namespace dnsaudit {

using nlohmann::json;

const char* to_string(ReportStatus status) {
  switch (status) {
    case ReportStatus::Completed: return "completed";
    case ReportStatus::ExcludedUnresolvable: return "excluded_unresolvable";
    case ReportStatus::Aborted: return "aborted";
  }
  return "?";
}

std::optional<ReportStatus> parse_report_status(std::string_view text) {
  for (auto s : {ReportStatus::Completed, ReportStatus::ExcludedUnresolvable, ReportStatus::Aborted}) {
    if (text == to_string(s)) return s;
  }
  return std::nullopt;
}

StoredReport make_report(const AuditResult& audit, std::string run_id, std::int64_t ts) {
  StoredReport r;
  const auto& t = audit.trace;
  r.domain = t.domain.str();
  r.run_id = std::move(run_id);
  r.ts = ts;
  r.status = audit.excluded ? ReportStatus::ExcludedUnresolvable : ReportStatus::Completed;
  r.parent_zone = t.parent_zone.str();
  r.loop_detected = t.loop_detected;
  r.depth = t.depth;
  r.trace_evidence = t.evidence;
  for (const auto& s : t.servers) {
    ServerSummary sum;
    sum.name = s.ns_name.str();
    for (const auto& a : s.aliases) sum.aliases.push_back(a.str());
    for (const auto& a : s.endpoint.addresses) sum.addresses.push_back(a.to_string());
    sum.source = to_string(s.source);
    sum.authoritative = s.is_authoritative;
    sum.identity = s.identity();
    r.servers.push_back(std::move(sum));
  }
  if (!audit.excluded) {
    r.outcomes = audit.outcomes;
    r.raw_metric = audit.metric.raw;
  } else {
    r.note = "no authoritative server found";
  }
  return r;
}

StoredReport aborted_report(const DomainName& domain, std::string run_id, std::int64_t ts, std::string note) {
  StoredReport r;
  r.domain = domain.str();
  r.run_id = std::move(run_id);
  r.ts = ts;
  r.status = ReportStatus::Aborted;
  r.note = std::move(note);
  return r;
}

std::string to_json_line(const StoredReport& r) {
  json outcomes = json::array();
  for (const auto& o : r.outcomes) {
    outcomes.push_back({{"test", ordinal(o.test_id)},
                        {"indicator", o.indicator},
                        {"n_err", o.n_err},
                        {"n_tot", o.n_tot},
                        {"applicable", o.applicable},
                        {"evidence", o.evidence},
                        {"implicated", o.implicated}});
  }
  json servers = json::array();
  for (const auto& s : r.servers) {
    servers.push_back({{"name", s.name},
                       {"aliases", s.aliases},
                       {"addresses", s.addresses},
                       {"source", s.source},
                       {"authoritative", s.authoritative ? json(*s.authoritative) : json(nullptr)},
                       {"identity", s.identity}});
  }
  json j = {{"domain", r.domain},
            {"run_id", r.run_id},
            {"ts", r.ts},
            {"status", to_string(r.status)},
            {"outcomes", outcomes},
            {"raw_metric", r.raw_metric ? json(*r.raw_metric) : json(nullptr)},
            {"servers", servers},
            {"trace",
             {{"parent_zone", r.parent_zone},
              {"loop_detected", r.loop_detected},
              {"depth", r.depth},
              {"evidence", r.trace_evidence}}},
            {"note", r.note}};
  return j.dump();
}

StoredReport from_json_line(std::string_view line) {
  try {
    auto j = json::parse(line);
    StoredReport r;
    r.domain = j.at("domain").get<std::string>();
    r.run_id = j.at("run_id").get<std::string>();
    r.ts = j.at("ts").get<std::int64_t>();
    auto status = parse_report_status(j.at("status").get<std::string>());
    if (!status) throw StoreError("unknown status");
    r.status = *status;
    for (const auto& o : j.at("outcomes")) {
      auto id = test_from_ordinal(o.at("test").get<int>());
      if (!id) throw StoreError("unknown test ordinal");
      TestOutcome t;
      t.test_id = *id;
      t.indicator = o.at("indicator").get<int>();
      t.n_err = o.at("n_err").get<std::size_t>();
      t.n_tot = o.at("n_tot").get<std::size_t>();
      t.applicable = o.at("applicable").get<bool>();
      t.evidence = o.at("evidence").get<std::vector<std::string>>();
      t.implicated = o.at("implicated").get<std::vector<std::string>>();
      r.outcomes.push_back(std::move(t));
    }
    if (!j.at("raw_metric").is_null()) r.raw_metric = j.at("raw_metric").get<double>();
    for (const auto& s : j.at("servers")) {
      ServerSummary sum;
      sum.name = s.at("name").get<std::string>();
      sum.aliases = s.at("aliases").get<std::vector<std::string>>();
      sum.addresses = s.at("addresses").get<std::vector<std::string>>();
      sum.source = s.at("source").get<std::string>();
      if (!s.at("authoritative").is_null()) sum.authoritative = s.at("authoritative").get<bool>();
      sum.identity = s.at("identity").get<std::string>();
      r.servers.push_back(std::move(sum));
    }
    if (j.contains("trace")) {
      const auto& t = j.at("trace");
      r.parent_zone = t.value("parent_zone", "");
      r.loop_detected = t.value("loop_detected", false);
      r.depth = t.value("depth", std::size_t{0});
      r.trace_evidence = t.value("evidence", std::vector<std::string>{});
    }
    r.note = j.value("note", "");
    return r;
  } catch (const json::exception& e) {
    throw StoreError(e.what());
  }
}

std::vector<StoredReport> read_store(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StoreError("cannot read store " + path.string());
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<StoredReport> out;
  std::size_t pos = 0;
  int lineno = 0;
  while (pos < content.size()) {
    auto nl = content.find('\n', pos);
    if (nl == std::string::npos) break;
    ++lineno;
    std::string_view line(content.data() + pos, nl - pos);
    pos = nl + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      out.push_back(from_json_line(line));
    } catch (const StoreError& e) {
      throw StoreError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

ReportStore::ReportStore(std::filesystem::path path) : path_(std::move(path)) {
  // Drop the partial line a crashed append left behind.
  std::error_code ec;
  if (std::filesystem::is_regular_file(path_, ec)) {
    std::ifstream in(path_, std::ios::binary);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (!content.empty() && content.back() != '\n') {
      auto keep = content.rfind('\n');
      std::filesystem::resize_file(path_, keep == std::string::npos ? 0 : keep + 1, ec);
      if (ec) throw StoreError("cannot repair store " + path_.string() + ": " + ec.message());
    }
  }
  out_.open(path_, std::ios::app | std::ios::binary);
  if (!out_) throw StoreError("cannot open store " + path_.string() + " for appending");
}

void ReportStore::append(const StoredReport& report) {
  auto line = to_json_line(report);
  std::lock_guard lock(mu_);
  out_ << line << '\n';
  out_.flush();
  if (!out_) throw StoreError("write to " + path_.string() + " failed");
}

std::set<std::pair<std::string, std::string>> ReportStore::keys() const {
  std::set<std::pair<std::string, std::string>> out;
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path_, ec)) return out;
  for (const auto& r : read_store(path_)) out.emplace(r.domain, r.run_id);
  return out;
}

}  // namespace dnsaudit
