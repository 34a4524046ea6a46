#include "hodgelab/report.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace hodgelab {

using nlohmann::json;

namespace {

json record_json(const VerificationRecord& r) {
  json p = json::object();
  auto sorted = r.params;
  std::sort(sorted.begin(), sorted.end());
  for (const auto& [k, v] : sorted) p[k] = v;
  return json{{"name", r.name},     {"params", p},         {"lhs", r.lhs},
              {"rhs", r.rhs},       {"slack", r.slack},    {"verdict", r.verdict},
              {"mesh_h", r.mesh_h}, {"seed", r.seed}};
}

}  // namespace

std::string VerificationRecord::param_string() const {
  auto sorted = params;
  std::sort(sorted.begin(), sorted.end());
  std::string out;
  char buf[64];
  for (const auto& [k, v] : sorted) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += k + "=" + buf + ";";
  }
  return out;
}

std::string VerificationRecord::to_json() const { return record_json(*this).dump(); }

void sort_records(std::vector<VerificationRecord>& records) {
  std::stable_sort(records.begin(), records.end(),
                   [](const VerificationRecord& a, const VerificationRecord& b) {
                     if (a.name != b.name) return a.name < b.name;
                     return a.param_string() < b.param_string();
                   });
}

void set_verdict(VerificationRecord& r, double tolerance, bool hard) {
  bool ok = r.slack >= -tolerance;
  r.verdict = hard ? (ok ? "pass" : "fail") : "diagnostic";
}

bool ReportDocument::all_passed() const {
  for (const auto& r : records)
    if (!r.passed()) return false;
  return true;
}

std::string ReportDocument::to_json() const {
  json recs = json::array();
  for (const auto& r : records) recs.push_back(record_json(r));
  json times = json::object();
  for (const auto& t : timings) times[t.phase] = t.seconds;
  char fp[32];
  std::snprintf(fp, sizeof(fp), "%016llx", static_cast<unsigned long long>(mesh_fingerprint));
  json doc{{"tool_version", tool_version},
           {"config", config_echo},
           {"mesh_fingerprint", std::string(fp)},
           {"records", recs},
           {"timings", times}};
  return doc.dump(2);
}

void ReportDocument::write_json(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report: " + path);
  out << to_json() << '\n';
}

void ReportDocument::write_jsonl(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report: " + path);
  for (const auto& r : records) out << r.to_json() << '\n';
}

void ReportDocument::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report csv: " + path);
  out << "name,params,lhs,rhs,slack,verdict,mesh_h,seed\n";
  out.precision(17);
  for (const auto& r : records)
    out << r.name << ",\"" << r.param_string() << "\"," << r.lhs << ',' << r.rhs << ','
        << r.slack << ',' << r.verdict << ',' << r.mesh_h << ',' << r.seed << '\n';
}

void write_csv_pairs(const std::string& path, const std::string& header,
                     const std::vector<std::pair<double, double>>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write csv: " + path);
  out << header << '\n';
  out.precision(17);
  for (const auto& [a, b] : rows) out << a << ',' << b << '\n';
}

}  // namespace hodgelab
