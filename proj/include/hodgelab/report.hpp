#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace hodgelab {

/// One inequality/identity check. slack = rhs - lhs for scalar checks (or
/// tolerance minus max pointwise violation); verdict "pass" iff
/// slack >= -tolerance, "diagnostic" verdicts never fail a suite.
struct VerificationRecord {
  std::string name;
  std::vector<std::pair<std::string, double>> params;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  std::string verdict = "pass";  // pass | fail | diagnostic
  double mesh_h = 0.0;
  std::uint64_t seed = 0;

  VerificationRecord& param(const std::string& key, double value) {
    params.emplace_back(key, value);
    return *this;
  }
  bool passed() const { return verdict != "fail"; }

  /// Canonical "k=v;..." string with sorted keys; the suite sort key.
  std::string param_string() const;
  std::string to_json() const;
};

/// Sort records by (name, param_string) so parallel suites merge
/// deterministically.
void sort_records(std::vector<VerificationRecord>& records);

/// Decide verdict from slack and tolerance; diagnostic when hard == false.
void set_verdict(VerificationRecord& r, double tolerance, bool hard = true);

struct PhaseTiming {
  std::string phase;
  double seconds = 0.0;
};

struct ReportDocument {
  std::string tool_version = "0.1.0";
  std::string config_echo;
  std::uint64_t mesh_fingerprint = 0;
  std::vector<VerificationRecord> records;
  std::vector<PhaseTiming> timings;

  bool all_passed() const;
  std::string to_json() const;
  void write_json(const std::string& path) const;
  void write_jsonl(const std::string& path) const;  // one record per line
  void write_csv(const std::string& path) const;    // summary table
};

void write_csv_pairs(const std::string& path, const std::string& header,
                     const std::vector<std::pair<double, double>>& rows);

}  // namespace hodgelab
