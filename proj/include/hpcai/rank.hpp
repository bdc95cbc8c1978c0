#pragma once

// VFLOPS leaderboard. Rule-violating runs stay in the table, flagged.

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hpcai/core.hpp"
#include "hpcai/metrics.hpp"
#include "hpcai/rules.hpp"

namespace hpcai::report {

struct RankingRow {
  int rank = 0;
  std::string run_id;
  std::string system;
  int scale = 0;
  PrecisionMode precision = PrecisionMode::FP32;
  double flops = 0.0;
  double vflops = 0.0;
  std::optional<double> vflops_per_watt;
  double time_to_quality = 0.0;
  int violations = 0;  // all severities
  bool eligible = true;  // false when any ERROR violation is present

  std::string rule_status() const {
    return violations == 0 ? "CLEAN" : "VIOLATIONS(" + std::to_string(violations) + ")";
  }
};

inline json to_json(const RankingRow& r) {
  return {{"rank", r.rank},
          {"run_id", r.run_id},
          {"system", r.system},
          {"scale", r.scale},
          {"precision", std::string(to_string(r.precision))},
          {"flops", r.flops},
          {"vflops", r.vflops},
          {"vflops_per_watt", r.vflops_per_watt ? json(*r.vflops_per_watt) : json(nullptr)},
          {"time_to_quality", r.time_to_quality},
          {"rule_status", r.rule_status()},
          {"eligible", r.eligible}};
}

using ViolationMap = std::map<std::string, std::vector<rules::Violation>>;  // run_id -> findings

/// Ordered by VFLOPS descending, then time-to-quality ascending, then run_id.
inline std::vector<RankingRow> rank(const std::vector<RunRecord>& runs, const WorkloadSpec& workload,
                                    const ViolationMap& violations = {}) {
  std::vector<RankingRow> rows;
  rows.reserve(runs.size());
  for (const auto& run : runs) {
    if (run.workload != workload.name) {
      throw Error(ErrorKind::IncomparableWorkloads,
                  "cannot rank '" + run.run_id + "' (" + run.workload + ") alongside '" + workload.name + "' runs");
    }
    const auto s = metrics::score_run(run, workload);
    RankingRow row;
    row.run_id = run.run_id;
    row.system = run.system;
    row.scale = run.scale;
    row.precision = run.precision;
    row.flops = s.flops;
    row.vflops = s.vflops;
    row.vflops_per_watt = s.vflops_per_watt;
    row.time_to_quality = s.time_to_quality;
    if (auto it = violations.find(run.run_id); it != violations.end()) {
      row.violations = static_cast<int>(it->second.size());
      row.eligible = !rules::has_errors(it->second);
    }
    rows.push_back(std::move(row));
  }
  std::sort(rows.begin(), rows.end(), [](const RankingRow& a, const RankingRow& b) {
    if (a.vflops != b.vflops) return a.vflops > b.vflops;
    if (a.time_to_quality != b.time_to_quality) return a.time_to_quality < b.time_to_quality;
    return a.run_id < b.run_id;
  });
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].rank = static_cast<int>(i + 1);
  return rows;
}

}  // namespace hpcai::report
