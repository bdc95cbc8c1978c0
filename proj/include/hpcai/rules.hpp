#pragma once

// Benchmarking rules: which of the nine layers a submission may change at each
// benchmarking level, the default learning-rate policy, and the run-count,
// aggregation and repeatability procedures.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hpcai/core.hpp"
#include "hpcai/json_io.hpp"
#include "hpcai/metrics.hpp"

namespace hpcai::rules {

// ---------------------------------------------------------------------------
// Level policies
// ---------------------------------------------------------------------------

struct LayerAllowance {
  bool all_keys = false;
  std::set<std::string> keys;
  std::vector<std::string> key_prefixes;

  [[nodiscard]] bool allows(const std::string& key) const {
    if (all_keys || keys.count(key)) return true;
    return std::any_of(key_prefixes.begin(), key_prefixes.end(),
                       [&](const std::string& p) { return key.rfind(p, 0) == 0; });
  }
};

struct LevelPolicy {
  BenchLevel level = BenchLevel::HARDWARE;
  std::map<int, LayerAllowance> mutable_layers;  // layer index -> allowed keys

  [[nodiscard]] bool allows(int layer, const std::string& key) const {
    auto it = mutable_layers.find(layer);
    return it != mutable_layers.end() && it->second.allows(key);
  }
};

/// Hardware level: layers 1-4 open, parallel mode open, batch size and the
/// learning-rate policy (any `lr_*` key) open. System level also opens the
/// framework. Free level opens layers 1-8. Layer 9 is never open.
inline const LevelPolicy& policy_for(BenchLevel level) {
  static const std::array<LevelPolicy, 3> kPolicies = [] {
    LayerAllowance all{true, {}, {}};
    LevelPolicy hw{BenchLevel::HARDWARE, {}};
    for (int l = 1; l <= 4; ++l) hw.mutable_layers[l] = all;
    hw.mutable_layers[6] = LayerAllowance{false, {"parallel_mode"}, {}};
    hw.mutable_layers[8] = LayerAllowance{false, {"batchsize", "lr_policy"}, {"lr_"}};

    LevelPolicy sys = hw;
    sys.level = BenchLevel::SYSTEM;
    sys.mutable_layers[5] = all;

    LevelPolicy free{BenchLevel::FREE, {}};
    for (int l = 1; l <= 8; ++l) free.mutable_layers[l] = all;
    return std::array<LevelPolicy, 3>{hw, sys, free};
  }();
  return kPolicies[static_cast<std::size_t>(level)];
}

// ---------------------------------------------------------------------------
// Canonical comparison
// ---------------------------------------------------------------------------

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

/// Sorted keys, trimmed, case-folded.
inline LayerMap canonical(const LayerMap& m) {
  LayerMap out;
  for (const auto& [k, v] : m) out[to_lower(trim(k))] = to_lower(trim(v));
  return out;
}

inline std::array<LayerMap, kLayerCount> canonical(const NineLayerDeclaration& d) {
  std::array<LayerMap, kLayerCount> out;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = canonical(d.layers[i]);
  return out;
}

inline bool equivalent(const NineLayerDeclaration& a, const NineLayerDeclaration& b) {
  return canonical(a) == canonical(b);
}

struct KeyDiff {
  std::string key;
  std::optional<std::string> a;
  std::optional<std::string> b;
};

inline std::vector<KeyDiff> diff(const LayerMap& a, const LayerMap& b) {
  std::vector<KeyDiff> out;
  std::set<std::string> keys;
  for (const auto& [k, v] : a) keys.insert(k);
  for (const auto& [k, v] : b) keys.insert(k);
  for (const auto& k : keys) {
    auto ia = a.find(k);
    auto ib = b.find(k);
    std::optional<std::string> va = ia == a.end() ? std::nullopt : std::optional(ia->second);
    std::optional<std::string> vb = ib == b.end() ? std::nullopt : std::optional(ib->second);
    if (va != vb) out.push_back({k, va, vb});
  }
  return out;
}

inline bool is_synchronous(const LayerMap& canonical_programming_model) {
  auto it = canonical_programming_model.find("sync_mode");
  return it != canonical_programming_model.end() && it->second == "synchronous";
}

// ---------------------------------------------------------------------------
// Violations
// ---------------------------------------------------------------------------

enum class Severity { ERROR, WARNING };

struct Violation {
  int layer = 1;  // 1..9
  std::string key;
  Severity severity = Severity::ERROR;
  std::string message;

  bool operator==(const Violation&) const = default;
};

inline json to_json(const Violation& v) {
  return {{"layer", v.layer},
          {"key", v.key},
          {"severity", v.severity == Severity::ERROR ? "error" : "warning"},
          {"message", v.message}};
}

inline bool has_errors(const std::vector<Violation>& vs) {
  return std::any_of(vs.begin(), vs.end(), [](const Violation& v) { return v.severity == Severity::ERROR; });
}

/// Epoch counts fixed for the reference datasets.
inline std::optional<int> required_epochs(const std::string& canonical_dataset) {
  if (canonical_dataset == "imagenet") return 90;
  if (canonical_dataset == "ewa") return 50;
  return std::nullopt;
}

inline std::string layer_name(int layer) { return std::string(kLayerKeys[static_cast<std::size_t>(layer - 1)]); }

inline std::string describe(const std::optional<std::string>& v) { return v ? "'" + *v + "'" : "<absent>"; }

/// Every difference from the reference outside the run's level allowance is
/// an ERROR. Asynchronous training is an ERROR at every level.
inline std::vector<Violation> validate_declaration(const RunRecord& run, const NineLayerDeclaration& reference) {
  validate(run.declaration);
  validate(reference);
  const auto& policy = policy_for(run.level);
  const auto mine = canonical(run.declaration);
  const auto ref = canonical(reference);
  std::vector<Violation> out;

  for (int layer = 1; layer <= kLayerCount; ++layer) {
    for (const auto& d : diff(ref[static_cast<std::size_t>(layer - 1)], mine[static_cast<std::size_t>(layer - 1)])) {
      if (layer == 6 && d.key == "sync_mode") continue;  // checked below
      if (policy.allows(layer, d.key)) continue;
      out.push_back({layer, d.key, Severity::ERROR,
                     layer_name(layer) + "." + d.key + " changed from " + describe(d.a) + " to " + describe(d.b) +
                         ", which the " + std::string(to_string(run.level)) + " level does not allow"});
    }
  }

  if (!is_synchronous(mine[5])) {
    auto it = mine[5].find("sync_mode");
    out.push_back({6, "sync_mode", Severity::ERROR,
                   "synchronous SGD is mandatory; run declares sync_mode '" + (it == mine[5].end() ? "" : it->second) +
                       "'"});
  }

  const auto& domain = mine[8];
  if (auto ds = domain.find("dataset"); ds != domain.end()) {
    if (auto need = required_epochs(ds->second)) {
      auto ep = domain.find("epochs");
      const bool reported = std::any_of(out.begin(), out.end(),
                                        [](const Violation& v) { return v.layer == 9 && v.key == "epochs"; });
      if (!reported && (ep == domain.end() || ep->second != std::to_string(*need))) {
        out.push_back({9, "epochs", Severity::ERROR,
                       "dataset '" + ds->second + "' must be trained for " + std::to_string(*need) + " epochs"});
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Equivalence
// ---------------------------------------------------------------------------

enum class LayerStatus { EQUIVALENT, DIFFERS_ALLOWED, DIFFERS_FORBIDDEN };

inline std::string_view to_string(LayerStatus s) {
  switch (s) {
    case LayerStatus::EQUIVALENT: return "equivalent";
    case LayerStatus::DIFFERS_ALLOWED: return "differs_allowed";
    case LayerStatus::DIFFERS_FORBIDDEN: return "differs_forbidden";
  }
  return "?";
}

struct LayerVerdict {
  int layer = 1;
  LayerStatus status = LayerStatus::EQUIVALENT;
  std::vector<std::string> differing_keys;
};

struct EquivalenceReport {
  BenchLevel level = BenchLevel::HARDWARE;
  std::array<LayerVerdict, kLayerCount> layers;
  bool comparable = true;
};

inline EquivalenceReport check_equivalence(const NineLayerDeclaration& a, const NineLayerDeclaration& b,
                                           BenchLevel level) {
  validate(a);
  validate(b);
  const auto ca = canonical(a);
  const auto cb = canonical(b);
  const auto& wa = ca[6];
  const auto& wb = cb[6];
  if (wa.count("workload") && wb.count("workload") && wa.at("workload") != wb.at("workload")) {
    throw Error(ErrorKind::IncomparableWorkloads,
                "declarations are for workloads '" + wa.at("workload") + "' and '" + wb.at("workload") + "'");
  }
  const auto& policy = policy_for(level);
  EquivalenceReport r;
  r.level = level;
  for (int layer = 1; layer <= kLayerCount; ++layer) {
    const auto i = static_cast<std::size_t>(layer - 1);
    LayerVerdict v{layer, LayerStatus::EQUIVALENT, {}};
    bool forbidden = false;
    for (const auto& d : diff(ca[i], cb[i])) {
      v.differing_keys.push_back(d.key);
      if (layer == 6 && d.key == "sync_mode") {
        forbidden = forbidden || !is_synchronous(ca[i]) || !is_synchronous(cb[i]);
      } else if (!policy.allows(layer, d.key)) {
        forbidden = true;
      }
    }
    if (!v.differing_keys.empty()) v.status = forbidden ? LayerStatus::DIFFERS_FORBIDDEN : LayerStatus::DIFFERS_ALLOWED;
    if (forbidden) r.comparable = false;
    r.layers[i] = std::move(v);
  }
  return r;
}

inline json to_json(const EquivalenceReport& r) {
  json layers = json::array();
  for (const auto& v : r.layers) {
    layers.push_back({{"layer", v.layer},
                      {"name", layer_name(v.layer)},
                      {"status", std::string(to_string(v.status))},
                      {"differing_keys", v.differing_keys}});
  }
  return {{"level", std::string(hpcai::to_string(r.level))}, {"comparable", r.comparable}, {"layers", layers}};
}

// ---------------------------------------------------------------------------
// Learning-rate policy: linear scaling with warm-up
// ---------------------------------------------------------------------------

enum class Decay { COSINE, STEP, NONE };

inline std::optional<Decay> parse_decay(std::string_view text) {
  const std::string t = to_lower(text);
  if (t == "cosine") return Decay::COSINE;
  if (t == "step") return Decay::STEP;
  if (t == "none") return Decay::NONE;
  return std::nullopt;
}

/// Warm-up ramps linearly from base_lr to base_lr * k, then the decay starts
/// from base_lr * k. STEP divides by 10 at 1/3, 2/3 and 8/9 of training
/// (epochs 30, 60, 80 of 90).
class LrSchedule {
 public:
  LrSchedule(double base_lr, double k, int warmup_epochs, int total_epochs, Decay decay)
      : base_(base_lr), k_(k), warmup_(warmup_epochs), total_(total_epochs), decay_(decay) {
    if (!(base_lr > 0.0)) throw Error(ErrorKind::InvalidSchedule, "base learning rate must be > 0");
    if (!(k >= 1.0)) throw Error(ErrorKind::InvalidSchedule, "batch multiplier k must be >= 1");
    if (warmup_epochs < 0 || warmup_epochs >= total_epochs) {
      throw Error(ErrorKind::InvalidSchedule, "warm-up epochs must be in [0, total epochs)");
    }
  }

  [[nodiscard]] double peak() const { return base_ * k_; }
  [[nodiscard]] int total_epochs() const { return total_; }
  [[nodiscard]] int warmup_epochs() const { return warmup_; }

  [[nodiscard]] double at(double epoch) const {
    if (epoch < warmup_) return base_ + (peak() - base_) * epoch / warmup_;
    const double span = total_ - warmup_;
    const double t = std::clamp((epoch - warmup_) / span, 0.0, 1.0);
    switch (decay_) {
      case Decay::COSINE:
        return peak() * 0.5 * (1.0 + std::cos(std::numbers::pi * t));
      case Decay::STEP: {
        double lr = peak();
        for (double m : {1.0 / 3.0, 2.0 / 3.0, 8.0 / 9.0}) {
          if (epoch >= m * total_) lr *= 0.1;
        }
        return lr;
      }
      case Decay::NONE:
        return peak();
    }
    return peak();
  }

  /// One value per integer epoch in [0, total].
  [[nodiscard]] std::vector<std::pair<int, double>> per_epoch() const {
    std::vector<std::pair<int, double>> out;
    for (int e = 0; e <= total_; ++e) out.emplace_back(e, at(e));
    return out;
  }

 private:
  double base_;
  double k_;
  int warmup_;
  int total_;
  Decay decay_;
};

inline LrSchedule lr_schedule(double base_lr, double k, int warmup_epochs, int total_epochs, Decay decay) {
  return LrSchedule(base_lr, k, warmup_epochs, total_epochs, decay);
}

// ---------------------------------------------------------------------------
// Aggregation and repeatability
// ---------------------------------------------------------------------------

/// Population standard deviation over mean; 0 when the mean is 0.
inline double variation(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (mean == 0.0) return 0.0;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size())) / std::abs(mean);
}

struct AggregateResult {
  std::string workload;
  std::vector<RunRecord> retained_runs;
  std::optional<RunRecord> dropped_highest;
  std::optional<RunRecord> dropped_lowest;
  std::map<std::string, double> mean_score;
  double variation = 0.0;            // over epochs_to_quality, all submitted runs
  double wall_time_variation = 0.0;  // secondary, over wall_time
  std::size_t submitted = 0;
};

namespace detail {
inline void sort_by_epochs(std::vector<RunRecord>& runs) {
  std::stable_sort(runs.begin(), runs.end(), [](const RunRecord& a, const RunRecord& b) {
    if (a.epochs_to_quality != b.epochs_to_quality) return a.epochs_to_quality < b.epochs_to_quality;
    return a.run_id < b.run_id;
  });
}
}  // namespace detail

/// Sorts by (epochs_to_quality, run_id), drops the single lowest and highest,
/// and averages the scores of the rest.
inline AggregateResult aggregate_runs(std::vector<RunRecord> runs, const WorkloadSpec& workload) {
  if (runs.size() < static_cast<std::size_t>(workload.min_runs)) {
    throw Error(ErrorKind::InsufficientRuns, "workload '" + workload.name + "' requires at least " +
                                                 std::to_string(workload.min_runs) + " runs, got " +
                                                 std::to_string(runs.size()));
  }
  if (runs.empty()) throw Error(ErrorKind::InsufficientRuns, "no runs to aggregate");
  for (const auto& r : runs) {
    if (r.workload != workload.name) {
      throw Error(ErrorKind::IncomparableWorkloads, "run '" + r.run_id + "' is not a '" + workload.name + "' run");
    }
  }
  detail::sort_by_epochs(runs);

  AggregateResult out;
  out.workload = workload.name;
  out.submitted = runs.size();
  std::vector<double> epochs, walls;
  for (const auto& r : runs) {
    epochs.push_back(r.epochs_to_quality);
    walls.push_back(r.wall_time);
  }
  out.variation = variation(epochs);
  out.wall_time_variation = variation(walls);

  std::size_t lo = 0, hi = runs.size();
  if (runs.size() >= 3) {
    out.dropped_lowest = runs.front();
    out.dropped_highest = runs.back();
    lo = 1;
    hi = runs.size() - 1;
  }
  out.retained_runs.assign(runs.begin() + static_cast<std::ptrdiff_t>(lo), runs.begin() + static_cast<std::ptrdiff_t>(hi));

  std::map<std::string, double> sums;
  bool all_powered = true;
  for (const auto& r : out.retained_runs) {
    const auto s = metrics::score_run(r, workload);
    sums["epochs_to_quality"] += r.epochs_to_quality;
    sums["time_to_quality"] += s.time_to_quality;
    sums["flops"] += s.flops;
    sums["vflops"] += s.vflops;
    sums["penalty"] += s.penalty;
    sums["achieved_quality"] += r.achieved_quality;
    if (s.vflops_per_watt) {
      sums["vflops_per_watt"] += *s.vflops_per_watt;
      sums["flops_per_watt"] += *s.flops_per_watt;
    } else {
      all_powered = false;
    }
  }
  if (!all_powered) {
    sums.erase("vflops_per_watt");
    sums.erase("flops_per_watt");
  }
  const double n = static_cast<double>(out.retained_runs.size());
  for (const auto& [k, v] : sums) out.mean_score[k] = v / n;
  return out;
}

inline json to_json(const AggregateResult& a) {
  json retained = json::array();
  for (const auto& r : a.retained_runs) retained.push_back(r.run_id);
  json j = {{"workload", a.workload},
            {"submitted", a.submitted},
            {"retained_runs", retained},
            {"mean_score", a.mean_score},
            {"variation", a.variation},
            {"wall_time_variation", a.wall_time_variation}};
  j["dropped_highest"] = a.dropped_highest ? json(a.dropped_highest->run_id) : json(nullptr);
  j["dropped_lowest"] = a.dropped_lowest ? json(a.dropped_lowest->run_id) : json(nullptr);
  return j;
}

/// Identity of a configuration: everything that must match for two runs to be
/// repetitions of the same benchmark.
inline bool same_configuration(const RunRecord& a, const RunRecord& b) {
  return a.workload == b.workload && a.system == b.system && a.scale == b.scale && a.precision == b.precision &&
         a.global_batchsize == b.global_batchsize && a.level == b.level && equivalent(a.declaration, b.declaration);
}

struct RepeatabilityReport {
  double mean = 0.0;                 // epochs_to_quality
  double variation = 0.0;            // stddev / mean over epochs_to_quality
  double wall_time_variation = 0.0;  // secondary, over wall_time
  std::vector<RunRecord> raw;        // every submitted trial
};

inline RepeatabilityReport repeatability_report(const std::vector<RunRecord>& runs) {
  if (runs.size() < 2) throw Error(ErrorKind::InsufficientRuns, "repeatability needs at least 2 runs");
  for (const auto& r : runs) {
    if (!same_configuration(runs.front(), r)) {
      throw Error(ErrorKind::NotARepetition,
                  "run '" + r.run_id + "' does not repeat the configuration of '" + runs.front().run_id + "'");
    }
  }
  RepeatabilityReport rep;
  std::vector<double> epochs, walls;
  for (const auto& r : runs) {
    epochs.push_back(r.epochs_to_quality);
    walls.push_back(r.wall_time);
    rep.mean += r.epochs_to_quality;
  }
  rep.mean /= static_cast<double>(runs.size());
  rep.variation = variation(epochs);
  rep.wall_time_variation = variation(walls);
  rep.raw = runs;
  return rep;
}

struct MetricDelta {
  std::string metric;
  double a = 0.0;
  double b = 0.0;
  double relative_delta = 0.0;  // |a - b| / |a|
  bool pass = true;
};

struct ReplicabilityReport {
  bool pass = true;
  double tolerance = 0.0;
  std::vector<MetricDelta> metrics;
};

/// Team B reproduces team A's aggregate on the same system. The tolerance is
/// a required input; there is no default.
inline ReplicabilityReport replicability_check(const AggregateResult& team_a, const AggregateResult& team_b,
                                               double tolerance) {
  if (!(tolerance >= 0.0)) throw Error(ErrorKind::InvalidArgument, "tolerance must be >= 0");
  if (team_a.workload != team_b.workload) {
    throw Error(ErrorKind::IncomparableWorkloads, "aggregates are for different workloads");
  }
  if (!team_a.retained_runs.empty() && !team_b.retained_runs.empty()) {
    const auto& ra = team_a.retained_runs.front();
    const auto& rb = team_b.retained_runs.front();
    if (ra.system != rb.system || !equivalent(ra.declaration, rb.declaration)) {
      throw Error(ErrorKind::NotReplicable, "the two teams declare different systems or configurations");
    }
  }
  ReplicabilityReport rep;
  rep.tolerance = tolerance;
  for (const auto& [metric, a] : team_a.mean_score) {
    auto it = team_b.mean_score.find(metric);
    if (it == team_b.mean_score.end()) continue;
    MetricDelta d{metric, a, it->second, 0.0, true};
    if (a != 0.0) {
      d.relative_delta = std::abs(a - it->second) / std::abs(a);
    } else {
      d.relative_delta = it->second == 0.0 ? 0.0 : INFINITY;
    }
    d.pass = d.relative_delta <= tolerance;
    rep.pass = rep.pass && d.pass;
    rep.metrics.push_back(d);
  }
  return rep;
}

}  // namespace hpcai::rules
