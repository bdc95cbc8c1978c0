#pragma once

// Scoring formulas: penalty coefficient, VFLOPS, VFLOPS per watt, plus the
// measurement arithmetic used to turn profiles and throughput into FLOPS.

#include <cmath>
#include <optional>
#include <string>

#include "hpcai/core.hpp"

namespace hpcai::metrics {

/// (achieved / target)^n. Values above 1 award runs that beat the target;
/// no cap is applied.
inline double penalty_coefficient(double achieved, double target, int n) {
  if (!(target > 0.0)) throw Error(ErrorKind::DegenerateTarget, "target quality must be > 0");
  if (achieved < 0.0) throw Error(ErrorKind::InvalidArgument, "achieved quality must be >= 0");
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "quality exponent n must be >= 1");
  return std::pow(achieved / target, n);
}

/// Valid FLOPS: throughput scaled by the penalty coefficient.
inline double vflops(double flops, double achieved, double target, int n) {
  if (flops < 0.0) throw Error(ErrorKind::InvalidArgument, "flops must be >= 0");
  return flops * penalty_coefficient(achieved, target, n);
}

inline double vflops_per_watt(double vflops_value, double average_power) {
  if (!(average_power > 0.0)) throw Error(ErrorKind::InvalidPower, "average power must be > 0 W");
  return vflops_value / average_power;
}

/// Inverse of vflops(): the achieved quality implied by a (FLOPS, VFLOPS) pair.
inline double implied_achieved_quality(double flops, double vflops_value, double target, int n) {
  if (!(flops > 0.0)) throw Error(ErrorKind::InvalidArgument, "flops must be > 0");
  if (!(target > 0.0)) throw Error(ErrorKind::DegenerateTarget, "target quality must be > 0");
  return target * std::pow(vflops_value / flops, 1.0 / n);
}

/// Samples per second per rank x ranks x FLOPs per sample.
inline double throughput_flops(double samples_per_sec_per_rank, double num_ranks, double flops_per_sample) {
  if (samples_per_sec_per_rank < 0.0 || num_ranks < 0.0 || flops_per_sample < 0.0) {
    throw Error(ErrorKind::InvalidArgument, "throughput inputs must be >= 0");
  }
  return samples_per_sec_per_rank * num_ranks * flops_per_sample;
}

inline double flops_per_sample_from_profile(double total_flops, double sample_count) {
  if (!(sample_count >= 1.0)) throw Error(ErrorKind::EmptySample, "profile covers no samples");
  return total_flops / sample_count;
}

/// Result of reconciling a profiled FLOPs-per-sample against a declared one.
struct ProfileCheck {
  double computed = 0.0;
  double declared = 0.0;
  double relative_gap = 0.0;  // |computed - declared| / declared
  bool mismatch = false;
};

/// Reports both values; never picks one. `tolerance` is relative.
inline ProfileCheck check_declared_flops_per_sample(double total_flops, double sample_count,
                                                    double declared, double tolerance = 0.05) {
  ProfileCheck c;
  c.computed = flops_per_sample_from_profile(total_flops, sample_count);
  c.declared = declared;
  c.relative_gap = declared > 0.0 ? std::abs(c.computed - declared) / declared : INFINITY;
  c.mismatch = !(c.relative_gap <= tolerance);
  return c;
}

/// Comp/comm ratio in GFLOPs per million parameters.
inline double scaling_ratio(double comp_per_step, double comm_per_step) {
  if (!(comm_per_step > 0.0)) throw Error(ErrorKind::DegenerateComm, "communicated parameters must be > 0");
  return (comp_per_step / 1e9) / (comm_per_step / 1e6);
}

/// Throughput relative to linear scaling from the baseline.
inline double parallel_efficiency(double baseline_throughput, double baseline_scale, double throughput,
                                  double scale) {
  if (!(baseline_throughput > 0.0) || !(baseline_scale > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "baseline throughput and scale must be > 0");
  }
  if (scale < baseline_scale) {
    throw Error(ErrorKind::InvalidScaleOrder, "scale is below the baseline scale");
  }
  return throughput / (baseline_throughput * scale / baseline_scale);
}

// ---------------------------------------------------------------------------
// Per-run score
// ---------------------------------------------------------------------------

struct Score {
  double flops = 0.0;
  double vflops = 0.0;
  std::optional<double> vflops_per_watt;
  std::optional<double> flops_per_watt;
  double time_to_quality = 0.0;
  double penalty = 0.0;
};

/// FLOPS are single-precision-equivalent: reduced-precision operations count
/// one-for-one.
inline Score score_run(const RunRecord& run, const WorkloadSpec& workload) {
  if (run.workload != workload.name) {
    throw Error(ErrorKind::IncomparableWorkloads,
                "run '" + run.run_id + "' is for workload '" + run.workload + "', not '" + workload.name + "'");
  }
  Score s;
  s.flops = throughput_flops(run.samples_per_second_per_rank, run.num_ranks, workload.flops_per_sample);
  s.penalty = penalty_coefficient(run.achieved_quality, workload.target_quality.value, workload.quality_exponent_n);
  s.vflops = s.flops * s.penalty;
  s.time_to_quality = run.wall_time;
  if (run.average_power) {
    s.vflops_per_watt = vflops_per_watt(s.vflops, *run.average_power);
    s.flops_per_watt = s.flops / *run.average_power;
  }
  return s;
}

}  // namespace hpcai::metrics
