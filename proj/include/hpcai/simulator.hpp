#pragma once

// First-order analytical model of synchronous data-parallel training: per-rank
// compute, one gradient allreduce per step, partial compute/communication
// overlap, and a Horovod-style phase breakdown of the communication time.
// Achieved quality is always declared by the caller, never modelled.

#include <algorithm>
#include <cstdint>
#include <future>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hpcai/collective.hpp"
#include "hpcai/core.hpp"
#include "hpcai/json_io.hpp"
#include "hpcai/metrics.hpp"
#include "hpcai/roofline.hpp"

namespace hpcai::sim {

struct OverlapModel {
  double alpha = 0.0;  // 1 = communication fully hidden behind compute
};

/// alpha * max(c, m) + (1 - alpha) * (c + m)
inline double step_time(double compute, double comm, const OverlapModel& overlap) {
  if (compute < 0.0 || comm < 0.0) throw Error(ErrorKind::InvalidArgument, "step components must be >= 0");
  if (!(overlap.alpha >= 0.0 && overlap.alpha <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "overlap alpha must be in [0, 1]");
  }
  return overlap.alpha * std::max(compute, comm) + (1.0 - overlap.alpha) * (compute + comm);
}

struct PhaseTimeline {
  double negotiation = 0.0;
  double wait_for_data = 0.0;
  double wait_for_other_data = 0.0;
  double queuing = 0.0;
  double memcpy_in = 0.0;
  double allreduce = 0.0;
  double memcpy_out = 0.0;

  /// Communication wall time of the step.
  [[nodiscard]] double total() const {
    return negotiation + wait_for_data + wait_for_other_data + queuing + memcpy_in + allreduce + memcpy_out;
  }
};

/// Raw per-step quantities a phase breakdown is derived from.
struct StepInternals {
  int participants = 1;
  double compute = 0.0;        // seconds
  double negotiation = 0.0;    // seconds, summed over tensors
  double straggler_lag = 0.0;  // seconds, mean wait for the slowest rank, summed over tensors
  double memcpy_in = 0.0;
  double allreduce = 0.0;
  double memcpy_out = 0.0;
  double message_bytes = 0.0;

  /// Communication that occupies the network or copy engines.
  [[nodiscard]] double active_comm() const { return negotiation + memcpy_in + allreduce + memcpy_out; }
};

/// Idle phases only exist for the non-overlapped share (1 - alpha):
/// waiting on local gradients when compute dominates, queuing behind the
/// previous allreduce when the allreduce dominates, and waiting on stragglers.
inline PhaseTimeline phase_breakdown(const StepInternals& s, const OverlapModel& overlap) {
  const double idle = 1.0 - overlap.alpha;
  PhaseTimeline t;
  t.negotiation = s.negotiation;
  t.memcpy_in = s.memcpy_in;
  t.allreduce = s.allreduce;
  t.memcpy_out = s.memcpy_out;
  if (s.participants > 1) {
    t.wait_for_data = idle * std::max(0.0, s.compute - s.active_comm());
    t.wait_for_other_data = idle * s.straggler_lag;
    t.queuing = idle * std::max(0.0, s.allreduce - s.compute);
  }
  return t;
}

inline json to_json(const PhaseTimeline& t) {
  return {{"negotiation", t.negotiation}, {"wait_for_data", t.wait_for_data},
          {"wait_for_other_data", t.wait_for_other_data}, {"queuing", t.queuing},
          {"memcpy_in", t.memcpy_in}, {"allreduce", t.allreduce},
          {"memcpy_out", t.memcpy_out}, {"total", t.total()}};
}

// ---------------------------------------------------------------------------
// Training simulation
// ---------------------------------------------------------------------------

struct SimOptions {
  double compress_factor = 1.0;     // gradient bytes divided by this
  double compute_efficiency = 1.0;  // achieved / peak kernel FLOPS
  std::optional<double> achieved_quality;
  int baseline_scale = 1;
  double negotiation_skew = 0.0;  // seconds; rank readiness ~ U[0, skew)
  int tensors_per_step = 1;       // allreduce negotiations per step
  std::uint64_t skew_seed = 0;
  std::optional<double> average_power;  // watts, passed through to the run
  std::string run_id;
  BenchLevel level = BenchLevel::HARDWARE;
  std::optional<NineLayerDeclaration> declaration;
};

struct SimResult {
  RunRecord run;
  double throughput = 0.0;  // FLOPS
  double efficiency = 1.0;
  double step_seconds = 0.0;
  StepInternals step;
  PhaseTimeline timeline;
  roofline::RooflinePoint point;
};

/// Intra-node interconnect while the job fits in one node, inter-node
/// effective bandwidth otherwise.
inline double binding_bandwidth(const SystemConfig& system, int scale) {
  return scale <= system.node.accelerators_per_node ? system.node.intra_node_bandwidth
                                                    : system.inter_node_bandwidth_effective;
}

inline void check_scale(const SystemConfig& system, int scale) {
  if (scale < 1 || scale > system.total_accelerators()) {
    throw Error(ErrorKind::InvalidArgument, "scale " + std::to_string(scale) + " does not fit system '" +
                                                system.name + "'");
  }
  if (scale > system.node.accelerators_per_node && scale % system.node.accelerators_per_node != 0) {
    throw Error(ErrorKind::InvalidArgument,
                "multi-node scale " + std::to_string(scale) + " must fill whole nodes of " +
                    std::to_string(system.node.accelerators_per_node));
  }
}

/// Readiness skew: for each tensor, every rank becomes ready at a uniform
/// offset in [0, skew); negotiation waits for the last one. Each rank draws
/// from its own stream, so a larger job sees a superset of a smaller job's
/// offsets and negotiation never shrinks as ranks are added.
inline std::pair<double, double> sample_negotiation(int participants, int tensors, double skew, std::uint64_t seed) {
  if (participants <= 1 || skew <= 0.0) return {0.0, 0.0};
  const auto n = static_cast<std::size_t>(tensors);
  std::vector<double> last(n, 0.0), sum(n, 0.0);
  for (int rank = 0; rank < participants; ++rank) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(rank)};
    std::mt19937_64 rng(seq);
    for (std::size_t t = 0; t < n; ++t) {
      const double offset = static_cast<double>(rng() >> 11) * 0x1.0p-53 * skew;
      last[t] = std::max(last[t], offset);
      sum[t] += offset;
    }
  }
  double negotiation = 0.0, lag = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    negotiation += last[t];
    lag += last[t] - sum[t] / participants;
  }
  return {negotiation, lag};
}

inline StepInternals model_step(const SystemConfig& system, const WorkloadSpec& workload, int scale,
                                double per_rank_batch, PrecisionMode precision, const TopologySpec& topology,
                                const SimOptions& options) {
  check_scale(system, scale);
  if (!(options.compute_efficiency > 0.0 && options.compute_efficiency <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "compute_efficiency must be in (0, 1]");
  }
  if (!(options.compress_factor >= 1.0)) throw Error(ErrorKind::InvalidArgument, "compress_factor must be >= 1");
  if (options.tensors_per_step < 1) throw Error(ErrorKind::InvalidArgument, "tensors_per_step must be >= 1");
  if (options.negotiation_skew < 0.0) throw Error(ErrorKind::InvalidArgument, "negotiation_skew must be >= 0");

  StepInternals s;
  s.participants = scale;
  const double peak = accelerator_peak(system.node.accelerator, precision);
  s.compute = workload.flops_per_sample * per_rank_batch / (peak * options.compute_efficiency);
  s.message_bytes = workload.params_count * workload.bytes_per_param / options.compress_factor;
  if (scale > 1) {
    s.allreduce = allreduce_time(s.message_bytes, scale, topology, binding_bandwidth(system, scale));
    s.memcpy_in = s.message_bytes / system.node.accelerator.memory_bandwidth;
    s.memcpy_out = s.memcpy_in;
    std::tie(s.negotiation, s.straggler_lag) =
        sample_negotiation(scale, options.tensors_per_step, options.negotiation_skew, options.skew_seed);
  }
  return s;
}

/// A declaration for synthetic runs when the scenario supplies none.
inline NineLayerDeclaration synthetic_declaration(const WorkloadSpec& workload, int global_batchsize,
                                                  const TopologySpec& topology) {
  NineLayerDeclaration d;
  d[Layer::CommunicationLibraries]["allreduce_topology"] = std::string(to_string(topology.kind));
  d[Layer::ProgrammingModel]["parallel_mode"] = "data";
  d[Layer::ProgrammingModel]["sync_mode"] = "synchronous";
  d[Layer::Workload]["workload"] = workload.name;
  d[Layer::HyperParameters]["batchsize"] = std::to_string(global_batchsize);
  std::ostringstream tq;
  tq << workload.target_quality.value;
  d[Layer::ProblemDomain]["target_quality"] = tq.str();
  d[Layer::ProblemDomain]["epochs"] = std::to_string(workload.epochs);
  return d;
}

inline SimResult simulate_training(const SystemConfig& system, const WorkloadSpec& workload, int scale,
                                   int global_batchsize, PrecisionMode precision, const TopologySpec& topology,
                                   const OverlapModel& overlap, const SimOptions& options) {
  if (global_batchsize < 1 || scale < 1 || global_batchsize % scale != 0) {
    throw Error(ErrorKind::BatchShardError, "global batch " + std::to_string(global_batchsize) +
                                                " does not shard evenly over " + std::to_string(scale) + " ranks");
  }
  if (!options.achieved_quality) {
    throw Error(ErrorKind::InvalidArgument, "scenario must declare achieved_quality; it is never synthesized");
  }
  if (!(workload.dataset_samples > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "workload '" + workload.name + "' declares no dataset samples");
  }
  const double per_rank_batch = static_cast<double>(global_batchsize / scale);

  SimResult r;
  r.step = model_step(system, workload, scale, per_rank_batch, precision, topology, options);
  r.step_seconds = step_time(r.step.compute, r.step.active_comm(), overlap);
  r.timeline = phase_breakdown(r.step, overlap);
  const double samples_per_rank = per_rank_batch / r.step_seconds;
  r.throughput = metrics::throughput_flops(samples_per_rank, scale, workload.flops_per_sample);

  const StepInternals base = model_step(system, workload, options.baseline_scale, per_rank_batch, precision, topology,
                                        options);
  const double base_step = step_time(base.compute, base.active_comm(), overlap);
  const double base_throughput =
      metrics::throughput_flops(per_rank_batch / base_step, options.baseline_scale, workload.flops_per_sample);
  r.efficiency = metrics::parallel_efficiency(base_throughput, options.baseline_scale, r.throughput, scale);

  RunRecord& run = r.run;
  run.run_id = options.run_id.empty()
                   ? workload.name + "-" + std::string(to_string(precision)) + "-" + std::to_string(scale)
                   : options.run_id;
  run.workload = workload.name;
  run.system = system.name;
  run.scale = scale;
  run.num_ranks = scale;
  run.precision = precision;
  run.global_batchsize = global_batchsize;
  run.achieved_quality = *options.achieved_quality;
  run.epochs_to_quality = workload.epochs;
  run.samples_per_second_per_rank = samples_per_rank;
  const double steps = workload.epochs * workload.dataset_samples / global_batchsize;
  run.wall_time = steps * r.step_seconds;
  run.average_power = options.average_power;
  run.level = options.level;
  run.declaration = options.declaration ? *options.declaration
                                        : synthetic_declaration(workload, global_batchsize, topology);

  const double traffic = allreduce_traffic(r.step.message_bytes, scale, topology).total;
  r.point = roofline::make_point(run.run_id, workload.flops_per_sample * per_rank_batch * scale, traffic, r.throughput);
  r.point.precision = precision;
  return r;
}

/// The roofline consistent with the simulator's cost model: every participant
/// injects its share concurrently, so the slant is scale x binding bandwidth.
inline roofline::RooflineModel matching_model(const SystemConfig& system, int scale, PrecisionMode precision) {
  check_scale(system, scale);
  roofline::RooflineModel m;
  m.mode = scale <= system.node.accelerators_per_node ? roofline::Mode::SINGLE_NODE : roofline::Mode::DISTRIBUTED;
  m.precision = precision;
  m.peak_flops = scale * accelerator_peak(system.node.accelerator, precision);
  m.peak_band = scale * binding_bandwidth(system, scale);
  return m;
}

// ---------------------------------------------------------------------------
// Scenario files: {system, workload, sweep: [scale...], options}
// ---------------------------------------------------------------------------

struct Scenario {
  SystemConfig system;
  WorkloadSpec workload;
  std::vector<int> sweep;
  PrecisionMode precision = PrecisionMode::FP32;
  std::optional<int> global_batchsize;  // fixed across the sweep, or
  std::optional<int> per_rank_batch;    // scaled with each point
  TopologySpec topology;
  OverlapModel overlap;
  SimOptions options;
};

struct SweepPoint {
  int scale = 0;
  SimResult result;
};

inline Scenario parse_scenario(const json& j, ParseOptions opts = {}, const std::string& base_dir = ".") {
  hpcai::detail::ObjectReader r(j, "scenario", opts);
  auto load = [&](std::string_view key) -> json {
    const json& v = r.at(key);
    if (v.is_string()) return read_json_file(base_dir + "/" + v.get<std::string>());
    return v;
  };
  Scenario s;
  s.system = parse_system(load("system"), opts);
  s.workload = parse_workload(load("workload"), opts);
  const json& sweep = r.at("sweep");
  if (!sweep.is_array() || sweep.empty()) throw Error(ErrorKind::SchemaError, "scenario.sweep: expected scales");
  for (const auto& v : sweep) {
    if (!v.is_number_integer()) throw Error(ErrorKind::SchemaError, "scenario.sweep: scales must be integers");
    s.sweep.push_back(v.get<int>());
  }

  hpcai::detail::ObjectReader o(r.at("options"), "scenario.options", opts);
  const std::string prec = o.string_or("precision", "fp32");
  auto p = parse_precision(prec);
  if (!p) throw Error(ErrorKind::SchemaError, "scenario.options.precision: unknown '" + prec + "'");
  s.precision = *p;
  if (o.has("global_batchsize")) s.global_batchsize = o.integer("global_batchsize");
  if (o.has("per_rank_batch")) s.per_rank_batch = o.integer("per_rank_batch");
  if (s.global_batchsize.has_value() == s.per_rank_batch.has_value()) {
    throw Error(ErrorKind::SchemaError, "scenario.options: give exactly one of global_batchsize, per_rank_batch");
  }
  if (o.has("topology")) {
    hpcai::detail::ObjectReader t(o.at("topology"), "scenario.options.topology", opts);
    const std::string kind = t.string("kind");
    auto k = parse_topology(kind);
    if (!k) throw Error(ErrorKind::SchemaError, "scenario.options.topology.kind: unknown '" + kind + "'");
    s.topology.kind = *k;
    s.topology.per_message_latency = t.number_or("per_message_latency", 0.0);
    s.topology.groups = t.has("groups") ? t.integer("groups") : 1;
    t.finish();
  }
  s.overlap.alpha = o.number_or("overlap_alpha", 0.0);
  auto& so = s.options;
  so.compress_factor = o.number_or("compress_factor", 1.0);
  so.compute_efficiency = o.number_or("compute_efficiency", 1.0);
  so.achieved_quality = o.optional_number("achieved_quality");
  so.baseline_scale = o.has("baseline_scale") ? o.integer("baseline_scale") : 1;
  so.negotiation_skew = o.number_or("negotiation_skew", 0.0);
  so.tensors_per_step = o.has("tensors_per_step") ? o.integer("tensors_per_step") : 1;
  so.skew_seed = o.has("skew_seed") ? static_cast<std::uint64_t>(o.at("skew_seed").get<std::int64_t>()) : 0;
  so.average_power = o.optional_number("average_power");
  const std::string lvl = o.string_or("level", "hardware");
  auto level = parse_level(lvl);
  if (!level) throw Error(ErrorKind::SchemaError, "scenario.options.level: unknown '" + lvl + "'");
  so.level = *level;
  if (o.has("declaration")) so.declaration = parse_declaration(o.at("declaration"), opts, "scenario.options.declaration");
  o.finish();
  r.finish();
  return s;
}

/// Each scale is an independent pure computation; results come back sorted by
/// scale regardless of completion order.
inline std::vector<SweepPoint> run_sweep(const Scenario& s) {
  std::vector<std::future<SweepPoint>> jobs;
  for (int scale : s.sweep) {
    jobs.push_back(std::async(std::launch::async, [&s, scale] {
      const int gb = s.global_batchsize ? *s.global_batchsize : *s.per_rank_batch * scale;
      SimOptions opts = s.options;
      if (!opts.run_id.empty()) opts.run_id += "-" + std::to_string(scale);
      return SweepPoint{scale, simulate_training(s.system, s.workload, scale, gb, s.precision, s.topology, s.overlap,
                                                 opts)};
    }));
  }
  std::vector<SweepPoint> out;
  for (auto& j : jobs) out.push_back(j.get());
  std::sort(out.begin(), out.end(), [](const SweepPoint& a, const SweepPoint& b) { return a.scale < b.scale; });
  return out;
}

/// Header: scale,throughput_flops,efficiency
inline std::string sweep_csv(const std::vector<SweepPoint>& points) {
  std::ostringstream out;
  out << "scale,throughput_flops,efficiency\n";
  out.precision(12);
  for (const auto& p : points) out << p.scale << "," << p.result.throughput << "," << p.result.efficiency << "\n";
  return out.str();
}

}  // namespace hpcai::sim
