#pragma once

// Domain types shared by every module. All quantities are stored in base SI
// units: FLOPs, FLOPS, bytes, bytes/s, seconds, watts.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hpcai/error.hpp"

namespace hpcai {

namespace units {
inline constexpr double kGiga = 1e9;
inline constexpr double kTera = 1e12;
inline constexpr double kMega = 1e6;

/// Link rates are often quoted in bits per second; storage is bytes per second.
constexpr double bits_to_bytes_per_s(double bits_per_s) { return bits_per_s / 8.0; }
constexpr double tflops(double v) { return v * kTera; }
constexpr double gbytes_per_s(double v) { return v * kGiga; }
}  // namespace units

// ---------------------------------------------------------------------------
// Enumerations
// ---------------------------------------------------------------------------

enum class PrecisionMode { FP32, FP16, BF16, MIXED, INT8, INT4 };

inline constexpr std::array<PrecisionMode, 6> kAllPrecisions = {
    PrecisionMode::FP32, PrecisionMode::FP16, PrecisionMode::BF16,
    PrecisionMode::MIXED, PrecisionMode::INT8, PrecisionMode::INT4};

inline std::string_view to_string(PrecisionMode p) {
  switch (p) {
    case PrecisionMode::FP32: return "fp32";
    case PrecisionMode::FP16: return "fp16";
    case PrecisionMode::BF16: return "bf16";
    case PrecisionMode::MIXED: return "mixed";
    case PrecisionMode::INT8: return "int8";
    case PrecisionMode::INT4: return "int4";
  }
  return "?";
}

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

inline std::optional<PrecisionMode> parse_precision(std::string_view text) {
  const std::string t = to_lower(text);
  for (auto p : kAllPrecisions) {
    if (t == to_string(p)) return p;
  }
  return std::nullopt;
}

enum class BenchLevel { HARDWARE, SYSTEM, FREE };

inline std::string_view to_string(BenchLevel l) {
  switch (l) {
    case BenchLevel::HARDWARE: return "hardware";
    case BenchLevel::SYSTEM: return "system";
    case BenchLevel::FREE: return "free";
  }
  return "?";
}

inline std::optional<BenchLevel> parse_level(std::string_view text) {
  const std::string t = to_lower(text);
  if (t == "hardware") return BenchLevel::HARDWARE;
  if (t == "system") return BenchLevel::SYSTEM;
  if (t == "free") return BenchLevel::FREE;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Hardware description
// ---------------------------------------------------------------------------

struct AcceleratorSpec {
  std::string name;
  std::map<PrecisionMode, double> peak_flops;  // FLOPS per accelerator
  double memory_bandwidth = 0.0;               // bytes/s
  double memory_capacity = 0.0;                // bytes

  bool operator==(const AcceleratorSpec&) const = default;
};

struct NodeSpec {
  int accelerators_per_node = 1;
  AcceleratorSpec accelerator;
  double intra_node_bandwidth = 0.0;  // accelerator interconnect, bytes/s
  double system_memory = 0.0;         // bytes
  double storage = 0.0;               // bytes

  bool operator==(const NodeSpec&) const = default;
};

struct SystemConfig {
  std::string name;
  int num_nodes = 1;
  NodeSpec node;
  double inter_node_bandwidth_nominal = 0.0;    // bytes/s
  double inter_node_bandwidth_effective = 0.0;  // bytes/s, <= nominal

  [[nodiscard]] int total_accelerators() const { return num_nodes * node.accelerators_per_node; }

  bool operator==(const SystemConfig&) const = default;
};

// ---------------------------------------------------------------------------
// Workload description
// ---------------------------------------------------------------------------

struct TargetQuality {
  std::string metric_name;
  double value = 0.0;  // fraction in (0, 1]

  bool operator==(const TargetQuality&) const = default;
};

struct WorkloadSpec {
  std::string name;
  double flops_per_sample = 0.0;  // FLOPs (work, not a rate)
  double params_count = 0.0;
  double bytes_per_param = 4.0;
  double comp_per_step = 0.0;  // FLOPs per step per rank
  double comm_per_step = 0.0;  // parameters exchanged per step
  TargetQuality target_quality;
  int quality_exponent_n = 1;
  int epochs = 1;
  double dataset_samples = 0.0;
  int min_runs = 1;

  bool operator==(const WorkloadSpec&) const = default;
};

// ---------------------------------------------------------------------------
// Nine-layer declaration
// ---------------------------------------------------------------------------

/// Index of each layer, 1-based to match how the layers are numbered in
/// submissions and violation reports.
enum class Layer : int {
  Hardware = 1,
  OS = 2,
  CommunicationLibraries = 3,
  AcceleratorLibraries = 4,
  AIFramework = 5,
  ProgrammingModel = 6,
  Workload = 7,
  HyperParameters = 8,
  ProblemDomain = 9,
};

inline constexpr int kLayerCount = 9;

/// JSON key of each layer, indexed by layer number - 1.
inline constexpr std::array<std::string_view, kLayerCount> kLayerKeys = {
    "hardware",          "os",       "communication_libraries",
    "accelerator_libraries", "ai_framework", "programming_model",
    "workload",          "hyper_parameters", "problem_domain"};

using LayerMap = std::map<std::string, std::string>;

struct NineLayerDeclaration {
  std::array<LayerMap, kLayerCount> layers;

  LayerMap& operator[](Layer l) { return layers[static_cast<int>(l) - 1]; }
  const LayerMap& operator[](Layer l) const { return layers[static_cast<int>(l) - 1]; }
  const LayerMap& layer(int index) const { return layers.at(static_cast<std::size_t>(index - 1)); }

  [[nodiscard]] std::optional<std::string> get(Layer l, const std::string& key) const {
    const auto& m = (*this)[l];
    if (auto it = m.find(key); it != m.end()) return it->second;
    return std::nullopt;
  }

  bool operator==(const NineLayerDeclaration&) const = default;
};

// ---------------------------------------------------------------------------
// Run record
// ---------------------------------------------------------------------------

struct RunRecord {
  std::string run_id;
  std::string workload;  // WorkloadSpec::name
  std::string system;    // SystemConfig::name
  int scale = 1;         // accelerators used
  PrecisionMode precision = PrecisionMode::FP32;
  int global_batchsize = 1;
  double achieved_quality = 0.0;
  double wall_time = 0.0;  // seconds, time-to-quality
  double epochs_to_quality = 0.0;
  double samples_per_second_per_rank = 0.0;
  int num_ranks = 1;
  std::optional<double> average_power;  // watts
  BenchLevel level = BenchLevel::HARDWARE;
  NineLayerDeclaration declaration;

  bool operator==(const RunRecord&) const = default;
};

// ---------------------------------------------------------------------------
// Invariant checks. Each throws Error(SchemaError) naming the offending field.
// ---------------------------------------------------------------------------

namespace detail {
inline void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::SchemaError, what);
}
inline bool positive(double v) { return std::isfinite(v) && v > 0.0; }
}  // namespace detail

inline void validate(const AcceleratorSpec& a) {
  using detail::require;
  require(!a.peak_flops.empty() && a.peak_flops.count(PrecisionMode::FP32) == 1,
          "accelerator '" + a.name + "': peak_flops must contain fp32");
  for (const auto& [mode, rate] : a.peak_flops) {
    require(detail::positive(rate), "accelerator '" + a.name + "': peak_flops." +
                                        std::string(to_string(mode)) + " must be > 0");
  }
  require(detail::positive(a.memory_bandwidth), "accelerator '" + a.name + "': memory_bandwidth must be > 0");
  require(detail::positive(a.memory_capacity), "accelerator '" + a.name + "': memory_capacity must be > 0");
}

inline void validate(const NodeSpec& n) {
  detail::require(n.accelerators_per_node >= 1, "node: accelerators_per_node must be >= 1");
  detail::require(detail::positive(n.intra_node_bandwidth), "node: intra_node_bandwidth must be > 0");
  detail::require(n.system_memory >= 0.0 && n.storage >= 0.0, "node: memory and storage must be >= 0");
  validate(n.accelerator);
}

inline void validate(const SystemConfig& s) {
  using detail::require;
  require(s.num_nodes >= 1, "system '" + s.name + "': num_nodes must be >= 1");
  validate(s.node);
  require(detail::positive(s.inter_node_bandwidth_nominal),
          "system '" + s.name + "': inter_node_bandwidth_nominal must be > 0");
  require(detail::positive(s.inter_node_bandwidth_effective),
          "system '" + s.name + "': inter_node_bandwidth_effective must be > 0");
  require(s.inter_node_bandwidth_effective <= s.inter_node_bandwidth_nominal,
          "system '" + s.name + "': effective inter-node bandwidth exceeds nominal");
}

inline void validate(const WorkloadSpec& w) {
  using detail::require;
  const std::string p = "workload '" + w.name + "': ";
  require(!w.name.empty(), "workload: name must not be empty");
  require(detail::positive(w.flops_per_sample), p + "flops_per_sample must be > 0");
  require(w.params_count >= 0.0 && w.comp_per_step >= 0.0 && w.comm_per_step >= 0.0,
          p + "parameter and per-step counts must be >= 0");
  require(detail::positive(w.bytes_per_param), p + "bytes_per_param must be > 0");
  require(w.target_quality.value > 0.0 && w.target_quality.value <= 1.0,
          p + "target_quality.value must be a fraction in (0, 1]");
  require(w.quality_exponent_n >= 1, p + "quality_exponent_n must be >= 1");
  require(w.epochs >= 1, p + "epochs must be >= 1");
  require(w.dataset_samples >= 0.0, p + "dataset_samples must be >= 0");
  require(w.min_runs >= 1, p + "min_runs must be >= 1");
}

inline void validate(const NineLayerDeclaration& d) {
  const auto& pm = d[Layer::ProgrammingModel];
  detail::require(pm.count("sync_mode") == 1, "declaration: programming_model.sync_mode is required");
  detail::require(pm.count("parallel_mode") == 1,
                  "declaration: programming_model.parallel_mode is required");
}

inline void validate(const RunRecord& r) {
  using detail::require;
  const std::string p = "run '" + r.run_id + "': ";
  require(!r.run_id.empty(), "run: run_id must not be empty");
  require(!r.workload.empty(), p + "workload must not be empty");
  require(std::isfinite(r.wall_time) && r.wall_time > 0.0, p + "wall_time must be > 0");
  require(r.achieved_quality >= 0.0 && r.achieved_quality <= 1.0,
          p + "achieved_quality must be a fraction in [0, 1]");
  require(r.scale >= 1 && r.num_ranks >= 1, p + "scale and num_ranks must be >= 1");
  require(r.global_batchsize >= 1, p + "global_batchsize must be >= 1");
  require(r.epochs_to_quality >= 0.0, p + "epochs_to_quality must be >= 0");
  require(r.samples_per_second_per_rank >= 0.0, p + "samples_per_second_per_rank must be >= 0");
  if (r.average_power) require(*r.average_power > 0.0, p + "average_power must be > 0 when present");
  validate(r.declaration);
}

/// Cross-checks a run against the system it claims to have used.
inline void validate(const RunRecord& r, const SystemConfig& s) {
  validate(r);
  detail::require(r.system == s.name,
                  "run '" + r.run_id + "': declares system '" + r.system + "' but '" + s.name + "' was supplied");
  detail::require(r.scale <= s.total_accelerators(),
                  "run '" + r.run_id + "': scale " + std::to_string(r.scale) + " exceeds the " +
                      std::to_string(s.total_accelerators()) + " accelerators of system '" + s.name + "'");
}

// ---------------------------------------------------------------------------
// Derived peaks
// ---------------------------------------------------------------------------

struct Peaks {
  double single_node = 0.0;  // FLOPS
  double distributed = 0.0;  // FLOPS
};

inline double accelerator_peak(const AcceleratorSpec& a, PrecisionMode precision) {
  auto it = a.peak_flops.find(precision);
  if (it == a.peak_flops.end()) {
    throw Error(ErrorKind::MissingPrecision,
                "accelerator '" + a.name + "' declares no peak for " + std::string(to_string(precision)));
  }
  return it->second;
}

inline Peaks derive_peaks(const SystemConfig& system, PrecisionMode precision) {
  const double per_accel = accelerator_peak(system.node.accelerator, precision);
  const double node = per_accel * system.node.accelerators_per_node;
  return {node, node * system.num_nodes};
}

}  // namespace hpcai
