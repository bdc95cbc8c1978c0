#pragma once

// Single-node and distributed rooflines over communication operation
// intensity (COI = FLOPs per byte of inter-accelerator traffic).
//
//   attained = min(compute roof, bandwidth * COI)
//
// A model carries its theoretical peaks plus measured ceilings. Ceilings are
// opaque inputs: their gap to peak depends on kernel shapes and is never
// synthesized here.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hpcai/collective.hpp"
#include "hpcai/core.hpp"
#include "hpcai/json_io.hpp"
#include "hpcai/metrics.hpp"

namespace hpcai::roofline {

/// Selects the theoretical peak instead of a named ceiling.
inline constexpr std::string_view kPeak = "PEAK";

/// COI of a point that moves no bytes. It sits on the flat roof.
inline constexpr double kInfiniteCoi = std::numeric_limits<double>::infinity();

enum class CeilingKind { COMPUTATION, COMMUNICATION };
enum class Mode { SINGLE_NODE, DISTRIBUTED };
enum class Bound { COMPUTE_BOUND, COMMUNICATION_BOUND };

inline std::string_view to_string(CeilingKind k) {
  return k == CeilingKind::COMPUTATION ? "computation" : "communication";
}
inline std::string_view to_string(Mode m) { return m == Mode::SINGLE_NODE ? "single_node" : "distributed"; }
inline std::string_view to_string(Bound b) {
  return b == Bound::COMPUTE_BOUND ? "compute_bound" : "communication_bound";
}

inline std::optional<Mode> parse_mode(std::string_view text) {
  const std::string t = to_lower(text);
  if (t == "single_node" || t == "single") return Mode::SINGLE_NODE;
  if (t == "distributed") return Mode::DISTRIBUTED;
  return std::nullopt;
}

struct Ceiling {
  std::string name;
  CeilingKind kind = CeilingKind::COMPUTATION;
  double value = 0.0;  // FLOPS or bytes/s depending on kind
  std::optional<PrecisionMode> precision;  // computation ceilings only

  bool operator==(const Ceiling&) const = default;
};

struct RooflineModel {
  Mode mode = Mode::SINGLE_NODE;
  PrecisionMode precision = PrecisionMode::FP32;
  double peak_flops = 0.0;  // FLOPS
  double peak_band = 0.0;   // bytes/s
  std::vector<Ceiling> ceilings;  // computation first, each kind descending

  [[nodiscard]] const Ceiling* find(std::string_view name) const {
    for (const auto& c : ceilings) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }

  [[nodiscard]] bool empty() const { return !(peak_flops > 0.0) || !(peak_band > 0.0); }
};

struct RooflinePoint {
  std::string label;
  double flops_total = 0.0;   // FLOPs per step, all accelerators
  double comm_traffic = 0.0;  // bytes per step, all accelerators
  double coi = 0.0;           // FLOPs/byte
  std::optional<double> attained;  // measured FLOPS
  std::optional<PrecisionMode> precision;
};

// ---------------------------------------------------------------------------
// Core formulas
// ---------------------------------------------------------------------------

inline double coi(double flops_total, double comm_traffic) {
  if (flops_total < 0.0 || comm_traffic < 0.0) {
    throw Error(ErrorKind::InvalidArgument, "FLOPs and traffic must be >= 0");
  }
  if (comm_traffic == 0.0) return kInfiniteCoi;
  return flops_total / comm_traffic;
}

inline double ridge_point(double peak_flops, double peak_band) {
  if (!(peak_band > 0.0)) throw Error(ErrorKind::DegenerateBand, "bandwidth must be > 0");
  return peak_flops / peak_band;
}

inline double ridge_point(const RooflineModel& m) { return ridge_point(m.peak_flops, m.peak_band); }

namespace detail {
inline double select(const RooflineModel& m, std::string_view name, CeilingKind kind) {
  if (name == kPeak) return kind == CeilingKind::COMPUTATION ? m.peak_flops : m.peak_band;
  const Ceiling* c = m.find(name);
  if (c == nullptr) throw Error(ErrorKind::UnknownCeiling, "no ceiling named '" + std::string(name) + "'");
  if (c->kind != kind) {
    throw Error(ErrorKind::UnknownCeiling, "ceiling '" + c->name + "' is a " + std::string(to_string(c->kind)) +
                                               " ceiling, not " + std::string(to_string(kind)));
  }
  return c->value;
}
}  // namespace detail

/// min(compute ceiling, communication ceiling * coi).
inline double attained_bound(const RooflineModel& model, double coi_value,
                             std::string_view compute_ceiling = kPeak, std::string_view comm_ceiling = kPeak) {
  if (coi_value < 0.0 || std::isnan(coi_value)) throw Error(ErrorKind::InvalidArgument, "COI must be >= 0");
  const double flat = detail::select(model, compute_ceiling, CeilingKind::COMPUTATION);
  const double band = detail::select(model, comm_ceiling, CeilingKind::COMMUNICATION);
  if (std::isinf(coi_value)) return flat;
  return std::min(flat, band * coi_value);
}

/// Classification against the ridge of the selected ceiling pair. A point
/// exactly on the ridge is compute-bound.
inline Bound classify_under(const RooflineModel& model, const RooflinePoint& point,
                            std::string_view compute_ceiling, std::string_view comm_ceiling) {
  const double flat = detail::select(model, compute_ceiling, CeilingKind::COMPUTATION);
  const double band = detail::select(model, comm_ceiling, CeilingKind::COMMUNICATION);
  return point.coi < ridge_point(flat, band) ? Bound::COMMUNICATION_BOUND : Bound::COMPUTE_BOUND;
}

inline Bound classify(const RooflineModel& model, const RooflinePoint& point) {
  return classify_under(model, point, kPeak, kPeak);
}

// ---------------------------------------------------------------------------
// Model construction
// ---------------------------------------------------------------------------

/// SINGLE_NODE: accelerator interconnect vs. node peak.
/// DISTRIBUTED: effective inter-node bandwidth vs. system peak.
/// Computation ceilings must not exceed the peak; communication ceilings may
/// (memory bandwidth above the interconnect, NVLink above Ethernet).
inline RooflineModel build_model(const SystemConfig& system, Mode mode, PrecisionMode precision,
                                 std::vector<Ceiling> ceilings = {}) {
  const Peaks peaks = derive_peaks(system, precision);
  RooflineModel m;
  m.mode = mode;
  m.precision = precision;
  if (mode == Mode::SINGLE_NODE) {
    m.peak_flops = peaks.single_node;
    m.peak_band = system.node.intra_node_bandwidth;
  } else {
    m.peak_flops = peaks.distributed;
    m.peak_band = system.inter_node_bandwidth_effective;
  }
  std::set<std::string> names;
  for (const auto& c : ceilings) {
    if (c.name.empty() || c.name == kPeak) throw Error(ErrorKind::InvalidArgument, "invalid ceiling name '" + c.name + "'");
    if (!names.insert(c.name).second) throw Error(ErrorKind::InvalidArgument, "duplicate ceiling '" + c.name + "'");
    if (!(c.value > 0.0)) throw Error(ErrorKind::InvalidArgument, "ceiling '" + c.name + "' must be > 0");
    if (c.kind == CeilingKind::COMPUTATION && c.value > m.peak_flops) {
      throw Error(ErrorKind::CeilingAbovePeak, "ceiling '" + c.name + "' exceeds the peak of the model");
    }
  }
  std::stable_sort(ceilings.begin(), ceilings.end(), [](const Ceiling& a, const Ceiling& b) {
    if (a.kind != b.kind) return a.kind == CeilingKind::COMPUTATION;
    return a.value > b.value;
  });
  m.ceilings = std::move(ceilings);
  return m;
}

// ---------------------------------------------------------------------------
// Points
// ---------------------------------------------------------------------------

inline RooflinePoint make_point(std::string label, double flops_total, double comm_traffic,
                                std::optional<double> attained = std::nullopt) {
  RooflinePoint p;
  p.label = std::move(label);
  p.flops_total = flops_total;
  p.comm_traffic = comm_traffic;
  p.coi = coi(flops_total, comm_traffic);
  p.attained = attained;
  return p;
}

/// Places a run: FLOPs per step summed over ranks, traffic is the allreduce
/// total of one gradient exchange, attained is the run's measured throughput.
inline RooflinePoint place_run(const RunRecord& run, const WorkloadSpec& workload, const sim::TopologySpec& topology) {
  if (!(workload.comp_per_step > 0.0)) {
    throw Error(ErrorKind::IncompletePoint, "workload '" + workload.name + "' has no per-step computation");
  }
  if (run.num_ranks > 1 && !(workload.comm_per_step > 0.0)) {
    throw Error(ErrorKind::IncompletePoint, "workload '" + workload.name + "' has no per-step communication");
  }
  const double flops = workload.comp_per_step * run.num_ranks;
  const double message = workload.comm_per_step * workload.bytes_per_param;
  const double traffic = sim::allreduce_traffic(message, run.num_ranks, topology).total;
  std::optional<double> attained;
  if (run.samples_per_second_per_rank > 0.0) {
    attained = metrics::throughput_flops(run.samples_per_second_per_rank, run.num_ranks, workload.flops_per_sample);
  }
  RooflinePoint p = make_point(run.run_id, flops, traffic, attained);
  p.precision = run.precision;
  return p;
}

// ---------------------------------------------------------------------------
// What-if transforms
// ---------------------------------------------------------------------------

/// Divides the bytes moved per step by `factor` (e.g. FP16 gradient exchange).
struct Compress {
  double factor = 2.0;
};

/// Switches arithmetic precision and grows the per-step batch by `batch_scale`;
/// traffic per step is unchanged, so COI grows by the same factor.
struct PrecisionChange {
  PrecisionMode mode = PrecisionMode::MIXED;
  double batch_scale = 1.0;
};

using Transform = std::variant<Compress, PrecisionChange>;

inline RooflinePoint apply_whatif(const RooflineModel& model, const RooflinePoint& point, const Transform& transform) {
  RooflinePoint out = point;
  if (const auto* c = std::get_if<Compress>(&transform)) {
    if (!(c->factor > 1.0)) throw Error(ErrorKind::InvalidTransform, "compression factor must be > 1");
    out.comm_traffic = point.comm_traffic / c->factor;
    out.coi = point.coi * c->factor;
    out.attained.reset();
    out.label = point.label + "+compress";
    return out;
  }
  const auto& pc = std::get<PrecisionChange>(transform);
  if (!(pc.batch_scale > 0.0)) throw Error(ErrorKind::InvalidTransform, "batch scale must be > 0");
  const bool known = model.precision == pc.mode ||
                     std::any_of(model.ceilings.begin(), model.ceilings.end(), [&](const Ceiling& c) {
                       return c.kind == CeilingKind::COMPUTATION && c.precision == pc.mode;
                     });
  if (!known) {
    throw Error(ErrorKind::MissingPrecision,
                "model has no peak or ceiling for " + std::string(hpcai::to_string(pc.mode)));
  }
  out.flops_total = point.flops_total * pc.batch_scale;
  out.coi = point.coi * pc.batch_scale;
  out.precision = pc.mode;
  out.attained.reset();
  out.label = point.label + "+" + std::string(hpcai::to_string(pc.mode));
  return out;
}

/// Name of the highest computation ceiling for a precision, or kPeak when the
/// model's own precision matches.
inline std::string compute_ceiling_for(const RooflineModel& model, PrecisionMode precision) {
  if (model.precision == precision) return std::string(kPeak);
  for (const auto& c : model.ceilings) {
    if (c.kind == CeilingKind::COMPUTATION && c.precision == precision) return c.name;
  }
  throw Error(ErrorKind::MissingPrecision,
              "model has no ceiling for " + std::string(hpcai::to_string(precision)));
}

// ---------------------------------------------------------------------------
// Validation of measured points
// ---------------------------------------------------------------------------

struct PointCheck {
  bool ok = true;           // attained within bound * (1 + tolerance), or nothing measured
  double bound = 0.0;
  std::optional<double> ratio;  // attained / bound
  std::string warning;
};

inline PointCheck validate_point(const RooflineModel& model, const RooflinePoint& point, double tolerance = 0.05,
                                 std::string_view compute_ceiling = kPeak, std::string_view comm_ceiling = kPeak) {
  PointCheck c;
  c.bound = attained_bound(model, point.coi, compute_ceiling, comm_ceiling);
  if (!point.attained) return c;
  c.ratio = *point.attained / c.bound;
  if (*point.attained > c.bound * (1.0 + tolerance)) {
    c.ok = false;
    c.warning = "point '" + point.label + "' attains " + std::to_string(*point.attained) +
                " FLOPS, above its bound of " + std::to_string(c.bound) + " FLOPS";
  }
  return c;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline json to_json(const Ceiling& c) {
  json j = {{"name", c.name}, {"kind", std::string(to_string(c.kind))}, {"value", c.value}};
  if (c.precision) j["precision"] = std::string(hpcai::to_string(*c.precision));
  return j;
}

inline Ceiling parse_ceiling(const json& j, ParseOptions opts = {}) {
  hpcai::detail::ObjectReader r(j, "ceiling", opts);
  Ceiling c;
  c.name = r.string("name");
  const std::string kind = to_lower(r.string("kind"));
  if (kind == "computation") {
    c.kind = CeilingKind::COMPUTATION;
  } else if (kind == "communication") {
    c.kind = CeilingKind::COMMUNICATION;
  } else {
    throw Error(ErrorKind::SchemaError, "ceiling.kind: expected computation or communication");
  }
  c.value = r.number("value");
  if (r.has("precision")) {
    const std::string p = r.string("precision");
    c.precision = parse_precision(p);
    if (!c.precision) throw Error(ErrorKind::SchemaError, "ceiling.precision: unknown precision '" + p + "'");
  }
  r.finish();
  return c;
}

inline std::vector<Ceiling> parse_ceilings(const json& j, ParseOptions opts = {}) {
  if (!j.is_array()) throw Error(ErrorKind::SchemaError, "ceilings: expected an array");
  std::vector<Ceiling> out;
  for (const auto& item : j) out.push_back(parse_ceiling(item, opts));
  return out;
}

inline json to_json(const RooflineModel& m) {
  json ceilings = json::array();
  for (const auto& c : m.ceilings) ceilings.push_back(to_json(c));
  return {{"mode", std::string(to_string(m.mode))},
          {"precision", std::string(hpcai::to_string(m.precision))},
          {"peak_flops", m.peak_flops},
          {"peak_band", m.peak_band},
          {"ridge_coi", ridge_point(m)},
          {"ceilings", ceilings}};
}

inline json to_json(const RooflinePoint& p) {
  json j = {{"label", p.label}, {"flops_total", p.flops_total}, {"comm_traffic", p.comm_traffic}};
  // Infinite COI has no JSON number; null marks it.
  j["coi"] = std::isinf(p.coi) ? json(nullptr) : json(p.coi);
  if (p.attained) j["attained"] = *p.attained;
  if (p.precision) j["precision"] = std::string(hpcai::to_string(*p.precision));
  return j;
}

/// Points are declared as {label, flops_total, comm_traffic[, attained, precision]}.
inline RooflinePoint parse_point(const json& j, ParseOptions opts = {}) {
  hpcai::detail::ObjectReader r(j, "point", opts);
  const std::string label = r.string("label");
  const double flops = r.number("flops_total");
  const double traffic = r.number("comm_traffic");
  RooflinePoint p = make_point(label, flops, traffic, r.optional_number("attained"));
  if (r.has("coi")) r.at("coi");  // derived; recomputed from the totals above
  if (r.has("precision")) {
    const std::string s = r.string("precision");
    p.precision = parse_precision(s);
    if (!p.precision) throw Error(ErrorKind::SchemaError, "point.precision: unknown precision '" + s + "'");
  }
  r.finish();
  return p;
}

}  // namespace hpcai::roofline
