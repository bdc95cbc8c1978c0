#pragma once

// JSON schemas for the core types. Field names mirror the struct members.
// Strict mode rejects unknown fields; lenient mode ignores them.

#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "hpcai/core.hpp"
#include "json.hpp"

namespace hpcai {

using json = nlohmann::json;

struct ParseOptions {
  bool lenient = false;
};

namespace detail {

class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path, ParseOptions opts)
      : j_(j), path_(std::move(path)), opts_(opts) {
    if (!j_.is_object()) throw Error(ErrorKind::SchemaError, where() + "expected a JSON object");
  }

  bool has(std::string_view key) const { return j_.contains(std::string(key)); }

  const json& at(std::string_view key) {
    const std::string k(key);
    seen_.insert(k);
    if (!j_.contains(k)) throw Error(ErrorKind::SchemaError, where() + "missing required field '" + k + "'");
    return j_.at(k);
  }

  double number(std::string_view key) {
    const json& v = at(key);
    if (!v.is_number()) throw Error(ErrorKind::SchemaError, field(key) + "must be a number");
    return v.get<double>();
  }

  std::optional<double> optional_number(std::string_view key) {
    if (!has(key) || j_.at(std::string(key)).is_null()) {
      seen_.insert(std::string(key));
      return std::nullopt;
    }
    return number(key);
  }

  double number_or(std::string_view key, double fallback) {
    auto v = optional_number(key);
    return v ? *v : fallback;
  }

  int integer(std::string_view key) {
    const json& v = at(key);
    if (v.is_number_integer()) return v.get<int>();
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (std::floor(d) == d) return static_cast<int>(d);
    }
    throw Error(ErrorKind::SchemaError, field(key) + "must be an integer");
  }

  std::string string(std::string_view key) {
    const json& v = at(key);
    if (!v.is_string()) throw Error(ErrorKind::SchemaError, field(key) + "must be a string");
    return v.get<std::string>();
  }

  std::string string_or(std::string_view key, std::string fallback) {
    if (!has(key)) {
      seen_.insert(std::string(key));
      return fallback;
    }
    return string(key);
  }

  std::string child_path(std::string_view key) const { return path_ + "." + std::string(key); }
  ParseOptions options() const { return opts_; }

  /// Rejects fields that were never consumed, unless lenient.
  void finish() const {
    if (opts_.lenient) return;
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw Error(ErrorKind::SchemaError, where() + "unknown field '" + k + "'");
    }
  }

 private:
  std::string where() const { return path_.empty() ? std::string() : path_ + ": "; }
  std::string field(std::string_view key) const { return where() + "field '" + std::string(key) + "' "; }

  const json& j_;
  std::string path_;
  ParseOptions opts_;
  std::set<std::string> seen_;
};

inline std::string scalar_to_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

}  // namespace detail

/// Parses JSON text, reporting syntax errors with line and byte offset.
inline json parse_json_text(const std::string& text, const std::string& source = "<input>") {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t offset = e.byte == 0 ? 0 : e.byte - 1;
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::ostringstream msg;
    msg << source << ":" << line << ":" << col << " (offset " << offset << "): malformed JSON";
    throw Error(ErrorKind::ParseError, msg.str());
  }
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json read_json_file(const std::string& path) { return parse_json_text(read_text_file(path), path); }

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline json to_json(const AcceleratorSpec& a) {
  json peaks = json::object();
  for (const auto& [mode, rate] : a.peak_flops) peaks[std::string(to_string(mode))] = rate;
  return {{"name", a.name},
          {"peak_flops", peaks},
          {"memory_bandwidth", a.memory_bandwidth},
          {"memory_capacity", a.memory_capacity}};
}

inline json to_json(const NodeSpec& n) {
  return {{"accelerators_per_node", n.accelerators_per_node},
          {"accelerator", to_json(n.accelerator)},
          {"intra_node_bandwidth", n.intra_node_bandwidth},
          {"system_memory", n.system_memory},
          {"storage", n.storage}};
}

inline json to_json(const SystemConfig& s) {
  return {{"name", s.name},
          {"num_nodes", s.num_nodes},
          {"node", to_json(s.node)},
          {"inter_node_bandwidth_nominal", s.inter_node_bandwidth_nominal},
          {"inter_node_bandwidth_effective", s.inter_node_bandwidth_effective}};
}

inline json to_json(const WorkloadSpec& w) {
  return {{"name", w.name},
          {"flops_per_sample", w.flops_per_sample},
          {"params_count", w.params_count},
          {"bytes_per_param", w.bytes_per_param},
          {"comp_per_step", w.comp_per_step},
          {"comm_per_step", w.comm_per_step},
          {"target_quality", {{"metric_name", w.target_quality.metric_name}, {"value", w.target_quality.value}}},
          {"quality_exponent_n", w.quality_exponent_n},
          {"epochs", w.epochs},
          {"dataset_samples", w.dataset_samples},
          {"min_runs", w.min_runs}};
}

inline json to_json(const NineLayerDeclaration& d) {
  json out = json::object();
  for (int i = 0; i < kLayerCount; ++i) {
    json layer = json::object();
    for (const auto& [k, v] : d.layers[static_cast<std::size_t>(i)]) layer[k] = v;
    out[std::string(kLayerKeys[static_cast<std::size_t>(i)])] = layer;
  }
  return out;
}

inline json to_json(const RunRecord& r) {
  json j = {{"run_id", r.run_id},
            {"workload", r.workload},
            {"system", r.system},
            {"scale", r.scale},
            {"precision", std::string(to_string(r.precision))},
            {"global_batchsize", r.global_batchsize},
            {"achieved_quality", r.achieved_quality},
            {"wall_time", r.wall_time},
            {"epochs_to_quality", r.epochs_to_quality},
            {"samples_per_second_per_rank", r.samples_per_second_per_rank},
            {"num_ranks", r.num_ranks},
            {"level", std::string(to_string(r.level))},
            {"declaration", to_json(r.declaration)}};
  if (r.average_power) j["average_power"] = *r.average_power;
  return j;
}

// ---------------------------------------------------------------------------
// Parsing. Each parser also enforces the type's invariants.
// ---------------------------------------------------------------------------

inline AcceleratorSpec parse_accelerator(const json& j, ParseOptions opts = {}, const std::string& path = "accelerator") {
  detail::ObjectReader r(j, path, opts);
  AcceleratorSpec a;
  a.name = r.string("name");
  const json& peaks = r.at("peak_flops");
  if (!peaks.is_object()) throw Error(ErrorKind::SchemaError, path + ".peak_flops: expected an object");
  for (const auto& [key, value] : peaks.items()) {
    auto mode = parse_precision(key);
    if (!mode) throw Error(ErrorKind::SchemaError, path + ".peak_flops: unknown precision '" + key + "'");
    if (!value.is_number()) throw Error(ErrorKind::SchemaError, path + ".peak_flops." + key + ": must be a number");
    a.peak_flops[*mode] = value.get<double>();
  }
  a.memory_bandwidth = r.number("memory_bandwidth");
  a.memory_capacity = r.number("memory_capacity");
  r.finish();
  validate(a);
  return a;
}

inline NodeSpec parse_node(const json& j, ParseOptions opts = {}, const std::string& path = "node") {
  detail::ObjectReader r(j, path, opts);
  NodeSpec n;
  n.accelerators_per_node = r.integer("accelerators_per_node");
  n.accelerator = parse_accelerator(r.at("accelerator"), opts, r.child_path("accelerator"));
  n.intra_node_bandwidth = r.number("intra_node_bandwidth");
  n.system_memory = r.number_or("system_memory", 0.0);
  n.storage = r.number_or("storage", 0.0);
  r.finish();
  validate(n);
  return n;
}

inline SystemConfig parse_system(const json& j, ParseOptions opts = {}) {
  detail::ObjectReader r(j, "system", opts);
  SystemConfig s;
  s.name = r.string("name");
  s.num_nodes = r.integer("num_nodes");
  s.node = parse_node(r.at("node"), opts, "system.node");
  s.inter_node_bandwidth_nominal = r.number("inter_node_bandwidth_nominal");
  // Effective bandwidth defaults to nominal when absent.
  s.inter_node_bandwidth_effective = r.number_or("inter_node_bandwidth_effective", s.inter_node_bandwidth_nominal);
  r.finish();
  validate(s);
  return s;
}

inline WorkloadSpec parse_workload(const json& j, ParseOptions opts = {}) {
  detail::ObjectReader r(j, "workload", opts);
  WorkloadSpec w;
  w.name = r.string("name");
  w.flops_per_sample = r.number("flops_per_sample");
  w.params_count = r.number("params_count");
  w.bytes_per_param = r.number_or("bytes_per_param", 4.0);
  w.comp_per_step = r.number("comp_per_step");
  w.comm_per_step = r.number("comm_per_step");
  {
    detail::ObjectReader t(r.at("target_quality"), "workload.target_quality", opts);
    w.target_quality.metric_name = t.string("metric_name");
    w.target_quality.value = t.number("value");
    t.finish();
  }
  w.quality_exponent_n = r.integer("quality_exponent_n");
  w.epochs = r.integer("epochs");
  w.dataset_samples = r.number("dataset_samples");
  w.min_runs = r.integer("min_runs");
  r.finish();
  validate(w);
  return w;
}

inline NineLayerDeclaration parse_declaration(const json& j, ParseOptions opts = {},
                                              const std::string& path = "declaration") {
  detail::ObjectReader r(j, path, opts);
  NineLayerDeclaration d;
  for (int i = 0; i < kLayerCount; ++i) {
    const auto key = kLayerKeys[static_cast<std::size_t>(i)];
    const json& layer = r.at(key);
    if (!layer.is_object()) {
      throw Error(ErrorKind::SchemaError, r.child_path(key) + ": expected an object");
    }
    for (const auto& [k, v] : layer.items()) {
      if (v.is_object() || v.is_array() || v.is_null()) {
        throw Error(ErrorKind::SchemaError, r.child_path(key) + "." + k + ": values must be scalars");
      }
      d.layers[static_cast<std::size_t>(i)][k] = detail::scalar_to_text(v);
    }
  }
  r.finish();
  validate(d);
  return d;
}

inline RunRecord parse_run(const json& j, ParseOptions opts = {}) {
  detail::ObjectReader r(j, "run", opts);
  RunRecord run;
  run.run_id = r.string("run_id");
  run.workload = r.string("workload");
  run.system = r.string("system");
  run.scale = r.integer("scale");
  const std::string prec = r.string("precision");
  auto p = parse_precision(prec);
  if (!p) throw Error(ErrorKind::SchemaError, "run.precision: unknown precision '" + prec + "'");
  run.precision = *p;
  run.global_batchsize = r.integer("global_batchsize");
  run.achieved_quality = r.number("achieved_quality");
  run.wall_time = r.number("wall_time");
  run.epochs_to_quality = r.number("epochs_to_quality");
  run.samples_per_second_per_rank = r.number("samples_per_second_per_rank");
  run.num_ranks = r.integer("num_ranks");
  run.average_power = r.optional_number("average_power");
  const std::string lvl = r.string("level");
  auto level = parse_level(lvl);
  if (!level) throw Error(ErrorKind::SchemaError, "run.level: unknown level '" + lvl + "'");
  run.level = *level;
  run.declaration = parse_declaration(r.at("declaration"), opts, "run.declaration");
  r.finish();
  validate(run);
  return run;
}

}  // namespace hpcai
