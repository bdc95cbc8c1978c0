#pragma once

// Benchmark report: system under test, benchmark configuration, and per-run
// scores, rendered as Markdown with CSV tables plus a JSON twin. Every number
// is either copied from an input or computed by the metrics module.

#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hpcai/core.hpp"
#include "hpcai/json_io.hpp"
#include "hpcai/metrics.hpp"
#include "hpcai/rank.hpp"
#include "hpcai/rules.hpp"

namespace hpcai::report {

inline constexpr const char* kNotMeasured = "not measured";

/// Baseline vs variant, e.g. with and without an algorithmic change.
struct ComparisonSpec {
  std::string label;
  std::string baseline_run;
  std::string variant_run;
};

struct ReportInput {
  SystemConfig system;
  WorkloadSpec workload;
  NineLayerDeclaration declaration;  // the submission's reference declaration
  std::vector<RunRecord> runs;
  std::vector<rules::AggregateResult> aggregates;
  ViolationMap violations;
  std::vector<ComparisonSpec> comparisons;
};

struct ReportDocument {
  std::string markdown;
  json data;
};

namespace detail {

inline std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string join_layer(const LayerMap& m) {
  std::string out;
  for (const auto& [k, v] : m) {
    if (!out.empty()) out += "; ";
    out += k + "=" + v;
  }
  return out;
}

inline std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : kNotMeasured; }

inline json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(kNotMeasured); }

}  // namespace detail

/// The six system-under-test items; an empty description marks a missing one.
inline std::vector<std::pair<std::string, std::string>> system_items(const SystemConfig& s,
                                                                     const NineLayerDeclaration& d) {
  const auto& acc = s.node.accelerator;
  std::string peaks;
  for (const auto& [mode, value] : acc.peak_flops) {
    if (!peaks.empty()) peaks += ", ";
    peaks += std::string(to_string(mode)) + " " + detail::num(value / units::kTera) + " TFLOPS";
  }
  std::string node = std::to_string(s.node.accelerators_per_node) + " x " + acc.name + " (" + peaks + "; memory " +
                     detail::num(acc.memory_bandwidth / units::kGiga) + " GB/s, " +
                     detail::num(acc.memory_capacity / units::kGiga) + " GB)";
  const std::string hw = detail::join_layer(d[Layer::Hardware]);
  if (!hw.empty()) node += "; " + hw;

  std::string runtime = detail::join_layer(d[Layer::AcceleratorLibraries]);
  const std::string framework = detail::join_layer(d[Layer::AIFramework]);
  if (!framework.empty()) runtime += (runtime.empty() ? "" : "; ") + framework;

  std::string inter = s.num_nodes == 1
                          ? std::string("single node")
                          : std::to_string(s.num_nodes) + " nodes; nominal " +
                                detail::num(s.inter_node_bandwidth_nominal / units::kGiga) + " GB/s, effective " +
                                detail::num(s.inter_node_bandwidth_effective / units::kGiga) + " GB/s";

  return {{"node_processors_and_accelerators", node},
          {"intra_node_connection", detail::num(s.node.intra_node_bandwidth / units::kGiga) + " GB/s"},
          {"operating_system", detail::join_layer(d[Layer::OS])},
          {"node_runtime_software", runtime},
          {"inter_node_connection", inter},
          {"system_runtime_software", detail::join_layer(d[Layer::CommunicationLibraries])}};
}

inline ReportDocument emit_report(const ReportInput& in) {
  std::vector<std::string> missing;
  const auto items = system_items(in.system, in.declaration);
  for (const auto& [k, v] : items) {
    if (v.empty()) missing.push_back("system." + k);
  }
  const LayerMap& hyper = in.declaration[Layer::HyperParameters];
  const LayerMap& comm = in.declaration[Layer::CommunicationLibraries];
  const LayerMap& model = in.declaration[Layer::ProgrammingModel];
  if (hyper.empty()) missing.push_back("configuration.hyper_parameters");
  if (comm.empty() && model.empty()) missing.push_back("configuration.communication");
  if (in.runs.empty()) missing.push_back("scores.runs");
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw Error(ErrorKind::IncompleteReport, "report is missing: " + list);
  }

  std::map<std::string, metrics::Score> scores;
  for (const auto& r : in.runs) scores.emplace(r.run_id, metrics::score_run(r, in.workload));
  const auto ranking = rank(in.runs, in.workload, in.violations);

  ReportDocument doc;
  json& j = doc.data;
  std::ostringstream md;

  md << "# Benchmark report: " << in.workload.name << " on " << in.system.name << "\n\n";

  md << "## System under test\n\n```csv\nitem,description\n";
  j["system_under_test"] = json::object();
  for (const auto& [k, v] : items) {
    md << k << "," << detail::csv_field(v) << "\n";
    j["system_under_test"][k] = v;
  }
  md << "```\n\n";

  md << "## Benchmark configuration\n\n### Hyper-parameters\n\n```csv\nkey,value\n";
  for (const auto& [k, v] : hyper) md << k << "," << detail::csv_field(v) << "\n";
  md << "```\n\n### Communication\n\n```csv\nkey,value\n";
  json comm_json = json::object();
  for (const auto& [k, v] : comm) {
    md << k << "," << detail::csv_field(v) << "\n";
    comm_json[k] = v;
  }
  for (const auto& [k, v] : model) {
    md << k << "," << detail::csv_field(v) << "\n";
    comm_json[k] = v;
  }
  md << "```\n\n";
  j["configuration"] = {{"hyper_parameters", hyper}, {"communication", comm_json}};

  md << "## Scores\n\n";
  const bool any_unpowered =
      std::any_of(in.runs.begin(), in.runs.end(), [](const RunRecord& r) { return !r.average_power; });
  if (any_unpowered) md << "Power was " << kNotMeasured << " for some runs; their per-watt metrics are omitted.\n\n";
  md << "```csv\nrun_id,scale,precision,achieved_quality,epochs_to_quality,time_to_quality_s,flops,flops_per_watt,"
        "vflops,vflops_per_watt,rule_status\n";
  j["scores"] = json::array();
  for (const auto& row : ranking) {
    const auto& s = scores.at(row.run_id);
    const auto& run = *std::find_if(in.runs.begin(), in.runs.end(),
                                    [&](const RunRecord& r) { return r.run_id == row.run_id; });
    md << detail::csv_field(run.run_id) << "," << run.scale << "," << to_string(run.precision) << ","
       << detail::num(run.achieved_quality) << "," << detail::num(run.epochs_to_quality) << ","
       << detail::num(s.time_to_quality) << "," << detail::num(s.flops) << "," << detail::opt_num(s.flops_per_watt)
       << "," << detail::num(s.vflops) << "," << detail::opt_num(s.vflops_per_watt) << "," << row.rule_status()
       << "\n";
    j["scores"].push_back({{"run_id", run.run_id},
                           {"scale", run.scale},
                           {"precision", std::string(to_string(run.precision))},
                           {"achieved_quality", run.achieved_quality},
                           {"epochs_to_quality", run.epochs_to_quality},
                           {"time_to_quality", s.time_to_quality},
                           {"flops", s.flops},
                           {"flops_per_watt", detail::opt_json(s.flops_per_watt)},
                           {"vflops", s.vflops},
                           {"vflops_per_watt", detail::opt_json(s.vflops_per_watt)},
                           {"rule_status", row.rule_status()}});
  }
  md << "```\n\n";

  md << "### Ranking\n\n```csv\nrank,run_id,system,scale,precision,vflops,time_to_quality_s,eligible\n";
  j["ranking"] = json::array();
  for (const auto& row : ranking) {
    md << row.rank << "," << detail::csv_field(row.run_id) << "," << detail::csv_field(row.system) << ","
       << row.scale << "," << to_string(row.precision) << "," << detail::num(row.vflops) << ","
       << detail::num(row.time_to_quality) << "," << (row.eligible ? "yes" : "no (flagged)") << "\n";
    j["ranking"].push_back(to_json(row));
  }
  md << "```\n\n";

  if (!in.aggregates.empty()) {
    md << "### Aggregates\n\nThe lowest and highest runs by epochs to quality are dropped before averaging.\n\n"
          "```csv\nworkload,submitted,retained,dropped_lowest,dropped_highest,mean_vflops,mean_time_to_quality_s,"
          "variation_epochs,variation_wall_time\n";
    j["aggregates"] = json::array();
    for (const auto& a : in.aggregates) {
      md << a.workload << "," << a.submitted << "," << a.retained_runs.size() << ","
         << (a.dropped_lowest ? a.dropped_lowest->run_id : "") << ","
         << (a.dropped_highest ? a.dropped_highest->run_id : "") << "," << detail::num(a.mean_score.at("vflops"))
         << "," << detail::num(a.mean_score.at("time_to_quality")) << "," << detail::num(a.variation) << ","
         << detail::num(a.wall_time_variation) << "\n";
      j["aggregates"].push_back(rules::to_json(a));
    }
    md << "```\n\n";
  }

  j["violations"] = json::object();
  md << "### Rule compliance\n\n";
  std::size_t total = 0;
  for (const auto& [id, vs] : in.violations) total += vs.size();
  if (total == 0) {
    md << "No violations.\n\n";
  } else {
    md << "```csv\nrun_id,layer,key,severity,message\n";
    for (const auto& [id, vs] : in.violations) {
      for (const auto& v : vs) {
        md << detail::csv_field(id) << "," << rules::layer_name(v.layer) << "," << detail::csv_field(v.key) << ","
           << (v.severity == rules::Severity::ERROR ? "ERROR" : "WARNING") << "," << detail::csv_field(v.message)
           << "\n";
        j["violations"][id].push_back(rules::to_json(v));
      }
    }
    md << "```\n\n";
  }

  if (!in.comparisons.empty()) {
    md << "### Comparisons\n\n```csv\nlabel,baseline,variant,accuracy_gain,vflops_ratio\n";
    j["comparisons"] = json::array();
    for (const auto& c : in.comparisons) {
      auto find = [&](const std::string& id) -> const RunRecord& {
        for (const auto& r : in.runs) {
          if (r.run_id == id) return r;
        }
        throw Error(ErrorKind::IncompleteReport, "comparison '" + c.label + "' names unknown run '" + id + "'");
      };
      const RunRecord& base = find(c.baseline_run);
      const RunRecord& var = find(c.variant_run);
      const double gain = var.achieved_quality - base.achieved_quality;
      const double ratio = scores.at(var.run_id).vflops / scores.at(base.run_id).vflops;
      md << detail::csv_field(c.label) << "," << base.run_id << "," << var.run_id << "," << detail::num(gain) << ","
         << detail::fixed2(ratio) << "\n";
      j["comparisons"].push_back({{"label", c.label},
                                  {"baseline", base.run_id},
                                  {"variant", var.run_id},
                                  {"accuracy_gain", gain},
                                  {"vflops_ratio", ratio}});
    }
    md << "```\n\n";
  }

  md << "## Publication\n\nUploading source code, documents and run scripts to the community repository is a manual "
        "step outside this tool.\n";
  doc.markdown = md.str();
  return doc;
}

}  // namespace hpcai::report
