// hpcai: command-line front end for scoring, validating, ranking and
// reporting HPC AI benchmark runs, plus roofline and simulator utilities.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hpcai/plot.hpp"
#include "hpcai/rank.hpp"
#include "hpcai/report.hpp"
#include "hpcai/roofline.hpp"
#include "hpcai/rules.hpp"
#include "hpcai/simulator.hpp"
#include "hpcai/store.hpp"

namespace {

using hpcai::json;

enum Exit { kOk = 0, kInternal = 1, kViolations = 2, kSchema = 3 };

struct Globals {
  std::string store;
  bool lenient = false;
  std::string format = "md";
  hpcai::ParseOptions parse() const { return {lenient}; }
};

// Flat tables rendered as Markdown, CSV, or a JSON array of objects.
struct Table {
  explicit Table(std::vector<std::string> cols) : columns(std::move(cols)) {}

  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  json objects = json::array();

  void add(const json& obj) {
    std::vector<std::string> row;
    for (const auto& c : columns) {
      const json& v = obj.contains(c) ? obj.at(c) : json(nullptr);
      row.push_back(v.is_string() ? v.get<std::string>() : v.is_null() ? std::string() : v.dump());
    }
    rows.push_back(std::move(row));
    objects.push_back(obj);
  }

  void print(std::ostream& out, const std::string& format) const {
    if (format == "json") {
      out << objects.dump(2) << "\n";
      return;
    }
    const bool md = format == "md";
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (md) out << "| ";
        else if (i) out << ",";
        out << (md ? cells[i] : hpcai::report::detail::csv_field(cells[i]));
        if (md) out << " ";
      }
      out << (md ? "|\n" : "\n");
    };
    line(columns);
    if (md) line(std::vector<std::string>(columns.size(), "---"));
    for (const auto& r : rows) line(r);
  }
};

struct Loaded {
  std::vector<hpcai::RunRecord> runs;
  std::vector<hpcai::store::Diagnostic> diagnostics;
};

Loaded load_runs(const std::vector<std::string>& paths, const Globals& g) {
  Loaded out;
  std::vector<std::string> sources = paths;
  if (sources.empty()) {
    if (g.store.empty()) throw hpcai::Error(hpcai::ErrorKind::InvalidArgument, "no run files given and no --store");
    sources.push_back(g.store);
  }
  std::set<std::string> ids;
  for (const auto& p : sources) {
    auto r = hpcai::store::ingest(p, g.parse());
    for (auto& run : r.runs) {
      if (!ids.insert(run.run_id).second) {
        throw hpcai::Error(hpcai::ErrorKind::DuplicateRun, "duplicate run_id '" + run.run_id + "' in " + p);
      }
      out.runs.push_back(std::move(run));
    }
    out.diagnostics.insert(out.diagnostics.end(), r.diagnostics.begin(), r.diagnostics.end());
  }
  return out;
}

bool report_diagnostics(const Loaded& l) {
  for (const auto& d : l.diagnostics) std::cerr << "schema: " << d.message << "\n";
  return !l.diagnostics.empty();
}

std::vector<hpcai::RunRecord> for_workload(const std::vector<hpcai::RunRecord>& runs, const std::string& name) {
  std::vector<hpcai::RunRecord> out;
  for (const auto& r : runs) {
    if (r.workload == name) out.push_back(r);
  }
  return out;
}

hpcai::report::ViolationMap find_violations(const std::vector<hpcai::RunRecord>& runs,
                                            const std::optional<hpcai::NineLayerDeclaration>& reference) {
  hpcai::report::ViolationMap out;
  if (!reference) return out;
  for (const auto& r : runs) {
    auto vs = hpcai::rules::validate_declaration(r, *reference);
    if (!vs.empty()) out[r.run_id] = std::move(vs);
  }
  return out;
}

// Groups repetitions: same system, scale, precision.
std::map<std::string, std::vector<hpcai::RunRecord>> group_configurations(const std::vector<hpcai::RunRecord>& runs) {
  std::map<std::string, std::vector<hpcai::RunRecord>> groups;
  for (const auto& r : runs) {
    groups[r.system + "/" + std::to_string(r.scale) + "/" + std::string(hpcai::to_string(r.precision))].push_back(r);
  }
  return groups;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw hpcai::Error(hpcai::ErrorKind::Io, "cannot write " + path);
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HPC AI benchmark scoring, rules, roofline and simulation"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--store", g.store, "Results store directory");
  app.add_flag("--lenient", g.lenient, "Accept unknown JSON fields");
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"md", "json", "csv"}));

  std::vector<std::string> paths;
  std::string workload_file, system_file, reference_file, comparisons_file, out_prefix;

  auto* ingest = app.add_subcommand("ingest", "Parse run files and add them to --store");
  ingest->add_option("paths", paths, "Run files or directories")->required();

  auto* validate = app.add_subcommand("validate", "Check runs against a reference declaration");
  validate->add_option("paths", paths, "Run files or directories (default: --store)");
  validate->add_option("--reference", reference_file, "Reference nine-layer declaration")->required();
  validate->add_option("--system", system_file, "System config; also checks run scale");

  auto* score = app.add_subcommand("score", "FLOPS, VFLOPS and per-watt scores per run");
  score->add_option("paths", paths, "Run files or directories (default: --store)");
  score->add_option("--workload", workload_file, "Workload spec")->required();

  auto* aggregate = app.add_subcommand("aggregate", "Drop extremes and average each configuration");
  aggregate->add_option("paths", paths, "Run files or directories (default: --store)");
  aggregate->add_option("--workload", workload_file, "Workload spec")->required();

  auto* rank = app.add_subcommand("rank", "VFLOPS ranking");
  rank->add_option("paths", paths, "Run files or directories (default: --store)");
  rank->add_option("--workload", workload_file, "Workload spec")->required();
  rank->add_option("--reference", reference_file, "Reference declaration; flags violating runs");

  std::string mode_text = "distributed", precision_text = "fp32", ceilings_file, points_file, svg_file, csv_file;
  std::string compute_ceiling(hpcai::roofline::kPeak), comm_ceiling(hpcai::roofline::kPeak);
  auto* roof = app.add_subcommand("roofline", "Build a roofline model and classify points");
  roof->add_option("--system", system_file, "System config")->required();
  roof->add_option("--mode", mode_text, "single_node or distributed");
  roof->add_option("--precision", precision_text, "Arithmetic precision of the peak");
  roof->add_option("--ceilings", ceilings_file, "Ceilings JSON array");
  roof->add_option("--points", points_file, "Points JSON array");
  roof->add_option("--compute-ceiling", compute_ceiling, "Flat roof used to bound and classify points");
  roof->add_option("--comm-ceiling", comm_ceiling, "Slanted roof used to bound and classify points");
  roof->add_option("--svg", svg_file, "Write the chart here");
  roof->add_option("--csv", csv_file, "Write the sampled roof here");

  std::string scenario_file, out_dir;
  auto* simulate = app.add_subcommand("simulate", "Run a scenario sweep");
  simulate->add_option("scenario", scenario_file, "Scenario JSON")->required();
  simulate->add_option("--out-dir", out_dir, "Write one RunRecord JSON per scale here");

  auto* report = app.add_subcommand("report", "Full benchmark report");
  report->add_option("paths", paths, "Run files or directories (default: --store)");
  report->add_option("--workload", workload_file, "Workload spec")->required();
  report->add_option("--system", system_file, "System config")->required();
  report->add_option("--reference", reference_file, "Reference declaration")->required();
  report->add_option("--comparisons", comparisons_file, "Baseline/variant run pairs");
  report->add_option("--out", out_prefix, "Write <out>.md and <out>.json instead of printing");

  CLI11_PARSE(app, argc, argv);

  try {
    const auto opts = g.parse();
    auto read_workload = [&] { return hpcai::parse_workload(hpcai::read_json_file(workload_file), opts); };
    auto read_system = [&] { return hpcai::parse_system(hpcai::read_json_file(system_file), opts); };
    auto read_reference = [&] {
      return hpcai::parse_declaration(hpcai::read_json_file(reference_file), opts, "reference");
    };

    if (*ingest) {
      if (g.store.empty()) throw hpcai::Error(hpcai::ErrorKind::InvalidArgument, "ingest needs --store");
      const Loaded l = load_runs(paths, g);
      if (report_diagnostics(l)) return kSchema;
      hpcai::store::ResultsStore(g.store).put(l.runs);
      std::cout << "stored " << l.runs.size() << " runs in " << g.store << "\n";
      return kOk;
    }

    if (*validate) {
      const Loaded l = load_runs(paths, g);
      const bool schema = report_diagnostics(l);
      const auto reference = read_reference();
      std::optional<hpcai::SystemConfig> system;
      if (!system_file.empty()) system = read_system();
      Table t{{"run_id", "layer", "key", "severity", "message"}};
      bool errors = false;
      for (const auto& r : l.runs) {
        if (system) hpcai::validate(r, *system);
        for (const auto& v : hpcai::rules::validate_declaration(r, reference)) {
          json j = hpcai::rules::to_json(v);
          j["run_id"] = r.run_id;
          j["layer"] = hpcai::rules::layer_name(v.layer);
          t.add(j);
          errors = errors || v.severity == hpcai::rules::Severity::ERROR;
        }
      }
      t.print(std::cout, g.format);
      if (schema) return kSchema;
      return errors ? kViolations : kOk;
    }

    if (*score || *aggregate || *rank) {
      const auto workload = read_workload();
      const Loaded l = load_runs(paths, g);
      if (report_diagnostics(l)) return kSchema;
      const auto runs = for_workload(l.runs, workload.name);

      if (*score) {
        Table t{{"run_id", "scale", "precision", "flops", "vflops", "penalty", "flops_per_watt", "vflops_per_watt",
                 "time_to_quality"}};
        for (const auto& r : runs) {
          const auto s = hpcai::metrics::score_run(r, workload);
          t.add({{"run_id", r.run_id},
                 {"scale", r.scale},
                 {"precision", std::string(hpcai::to_string(r.precision))},
                 {"flops", s.flops},
                 {"vflops", s.vflops},
                 {"penalty", s.penalty},
                 {"flops_per_watt", s.flops_per_watt ? json(*s.flops_per_watt) : json(hpcai::report::kNotMeasured)},
                 {"vflops_per_watt", s.vflops_per_watt ? json(*s.vflops_per_watt) : json(hpcai::report::kNotMeasured)},
                 {"time_to_quality", s.time_to_quality}});
        }
        t.print(std::cout, g.format);
        return kOk;
      }

      if (*aggregate) {
        Table t{{"configuration", "submitted", "retained", "mean_vflops", "mean_time_to_quality", "variation",
                 "wall_time_variation"}};
        for (const auto& [key, group] : group_configurations(runs)) {
          const auto a = hpcai::rules::aggregate_runs(group, workload);
          t.add({{"configuration", key},
                 {"submitted", a.submitted},
                 {"retained", a.retained_runs.size()},
                 {"mean_vflops", a.mean_score.at("vflops")},
                 {"mean_time_to_quality", a.mean_score.at("time_to_quality")},
                 {"variation", a.variation},
                 {"wall_time_variation", a.wall_time_variation}});
        }
        t.print(std::cout, g.format);
        return kOk;
      }

      std::optional<hpcai::NineLayerDeclaration> reference;
      if (!reference_file.empty()) reference = read_reference();
      Table t{{"rank", "run_id", "system", "scale", "precision", "flops", "vflops", "vflops_per_watt",
               "time_to_quality", "rule_status", "eligible"}};
      for (const auto& row : hpcai::report::rank(runs, workload, find_violations(runs, reference))) {
        t.add(hpcai::report::to_json(row));
      }
      t.print(std::cout, g.format);
      return kOk;
    }

    if (*roof) {
      namespace rf = hpcai::roofline;
      const auto system = read_system();
      const auto mode = rf::parse_mode(mode_text);
      if (!mode) throw hpcai::Error(hpcai::ErrorKind::SchemaError, "unknown mode '" + mode_text + "'");
      const auto precision = hpcai::parse_precision(precision_text);
      if (!precision) throw hpcai::Error(hpcai::ErrorKind::SchemaError, "unknown precision '" + precision_text + "'");
      std::vector<rf::Ceiling> ceilings;
      if (!ceilings_file.empty()) ceilings = rf::parse_ceilings(hpcai::read_json_file(ceilings_file), opts);
      const auto model = rf::build_model(system, *mode, *precision, ceilings);
      std::vector<rf::RooflinePoint> points;
      if (!points_file.empty()) {
        const json arr = hpcai::read_json_file(points_file);
        if (!arr.is_array()) throw hpcai::Error(hpcai::ErrorKind::SchemaError, "points: expected an array");
        for (const auto& p : arr) points.push_back(rf::parse_point(p, opts));
      }
      if (!svg_file.empty()) write_file(svg_file, rf::export_svg(model, points, compute_ceiling, comm_ceiling));
      if (!csv_file.empty()) write_file(csv_file, rf::export_csv(model));

      if (g.format == "json") {
        json out = {{"model", rf::to_json(model)}, {"points", json::array()}};
        for (const auto& p : points) {
          json j = rf::to_json(p);
          j["bound"] = rf::attained_bound(model, p.coi, compute_ceiling, comm_ceiling);
          j["classification"] = std::string(rf::to_string(rf::classify_under(model, p, compute_ceiling, comm_ceiling)));
          out["points"].push_back(j);
        }
        std::cout << out.dump(2) << "\n";
        return kOk;
      }
      std::cout << "peak_flops " << model.peak_flops << "\npeak_band " << model.peak_band << "\nridge_coi "
                << rf::ridge_point(model) << "\n";
      Table t{{"label", "coi", "bound", "attained", "classification"}};
      for (const auto& p : points) {
        const auto check = rf::validate_point(model, p, 0.05, compute_ceiling, comm_ceiling);
        if (!check.ok) {
          std::cerr << "warning: " << check.warning << "\n";
        }
        t.add({{"label", p.label},
               {"coi", std::isinf(p.coi) ? json("inf") : json(p.coi)},
               {"bound", check.bound},
               {"attained", p.attained ? json(*p.attained) : json(nullptr)},
               {"classification", std::string(rf::to_string(rf::classify_under(model, p, compute_ceiling, comm_ceiling)))}});
      }
      if (!points.empty()) t.print(std::cout, g.format);
      return kOk;
    }

    if (*simulate) {
      const std::string base = std::filesystem::path(scenario_file).parent_path().string();
      const auto scenario =
          hpcai::sim::parse_scenario(hpcai::read_json_file(scenario_file), opts, base.empty() ? "." : base);
      const auto sweep = hpcai::sim::run_sweep(scenario);
      if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        for (const auto& p : sweep) {
          write_file(out_dir + "/" + p.result.run.run_id + ".json", hpcai::to_json(p.result.run).dump(2) + "\n");
        }
      }
      if (g.format == "json") {
        json out = json::array();
        for (const auto& p : sweep) {
          out.push_back({{"scale", p.scale},
                         {"throughput_flops", p.result.throughput},
                         {"efficiency", p.result.efficiency},
                         {"step_seconds", p.result.step_seconds},
                         {"phases", hpcai::sim::to_json(p.result.timeline)},
                         {"run", hpcai::to_json(p.result.run)}});
        }
        std::cout << out.dump(2) << "\n";
      } else {
        std::cout << hpcai::sim::sweep_csv(sweep);
      }
      return kOk;
    }

    if (*report) {
      hpcai::report::ReportInput in;
      in.workload = read_workload();
      in.system = read_system();
      in.declaration = read_reference();
      const Loaded l = load_runs(paths, g);
      if (report_diagnostics(l)) return kSchema;
      in.runs = for_workload(l.runs, in.workload.name);
      for (const auto& r : in.runs) hpcai::validate(r, in.system);
      in.violations = find_violations(in.runs, in.declaration);
      for (const auto& [key, group] : group_configurations(in.runs)) {
        if (group.size() >= static_cast<std::size_t>(in.workload.min_runs)) {
          in.aggregates.push_back(hpcai::rules::aggregate_runs(group, in.workload));
        } else {
          std::cerr << "note: " << key << " has " << group.size() << " runs, fewer than the "
                    << in.workload.min_runs << " required; not aggregated\n";
        }
      }
      if (!comparisons_file.empty()) {
        for (const auto& c : hpcai::read_json_file(comparisons_file)) {
          hpcai::detail::ObjectReader r(c, "comparison", opts);
          in.comparisons.push_back({r.string("label"), r.string("baseline_run"), r.string("variant_run")});
          r.finish();
        }
      }
      const auto doc = hpcai::report::emit_report(in);
      if (!out_prefix.empty()) {
        write_file(out_prefix + ".md", doc.markdown);
        write_file(out_prefix + ".json", doc.data.dump(2) + "\n");
      } else if (g.format == "json") {
        std::cout << doc.data.dump(2) << "\n";
      } else {
        std::cout << doc.markdown;
      }
      bool errors = false;
      for (const auto& [id, vs] : in.violations) errors = errors || hpcai::rules::has_errors(vs);
      return errors ? kViolations : kOk;
    }
  } catch (const hpcai::Error& e) {
    std::cerr << "error [" << hpcai::to_string(e.kind()) << "]: " << e.what() << "\n";
    const auto k = e.kind();
    return k == hpcai::ErrorKind::SchemaError || k == hpcai::ErrorKind::ParseError ? kSchema : kInternal;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInternal;
  }
  return kOk;
}
