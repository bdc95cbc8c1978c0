// Places the EWA and image-classification ring allreduce points on the
// distributed roofline at 16, 32 and 64 GPUs, then tries gradient compression.
//
//   roofline_case_study [fixtures-dir] [out.svg]

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "hpcai/json_io.hpp"
#include "hpcai/plot.hpp"
#include "hpcai/roofline.hpp"

using namespace hpcai;
namespace rf = hpcai::roofline;

int main(int argc, char** argv) {
  const std::string dir = argc > 1 ? argv[1] : "fixtures";
  const std::string svg = argc > 2 ? argv[2] : "";
  try {
    const auto system = parse_system(read_json_file(dir + "/systems/roofline.json"));
    const auto ic = parse_workload(read_json_file(dir + "/workloads/image_classification.json"));
    const auto ewa = parse_workload(read_json_file(dir + "/workloads/extreme_weather_analytics.json"));
    const rf::Ceiling nvlink{"nvlink", rf::CeilingKind::COMMUNICATION, system.node.intra_node_bandwidth, {}};

    auto point = [](const WorkloadSpec& w, int gpus) {
      RunRecord r;
      r.run_id = w.name + "-" + std::to_string(gpus);
      r.num_ranks = gpus;
      return rf::place_run(r, w, sim::TopologySpec{});
    };

    std::printf("%-32s %6s %12s %12s %14s  %s\n", "point", "nodes", "coi", "ridge", "bound TFLOPS", "class");
    for (int gpus : {16, 32, 64}) {
      auto sized = system;
      sized.num_nodes = gpus / system.node.accelerators_per_node;
      const auto model = rf::build_model(sized, rf::Mode::DISTRIBUTED, PrecisionMode::MIXED, {nvlink});
      // Up to 32 GPUs the measured NVLink slant applies; at 64 the network peak does.
      const std::string comm = gpus <= 32 ? "nvlink" : std::string(rf::kPeak);
      const double ridge = model.peak_flops / (gpus <= 32 ? nvlink.value : model.peak_band);
      for (const auto* w : {&ewa, &ic}) {
        if (w == &ewa && gpus != 16) continue;
        const auto p = point(*w, gpus);
        std::printf("%-32s %6d %12.2f %12.2f %14.2f  %s\n", p.label.c_str(), sized.num_nodes, p.coi, ridge,
                    rf::attained_bound(model, p.coi, rf::kPeak, comm) / 1e12,
                    std::string(rf::to_string(rf::classify_under(model, p, rf::kPeak, comm))).c_str());
      }
    }

    auto two_nodes = system;
    two_nodes.num_nodes = 2;
    const auto model = rf::build_model(two_nodes, rf::Mode::DISTRIBUTED, PrecisionMode::MIXED, {nvlink});
    auto before = point(ewa, 16);
    before.attained = 25.99e12;
    auto after = rf::apply_whatif(model, before, rf::Compress{2.0});
    after.attained = 36.97e12;
    std::cout << "\ncompress x2 on " << before.label << "\n";
    for (const auto& p : {before, after}) {
      const auto check = rf::validate_point(model, p, 0.05, rf::kPeak, "nvlink");
      std::printf("  %-40s coi %9.2f  bound %8.2f TFLOPS  measured %6.2f TFLOPS  %s\n", p.label.c_str(), p.coi,
                  check.bound / 1e12, *p.attained / 1e12, check.ok ? "ok" : check.warning.c_str());
    }

    if (!svg.empty()) {
      std::ofstream(svg) << rf::export_svg(model, {before, after, point(ic, 16)}, rf::kPeak, "nvlink");
      std::cout << "\nwrote " << svg << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
