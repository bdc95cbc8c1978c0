#include <gtest/gtest.h>

#include <random>
#include <regex>

#include "hpcai/plot.hpp"
#include "hpcai/roofline.hpp"
#include "support.hpp"

using namespace hpcai;
using namespace hpcai::roofline;
using namespace testing_support;

namespace {

RooflineModel single_node_fp32() { return build_model(cluster_system(), Mode::SINGLE_NODE, PrecisionMode::FP32); }

std::vector<Ceiling> ceilings_file(const std::string& rel) { return parse_ceilings(read_json_file(fixture(rel))); }

RooflineModel case_study(int nodes) {
  auto s = roofline_system();
  s.num_nodes = nodes;
  return build_model(s, Mode::DISTRIBUTED, PrecisionMode::MIXED, {{"nvlink", CeilingKind::COMMUNICATION, 300e9, {}}});
}

RooflinePoint ring_point(const std::string& label, const WorkloadSpec& w, int p) {
  RunRecord r;
  r.run_id = label;
  r.num_ranks = p;
  return place_run(r, w, sim::TopologySpec{});
}

}  // namespace

TEST(Coi, Examples) {
  EXPECT_DOUBLE_EQ(coi(1.2e14, 3e11), 400.0);
  EXPECT_DOUBLE_EQ(coi(5e9, 5e9), 1.0);
  EXPECT_TRUE(std::isinf(coi(1e12, 0.0)));
}

TEST(Coi, EwaLargeScaleLimit) {
  // Oracle: explicit ring phase summation.
  const int p = 1 << 20;
  const double traffic = p * ring_bytes_per_rank(164e6, p);
  EXPECT_NEAR(coi(p * 691e9, traffic), 2106.7, 0.1);
}

TEST(Bound, BothBranches) {
  const auto m = single_node_fp32();
  EXPECT_DOUBLE_EQ(attained_bound(m, 400), 120e12);
  EXPECT_DOUBLE_EQ(attained_bound(m, 100), 30e12);
  EXPECT_DOUBLE_EQ(attained_bound(m, kInfiniteCoi), 120e12);
}

TEST(Bound, UnknownCeiling) {
  EXPECT_ERROR_KIND(attained_bound(single_node_fp32(), 10, "nope"), ErrorKind::UnknownCeiling);
}

TEST(Bound, CeilingKindMustMatch) {
  const auto m = case_study(2);
  EXPECT_ERROR_KIND(attained_bound(m, 10, "nvlink", kPeak), ErrorKind::UnknownCeiling);
}

TEST(Ridge, Examples) {
  EXPECT_DOUBLE_EQ(ridge_point(120e12, 300e9), 400.0);
  EXPECT_NEAR(ridge_point(8320e12, 1.2e9), 6933333.333333333, 1e-9 * 6.93e6);
  EXPECT_DOUBLE_EQ(ridge_point(7.0, 7.0), 1.0);
  EXPECT_ERROR_KIND(ridge_point(1.0, 0.0), ErrorKind::DegenerateBand);
}

TEST(Classify, TieIsComputeBound) {
  const auto m = single_node_fp32();
  EXPECT_EQ(classify(m, make_point("ridge", 400.0, 1.0)), Bound::COMPUTE_BOUND);
  EXPECT_EQ(classify(m, make_point("below", 399.0, 1.0)), Bound::COMMUNICATION_BOUND);
}

TEST(Classify, SixteenGpuCaseStudy) {
  const auto m = case_study(2);
  EXPECT_NEAR(ridge_point(m.peak_flops, 300e9), 6933.333333333333, 1e-6);
  const auto ewa = ring_point("ewa", ewa_workload(), 16);
  const auto ic = ring_point("ic", ic_workload(), 16);
  EXPECT_NEAR(ewa.coi, 2247.1545, 1e-3);
  EXPECT_NEAR(ic.coi, 15701.3333, 1e-3);
  EXPECT_EQ(classify_under(m, ewa, kPeak, "nvlink"), Bound::COMMUNICATION_BOUND);
  EXPECT_EQ(classify_under(m, ic, kPeak, "nvlink"), Bound::COMPUTE_BOUND);
}

TEST(Classify, BoundShiftBetween32And64) {
  const auto ic32 = ring_point("ic32", ic_workload(), 32);
  EXPECT_NEAR(ic32.coi, 15194.8387, 1e-3);
  EXPECT_EQ(classify_under(case_study(4), ic32, kPeak, "nvlink"), Bound::COMPUTE_BOUND);
  const auto ic64 = ring_point("ic64", ic_workload(), 64);
  EXPECT_NEAR(ic64.coi, 14953.6508, 1e-3);
  EXPECT_EQ(classify(case_study(8), ic64), Bound::COMMUNICATION_BOUND);
}

TEST(Build, SingleNodeCaseStudy) {
  const auto m = build_model(roofline_system(), Mode::SINGLE_NODE, PrecisionMode::MIXED,
                             ceilings_file("roofline/single_node_ceilings.json"));
  EXPECT_DOUBLE_EQ(m.peak_flops, 1040e12);
  EXPECT_DOUBLE_EQ(m.peak_band, 300e9);
  ASSERT_EQ(m.ceilings.size(), 5u);
  EXPECT_EQ(m.ceilings[0].name, "mixed_gemm");
  EXPECT_EQ(m.ceilings[3].name, "fp32_conv");
  EXPECT_EQ(m.ceilings[4].name, "memory");
  EXPECT_DOUBLE_EQ(m.find("memory")->value, 1134e9);
}

TEST(Build, DistributedCaseStudy) {
  const auto m = build_model(roofline_system(), Mode::DISTRIBUTED, PrecisionMode::MIXED,
                             ceilings_file("roofline/distributed_ceilings.json"));
  EXPECT_DOUBLE_EQ(m.peak_flops, 8320e12);
  EXPECT_DOUBLE_EQ(m.peak_band, 1.2e9);
  EXPECT_NEAR(ridge_point(m), 6.93e6, 0.01e6);
  EXPECT_DOUBLE_EQ(m.find("fp32_gemm")->value, 920e12);
}

TEST(Build, CeilingAbovePeak) {
  EXPECT_ERROR_KIND(build_model(cluster_system(), Mode::SINGLE_NODE, PrecisionMode::FP32,
                                {{"too_fast", CeilingKind::COMPUTATION, 121e12, {}}}),
                    ErrorKind::CeilingAbovePeak);
}

TEST(Build, SingleAcceleratorModesCoincide) {
  auto s = cluster_system();
  s.num_nodes = 1;
  s.node.accelerators_per_node = 1;
  EXPECT_EQ(build_model(s, Mode::SINGLE_NODE, PrecisionMode::FP32).peak_flops,
            build_model(s, Mode::DISTRIBUTED, PrecisionMode::FP32).peak_flops);
}

TEST(Place, SingleRankIsInfinite) {
  const auto p = ring_point("solo", ic_workload(), 1);
  EXPECT_EQ(p.comm_traffic, 0.0);
  EXPECT_TRUE(std::isinf(p.coi));
  EXPECT_DOUBLE_EQ(attained_bound(single_node_fp32(), p.coi), 120e12);
}

TEST(Place, MissingCommunication) {
  auto w = ic_workload();
  w.comm_per_step = 0.0;
  RunRecord r;
  r.num_ranks = 8;
  EXPECT_ERROR_KIND(place_run(r, w, {}), ErrorKind::IncompletePoint);
}

TEST(Place, MeasuredPointsAgainstCaseStudy) {
  auto ewa = ring_point("ewa", ewa_workload(), 16);
  ewa.attained = 25.99e12;
  const auto m = case_study(2);
  EXPECT_LT(*ewa.attained, attained_bound(m, ewa.coi, kPeak, "nvlink"));
  EXPECT_TRUE(validate_point(m, ewa, 0.05, kPeak, "nvlink").ok);
  // The Ethernet slant alone cannot carry the measured rate; this is flagged.
  EXPECT_FALSE(validate_point(m, ewa).ok);

  auto ic64 = ring_point("ic64", ic_workload(), 64);
  ic64.attained = 345e12;
  EXPECT_EQ(classify(case_study(8), ic64), Bound::COMMUNICATION_BOUND);
}

TEST(WhatIf, CompressDoublesCoi) {
  const auto p = make_point("ewa", 2107.0, 1.0);
  const auto q = apply_whatif(single_node_fp32(), p, Compress{2.0});
  EXPECT_DOUBLE_EQ(q.coi, 4214.0);
  EXPECT_DOUBLE_EQ(q.flops_total, p.flops_total);
  EXPECT_DOUBLE_EQ(q.comm_traffic, 0.5);
}

TEST(WhatIf, CompressOnCaseStudy) {
  const auto m = case_study(2);
  const auto ewa = ring_point("ewa", ewa_workload(), 16);
  const auto ewa2 = apply_whatif(m, ewa, Compress{2.0});
  EXPECT_NEAR(attained_bound(m, ewa.coi, kPeak, "nvlink"), 674146341463414.6, 1.0);
  EXPECT_NEAR(attained_bound(m, ewa2.coi, kPeak, "nvlink"), 1348292682926829.2, 2.0);
  const auto ic = ring_point("ic", ic_workload(), 16);
  const auto ic2 = apply_whatif(m, ic, Compress{2.0});
  EXPECT_DOUBLE_EQ(attained_bound(m, ic.coi, kPeak, "nvlink"), attained_bound(m, ic2.coi, kPeak, "nvlink"));
}

TEST(WhatIf, PrecisionChange) {
  const auto m = build_model(roofline_system(), Mode::DISTRIBUTED, PrecisionMode::FP32,
                             {{"mixed_gemm", CeilingKind::COMPUTATION, 900e12, PrecisionMode::MIXED}});
  const auto q = apply_whatif(m, make_point("unit", 1.0, 1.0), PrecisionChange{PrecisionMode::MIXED, 2.0});
  EXPECT_DOUBLE_EQ(q.coi, 2.0);
  EXPECT_EQ(compute_ceiling_for(m, PrecisionMode::MIXED), "mixed_gemm");
  EXPECT_ERROR_KIND(apply_whatif(m, q, PrecisionChange{PrecisionMode::INT8, 2.0}), ErrorKind::MissingPrecision);
}

TEST(WhatIf, InvalidFactor) {
  EXPECT_ERROR_KIND(apply_whatif(single_node_fp32(), make_point("p", 1, 1), Compress{1.0}),
                    ErrorKind::InvalidTransform);
}

TEST(Json, ModelAndPointRoundTrip) {
  const auto pts = read_json_file(fixture("roofline/case_study_points.json"));
  for (const auto& j : pts) {
    const auto p = parse_point(j);
    const auto q = parse_point(to_json(p));
    EXPECT_EQ(p.coi, q.coi);
    EXPECT_EQ(p.attained, q.attained);
  }
  EXPECT_TRUE(to_json(make_point("solo", 1.0, 0.0))["coi"].is_null());
}

// Plot artifacts

TEST(Plot, CsvHeaderAndSamples) {
  const auto m = build_model(roofline_system(), Mode::SINGLE_NODE, PrecisionMode::MIXED,
                             ceilings_file("roofline/single_node_ceilings.json"));
  const auto csv = export_csv(m);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "coi,bound_flops,ceiling_mixed_gemm,ceiling_mixed_conv,ceiling_fp32_gemm,ceiling_fp32_conv,ceiling_memory");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), kPlotSamples + 1);
}

TEST(Plot, RoofKinksAtRidge) {
  const auto svg = export_svg(single_node_fp32(), {});
  std::smatch m;
  ASSERT_TRUE(std::regex_search(svg, m, std::regex("data-ridge-coi=\"([^\"]+)\"")));
  EXPECT_DOUBLE_EQ(std::stod(m[1]), 400.0);
  ASSERT_TRUE(std::regex_search(svg, m, std::regex("data-x-min=\"([^\"]+)\" data-x-max=\"([^\"]+)\"")));
  const double xlo = std::stod(m[1]), xhi = std::stod(m[2]);
  ASSERT_TRUE(std::regex_search(svg, m, std::regex("class=\"roof\"[^>]*points=\"[^ ]+ ([0-9.]+),")));
  const double kink_px = std::stod(m[1]);
  const double expected = 90 + (std::log10(400.0) - std::log10(xlo)) / (std::log10(xhi) - std::log10(xlo)) * 840;
  EXPECT_NEAR(kink_px, expected, 1e-3);
  EXPECT_NE(svg.find("viewBox=\"0 0 960 540\""), std::string::npos);
  EXPECT_EQ(svg.find("<script"), std::string::npos);
  EXPECT_EQ(svg.find("@import"), std::string::npos);
}

TEST(Plot, CeilingEqualToPeakCoincidesWithRoof) {
  const auto m = build_model(cluster_system(), Mode::SINGLE_NODE, PrecisionMode::FP32,
                             {{"same", CeilingKind::COMPUTATION, 120e12, {}}});
  const auto csv = export_csv(m);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto a = line.find(','), b = line.rfind(',');
    EXPECT_EQ(line.substr(a + 1, b - a - 1), line.substr(b + 1));
  }
}

TEST(Plot, DistributedChartPlacement) {
  const auto m = case_study(2);
  std::vector<RooflinePoint> pts = {ring_point("EWA", ewa_workload(), 16), ring_point("IC", ic_workload(), 16)};
  const auto svg = export_svg(m, pts, kPeak, "nvlink");
  EXPECT_NE(svg.find("data-label=\"EWA\" data-bound=\"communication_bound\""), std::string::npos) << svg;
  EXPECT_NE(svg.find("data-label=\"IC\" data-bound=\"compute_bound\""), std::string::npos);
}

TEST(Plot, EmptyModel) {
  EXPECT_ERROR_KIND(export_plot(RooflineModel{}, {}), ErrorKind::NothingToPlot);
}

// Properties

TEST(RooflineProperties, MinOfFlatAndSlantContinuousMonotone) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> lf(12, 17), lb(8, 12), lc(-2, 8);
  for (int i = 0; i < 10000; ++i) {
    RooflineModel m;
    m.peak_flops = std::pow(10.0, lf(rng));
    m.peak_band = std::pow(10.0, lb(rng));
    const double x = std::pow(10.0, lc(rng)), y = x * 1.5;
    const double b = attained_bound(m, x);
    ASSERT_EQ(b, std::min(m.peak_flops, m.peak_band * x));
    ASSERT_LE(b, attained_bound(m, y));
    const double r = ridge_point(m);
    ASSERT_TRUE(rel_near(attained_bound(m, r), m.peak_flops, 1e-12));
    ASSERT_TRUE(rel_near(attained_bound(m, r * (1 - 1e-9)), m.peak_flops, 1e-8));
    if (x >= r) ASSERT_EQ(b, m.peak_flops);
    else ASSERT_EQ(b, m.peak_band * x);
  }
}

TEST(RooflineProperties, CeilingBoundBelowPeakBound) {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> lf(12, 17), lb(8, 12), lc(-2, 8), frac(0.01, 1.0);
  for (int i = 0; i < 10000; ++i) {
    RooflineModel m;
    m.peak_flops = std::pow(10.0, lf(rng));
    m.peak_band = std::pow(10.0, lb(rng));
    m.ceilings = {{"c", CeilingKind::COMPUTATION, m.peak_flops * frac(rng), {}},
                  {"b", CeilingKind::COMMUNICATION, m.peak_band * frac(rng), {}}};
    const double x = std::pow(10.0, lc(rng));
    const double peak = attained_bound(m, x);
    for (const char* c : {"c", "PEAK"}) {
      for (const char* b : {"b", "PEAK"}) ASSERT_LE(attained_bound(m, x, c, b), peak);
    }
  }
}

TEST(RooflineProperties, ClassifyScaleInvariant) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> lf(12, 17), lb(8, 12), lx(6, 15), lt(6, 12), ls(-6, 6);
  for (int i = 0; i < 10000; ++i) {
    RooflineModel m;
    m.peak_flops = std::pow(10.0, lf(rng));
    m.peak_band = std::pow(10.0, lb(rng));
    const double f = std::pow(10.0, lx(rng)), t = std::pow(10.0, lt(rng));
    const double k = std::pow(2.0, std::round(ls(rng)));  // exact scaling keeps the quotient bit-identical
    ASSERT_EQ(classify(m, make_point("a", f, t)), classify(m, make_point("b", f * k, t * k)));
  }
}

TEST(RooflineProperties, CompressNeverLowersBound) {
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> lf(12, 17), lb(8, 12), lc(-2, 8), fac(1.01, 16);
  for (int i = 0; i < 10000; ++i) {
    RooflineModel m;
    m.peak_flops = std::pow(10.0, lf(rng));
    m.peak_band = std::pow(10.0, lb(rng));
    const auto p = make_point("p", std::pow(10.0, lc(rng)), 1.0);
    const auto q = apply_whatif(m, p, Compress{fac(rng)});
    const double before = attained_bound(m, p.coi), after = attained_bound(m, q.coi);
    ASSERT_GE(after, before);
    ASSERT_EQ(after > before, classify(m, p) == Bound::COMMUNICATION_BOUND);
  }
}
