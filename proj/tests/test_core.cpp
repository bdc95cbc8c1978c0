#include <gtest/gtest.h>

#include "hpcai/core.hpp"
#include "hpcai/json_io.hpp"
#include "support.hpp"

using namespace hpcai;
using namespace testing_support;

TEST(Peaks, V100NodeAndSystem) {
  const auto s = cluster_system();
  const auto fp32 = derive_peaks(s, PrecisionMode::FP32);
  EXPECT_DOUBLE_EQ(fp32.single_node, 120e12);
  EXPECT_DOUBLE_EQ(fp32.distributed, 960e12);
  EXPECT_DOUBLE_EQ(derive_peaks(s, PrecisionMode::MIXED).distributed, 7680e12);
  EXPECT_DOUBLE_EQ(derive_peaks(roofline_system(), PrecisionMode::MIXED).single_node, 1040e12);
  EXPECT_DOUBLE_EQ(derive_peaks(roofline_system(), PrecisionMode::MIXED).distributed, 8320e12);
}

TEST(Peaks, UndeclaredPrecision) {
  EXPECT_ERROR_KIND(derive_peaks(cluster_system(), PrecisionMode::INT8), ErrorKind::MissingPrecision);
}

TEST(Peaks, SingleAcceleratorSystem) {
  auto s = cluster_system();
  s.num_nodes = 1;
  s.node.accelerators_per_node = 1;
  const auto p = derive_peaks(s, PrecisionMode::FP32);
  EXPECT_EQ(p.single_node, p.distributed);
}

TEST(Schema, FixturesRoundTrip) {
  const auto s = cluster_system();
  EXPECT_EQ(parse_system(to_json(s)), s);
  const auto w = ic_workload();
  EXPECT_EQ(parse_workload(to_json(w)), w);
  const auto r = run_file("runs/image_classification/ic-fp32-16-r01.json");
  EXPECT_EQ(parse_run(to_json(r)), r);
  const auto d = ic_reference();
  EXPECT_EQ(parse_declaration(to_json(d)), d);
}

TEST(Schema, UnknownFieldStrictVersusLenient) {
  json j = to_json(ic_workload());
  j["colour"] = "blue";
  EXPECT_ERROR_KIND(parse_workload(j), ErrorKind::SchemaError);
  EXPECT_NO_THROW(parse_workload(j, ParseOptions{true}));
}

TEST(Schema, MissingField) {
  json j = to_json(ic_workload());
  j.erase("flops_per_sample");
  EXPECT_ERROR_KIND(parse_workload(j), ErrorKind::SchemaError);
}

TEST(Schema, EffectiveBandwidthDefaultsToNominal) {
  json j = to_json(cluster_system());
  j.erase("inter_node_bandwidth_effective");
  EXPECT_DOUBLE_EQ(parse_system(j).inter_node_bandwidth_effective, 10e9 / 8);
}

TEST(Schema, EffectiveAboveNominalRejected) {
  json j = to_json(cluster_system());
  j["inter_node_bandwidth_effective"] = 2e9;
  EXPECT_ERROR_KIND(parse_system(j), ErrorKind::SchemaError);
}

TEST(Schema, QualityAboveOne) {
  auto r = run_file("runs/image_classification/ic-fp32-16-r01.json");
  r.achieved_quality = 1.5;
  EXPECT_ERROR_KIND(validate(r), ErrorKind::SchemaError);
}

TEST(Schema, DeclarationNeedsSyncMode) {
  auto d = ic_reference();
  d[Layer::ProgrammingModel].erase("sync_mode");
  EXPECT_ERROR_KIND(validate(d), ErrorKind::SchemaError);
}

TEST(Schema, DeclarationValuesMustBeScalars) {
  json j = to_json(ic_reference());
  j["hyper_parameters"]["batchsize"] = json::array({1, 2});
  EXPECT_ERROR_KIND(parse_declaration(j), ErrorKind::SchemaError);
}

TEST(Schema, RunScaleBeyondSystem) {
  auto r = run_file("runs/image_classification/ic-fp32-64-r01.json");
  r.scale = 65;
  EXPECT_ERROR_KIND(validate(r, cluster_system()), ErrorKind::SchemaError);
}

TEST(Schema, RunSystemNameMismatch) {
  const auto r = run_file("runs/image_classification/ic-fp32-64-r01.json");
  EXPECT_ERROR_KIND(validate(r, roofline_system()), ErrorKind::SchemaError);
}

TEST(Parse, MalformedJsonReportsPosition) {
  try {
    parse_json_text("{\n  \"a\": 1,\n  \"b\": ]\n}", "broken.json");
    FAIL() << "expected ParseError";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ParseError);
    const std::string msg = e.what();
    EXPECT_NE(msg.find("broken.json:3:"), std::string::npos) << msg;
    EXPECT_NE(msg.find("offset"), std::string::npos) << msg;
  }
}

TEST(Enums, CaseInsensitiveParsing) {
  EXPECT_EQ(parse_precision("MIXED"), PrecisionMode::MIXED);
  EXPECT_EQ(parse_level("Hardware"), BenchLevel::HARDWARE);
  EXPECT_FALSE(parse_precision("fp64").has_value());
}

TEST(Units, BitsToBytes) { EXPECT_DOUBLE_EQ(units::bits_to_bytes_per_s(10e9), 1.25e9); }
