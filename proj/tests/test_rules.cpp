#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "hpcai/rules.hpp"
#include "support.hpp"

using namespace hpcai;
using namespace hpcai::rules;
using namespace testing_support;

namespace {

RunRecord ic_run(int i = 1) {
  char name[64];
  std::snprintf(name, sizeof name, "runs/image_classification/ic-fp32-16-r%02d.json", i);
  return run_file(name);
}

std::vector<RunRecord> ewa_runs() {
  std::vector<RunRecord> out;
  for (int i = 1; i <= 5; ++i) out.push_back(run_file("runs/extreme_weather_analytics/ewa-fp32-16-r0" +
                                                      std::to_string(i) + ".json"));
  return out;
}

bool has_violation(const std::vector<Violation>& vs, int layer, const std::string& key) {
  return std::any_of(vs.begin(), vs.end(), [&](const Violation& v) {
    return v.layer == layer && v.key == key && v.severity == Severity::ERROR;
  });
}

}  // namespace

TEST(Validate, BatchNormWeightDecayChangeIsRejectedAtHardwareLevel) {
  const auto vs = validate_declaration(run_file("rules/bn_weight_decay_change.json"), ic_reference());
  ASSERT_EQ(vs.size(), 1u);
  EXPECT_TRUE(has_violation(vs, 8, "bn_weight_decay"));
}

TEST(Validate, LearningRatePolicyChangeIsAllowed) {
  EXPECT_TRUE(validate_declaration(run_file("rules/lr_policy_change.json"), ic_reference()).empty());
}

TEST(Validate, AsynchronousTrainingIsRejected) {
  const auto vs = validate_declaration(run_file("rules/async_sgd.json"), ic_reference());
  EXPECT_TRUE(has_violation(vs, 6, "sync_mode"));
  EXPECT_TRUE(has_errors(vs));
}

TEST(Validate, AsynchronousRejectedEvenAtFreeLevel) {
  auto run = run_file("rules/async_sgd.json");
  run.level = BenchLevel::FREE;
  EXPECT_TRUE(has_violation(validate_declaration(run, ic_reference()), 6, "sync_mode"));
}

TEST(Validate, DatasetEpochsAreFixed) {
  auto run = ic_run();
  run.declaration[Layer::ProblemDomain]["epochs"] = "60";
  EXPECT_TRUE(has_violation(validate_declaration(run, ic_reference()), 9, "epochs"));
}

TEST(Validate, CanonicalFormIgnoresCaseAndWhitespace) {
  auto run = ic_run();
  run.declaration[Layer::AIFramework]["framework"] = "  TensorFlow-1.14 ";
  EXPECT_TRUE(validate_declaration(run, ic_reference()).empty());
}

TEST(Validate, ReferenceAgainstItselfIsClean) {
  const auto ref = ic_reference();
  for (auto level : {BenchLevel::HARDWARE, BenchLevel::SYSTEM, BenchLevel::FREE}) {
    auto run = ic_run();
    run.declaration = ref;
    run.level = level;
    EXPECT_TRUE(validate_declaration(run, ref).empty());
  }
}

TEST(Equivalence, FrameworkChangeForbiddenAtHardwareAllowedAtSystem) {
  const auto a = ic_reference();
  auto b = a;
  b[Layer::AIFramework]["framework"] = "pytorch-1.4";
  const auto hw = check_equivalence(a, b, BenchLevel::HARDWARE);
  EXPECT_EQ(hw.layers[4].status, LayerStatus::DIFFERS_FORBIDDEN);
  EXPECT_FALSE(hw.comparable);
  const auto sys = check_equivalence(a, b, BenchLevel::SYSTEM);
  EXPECT_EQ(sys.layers[4].status, LayerStatus::DIFFERS_ALLOWED);
  EXPECT_TRUE(sys.comparable);
  EXPECT_EQ(sys.layers[0].status, LayerStatus::EQUIVALENT);
}

TEST(Equivalence, DifferentWorkloadsAreIncomparable) {
  auto b = ic_reference();
  b[Layer::Workload]["workload"] = "extreme_weather_analytics";
  EXPECT_ERROR_KIND(check_equivalence(ic_reference(), b, BenchLevel::FREE), ErrorKind::IncomparableWorkloads);
}

TEST(LrSchedule, WarmupRampsToScaledRate) {
  const auto s = lr_schedule(0.1, 32, 5, 90, Decay::COSINE);
  EXPECT_DOUBLE_EQ(s.at(0), 0.1);
  EXPECT_DOUBLE_EQ(s.at(5), 3.2);
  EXPECT_NEAR(s.at(2.5), 1.65, 1e-12);
  EXPECT_NEAR(s.at(90), 0.0, 1e-12);
  const auto step = lr_schedule(0.1, 32, 5, 90, Decay::STEP);
  EXPECT_DOUBLE_EQ(step.at(29), 3.2);
  EXPECT_NEAR(step.at(30), 0.32, 1e-12);
  EXPECT_NEAR(step.at(80), 0.0032, 1e-12);
  EXPECT_EQ(step.per_epoch().size(), 91u);
}

TEST(LrSchedule, RejectsBadInputs) {
  EXPECT_ERROR_KIND(lr_schedule(0.0, 2, 1, 10, Decay::NONE), ErrorKind::InvalidSchedule);
  EXPECT_ERROR_KIND(lr_schedule(0.1, 0.5, 1, 10, Decay::NONE), ErrorKind::InvalidSchedule);
  EXPECT_ERROR_KIND(lr_schedule(0.1, 2, 10, 10, Decay::NONE), ErrorKind::InvalidSchedule);
}

TEST(Aggregate, DropsExtremesAndAverages) {
  auto runs = ewa_runs();
  const double epochs[] = {10, 12, 11, 13, 11};
  for (std::size_t i = 0; i < runs.size(); ++i) runs[i].epochs_to_quality = epochs[i];
  const auto a = aggregate_runs(runs, ewa_workload());
  EXPECT_NEAR(a.mean_score.at("epochs_to_quality"), 11.333333333333334, 1e-12);
  EXPECT_EQ(a.retained_runs.size(), 3u);
  EXPECT_EQ(a.dropped_lowest->epochs_to_quality, 10);
  EXPECT_EQ(a.dropped_highest->epochs_to_quality, 13);
  EXPECT_EQ(a.submitted, 5u);
}

TEST(Aggregate, TooFewRuns) {
  std::vector<RunRecord> runs;
  for (int i = 1; i <= 4; ++i) runs.push_back(ic_run(i));
  EXPECT_ERROR_KIND(aggregate_runs(runs, ic_workload()), ErrorKind::InsufficientRuns);
}

TEST(Aggregate, VariationOfTenRuns) {
  std::vector<RunRecord> runs;
  const double m = 88.0;
  for (int i = 1; i <= 10; ++i) {
    auto r = ic_run(i);
    r.epochs_to_quality = i <= 5 ? m + 0.0112 * m : m - 0.0112 * m;
    runs.push_back(r);
  }
  EXPECT_NEAR(aggregate_runs(runs, ic_workload()).variation, 0.0112, 1e-12);
}

TEST(Aggregate, MixedWorkloadsRejected) {
  auto runs = ewa_runs();
  runs[2] = ic_run();
  EXPECT_ERROR_KIND(aggregate_runs(runs, ewa_workload()), ErrorKind::IncomparableWorkloads);
}

TEST(Variation, Examples) {
  EXPECT_DOUBLE_EQ(variation({10, 12}), 1.0 / 11.0);
  EXPECT_EQ(variation({5, 5, 5}), 0.0);
}

TEST(Variation, MatchesNaiveOracle) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> d(1.0, 100.0);
  for (int i = 0; i < 10000; ++i) {
    std::vector<double> xs(2 + i % 9);
    for (auto& x : xs) x = d(rng);
    ASSERT_TRUE(rel_near(variation(xs), population_variation(xs), 1e-9)) << i;
  }
}

TEST(Repeatability, ReportsRawTrials) {
  const auto rep = repeatability_report(ewa_runs());
  EXPECT_EQ(rep.raw.size(), 5u);
  EXPECT_GE(rep.variation, 0.0);
  auto runs = ewa_runs();
  runs[1].scale = 32;
  runs[1].num_ranks = 32;
  runs[1].global_batchsize *= 2;
  EXPECT_ERROR_KIND(repeatability_report(runs), ErrorKind::NotARepetition);
}

TEST(Replicability, ToleranceDecides) {
  const auto a = aggregate_runs(ewa_runs(), ewa_workload());
  auto shifted = [&](double factor) {
    auto runs = ewa_runs();
    for (auto& r : runs) r.samples_per_second_per_rank *= factor;
    return aggregate_runs(runs, ewa_workload());
  };
  EXPECT_TRUE(replicability_check(a, shifted(0.97), 0.05).pass);
  const auto far = replicability_check(a, shifted(0.92), 0.05);
  EXPECT_FALSE(far.pass);
  const auto vf = std::find_if(far.metrics.begin(), far.metrics.end(),
                               [](const MetricDelta& d) { return d.metric == "vflops"; });
  ASSERT_NE(vf, far.metrics.end());
  EXPECT_NEAR(vf->relative_delta, 0.08, 1e-12);
  EXPECT_ERROR_KIND(replicability_check(a, a, -1.0), ErrorKind::InvalidArgument);
}

TEST(Replicability, DifferentSystemsAreNotReplicable) {
  const auto a = aggregate_runs(ewa_runs(), ewa_workload());
  auto runs = ewa_runs();
  for (auto& r : runs) r.system = "other";
  EXPECT_ERROR_KIND(replicability_check(a, aggregate_runs(runs, ewa_workload()), 0.05), ErrorKind::NotReplicable);
}
