#include <gtest/gtest.h>

#include <random>

#include "hpcai/metrics.hpp"
#include "support.hpp"

using namespace hpcai;
using namespace hpcai::metrics;
using namespace testing_support;

TEST(Penalty, EqualsOneAtTarget) {
  for (int n = 1; n <= 12; ++n) EXPECT_DOUBLE_EQ(penalty_coefficient(0.763, 0.763, n), 1.0);
}

TEST(Penalty, GoldenValues) {
  // Frozen from the repeated-multiplication oracle.
  EXPECT_NEAR(penalty_coefficient(0.9, 1.0, 10), 0.34867844010000015, 1e-12);
  EXPECT_NEAR(penalty_coefficient(0.99, 1.0, 5), 0.9509900498999999, 1e-12);
  EXPECT_NEAR(penalty_coefficient(0.9, 1.0, 10), power_by_multiplication(0.9, 10), 1e-12);
}

TEST(Penalty, AwardsAboveTarget) { EXPECT_GT(penalty_coefficient(0.77, 0.763, 5), 1.0); }

TEST(Penalty, Errors) {
  EXPECT_ERROR_KIND(penalty_coefficient(0.5, 0.0, 5), ErrorKind::DegenerateTarget);
  EXPECT_ERROR_KIND(penalty_coefficient(0.5, 0.7, 0), ErrorKind::InvalidArgument);
}

TEST(Vflops, UnitAndZero) {
  EXPECT_DOUBLE_EQ(vflops(100e12, 0.763, 0.763, 5), 100e12);
  EXPECT_DOUBLE_EQ(vflops(100e12, 0.0, 0.763, 5), 0.0);
}

TEST(Vflops, ImpliedQualityRoundTrip) {
  const double q = implied_achieved_quality(939e12, 642e12, 0.763, 5);
  EXPECT_NEAR(q, 0.7071286364120211, 1e-9);
  EXPECT_NEAR(vflops(939e12, q, 0.763, 5), 642e12, 1e3);
  EXPECT_NEAR(penalty_coefficient(q, 0.763, 5), 0.6837060702875402, 1e-12);
}

TEST(Vflops, PerWatt) {
  EXPECT_DOUBLE_EQ(vflops_per_watt(642e12, 1e5), 6.42e9);
  EXPECT_DOUBLE_EQ(vflops_per_watt(0.0, 300.0), 0.0);
  EXPECT_DOUBLE_EQ(vflops_per_watt(5e12, 1.0), 5e12);
  EXPECT_ERROR_KIND(vflops_per_watt(1.0, 0.0), ErrorKind::InvalidPower);
}

TEST(Throughput, GoldenValues) {
  EXPECT_NEAR(throughput_flops(46.0 / 8, 8, 691e9), 31.786e12, 1e6);
  EXPECT_NEAR(throughput_flops(46.0 / 8, 8, 691e9) / 31e12, 1.0, 0.03);
  EXPECT_NEAR(throughput_flops(328, 8, 22.1e9) / 58e12, 1.0, 0.05);
  EXPECT_DOUBLE_EQ(throughput_flops(0, 8, 1e9), 0.0);
}

TEST(Profile, FlopsPerSample) {
  EXPECT_NEAR(flops_per_sample_from_profile(345.66e12, 500), 691.32e9, 0.01e9);
  EXPECT_DOUBLE_EQ(flops_per_sample_from_profile(1e12, 4), 2.5e11);
  EXPECT_DOUBLE_EQ(flops_per_sample_from_profile(7e9, 1), 7e9);
  EXPECT_ERROR_KIND(flops_per_sample_from_profile(1e12, 0), ErrorKind::EmptySample);
}

TEST(Profile, ImageClassificationRowFlagsMismatch) {
  const auto c = check_declared_flops_per_sample(2877.06e12, 12800, 23e9);
  EXPECT_TRUE(c.mismatch);
  EXPECT_NEAR(c.computed, 224.77e9, 0.01e9);
  EXPECT_DOUBLE_EQ(c.declared, 23e9);
  EXPECT_FALSE(check_declared_flops_per_sample(345.66e12, 500, 691e9).mismatch);
}

TEST(ScalingRatio, GoldenValues) {
  EXPECT_NEAR(scaling_ratio(691e9, 41e6), 16.85, 0.005);
  EXPECT_NEAR(scaling_ratio(2944e9, 25e6), 117.76, 0.005);
  EXPECT_DOUBLE_EQ(scaling_ratio(1e9, 1e6), 1.0);
  EXPECT_ERROR_KIND(scaling_ratio(1e9, 0), ErrorKind::DegenerateComm);
}

TEST(Efficiency, Examples) {
  EXPECT_DOUBLE_EQ(parallel_efficiency(5e12, 8, 10e12, 16), 1.0);
  EXPECT_NEAR(parallel_efficiency(100, 8, 182, 16), 0.91, 1e-12);
  EXPECT_DOUBLE_EQ(parallel_efficiency(7e12, 32, 7e12, 32), 1.0);
  EXPECT_ERROR_KIND(parallel_efficiency(1, 16, 1, 8), ErrorKind::InvalidScaleOrder);
}

TEST(ScoreRun, FixtureRun) {
  const auto w = ic_workload();
  const auto r = run_file("runs/image_classification/ic-mixed-64-r01.json");
  const auto s = score_run(r, w);
  EXPECT_NEAR(s.flops, 939e12, 1e3);
  EXPECT_NEAR(s.vflops / 1e12, 642.0, 642.0 * 0.01);
  ASSERT_TRUE(s.vflops_per_watt.has_value());
  EXPECT_DOUBLE_EQ(*s.vflops_per_watt, s.vflops / *r.average_power);
  EXPECT_DOUBLE_EQ(s.time_to_quality, r.wall_time);
}

TEST(ScoreRun, MissingPowerLeavesPerWattEmpty) {
  const auto s = score_run(run_file("runs/image_classification/ic-fp32-08-r01.json"), ic_workload());
  EXPECT_FALSE(s.vflops_per_watt.has_value());
  EXPECT_FALSE(s.flops_per_watt.has_value());
}

TEST(ScoreRun, WrongWorkload) {
  EXPECT_ERROR_KIND(score_run(run_file("runs/image_classification/ic-mixed-64-r01.json"), ewa_workload()),
                    ErrorKind::IncomparableWorkloads);
}

// Properties over random inputs.

TEST(MetricsProperties, PenaltyMonotonicity) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> q(0.05, 1.0);
  std::uniform_int_distribution<int> nd(1, 12);
  for (int i = 0; i < 10000; ++i) {
    const double a = q(rng), b = q(rng), t = q(rng);
    const int n = nd(rng);
    if (a == b) continue;
    const double lo = std::min(a, b), hi = std::max(a, b);
    ASSERT_LT(penalty_coefficient(lo, t, n), penalty_coefficient(hi, t, n));
    ASSERT_GT(penalty_coefficient(t, lo, n), penalty_coefficient(t, hi, n));
    ASSERT_GT(penalty_coefficient(lo, hi, n), penalty_coefficient(lo, hi, n + 1));
  }
}

TEST(MetricsProperties, EqualFlopsRanksByQuality) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> q(0.1, 1.0), f(1e12, 1e15);
  for (int i = 0; i < 10000; ++i) {
    const double flops = f(rng), a = q(rng), b = q(rng);
    ASSERT_EQ(vflops(flops, a, 0.763, 5) < vflops(flops, b, 0.763, 5), a < b);
  }
}

TEST(MetricsProperties, ThroughputProfileIdentity) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> n(0.1, 1000), c(1e6, 1e12);
  std::uniform_int_distribution<int> r(1, 512), k(1, 100000);
  for (int i = 0; i < 10000; ++i) {
    const double N = n(rng), C = c(rng);
    const int R = r(rng), K = k(rng);
    ASSERT_TRUE(rel_near(throughput_flops(N, R, flops_per_sample_from_profile(C * K, K)), N * R * C, 1e-12));
  }
}

TEST(MetricsProperties, Deterministic) {
  EXPECT_EQ(vflops(939e12, 0.7071, 0.763, 5), vflops(939e12, 0.7071, 0.763, 5));
}
