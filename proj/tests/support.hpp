#pragma once

// Shared fixture loaders and independent oracles for the test suites.

#include <cmath>
#include <string>
#include <vector>

#include "hpcai/json_io.hpp"

namespace testing_support {

inline std::string fixture(const std::string& rel) { return std::string(HPCAI_FIXTURES) + "/" + rel; }

inline hpcai::SystemConfig cluster_system() {
  return hpcai::parse_system(hpcai::read_json_file(fixture("systems/v100_cluster.json")));
}
inline hpcai::SystemConfig roofline_system() {
  return hpcai::parse_system(hpcai::read_json_file(fixture("systems/roofline.json")));
}
inline hpcai::WorkloadSpec ic_workload() {
  return hpcai::parse_workload(hpcai::read_json_file(fixture("workloads/image_classification.json")));
}
inline hpcai::WorkloadSpec ewa_workload() {
  return hpcai::parse_workload(hpcai::read_json_file(fixture("workloads/extreme_weather_analytics.json")));
}
inline hpcai::NineLayerDeclaration ic_reference() {
  return hpcai::parse_declaration(hpcai::read_json_file(fixture("declarations/image_classification.json")));
}
inline hpcai::RunRecord run_file(const std::string& rel) {
  return hpcai::parse_run(hpcai::read_json_file(fixture(rel)));
}

// Oracles: deliberately naive restatements, not calls into the library.

inline double power_by_multiplication(double base, int n) {
  double out = 1.0;
  for (int i = 0; i < n; ++i) out *= base;
  return out;
}

/// Ring reduce-scatter then allgather, one chunk of M/p per step per rank.
inline double ring_bytes_per_rank(double message, int p) {
  if (p == 1) return 0.0;
  const double chunk = message / p;
  double sent = 0.0;
  for (int step = 0; step < p - 1; ++step) sent += chunk;
  for (int step = 0; step < p - 1; ++step) sent += chunk;
  return sent;
}

inline double population_variation(const std::vector<double>& xs) {
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size())) / mean;
}

inline bool rel_near(double a, double b, double rel) { return std::fabs(a - b) <= rel * std::fabs(b); }

}  // namespace testing_support

#define EXPECT_ERROR_KIND(stmt, expected_kind)                                    \
  do {                                                                            \
    try {                                                                         \
      stmt;                                                                       \
      ADD_FAILURE() << "expected " << hpcai::to_string(expected_kind);            \
    } catch (const hpcai::Error& e_) {                                            \
      EXPECT_EQ(e_.kind(), expected_kind) << e_.what();                           \
    }                                                                             \
  } while (0)
