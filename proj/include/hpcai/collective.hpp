#pragma once

// Allreduce traffic and time. All four topologies move the bandwidth-optimal
// volume (reduce-scatter + allgather); they differ only in latency terms.

#include <cmath>
#include <string>
#include <string_view>

#include "hpcai/core.hpp"

namespace hpcai::sim {

enum class TopologyKind { RING, DOUBLE_BINARY_TREE, HIERARCHICAL_RING, BUTTERFLY };

inline std::string_view to_string(TopologyKind k) {
  switch (k) {
    case TopologyKind::RING: return "ring";
    case TopologyKind::DOUBLE_BINARY_TREE: return "double_binary_tree";
    case TopologyKind::HIERARCHICAL_RING: return "hierarchical_ring";
    case TopologyKind::BUTTERFLY: return "butterfly";
  }
  return "?";
}

inline std::optional<TopologyKind> parse_topology(std::string_view text) {
  const std::string t = to_lower(text);
  for (auto k : {TopologyKind::RING, TopologyKind::DOUBLE_BINARY_TREE, TopologyKind::HIERARCHICAL_RING,
                 TopologyKind::BUTTERFLY}) {
    if (t == to_string(k)) return k;
  }
  return std::nullopt;
}

struct TopologySpec {
  TopologyKind kind = TopologyKind::RING;
  double per_message_latency = 0.0;  // seconds
  int groups = 1;                    // hierarchical ring only
};

struct Traffic {
  double per_participant = 0.0;  // bytes sent by each participant
  double total = 0.0;            // bytes sent by all participants
};

inline Traffic allreduce_traffic(double message_bytes, int participants, const TopologySpec& /*topology*/) {
  if (participants < 1) throw Error(ErrorKind::InvalidArgument, "allreduce needs at least one participant");
  if (message_bytes < 0.0) throw Error(ErrorKind::InvalidArgument, "message size must be >= 0");
  if (participants == 1) return {0.0, 0.0};
  const double p = participants;
  const double per = 2.0 * (p - 1.0) / p * message_bytes;
  return {per, per * p};
}

inline double allreduce_latency(int participants, const TopologySpec& topology) {
  if (topology.per_message_latency < 0.0) throw Error(ErrorKind::InvalidArgument, "latency must be >= 0");
  if (participants <= 1) return 0.0;
  const double L = topology.per_message_latency;
  switch (topology.kind) {
    case TopologyKind::RING:
      return 2.0 * (participants - 1) * L;
    case TopologyKind::DOUBLE_BINARY_TREE:
    case TopologyKind::BUTTERFLY:
      return 2.0 * std::ceil(std::log2(static_cast<double>(participants))) * L;
    case TopologyKind::HIERARCHICAL_RING: {
      const int g = topology.groups;
      if (g < 1 || participants % g != 0) {
        throw Error(ErrorKind::InvalidArgument, "hierarchical ring: groups (" + std::to_string(g) +
                                                    ") must divide the participant count (" +
                                                    std::to_string(participants) + ")");
      }
      const int local = participants / g;
      return 2.0 * (local - 1) * L + 2.0 * (g - 1) * L;
    }
  }
  return 0.0;
}

inline double allreduce_time(double message_bytes, int participants, const TopologySpec& topology,
                             double bandwidth) {
  if (!(bandwidth > 0.0)) throw Error(ErrorKind::DegenerateBand, "allreduce bandwidth must be > 0");
  const Traffic t = allreduce_traffic(message_bytes, participants, topology);
  return t.per_participant / bandwidth + allreduce_latency(participants, topology);
}

}  // namespace hpcai::sim
