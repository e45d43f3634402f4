#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "asura/cluster_map.hpp"
#include "asura/prng.hpp"

namespace asura::bench {

enum class Algo { asura, ring, straw };

std::string_view algo_name(Algo algo);
bool parse_algo(std::string_view name, Algo& out);

// Synthetic datum ids: sequential indexes pushed through the shared mixer so
// corpora are reproducible from (seed, trial) yet uncorrelated with any
// placement hash.
inline std::uint64_t corpus_salt(std::uint64_t seed, std::uint64_t trial) {
  return seed_from(seed, trial).value;
}
inline std::uint64_t corpus_id(std::uint64_t index, std::uint64_t salt) {
  return hash_value(index, salt);
}

// max over nodes of |count - expected| / expected, as a percentage.
double max_variability_percent(std::span<const std::uint64_t> counts, double expected);

double mean_of(std::span<const double> values);
double stddev_of(std::span<const double> values);   // population
double median_of(std::span<const double> values);
// Coefficient of determination of the least-squares line through (x, y).
double r_squared_linear(std::span<const double> xs, std::span<const double> ys);

struct UniformityReport {
  Algo algo = Algo::asura;
  std::size_t nodes = 0;
  std::uint64_t virtual_nodes = 0;  // 0 for non-ring algorithms
  std::uint64_t data_per_node = 0;
  std::size_t trials = 0;
  std::vector<double> per_trial;  // max variability % of each trial
  double max_variability_percent = 0.0;  // worst trial
  double mean = 0.0;
  double stddev = 0.0;
  double median = 0.0;
};

// Places nodes*data_per_node synthetic ids per trial over equal-capacity
// nodes and reports each trial's max variability.
UniformityReport run_uniformity(Algo algo, std::size_t nodes, std::uint64_t virtual_nodes,
                                std::uint64_t data_per_node, std::size_t trials,
                                std::uint64_t seed);

enum class ChurnKind { add, remove };

struct ChurnEvent {
  ChurnKind kind = ChurnKind::add;
  NodeSpec spec;  // remove events use spec.id only
};

struct ChurnReport {
  Algo algo = Algo::asura;
  ChurnKind event = ChurnKind::add;
  std::size_t nodes_before = 0;
  std::size_t nodes_after = 0;
  std::uint64_t total_count = 0;
  std::uint64_t moved_count = 0;
  double moved_fraction = 0.0;
  // Moves that break placement optimality: on add, a move not landing on the
  // added node; on remove, a move of data that was not on the removed node.
  std::uint64_t misdirected_count = 0;
};

// Replays each event against a fixed id corpus, comparing every placement
// before and after. Ring and straw ignore capacities (uniform weights).
std::vector<ChurnReport> run_churn(Algo algo, std::span<const NodeSpec> initial,
                                   std::span<const ChurnEvent> events,
                                   std::uint64_t ids_count, std::uint64_t virtual_nodes,
                                   std::uint64_t seed);

struct DrawReport {
  double n = 0.0;  // coverage extent of the measured map
  double h = 0.0;  // hole length
  std::uint64_t ids = 0;
  double measured_mean_draws = 0.0;
  double predicted = 0.0;       // expected_draws(n, h, 16, 2)
  double relative_error = 0.0;  // |measured - predicted| / predicted
};

// Builds node_count unit nodes, knocks holes into the interior by removing
// round(hole_fraction * node_count) of them, and measures the mean raw-draw
// count per placement against the analytic prediction.
DrawReport run_draw_count(std::size_t node_count, double hole_fraction,
                          std::uint64_t ids_count, std::uint64_t seed);

struct ScalingPoint {
  Algo algo = Algo::asura;
  std::size_t nodes = 0;
  std::uint64_t lookups = 0;
  double mean_ops = 0.0;      // draws (asura), probes (ring), straws (straw)
  std::uint64_t max_ops = 0;
  double ns_per_lookup = 0.0;
};

enum class Growth { constant, logarithmic, linear };

struct ScalingFit {
  Algo algo = Algo::asura;
  Growth growth = Growth::constant;
  double r_squared_vs_n = 0.0;      // ops against node count
  double r_squared_vs_log = 0.0;    // ops against log2(points searched)
};

struct ScalingReport {
  std::uint64_t virtual_nodes = 0;
  std::vector<ScalingPoint> points;
  std::vector<ScalingFit> fits;  // one per algorithm present
};

// Sweeps node counts per algorithm, recording internal op counts (the
// machine-independent cost signal) and wall time per lookup (sanity only).
ScalingReport run_scaling(std::span<const Algo> algos, std::span<const std::size_t> node_counts,
                          std::uint64_t lookups_per_point, std::uint64_t virtual_nodes,
                          std::uint64_t seed);

// Distributes string keys "key-0".."key-(keys-1)" over equal simulated
// stores; the in-process stand-in for a networked shard test.
UniformityReport run_shard_sim(Algo algo, std::size_t nodes, std::uint64_t keys,
                               std::uint64_t virtual_nodes);

// CSV emitters, one record per measurement point, headers included.
// Formatting is byte-deterministic; scaling optionally drops the wall-time
// column so byte comparisons exclude the only machine-dependent field.
std::string uniformity_csv(const UniformityReport& report);
std::string churn_csv(std::span<const ChurnReport> reports);
std::string draws_csv(std::span<const DrawReport> reports);
std::string scaling_csv(const ScalingReport& report, bool with_time = true);

}  // namespace asura::bench
