#include "asura/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>

#include "asura/core.hpp"
#include "asura/error.hpp"
#include "asura/real_text.hpp"
#include "asura/ring.hpp"
#include "asura/straw.hpp"

namespace asura::bench {

namespace {

std::vector<NodeId> iota_ids(std::size_t n) {
  std::vector<NodeId> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = i;
  return ids;
}

std::vector<NodeSpec> unit_specs(std::size_t n) {
  std::vector<NodeSpec> specs(n);
  for (std::size_t i = 0; i < n; ++i) specs[i] = {i, 1.0};
  return specs;
}

std::vector<NodeId> spec_ids(std::span<const NodeSpec> specs) {
  std::vector<NodeId> ids;
  ids.reserve(specs.size());
  for (const NodeSpec& spec : specs) ids.push_back(spec.id);
  return ids;
}

// Volatile so stores into it are observable: lookups feeding it cannot be
// optimized out of the timed scaling loop.
volatile std::uint64_t timing_sink = 0;

}  // namespace

std::string_view algo_name(Algo algo) {
  switch (algo) {
    case Algo::asura: return "asura";
    case Algo::ring: return "ring";
    case Algo::straw: return "straw";
  }
  return "unknown";
}

bool parse_algo(std::string_view name, Algo& out) {
  if (name == "asura") out = Algo::asura;
  else if (name == "ring") out = Algo::ring;
  else if (name == "straw") out = Algo::straw;
  else return false;
  return true;
}

double max_variability_percent(std::span<const std::uint64_t> counts, double expected) {
  if (!(expected > 0.0))
    fail(errc::invalid_argument, "expected count per node must be positive");
  double worst = 0.0;
  for (std::uint64_t count : counts)
    worst = std::max(worst, std::abs(static_cast<double>(count) - expected) / expected);
  return worst * 100.0;
}

double mean_of(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double stddev_of(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  double m = mean_of(values);
  double acc = 0.0;
  for (double v : values) acc += (v - m) * (v - m);
  return std::sqrt(acc / static_cast<double>(values.size()));
}

double median_of(std::span<const double> values) {
  if (values.empty()) return 0.0;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::size_t mid = sorted.size() / 2;
  return sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
}

double r_squared_linear(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size())
    fail(errc::invalid_argument, "regression inputs differ in length");
  if (xs.size() < 2) return 1.0;
  double mx = mean_of(xs), my = mean_of(ys);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (syy == 0.0) return 1.0;  // constant data: any line through the mean fits
  if (sxx == 0.0) return 0.0;
  return (sxy * sxy) / (sxx * syy);
}

UniformityReport run_uniformity(Algo algo, std::size_t nodes, std::uint64_t virtual_nodes,
                                std::uint64_t data_per_node, std::size_t trials,
                                std::uint64_t seed) {
  if (nodes < 1 || data_per_node < 1 || trials < 1)
    fail(errc::invalid_argument, "uniformity run needs nodes, data and trials >= 1");
  UniformityReport report;
  report.algo = algo;
  report.nodes = nodes;
  report.virtual_nodes = algo == Algo::ring ? virtual_nodes : 0;
  report.data_per_node = data_per_node;
  report.trials = trials;

  const std::vector<NodeId> ids = iota_ids(nodes);
  std::optional<ClusterMap> map;
  std::optional<HashRing> ring;
  std::optional<StrawSet> straw;
  switch (algo) {
    case Algo::asura: {
      auto specs = unit_specs(nodes);
      map.emplace(ClusterMap::build(1.0, specs));
      break;
    }
    case Algo::ring: ring.emplace(ids, virtual_nodes); break;
    case Algo::straw: straw.emplace(ids); break;
  }

  const std::uint64_t total = static_cast<std::uint64_t>(nodes) * data_per_node;
  std::vector<std::uint64_t> counts(nodes);
  for (std::size_t trial = 0; trial < trials; ++trial) {
    const std::uint64_t salt = corpus_salt(seed, trial);
    std::fill(counts.begin(), counts.end(), 0);
    switch (algo) {
      case Algo::asura: {
        const std::uint64_t max_plus_1 = map->max_segment_number_plus_1();
        for (std::uint64_t i = 0; i < total; ++i) {
          AsuraNumberSource src(corpus_id(i, salt), max_plus_1);
          ++counts[asura_lookup_with(*map, src).node];
        }
        break;
      }
      case Algo::ring:
        for (std::uint64_t i = 0; i < total; ++i) ++counts[ring->lookup(corpus_id(i, salt))];
        break;
      case Algo::straw:
        for (std::uint64_t i = 0; i < total; ++i) ++counts[straw->lookup(corpus_id(i, salt))];
        break;
    }
    report.per_trial.push_back(
        max_variability_percent(counts, static_cast<double>(data_per_node)));
  }
  report.max_variability_percent =
      *std::max_element(report.per_trial.begin(), report.per_trial.end());
  report.mean = mean_of(report.per_trial);
  report.stddev = stddev_of(report.per_trial);
  report.median = median_of(report.per_trial);
  return report;
}

std::vector<ChurnReport> run_churn(Algo algo, std::span<const NodeSpec> initial,
                                   std::span<const ChurnEvent> events,
                                   std::uint64_t ids_count, std::uint64_t virtual_nodes,
                                   std::uint64_t seed) {
  if (initial.empty()) fail(errc::empty_map, "churn run needs initial nodes");
  if (ids_count < 1) fail(errc::invalid_argument, "churn run needs at least one id");

  std::vector<NodeSpec> specs(initial.begin(), initial.end());
  ClusterMap map = ClusterMap::build(1.0, specs);  // validates duplicates/capacities
  const std::uint64_t salt = corpus_salt(seed, 0);
  std::vector<ChurnReport> reports;
  reports.reserve(events.size());

  for (const ChurnEvent& event : events) {
    std::vector<NodeSpec> next_specs = specs;
    NodeId changed = event.spec.id;
    if (event.kind == ChurnKind::add) {
      next_specs.push_back(event.spec);
    } else {
      auto it = std::find_if(next_specs.begin(), next_specs.end(),
                             [&](const NodeSpec& s) { return s.id == changed; });
      if (it == next_specs.end())
        fail(errc::unknown_node, "churn event removes a node not in the cluster");
      next_specs.erase(it);
      if (next_specs.empty()) fail(errc::empty_map, "churn event empties the cluster");
    }

    ChurnReport rep;
    rep.algo = algo;
    rep.event = event.kind;
    rep.nodes_before = specs.size();
    rep.nodes_after = next_specs.size();
    rep.total_count = ids_count;

    auto count_moves = [&](auto&& before, auto&& after) {
      for (std::uint64_t i = 0; i < ids_count; ++i) {
        const std::uint64_t id = corpus_id(i, salt);
        NodeId owner_before = before(id);
        NodeId owner_after = after(id);
        if (owner_before == owner_after) continue;
        ++rep.moved_count;
        bool expected_move = event.kind == ChurnKind::add ? owner_after == changed
                                                          : owner_before == changed;
        if (!expected_move) ++rep.misdirected_count;
      }
    };

    ClusterMap next_map(1.0);
    switch (algo) {
      case Algo::asura: {
        next_map = event.kind == ChurnKind::add ? map.add_node(event.spec)
                                                : map.remove_node(changed);
        count_moves([&](std::uint64_t id) { return asura_lookup(id, map).node; },
                    [&](std::uint64_t id) { return asura_lookup(id, next_map).node; });
        map = next_map;
        break;
      }
      case Algo::ring: {
        HashRing before(spec_ids(specs), virtual_nodes);
        HashRing after(spec_ids(next_specs), virtual_nodes);
        count_moves([&](std::uint64_t id) { return before.lookup(id); },
                    [&](std::uint64_t id) { return after.lookup(id); });
        break;
      }
      case Algo::straw: {
        StrawSet before(spec_ids(specs));
        StrawSet after(spec_ids(next_specs));
        count_moves([&](std::uint64_t id) { return before.lookup(id); },
                    [&](std::uint64_t id) { return after.lookup(id); });
        break;
      }
    }
    rep.moved_fraction =
        static_cast<double>(rep.moved_count) / static_cast<double>(rep.total_count);
    reports.push_back(std::move(rep));
    specs = std::move(next_specs);
  }
  return reports;
}

DrawReport run_draw_count(std::size_t node_count, double hole_fraction,
                          std::uint64_t ids_count, std::uint64_t seed) {
  if (node_count < 1 || ids_count < 1)
    fail(errc::invalid_argument, "draw-count run needs nodes and ids >= 1");
  if (!(hole_fraction >= 0.0) || hole_fraction > 0.9)
    fail(errc::invalid_argument, "hole fraction must lie in [0, 0.9]");
  const auto holes =
      static_cast<std::size_t>(std::llround(hole_fraction * static_cast<double>(node_count)));
  if (holes > 0 && node_count < holes + 2)
    fail(errc::invalid_argument, "too few nodes to carry the requested holes");

  auto specs = unit_specs(node_count);
  ClusterMap map = ClusterMap::build(1.0, specs);
  // Unit capacities put node i on segment i; removing interior nodes knocks
  // holes into the line without shrinking its extent.
  for (std::size_t j = 0; j < holes; ++j)
    map = map.remove_node(1 + j * (node_count - 2) / holes);

  const std::uint64_t salt = corpus_salt(seed, 0);
  const std::uint64_t max_plus_1 = map.max_segment_number_plus_1();
  std::uint64_t draws = 0;
  for (std::uint64_t i = 0; i < ids_count; ++i) {
    AsuraNumberSource src(corpus_id(i, salt), max_plus_1);
    asura_lookup_with(map, src);
    draws += src.raw_draw_count();
  }

  DrawReport report;
  report.n = map.coverage_extent();
  report.h = map.hole_length();
  report.ids = ids_count;
  report.measured_mean_draws = static_cast<double>(draws) / static_cast<double>(ids_count);
  report.predicted = expected_draws(report.n, report.h, kDefaultMaximumRandomNumber, 2.0);
  report.relative_error =
      std::abs(report.measured_mean_draws - report.predicted) / report.predicted;
  return report;
}

ScalingReport run_scaling(std::span<const Algo> algos, std::span<const std::size_t> node_counts,
                          std::uint64_t lookups_per_point, std::uint64_t virtual_nodes,
                          std::uint64_t seed) {
  if (algos.empty() || node_counts.empty() || lookups_per_point < 1)
    fail(errc::invalid_argument, "scaling run needs algos, node counts and lookups");
  if (!std::is_sorted(node_counts.begin(), node_counts.end()))
    fail(errc::invalid_argument, "node counts must ascend");

  ScalingReport report;
  report.virtual_nodes = virtual_nodes;
  for (Algo algo : algos) {
    std::vector<double> xs, ys, log_xs;
    for (std::size_t nodes : node_counts) {
      const std::vector<NodeId> ids = iota_ids(nodes);
      std::optional<ClusterMap> map;
      std::optional<HashRing> ring;
      std::optional<StrawSet> straw;
      switch (algo) {
        case Algo::asura: {
          auto specs = unit_specs(nodes);
          map.emplace(ClusterMap::build(1.0, specs));
          break;
        }
        case Algo::ring: ring.emplace(ids, virtual_nodes); break;
        case Algo::straw: straw.emplace(ids); break;
      }

      const std::uint64_t salt = corpus_salt(seed, nodes);
      std::uint64_t ops_total = 0, ops_max = 0, sink = 0;
      const auto started = std::chrono::steady_clock::now();
      for (std::uint64_t i = 0; i < lookups_per_point; ++i) {
        const std::uint64_t id = corpus_id(i, salt);
        std::uint64_t ops = 0;
        switch (algo) {
          case Algo::asura: {
            AsuraNumberSource src(id, map->max_segment_number_plus_1());
            sink += asura_lookup_with(*map, src).node;
            ops = src.raw_draw_count();
            break;
          }
          case Algo::ring: sink += ring->lookup_counting(id, ops); break;
          case Algo::straw:
            sink += straw->lookup(id);
            ops = nodes;  // straws drawn by the argmax scan
            break;
        }
        ops_total += ops;
        ops_max = std::max(ops_max, ops);
      }
      const auto elapsed = std::chrono::steady_clock::now() - started;
      timing_sink = timing_sink + sink;  // keeps the timed lookups observable

      ScalingPoint point;
      point.algo = algo;
      point.nodes = nodes;
      point.lookups = lookups_per_point;
      point.mean_ops =
          static_cast<double>(ops_total) / static_cast<double>(lookups_per_point);
      point.max_ops = ops_max;
      point.ns_per_lookup =
          static_cast<double>(
              std::chrono::duration_cast<std::chrono::nanoseconds>(elapsed).count()) /
          static_cast<double>(lookups_per_point);
      report.points.push_back(point);

      const double searched =
          static_cast<double>(nodes) *
          (algo == Algo::ring ? static_cast<double>(virtual_nodes) : 1.0);
      xs.push_back(static_cast<double>(nodes));
      log_xs.push_back(std::log2(searched));
      ys.push_back(point.mean_ops);
    }

    ScalingFit fit;
    fit.algo = algo;
    fit.r_squared_vs_n = r_squared_linear(xs, ys);
    fit.r_squared_vs_log = r_squared_linear(log_xs, ys);
    const double spread =
        *std::max_element(ys.begin(), ys.end()) - *std::min_element(ys.begin(), ys.end());
    if (spread <= 0.25 * mean_of(ys))
      fit.growth = Growth::constant;
    else
      fit.growth = fit.r_squared_vs_n >= fit.r_squared_vs_log ? Growth::linear
                                                              : Growth::logarithmic;
    report.fits.push_back(fit);
  }
  return report;
}

UniformityReport run_shard_sim(Algo algo, std::size_t nodes, std::uint64_t keys,
                               std::uint64_t virtual_nodes) {
  if (nodes < 1 || keys < 1)
    fail(errc::invalid_argument, "shard sim needs nodes and keys >= 1");
  UniformityReport report;
  report.algo = algo;
  report.nodes = nodes;
  report.virtual_nodes = algo == Algo::ring ? virtual_nodes : 0;
  report.data_per_node = keys / nodes;
  report.trials = 1;

  const std::vector<NodeId> ids = iota_ids(nodes);
  std::optional<ClusterMap> map;
  std::optional<HashRing> ring;
  std::optional<StrawSet> straw;
  switch (algo) {
    case Algo::asura: {
      auto specs = unit_specs(nodes);
      map.emplace(ClusterMap::build(1.0, specs));
      break;
    }
    case Algo::ring: ring.emplace(ids, virtual_nodes); break;
    case Algo::straw: straw.emplace(ids); break;
  }

  std::vector<std::uint64_t> counts(nodes);
  std::string key;
  for (std::uint64_t i = 0; i < keys; ++i) {
    key = "key-" + std::to_string(i);
    const std::uint64_t id = key_to_id(key);
    switch (algo) {
      case Algo::asura: ++counts[asura_lookup(id, *map).node]; break;
      case Algo::ring: ++counts[ring->lookup(id)]; break;
      case Algo::straw: ++counts[straw->lookup(id)]; break;
    }
  }
  report.per_trial.push_back(max_variability_percent(
      counts, static_cast<double>(keys) / static_cast<double>(nodes)));
  report.max_variability_percent = report.per_trial.front();
  report.mean = report.per_trial.front();
  report.stddev = 0.0;
  report.median = report.per_trial.front();
  return report;
}

std::string uniformity_csv(const UniformityReport& report) {
  std::string out = "algo,nodes,vnodes,data_per_node,trial,max_variability_percent\n";
  for (std::size_t trial = 0; trial < report.per_trial.size(); ++trial) {
    out += std::string(algo_name(report.algo)) + "," + std::to_string(report.nodes) + "," +
           std::to_string(report.virtual_nodes) + "," + std::to_string(report.data_per_node) +
           "," + std::to_string(trial) + "," + format_real(report.per_trial[trial]) + "\n";
  }
  return out;
}

std::string churn_csv(std::span<const ChurnReport> reports) {
  std::string out =
      "event_index,algo,event,nodes_before,nodes_after,total,moved,moved_fraction,"
      "misdirected\n";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const ChurnReport& r = reports[i];
    out += std::to_string(i) + "," + std::string(algo_name(r.algo)) + "," +
           (r.event == ChurnKind::add ? "add" : "remove") + "," +
           std::to_string(r.nodes_before) + "," + std::to_string(r.nodes_after) + "," +
           std::to_string(r.total_count) + "," + std::to_string(r.moved_count) + "," +
           format_real(r.moved_fraction) + "," + std::to_string(r.misdirected_count) + "\n";
  }
  return out;
}

std::string draws_csv(std::span<const DrawReport> reports) {
  std::string out = "n,h,ids,measured_mean_draws,predicted,relative_error\n";
  for (const DrawReport& r : reports) {
    out += format_real(r.n) + "," + format_real(r.h) + "," + std::to_string(r.ids) + "," +
           format_real(r.measured_mean_draws) + "," + format_real(r.predicted) + "," +
           format_real(r.relative_error) + "\n";
  }
  return out;
}

std::string scaling_csv(const ScalingReport& report, bool with_time) {
  std::string out = with_time ? "algo,nodes,vnodes,lookups,mean_ops,max_ops,ns_per_lookup\n"
                              : "algo,nodes,vnodes,lookups,mean_ops,max_ops\n";
  for (const ScalingPoint& p : report.points) {
    const std::uint64_t vnodes = p.algo == Algo::ring ? report.virtual_nodes : 0;
    out += std::string(algo_name(p.algo)) + "," + std::to_string(p.nodes) + "," +
           std::to_string(vnodes) + "," + std::to_string(p.lookups) + "," +
           format_real(p.mean_ops) + "," + std::to_string(p.max_ops);
    if (with_time) out += "," + format_real(p.ns_per_lookup);
    out += "\n";
  }
  return out;
}

}  // namespace asura::bench
