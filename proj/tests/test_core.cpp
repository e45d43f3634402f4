#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "asura/cluster_map.hpp"
#include "asura/core.hpp"
#include "asura/prng.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace asura;
using test_support::code_of;
using test_support::map_from_text;

namespace {

ClusterMap unit_nodes(std::uint64_t count) {
  std::vector<NodeSpec> specs;
  for (std::uint64_t i = 0; i < count; ++i) specs.push_back({i + 1, 1.0});
  return ClusterMap::build(1.0, specs);
}

}  // namespace

TEST_CASE("cascade geometry rounds the range up to a power-of-two multiple") {
  struct Case {
    std::uint64_t max_plus_1;
    double c_max;
    int loop_max;
  };
  for (Case c : {Case{1, 16.0, 0}, Case{4, 16.0, 0}, Case{16, 16.0, 0}, Case{17, 32.0, 1},
                 Case{20, 32.0, 1}, Case{100, 128.0, 3}, Case{1000, 1024.0, 6}}) {
    AsuraNumberSource src(42, c.max_plus_1);
    CHECK(src.c_max() == c.c_max);
    CHECK(src.loop_max() == c.loop_max);
  }
  AsuraNumberSource src(42, 20);
  src.extend_and_restart();
  CHECK(src.c_max() == 64.0);
  CHECK(src.loop_max() == 2);
  CHECK(code_of([] { AsuraNumberSource bad(1, 0); }) == errc::empty_map);
}

TEST_CASE("injected lookups land in the documented segments") {
  ClusterMap map = test_support::split_node_map();
  {
    InjectedStream s({4.2, 1.1});
    LookupResult r = asura_lookup_with(map, s);
    CHECK(r.segment_number == 1);
    CHECK(r.node == 103);
  }
  {
    InjectedStream s({3.3, 0.6});
    LookupResult r = asura_lookup_with(map, s);
    CHECK(r.segment_number == 3);
    CHECK(r.node == 102);
  }
  {
    // 3.3 used to land in 102's segment; with that segment gone the same
    // number misses and the next one decides.
    InjectedStream s({3.3, 0.6});
    LookupResult r = asura_lookup_with(map.remove_node(102), s);
    CHECK(r.segment_number == 0);
    CHECK(r.node == 101);
  }
}

TEST_CASE("acceptance is half-open in each segment") {
  ClusterMap map = map_from_text(
      "asura-map v1 unit=1\n"
      "node 1 0.5\n"
      "seg 0 0.5 1\n");
  InjectedStream s({0.5, 0.7, 0.2});  // two tail misses, then a hit
  LookupResult r = asura_lookup_with(map, s);
  CHECK(r.segment_number == 0);
  CHECK(r.node == 1);
}

TEST_CASE("replica lookups skip nodes that already hold the datum") {
  ClusterMap map = map_from_text(
      "asura-map v1 unit=1\n"
      "node 10 2\nnode 20 1\n"
      "seg 0 1 10\nseg 1 1 10\nseg 2 1 20\n");
  InjectedStream s({0.5, 1.5, 2.5});
  Placement p = asura_lookup_k_with(map, 2, s);
  REQUIRE(p.selections.size() == 2);
  CHECK(p.selections[0].first == 0);
  CHECK(p.selections[0].second == 10);
  CHECK(p.selections[1].first == 2);
  CHECK(p.selections[1].second == 20);
  CHECK(p.epoch == map.epoch());
}

TEST_CASE("replica selection order on the offset map") {
  ClusterMap map = test_support::offset_map();
  InjectedStream s({6.2, 3.3, 1.6, 5.1, 4.9, 8.0, 7.2});
  Placement p = asura_lookup_k_with(map, 3, s);
  REQUIRE(p.selections.size() == 3);
  CHECK(p.selections[0] == std::pair<std::uint64_t, NodeId>{3, 103});
  CHECK(p.selections[1] == std::pair<std::uint64_t, NodeId>{5, 105});
  CHECK(p.selections[2] == std::pair<std::uint64_t, NodeId>{4, 104});
}

TEST_CASE("metadata walk records landing segments and the smallest free number") {
  ClusterMap map = test_support::offset_map();
  InjectedStream s({6.2, 3.3, 1.6, 5.1, 4.9, 8.0, 7.2});
  ChurnMetadata meta = churn_metadata_with(map, 3, s);
  CHECK(meta.remove_numbers == std::vector<std::uint64_t>{3, 5, 4});
  // 6.2 and 1.6 both fall outside assigned segments; 1.6 is the smaller value.
  CHECK(meta.addition_number == 1);
}

TEST_CASE("a fully covered walk replays at doubled range for its addition number") {
  ClusterMap map = unit_nodes(8);
  InjectedStream s({3.6, 5.4, 4.9, 6.2, 2.1, 1.9, 7.5},
                   {3.6, 5.4, 12.2, 4.9, 6.2, 13.4, 2.1});
  ChurnMetadata meta = churn_metadata_with(map, 3, s);
  CHECK(meta.remove_numbers == std::vector<std::uint64_t>{3, 5, 4});
  CHECK(meta.addition_number == 12);
}

TEST_CASE("injected streams refuse to run past their ends") {
  InjectedStream s({0.5, 1.5});
  CHECK(s.next() == 0.5);
  CHECK(s.next() == 1.5);
  CHECK(code_of([&] { s.next(); }) == errc::exhausted_sequence);

  InjectedStream bare({0.5});
  CHECK(code_of([&] { bare.extend_and_restart(); }) == errc::exhausted_sequence);

  InjectedStream two({0.5}, {0.25});
  two.extend_and_restart();
  CHECK(two.next() == 0.25);
  CHECK(code_of([&] { two.extend_and_restart(); }) == errc::exhausted_sequence);
}

TEST_CASE("a saturated map pushes the addition number past the covered extent") {
  // Sixteen unit nodes leave no free number below the power boundary, so the
  // metadata walk must extend to find one.
  ClusterMap map = unit_nodes(16);
  for (std::uint64_t id = 1; id <= 50; ++id) {
    ChurnMetadata meta = churn_metadata(id * 977, map, 1);
    CHECK(meta.addition_number >= 16);
    REQUIRE(meta.remove_numbers.size() == 1);
    CHECK(meta.remove_numbers[0] < 16);
  }
}

TEST_CASE("metadata computation is deterministic per datum") {
  ClusterMap map = test_support::split_node_map();
  for (std::uint64_t id : {7ULL, 1234ULL, 0xFEEDULL}) {
    ChurnMetadata a = churn_metadata(id, map, 2);
    ChurnMetadata b = churn_metadata(id, map, 2);
    CHECK(a.addition_number == b.addition_number);
    CHECK(a.remove_numbers == b.remove_numbers);
  }
}

TEST_CASE("planned additions and removals gate recomputation") {
  ChurnMetadata one{1, {3, 5, 4}};
  CHECK(moves_on_add(one, 0) == AddImpact::unaffected);
  CHECK(moves_on_add(one, 1) == AddImpact::recheck);
  CHECK(moves_on_add(one, 2) == AddImpact::unaffected);

  ChurnMetadata twelve{12, {3, 5, 4}};
  for (std::uint64_t added : {0ULL, 1ULL, 2ULL, 6ULL, 7ULL, 8ULL, 9ULL, 10ULL, 11ULL})
    CHECK(moves_on_add(twelve, added) == AddImpact::unaffected);
  CHECK(moves_on_add(twelve, 12) == AddImpact::recheck);

  std::vector<std::uint64_t> hit3{3};
  std::vector<std::uint64_t> miss7{7};
  std::vector<std::uint64_t> none;
  CHECK(moves_on_remove(one, hit3) == RemoveImpact::must_recompute);
  CHECK(moves_on_remove(one, miss7) == RemoveImpact::unaffected);
  CHECK(moves_on_remove(one, none) == RemoveImpact::unaffected);

  std::vector<std::uint64_t> below{3};
  std::vector<std::uint64_t> above{13};
  CHECK(addition_number_stale_after_remove(twelve, below));
  CHECK_FALSE(addition_number_stale_after_remove(twelve, above));
  CHECK_FALSE(addition_number_stale_after_remove(one, none));
}

TEST_CASE("expected draw counts match the worked values") {
  CHECK(expected_draws(16, 0, 16, 2) == doctest::Approx(1.0));
  CHECK(expected_draws(10, 0, 16, 2) == doctest::Approx(1.6));
  CHECK(expected_draws(24, 0, 16, 2) == doctest::Approx(2.0));
  CHECK(expected_draws(100, 0, 16, 2) == doctest::Approx(2.4));
  CHECK(expected_draws(100000, 0, 16, 2) == doctest::Approx(2.62128).epsilon(1e-5));
  // Holes inflate the count by extent / assigned.
  CHECK(expected_draws(10, 5, 16, 2) == doctest::Approx(3.2));
  // The cost settles into a narrow band: growing the map five thousand-fold
  // changes the expectation by under a quarter.
  CHECK(expected_draws(100000, 0, 16, 2) / expected_draws(100, 0, 16, 2) < 1.25);

  CHECK(code_of([] { expected_draws(10, 10, 16, 2); }) == errc::invalid_argument);
  CHECK(code_of([] { expected_draws(10, -1, 16, 2); }) == errc::invalid_argument);
  CHECK(code_of([] { expected_draws(0, 0, 16, 2); }) == errc::invalid_argument);
  CHECK(code_of([] { expected_draws(10, 0, 0, 2); }) == errc::invalid_argument);
  CHECK(code_of([] { expected_draws(10, 0, 16, 1); }) == errc::invalid_argument);
}

TEST_CASE("raw draw counts including rejections track the prediction") {
  AsuraNumberSource src(9001, 10);
  const int calls = 20000;
  for (int i = 0; i < calls; ++i) (void)src.next();
  double mean = static_cast<double>(src.raw_draw_count()) / calls;
  CHECK(mean == doctest::Approx(expected_draws(10, 0, 16, 2)).epsilon(0.05));
}

TEST_CASE("surfaced numbers are uniform over the range") {
  AsuraNumberSource src(7, 10);
  const int draws = 100000;
  int bins[20] = {};
  for (int i = 0; i < draws; ++i) {
    double r = src.next();
    REQUIRE(r >= 0.0);
    REQUIRE(r < 10.0);
    ++bins[static_cast<int>(r * 2.0)];
  }
  double expected = draws / 20.0;
  double chi2 = 0.0;
  for (int count : bins) chi2 += (count - expected) * (count - expected) / expected;
  CHECK(chi2 < 50.0);  // 19 dof, far beyond the 99.9% point
}

TEST_CASE("distinct datum ids draw distinct first numbers") {
  std::set<double> firsts;
  for (std::uint64_t i = 0; i < 10000; ++i) {
    AsuraNumberSource src(hash_value(i, 0xABCD), 1000);
    firsts.insert(src.next());
  }
  CHECK(firsts.size() == 10000);
}

TEST_CASE("a narrow source surfaces exactly the in-range subsequence of a wide one") {
  // Both sources share level generators, so the wide stream filtered to the
  // narrow range must reproduce the narrow stream bit for bit.
  for (std::uint64_t id : {1ULL, 99ULL, 0xC0DEULL, 31337ULL}) {
    AsuraNumberSource narrow(id, 4);
    AsuraNumberSource wide(id, 20);
    std::vector<double> from_narrow;
    for (int i = 0; i < 30; ++i) from_narrow.push_back(narrow.next());
    std::vector<double> from_wide;
    int guard = 0;
    while (from_wide.size() < 30 && ++guard < 5000) {
      double r = wide.next();
      if (r < 4.0) from_wide.push_back(r);
    }
    CHECK(from_wide == from_narrow);
  }
}

TEST_CASE("the bounded stream is the accepted subsequence of the unbounded one") {
  for (std::uint64_t max_plus_1 : {10ULL, 20ULL, 100ULL}) {
    AsuraNumberSource bounded(555, max_plus_1);
    AsuraNumberSource unbounded(555, max_plus_1);
    std::vector<double> hits;
    int guard = 0;
    while (hits.size() < 50 && ++guard < 5000) {
      double r = unbounded.next_unbounded();
      if (r < static_cast<double>(max_plus_1)) hits.push_back(r);
    }
    std::vector<double> direct;
    for (int i = 0; i < 50; ++i) direct.push_back(bounded.next());
    CHECK(direct == hits);
  }
}

TEST_CASE("datum-id lookups follow capacity weights") {
  ClusterMap map = test_support::split_node_map();
  const int ids = 200000;
  std::map<NodeId, int> counts;
  for (int i = 0; i < ids; ++i) counts[asura_lookup(hash_value(i, 17), map).node]++;
  double total = map.total_capacity();
  for (const NodeSpec& node : map.nodes()) {
    double p = node.capacity / total;
    double sigma = std::sqrt(ids * p * (1.0 - p));
    CHECK(std::abs(counts[node.id] - ids * p) < 5.0 * sigma);
  }
}

TEST_CASE("node arrival and departure move only the necessary data") {
  std::vector<NodeSpec> specs;
  for (std::uint64_t i = 0; i < 8; ++i) specs.push_back({100 + i, 0.5 + 0.3 * i});
  ClusterMap map = ClusterMap::build(1.0, specs);

  const int ids = 20000;
  std::vector<NodeId> before(ids);
  for (int i = 0; i < ids; ++i) before[i] = asura_lookup(hash_value(i, 3), map).node;

  ClusterMap grown = map.add_node({200, 1.3});
  int captured = 0;
  for (int i = 0; i < ids; ++i) {
    NodeId now = asura_lookup(hash_value(i, 3), grown).node;
    if (now != before[i]) {
      CHECK(now == 200);
      ++captured;
    }
  }
  CHECK(captured > 0);

  ClusterMap shrunk = map.remove_node(104);
  int released = 0;
  for (int i = 0; i < ids; ++i) {
    NodeId now = asura_lookup(hash_value(i, 3), shrunk).node;
    if (now != before[i]) {
      CHECK(before[i] == 104);
      ++released;
    }
  }
  CHECK(released > 0);
}

TEST_CASE("metadata verdicts stay sound under the refresh policy") {
  // Follow a corpus through random churn, recomputing per-datum metadata only
  // when the planned change touches it. Whenever the verdict is "unaffected"
  // the stored node must still be the true lookup answer.
  ClusterMap map(1.0);
  std::vector<NodeId> alive;
  NodeId next_id = 1;
  for (int i = 0; i < 6; ++i) {
    NodeSpec spec{next_id++, 0.6 + 0.4 * i};
    map = map.add_node(spec);
    alive.push_back(spec.id);
  }

  const int ids = 300;
  std::vector<std::uint64_t> corpus(ids);
  std::vector<NodeId> stored(ids);
  std::vector<ChurnMetadata> meta(ids);
  for (int i = 0; i < ids; ++i) {
    corpus[i] = hash_value(i, 0xFACE);
    stored[i] = asura_lookup(corpus[i], map).node;
    meta[i] = churn_metadata(corpus[i], map, 1);
  }

  Generator rng(2024);
  for (int event = 0; event < 40; ++event) {
    bool add = alive.size() <= 2 || rng.next_uniform() < 0.55;
    ClusterMap next(1.0);
    std::vector<std::uint64_t> touched;
    NodeId changed = 0;
    if (add) {
      NodeSpec spec{next_id++, 0.3 + 2.2 * rng.next_uniform()};
      next = map.add_node(spec);
      touched = next.segments_of(spec.id);
      changed = spec.id;
      alive.push_back(spec.id);
    } else {
      std::size_t pick = rng.next_integer() % alive.size();
      changed = alive[pick];
      touched = map.segments_of(changed);
      next = map.remove_node(changed);
      alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(pick));
    }

    for (int i = 0; i < ids; ++i) {
      bool refresh = false;
      if (add) {
        for (std::uint64_t seg : touched)
          refresh |= moves_on_add(meta[i], seg) == AddImpact::recheck;
      } else {
        refresh = moves_on_remove(meta[i], touched) == RemoveImpact::must_recompute;
        if (!refresh && addition_number_stale_after_remove(meta[i], touched))
          meta[i] = churn_metadata(corpus[i], next, 1);
      }
      if (refresh) {
        stored[i] = asura_lookup(corpus[i], next).node;
        meta[i] = churn_metadata(corpus[i], next, 1);
      } else {
        // The datum was declared untouched; its node must not have moved.
        REQUIRE(asura_lookup(corpus[i], next).node == stored[i]);
      }
    }
    map = next;
  }
}

TEST_CASE("replica selection matches a brute-force replay of the trace") {
  std::vector<NodeSpec> specs;
  for (std::uint64_t i = 0; i < 6; ++i) specs.push_back({50 + i, 0.7 + 0.2 * i});
  ClusterMap map = ClusterMap::build(1.0, specs);
  const std::size_t k = 3;

  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::uint64_t id = hash_value(seed, 0xBEEF);
    std::vector<std::pair<std::uint64_t, NodeId>> expected;
    for (std::size_t hits = 16; expected.size() < k && hits <= 1024; hits *= 2) {
      expected.clear();
      AsuraNumberSource src(id, map.max_segment_number_plus_1());
      DrawTrace trace = trace_until_hits(map, hits, src);
      for (std::size_t idx : trace.hit_indices) {
        std::uint64_t seg = static_cast<std::uint64_t>(trace.drawn[idx]);
        NodeId owner = map.segment_owner(seg);
        bool dup = false;
        for (const auto& sel : expected) dup |= sel.second == owner;
        if (!dup) expected.push_back({seg, owner});
        if (expected.size() == k) break;
      }
    }
    REQUIRE(expected.size() == k);
    Placement p = asura_lookup_k(id, map, k);
    CHECK(p.selections == expected);
  }
}

TEST_CASE("requesting every node yields a permutation") {
  ClusterMap map = test_support::split_node_map();
  Placement p = asura_lookup_k(0xDADA, map, map.node_count());
  std::set<NodeId> seen;
  for (const auto& [seg, node] : p.selections) seen.insert(node);
  CHECK(seen.size() == map.node_count());
}

TEST_CASE("lookups and walks reject impossible requests") {
  ClusterMap empty(1.0);
  CHECK(code_of([&] { asura_lookup(1, empty); }) == errc::empty_map);
  CHECK(code_of([&] { asura_lookup_k(1, empty, 1); }) == errc::empty_map);
  CHECK(code_of([&] { churn_metadata(1, empty, 1); }) == errc::empty_map);

  ClusterMap map = test_support::split_node_map();
  CHECK(code_of([&] { asura_lookup_k(1, map, 0); }) == errc::insufficient_nodes);
  CHECK(code_of([&] { asura_lookup_k(1, map, 4); }) == errc::insufficient_nodes);
  CHECK(code_of([&] { churn_metadata(1, map, 4); }) == errc::insufficient_nodes);
}
