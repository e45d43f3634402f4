#pragma once

#include <concepts>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "asura/cluster_map.hpp"
#include "asura/error.hpp"
#include "asura/prng.hpp"

namespace asura {

// Widest range of the narrowest cascade level; levels above it double the
// range, so level i draws uniformly on [0, 16 * 2^i).
inline constexpr double kDefaultMaximumRandomNumber = 16.0;

// Cap on range doublings while hunting for an addition number. Each doubling
// fails to surface a usable number with probability at most 1/2, so hitting
// the cap means a broken generator, not bad luck.
inline constexpr int kMaxExtensionDoublings = 20;

// Level capacity of a cascade: 49 doublings reach the 2^53 segment-number
// ceiling, plus kMaxExtensionDoublings and the narrowest level.
inline constexpr int kMaxCascadeLevels = 72;

// Cascade of range-doubling generators producing the placement numbers for
// one datum. A master generator seeded with the datum id emits one seed per
// level; level generators initialize lazily and their sequences persist
// across calls (a level never restarts mid-stream except via
// extend_and_restart, which deliberately replays everything).
//
// next() walks from the widest level down: draw u*c, discard values >=
// max_segment_number_plus_1 (possible only at the widest level), halve c,
// surface the draw if it is >= c or the narrowest level is reached, otherwise
// drop to the next narrower level and draw again. Every uniform draw —
// including discarded ones — counts toward raw_draw_count().
//
// One instance lives per lookup, so level storage is a flat in-object array
// touched only up to loop_max; no allocation on the lookup path.
class AsuraNumberSource {
 public:
  AsuraNumberSource(std::uint64_t datum_id, std::uint64_t max_segment_number_plus_1)
      : master_(datum_id), max_plus_1_(static_cast<double>(max_segment_number_plus_1)) {
    if (max_segment_number_plus_1 == 0)
      fail(errc::empty_map, "number source needs at least one segment");
    while (c_max_ < max_plus_1_) {
      c_max_ *= 2.0;
      ++loop_max_;
    }
    for (int i = 0; i <= loop_max_; ++i) levels_[i] = {master_.next_integer(), 0, false};
  }

  // Next placement number in [0, max_segment_number_plus_1).
  double next() {
    double c = c_max_;
    int level = loop_max_;
    for (;;) {
      double r;
      do {
        r = uniform_at(level) * c;
        ++raw_draws_;
      } while (r >= max_plus_1_);
      c *= 0.5;
      if (r >= c || level == 0) return r;
      --level;
    }
  }

  // Same cascade without the upper-bound rejection: values in [0, c_max)
  // surface as-is. The subsequence below max_segment_number_plus_1 is
  // identical to the next() stream; the churn-metadata walk needs the
  // out-of-range values too. Do not interleave with next() on one source.
  double next_unbounded() {
    double c = c_max_;
    int level = loop_max_;
    for (;;) {
      double r = uniform_at(level) * c;
      ++raw_draws_;
      c *= 0.5;
      if (r >= c || level == 0) return r;
      --level;
    }
  }

  // Doubles c_max, appends a level seeded with the master generator's next
  // output, and restarts every level, so the whole stream replays with new
  // wide values interleaved. The replayed stream surfaces the old stream as
  // the subsequence of values below the old c_max.
  void extend_and_restart();

  double c_max() const { return c_max_; }
  int loop_max() const { return loop_max_; }
  std::uint64_t raw_draw_count() const { return raw_draws_; }

 private:
  struct Level {
    std::uint64_t seed;
    std::uint64_t state;
    bool used;
  };

  // Lazy init, then one SplitMix64 step — bit-identical to
  // Generator(seed).next_uniform() sequences.
  double uniform_at(int level) {
    Level& lv = levels_[level];
    if (!lv.used) {
      lv.state = lv.seed;
      lv.used = true;
    }
    lv.state += kGoldenGamma;
    return static_cast<double>(mix64(lv.state) >> 11) * 0x1.0p-53;
  }

  Level levels_[kMaxCascadeLevels];
  Generator master_;
  double c_max_ = kDefaultMaximumRandomNumber;
  double max_plus_1_ = 0.0;
  int loop_max_ = 0;
  std::uint64_t raw_draws_ = 0;
};

template <typename S>
concept NumberSource = requires(S s) {
  { s.next() } -> std::convertible_to<double>;
};

struct LookupResult {
  std::uint64_t segment_number = 0;
  NodeId node = 0;
};

// k distinct data-holding nodes in selection order, with the segment each
// selection landed in and the map epoch it was computed against.
struct Placement {
  std::vector<std::pair<std::uint64_t, NodeId>> selections;
  std::uint64_t epoch = 0;
};

// Per-datum churn bookkeeping: the datum is affected by removing any segment
// in remove_numbers, and by an addition claiming segment addition_number.
struct ChurnMetadata {
  std::uint64_t addition_number = 0;
  std::vector<std::uint64_t> remove_numbers;
};

enum class AddImpact { unaffected, recheck };
enum class RemoveImpact { unaffected, must_recompute };

// Surfaced numbers in draw order plus the indices of those that landed in a
// segment; test oracles replay placement decisions from this.
struct DrawTrace {
  std::vector<double> drawn;
  std::vector<std::size_t> hit_indices;
};

namespace detail {

inline bool segment_accepts(const ClusterMap& map, double r, std::uint64_t& number) {
  // Half-open acceptance: r lands in segment floor(r) iff r < start + length.
  // The range test precedes the cast so out-of-range numbers (unrejected or
  // injected streams) never feed an unrepresentable double into it.
  if (r >= static_cast<double>(map.max_segment_number_plus_1())) return false;
  number = static_cast<std::uint64_t>(r);
  return map.segment_length(number) > 0.0 &&
         r < static_cast<double>(number) + map.segment_length(number);
}

}  // namespace detail

// First number landing in a segment decides the data-storing node. The
// number-source parameter is the test seam; production callers use the
// datum-id overload below.
template <NumberSource S>
LookupResult asura_lookup_with(const ClusterMap& map, S&& numbers) {
  if (map.empty()) fail(errc::empty_map, "lookup against an empty map");
  for (;;) {
    double r = numbers.next();
    std::uint64_t n = 0;
    if (detail::segment_accepts(map, r, n)) return {n, map.segment_owner(n)};
  }
}

// Keeps drawing past the first hit, skipping hits on already-selected nodes,
// until k distinct nodes are found.
template <NumberSource S>
Placement asura_lookup_k_with(const ClusterMap& map, std::size_t k, S&& numbers) {
  if (map.empty()) fail(errc::empty_map, "lookup against an empty map");
  if (k < 1 || k > map.node_count())
    fail(errc::insufficient_nodes, "map holds fewer nodes than requested replicas");
  Placement placement;
  placement.epoch = map.epoch();
  placement.selections.reserve(k);
  while (placement.selections.size() < k) {
    double r = numbers.next();
    std::uint64_t n = 0;
    if (!detail::segment_accepts(map, r, n)) continue;
    NodeId owner = map.segment_owner(n);
    bool duplicate = false;
    for (const auto& [seg, node] : placement.selections) duplicate |= node == owner;
    if (!duplicate) placement.selections.emplace_back(n, owner);
  }
  return placement;
}

// Records every surfaced number until hit_count of them land in segments.
template <NumberSource S>
DrawTrace trace_until_hits(const ClusterMap& map, std::size_t hit_count, S&& numbers) {
  if (map.empty()) fail(errc::empty_map, "lookup against an empty map");
  DrawTrace trace;
  while (trace.hit_indices.size() < hit_count) {
    double r = numbers.next();
    std::uint64_t n = 0;
    if (detail::segment_accepts(map, r, n)) trace.hit_indices.push_back(trace.drawn.size());
    trace.drawn.push_back(r);
  }
  return trace;
}

LookupResult asura_lookup(std::uint64_t datum_id, const ClusterMap& map);
Placement asura_lookup_k(std::uint64_t datum_id, const ClusterMap& map, std::size_t k);

// Number stream for the churn-metadata walk: surfaced values without the
// upper-bound rejection, plus the ability to replay at a doubled range.
class ReplayableStream {
 public:
  virtual ~ReplayableStream() = default;
  virtual double next() = 0;
  virtual void extend_and_restart() = 0;
};

class CascadeStream final : public ReplayableStream {
 public:
  CascadeStream(std::uint64_t datum_id, std::uint64_t max_segment_number_plus_1)
      : source_(datum_id, max_segment_number_plus_1) {}
  double next() override { return source_.next_unbounded(); }
  void extend_and_restart() override { source_.extend_and_restart(); }

 private:
  AsuraNumberSource source_;
};

// Test seam: a fixed primary sequence, and a second fixed sequence standing
// in for the doubled-range replay. Running past the end of the active
// sequence or extending twice raises exhausted-sequence.
class InjectedStream final : public ReplayableStream {
 public:
  explicit InjectedStream(std::vector<double> primary, std::vector<double> extended = {})
      : primary_(std::move(primary)), extended_(std::move(extended)) {}
  double next() override;
  void extend_and_restart() override;

 private:
  std::vector<double> primary_;
  std::vector<double> extended_;
  bool extended_mode_ = false;
  std::size_t pos_ = 0;
};

// Walks the unrejected stream to the k-th distinct-node hit. remove_numbers =
// the k landing segments in selection order. addition_number = floor of the
// smallest-valued number drawn before the final hit whose floor is not an
// assigned segment; when every earlier number lies in assigned segments, the
// stream is replayed at doubled range (bounded by kMaxExtensionDoublings)
// until such a number appears.
ChurnMetadata churn_metadata_with(const ClusterMap& map, std::size_t k,
                                  ReplayableStream& numbers);
ChurnMetadata churn_metadata(std::uint64_t datum_id, const ClusterMap& map, std::size_t k);

// A new node claiming segment addition_number may capture the datum (or just
// shift its addition number); any other claimed segment cannot affect it, as
// long as additions keep filling the smallest free numbers first.
AddImpact moves_on_add(const ChurnMetadata& meta, std::uint64_t added_segment);

// The datum must be recomputed iff one of its landing segments went away.
RemoveImpact moves_on_remove(const ChurnMetadata& meta,
                             std::span<const std::uint64_t> removed_segments);

// A removal that frees a segment number below addition_number invalidates it:
// the freed number may now host draw values this metadata never considered,
// so the next addition there could capture the datum unannounced. Callers
// should refresh metadata when this returns true.
bool addition_number_stale_after_remove(const ChurnMetadata& meta,
                                        std::span<const std::uint64_t> removed_segments);

// Expected uniform draws per placement on a map of extent n with hole length
// h, narrowest-level range S and per-level ratio alpha. Stays inside a
// constant band as n grows with h/n fixed — the draw cost is O(1) in cluster
// size.
double expected_draws(double n, double h, double S, double alpha);

}  // namespace asura
