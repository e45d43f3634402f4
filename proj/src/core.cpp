#include "asura/core.hpp"

#include <algorithm>
#include <cmath>

namespace asura {

void AsuraNumberSource::extend_and_restart() {
  if (loop_max_ + 1 >= kMaxCascadeLevels)
    fail(errc::extension_overflow, "cascade cannot extend further");
  c_max_ *= 2.0;
  ++loop_max_;
  // The appended seed continues the master sequence, so the widened source is
  // indistinguishable from one built for the doubled range up front.
  levels_[loop_max_] = {master_.next_integer(), 0, false};
  for (int i = 0; i < loop_max_; ++i) levels_[i].used = false;
}

LookupResult asura_lookup(std::uint64_t datum_id, const ClusterMap& map) {
  if (map.empty()) fail(errc::empty_map, "lookup against an empty map");
  AsuraNumberSource numbers(datum_id, map.max_segment_number_plus_1());
  return asura_lookup_with(map, numbers);
}

Placement asura_lookup_k(std::uint64_t datum_id, const ClusterMap& map, std::size_t k) {
  if (map.empty()) fail(errc::empty_map, "lookup against an empty map");
  AsuraNumberSource numbers(datum_id, map.max_segment_number_plus_1());
  return asura_lookup_k_with(map, k, numbers);
}

double InjectedStream::next() {
  const std::vector<double>& active = extended_mode_ ? extended_ : primary_;
  if (pos_ >= active.size())
    fail(errc::exhausted_sequence, "injected number sequence ran out");
  return active[pos_++];
}

void InjectedStream::extend_and_restart() {
  if (extended_mode_ || extended_.empty())
    fail(errc::exhausted_sequence, "injected stream has no further extension");
  extended_mode_ = true;
  pos_ = 0;
}

ChurnMetadata churn_metadata_with(const ClusterMap& map, std::size_t k,
                                  ReplayableStream& numbers) {
  if (map.empty()) fail(errc::empty_map, "metadata walk against an empty map");
  if (k < 1 || k > map.node_count())
    fail(errc::insufficient_nodes, "map holds fewer nodes than requested replicas");

  for (int attempt = 0; attempt <= kMaxExtensionDoublings; ++attempt) {
    if (attempt > 0) numbers.extend_and_restart();

    std::vector<std::uint64_t> remove_numbers;
    std::vector<NodeId> owners;
    bool have_addition = false;
    double addition_value = 0.0;
    while (remove_numbers.size() < k) {
      double r = numbers.next();
      std::uint64_t n = 0;
      if (detail::segment_accepts(map, r, n)) {
        NodeId owner = map.segment_owner(n);
        if (std::find(owners.begin(), owners.end(), owner) == owners.end()) {
          owners.push_back(owner);
          remove_numbers.push_back(n);
          continue;  // selected hits are never addition candidates
        }
      } else {
        // A miss whose floor is free: candidate. Misses inside a segment's
        // fractional tail have an assigned floor and do not qualify.
        double limit = static_cast<double>(map.max_segment_number_plus_1());
        bool floor_free = r >= limit || !map.has_segment(static_cast<std::uint64_t>(r));
        if (floor_free && (!have_addition || r < addition_value)) {
          have_addition = true;
          addition_value = r;
        }
      }
    }
    if (have_addition) {
      if (addition_value >= 0x1p63)
        fail(errc::extension_overflow, "addition number exceeds representable segments");
      return {static_cast<std::uint64_t>(addition_value), std::move(remove_numbers)};
    }
    // Every number before the final hit sits in an assigned segment; replay
    // at a doubled range to interleave fresh out-of-range values.
  }
  fail(errc::extension_overflow, "no free number surfaced within the extension cap");
}

ChurnMetadata churn_metadata(std::uint64_t datum_id, const ClusterMap& map, std::size_t k) {
  if (map.empty()) fail(errc::empty_map, "metadata walk against an empty map");
  CascadeStream numbers(datum_id, map.max_segment_number_plus_1());
  return churn_metadata_with(map, k, numbers);
}

AddImpact moves_on_add(const ChurnMetadata& meta, std::uint64_t added_segment) {
  return added_segment == meta.addition_number ? AddImpact::recheck : AddImpact::unaffected;
}

RemoveImpact moves_on_remove(const ChurnMetadata& meta,
                             std::span<const std::uint64_t> removed_segments) {
  for (std::uint64_t removed : removed_segments)
    for (std::uint64_t kept : meta.remove_numbers)
      if (removed == kept) return RemoveImpact::must_recompute;
  return RemoveImpact::unaffected;
}

bool addition_number_stale_after_remove(const ChurnMetadata& meta,
                                        std::span<const std::uint64_t> removed_segments) {
  for (std::uint64_t removed : removed_segments)
    if (removed < meta.addition_number) return true;
  return false;
}

double expected_draws(double n, double h, double S, double alpha) {
  if (!(S > 0.0) || !(alpha > 1.0) || !(n > 0.0) || h < 0.0)
    fail(errc::invalid_argument, "expected_draws needs S > 0, alpha > 1, n > 0, h >= 0");
  if (h >= n) fail(errc::invalid_argument, "hole length must be smaller than the extent");
  // Widest-level range S * alpha^x, the smallest power step covering n.
  double range = S;
  while (range < n) range *= alpha;
  return range / (n - h) * (alpha / (alpha - 1.0) - S / (range * (alpha - 1.0)));
}

}  // namespace asura
