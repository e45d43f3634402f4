#include "asura/ring.hpp"

#include <algorithm>

#include "asura/error.hpp"
#include "asura/prng.hpp"

namespace asura {

HashRing::HashRing(std::span<const NodeId> nodes, std::uint64_t virtual_nodes)
    : virtual_nodes_(virtual_nodes) {
  if (virtual_nodes < 1)
    fail(errc::invalid_argument, "ring needs at least one virtual node per node");
  std::vector<NodeId> ids(nodes.begin(), nodes.end());
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
    fail(errc::duplicate_node, "ring nodes must be distinct");
  points_.reserve(nodes.size() * virtual_nodes);
  for (NodeId node : nodes)
    for (std::uint64_t i = 0; i < virtual_nodes; ++i)
      points_.emplace_back(hash_value(node, i), node);
  // Equal hashes resolve to the smaller node id, making lookups independent
  // of build order.
  std::sort(points_.begin(), points_.end());
}

NodeId HashRing::lookup(std::uint64_t datum_id) const {
  std::uint64_t probes = 0;
  return lookup_counting(datum_id, probes);
}

NodeId HashRing::lookup_counting(std::uint64_t datum_id, std::uint64_t& probes) const {
  if (points_.empty()) fail(errc::empty_map, "lookup against an empty ring");
  const std::uint64_t target = hash_value(datum_id, kRingDataSalt);
  // First point with hash >= target; past-the-end wraps to the first point.
  std::size_t lo = 0, hi = points_.size();
  while (lo < hi) {
    std::size_t mid = lo + (hi - lo) / 2;
    ++probes;
    if (points_[mid].first < target)
      lo = mid + 1;
    else
      hi = mid;
  }
  if (lo == points_.size()) lo = 0;
  return points_[lo].second;
}

}  // namespace asura
