#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "asura/cluster_map.hpp"

namespace asura {

// Salt mixed into datum ids before probing the ring, keeping datum hashes off
// the node-point hash family ("datum_id" in ASCII).
inline constexpr std::uint64_t kRingDataSalt = 0x646174756D5F6964ULL;

// Consistent hashing with virtual nodes: every node contributes V points at
// hash_value(node, i); a datum belongs to the first point at or clockwise
// after its own hash, wrapping past the top.
class HashRing {
 public:
  HashRing(std::span<const NodeId> nodes, std::uint64_t virtual_nodes);

  NodeId lookup(std::uint64_t datum_id) const;
  // Same lookup, adding the number of binary-search probes to `probes`.
  NodeId lookup_counting(std::uint64_t datum_id, std::uint64_t& probes) const;

  bool empty() const { return points_.empty(); }
  std::size_t point_count() const { return points_.size(); }
  std::uint64_t virtual_nodes() const { return virtual_nodes_; }
  std::span<const std::pair<std::uint64_t, NodeId>> points() const { return points_; }

 private:
  std::vector<std::pair<std::uint64_t, NodeId>> points_;  // (hash, owner) ascending
  std::uint64_t virtual_nodes_;
};

}  // namespace asura
