#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "asura/error.hpp"

namespace asura {

using NodeId = std::uint64_t;

struct NodeSpec {
  NodeId id = 0;
  double capacity = 0.0;  // in multiples of the map's capacity unit
};

// Half-open interval [number, number + length) on the number line, length in
// (0, 1], owned by exactly one node.
struct Segment {
  std::uint64_t number = 0;
  double length = 0.0;
  NodeId owner = 0;
};

// Splits capacity/unit into segment lengths: floor(capacity/unit) full
// segments plus one fractional remainder when there is one.
std::vector<double> segments_for_capacity(double capacity, double unit);

// Immutable snapshot of the segment number line. add_node/remove_node return
// a new map with epoch + 1; segments present in both epochs keep their owner
// and length, so data that stays mapped never has to move.
//
// New segments always claim the smallest unused non-negative integers, in
// ascending order. Removal turns the owned segments into holes; the same
// spec re-added into an untouched map refills exactly the same numbers.
class ClusterMap {
 public:
  explicit ClusterMap(double capacity_unit = 1.0);

  // One-pass construction, equivalent to adding the specs in order to an
  // empty map but without the per-epoch copies. Resulting epoch is 0.
  static ClusterMap build(double capacity_unit, std::span<const NodeSpec> specs);

  ClusterMap add_node(const NodeSpec& spec) const;
  ClusterMap remove_node(NodeId id) const;

  std::uint64_t epoch() const { return epoch_; }
  double capacity_unit() const { return unit_; }

  bool empty() const { return nodes_.empty(); }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t segment_count() const { return segment_count_; }

  // Largest assigned segment number + 1; 0 for an empty map.
  std::uint64_t max_segment_number_plus_1() const {
    return static_cast<std::uint64_t>(lengths_.size());
  }

  // Largest segment number plus that segment's length.
  double coverage_extent() const;
  // Unassigned length below the coverage extent.
  double hole_length() const;

  bool has_segment(std::uint64_t number) const {
    return number < lengths_.size() && lengths_[number] > 0.0;
  }
  double segment_length(std::uint64_t number) const { return lengths_[number]; }
  NodeId segment_owner(std::uint64_t number) const { return owners_[number]; }
  std::optional<Segment> segment(std::uint64_t number) const;

  bool has_node(NodeId id) const { return nodes_.count(id) != 0; }
  double node_capacity(NodeId id) const;
  double total_capacity() const;

  std::vector<NodeSpec> nodes() const;       // sorted by id
  std::vector<Segment> segments() const;     // sorted by number
  std::vector<std::uint64_t> segments_of(NodeId id) const;
  double node_assigned_length(NodeId id) const;
  double total_assigned_length() const;

  // Dense views for the lookup hot path; index = segment number, 0.0 = hole.
  std::span<const double> lengths() const { return lengths_; }
  std::span<const NodeId> owners() const { return owners_; }

 private:
  friend ClusterMap parse_map(std::istream& in);

  void place(const NodeSpec& spec, std::size_t& cursor);
  void trim_trailing_holes();

  double unit_ = 1.0;
  std::uint64_t epoch_ = 0;
  std::size_t segment_count_ = 0;
  std::vector<double> lengths_;
  std::vector<NodeId> owners_;
  std::map<NodeId, double> nodes_;  // id -> capacity as given
};

enum class MemoryModel { asura, consistent_hashing };

// Byte cost under the 4-byte-id + 4-byte-number accounting model: 8 bytes per
// node for asura, 8 bytes per virtual node for the ring.
std::uint64_t memory_account(std::size_t node_count, MemoryModel model,
                             std::uint64_t virtual_nodes = 1);
std::uint64_t memory_account(const ClusterMap& map, MemoryModel model,
                             std::uint64_t virtual_nodes = 1);

// Line-oriented text format:
//   asura-map v1 unit=<real>
//   node <id> <capacity>
//   seg <number> <length> <owner-id>
// serialize_map emits the canonical form (nodes sorted by id, segments sorted
// by number, shortest round-trip reals); parsing it back is byte-faithful.
ClusterMap parse_map(std::istream& in);
ClusterMap load_map_file(const std::string& path);
std::string serialize_map(const ClusterMap& map);
void save_map_file(const ClusterMap& map, const std::string& path);

}  // namespace asura
