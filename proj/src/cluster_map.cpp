#include "asura/cluster_map.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <string_view>

#include "asura/real_text.hpp"

namespace asura {

namespace {

// Eat float noise like 2.9999999999999996 units when deciding how many
// full-length segments a capacity buys.
constexpr double kUnitTolerance = 1e-9;

// Segment numbers must stay exactly representable as doubles: lookups compare
// real-valued draws against them.
constexpr std::uint64_t kMaxSegments = 1ull << 53;

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (pos < line.size()) {
    std::size_t start = line.find_first_not_of(' ', pos);
    if (start == std::string_view::npos) break;
    std::size_t end = line.find(' ', start);
    if (end == std::string_view::npos) end = line.size();
    fields.push_back(line.substr(start, end - start));
    pos = end;
  }
  return fields;
}

}  // namespace

std::vector<double> segments_for_capacity(double capacity, double unit) {
  if (!(capacity > 0.0) || !std::isfinite(capacity))
    fail(errc::invalid_capacity, "node capacity must be a positive real");
  if (!(unit > 0.0) || !std::isfinite(unit))
    fail(errc::invalid_capacity, "capacity unit must be a positive real");
  double units = capacity / unit;
  double full = std::floor(units + kUnitTolerance);
  double remainder = units - full;
  if (static_cast<double>(kMaxSegments) < full)
    fail(errc::map_too_large, "capacity spans too many segments");
  std::vector<double> lengths(static_cast<std::size_t>(full), 1.0);
  if (remainder > kUnitTolerance) lengths.push_back(remainder);
  if (lengths.empty())  // capacity > 0 but far below one unit's noise floor
    fail(errc::invalid_capacity, "capacity is negligible at this unit");
  return lengths;
}

ClusterMap::ClusterMap(double capacity_unit) : unit_(capacity_unit) {
  if (!(unit_ > 0.0) || !std::isfinite(unit_))
    fail(errc::invalid_capacity, "capacity unit must be a positive real");
}

void ClusterMap::place(const NodeSpec& spec, std::size_t& cursor) {
  if (nodes_.count(spec.id))
    fail(errc::duplicate_node, "node " + std::to_string(spec.id) + " already present");
  std::vector<double> lens = segments_for_capacity(spec.capacity, unit_);
  for (double len : lens) {
    while (cursor < lengths_.size() && lengths_[cursor] > 0.0) ++cursor;
    if (cursor == lengths_.size()) {
      if (lengths_.size() == kMaxSegments)
        fail(errc::map_too_large, "segment numbers exhausted");
      lengths_.push_back(0.0);
      owners_.push_back(0);
    }
    lengths_[cursor] = len;
    owners_[cursor] = spec.id;
    ++segment_count_;
    ++cursor;
  }
  nodes_.emplace(spec.id, spec.capacity);
}

void ClusterMap::trim_trailing_holes() {
  while (!lengths_.empty() && lengths_.back() == 0.0) {
    lengths_.pop_back();
    owners_.pop_back();
  }
}

ClusterMap ClusterMap::build(double capacity_unit, std::span<const NodeSpec> specs) {
  ClusterMap map(capacity_unit);
  std::size_t cursor = 0;
  for (const NodeSpec& spec : specs) map.place(spec, cursor);
  return map;
}

ClusterMap ClusterMap::add_node(const NodeSpec& spec) const {
  ClusterMap next = *this;
  std::size_t cursor = 0;
  next.place(spec, cursor);
  next.epoch_ = epoch_ + 1;
  return next;
}

ClusterMap ClusterMap::remove_node(NodeId id) const {
  if (!nodes_.count(id))
    fail(errc::unknown_node, "node " + std::to_string(id) + " not in map");
  ClusterMap next = *this;
  next.nodes_.erase(id);
  for (std::size_t i = 0; i < next.lengths_.size(); ++i) {
    if (next.lengths_[i] > 0.0 && next.owners_[i] == id) {
      next.lengths_[i] = 0.0;
      next.owners_[i] = 0;
      --next.segment_count_;
    }
  }
  next.trim_trailing_holes();
  next.epoch_ = epoch_ + 1;
  return next;
}

double ClusterMap::coverage_extent() const {
  if (lengths_.empty()) return 0.0;
  // Trailing holes are trimmed, so the last slot is a real segment.
  return static_cast<double>(lengths_.size() - 1) + lengths_.back();
}

double ClusterMap::hole_length() const {
  return coverage_extent() - total_assigned_length();
}

std::optional<Segment> ClusterMap::segment(std::uint64_t number) const {
  if (!has_segment(number)) return std::nullopt;
  return Segment{number, lengths_[number], owners_[number]};
}

double ClusterMap::node_capacity(NodeId id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end())
    fail(errc::unknown_node, "node " + std::to_string(id) + " not in map");
  return it->second;
}

double ClusterMap::total_capacity() const {
  double total = 0.0;
  for (const auto& [id, capacity] : nodes_) total += capacity;
  return total;
}

std::vector<NodeSpec> ClusterMap::nodes() const {
  std::vector<NodeSpec> out;
  out.reserve(nodes_.size());
  for (const auto& [id, capacity] : nodes_) out.push_back({id, capacity});
  return out;
}

std::vector<Segment> ClusterMap::segments() const {
  std::vector<Segment> out;
  out.reserve(segment_count_);
  for (std::size_t i = 0; i < lengths_.size(); ++i)
    if (lengths_[i] > 0.0) out.push_back({i, lengths_[i], owners_[i]});
  return out;
}

std::vector<std::uint64_t> ClusterMap::segments_of(NodeId id) const {
  std::vector<std::uint64_t> out;
  for (std::size_t i = 0; i < lengths_.size(); ++i)
    if (lengths_[i] > 0.0 && owners_[i] == id) out.push_back(i);
  return out;
}

double ClusterMap::node_assigned_length(NodeId id) const {
  double total = 0.0;
  for (std::size_t i = 0; i < lengths_.size(); ++i)
    if (lengths_[i] > 0.0 && owners_[i] == id) total += lengths_[i];
  return total;
}

double ClusterMap::total_assigned_length() const {
  double total = 0.0;
  for (double len : lengths_) total += len;
  return total;
}

std::uint64_t memory_account(std::size_t node_count, MemoryModel model,
                             std::uint64_t virtual_nodes) {
  // 4-byte node id + 4-byte point/segment number per table entry; the ring
  // keeps one entry per virtual node, ASURA one per node.
  std::uint64_t per_node = model == MemoryModel::consistent_hashing ? 8 * virtual_nodes : 8;
  return static_cast<std::uint64_t>(node_count) * per_node;
}

std::uint64_t memory_account(const ClusterMap& map, MemoryModel model,
                             std::uint64_t virtual_nodes) {
  return memory_account(map.node_count(), model, virtual_nodes);
}

std::string serialize_map(const ClusterMap& map) {
  std::string out = "asura-map v1 unit=" + format_real(map.capacity_unit()) + "\n";
  for (const NodeSpec& node : map.nodes()) {
    out += "node " + std::to_string(node.id) + " " + format_real(node.capacity) + "\n";
  }
  for (const Segment& seg : map.segments()) {
    out += "seg " + std::to_string(seg.number) + " " + format_real(seg.length) + " " +
           std::to_string(seg.owner) + "\n";
  }
  return out;
}

ClusterMap parse_map(std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    fail(errc::bad_map_file, "empty map file");
  constexpr std::string_view header = "asura-map v1 unit=";
  if (line.rfind(header, 0) != 0)
    fail(errc::bad_map_file, "bad header: " + line);
  double unit = 0.0;
  if (!parse_real(std::string_view(line).substr(header.size()), unit) || !(unit > 0.0))
    fail(errc::bad_map_file, "bad capacity unit in header");

  ClusterMap map(unit);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split_fields(line);
    if (fields[0] == "node" && fields.size() == 3) {
      NodeId id = 0;
      double capacity = 0.0;
      if (!parse_u64(fields[1], id) || !parse_real(fields[2], capacity) || !(capacity > 0.0))
        fail(errc::bad_map_file, "bad node line: " + line);
      if (!map.nodes_.emplace(id, capacity).second)
        fail(errc::bad_map_file, "duplicate node line: " + line);
    } else if (fields[0] == "seg" && fields.size() == 4) {
      std::uint64_t number = 0;
      double length = 0.0;
      NodeId owner = 0;
      if (!parse_u64(fields[1], number) || !parse_real(fields[2], length) ||
          !parse_u64(fields[3], owner) || !(length > 0.0) || length > 1.0)
        fail(errc::bad_map_file, "bad segment line: " + line);
      if (number >= kMaxSegments)
        fail(errc::bad_map_file, "segment number out of range: " + line);
      if (!map.nodes_.count(owner))
        fail(errc::bad_map_file, "segment owner not declared: " + line);
      if (number >= map.lengths_.size()) {
        map.lengths_.resize(number + 1, 0.0);
        map.owners_.resize(number + 1, 0);
      }
      if (map.lengths_[number] > 0.0)
        fail(errc::bad_map_file, "duplicate segment number: " + line);
      map.lengths_[number] = length;
      map.owners_[number] = owner;
      ++map.segment_count_;
    } else {
      fail(errc::bad_map_file, "unrecognized line: " + line);
    }
  }
  for (const auto& [id, capacity] : map.nodes_) {
    bool owns = false;
    for (std::size_t i = 0; i < map.lengths_.size() && !owns; ++i)
      owns = map.lengths_[i] > 0.0 && map.owners_[i] == id;
    if (!owns)
      fail(errc::bad_map_file, "node " + std::to_string(id) + " owns no segment");
  }
  map.trim_trailing_holes();
  return map;
}

ClusterMap load_map_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::bad_map_file, "cannot open " + path);
  return parse_map(in);
}

void save_map_file(const ClusterMap& map, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(errc::bad_map_file, "cannot open " + path + " for writing");
  out << serialize_map(map);
  if (!out) fail(errc::bad_map_file, "failed writing " + path);
}

}  // namespace asura
