#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "asura/cluster_map.hpp"
#include "asura/error.hpp"
#include "asura/prng.hpp"

namespace asura {

// Straw bucket: every node draws a hash straw for the datum and the longest
// straw wins. One linear scan per lookup, no precomputed state beyond the
// node list.
class StrawSet {
 public:
  explicit StrawSet(std::span<const NodeId> nodes);

  NodeId lookup(std::uint64_t datum_id) const {
    return lookup_with([datum_id](NodeId node) { return hash_value(datum_id, node); });
  }

  std::vector<NodeId> lookup_k(std::uint64_t datum_id, std::size_t k) const {
    return lookup_k_with(k, [datum_id](NodeId node) { return hash_value(datum_id, node); });
  }

  // Test seam: `hash` maps a node id to its straw value.
  template <typename H>
  NodeId lookup_with(H&& hash) const {
    if (nodes_.empty()) fail(errc::empty_map, "lookup against an empty straw set");
    NodeId best = nodes_.front();
    std::uint64_t best_hash = hash(best);
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
      std::uint64_t h = hash(nodes_[i]);
      // Ties go to the smaller node id, independent of scan order.
      if (h > best_hash || (h == best_hash && nodes_[i] < best)) {
        best = nodes_[i];
        best_hash = h;
      }
    }
    return best;
  }

  template <typename H>
  std::vector<NodeId> lookup_k_with(std::size_t k, H&& hash) const {
    if (nodes_.empty()) fail(errc::empty_map, "lookup against an empty straw set");
    if (k < 1 || k > nodes_.size())
      fail(errc::insufficient_nodes, "straw set holds fewer nodes than requested");
    std::vector<std::pair<std::uint64_t, NodeId>> straws;
    straws.reserve(nodes_.size());
    for (NodeId node : nodes_) straws.emplace_back(hash(node), node);
    auto longer = [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    };
    std::partial_sort(straws.begin(), straws.begin() + static_cast<std::ptrdiff_t>(k),
                      straws.end(), longer);
    std::vector<NodeId> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) out.push_back(straws[i].second);
    return out;
  }

  bool empty() const { return nodes_.empty(); }
  std::size_t size() const { return nodes_.size(); }
  std::span<const NodeId> nodes() const { return nodes_; }

 private:
  std::vector<NodeId> nodes_;
};

}  // namespace asura
