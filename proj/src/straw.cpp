#include "asura/straw.hpp"

namespace asura {

StrawSet::StrawSet(std::span<const NodeId> nodes) : nodes_(nodes.begin(), nodes.end()) {
  std::vector<NodeId> sorted(nodes_);
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    fail(errc::duplicate_node, "straw nodes must be distinct");
}

}  // namespace asura
