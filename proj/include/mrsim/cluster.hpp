#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "mrsim/rng.hpp"
#include "mrsim/types.hpp"

namespace mrsim {

// NodeLocal: a replica of the input block sits on the execution node.
// RackLocal: nearest replica is on another node of the same rack.
// Remote:    nearest replica is on a different rack.
enum class LocalityClass { NodeLocal, RackLocal, Remote };

const char* to_string(LocalityClass c);

struct NodeSpec {
  NodeId id = kInvalidId;
  RackId rack = kInvalidId;
  int map_slots = 2;
  int reduce_slots = 1;
  double proc_rate_mbps = 1.0;  // map processing throughput, MB/s
};

// Static cluster description. Immutable once validated.
class ClusterTopology {
 public:
  ClusterTopology(std::vector<RackId> racks, std::vector<NodeSpec> nodes,
                  double intra_rack_rate_mbps, double cross_rack_rate_mbps);

  const std::vector<RackId>& racks() const { return racks_; }
  const std::vector<NodeSpec>& nodes() const { return nodes_; }
  const NodeSpec& node(NodeId id) const;
  bool has_node(NodeId id) const { return by_id_.count(id) > 0; }
  RackId rack_of(NodeId id) const { return node(id).rack; }
  double intra_rack_rate() const { return intra_rack_rate_; }
  double cross_rack_rate() const { return cross_rack_rate_; }

  // Link rate between two distinct nodes (same rack -> intra, else cross).
  double link_rate(NodeId a, NodeId b) const;

  int total_map_slots() const;

 private:
  std::vector<RackId> racks_;
  std::vector<NodeSpec> nodes_;  // sorted by node id
  std::map<NodeId, int> by_id_;  // node id -> index in nodes_
  double intra_rack_rate_;
  double cross_rack_rate_;
};

struct BlockInfo {
  double size_mb = 0;
  std::set<NodeId> replicas;         // grows as prefetches land, never shrinks
  std::set<NodeId> origin_replicas;  // placement-time replicas
};

// Block -> replica placement. The only mutation is add_replica, driven by
// prefetch transfer completions in the event loop.
class BlockMap {
 public:
  void declare(BlockId id, double size_mb, std::set<NodeId> replicas);
  void add_replica(BlockId id, NodeId node);

  bool has(BlockId id) const { return blocks_.count(id) > 0; }
  const BlockInfo& info(BlockId id) const;
  const std::map<BlockId, BlockInfo>& all() const { return blocks_; }

 private:
  std::map<BlockId, BlockInfo> blocks_;
};

// Hierarchical hop distance: 0 same node, 2 same rack, 4 cross rack.
int topology_distance(NodeId a, NodeId b, const ClusterTopology& topo);

LocalityClass classify_locality(NodeId exec_node, BlockId block,
                                const BlockMap& blocks,
                                const ClusterTopology& topo);

// Replica of `block` closest to `target`; ties go to the smallest node id.
NodeId nearest_replica(BlockId block, NodeId target, const BlockMap& blocks,
                       const ClusterTopology& topo);

// Seeded replica placement over the topology. Each block draws from its own
// "placement/<block-id>" stream of the scenario seed, so a block's replicas
// at replication r are a prefix-superset of those at r-1. Procedure:
//   1. first replica: uniform over all nodes (id order);
//   2. if replication >= 2 and the cluster has >= 2 racks, second replica:
//      uniform over nodes outside the first replica's rack;
//   3. remaining replicas: uniform over the still-unchosen nodes.
BlockMap place_blocks(const std::vector<std::pair<BlockId, double>>& blocks,
                      int replication, const ClusterTopology& topo,
                      std::uint64_t seed);

}  // namespace mrsim
