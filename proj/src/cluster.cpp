#include "mrsim/cluster.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <sstream>

namespace mrsim {

const char* to_string(LocalityClass c) {
  switch (c) {
    case LocalityClass::NodeLocal: return "node";
    case LocalityClass::RackLocal: return "rack";
    case LocalityClass::Remote: return "remote";
  }
  return "?";
}

ClusterTopology::ClusterTopology(std::vector<RackId> racks,
                                 std::vector<NodeSpec> nodes,
                                 double intra_rack_rate_mbps,
                                 double cross_rack_rate_mbps)
    : racks_(std::move(racks)),
      nodes_(std::move(nodes)),
      intra_rack_rate_(intra_rack_rate_mbps),
      cross_rack_rate_(cross_rack_rate_mbps) {
  if (racks_.empty()) throw ConfigError("topology: no racks");
  if (nodes_.empty()) throw ConfigError("topology: no nodes");
  if (intra_rack_rate_ <= 0 || cross_rack_rate_ <= 0)
    throw ConfigError("topology: link rates must be > 0");
  if (cross_rack_rate_ > intra_rack_rate_)
    throw ConfigError("topology: cross_rack_rate must be <= intra_rack_rate");

  std::set<RackId> rack_set(racks_.begin(), racks_.end());
  if (rack_set.size() != racks_.size())
    throw ConfigError("topology: duplicate rack ids");

  std::sort(nodes_.begin(), nodes_.end(),
            [](const NodeSpec& a, const NodeSpec& b) { return a.id < b.id; });
  for (int i = 0; i < static_cast<int>(nodes_.size()); ++i) {
    const NodeSpec& n = nodes_[i];
    if (by_id_.count(n.id))
      throw ConfigError("topology: duplicate node id " + std::to_string(n.id));
    if (!rack_set.count(n.rack))
      throw ConfigError("topology: node " + std::to_string(n.id) +
                        " references unknown rack " + std::to_string(n.rack));
    if (n.map_slots < 1)
      throw ConfigError("topology: node " + std::to_string(n.id) +
                        " must have map_slots >= 1");
    if (n.reduce_slots < 0)
      throw ConfigError("topology: node " + std::to_string(n.id) +
                        " has negative reduce_slots");
    if (n.proc_rate_mbps <= 0)
      throw ConfigError("topology: node " + std::to_string(n.id) +
                        " must have proc_rate > 0");
    by_id_[n.id] = i;
  }
}

const NodeSpec& ClusterTopology::node(NodeId id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end())
    throw ConfigError("topology: unknown node id " + std::to_string(id));
  return nodes_[it->second];
}

double ClusterTopology::link_rate(NodeId a, NodeId b) const {
  return rack_of(a) == rack_of(b) ? intra_rack_rate_ : cross_rack_rate_;
}

int ClusterTopology::total_map_slots() const {
  int sum = 0;
  for (const NodeSpec& n : nodes_) sum += n.map_slots;
  return sum;
}

void BlockMap::declare(BlockId id, double size_mb, std::set<NodeId> replicas) {
  if (size_mb <= 0)
    throw ConfigError("block " + std::to_string(id) + ": size must be > 0");
  if (replicas.empty())
    throw ConfigError("block " + std::to_string(id) + ": empty replica set");
  if (blocks_.count(id))
    throw ConfigError("block " + std::to_string(id) + ": declared twice");
  BlockInfo info;
  info.size_mb = size_mb;
  info.origin_replicas = replicas;
  info.replicas = std::move(replicas);
  blocks_.emplace(id, std::move(info));
}

void BlockMap::add_replica(BlockId id, NodeId node) {
  auto it = blocks_.find(id);
  if (it == blocks_.end())
    throw SimError("add_replica: unknown block " + std::to_string(id));
  it->second.replicas.insert(node);
}

const BlockInfo& BlockMap::info(BlockId id) const {
  auto it = blocks_.find(id);
  if (it == blocks_.end())
    throw SimError("unknown block " + std::to_string(id));
  return it->second;
}

int topology_distance(NodeId a, NodeId b, const ClusterTopology& topo) {
  if (a == b) {
    topo.node(a);  // still validate the id
    return 0;
  }
  return topo.rack_of(a) == topo.rack_of(b) ? 2 : 4;
}

LocalityClass classify_locality(NodeId exec_node, BlockId block,
                                const BlockMap& blocks,
                                const ClusterTopology& topo) {
  const BlockInfo& info = blocks.info(block);
  if (info.replicas.count(exec_node)) return LocalityClass::NodeLocal;
  const RackId rack = topo.rack_of(exec_node);
  for (NodeId r : info.replicas)
    if (topo.rack_of(r) == rack) return LocalityClass::RackLocal;
  return LocalityClass::Remote;
}

NodeId nearest_replica(BlockId block, NodeId target, const BlockMap& blocks,
                       const ClusterTopology& topo) {
  const BlockInfo& info = blocks.info(block);
  if (info.replicas.empty())
    throw SimError("block " + std::to_string(block) + " has no replicas");
  NodeId best = kInvalidId;
  int best_dist = std::numeric_limits<int>::max();
  for (NodeId r : info.replicas) {  // std::set iterates in ascending id order
    const int d = topology_distance(r, target, topo);
    if (d < best_dist) {
      best_dist = d;
      best = r;
    }
  }
  return best;
}

BlockMap place_blocks(const std::vector<std::pair<BlockId, double>>& blocks,
                      int replication, const ClusterTopology& topo,
                      std::uint64_t seed) {
  const auto& nodes = topo.nodes();
  const int n = static_cast<int>(nodes.size());
  if (replication < 1)
    throw ConfigError("replication must be >= 1, got " +
                      std::to_string(replication));
  if (replication > n)
    throw ConfigError("replication " + std::to_string(replication) +
                      " exceeds node count " + std::to_string(n));
  const bool rack_aware = replication >= 2 && topo.racks().size() >= 2;

  BlockMap out;
  for (const auto& [id, size_mb] : blocks) {
    // One stream per block: raising replication only appends replicas, it
    // never reshuffles the copies lower replication levels already placed.
    SeedStream stream(seed, "placement/" + std::to_string(id));
    std::set<NodeId> chosen;
    const NodeId first = nodes[stream.next_below(n)].id;
    chosen.insert(first);
    if (rack_aware && replication >= 2) {
      std::vector<NodeId> other_rack;
      for (const NodeSpec& cand : nodes)
        if (cand.rack != topo.rack_of(first)) other_rack.push_back(cand.id);
      // A declared rack may hold no nodes, so the off-rack pool can be empty.
      if (!other_rack.empty())
        chosen.insert(other_rack[stream.next_below(other_rack.size())]);
    }
    while (static_cast<int>(chosen.size()) < replication) {
      std::vector<NodeId> rest;
      for (const NodeSpec& cand : nodes)
        if (!chosen.count(cand.id)) rest.push_back(cand.id);
      chosen.insert(rest[stream.next_below(rest.size())]);
    }
    out.declare(id, size_mb, std::move(chosen));
  }
  return out;
}

}  // namespace mrsim
