#pragma once

#include <deque>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "uavmtd/swarm_dynamics.hpp"

namespace uavmtd {

/// Node 0 is the ground control station; UAV u (0-based) is node u + 1.
inline constexpr int kGcsNode = 0;
inline constexpr int node_of(int uav) { return uav + 1; }
inline constexpr int uav_of(int node) { return node - 1; }

/// Unordered node pair stored with a < b.
struct Link {
  int a = 0;
  int b = 0;

  Link() = default;
  Link(int i, int j) : a(std::min(i, j)), b(std::max(i, j)) {}

  bool operator==(const Link&) const = default;
  auto operator<=>(const Link&) const = default;
};

using AdjacencyMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Per-step communication snapshot.
///
/// `radio` holds the range-and-channel edges; `edges` is `radio` minus the
/// suppressed (effectively jammed) links. `routes` maps a node to the relay
/// UAV currently forwarding its command stream.
struct CommGraph {
  AdjacencyMatrix radio;
  AdjacencyMatrix edges;
  std::vector<int> channels;
  std::vector<Link> suppressed;
  std::map<int, int> routes;

  int node_count() const { return static_cast<int>(channels.size()); }
  bool has_radio_edge(int i, int j) const { return i != j && radio(i, j); }
  bool has_edge(int i, int j) const { return i != j && edges(i, j); }
  bool is_suppressed(int i, int j) const;
  std::vector<Link> edge_list() const;
};

/// Radio edge test: within range and on the same channel.
bool radio_link(const Vec3<double>& pi, const Vec3<double>& pj, int fi, int fj, double comm_range);

CommGraph build_graph(std::span<const Vec3<double>> positions, std::span<const int> channels,
                      double comm_range, std::span<const Link> suppressed = {},
                      const std::map<int, int>& routes = {});

/// Whether the command stream reaches node `node`.
///
/// The leader is fed by the GCS: directly or through its installed relay.
/// A follower is fed by a leader that is itself fed: directly, through one
/// forwarding UAV, through its installed relay, or by acting as the relay of
/// an installed route. A node under an effective node attack is never fed
/// and never forwards.
bool connectivity_indicator(const CommGraph& graph, int leader, int node,
                            const std::vector<bool>& node_attacked);

/// connectivity_indicator for every UAV, indexed by UAV (node - 1).
std::vector<int> connectivity(const CommGraph& graph, int leader,
                              const std::vector<bool>& node_attacked);

/// Upstream of a node in the command tree: the GCS for the leader, the
/// leader otherwise.
inline int upstream_of(int node, int leader) { return node == leader ? kGcsNode : leader; }

/// Whether relay `relay` can carry `node`'s command stream: the
/// upstream-to-relay link is not jammed and relay-to-node is an edge.
bool relay_eligible(const CommGraph& graph, int leader, int node, int relay,
                    const std::vector<bool>& node_attacked);

/// Sliding window of the last W connectivity bits per UAV.
class HeartbeatTracker {
 public:
  HeartbeatTracker() = default;
  HeartbeatTracker(int n_uavs, int window);

  void update(std::span<const int> bits);

  /// Fraction of acknowledged beats over the available history (at most W).
  /// An empty history scores 1.
  double score(int uav) const;
  bool is_disconnected(int uav, double threshold) const { return score(uav) < threshold; }

  int window() const { return window_; }
  std::size_t history(int uav) const { return bits_[uav].size(); }

 private:
  int window_ = 1;
  std::vector<std::deque<int>> bits_;
};

}  // namespace uavmtd
