#include "uavmtd/network.hpp"

#include <algorithm>
#include <cassert>

namespace uavmtd {

bool CommGraph::is_suppressed(int i, int j) const {
  const Link l(i, j);
  return std::find(suppressed.begin(), suppressed.end(), l) != suppressed.end();
}

std::vector<Link> CommGraph::edge_list() const {
  std::vector<Link> out;
  for (int i = 0; i < node_count(); ++i) {
    for (int j = i + 1; j < node_count(); ++j) {
      if (edges(i, j)) out.emplace_back(i, j);
    }
  }
  return out;
}

bool radio_link(const Vec3<double>& pi, const Vec3<double>& pj, int fi, int fj, double comm_range) {
  return fi == fj && (pi - pj).norm() <= comm_range;
}

CommGraph build_graph(std::span<const Vec3<double>> positions, std::span<const int> channels,
                      double comm_range, std::span<const Link> suppressed,
                      const std::map<int, int>& routes) {
  assert(positions.size() == channels.size());
  const auto n = static_cast<Eigen::Index>(positions.size());
  CommGraph g;
  g.channels.assign(channels.begin(), channels.end());
  g.radio = AdjacencyMatrix::Constant(n, n, false);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const bool e = radio_link(positions[i], positions[j], channels[i], channels[j], comm_range);
      g.radio(i, j) = e;
      g.radio(j, i) = e;
    }
  }
  g.edges = g.radio;
  g.suppressed.assign(suppressed.begin(), suppressed.end());
  for (const Link& l : g.suppressed) {
    g.edges(l.a, l.b) = false;
    g.edges(l.b, l.a) = false;
  }
  g.routes = routes;
  return g;
}

namespace {

bool attacked(const std::vector<bool>& node_attacked, int node) {
  return node < static_cast<int>(node_attacked.size()) && node_attacked[node];
}

bool route_carries(const CommGraph& g, int leader, int node, const std::vector<bool>& node_attacked) {
  const auto it = g.routes.find(node);
  return it != g.routes.end() && relay_eligible(g, leader, node, it->second, node_attacked);
}

bool leader_fed(const CommGraph& g, int leader, const std::vector<bool>& node_attacked) {
  if (attacked(node_attacked, leader)) return false;
  return g.has_edge(kGcsNode, leader) || route_carries(g, leader, leader, node_attacked);
}

}  // namespace

bool relay_eligible(const CommGraph& g, int leader, int node, int relay,
                    const std::vector<bool>& node_attacked) {
  const int up = upstream_of(node, leader);
  if (relay == kGcsNode || relay == node || relay == up) return false;
  if (attacked(node_attacked, relay)) return false;
  return !g.is_suppressed(up, relay) && g.has_edge(relay, node);
}

bool connectivity_indicator(const CommGraph& g, int leader, int node,
                            const std::vector<bool>& node_attacked) {
  assert(node != kGcsNode);
  if (!leader_fed(g, leader, node_attacked)) return false;
  if (node == leader) return true;
  if (attacked(node_attacked, node)) return false;
  if (g.has_edge(leader, node)) return true;

  for (int r = 1; r < g.node_count(); ++r) {
    if (r == leader || r == node || attacked(node_attacked, r)) continue;
    if (g.has_edge(leader, r) && g.has_edge(r, node)) return true;
  }
  if (route_carries(g, leader, node, node_attacked)) return true;

  // A relay serving an installed route carries the command stream itself.
  for (const auto& [routed, relay] : g.routes) {
    if (relay == node && route_carries(g, leader, routed, node_attacked)) return true;
  }
  return false;
}

std::vector<int> connectivity(const CommGraph& g, int leader, const std::vector<bool>& node_attacked) {
  std::vector<int> e(static_cast<std::size_t>(g.node_count() - 1), 0);
  for (int node = 1; node < g.node_count(); ++node) {
    e[uav_of(node)] = connectivity_indicator(g, leader, node, node_attacked) ? 1 : 0;
  }
  return e;
}

HeartbeatTracker::HeartbeatTracker(int n_uavs, int window)
    : window_(window), bits_(static_cast<std::size_t>(n_uavs)) {}

void HeartbeatTracker::update(std::span<const int> bits) {
  assert(bits.size() == bits_.size());
  for (std::size_t u = 0; u < bits_.size(); ++u) {
    bits_[u].push_back(bits[u] ? 1 : 0);
    while (static_cast<int>(bits_[u].size()) > window_) bits_[u].pop_front();
  }
}

double HeartbeatTracker::score(int uav) const {
  const auto& h = bits_[static_cast<std::size_t>(uav)];
  if (h.empty()) return 1.0;
  int acked = 0;
  for (int b : h) acked += b;
  return static_cast<double>(acked) / static_cast<double>(h.size());
}

}  // namespace uavmtd
