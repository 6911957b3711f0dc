#include "rths/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

namespace rths {

double SearchSpace::euclid(double dx, double dy) noexcept { return std::sqrt(dx * dx + dy * dy); }

SearchSpace SearchSpace::from_edges(std::size_t state_count, std::span<const UndirectedEdge> edges,
                                    std::vector<Point> coords, HeuristicKind kind) {
  if (coords.size() != state_count) {
    throw UsageError("coordinate count " + std::to_string(coords.size()) +
                     " does not match state count " + std::to_string(state_count));
  }
  std::vector<std::vector<Edge>> adj(state_count);
  for (const auto& e : edges) {
    if (e.u >= state_count || e.v >= state_count) throw UsageError("edge endpoint out of range");
    if (e.u == e.v) throw UsageError("self-loop on state " + std::to_string(e.u));
    if (!(e.cost > 0) || !std::isfinite(e.cost)) {
      throw UsageError("non-positive edge cost between " + std::to_string(e.u) + " and " +
                       std::to_string(e.v));
    }
    adj[e.u].push_back({e.v, e.cost});
    adj[e.v].push_back({e.u, e.cost});
  }

  SearchSpace space;
  space.kind_ = kind;
  space.coords_ = std::move(coords);
  space.offsets_.assign(state_count + 1, 0);
  for (std::size_t s = 0; s < state_count; ++s) {
    auto& list = adj[s];
    std::sort(list.begin(), list.end(), [](const Edge& a, const Edge& b) {
      return a.to != b.to ? a.to < b.to : a.cost < b.cost;
    });
    // keep the cheapest of parallel edges
    list.erase(std::unique(list.begin(), list.end(),
                           [](const Edge& a, const Edge& b) { return a.to == b.to; }),
               list.end());
    space.offsets_[s + 1] = space.offsets_[s] + static_cast<std::uint32_t>(list.size());
    space.targets_.insert(space.targets_.end(), list.begin(), list.end());
  }
  return space;
}

std::span<const Edge> SearchSpace::neighbors(StateId s) const {
  return {targets_.data() + offsets_[s], targets_.data() + offsets_[s + 1]};
}

double SearchSpace::edge_cost(StateId a, StateId b) const {
  const auto nbrs = neighbors(a);
  auto it = std::lower_bound(nbrs.begin(), nbrs.end(), b,
                             [](const Edge& e, StateId id) { return e.to < id; });
  return it != nbrs.end() && it->to == b ? it->cost : kInfinity;
}

double SearchSpace::enable_admissible_scaling() {
  double factor = kInfinity;
  const double saved = h_scale_;
  h_scale_ = 1.0;
  for (StateId s = 0; s < size(); ++s) {
    for (const auto& e : neighbors(s)) {
      const double d = h(s, e.to);
      if (d > 0) factor = std::min(factor, e.cost / d);
    }
  }
  h_scale_ = std::isfinite(factor) ? std::min(1.0, factor) : saved;
  return h_scale_;
}

SearchSpace SearchSpace::induced(std::span<const StateId> keep) const {
  std::vector<StateId> remap(size(), kNoState);
  for (std::size_t i = 0; i < keep.size(); ++i) remap[keep[i]] = static_cast<StateId>(i);
  std::vector<UndirectedEdge> edges;
  std::vector<Point> pts;
  pts.reserve(keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    pts.push_back(coords_[keep[i]]);
    for (const auto& e : neighbors(keep[i])) {
      const StateId j = remap[e.to];
      if (j != kNoState && i < j) edges.push_back({static_cast<StateId>(i), j, e.cost});
    }
  }
  SearchSpace sub = from_edges(keep.size(), edges, std::move(pts), kind_);
  sub.h_scale_ = h_scale_;
  return sub;
}

namespace {

struct Fnv1a {
  std::uint64_t state = 1469598103934665603ULL;
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      state ^= p[i];
      state *= 1099511628211ULL;
    }
  }
  template <typename T>
  void value(T v) {
    bytes(&v, sizeof v);
  }
};

}  // namespace

std::uint64_t SearchSpace::fingerprint() const {
  Fnv1a f;
  f.value<std::uint64_t>(size());
  f.value<int>(kind_ == HeuristicKind::kOctile ? 0 : 1);
  f.value(h_scale_);
  for (StateId s = 0; s < size(); ++s) {
    f.value(coords_[s].x);
    f.value(coords_[s].y);
    for (const auto& e : neighbors(s)) {
      f.value(e.to);
      f.value(e.cost);
    }
  }
  return f.state;
}

std::span<const Edge> neighbors(const SearchSpace& space, StateId s) {
  if (!space.valid(s)) throw UsageError("invalid state id " + std::to_string(s));
  return space.neighbors(s);
}

double base_h(const SearchSpace& space, StateId a, StateId b) {
  if (!space.valid(a) || !space.valid(b)) throw UsageError("invalid state id in heuristic query");
  return space.h(a, b);
}

Problem Problem::make(const SearchSpace& space, StateId start, StateId goal) {
  if (!space.valid(start) || !space.valid(goal)) throw UsageError("problem endpoint out of range");
  if (start == goal) throw UsageError("problem start equals goal");
  return {start, goal};
}

void Solution::tally_visits() {
  visit_counts.clear();
  for (StateId s : path) ++visit_counts[s];
}

double suboptimality(double solution_cost, double optimal_cost) {
  if (!(optimal_cost > 0)) throw UsageError("optimal cost must be positive");
  return solution_cost / optimal_cost;
}

std::string validate_solution(const SearchSpace& space, const Problem& problem,
                              const Solution& sol) {
  if (!sol.solved) return "not solved";
  if (sol.path.empty()) return "empty path";
  if (sol.path.front() != problem.start) return "path does not begin at start";
  if (sol.path.back() != problem.goal) return "path does not end at goal";
  double cost = 0;
  for (std::size_t i = 1; i < sol.path.size(); ++i) {
    const double c = space.edge_cost(sol.path[i - 1], sol.path[i]);
    if (!std::isfinite(c)) {
      std::ostringstream os;
      os << "states " << sol.path[i - 1] << " and " << sol.path[i] << " are not adjacent";
      return os.str();
    }
    cost += c;
  }
  if (std::abs(cost - sol.cost) > kCostEpsilon * std::max(1.0, cost)) {
    std::ostringstream os;
    os << "recorded cost " << sol.cost << " differs from edge sum " << cost;
    return os.str();
  }
  for (StateId s : sol.path) {
    auto it = sol.visit_counts.find(s);
    if (it == sol.visit_counts.end() || it->second == 0) return "path state without visit count";
  }
  return {};
}

HeuristicOverlay::HeuristicOverlay(const SearchSpace& space, StateId target)
    : space_(&space), target_(target) {}

bool HeuristicOverlay::raise(StateId s, double v) {
  if (learned_.size() < space_->size()) {
    learned_.assign(space_->size(), std::numeric_limits<double>::quiet_NaN());
  }
  const double current = value(s);
  ++writes_;
  if (!has(s)) touched_.push_back(s);
  if (v > current) {
    learned_[s] = v;
    return true;
  }
  learned_[s] = current;
  return false;
}

void HeuristicOverlay::reset(StateId target) {
  for (StateId s : touched_) learned_[s] = std::numeric_limits<double>::quiet_NaN();
  touched_.clear();
  target_ = target;
}

double effective_h(const HeuristicOverlay& overlay, const SearchSpace& space, StateId s,
                   StateId goal) {
  if (overlay.target() != goal) throw UsageError("overlay belongs to a different goal");
  if (!space.valid(s)) throw UsageError("invalid state id " + std::to_string(s));
  return overlay.value(s);
}

}  // namespace rths
