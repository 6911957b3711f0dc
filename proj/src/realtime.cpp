#include "rths/realtime.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace rths {

namespace {

std::int64_t quantize(double v) { return std::llround(v / kCostEpsilon); }

}  // namespace

AStarSearch::AStarSearch(const SearchSpace& space, StateId root, StateId goal)
    : space_(&space),
      root_(root),
      goal_(goal),
      g_(space.size(), kInfinity),
      parent_(space.size(), kNoState),
      closed_(space.size(), false) {
  g_[root] = 0;
  parent_[root] = root;
  push(root, 0);
}

void AStarSearch::push(StateId s, double g) {
  const double f = g + space_->h(s, goal_);
  heap_.push_back({quantize(f), quantize(g), s, g});
  std::push_heap(heap_.begin(), heap_.end(), Worse{});
}

StateId AStarSearch::best_open() {
  while (!heap_.empty() && stale(heap_.front())) {
    std::pop_heap(heap_.begin(), heap_.end(), Worse{});
    heap_.pop_back();
  }
  return heap_.empty() ? kNoState : heap_.front().id;
}

void AStarSearch::expand(std::uint64_t budget) {
  for (std::uint64_t i = 0; i < budget && !goal_found_ && !exhausted_; ++i) {
    const StateId s = best_open();
    if (s == kNoState) {
      exhausted_ = true;
      break;
    }
    std::pop_heap(heap_.begin(), heap_.end(), Worse{});
    heap_.pop_back();
    closed_[s] = true;
    ++closed_count_;
    ++expansions_;
    if (s == goal_) {
      goal_found_ = true;
      break;
    }
    for (const auto& e : space_->neighbors(s)) {
      const double ng = g_[s] + e.cost;
      if (g_[e.to] == kInfinity || quantize(ng) < quantize(g_[e.to])) {
        g_[e.to] = ng;
        parent_[e.to] = s;
        if (closed_[e.to]) {
          closed_[e.to] = false;
          --closed_count_;
        }
        push(e.to, ng);
      }
    }
  }
}

std::uint64_t AStarSearch::open_count() const {
  std::uint64_t n = 0;
  std::vector<bool> seen(space_->size(), false);
  for (const auto& e : heap_) {
    if (!stale(e) && !seen[e.id]) {
      seen[e.id] = true;
      ++n;
    }
  }
  return n;
}

std::vector<StateId> AStarSearch::path_to(StateId s) const {
  std::vector<StateId> path;
  for (StateId cur = s;; cur = parent_[cur]) {
    path.push_back(cur);
    if (cur == root_) break;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

std::pair<Solution, AStarStats> astar(const SearchSpace& space, const Problem& problem) {
  AStarSearch search(space, problem.start, problem.goal);
  search.expand(std::numeric_limits<std::uint64_t>::max());
  Solution sol;
  sol.expansions = search.expansions();
  AStarStats stats{search.closed_count(), search.open_count()};
  if (search.goal_found()) {
    sol.path = search.path_to(problem.goal);
    sol.cost = search.g(problem.goal);
    sol.solved = true;
  } else {
    sol.path = {problem.start};
  }
  sol.tally_visits();
  return {std::move(sol), stats};
}

ShortestPathTree dijkstra_tree(const SearchSpace& space, StateId root) {
  ShortestPathTree tree{std::vector<double>(space.size(), kInfinity),
                        std::vector<StateId>(space.size(), kNoState)};
  using Item = std::pair<double, StateId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  tree.dist[root] = 0;
  tree.parent[root] = root;
  pq.push({0, root});
  while (!pq.empty()) {
    const auto [d, s] = pq.top();
    pq.pop();
    if (d > tree.dist[s]) continue;
    for (const auto& e : space.neighbors(s)) {
      const double nd = d + e.cost;
      if (nd < tree.dist[e.to]) {
        tree.dist[e.to] = nd;
        tree.parent[e.to] = s;
        pq.push({nd, e.to});
      }
    }
  }
  return tree;
}

std::vector<StateId> ShortestPathTree::path_to(StateId target) const {
  std::vector<StateId> path;
  if (parent[target] == kNoState) return path;
  for (StateId cur = target;; cur = parent[cur]) {
    path.push_back(cur);
    if (parent[cur] == cur) break;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

std::vector<double> dijkstra_from(const SearchSpace& space, StateId goal) {
  if (!space.valid(goal)) throw UsageError("invalid goal state");
  // undirected graph: distance to goal equals distance from goal
  return dijkstra_tree(space, goal).dist;
}

namespace {

struct LssScratch {
  std::vector<int> depth;
  std::vector<double> g;
  std::vector<StateId> parent;
  std::vector<StateId> members;
};

/// One LRTA* planning step for depth > 1. Returns the chosen frontier state
/// and its g, plus the first move toward it.
struct LssChoice {
  StateId frontier = kNoState;
  double f = kInfinity;
  StateId first_move = kNoState;
  double first_cost = 0;
};

LssChoice plan_deep(const SearchSpace& space, const HeuristicOverlay& overlay, StateId s,
                    int d, LssScratch& scratch, std::uint64_t& expansions) {
  auto& depth = scratch.depth;
  auto& g = scratch.g;
  auto& parent = scratch.parent;
  auto& members = scratch.members;
  if (depth.size() != space.size()) {
    depth.assign(space.size(), -1);
    g.assign(space.size(), kInfinity);
    parent.assign(space.size(), kNoState);
  }
  members.clear();
  depth[s] = 0;
  members.push_back(s);
  for (std::size_t i = 0; i < members.size(); ++i) {
    const StateId u = members[i];
    if (depth[u] == d) continue;
    ++expansions;
    for (const auto& e : space.neighbors(u)) {
      if (depth[e.to] < 0) {
        depth[e.to] = depth[u] + 1;
        members.push_back(e.to);
      }
    }
  }
  // Dijkstra restricted to the LSS
  using Item = std::pair<double, StateId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  g[s] = 0;
  parent[s] = s;
  pq.push({0, s});
  while (!pq.empty()) {
    const auto [gu, u] = pq.top();
    pq.pop();
    if (gu > g[u]) continue;
    for (const auto& e : space.neighbors(u)) {
      if (depth[e.to] < 0) continue;
      const double ng = gu + e.cost;
      if (ng < g[e.to]) {
        g[e.to] = ng;
        parent[e.to] = u;
        pq.push({ng, e.to});
      }
    }
  }

  std::vector<StateId> candidates;
  for (StateId u : members) {
    if (u == s) continue;
    bool frontier = depth[u] == d || u == overlay.target();
    if (!frontier) {
      for (const auto& e : space.neighbors(u)) {
        if (depth[e.to] < 0) {
          frontier = true;
          break;
        }
      }
    }
    if (frontier) candidates.push_back(u);
  }
  std::sort(candidates.begin(), candidates.end());
  LssChoice choice;
  for (StateId u : candidates) {
    const double f = g[u] + overlay.value(u);
    if (f < choice.f - kCostEpsilon) {
      choice.f = f;
      choice.frontier = u;
    }
  }
  if (choice.frontier != kNoState) {
    StateId step = choice.frontier;
    while (parent[step] != s) step = parent[step];
    choice.first_move = step;
    choice.first_cost = g[step];
  }
  for (StateId u : members) {
    depth[u] = -1;
    g[u] = kInfinity;
    parent[u] = kNoState;
  }
  return choice;
}

}  // namespace

bool lrta_leg(const SearchSpace& space, HeuristicOverlay& overlay, int depth,
              std::uint64_t& budget, Solution& sol, const std::function<bool(StateId)>& stop) {
  const StateId target = overlay.target();
  StateId s = sol.path.back();
  LssScratch scratch;
  const std::uint64_t writes_before = overlay.writes();
  while (s != target) {
    if (budget == 0) {
      sol.heuristic_writes += overlay.writes() - writes_before;
      return false;
    }
    StateId next = kNoState;
    double next_cost = 0;
    double best = kInfinity;
    if (depth <= 1) {
      ++sol.expansions;
      for (const auto& e : space.neighbors(s)) {
        const double f = e.cost + overlay.value(e.to);
        if (f < best - kCostEpsilon) {
          best = f;
          next = e.to;
          next_cost = e.cost;
        }
      }
    } else {
      const auto choice = plan_deep(space, overlay, s, depth, scratch, sol.expansions);
      best = choice.f;
      next = choice.first_move;
      next_cost = choice.first_cost;
    }
    if (next == kNoState) {
      sol.heuristic_writes += overlay.writes() - writes_before;
      return false;  // isolated state
    }
    overlay.raise(s, best);
    sol.move_to(next, next_cost);
    --budget;
    s = next;
    if (stop && s != target && stop(s)) break;
  }
  sol.heuristic_writes += overlay.writes() - writes_before;
  return s == target;
}

Solution lrta_star(const SearchSpace& space, const Problem& problem, const LssConfig& cfg) {
  if (cfg.depth < 1) throw UsageError("lookahead depth must be at least 1");
  Solution sol;
  sol.path = {problem.start};
  HeuristicOverlay overlay(space, problem.goal);
  std::uint64_t budget = cfg.cap_for(space);
  sol.solved = lrta_leg(space, overlay, cfg.depth, budget, sol);
  sol.step_cap_hit = !sol.solved && budget == 0;
  sol.tally_visits();
  return sol;
}

namespace {

template <bool kRecord>
bool climb(const SearchSpace& space, StateId from, StateId to, std::uint64_t b,
           std::vector<StateId>* path, double* cost) {
  StateId s = from;
  for (std::uint64_t i = 0; s != to && i < b; ++i) {
    const double hs = space.h(s, to);
    bool descends = false;
    StateId best = kNoState;
    double best_f = kInfinity;
    double best_c = 0;
    for (const auto& e : space.neighbors(s)) {
      const double hn = space.h(e.to, to);
      if (hn < hs - kCostEpsilon) descends = true;
      const double f = e.cost + hn;
      if (f < best_f - kCostEpsilon) {
        best_f = f;
        best = e.to;
        best_c = e.cost;
      }
    }
    if (!descends) return false;
    s = best;
    if constexpr (kRecord) {
      path->push_back(s);
      *cost += best_c;
    }
  }
  return s == to;
}

}  // namespace

HillClimbResult hill_climb(const SearchSpace& space, StateId from, StateId to, std::uint64_t b) {
  if (!space.valid(from) || !space.valid(to)) throw UsageError("invalid hill-climb endpoint");
  HillClimbResult r;
  r.path.push_back(from);
  r.reached = climb<true>(space, from, to, b, &r.path, &r.cost);
  return r;
}

bool hc_reachable(const SearchSpace& space, StateId from, StateId to, std::uint64_t b) {
  return climb<false>(space, from, to, b, nullptr, nullptr);
}

bool append_hill_climb(const SearchSpace& space, StateId to, std::uint64_t b, Solution& sol) {
  auto r = hill_climb(space, sol.path.back(), to, b);
  if (!r.reached) return false;
  sol.path.insert(sol.path.end(), r.path.begin() + 1, r.path.end());
  sol.cost += r.cost;
  sol.expansions += r.path.size() - 1;
  return true;
}

Solution tba_star(const SearchSpace& space, const Problem& problem,
                  std::uint64_t expansions_per_move, std::uint64_t step_cap) {
  if (expansions_per_move < 1) throw UsageError("TBA* needs at least one expansion per move");
  const std::uint64_t cap = step_cap != 0 ? step_cap : 100ULL * space.size();
  AStarSearch search(space, problem.start, problem.goal);
  Solution sol;
  sol.path = {problem.start};
  std::vector<StateId> trail{problem.start};
  StateId agent = problem.start;
  std::vector<StateId> route;
  std::uint64_t steps = 0;
  while (agent != problem.goal) {
    if (steps++ >= cap) {
      sol.step_cap_hit = true;
      break;
    }
    search.expand(expansions_per_move);
    if (search.exhausted() && !search.goal_found()) break;
    const StateId target = search.goal_found() ? problem.goal : search.best_open();
    if (target == kNoState) break;  // open list ran dry: goal unreachable
    route = search.path_to(target);
    auto it = std::find(route.begin(), route.end(), agent);
    StateId next = kNoState;
    if (it != route.end()) {
      if (it + 1 == route.end()) continue;  // standing on the target; keep planning
      next = *(it + 1);
      trail.push_back(next);
    } else {
      trail.pop_back();
      next = trail.back();
    }
    sol.move_to(next, space.edge_cost(agent, next));
    agent = next;
  }
  sol.expansions = search.expansions();
  sol.solved = agent == problem.goal;
  sol.tally_visits();
  return sol;
}

}  // namespace rths
