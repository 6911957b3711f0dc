#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "rths/core.hpp"

namespace rths {

struct LssConfig {
  /// Lookahead depth in moves.
  int depth = 1;
  /// Global move budget per problem; 0 means 100 * |S|.
  std::uint64_t step_cap = 0;

  std::uint64_t cap_for(const SearchSpace& space) const {
    return step_cap != 0 ? step_cap : 100ULL * static_cast<std::uint64_t>(space.size());
  }
};

struct AStarStats {
  std::uint64_t closed = 0;
  std::uint64_t open = 0;
};

/// Incremental A* from a fixed root toward a fixed goal. Open-list order is
/// f ascending, then g descending, then id ascending; f and g are compared
/// after rounding to the cost tolerance. Closed states are reopened when a
/// cheaper path shows up (needed for inconsistent heuristics).
class AStarSearch {
 public:
  AStarSearch(const SearchSpace& space, StateId root, StateId goal);

  /// Expands up to `budget` states. Stops early once the goal is selected for
  /// expansion or the open list is empty.
  void expand(std::uint64_t budget);

  bool goal_found() const noexcept { return goal_found_; }
  bool exhausted() const noexcept { return exhausted_; }

  /// Head of the open list (kNoState if empty). Discards stale entries.
  StateId best_open();

  /// Root-to-`s` path following parent links; `s` must have been generated.
  std::vector<StateId> path_to(StateId s) const;

  double g(StateId s) const { return g_[s]; }
  std::uint64_t expansions() const noexcept { return expansions_; }
  std::uint64_t closed_count() const noexcept { return closed_count_; }
  std::uint64_t open_count() const;

 private:
  struct Entry {
    std::int64_t qf;
    std::int64_t qg;
    StateId id;
    double g;
  };
  struct Worse {
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.qf != b.qf) return a.qf > b.qf;
      if (a.qg != b.qg) return a.qg < b.qg;
      return a.id > b.id;
    }
  };
  void push(StateId s, double g);
  bool stale(const Entry& e) const { return closed_[e.id] || e.g != g_[e.id]; }

  const SearchSpace* space_;
  StateId root_;
  StateId goal_;
  std::vector<double> g_;
  std::vector<StateId> parent_;
  std::vector<bool> closed_;
  std::vector<Entry> heap_;
  std::uint64_t expansions_ = 0;
  std::uint64_t closed_count_ = 0;
  bool goal_found_ = false;
  bool exhausted_ = false;
};

/// Optimal path by A*. An unreachable goal yields solved == false.
std::pair<Solution, AStarStats> astar(const SearchSpace& space, const Problem& problem);

/// Exact cost-to-goal for every state; unreachable states hold infinity.
std::vector<double> dijkstra_from(const SearchSpace& space, StateId goal);

/// Single-source shortest paths with predecessor links (parent[root] = root,
/// kNoState if unreachable).
struct ShortestPathTree {
  std::vector<double> dist;
  std::vector<StateId> parent;

  std::vector<StateId> path_to(StateId target) const;
};
ShortestPathTree dijkstra_tree(const SearchSpace& space, StateId root);

/// Runs LRTA* moves from the last state of `sol.path` toward `overlay.target()`
/// until the target is reached, `budget` moves are spent, or `stop` returns
/// true for the state just entered. Appends moves to `sol`; returns true when
/// the target was reached. Ties between frontier states go to the smaller id.
bool lrta_leg(const SearchSpace& space, HeuristicOverlay& overlay, int depth,
              std::uint64_t& budget, Solution& sol,
              const std::function<bool(StateId)>& stop = {});

/// LRTA* with a fresh heuristic overlay. A blown step cap yields an unsolved
/// solution that keeps its partial statistics.
Solution lrta_star(const SearchSpace& space, const Problem& problem, const LssConfig& cfg);

struct HillClimbResult {
  bool reached = false;
  std::vector<StateId> path;
  double cost = 0;
};

/// Greedy agent without learning: stops at a state whose heuristic is <= all
/// of its neighbours' or after `b` moves, otherwise moves to the neighbour
/// minimizing edge cost + h (ties to the smaller id).
HillClimbResult hill_climb(const SearchSpace& space, StateId from, StateId to, std::uint64_t b);

/// Same decision procedure as hill_climb without recording the path.
bool hc_reachable(const SearchSpace& space, StateId from, StateId to, std::uint64_t b);

/// Time-bounded A*: `expansions_per_move` A* expansions, then one agent move
/// toward the best open state, backtracking along its own trail when the
/// target's path no longer runs through the agent.
Solution tba_star(const SearchSpace& space, const Problem& problem,
                  std::uint64_t expansions_per_move, std::uint64_t step_cap = 0);

/// Hill-climbs along an existing solution: appends the moves to `sol`.
/// Returns false (leaving `sol` untouched) when the climb fails.
bool append_hill_climb(const SearchSpace& space, StateId to, std::uint64_t b, Solution& sol);

}  // namespace rths
