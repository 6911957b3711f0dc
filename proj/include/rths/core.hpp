#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rths {

using StateId = std::uint32_t;

inline constexpr StateId kNoState = std::numeric_limits<StateId>::max();
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Tolerance for every cost/heuristic comparison in the library.
inline constexpr double kCostEpsilon = 1e-6;

/// Cost of a diagonal grid move.
inline constexpr double kDiagonalCost = 1.4;

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SamplingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BuildError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class HeuristicKind { kOctile, kEuclidean };

struct Edge {
  StateId to;
  double cost;
};

struct Point {
  double x = 0;
  double y = 0;
};

struct UndirectedEdge {
  StateId u;
  StateId v;
  double cost;
};

/// Immutable undirected weighted graph with per-state coordinates.
///
/// Adjacency is stored in CSR form; each neighbor list is sorted by ascending
/// id. Parallel edges collapse to the cheapest one.
class SearchSpace {
 public:
  SearchSpace() = default;

  /// Throws UsageError on non-positive costs, self-loops, out-of-range ids or
  /// a coordinate count that differs from `state_count`.
  static SearchSpace from_edges(std::size_t state_count, std::span<const UndirectedEdge> edges,
                                std::vector<Point> coords, HeuristicKind kind);

  std::size_t size() const noexcept { return coords_.size(); }
  bool valid(StateId s) const noexcept { return s < size(); }

  std::span<const Edge> neighbors(StateId s) const;
  std::size_t degree(StateId s) const { return offsets_[s + 1] - offsets_[s]; }

  const Point& coord(StateId s) const { return coords_[s]; }
  std::span<const Point> coords() const noexcept { return coords_; }
  HeuristicKind heuristic_kind() const noexcept { return kind_; }

  /// Base heuristic h0(a, b). Octile: |dx-dy| + 1.4 min(dx,dy); Euclidean:
  /// straight-line distance. Both are multiplied by the heuristic scale.
  double h(StateId a, StateId b) const noexcept {
    const double dx = coords_[a].x > coords_[b].x ? coords_[a].x - coords_[b].x
                                                  : coords_[b].x - coords_[a].x;
    const double dy = coords_[a].y > coords_[b].y ? coords_[a].y - coords_[b].y
                                                  : coords_[b].y - coords_[a].y;
    return h_scale_ * (kind_ == HeuristicKind::kOctile ? octile(dx, dy) : euclid(dx, dy));
  }

  /// Cost of the edge (a,b), or infinity when not adjacent.
  double edge_cost(StateId a, StateId b) const;

  std::size_t edge_count() const noexcept { return targets_.size() / 2; }

  double heuristic_scale() const noexcept { return h_scale_; }

  /// Multiplies the heuristic by min over edges of cost/distance, which makes
  /// the Euclidean heuristic admissible on road graphs. Returns the factor.
  double enable_admissible_scaling();

  /// Induced subgraph on `keep` (in the given order); state i of the result is
  /// keep[i].
  SearchSpace induced(std::span<const StateId> keep) const;

  /// Stable FNV-1a fingerprint of topology, costs, coordinates and heuristic.
  std::uint64_t fingerprint() const;

  static double octile(double dx, double dy) noexcept {
    return dx > dy ? (dx - dy) + kDiagonalCost * dy : (dy - dx) + kDiagonalCost * dx;
  }
  static double euclid(double dx, double dy) noexcept;

 private:
  std::vector<std::uint32_t> offsets_{0};
  std::vector<Edge> targets_;
  std::vector<Point> coords_;
  HeuristicKind kind_ = HeuristicKind::kOctile;
  double h_scale_ = 1.0;
};

/// Outgoing edges of `s`, ascending neighbor id. Throws UsageError on a bad id.
std::span<const Edge> neighbors(const SearchSpace& space, StateId s);

/// Checked base heuristic.
double base_h(const SearchSpace& space, StateId a, StateId b);

struct Problem {
  StateId start = kNoState;
  StateId goal = kNoState;

  /// Throws UsageError unless start != goal and both ids are valid in `space`.
  static Problem make(const SearchSpace& space, StateId start, StateId goal);
};

struct Solution {
  std::vector<StateId> path;
  double cost = 0;
  std::map<StateId, std::uint32_t> visit_counts;
  std::uint64_t expansions = 0;
  std::uint64_t heuristic_writes = 0;
  bool solved = false;
  bool step_cap_hit = false;
  bool guarantee_violation = false;

  /// Appends a move to `to` along an edge of cost `cost`.
  void move_to(StateId to, double cost_of_move) {
    path.push_back(to);
    cost += cost_of_move;
  }

  /// Recomputes visit_counts from the path.
  void tally_visits();

  std::size_t moves() const noexcept { return path.empty() ? 0 : path.size() - 1; }
};

/// solution_cost / optimal_cost. Throws UsageError if optimal_cost <= 0.
double suboptimality(double solution_cost, double optimal_cost);

/// Returns an empty string if `sol` is a well-formed solved path for
/// `problem` in `space`, otherwise a description of the first violation.
std::string validate_solution(const SearchSpace& space, const Problem& problem,
                              const Solution& sol);

/// Learned heuristic values layered over the base heuristic for one target.
/// Values only ever increase.
class HeuristicOverlay {
 public:
  HeuristicOverlay() = default;
  HeuristicOverlay(const SearchSpace& space, StateId target);

  StateId target() const noexcept { return target_; }

  /// Learned value if present, else the base heuristic toward the target.
  double value(StateId s) const {
    if (s < learned_.size() && learned_[s] == learned_[s]) return learned_[s];
    return space_->h(s, target_);
  }

  bool has(StateId s) const { return s < learned_.size() && learned_[s] == learned_[s]; }

  /// Raises the stored value to max(current, v). Returns true if it changed.
  bool raise(StateId s, double v);

  /// Drops all learned values and switches to a new target.
  void reset(StateId target);

  std::size_t learned_count() const noexcept { return touched_.size(); }
  std::uint64_t writes() const noexcept { return writes_; }

 private:
  const SearchSpace* space_ = nullptr;
  StateId target_ = kNoState;
  std::vector<double> learned_;  // NaN = absent
  std::vector<StateId> touched_;
  std::uint64_t writes_ = 0;
};

/// Checked overlay lookup; throws UsageError if the overlay targets another goal.
double effective_h(const HeuristicOverlay& overlay, const SearchSpace& space, StateId s,
                   StateId goal);

}  // namespace rths
