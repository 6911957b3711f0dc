#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rths/core.hpp"
#include "rths/rng.hpp"

namespace rths {

/// Binary occupancy grid. Open cells are numbered row-major as StateIds.
class GridMap {
 public:
  GridMap() = default;
  GridMap(int width, int height, std::vector<bool> open);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool open(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_ && open_[index(x, y)];
  }
  std::size_t open_count() const noexcept { return state_cell_.size(); }

  /// StateId of the open cell (x,y), or kNoState for blocked/out-of-range cells.
  StateId state_at(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_ ? cell_state_[index(x, y)] : kNoState;
  }
  std::pair<int, int> cell_of(StateId s) const {
    const auto c = state_cell_[s];
    return {static_cast<int>(c % width_), static_cast<int>(c / width_)};
  }

  /// 8-connected octile space; a diagonal move needs both adjacent cardinal
  /// cells open. Cardinal cost 1, diagonal cost 1.4.
  SearchSpace to_space() const;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<bool> open_;
  std::vector<StateId> cell_state_;
  std::vector<std::uint32_t> state_cell_;
};

/// Parses a MovingAI `.map` file. '.' and 'G' are open; '@', 'O', 'T', 'S',
/// 'W' are blocked. Throws ParseError naming the offending line.
GridMap parse_movingai(std::string_view text);

/// Canonical MovingAI text: `type octile` header, '.' open, '@' blocked.
std::string emit_movingai(const GridMap& map);

struct RoadArc {
  std::uint32_t from;
  std::uint32_t to;
  double weight;
};

/// Road network from DIMACS files, already remapped to dense 0-based ids.
struct RoadGraph {
  std::size_t node_count = 0;
  std::vector<RoadArc> arcs;
  std::vector<std::int64_t> longitude;
  std::vector<std::int64_t> latitude;
  /// Original 1-based DIMACS id of each dense node.
  std::vector<std::uint32_t> original_id;

  /// Undirected Euclidean space; duplicate arcs in either direction keep the
  /// minimum weight.
  SearchSpace to_space(bool admissible_scaling = false) const;
};

/// Parses `.gr` (c/p/a lines) and `.co` (c/p/v lines). Throws ParseError on
/// missing coordinates, non-positive weights or ids out of range.
RoadGraph parse_dimacs(std::string_view gr_text, std::string_view co_text);

/// Perfect maze from a randomized depth-first spanning tree, every passage
/// `corridor_width` cells wide. width and height must be odd multiples of
/// corridor_width, at least 3 lattice cells; corridor_width in {1,2,4,8}.
GridMap generate_maze(int width, int height, int corridor_width, std::uint64_t seed);

/// Obstacle-free grid.
GridMap generate_open(int width, int height);

/// Rooms of `room` cells separated by one-cell walls; every wall between
/// neighbouring rooms gets a door of `door` cells at a random offset, and a
/// fraction of walls is removed entirely.
GridMap generate_rooms(int width, int height, int room, int door, double removed_walls,
                       std::uint64_t seed);

/// Randomly scattered rectangular obstacles covering roughly `density` of the
/// map.
GridMap generate_scatter(int width, int height, double density, int max_block,
                         std::uint64_t seed);

struct SubSpaceSpec {
  std::size_t size = 20000;
  std::uint64_t seed = 0;
  int max_attempts = 64;
};

/// Bounded breadth-first sub-space. States are admitted layer by layer in
/// ascending id; the last layer is cut in ascending id to hit the exact size.
/// State i of the result is the i-th admitted state.
SearchSpace sample_subspace(const SearchSpace& space, const SubSpaceSpec& spec);

/// As sample_subspace, returning the chosen original state ids instead.
std::vector<StateId> bounded_bfs(const SearchSpace& space, StateId origin, std::size_t size);

/// Connected-component label per state (labels dense, in order of first state).
std::vector<std::uint32_t> components(const SearchSpace& space);


/// Uniform random pair of distinct states in the same component (`comp` from
/// components()). Throws SamplingError if repeated draws find none.
Problem random_solvable_problem(const SearchSpace& space, const std::vector<std::uint32_t>& comp,
                                Rng& rng);

}  // namespace rths
