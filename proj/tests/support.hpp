#pragma once

// Shared fixtures and independent reference implementations for the tests.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "rths/core.hpp"
#include "rths/ingest.hpp"

namespace rths::test {

struct Fixture {
  GridMap map;
  SearchSpace space;
  std::vector<StateId> marks;  // states under letters other than '.' and '@', row-major
  StateId at(int x, int y) const { return map.state_at(x, y); }
};

/// '@' is blocked, anything else open. Letters are collected into `marks`.
inline Fixture grid(const std::vector<std::string>& rows) {
  const int h = static_cast<int>(rows.size());
  const int w = h == 0 ? 0 : static_cast<int>(rows[0].size());
  std::vector<bool> open(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) open[static_cast<std::size_t>(y) * w + x] = rows[y][x] != '@';
  }
  Fixture f{GridMap(w, h, open), {}, {}};
  f.space = f.map.to_space();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const char c = rows[y][x];
      if (c != '.' && c != '@') f.marks.push_back(f.map.state_at(x, y));
    }
  }
  return f;
}

/// Pocket opening away from the goal G; the pocket cell is P.
inline Fixture u_trap() {
  return grid({"..G..",
               ".....",
               ".@@@.",
               ".@P@.",
               "....."});
}

/// Two 5x5 rooms joined by a one-cell door, each room holding a small wall
/// stub that traps greedy agents.
inline Fixture two_rooms() {
  return grid({".....@.....",
               "..@..@..@..",
               "..@.......@",
               "..@..@..@..",
               ".....@....."});
}

inline SearchSpace chain(std::size_t n, double cost = 1.0) {
  std::vector<UndirectedEdge> edges;
  std::vector<Point> coords;
  for (std::size_t i = 0; i < n; ++i) {
    coords.push_back({static_cast<double>(i), 0});
    if (i + 1 < n) {
      edges.push_back({static_cast<StateId>(i), static_cast<StateId>(i + 1), cost});
    }
  }
  return SearchSpace::from_edges(n, edges, coords, HeuristicKind::kEuclidean);
}

/// Quadratic-time Dijkstra over an adjacency matrix; shares no code with the
/// library's heap-based searches.
inline std::vector<double> oracle_distances(const SearchSpace& space, StateId source) {
  const std::size_t n = space.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(n, inf);
  std::vector<bool> done(n, false);
  dist[source] = 0;
  for (std::size_t round = 0; round < n; ++round) {
    std::size_t u = n;
    for (std::size_t v = 0; v < n; ++v) {
      if (!done[v] && dist[v] < inf && (u == n || dist[v] < dist[u])) u = v;
    }
    if (u == n) break;
    done[u] = true;
    for (std::size_t v = 0; v < n; ++v) {
      const double c = space.edge_cost(static_cast<StateId>(u), static_cast<StateId>(v));
      if (c < inf && dist[u] + c < dist[v]) dist[v] = dist[u] + c;
    }
  }
  return dist;
}

struct OracleDepressions {
  std::vector<bool> depressed;
  std::vector<double> depth;
};

/// Brute-force depressions: every connected subset of at most 20 states is
/// tested directly against the definition. Heuristic values are compared
/// after rounding to the library tolerance, like the library does.
inline OracleDepressions oracle_depressions(const SearchSpace& space,
                                            const std::vector<double>& h, StateId goal) {
  const std::size_t n = space.size();
  std::vector<std::int64_t> key(n);
  for (std::size_t s = 0; s < n; ++s) key[s] = std::llround(h[s] / kCostEpsilon);
  std::vector<std::uint32_t> adj(n, 0);
  for (StateId s = 0; s < n; ++s) {
    for (const auto& e : space.neighbors(s)) adj[s] |= 1U << e.to;
  }
  const std::uint32_t full = n == 32 ? ~0U : (1U << n) - 1;
  auto connected = [&](std::uint32_t set) {
    const std::uint32_t first = set & (~set + 1);
    std::uint32_t seen = first;
    std::uint32_t frontier = first;
    while (frontier) {
      std::uint32_t next = 0;
      for (std::size_t s = 0; s < n; ++s) {
        if (frontier >> s & 1U) next |= adj[s];
      }
      next &= set & ~seen;
      seen |= next;
      frontier = next;
    }
    return seen == set;
  };
  auto surround = [&](std::uint32_t set) {
    std::uint32_t out = 0;
    for (std::size_t s = 0; s < n; ++s) {
      if (set >> s & 1U) out |= adj[s];
    }
    return out & ~set & full;
  };
  auto is_depression = [&](std::uint32_t set) {
    if (set == 0 || !connected(set)) return false;
    std::int64_t hi = std::numeric_limits<std::int64_t>::min();
    for (std::size_t s = 0; s < n; ++s) {
      if (set >> s & 1U) hi = std::max(hi, key[s]);
    }
    const std::uint32_t sur = surround(set);
    for (std::size_t t = 0; t < n; ++t) {
      if ((sur >> t & 1U) && key[t] < hi) return false;
    }
    return true;
  };

  OracleDepressions out{std::vector<bool>(n, false), std::vector<double>(n, 0.0)};
  std::vector<std::int64_t> best(n, std::numeric_limits<std::int64_t>::min());
  for (std::uint32_t set = 1; set <= full && set != 0; ++set) {
    if (!is_depression(set)) continue;
    const std::uint32_t sur = surround(set);
    if (sur == 0 || (set >> goal & 1U)) continue;
    bool maximal = true;
    for (std::size_t t = 0; t < n && maximal; ++t) {
      if ((sur >> t & 1U) && is_depression(set | (1U << t))) maximal = false;
    }
    if (!maximal) continue;
    std::int64_t rim = std::numeric_limits<std::int64_t>::max();
    for (std::size_t t = 0; t < n; ++t) {
      if (sur >> t & 1U) rim = std::min(rim, key[t]);
    }
    for (std::size_t s = 0; s < n; ++s) {
      if (set >> s & 1U) {
        out.depressed[s] = true;
        best[s] = std::max(best[s], rim - key[s]);
      }
    }
    if (set == full) break;
  }
  for (std::size_t s = 0; s < n; ++s) {
    if (out.depressed[s]) out.depth[s] = static_cast<double>(best[s]) * kCostEpsilon;
  }
  return out;
}

}  // namespace rths::test
