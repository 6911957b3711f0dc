#include "rths/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include "rths/rng.hpp"

namespace rths {

GridMap::GridMap(int width, int height, std::vector<bool> open)
    : width_(width), height_(height), open_(std::move(open)) {
  if (width <= 0 || height <= 0) throw UsageError("grid dimensions must be positive");
  if (open_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw UsageError("grid cell count does not match width*height");
  }
  cell_state_.assign(open_.size(), kNoState);
  for (std::size_t i = 0; i < open_.size(); ++i) {
    if (open_[i]) {
      cell_state_[i] = static_cast<StateId>(state_cell_.size());
      state_cell_.push_back(static_cast<std::uint32_t>(i));
    }
  }
}

SearchSpace GridMap::to_space() const {
  std::vector<UndirectedEdge> edges;
  edges.reserve(state_cell_.size() * 4);
  std::vector<Point> pts;
  pts.reserve(state_cell_.size());
  for (StateId s = 0; s < state_cell_.size(); ++s) {
    const auto [x, y] = cell_of(s);
    pts.push_back({static_cast<double>(x), static_cast<double>(y)});
    if (open(x + 1, y)) edges.push_back({s, state_at(x + 1, y), 1.0});
    if (open(x, y + 1)) edges.push_back({s, state_at(x, y + 1), 1.0});
    if (open(x + 1, y + 1) && open(x + 1, y) && open(x, y + 1)) {
      edges.push_back({s, state_at(x + 1, y + 1), kDiagonalCost});
    }
    if (open(x - 1, y + 1) && open(x - 1, y) && open(x, y + 1)) {
      edges.push_back({s, state_at(x - 1, y + 1), kDiagonalCost});
    }
  }
  return SearchSpace::from_edges(state_cell_.size(), edges, std::move(pts),
                                 HeuristicKind::kOctile);
}

namespace {

class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  bool next(std::string_view& line) {
    if (pos_ >= text_.size()) return false;
    auto end = text_.find('\n', pos_);
    if (end == std::string_view::npos) end = text_.size();
    line = text_.substr(pos_, end - pos_);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos_ = end + 1;
    ++number_;
    return true;
  }
  int number() const { return number_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  int number_ = 0;
};

[[noreturn]] void fail(int line, const std::string& what) {
  throw ParseError("line " + std::to_string(line) + ": " + what);
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view token, T& out) {
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool parse_real(std::string_view token, double& out) {
  // from_chars for double is missing from older standard libraries
  std::string tmp(token);
  char* end = nullptr;
  out = std::strtod(tmp.c_str(), &end);
  return !tmp.empty() && end == tmp.c_str() + tmp.size();
}

}  // namespace

GridMap parse_movingai(std::string_view text) {
  LineReader reader(text);
  std::string_view line;
  int width = -1;
  int height = -1;
  bool saw_type = false;
  for (;;) {
    if (!reader.next(line)) fail(reader.number(), "unexpected end of header");
    const auto tok = split_ws(line);
    if (tok.empty()) fail(reader.number(), "blank header line");
    if (tok[0] == "map" && tok.size() == 1) break;
    if (tok.size() != 2) fail(reader.number(), "malformed header line");
    if (tok[0] == "type") {
      saw_type = true;
    } else if (tok[0] == "height") {
      if (!parse_number(tok[1], height) || height <= 0) fail(reader.number(), "bad height");
    } else if (tok[0] == "width") {
      if (!parse_number(tok[1], width) || width <= 0) fail(reader.number(), "bad width");
    } else {
      fail(reader.number(), "unknown header key '" + std::string(tok[0]) + "'");
    }
  }
  if (!saw_type) fail(reader.number(), "header lacks a type line");
  if (width < 0 || height < 0) fail(reader.number(), "header lacks width or height");

  std::vector<bool> open(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y) {
    if (!reader.next(line)) fail(reader.number() + 1, "missing map row " + std::to_string(y));
    if (static_cast<int>(line.size()) != width) {
      fail(reader.number(), "row has " + std::to_string(line.size()) + " cells, expected " +
                                std::to_string(width));
    }
    for (int x = 0; x < width; ++x) {
      switch (line[static_cast<std::size_t>(x)]) {
        case '.':
        case 'G':
          open[static_cast<std::size_t>(y) * width + x] = true;
          break;
        case '@':
        case 'O':
        case 'T':
        case 'S':
        case 'W':
          break;
        default:
          fail(reader.number(), std::string("unknown terrain character '") +
                                    line[static_cast<std::size_t>(x)] + "'");
      }
    }
  }
  while (reader.next(line)) {
    if (!line.empty()) fail(reader.number(), "trailing data after map rows");
  }
  return GridMap(width, height, std::move(open));
}

std::string emit_movingai(const GridMap& map) {
  std::string out = "type octile\nheight " + std::to_string(map.height()) + "\nwidth " +
                    std::to_string(map.width()) + "\nmap\n";
  out.reserve(out.size() + static_cast<std::size_t>(map.height()) * (map.width() + 1));
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) out.push_back(map.open(x, y) ? '.' : '@');
    out.push_back('\n');
  }
  return out;
}

SearchSpace RoadGraph::to_space(bool admissible_scaling) const {
  std::vector<UndirectedEdge> edges;
  edges.reserve(arcs.size());
  for (const auto& a : arcs) {
    if (a.from != a.to) edges.push_back({a.from, a.to, a.weight});
  }
  std::vector<Point> pts(node_count);
  for (std::size_t i = 0; i < node_count; ++i) {
    pts[i] = {static_cast<double>(longitude[i]), static_cast<double>(latitude[i])};
  }
  auto space =
      SearchSpace::from_edges(node_count, edges, std::move(pts), HeuristicKind::kEuclidean);
  if (admissible_scaling) space.enable_admissible_scaling();
  return space;
}

RoadGraph parse_dimacs(std::string_view gr_text, std::string_view co_text) {
  std::string_view line;
  std::uint64_t declared_nodes = 0;
  std::uint64_t declared_arcs = 0;
  bool saw_problem = false;
  struct RawArc {
    std::uint32_t u, v;
    double w;
  };
  std::vector<RawArc> raw;

  LineReader gr(gr_text);
  while (gr.next(line)) {
    const auto tok = split_ws(line);
    if (tok.empty() || tok[0] == "c") continue;
    if (tok[0] == "p") {
      if (saw_problem) fail(gr.number(), "duplicate problem line");
      if (tok.size() != 4 || tok[1] != "sp" || !parse_number(tok[2], declared_nodes) ||
          !parse_number(tok[3], declared_arcs)) {
        fail(gr.number(), "malformed problem line (expected 'p sp n m')");
      }
      saw_problem = true;
    } else if (tok[0] == "a") {
      if (!saw_problem) fail(gr.number(), "arc before problem line");
      RawArc a{};
      if (tok.size() != 4 || !parse_number(tok[1], a.u) || !parse_number(tok[2], a.v) ||
          !parse_real(tok[3], a.w)) {
        fail(gr.number(), "malformed arc line");
      }
      if (a.u < 1 || a.u > declared_nodes || a.v < 1 || a.v > declared_nodes) {
        fail(gr.number(), "arc endpoint out of range 1.." + std::to_string(declared_nodes));
      }
      if (!(a.w > 0)) fail(gr.number(), "non-positive arc weight");
      if (a.u == a.v) fail(gr.number(), "self-loop arc");
      raw.push_back(a);
    } else {
      fail(gr.number(), "unknown line type '" + std::string(tok[0]) + "'");
    }
  }
  if (!saw_problem) fail(gr.number(), "missing problem line");
  if (raw.size() != declared_arcs) {
    fail(gr.number(), "declared " + std::to_string(declared_arcs) + " arcs, found " +
                          std::to_string(raw.size()));
  }

  std::vector<bool> has_coord(declared_nodes + 1, false);
  std::vector<std::int64_t> xs(declared_nodes + 1, 0);
  std::vector<std::int64_t> ys(declared_nodes + 1, 0);
  LineReader co(co_text);
  while (co.next(line)) {
    const auto tok = split_ws(line);
    if (tok.empty() || tok[0] == "c" || tok[0] == "p") continue;
    if (tok[0] != "v") fail(co.number(), "unknown line type '" + std::string(tok[0]) + "'");
    std::uint64_t id = 0;
    std::int64_t x = 0;
    std::int64_t y = 0;
    if (tok.size() != 4 || !parse_number(tok[1], id) || !parse_number(tok[2], x) ||
        !parse_number(tok[3], y)) {
      fail(co.number(), "malformed coordinate line");
    }
    if (id < 1 || id > declared_nodes) {
      fail(co.number(), "coordinate for node " + std::to_string(id) + " out of range");
    }
    has_coord[id] = true;
    xs[id] = x;
    ys[id] = y;
  }

  std::vector<bool> referenced(declared_nodes + 1, false);
  for (const auto& a : raw) {
    referenced[a.u] = referenced[a.v] = true;
  }
  RoadGraph g;
  std::vector<std::uint32_t> dense(declared_nodes + 1, 0);
  for (std::uint64_t id = 1; id <= declared_nodes; ++id) {
    if (referenced[id] && !has_coord[id]) {
      throw ParseError("node " + std::to_string(id) + " is used by an arc but has no coordinate");
    }
    if (!referenced[id] && !has_coord[id]) continue;
    dense[id] = static_cast<std::uint32_t>(g.node_count++);
    g.original_id.push_back(static_cast<std::uint32_t>(id));
    g.longitude.push_back(xs[id]);
    g.latitude.push_back(ys[id]);
  }

  // symmetrize, keeping the cheapest arc per unordered pair
  std::map<std::pair<std::uint32_t, std::uint32_t>, double> best;
  for (const auto& a : raw) {
    auto key = std::minmax(dense[a.u], dense[a.v]);
    auto [it, inserted] = best.emplace(key, a.w);
    if (!inserted) it->second = std::min(it->second, a.w);
  }
  g.arcs.reserve(best.size());
  for (const auto& [key, w] : best) g.arcs.push_back({key.first, key.second, w});
  return g;
}

GridMap generate_maze(int width, int height, int corridor_width, std::uint64_t seed) {
  if (corridor_width != 1 && corridor_width != 2 && corridor_width != 4 && corridor_width != 8) {
    throw UsageError("corridor width must be 1, 2, 4 or 8");
  }
  if (width % corridor_width != 0 || height % corridor_width != 0) {
    throw UsageError("maze dimensions must be multiples of the corridor width");
  }
  const int lw = width / corridor_width;
  const int lh = height / corridor_width;
  if (lw < 3 || lh < 3 || lw % 2 == 0 || lh % 2 == 0) {
    throw UsageError("maze lattice (dimensions / corridor width) must be odd and at least 3");
  }

  // lattice: cells at odd coordinates, walls elsewhere
  std::vector<bool> lattice(static_cast<std::size_t>(lw) * lh, false);
  auto at = [&](int x, int y) -> std::vector<bool>::reference {
    return lattice[static_cast<std::size_t>(y) * lw + x];
  };
  const int cw = (lw - 1) / 2;
  const int ch = (lh - 1) / 2;
  std::vector<bool> visited(static_cast<std::size_t>(cw) * ch, false);
  Rng rng(seed);
  std::vector<std::pair<int, int>> stack;
  const int sx = static_cast<int>(rng.below(cw));
  const int sy = static_cast<int>(rng.below(ch));
  stack.emplace_back(sx, sy);
  visited[static_cast<std::size_t>(sy) * cw + sx] = true;
  at(2 * sx + 1, 2 * sy + 1) = true;
  constexpr int kDx[4] = {1, -1, 0, 0};
  constexpr int kDy[4] = {0, 0, 1, -1};
  while (!stack.empty()) {
    const auto [cx, cy] = stack.back();
    int options[4];
    int n = 0;
    for (int d = 0; d < 4; ++d) {
      const int nx = cx + kDx[d];
      const int ny = cy + kDy[d];
      if (nx >= 0 && ny >= 0 && nx < cw && ny < ch &&
          !visited[static_cast<std::size_t>(ny) * cw + nx]) {
        options[n++] = d;
      }
    }
    if (n == 0) {
      stack.pop_back();
      continue;
    }
    const int d = options[rng.below(static_cast<std::uint64_t>(n))];
    const int nx = cx + kDx[d];
    const int ny = cy + kDy[d];
    visited[static_cast<std::size_t>(ny) * cw + nx] = true;
    at(2 * cx + 1 + kDx[d], 2 * cy + 1 + kDy[d]) = true;
    at(2 * nx + 1, 2 * ny + 1) = true;
    stack.emplace_back(nx, ny);
  }

  std::vector<bool> open(static_cast<std::size_t>(width) * height, false);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      open[static_cast<std::size_t>(y) * width + x] = at(x / corridor_width, y / corridor_width);
    }
  }
  return GridMap(width, height, std::move(open));
}

GridMap generate_open(int width, int height) {
  return GridMap(width, height,
                 std::vector<bool>(static_cast<std::size_t>(width) * height, true));
}

GridMap generate_rooms(int width, int height, int room, int door, double removed_walls,
                       std::uint64_t seed) {
  if (room < 1 || door < 1 || door > room) throw UsageError("invalid room or door size");
  Rng rng(seed);
  std::vector<bool> open(static_cast<std::size_t>(width) * height, true);
  auto block = [&](int x, int y) {
    if (x >= 0 && y >= 0 && x < width && y < height) {
      open[static_cast<std::size_t>(y) * width + x] = false;
    }
  };
  const int pitch = room + 1;
  // vertical walls at x = k*pitch - 1, doors per room row
  for (int wx = pitch - 1; wx < width; wx += pitch) {
    for (int ry = 0; ry * pitch < height; ++ry) {
      if (rng.uniform() < removed_walls) continue;
      const int y0 = ry * pitch;
      const int offset = static_cast<int>(rng.below(static_cast<std::uint64_t>(room - door + 1)));
      for (int y = y0; y < y0 + pitch && y < height; ++y) {
        if (y - y0 >= offset && y - y0 < offset + door) continue;
        block(wx, y);
      }
    }
  }
  for (int wy = pitch - 1; wy < height; wy += pitch) {
    for (int rx = 0; rx * pitch < width; ++rx) {
      if (rng.uniform() < removed_walls) continue;
      const int x0 = rx * pitch;
      const int offset = static_cast<int>(rng.below(static_cast<std::uint64_t>(room - door + 1)));
      for (int x = x0; x < x0 + pitch && x < width; ++x) {
        if (x - x0 >= offset && x - x0 < offset + door) continue;
        block(x, wy);
      }
    }
  }
  return GridMap(width, height, std::move(open));
}

GridMap generate_scatter(int width, int height, double density, int max_block,
                         std::uint64_t seed) {
  if (density < 0 || density >= 1 || max_block < 1) throw UsageError("invalid scatter parameters");
  Rng rng(seed);
  std::vector<bool> open(static_cast<std::size_t>(width) * height, true);
  const auto target = static_cast<std::size_t>(density * static_cast<double>(open.size()));
  std::size_t blocked = 0;
  while (blocked < target) {
    const int bw = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_block)));
    const int bh = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_block)));
    const int x0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(width)));
    const int y0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(height)));
    for (int y = y0; y < y0 + bh && y < height; ++y) {
      for (int x = x0; x < x0 + bw && x < width; ++x) {
        auto ref = open[static_cast<std::size_t>(y) * width + x];
        if (ref) {
          ref = false;
          ++blocked;
        }
      }
    }
  }
  return GridMap(width, height, std::move(open));
}

std::vector<StateId> bounded_bfs(const SearchSpace& space, StateId origin, std::size_t size) {
  if (!space.valid(origin)) throw UsageError("invalid BFS origin");
  std::vector<bool> seen(space.size(), false);
  std::vector<StateId> order{origin};
  seen[origin] = true;
  std::size_t layer_begin = 0;
  while (order.size() < size && layer_begin < order.size()) {
    const std::size_t layer_end = order.size();
    std::vector<StateId> next;
    for (std::size_t i = layer_begin; i < layer_end; ++i) {
      for (const auto& e : space.neighbors(order[i])) {
        if (!seen[e.to]) {
          seen[e.to] = true;
          next.push_back(e.to);
        }
      }
    }
    std::sort(next.begin(), next.end());
    const std::size_t room = size - order.size();
    if (next.size() > room) next.resize(room);
    order.insert(order.end(), next.begin(), next.end());
    layer_begin = layer_end;
  }
  return order;
}

SearchSpace sample_subspace(const SearchSpace& space, const SubSpaceSpec& spec) {
  if (spec.size < 2) throw UsageError("sub-space size must be at least 2");
  if (space.size() < spec.size) {
    throw SamplingError("space has " + std::to_string(space.size()) + " states, fewer than " +
                        std::to_string(spec.size));
  }
  Rng rng(spec.seed);
  for (int attempt = 0; attempt < spec.max_attempts; ++attempt) {
    const auto origin = static_cast<StateId>(rng.below(space.size()));
    auto keep = bounded_bfs(space, origin, spec.size);
    if (keep.size() == spec.size) return space.induced(keep);
  }
  throw SamplingError("no origin reached " + std::to_string(spec.size) + " states after " +
                      std::to_string(spec.max_attempts) + " attempts");
}

std::vector<std::uint32_t> components(const SearchSpace& space) {
  constexpr auto kUnset = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> label(space.size(), kUnset);
  std::uint32_t next = 0;
  std::vector<StateId> queue;
  for (StateId s = 0; s < space.size(); ++s) {
    if (label[s] != kUnset) continue;
    label[s] = next;
    queue.assign(1, s);
    for (std::size_t i = 0; i < queue.size(); ++i) {
      for (const auto& e : space.neighbors(queue[i])) {
        if (label[e.to] == kUnset) {
          label[e.to] = next;
          queue.push_back(e.to);
        }
      }
    }
    ++next;
  }
  return label;
}

Problem random_solvable_problem(const SearchSpace& space, const std::vector<std::uint32_t>& comp,
                                Rng& rng) {
  if (space.size() >= 2) {
    for (int attempt = 0; attempt < 100000; ++attempt) {
      const auto s = static_cast<StateId>(rng.below(space.size()));
      const auto g = static_cast<StateId>(rng.below(space.size()));
      if (s != g && comp[s] == comp[g]) return {s, g};
    }
  }
  throw SamplingError("no solvable problem found");
}

}  // namespace rths
