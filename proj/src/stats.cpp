#include "rths/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

#include "rths/core.hpp"

namespace rths {

std::vector<double> fractional_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[idx[j + 1]] == values[idx[i]]) ++j;
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

CorrelationResult spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw UsageError("spearman needs equal-length lists");
  const std::size_t n = x.size();
  if (n < 3) throw UsageError("spearman needs at least 3 pairs");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw UsageError("spearman input contains a non-finite value");
    }
  }
  const auto rx = fractional_ranks(x);
  const auto ry = fractional_ranks(y);
  const double mean = (static_cast<double>(n) + 1.0) / 2.0;
  double sxy = 0;
  double sxx = 0;
  double syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = rx[i] - mean;
    const double dy = ry[i] - mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0 || syy == 0) throw UndefinedCorrelation("constant list has no rank variance");
  CorrelationResult r;
  r.n = n;
  r.rho = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  if (std::abs(r.rho) >= 1.0) {
    r.p = 0.0;
  } else {
    const double df = static_cast<double>(n - 2);
    const double t = r.rho * std::sqrt(df / (1.0 - r.rho * r.rho));
    const boost::math::students_t dist(df);
    r.p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
  }
  r.significant = r.p <= kSignificanceLevel;
  return r;
}

double median(std::vector<double> values) {
  if (values.empty()) throw UsageError("median of an empty list");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

PerformanceAggregate aggregate(std::span<const double> suboptimalities, std::size_t attempted) {
  if (suboptimalities.empty()) throw UsageError("aggregate needs at least one solved run");
  if (attempted < suboptimalities.size()) {
    throw UsageError("more solved runs than attempted runs");
  }
  PerformanceAggregate a;
  a.attempted = attempted;
  a.solved = suboptimalities.size();
  a.mean = std::accumulate(suboptimalities.begin(), suboptimalities.end(), 0.0) /
           static_cast<double>(a.solved);
  a.median = median({suboptimalities.begin(), suboptimalities.end()});
  a.solve_rate = static_cast<double>(a.solved) / static_cast<double>(attempted);
  return a;
}

PerformanceAggregate aggregate(std::span<const double> suboptimalities) {
  return aggregate(suboptimalities, suboptimalities.size());
}

std::vector<CorrelationCell> correlation_table(const std::vector<NamedSeries>& rows,
                                               const std::vector<NamedSeries>& columns) {
  std::vector<CorrelationCell> cells;
  cells.reserve(rows.size() * columns.size());
  for (const auto& r : rows) {
    for (const auto& c : columns) {
      if (r.values.size() != c.values.size()) throw UsageError("series lengths differ");
      CorrelationCell cell{r.name, c.name, std::nullopt};
      std::vector<double> x;
      std::vector<double> y;
      for (std::size_t i = 0; i < r.values.size(); ++i) {
        if (std::isfinite(r.values[i]) && std::isfinite(c.values[i])) {
          x.push_back(r.values[i]);
          y.push_back(c.values[i]);
        }
      }
      if (x.size() >= 3) {
        try {
          cell.result = spearman(x, y);
        } catch (const UndefinedCorrelation&) {
        }
      }
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "NA";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0) return "0";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string correlations_csv(const std::vector<CorrelationCell>& cells) {
  std::ostringstream os;
  os << "axis1,axis2,rho,n,p,significant\n";
  for (const auto& c : cells) {
    os << c.axis1 << ',' << c.axis2 << ',';
    if (c.result) {
      os << format_number(c.result->rho) << ',' << c.result->n << ','
         << format_number(c.result->p) << ',' << (c.result->significant ? "true" : "false");
    } else {
      os << "NA,NA,NA,NA";
    }
    os << '\n';
  }
  return os.str();
}

int rho_band(double rho) {
  const double a = std::abs(rho);
  if (a < 0.25) return 0;
  if (a < 0.5) return 1;
  if (a < 0.75) return 2;
  return 3;
}

std::string correlation_text_table(const std::vector<CorrelationCell>& cells) {
  std::vector<std::string> rows;
  std::vector<std::string> cols;
  std::map<std::pair<std::string, std::string>, const CorrelationCell*> at;
  for (const auto& c : cells) {
    if (std::find(rows.begin(), rows.end(), c.axis1) == rows.end()) rows.push_back(c.axis1);
    if (std::find(cols.begin(), cols.end(), c.axis2) == cols.end()) cols.push_back(c.axis2);
    at[{c.axis1, c.axis2}] = &c;
  }
  std::size_t label = 0;
  for (const auto& r : rows) label = std::max(label, r.size());
  std::size_t width = 12;
  for (const auto& c : cols) width = std::max(width, c.size() + 1);

  std::ostringstream os;
  char buf[64];
  os << std::string(label, ' ');
  for (const auto& c : cols) os << std::string(width - c.size(), ' ') << c;
  os << '\n';
  for (const auto& r : rows) {
    os << r << std::string(label - r.size(), ' ');
    for (const auto& c : cols) {
      std::string cell = "-";
      auto it = at.find({r, c});
      if (it != at.end() && it->second->result) {
        const auto& res = *it->second->result;
        std::snprintf(buf, sizeof buf, "%.3f[%d]%s", res.rho, rho_band(res.rho),
                      res.significant ? "" : "*");
        cell = buf;
      } else if (it != at.end()) {
        cell = "undef";
      }
      os << std::string(width > cell.size() ? width - cell.size() : 1, ' ') << cell;
    }
    os << '\n';
  }
  os << "bands: [0] |rho|<0.25  [1] <0.5  [2] <0.75  [3] >=0.75   * p > 0.05\n";
  return os.str();
}

}  // namespace rths
