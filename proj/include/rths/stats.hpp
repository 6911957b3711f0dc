#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rths {

/// Raised when a correlation is undefined (a list with zero rank variance).
class UndefinedCorrelation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct CorrelationResult {
  double rho = 0;
  std::size_t n = 0;
  double p = 1;
  bool significant = false;  // p <= 0.05
};

inline constexpr double kSignificanceLevel = 0.05;

/// 1-based ranks; tied values share the average of the ranks they span.
std::vector<double> fractional_ranks(std::span<const double> values);

/// Spearman's rho as the Pearson correlation of fractional ranks, with a
/// two-tailed p from t = rho * sqrt((n-2)/(1-rho^2)) on n-2 degrees of freedom.
/// Throws UsageError for mismatched lengths or n < 3, UndefinedCorrelation
/// for a constant list.
CorrelationResult spearman(std::span<const double> x, std::span<const double> y);

struct PerformanceAggregate {
  double mean = 0;
  double median = 0;
  double solve_rate = 0;
  std::size_t attempted = 0;
  std::size_t solved = 0;
  std::optional<double> mean_build_seconds;  // database algorithms with timing on
};

/// Mean and median over the solved runs' suboptimalities; solve rate is
/// solved / attempted. Throws UsageError when nothing was solved or
/// attempted < solved.
PerformanceAggregate aggregate(std::span<const double> suboptimalities, std::size_t attempted);

/// Convenience overload where every run was solved.
PerformanceAggregate aggregate(std::span<const double> suboptimalities);

double median(std::vector<double> values);

struct NamedSeries {
  std::string name;
  std::vector<double> values;
};

struct CorrelationCell {
  std::string axis1;
  std::string axis2;
  std::optional<CorrelationResult> result;  // empty when undefined
};

/// Spearman correlation for every (row, column) pair of series, over the
/// positions where both values are finite. Fewer than 3 such pairs or a
/// constant list leaves the cell undefined.
std::vector<CorrelationCell> correlation_table(const std::vector<NamedSeries>& rows,
                                               const std::vector<NamedSeries>& columns);

/// CSV: axis1,axis2,rho,n,p,significant (undefined cells carry NA).
std::string correlations_csv(const std::vector<CorrelationCell>& cells);

/// Index of the |rho| band: 0 for [0,0.25), 1 for [0.25,0.5), 2 for
/// [0.5,0.75), 3 for [0.75,1].
int rho_band(double rho);

/// Fixed-width text matrix of rho values with the |rho| band in brackets and
/// a trailing '*' on insignificant cells.
std::string correlation_text_table(const std::vector<CorrelationCell>& cells);

/// Shortest round-trip-stable decimal rendering used in every CSV.
std::string format_number(double v);

}  // namespace rths
