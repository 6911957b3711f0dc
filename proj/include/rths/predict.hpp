#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rths {

/// Raised when the training targets have fewer distinct values than bins.
class DegenerateBins : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct Dataset {
  std::vector<std::string> feature_names;
  std::vector<std::vector<double>> features;  // one row per data point
  std::vector<double> targets;

  std::size_t size() const { return targets.size(); }
  std::size_t arity() const { return feature_names.size(); }
  void add(std::vector<double> row, double target);
  /// Throws UsageError on ragged rows or non-finite values.
  void validate() const;
  Dataset subset(std::span<const std::size_t> rows) const;
};

/// Equal-frequency discretization. Thresholds sit halfway between the last
/// training value of one bin and the first of the next. A boundary that
/// would split equal values snaps to the nearer edge of their run; boundaries
/// that meet merge, so effective_k() can be below the requested k.
class BinScheme {
 public:
  BinScheme() = default;
  explicit BinScheme(std::vector<double> thresholds) : thresholds_(std::move(thresholds)) {}

  std::size_t bin_of(double v) const;
  std::size_t effective_k() const { return thresholds_.size() + 1; }
  const std::vector<double>& thresholds() const { return thresholds_; }

 private:
  std::vector<double> thresholds_;  // ascending; bin i holds v <= thresholds_[i]
};

/// Throws UsageError when k < 1 or |values| < k, DegenerateBins when fewer
/// than k distinct values exist.
BinScheme equal_freq_bins(std::span<const double> values, std::size_t k);

struct ZeroRModel {
  double mean = 0;
  double predict(std::span<const double>) const { return mean; }
  std::size_t classify(std::span<const double>, const BinScheme&) const { return 0; }
};

ZeroRModel zero_r(const Dataset& train);

struct LinearModel {
  double intercept = 0;
  std::vector<double> coefficients;

  double predict(std::span<const double> row) const;
  std::size_t classify(std::span<const double> row, const BinScheme& bins) const {
    return bins.bin_of(predict(row));
  }
  /// One "name coefficient" line per term, intercept first.
  std::string dump(const std::vector<std::string>& names) const;
};

/// Least squares with intercept; rank-deficient designs get the minimum-norm
/// solution. Throws UsageError on an empty or invalid dataset.
LinearModel ols_regression(const Dataset& train);

enum class ModelKind { ZeroR, Linear };
const char* model_name(ModelKind kind);

struct FoldReport {
  std::size_t rows = 0;
  std::size_t correct = 0;
  std::size_t bins = 0;  // effective k fitted on this fold's training rows
  double squared_error = 0;
  double baseline_squared_error = 0;  // ZeroR on the same fold
};

struct EvalReport {
  std::string model;
  std::size_t rows = 0;
  double accuracy = 0;  // percent
  double rmse = 0;
  double rrse = 0;  // percent of ZeroR's root squared error
  std::vector<FoldReport> folds;
};

struct CvConfig {
  std::size_t folds = 10;
  std::size_t bins = 10;
  std::uint64_t seed = 1;
};

/// Seeded shuffle, contiguous folds, train on the rest and test on one.
/// Bins are fitted on training targets only. Throws UsageError when
/// folds < 2 or folds > rows.
EvalReport cross_validate(const Dataset& data, ModelKind kind, const CvConfig& cfg = {});

/// Row order used by cross_validate; fold f covers
/// [f*n/folds, (f+1)*n/folds) of the returned permutation.
std::vector<std::size_t> fold_order(std::size_t n, std::uint64_t seed);

inline constexpr std::size_t kDbSizeClasses = 6;

struct DbSizePrediction {
  LinearModel model;  // fitted on every row
  EvalReport zero_r;
  EvalReport linear;
};

/// Rows are (complexity measures + achieved suboptimality) -> database size.
/// Evaluated with one bin per database size.
DbSizePrediction predict_db_size(const Dataset& data, const CvConfig& cfg = {10, kDbSizeClasses, 1});

/// CSV: model,fold,rows,bins,accuracy,rmse,rrse; fold "all" holds totals.
std::string eval_reports_csv(const std::vector<EvalReport>& reports);

}  // namespace rths
