#include "rths/predict.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <set>
#include <sstream>

#include "rths/core.hpp"
#include "rths/rng.hpp"
#include "rths/stats.hpp"

namespace rths {

void Dataset::add(std::vector<double> row, double target) {
  features.push_back(std::move(row));
  targets.push_back(target);
}

void Dataset::validate() const {
  if (features.size() != targets.size()) throw UsageError("feature rows and targets differ in count");
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].size() != arity()) {
      throw UsageError("row " + std::to_string(i) + " has " + std::to_string(features[i].size()) +
                       " features, expected " + std::to_string(arity()));
    }
    for (double v : features[i]) {
      if (!std::isfinite(v)) throw UsageError("row " + std::to_string(i) + " has a missing value");
    }
    if (!std::isfinite(targets[i])) throw UsageError("row " + std::to_string(i) + " has no target");
  }
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset d;
  d.feature_names = feature_names;
  d.features.reserve(rows.size());
  d.targets.reserve(rows.size());
  for (std::size_t r : rows) d.add(features.at(r), targets.at(r));
  return d;
}

std::size_t BinScheme::bin_of(double v) const {
  return static_cast<std::size_t>(
      std::lower_bound(thresholds_.begin(), thresholds_.end(), v) - thresholds_.begin());
}

BinScheme equal_freq_bins(std::span<const double> values, std::size_t k) {
  if (k < 1) throw UsageError("need at least one bin");
  if (values.size() < k) throw UsageError("fewer values than bins");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const auto distinct = std::set<double>(v.begin(), v.end()).size();
  if (distinct < k) {
    throw DegenerateBins(std::to_string(distinct) + " distinct values cannot fill " +
                         std::to_string(k) + " bins");
  }
  const std::size_t n = v.size();
  std::vector<double> thresholds;
  // a cut at c separates v[c-1] < v[c]; a target inside a run of equal
  // values snaps to the nearer run edge not before the previous cut
  std::size_t last = 0;
  for (std::size_t i = 1; i < k; ++i) {
    const std::size_t target = i * n / k;
    std::size_t back = target;
    while (back > last && v[back - 1] == v[back]) --back;
    std::size_t fwd = std::max(target, last + 1);
    while (fwd < n && v[fwd - 1] == v[fwd]) ++fwd;
    std::size_t cut;
    if (back > last && (fwd >= n || target - back <= fwd - target)) {
      cut = back;
    } else if (fwd < n) {
      cut = fwd;
    } else {
      continue;
    }
    thresholds.push_back(v[cut - 1] + (v[cut] - v[cut - 1]) / 2);
    last = cut;
  }
  return BinScheme(std::move(thresholds));
}

ZeroRModel zero_r(const Dataset& train) {
  if (train.size() == 0) throw UsageError("cannot fit on an empty dataset");
  return {std::accumulate(train.targets.begin(), train.targets.end(), 0.0) /
          static_cast<double>(train.size())};
}

double LinearModel::predict(std::span<const double> row) const {
  if (row.size() != coefficients.size()) throw UsageError("feature arity does not match model");
  double y = intercept;
  for (std::size_t i = 0; i < row.size(); ++i) y += coefficients[i] * row[i];
  return y;
}

std::string LinearModel::dump(const std::vector<std::string>& names) const {
  std::ostringstream os;
  os << "intercept " << format_number(intercept) << '\n';
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    os << (i < names.size() ? names[i] : "x" + std::to_string(i)) << ' '
       << format_number(coefficients[i]) << '\n';
  }
  return os.str();
}

LinearModel ols_regression(const Dataset& train) {
  train.validate();
  if (train.size() == 0) throw UsageError("cannot fit on an empty dataset");
  const auto n = static_cast<Eigen::Index>(train.size());
  const auto p = static_cast<Eigen::Index>(train.arity());
  // centring keeps the intercept out of the min-norm penalty
  Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(train.targets.data(), n);
  Eigen::MatrixXd x(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) x(i, j) = train.features[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  const Eigen::RowVectorXd xm = x.colwise().mean();
  const double ym = y.mean();
  x.rowwise() -= xm;
  y.array() -= ym;
  LinearModel m;
  m.coefficients.assign(static_cast<std::size_t>(p), 0.0);
  if (p > 0) {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(x);
    cod.setThreshold(1e-10);
    const Eigen::VectorXd beta = cod.solve(y);
    for (Eigen::Index j = 0; j < p; ++j) m.coefficients[static_cast<std::size_t>(j)] = beta(j);
    m.intercept = ym - xm.dot(beta);
  } else {
    m.intercept = ym;
  }
  return m;
}

const char* model_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::ZeroR:
      return "ZeroR";
    case ModelKind::Linear:
      return "LinearRegression";
  }
  return "?";
}

std::vector<std::size_t> fold_order(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order.begin(), order.end());
  return order;
}

namespace {

FoldReport run_fold(const Dataset& data, ModelKind kind, const CvConfig& cfg,
                    const std::vector<std::size_t>& order, std::size_t f) {
  const std::size_t n = order.size();
  const std::size_t lo = f * n / cfg.folds;
  const std::size_t hi = (f + 1) * n / cfg.folds;
  std::vector<std::size_t> train_rows;
  train_rows.reserve(n - (hi - lo));
  for (std::size_t i = 0; i < n; ++i) {
    if (i < lo || i >= hi) train_rows.push_back(order[i]);
  }
  const Dataset train = data.subset(train_rows);
  const BinScheme bins = equal_freq_bins(train.targets, cfg.bins);
  const ZeroRModel base = zero_r(train);
  LinearModel linear;
  if (kind == ModelKind::Linear) linear = ols_regression(train);

  FoldReport r;
  r.bins = bins.effective_k();
  for (std::size_t i = lo; i < hi; ++i) {
    const auto& row = data.features[order[i]];
    const double truth = data.targets[order[i]];
    double guess;
    std::size_t cls;
    if (kind == ModelKind::ZeroR) {
      guess = base.predict(row);
      cls = base.classify(row, bins);
    } else {
      guess = linear.predict(row);
      cls = linear.classify(row, bins);
    }
    ++r.rows;
    if (cls == bins.bin_of(truth)) ++r.correct;
    r.squared_error += (guess - truth) * (guess - truth);
    r.baseline_squared_error += (base.mean - truth) * (base.mean - truth);
  }
  return r;
}

double rrse_of(double se, double base_se) {
  if (base_se == 0) return se == 0 ? 100.0 : kInfinity;
  return 100.0 * std::sqrt(se / base_se);
}

}  // namespace

EvalReport cross_validate(const Dataset& data, ModelKind kind, const CvConfig& cfg) {
  data.validate();
  if (cfg.folds < 2) throw UsageError("cross-validation needs at least 2 folds");
  if (cfg.folds > data.size()) throw UsageError("more folds than rows");
  const auto order = fold_order(data.size(), cfg.seed);

  std::vector<std::future<FoldReport>> pending;
  pending.reserve(cfg.folds);
  for (std::size_t f = 0; f < cfg.folds; ++f) {
    pending.push_back(std::async(std::launch::async, run_fold, std::cref(data), kind,
                                 std::cref(cfg), std::cref(order), f));
  }
  EvalReport report;
  report.model = model_name(kind);
  double se = 0;
  double base_se = 0;
  std::size_t correct = 0;
  for (auto& p : pending) {
    report.folds.push_back(p.get());
    const auto& fr = report.folds.back();
    report.rows += fr.rows;
    correct += fr.correct;
    se += fr.squared_error;
    base_se += fr.baseline_squared_error;
  }
  report.accuracy = 100.0 * static_cast<double>(correct) / static_cast<double>(report.rows);
  report.rmse = std::sqrt(se / static_cast<double>(report.rows));
  report.rrse = rrse_of(se, base_se);
  return report;
}

DbSizePrediction predict_db_size(const Dataset& data, const CvConfig& cfg) {
  DbSizePrediction out;
  out.zero_r = cross_validate(data, ModelKind::ZeroR, cfg);
  out.linear = cross_validate(data, ModelKind::Linear, cfg);
  out.model = ols_regression(data);
  return out;
}

std::string eval_reports_csv(const std::vector<EvalReport>& reports) {
  std::ostringstream os;
  os << "model,fold,rows,bins,accuracy,rmse,rrse\n";
  for (const auto& r : reports) {
    std::size_t min_bins = 0;
    for (std::size_t f = 0; f < r.folds.size(); ++f) {
      const auto& fr = r.folds[f];
      min_bins = f == 0 ? fr.bins : std::min(min_bins, fr.bins);
      const double acc = fr.rows ? 100.0 * static_cast<double>(fr.correct) / static_cast<double>(fr.rows) : 0.0;
      const double rmse = fr.rows ? std::sqrt(fr.squared_error / static_cast<double>(fr.rows)) : 0.0;
      const double rrse = rrse_of(fr.squared_error, fr.baseline_squared_error);
      os << r.model << ',' << f << ',' << fr.rows << ',' << fr.bins << ',' << format_number(acc)
         << ',' << format_number(rmse) << ',' << format_number(rrse) << '\n';
    }
    os << r.model << ",all," << r.rows << ',' << min_bins << ',' << format_number(r.accuracy) << ','
       << format_number(r.rmse) << ',' << format_number(r.rrse) << '\n';
  }
  return os.str();
}

}  // namespace rths
