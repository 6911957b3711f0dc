#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rths/core.hpp"
#include "rths/predict.hpp"
#include "rths/rng.hpp"

using namespace rths;

namespace {

std::vector<double> iota_values(std::size_t n) {
  std::vector<double> v(n);
  std::iota(v.begin(), v.end(), 1.0);
  return v;
}

std::vector<std::size_t> counts(const BinScheme& b, const std::vector<double>& v) {
  std::vector<std::size_t> c(b.effective_k(), 0);
  for (double x : v) ++c[b.bin_of(x)];
  return c;
}

Dataset linear_data(std::size_t n, double noise, std::uint64_t seed) {
  Rng rng(seed);
  Dataset d;
  d.feature_names = {"a", "b", "c"};
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row{rng.uniform() * 10, rng.normal(), rng.uniform()};
    const double y = 2.0 + 1.5 * row[0] - 3.0 * row[1] + 0.5 * row[2] + noise * rng.normal();
    d.add(std::move(row), y);
  }
  return d;
}

double in_sample_rmse(const LinearModel& m, const Dataset& d) {
  double se = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double e = m.predict(d.features[i]) - d.targets[i];
    se += e * e;
  }
  return std::sqrt(se / static_cast<double>(d.size()));
}

}  // namespace

TEST(Bins, OneValuePerBin) {
  const auto v = iota_values(10);
  const auto b = equal_freq_bins(v, 10);
  EXPECT_EQ(b.effective_k(), 10u);
  EXPECT_EQ(counts(b, v), std::vector<std::size_t>(10, 1));
}

TEST(Bins, Deciles) {
  const auto v = iota_values(100);
  const auto b = equal_freq_bins(v, 10);
  ASSERT_EQ(b.thresholds().size(), 9u);
  for (std::size_t i = 0; i < 9; ++i) EXPECT_DOUBLE_EQ(b.thresholds()[i], 10.5 + 10.0 * i);
  EXPECT_EQ(counts(b, iota_values(200)).back(), 110u);  // everything above 90.5
  EXPECT_EQ(b.bin_of(-5), 0u);
}

TEST(Bins, TwoHundredValuesTwentyEach) {
  Rng rng(3);
  std::vector<double> v(200);
  for (auto& x : v) x = 1.0 + rng.uniform() * 4;
  const auto b = equal_freq_bins(v, 10);
  EXPECT_EQ(counts(b, v), std::vector<std::size_t>(10, 20));
}

TEST(Bins, FrequenciesWithinOne) {
  Rng rng(8);
  for (std::size_t n : {10u, 11u, 19u, 37u, 99u, 101u}) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.normal();
    const auto b = equal_freq_bins(v, 10);
    const auto c = counts(b, v);
    const auto [lo, hi] = std::minmax_element(c.begin(), c.end());
    EXPECT_LE(*hi - *lo, 1u) << n;
    EXPECT_EQ(*lo, n / 10);
  }
}

TEST(Bins, DuplicatesSnapToRunEdges) {
  std::vector<double> v(20, 1.0);
  for (int i = 0; i < 10; ++i) v.push_back(2.0 + i);
  const auto b = equal_freq_bins(v, 10);
  EXPECT_EQ(b.effective_k(), 10u);
  const auto c = counts(b, v);
  EXPECT_EQ(c[0], 20u);
  EXPECT_EQ(std::accumulate(c.begin(), c.end(), std::size_t{0}), v.size());
}

TEST(Bins, DuplicatesMergeBoundaries) {
  // a run of 25 tens at the top leaves no room for the last six cuts
  std::vector<double> v;
  for (int i = 1; i <= 9; ++i) v.push_back(i);
  v.insert(v.end(), 25, 10.0);
  const auto b = equal_freq_bins(v, 10);
  EXPECT_EQ(b.effective_k(), 4u);
  const auto& t = b.thresholds();
  EXPECT_TRUE(std::adjacent_find(t.begin(), t.end(), std::greater_equal<>()) == t.end());
  const auto c = counts(b, v);
  EXPECT_EQ(c, (std::vector<std::size_t>{3, 3, 3, 25}));
}

TEST(Bins, SizeClassesSurviveUnevenFolds) {
  std::vector<double> v;
  const std::size_t per[6] = {178, 181, 183, 179, 180, 179};
  for (std::size_t s = 0; s < 6; ++s) v.insert(v.end(), per[s], 500.0 * (s + 1));
  const auto b = equal_freq_bins(v, 6);
  EXPECT_EQ(b.effective_k(), 6u);
  for (std::size_t s = 0; s < 6; ++s) EXPECT_EQ(b.bin_of(500.0 * (s + 1)), s);
}

TEST(Bins, Errors) {
  EXPECT_THROW(equal_freq_bins(iota_values(5), 10), UsageError);
  EXPECT_THROW(equal_freq_bins(iota_values(5), 0), UsageError);
  const std::vector<double> few{1, 1, 2, 2, 3, 3, 3, 3, 3, 3, 3, 3};
  EXPECT_THROW(equal_freq_bins(few, 10), DegenerateBins);
}

TEST(ZeroR, PredictsMeanAndFirstBin) {
  Dataset d;
  d.feature_names = {"x"};
  d.add({7}, 2);
  d.add({9}, 4);
  const auto m = zero_r(d);
  EXPECT_DOUBLE_EQ(m.predict(std::vector<double>{123}), 3.0);
  const auto b = equal_freq_bins(iota_values(10), 10);
  EXPECT_EQ(m.classify(std::vector<double>{0}, b), 0u);
  EXPECT_THROW(zero_r(Dataset{}), UsageError);
}

TEST(Ols, ExactFit) {
  Dataset d;
  d.feature_names = {"f1", "f2"};
  for (int i = 0; i < 12; ++i) d.add({static_cast<double>(i), static_cast<double>((i * 5) % 7)}, 4.0 - 2.0 * i);
  const auto m = ols_regression(d);
  EXPECT_NEAR(in_sample_rmse(m, d), 0.0, 1e-9);
  EXPECT_NEAR(m.coefficients[0], -2.0, 1e-9);
  EXPECT_NEAR(m.coefficients[1], 0.0, 1e-9);
  EXPECT_NEAR(m.intercept, 4.0, 1e-9);
}

TEST(Ols, ConstantTargetsMatchZeroR) {
  auto d = linear_data(30, 0.0, 4);
  std::fill(d.targets.begin(), d.targets.end(), 1.75);
  const auto m = ols_regression(d);
  for (double c : m.coefficients) EXPECT_NEAR(c, 0.0, 1e-12);
  EXPECT_NEAR(m.intercept, zero_r(d).mean, 1e-12);
}

TEST(Ols, NoisyFitRmseNearSigma) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const double sigma = 0.7;
    const auto d = linear_data(50, sigma, seed);
    const double rmse = in_sample_rmse(ols_regression(d), d);
    EXPECT_GE(rmse, 0.5 * sigma) << seed;
    EXPECT_LE(rmse, 1.5 * sigma) << seed;
  }
}

TEST(Ols, ResidualsOrthogonalToFeatures) {
  const auto d = linear_data(80, 1.0, 11);
  const auto m = ols_regression(d);
  std::vector<double> xtr(d.arity() + 1, 0.0);
  std::vector<double> xty(d.arity() + 1, 0.0);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double r = d.targets[i] - m.predict(d.features[i]);
    xtr[0] += r;
    xty[0] += d.targets[i];
    for (std::size_t j = 0; j < d.arity(); ++j) {
      xtr[j + 1] += d.features[i][j] * r;
      xty[j + 1] += d.features[i][j] * d.targets[i];
    }
  }
  double nr = 0;
  double ny = 0;
  for (std::size_t j = 0; j < xtr.size(); ++j) {
    nr += xtr[j] * xtr[j];
    ny += xty[j] * xty[j];
  }
  EXPECT_LE(std::sqrt(nr), 1e-8 * std::sqrt(ny));
}

TEST(Ols, SingularDesignMinimumNorm) {
  // duplicated column: min-norm splits the weight evenly
  Dataset d;
  d.feature_names = {"u", "u_again"};
  for (int i = 0; i < 10; ++i) d.add({double(i), double(i)}, 3.0 * i + 1);
  const auto m = ols_regression(d);
  EXPECT_NEAR(m.coefficients[0], 1.5, 1e-9);
  EXPECT_NEAR(m.coefficients[1], 1.5, 1e-9);
  EXPECT_NEAR(m.intercept, 1.0, 1e-9);
}

TEST(Ols, RejectsRaggedRows) {
  Dataset d;
  d.feature_names = {"a", "b"};
  d.add({1, 2}, 1);
  d.add({1}, 2);
  EXPECT_THROW(ols_regression(d), UsageError);
}

TEST(Cv, FoldsPartitionRows) {
  const auto order = fold_order(23, 5);
  auto sorted = order;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::size_t> want(23);
  std::iota(want.begin(), want.end(), std::size_t{0});
  EXPECT_EQ(sorted, want);
  const auto d = linear_data(23, 0.1, 2);
  const auto r = cross_validate(d, ModelKind::Linear, {10, 2, 5});
  ASSERT_EQ(r.folds.size(), 10u);
  std::size_t total = 0;
  for (const auto& f : r.folds) {
    EXPECT_GE(f.rows, 2u);
    EXPECT_LE(f.rows, 3u);
    total += f.rows;
  }
  EXPECT_EQ(total, 23u);
}

TEST(Cv, ZeroRRrseIsHundred) {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto d = linear_data(60, 2.0, seed);
    const auto r = cross_validate(d, ModelKind::ZeroR, {10, 10, seed});
    EXPECT_EQ(r.rrse, 100.0);
  }
}

TEST(Cv, PerfectModel) {
  const auto d = linear_data(100, 0.0, 6);
  const auto r = cross_validate(d, ModelKind::Linear);
  EXPECT_NEAR(r.rmse, 0.0, 1e-9);
  EXPECT_NEAR(r.rrse, 0.0, 1e-7);
  EXPECT_DOUBLE_EQ(r.accuracy, 100.0);
}

TEST(Cv, ZeroRAccuracyNearTenPercent) {
  Rng rng(21);
  Dataset d;
  d.feature_names = {"x"};
  for (int i = 0; i < 200; ++i) d.add({rng.uniform()}, rng.uniform());
  const auto r = cross_validate(d, ModelKind::ZeroR);
  EXPECT_GE(r.accuracy, 5.0);
  EXPECT_LE(r.accuracy, 15.0);
}

TEST(Cv, TestTargetsDoNotLeak) {
  auto d = linear_data(40, 1.0, 9);
  const CvConfig cfg{10, 4, 13};
  const auto order = fold_order(d.size(), cfg.seed);
  // fold 0 covers order[0..3]; poison those targets
  double train_sum = 0;
  for (std::size_t i = 4; i < 40; ++i) train_sum += d.targets[order[i]];
  const double train_mean = train_sum / 36;
  for (std::size_t i = 0; i < 4; ++i) d.targets[order[i]] = 1e6;
  const auto r = cross_validate(d, ModelKind::ZeroR, cfg);
  EXPECT_NEAR(r.folds[0].baseline_squared_error, 4 * (1e6 - train_mean) * (1e6 - train_mean), 1e-3);
  EXPECT_EQ(r.folds[0].bins, 4u);
  EXPECT_EQ(r.folds[0].correct, 0u);
}

TEST(Cv, Deterministic) {
  const auto d = linear_data(50, 1.0, 3);
  const auto a = cross_validate(d, ModelKind::Linear, {10, 10, 77});
  const auto b = cross_validate(d, ModelKind::Linear, {10, 10, 77});
  EXPECT_EQ(eval_reports_csv({a}), eval_reports_csv({b}));
}

TEST(Cv, Errors) {
  const auto d = linear_data(5, 1.0, 3);
  EXPECT_THROW(cross_validate(d, ModelKind::ZeroR, {10, 2, 1}), UsageError);
  EXPECT_THROW(cross_validate(d, ModelKind::ZeroR, {1, 2, 1}), UsageError);
}

namespace {

Dataset db_size_data(std::size_t spaces, std::uint64_t seed) {
  const double sizes[kDbSizeClasses] = {500, 1000, 2500, 5000, 10000, 20000};
  Rng rng(seed);
  Dataset d;
  d.feature_names = {"m1", "m2", "m3", "m4", "m5", "m6", "m7", "m8", "suboptimality"};
  for (std::size_t s = 0; s < spaces; ++s) {
    std::vector<double> measures(8);
    for (auto& m : measures) m = rng.uniform();
    for (double size : sizes) {
      auto row = measures;
      // larger databases give lower suboptimality
      row.push_back(1.0 + measures[0] * 20000.0 / size + 0.05 * rng.uniform());
      d.add(std::move(row), size);
    }
  }
  return d;
}

}  // namespace

TEST(DbSize, SixRowsPerSpace) {
  const auto d = db_size_data(40, 1);
  EXPECT_EQ(d.size(), 240u);
  EXPECT_EQ(d.arity(), 9u);
}

TEST(DbSize, ZeroRNearOneSixth) {
  const auto p = predict_db_size(db_size_data(200, 2));
  for (const auto& f : p.zero_r.folds) EXPECT_EQ(f.bins, kDbSizeClasses);
  EXPECT_NEAR(p.zero_r.accuracy, 100.0 / 6.0, 3.0);
  EXPECT_EQ(p.zero_r.rrse, 100.0);
}

TEST(DbSize, MonotoneDataBeatsBaseline) {
  const auto p = predict_db_size(db_size_data(60, 3));
  EXPECT_LT(p.linear.rrse, 100.0);
  EXPECT_EQ(p.model.coefficients.size(), 9u);
  EXPECT_LT(p.model.coefficients[8], 0.0);  // more suboptimality tolerated, smaller database
  const auto dump = p.model.dump(db_size_data(1, 1).feature_names);
  EXPECT_EQ(dump.rfind("intercept ", 0), 0u);
  EXPECT_NE(dump.find("\nsuboptimality "), std::string::npos);
}

TEST(Report, CsvLayout) {
  const auto d = linear_data(20, 1.0, 5);
  const auto r = cross_validate(d, ModelKind::ZeroR, {2, 2, 1});
  const auto csv = eval_reports_csv({r});
  EXPECT_EQ(csv.rfind("model,fold,rows,bins,accuracy,rmse,rrse\nZeroR,0,10,2,", 0), 0u);
  EXPECT_NE(csv.find("\nZeroR,all,20,2,"), std::string::npos);
  EXPECT_NE(csv.find(",100\n"), std::string::npos);
}
