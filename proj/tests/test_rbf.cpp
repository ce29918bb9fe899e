#include "ssbo/problems.hpp"
#include "ssbo/rbf.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace ssbo;

namespace {

int kernel_id(KernelKind k) { return static_cast<int>(k); }

std::vector<UnitPoint> points_1d(std::initializer_list<double> xs) {
  std::vector<UnitPoint> out;
  for (double x : xs) out.push_back(Vector::Constant(1, x));
  return out;
}

double max_residual(const RbfModel& model, const std::vector<UnitPoint>& xs, const Vector& y) {
  double r = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i)
    r = std::max(r, std::abs(predict(model, xs[i]) - y[static_cast<Eigen::Index>(i)]));
  return r;
}

Vector forrester_values(const std::vector<UnitPoint>& xs, double alpha) {
  Vector y(static_cast<Eigen::Index>(xs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) y[static_cast<Eigen::Index>(i)] = forrester_alpha(xs[i][0], alpha);
  return y;
}

}  // namespace

TEST(Kernel, MatchesScalarFormulas) {
  for (double r : {0.0, 0.5, 1.0, 2.0}) {
    for (double c : {0.1, 1.0, 10.0}) {
      EXPECT_NEAR(kernel_value(KernelKind::Gaussian, r, c), std::exp(-c * r * r), 1e-15);
      EXPECT_NEAR(kernel_value(KernelKind::Multiquadric, r, c), std::pow(1 + c * r * r, 0.5), 1e-14);
      EXPECT_NEAR(kernel_value(KernelKind::InverseMultiquadric, r, c), std::pow(1 + c * r * r, -0.5),
                  1e-15);
      EXPECT_NEAR(kernel_value(KernelKind::ThinPlateSpline, r, c), r * r * std::log(1 + c * r * r),
                  1e-13);
    }
  }
  EXPECT_EQ(kernel_value(KernelKind::ThinPlateSpline, 0.0, 3.0), 0.0);
  for (auto k : {KernelKind::Gaussian, KernelKind::Multiquadric, KernelKind::InverseMultiquadric})
    EXPECT_EQ(kernel_value(k, 0.0, 3.0), 1.0);
}

TEST(Kernel, NamesRoundTrip) {
  for (auto k : kAllKernels) EXPECT_EQ(parse_kernel(to_string(k)), k);
  EXPECT_FALSE(parse_kernel("cubic").has_value());
}

TEST(Fit, SingleSampleGaussian) {
  const auto xs = points_1d({0.3});
  const Vector y = Vector::Constant(1, 2.5);
  const auto model = fit(xs, y, KernelKind::Gaussian, 4.0);
  EXPECT_DOUBLE_EQ(model.beta[0], 2.5);
  EXPECT_DOUBLE_EQ(predict(model, xs[0]), 2.5);
  EXPECT_EQ(model.ridge, 0.0);
}

TEST(Fit, FiveRandomPointsInterpolateForEveryKernel) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<UnitPoint> xs;
  Vector y(5);
  for (int i = 0; i < 5; ++i) {
    xs.push_back(Vector::Constant(1, u(rng)));
    y[i] = 10.0 * u(rng) - 5.0;
  }
  for (auto k : kAllKernels) {
    const auto model = fit(xs, y, k, 5.0);
    ASSERT_EQ(model.ridge, 0.0) << to_string(k);
    EXPECT_LE(max_residual(model, xs, y), 1e-6 * (1 + y.cwiseAbs().maxCoeff())) << to_string(k);
  }
}

TEST(Fit, Errors) {
  const auto dup = points_1d({0.2, 0.2});
  EXPECT_THROW(fit(dup, Vector::Ones(2), KernelKind::Gaussian, 1.0), Error);
  const auto xs = points_1d({0.1, 0.9});
  Vector bad(2);
  bad << 1.0, std::nan("");
  EXPECT_THROW(fit(xs, bad, KernelKind::Gaussian, 1.0), Error);
  EXPECT_THROW(fit(xs, Vector::Ones(2), KernelKind::Gaussian, 0.0), Error);
  EXPECT_THROW(fit(xs, Vector::Ones(3), KernelKind::Gaussian, 1.0), Error);
  EXPECT_THROW(fit(std::vector<UnitPoint>{}, Vector(0), KernelKind::Gaussian, 1.0), Error);
}

TEST(Fit, IllConditionedSystemFallsBackToRidge) {
  // nearly flat Gaussian on clustered points
  const auto xs = points_1d({0.50, 0.501, 0.502, 0.503, 0.504, 0.505});
  const Vector y = forrester_values(xs, 0.0);
  const auto model = fit(xs, y, KernelKind::Gaussian, 0.01);
  EXPECT_GT(model.ridge, 0.0);
  EXPECT_NEAR(model.ridge, 1e-10, 1e-20);
  EXPECT_LE(max_residual(model, xs, y), 1e-3 * (1 + y.cwiseAbs().maxCoeff()));
}

TEST(Predict, ConstantDataReproducedAtNodes) {
  const auto xs = lhs_sample(8, 2, 3);
  const Vector y = Vector::Constant(8, 3.0);
  for (auto k : kAllKernels) {
    const auto model = fit(xs, y, k, 2.0);
    for (const auto& x : xs) EXPECT_NEAR(predict(model, x), 3.0, 1e-6) << to_string(k);
  }
}

TEST(Predict, DimensionMismatch) {
  const auto model = fit(points_1d({0.1, 0.7}), Vector::Ones(2), KernelKind::Gaussian, 1.0);
  EXPECT_THROW(predict(model, Vector::Zero(2)), Error);
}

TEST(Predict, MatchesIndependentSolveOnForresterData) {
  const auto xs = lhs_sample(20, 1, 42);
  const Vector y = forrester_values(xs, 0.0);
  const auto model = fit(xs, y, KernelKind::Gaussian, 100.0);
  ASSERT_EQ(model.ridge, 0.0);

  const auto ref = oracle::interpolate(0, 100.0, oracle::to_points(xs),
                                       std::vector<double>(y.data(), y.data() + y.size()));
  ASSERT_TRUE(ref.has_value());
  for (const auto& probe : lhs_sample(50, 1, 43)) {
    const double expected = static_cast<double>((*ref)(oracle::Point{probe[0]}));
    EXPECT_NEAR(predict(model, probe), expected, 1e-8 * (1.0 + std::abs(expected)));
  }
}

TEST(PredictProperty, FiniteEverywhereOnCube) {
  std::mt19937_64 rng(3);
  for (auto k : kAllKernels) {
    const auto xs = lhs_sample(15, 3, rng());
    Vector y(15);
    for (int i = 0; i < 15; ++i) y[i] = xs[static_cast<std::size_t>(i)].sum();
    const auto model = fit(xs, y, k, tune_shape(xs, y, k));
    for (const auto& probe : lhs_sample(500, 3, rng())) EXPECT_TRUE(std::isfinite(predict(model, probe)));
    EXPECT_TRUE(std::isfinite(predict(model, Vector::Zero(3))));
    EXPECT_TRUE(std::isfinite(predict(model, Vector::Ones(3))));
  }
}

TEST(Loocv, TwoPointsByHand) {
  const auto xs = points_1d({0.2, 0.7});
  Vector y(2);
  y << 1.5, -0.5;
  const double c = 3.0;
  // each held-out model is the other point alone: beta = y_other, prediction y_other * f(r)
  const double f = std::exp(-c * 0.25);
  const double expected = std::pow(1.5 - (-0.5) * f, 2) + std::pow(-0.5 - 1.5 * f, 2);
  EXPECT_NEAR(loocv_error(xs, y, KernelKind::Gaussian, c), expected, 1e-12);
  const auto brute = oracle::loocv_refit(0, c, oracle::to_points(xs), {1.5, -0.5});
  EXPECT_NEAR(static_cast<double>(*brute), expected, 1e-12);
}

TEST(Loocv, ZeroResponsesGiveZero) {
  const auto xs = lhs_sample(7, 2, 9);
  for (auto k : kAllKernels) EXPECT_EQ(loocv_error(xs, Vector::Zero(7), k, 1.0), 0.0);
}

TEST(Loocv, Errors) {
  EXPECT_THROW(loocv_error(points_1d({0.5}), Vector::Ones(1), KernelKind::Gaussian, 1.0), Error);
  EXPECT_THROW(loocv_error(points_1d({0.5, 0.5}), Vector::Ones(2), KernelKind::Gaussian, 1.0), Error);
}

TEST(LoocvProperty, MatchesLiteralRefit) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const auto kernel = kAllKernels[static_cast<std::size_t>(trial) % 4];
    const Eigen::Index m = 1 + trial % 3;
    const std::size_t n = 2 + static_cast<std::size_t>(rng() % 14);
    const double c = std::pow(10.0, u(rng));
    const auto xs = lhs_sample(n, m, rng());
    const auto pts = oracle::to_points(xs);
    if (oracle::condition_number(kernel_id(kernel), c, pts) > 1e8) continue;
    Vector y(static_cast<Eigen::Index>(n));
    for (auto& v : y) v = 5.0 * u(rng);
    const auto brute = oracle::loocv_refit(kernel_id(kernel), c, pts,
                                           std::vector<double>(y.data(), y.data() + y.size()));
    ASSERT_TRUE(brute.has_value());
    const double got = loocv_error(xs, y, kernel, c);
    EXPECT_GE(got, 0.0);
    EXPECT_NEAR(got, static_cast<double>(*brute), 1e-8 * std::max(1.0, static_cast<double>(*brute)));
    ++checked;
  }
  EXPECT_GE(checked, 20);
}

TEST(TuneShape, NoGridValueBeatsResult) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto k : kAllKernels) {
    const auto xs = lhs_sample(12, 2, rng());
    Vector y(12);
    for (auto& v : y) v = u(rng);
    const double c_star = tune_shape(xs, y, k);
    const double e_star = loocv_error(xs, y, k, c_star);
    EXPECT_GT(c_star, 0.0);
    for (int g = 0; g < ShapeSearch::kGridSize; ++g)
      EXPECT_LE(e_star, loocv_error(xs, y, k, ShapeSearch::grid_value(g))) << to_string(k);
  }
}

TEST(TuneShape, InvariantUnderSignFlip) {
  const auto xs = lhs_sample(9, 2, 4);
  Vector y(9);
  for (int i = 0; i < 9; ++i) y[i] = std::sin(5.0 * xs[static_cast<std::size_t>(i)][0]) + xs[static_cast<std::size_t>(i)][1];
  for (auto k : kAllKernels) EXPECT_EQ(tune_shape(xs, y, k), tune_shape(xs, Vector(-y), k));
}

TEST(TuneShape, AgreesWithDenseLogGridOracle) {
  const auto xs = lhs_sample(10, 1, 8);
  const Vector y = forrester_values(xs, 0.0);
  const auto pts = oracle::to_points(xs);
  const std::vector<double> ys(y.data(), y.data() + y.size());
  for (auto kernel : {KernelKind::Gaussian, KernelKind::Multiquadric}) {
    double best_c = 0.0;
    long double best_e = std::numeric_limits<long double>::infinity();
    for (int i = 0; i < 1000; ++i) {
      const double c = std::pow(10.0, -2.0 + 4.0 * i / 999.0);
      const auto e = oracle::loocv_refit(kernel_id(kernel), c, pts, ys);
      if (e && *e < best_e) {
        best_e = *e;
        best_c = c;
      }
    }
    const double c_star = tune_shape(xs, y, kernel);
    const double cell = 4.0 / (ShapeSearch::kGridSize - 1);
    EXPECT_LE(std::abs(std::log10(c_star) - std::log10(best_c)), cell)
        << to_string(kernel) << " c*=" << c_star << " dense=" << best_c;
  }
}

TEST(TuneShape, RequiresTwoSamples) {
  EXPECT_THROW(tune_shape(points_1d({0.4}), Vector::Ones(1), KernelKind::Gaussian), Error);
}

namespace {

SampleSet constrained_samples(std::size_t n, std::uint64_t seed) {
  const auto problem = make_problem("constrained2d");
  SampleSet set;
  for (const auto& u : lhs_sample(n, 2, seed)) {
    const RawPoint x = denormalize(u, problem.bounds);
    const auto e = problem.evaluate(x);
    set.add(Sample{u, x, e.objective, e.constraints});
  }
  return set;
}

}  // namespace

TEST(BuildBundle, UnconstrainedHasNoConstraintModels) {
  SampleSet set;
  for (const auto& u : lhs_sample(4, 1, 2)) set.add(Sample{u, u, forrester_alpha(u[0], 0.0), Vector(0)});
  const auto bundle = build_bundle(set, KernelKind::Gaussian, true);
  EXPECT_TRUE(bundle.constraints.empty());
  EXPECT_EQ(bundle.predict_constraints(set[0].x).size(), 0);
}

TEST(BuildBundle, ConstrainedModelsInterpolateAndUseOwnShapes) {
  const SampleSet set = constrained_samples(5, 21);
  const auto bundle = build_bundle(set, KernelKind::Gaussian, true);
  ASSERT_EQ(bundle.constraints.size(), 3u);
  const auto xs = set.inputs();
  Vector J(5);
  std::vector<Vector> g(3, Vector(5));
  for (int i = 0; i < 5; ++i) {
    J[i] = set[static_cast<std::size_t>(i)].J;
    for (int j = 0; j < 3; ++j) g[static_cast<std::size_t>(j)][i] = set[static_cast<std::size_t>(i)].g[j];
  }
  for (std::size_t i = 0; i < set.size(); ++i) {
    EXPECT_NEAR(bundle.predict_objective(set[i].x), set[i].J, 1e-6 * (1 + J.cwiseAbs().maxCoeff()));
    const Vector gp = bundle.predict_constraints(set[i].x);
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(gp[j], set[i].g[j], 1e-6 * (1 + g[static_cast<std::size_t>(j)].cwiseAbs().maxCoeff()));
  }
  EXPECT_EQ(bundle.objective.c, tune_shape(xs, J, KernelKind::Gaussian));
  for (int j = 0; j < 3; ++j)
    EXPECT_EQ(bundle.constraints[static_cast<std::size_t>(j)].c, tune_shape(xs, g[static_cast<std::size_t>(j)], KernelKind::Gaussian));
}

TEST(BuildBundle, SingleSampleUsesDefaultShape) {
  const SampleSet set = constrained_samples(1, 3);
  const auto bundle = build_bundle(set, KernelKind::Gaussian, true);
  EXPECT_EQ(bundle.objective.c, kDefaultShape);
  EXPECT_EQ(bundle.constraints.size(), 3u);
}

TEST(BuildBundle, EmptySetIsAnError) {
  EXPECT_THROW(build_bundle(SampleSet{}, KernelKind::Gaussian, true), Error);
}

TEST(CompensatedSum, RecoversCancelledTerms) {
  detail::CompensatedSum s;
  s.add_product(1e16, 1.0);
  s.add_product(1.0, 1.0);
  s.add_product(-1e16, 1.0);
  EXPECT_EQ(s.value(), 1.0);
  detail::CompensatedSum t;
  t.add_product(1.0 + 0x1p-30, 1.0 - 0x1p-30);
  t.add_product(-1.0, 1.0);
  EXPECT_EQ(t.value(), -0x1p-60);
}

TEST(FitProperty, UnridgedNearSingularSystemsStillInterpolate) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  int unridged = 0;
  for (int trial = 0; trial < 120; ++trial) {
    const auto kernel = kAllKernels[static_cast<std::size_t>(trial) % 4];
    const std::size_t n = 8 + rng() % 23;
    const auto xs = lhs_sample(n, 1 + trial % 2, rng());
    Vector y(static_cast<Eigen::Index>(n));
    for (auto& v : y) v = u(rng);
    const auto model = fit(xs, y, kernel, trial % 3 == 0 ? 0.1 : 10.0);
    const double scale = 1.0 + y.cwiseAbs().maxCoeff();
    if (model.ridge == 0.0) {
      ++unridged;
      EXPECT_LE(max_residual(model, xs, y), 1e-6 * scale);
    }
  }
  EXPECT_GT(unridged, 0);
}

// A ridged model interpolates the shifted system: predict(x_i) + ridge * beta_i = y_i.
TEST(FitProperty, RidgedModelsSolveShiftedSystem) {
  int ridged = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const auto kernel = kAllKernels[static_cast<std::size_t>(trial) % 4];
    const Eigen::Index m = 1 + trial % 2;
    const auto xs = lhs_sample(20 + static_cast<std::size_t>(trial % 11), m, static_cast<std::uint64_t>(trial));
    Vector y(static_cast<Eigen::Index>(xs.size()));
    for (std::size_t i = 0; i < xs.size(); ++i) y[static_cast<Eigen::Index>(i)] = std::sin(3.0 * xs[i].sum()) + xs[i][0];
    const auto model = fit(xs, y, kernel, 0.1);
    if (model.ridge == 0.0) continue;
    ++ridged;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      EXPECT_NEAR(predict(model, xs[i]) + model.ridge * model.beta[k], y[k], 1e-6 * (1.0 + y.cwiseAbs().maxCoeff()))
          << to_string(kernel);
    }
  }
  EXPECT_GT(ridged, 10);
}
