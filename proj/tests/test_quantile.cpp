#include <algorithm>
#include <cmath>

#include "doctest.h"

#include "fsq/quantile.hpp"
#include "fsq/simulate.hpp"
#include "support.hpp"

using namespace fsq;
using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd central_gradient(const VectorXd& q, const MatrixXd& data, const VectorXd& u, double h) {
  VectorXd g(q.size());
  for (Index k = 0; k < q.size(); ++k) {
    VectorXd plus = q, minus = q;
    plus[k] += h;
    minus[k] -= h;
    g[k] = (objective(plus, data, u) - objective(minus, data, u)) / (2 * h);
  }
  return g;
}

MatrixXd central_hessian(const VectorXd& q, const MatrixXd& data, double h) {
  const VectorXd zero = VectorXd::Zero(q.size());
  MatrixXd m(q.size(), q.size());
  for (Index k = 0; k < q.size(); ++k) {
    VectorXd plus = q, minus = q;
    plus[k] += h;
    minus[k] -= h;
    m.col(k) = (gradient(plus, data, zero) - gradient(minus, data, zero)) / (2 * h);
  }
  return m;
}

// Relative to the larger of the truth and `scale`; the 1-d Hessian is exactly zero.
double relative_error(const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& truth, double scale = 0) {
  return (estimate - truth).norm() / std::max({truth.norm(), scale, 1e-300});
}

}  // namespace

TEST_CASE("objective closed forms") {
  test::Rng rng(2);
  const MatrixXd one = test::gaussian_matrix(rng, 4, 1);
  CHECK(objective(VectorXd(one.col(0)), one, VectorXd::Zero(4)) == doctest::Approx(-one.norm()).epsilon(1e-14));
  const MatrixXd many = test::gaussian_matrix(rng, 4, 9);
  CHECK(objective(VectorXd::Zero(4), many, VectorXd::Zero(4)) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK_THROWS_AS(DirectionU(VectorXd::Constant(2, 0.8)), InvalidArgument);
  CHECK_THROWS_AS(DirectionU::along(3, 0.5, 2), InvalidArgument);
}

TEST_CASE("objective is midpoint convex") {
  test::Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const Index d = 1 + trial % 6;
    const MatrixXd data = test::gaussian_matrix(rng, d, 2 + trial % 11);
    const VectorXd u = test::ball_point(rng, d, 0.99);
    const VectorXd a = test::gaussian_vector(rng, d, 2.0);
    const VectorXd b = test::gaussian_vector(rng, d, 2.0);
    CHECK(objective(VectorXd((a + b) / 2), data, u) <= (objective(a, data, u) + objective(b, data, u)) / 2 + 1e-12);
  }
}

TEST_CASE("gradient and Hessian agree with finite differences") {
  test::Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const Index d = 1 + trial % 8;
    const MatrixXd data = test::gaussian_matrix(rng, d, 5 + trial);
    const VectorXd u = test::ball_point(rng, d, 0.9);
    const VectorXd q = test::gaussian_vector(rng, d);
    CHECK(relative_error(gradient(q, data, u), central_gradient(q, data, u, 1e-6)) < 1e-5);
    const double curvature = (data.colwise() - q).colwise().norm().cwiseInverse().mean();
    CHECK(relative_error(hessian(q, data), central_hessian(q, data, 1e-6), curvature) < 1e-4);
  }
}

TEST_CASE("gradient geometry") {
  VectorXd a(2);
  a << 1.0, 0.0;
  MatrixXd data(2, 2);
  data << a, -a;
  VectorXd q(2);
  q << 3.0, 0.0;
  const VectorXd g = gradient(q, data, VectorXd::Zero(2));
  CHECK(g[0] > 0);  // descent direction -g points back toward the segment
  CHECK(std::abs(g[1]) < 1e-15);
  test::Rng rng(10);
  for (int trial = 0; trial < 50; ++trial) {
    const MatrixXd sample = test::gaussian_matrix(rng, 3, 7);
    CHECK(gradient(VectorXd(test::gaussian_vector(rng, 3)), sample, VectorXd::Zero(3)).norm() <= 1 + 1e-14);
  }
  CHECK_THROWS_AS(gradient(VectorXd(data.col(0)), data, VectorXd::Zero(2)), CoincidentDatum);
}

TEST_CASE("Hessian closed form and positive semidefiniteness") {
  VectorXd datum = VectorXd::Zero(3);
  VectorXd q = VectorXd::Zero(3);
  q[0] = 2.5;
  MatrixXd expected = MatrixXd::Identity(3, 3) / 2.5;
  expected(0, 0) = 0;
  CHECK((hessian(q, MatrixXd(datum)) - expected).norm() < 1e-15);

  const auto grid = make_uniform_grid(0.0, 1.0, 50);
  const auto spec = make_process(KernelSpec::brownian(), CoefficientLaw::gaussian(), grid);
  const auto kl = karhunen_loeve(spec);
  const MatrixXd coeffs = project_sample(sample_process(spec, 100, 4), kl.basis, 6);
  test::Rng rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const MatrixXd h = hessian(VectorXd(test::gaussian_vector(rng, 6, 0.3)), coeffs);
    CHECK((h - h.transpose()).norm() == 0.0);
    CHECK(Eigen::SelfAdjointEigenSolver<MatrixXd>(h).eigenvalues().minCoeff() >= -1e-10);
  }
}

TEST_CASE("solver: trivial and symmetric configurations") {
  MatrixXd one(2, 1);
  one << 0.3, -2.0;
  const auto single = minimize_quantile(one, VectorXd::Zero(2));
  CHECK((single.point - one.col(0)).norm() < 1e-12);

  MatrixXd triangle(2, 3);
  const double s = std::sqrt(3.0) / 2;
  triangle << 1.0, -0.5, -0.5, 0.0, s, -s;
  triangle.colwise() += Eigen::Vector2d(4.0, -1.0);
  const auto centroid = minimize_quantile(triangle, VectorXd::Zero(2));
  CHECK(centroid.converged);
  CHECK((centroid.point - Eigen::Vector2d(4.0, -1.0)).norm() < 1e-6);
}

TEST_CASE("solver: anchored at an optimal datum") {
  // Four points around a central datum: the median is the centre.
  MatrixXd data(2, 5);
  data << 0, 1, -1, 0, 0, 0, 0, 0, 1, -1;
  const auto solution = minimize_quantile(data, VectorXd::Zero(2));
  REQUIRE(solution.anchored_at_datum.has_value());
  CHECK(*solution.anchored_at_datum == 0);
  CHECK(solution.point.norm() < 1e-12);
  // Optimality of the anchor: reduced gradient within 1/n.
  VectorXd reduced = VectorXd::Zero(2);
  for (Index i = 1; i < 5; ++i) reduced -= data.col(i).normalized() / 5.0;
  CHECK(reduced.norm() <= 1.0 / 5.0);
}

TEST_CASE("solver: scalar quantiles bracket order statistics") {
  test::Rng rng(19);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 40; ++trial) {
    const Index n = 21 + 2 * trial;
    MatrixXd data(1, n);
    for (Index i = 0; i < n; ++i) data(0, i) = normal(rng);
    std::vector<double> sorted(data.data(), data.data() + n);
    std::sort(sorted.begin(), sorted.end());
    const double tau = 0.05 + 0.9 * (trial % 17) / 16.0;
    const auto solution = minimize_quantile(data, VectorXd::Constant(1, 2 * tau - 1));
    const auto k = static_cast<std::size_t>(std::floor(n * tau));
    REQUIRE(k >= 1);
    REQUIRE(k < sorted.size());
    CHECK(solution.point[0] >= sorted[k - 1] - 1e-12);
    CHECK(solution.point[0] <= sorted[k] + 1e-12);
    if (std::abs(n * tau - std::round(n * tau)) > 1e-9) CHECK(solution.point[0] == doctest::Approx(sorted[k]));
  }
}

TEST_CASE("solver: collinear data are solved on their line") {
  VectorXd direction(3);
  direction << 1.0, 2.0, -2.0;
  direction /= 3.0;
  MatrixXd data(3, 7);
  for (Index i = 0; i < 7; ++i) data.col(i) = (static_cast<double>(i) - 2.5) * direction;
  const auto solution = minimize_quantile(data, VectorXd::Zero(3));
  CHECK(solution.degenerate);
  CHECK((solution.point - 0.5 * direction).norm() < 1e-10);
}

TEST_CASE("solver: convergence and monotone objective on random data") {
  test::Rng rng(23);
  QuantileOptions options;
  options.record_objective = true;
  for (int trial = 0; trial < 40; ++trial) {
    const Index d = 2 + trial % 7;
    const MatrixXd data = test::gaussian_matrix(rng, d, 20 + 5 * trial);
    const VectorXd u = test::ball_point(rng, d, 0.8);
    const auto solution = minimize_quantile(data, u, options);
    CHECK(solution.converged);
    if (!solution.anchored_at_datum) CHECK(solution.grad_norm <= options.grad_tol);
    for (std::size_t i = 1; i < solution.objective_trace.size(); ++i) {
      CHECK(solution.objective_trace[i] <= solution.objective_trace[i - 1] + 1e-14);
    }
    // no random perturbation improves the objective
    for (int probe = 0; probe < 5; ++probe) {
      const VectorXd moved = solution.point + test::gaussian_vector(rng, d, 1e-3);
      CHECK(objective(moved, data, u) >= solution.objective - 1e-12);
    }
  }
}

TEST_CASE("solver: affine and orthogonal equivariance") {
  test::Rng rng(29);
  for (int trial = 0; trial < 25; ++trial) {
    const Index d = 2 + trial % 5;
    const MatrixXd data = test::gaussian_matrix(rng, d, 30 + trial);
    const VectorXd u = test::ball_point(rng, d, 0.7);
    const VectorXd q = minimize_quantile(data, u).point;

    const double c = 0.2 + trial;
    const VectorXd a = test::gaussian_vector(rng, d, 5.0);
    const MatrixXd moved = (c * data).colwise() + a;
    CHECK((minimize_quantile(moved, u).point - (c * q + a)).norm() < 1e-6 * std::max(1.0, c));

    const MatrixXd A = test::random_orthogonal(rng, d);
    const VectorXd rotated = minimize_quantile(A * data, A * u).point;
    CHECK((rotated - A * q).norm() < 1e-6);
  }
}

TEST_CASE("functional solver, fans and ordering") {
  const auto grid = make_uniform_grid(0.0, 1.0, 60);
  const auto spec = make_process(KernelSpec::brownian(), CoefficientLaw::gaussian(), grid);
  const auto sample = sample_process(spec, 200, 31);

  const auto basis = pca(sample, default_truncation(sample.size()));
  const auto fan = quantile_fan(sample, {1, 2}, {0.0, 0.3, 0.6}, basis);
  REQUIRE(fan.size() == 1 + 2 * 3 * 2);
  const auto& median = fan.front();
  CHECK(median.k == 0);
  for (const auto& entry : fan) {
    CHECK((entry.solution.converged));
    if (entry.c == 0.0) CHECK((entry.solution.curve.values() - median.solution.curve.values()).norm() < 1e-9);
  }
  for (Index k = 1; k <= 2; ++k) {
    std::vector<std::pair<double, double>> along;
    for (const auto& entry : fan) {
      if (entry.k == k) along.emplace_back(entry.c, inner_product(entry.solution.curve, basis->function(k - 1)));
    }
    std::sort(along.begin(), along.end());
    for (std::size_t i = 1; i < along.size(); ++i) CHECK(along[i].second >= along[i - 1].second - 1e-8);
  }

  // Same solution through the coefficient interface.
  const DirectionU u = DirectionU::along(1, 0.4, basis->size());
  const auto functional = solve_quantile(sample, u, basis);
  const MatrixXd coeffs = project_sample(sample.centered(), basis, basis->size());
  CHECK((functional.coefficients.values() - minimize_quantile(coeffs, u.coefficients()).point).norm() < 1e-12);
  CHECK_THROWS_AS(solve_quantile(sample, u, basis, basis->size() + 1), InvalidArgument);
}

TEST_CASE("antisymmetry on a centrally symmetrized sample") {
  const auto grid = make_uniform_grid(0.0, 1.0, 40);
  const auto half = sample_process(make_process(KernelSpec::brownian(), CoefficientLaw::gaussian(), grid), 60, 3);
  MatrixXd values(40, 120);
  values << half.values(), -half.values();
  const FunctionalSample sample(grid, values);
  const auto basis = pca(sample, 8);
  const auto fan = quantile_fan(sample, {1, 3}, {0.25, 0.5}, basis, 8);
  CHECK(norm(fan.front().solution.curve) < 1e-8);
  for (std::size_t i = 1; i + 1 < fan.size(); i += 2) {
    CHECK(fan[i].c == -fan[i + 1].c);
    CHECK((fan[i].solution.curve.values() + fan[i + 1].solution.curve.values()).norm() < 1e-6);
  }
}

TEST_CASE("Bahadur residual against a large reference sample") {
  const auto grid = make_uniform_grid(0.0, 1.0, 50);
  const auto spec = make_process(KernelSpec::brownian(), CoefficientLaw::gaussian(), grid);
  const auto kl = karhunen_loeve(spec);
  const auto reference = sample_process(spec, 20000, 1);
  const DirectionU u = DirectionU::along(1, 0.5, 3);
  std::vector<double> small, large;
  for (int rep = 0; rep < 15; ++rep) {
    small.push_back(bahadur_residual(sample_process(spec, 100, 100 + rep), u, kl.basis, 3, reference).residual_norm);
    large.push_back(bahadur_residual(sample_process(spec, 1600, 200 + rep), u, kl.basis, 3, reference).residual_norm);
  }
  std::nth_element(small.begin(), small.begin() + 7, small.end());
  std::nth_element(large.begin(), large.begin() + 7, large.end());
  CHECK(large[7] < small[7]);
}
