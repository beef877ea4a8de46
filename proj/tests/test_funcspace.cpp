#include <cmath>
#include <numbers>

#include "doctest.h"

#include "fsq/funcspace.hpp"
#include "fsq/simulate.hpp"
#include "support.hpp"

using namespace fsq;
using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// sqrt(2) sin((k - 1/2) pi t), written out independently of the library.
Curve sine(const GridPtr& grid, int k) {
  VectorXd v = ((k - 0.5) * std::numbers::pi * grid->points().array()).sin() * std::sqrt(2.0);
  return Curve(grid, v);
}

}  // namespace

TEST_CASE("trapezoid weights on a uniform grid") {
  const auto grid = make_uniform_grid(0.0, 2.0, 5);
  VectorXd expected(5);
  expected << 0.25, 0.5, 0.5, 0.5, 0.25;
  CHECK((grid->weights() - expected).norm() < 1e-15);
  CHECK(grid->weights().sum() == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(grid->kind() == GridKind::uniform_interval);
}

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(make_uniform_grid(0.0, 1.0, 1), InvalidArgument);
  VectorXd points(3);
  points << 0.0, 0.5, 0.5;
  CHECK_THROWS_AS(make_custom_grid(points, VectorXd::Constant(3, 1.0)), InvalidArgument);
  points << 0.0, 0.5, 1.0;
  VectorXd weights(3);
  weights << 0.25, 0.0, 0.25;
  CHECK_THROWS_AS(make_custom_grid(points, weights), InvalidArgument);
  CHECK_THROWS_AS(Grid(points, VectorXd::Constant(3, 0.5), GridKind::gaussian_measure), InvalidArgument);
  CHECK_NOTHROW(make_measure_grid(points));
  CHECK(make_measure_grid(points)->weights().sum() == doctest::Approx(1.0));
}

TEST_CASE("curve invariants") {
  const auto grid = make_uniform_grid(0.0, 1.0, 4);
  CHECK_THROWS_AS(Curve(grid, VectorXd::Zero(3)), InvalidArgument);
  VectorXd bad = VectorXd::Zero(4);
  bad[2] = std::nan("");
  CHECK_THROWS_AS(Curve(grid, bad), InvalidArgument);
  const auto other = make_uniform_grid(0.0, 2.0, 4);
  CHECK_THROWS_AS(inner_product(Curve::zero(grid), Curve::zero(other)), GridMismatch);
}

TEST_CASE("inner products and norms on [0,1]") {
  const auto grid = make_uniform_grid(0.0, 1.0, 250);
  const Curve one(grid, VectorXd::Ones(250));
  CHECK(inner_product(one, one) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(norm(Curve::zero(grid)) == 0.0);
  CHECK(norm(-3.5 * one) == doctest::Approx(3.5).epsilon(1e-14));

  const auto phi1 = sine(grid, 1);
  const auto phi2 = sine(grid, 2);
  CHECK(std::abs(inner_product(phi1, phi2)) < 1e-6);
  CHECK(inner_product(phi1, phi1) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(norm(phi1) == doctest::Approx(1.0).epsilon(1e-4));

  // trapezoid of t^2 on h-spaced points: 1/3 + h^2/6
  const double h = 1.0 / 249.0;
  const Curve t(grid, grid->points());
  CHECK(inner_product(t, t) == doctest::Approx(1.0 / 3.0 + h * h / 6.0).epsilon(1e-13));
}

TEST_CASE("Cauchy-Schwarz over random curve pairs") {
  test::Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const auto grid = make_uniform_grid(-1.0, 3.0, 7 + trial % 40);
    const Curve a(grid, test::gaussian_vector(rng, grid->size()));
    const Curve b(grid, test::gaussian_vector(rng, grid->size(), 0.1 + trial));
    CHECK(std::abs(inner_product(a, b)) <= norm(a) * norm(b) * (1 + 1e-14));
  }
}

TEST_CASE("projection onto closed-form Brownian eigenfunctions") {
  const auto grid = make_uniform_grid(0.0, 1.0, 250);
  const auto kl = karhunen_loeve(make_process(KernelSpec::brownian(), CoefficientLaw::gaussian(), grid, 60));
  const auto& basis = kl.basis;

  const auto c3 = project(sine(grid, 2), basis, 3);
  CHECK(std::abs(c3.values()[0]) < 1e-6);
  CHECK(std::abs(c3.values()[1] - 1.0) < 1e-6);
  CHECK(std::abs(c3.values()[2]) < 1e-6);
  CHECK(std::abs(project(sine(grid, 2), basis, 1).values()[0]) < 1e-6);

  VectorXd e1 = VectorXd::Zero(4);
  e1[0] = 1;
  CHECK((reconstruct(Coefficients(e1, basis)).values() - sine(grid, 1).values()).norm() < 1e-12);
  CHECK(norm(reconstruct(Coefficients(VectorXd::Zero(5), basis))) == 0.0);
  CHECK_THROWS_AS(project(sine(grid, 1), basis, 61), InvalidArgument);

  // Truncation error of a fixed path shrinks with d; Parseval and contraction hold.
  const auto path = sample_process(make_process(KernelSpec::brownian(), CoefficientLaw::gaussian(), grid), 1, 5).curve(0);
  double previous = INFINITY;
  for (Index d = 1; d <= 50; ++d) {
    const auto c = project(path, basis, d);
    const auto approx = reconstruct(c);
    const double error = norm(path - approx);
    CHECK(error <= previous + 1e-12);
    previous = error;
    CHECK(std::abs(inner_product(approx, approx) - c.values().squaredNorm()) < 1e-8);
    CHECK(norm(approx) <= norm(path) + 1e-8);
    CHECK((project(approx, basis, d).values() - c.values()).norm() < 1e-8);
  }
}

TEST_CASE("orthonormalize yields an orthonormal basis for random inputs") {
  test::Rng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const Index size = 5 + trial;
    const auto grid = trial % 2 == 0 ? make_uniform_grid(0.0, 1.0 + trial, size)
                                     : make_measure_grid(test::gaussian_vector(rng, size));
    const Index d = 1 + trial % (size - 1);
    const auto basis = orthonormalize(grid, test::gaussian_matrix(rng, size, d));
    const MatrixXd& f = basis->functions();
    const MatrixXd gram = f.transpose() * grid->weights().asDiagonal() * f;
    CHECK((gram - MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("basis constructor rejects non-orthonormal functions") {
  const auto grid = make_uniform_grid(0.0, 1.0, 10);
  CHECK_THROWS_AS(Basis(grid, MatrixXd::Ones(10, 2)), InvalidArgument);
}

TEST_CASE("default truncation") {
  CHECK(default_truncation(1) == 1);
  CHECK(default_truncation(3) == 1);
  CHECK(default_truncation(4) == 2);
  CHECK(default_truncation(2500) == 50);
}

TEST_CASE("pca of multiples of one function") {
  const auto grid = make_uniform_grid(0.0, 1.0, 100);
  const auto phi = sine(grid, 1);
  MatrixXd values(100, 6);
  const double scales[] = {-2.0, -0.5, 0.0, 1.0, 1.5, 3.0};
  for (int i = 0; i < 6; ++i) values.col(i) = scales[i] * phi.values();
  const auto basis = pca(FunctionalSample(grid, values), 3);
  CHECK(std::abs(std::abs(inner_product(basis->function(0), phi)) - 1.0) < 1e-10);
  CHECK((*basis->eigenvalues())[1] < 1e-12);
  CHECK((*basis->eigenvalues())[2] < 1e-12);
  const MatrixXd& f = basis->functions();
  CHECK((f.transpose() * grid->weights().asDiagonal() * f - MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("pca eigenvalues equal variances of the projected scores") {
  test::Rng rng(21);
  for (const auto& [size, n] : {std::pair<Index, Index>{40, 15}, {12, 60}}) {
    const auto sample = test::random_walks(rng, size, n);
    const Index d = std::min<Index>(5, std::min(n - 1, size));
    const auto basis = pca(sample, d);
    const MatrixXd& f = basis->functions();
    CHECK((f.transpose() * sample.grid()->weights().asDiagonal() * f - MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff() <
          1e-8);
    const MatrixXd scores = project_sample(sample.centered(), basis, d);
    for (Index k = 0; k < d; ++k) {
      const double variance = scores.row(k).squaredNorm() / static_cast<double>(n - 1);
      CHECK(variance == doctest::Approx((*basis->eigenvalues())[k]).epsilon(1e-9));
      CHECK(inner_product(basis->function(k), Curve(sample.grid(), VectorXd::Ones(size))) >= 0);
    }
    // total variance = (n - 1)^-1 sum ||X_i - mean||^2
    const auto centered = sample.centered();
    double total = 0;
    for (Index i = 0; i < n; ++i) total += inner_product(centered.curve(i), centered.curve(i));
    CHECK(*basis->total_variance() == doctest::Approx(total / static_cast<double>(n - 1)).epsilon(1e-10));
  }
}

TEST_CASE("pca rejects truncation beyond rank bounds") {
  test::Rng rng(1);
  const auto sample = test::random_walks(rng, 10, 5);
  CHECK_THROWS_AS(pca(sample, 5), InvalidArgument);
  CHECK_THROWS_AS(pca(sample, 0), InvalidArgument);
  const auto grid = make_uniform_grid(0.0, 1.0, 10);
  CHECK_THROWS_AS(pca(FunctionalSample(grid, MatrixXd::Zero(10, 4)), 1), RankDeficient);
}

TEST_CASE("pca of Brownian paths recovers the closed-form spectrum") {
  const auto grid = make_uniform_grid(0.0, 1.0, 200);
  const auto sample = sample_process(make_process(KernelSpec::brownian(), CoefficientLaw::gaussian(), grid), 2500, 42);
  const auto basis = pca(sample, 3);
  const VectorXd fractions = explained_variance(*basis);
  // Reference explained-variance fractions of the first three components.
  CHECK(std::abs(fractions[0] - 0.811) < 0.01);
  CHECK(std::abs(fractions[1] - 0.09) < 0.01);
  CHECK(std::abs(fractions[2] - 0.0324) < 0.01);
  for (int k = 1; k <= 3; ++k) {
    const double closed = 1.0 / std::pow((k - 0.5) * std::numbers::pi, 2);
    CHECK((*basis->eigenvalues())[k - 1] == doctest::Approx(closed).epsilon(0.1));
    CHECK(std::abs(inner_product(basis->function(k - 1), sine(grid, k))) > 0.95);
  }
}
