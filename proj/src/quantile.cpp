#include "fsq/quantile.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fsq/parallel.hpp"

namespace fsq {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

struct AnchorTest {
  VectorXd reduced;  // n^-1 sum over non-coincident i of sgn(X_j - X_i), minus u
  Index multiplicity;
};

// Subgradient test at datum j: X_j is optimal iff the reduced gradient has
// norm at most (number of data coincident with X_j) / n.
AnchorTest anchor_test(const MatrixXd& data, Index j, const VectorXd& u) {
  const Index n = data.cols();
  const VectorXd anchor = data.col(j);
  const double scale = anchor.norm();
  const MatrixXd diff = (-data).colwise() + anchor;
  const VectorXd lengths = diff.colwise().norm().transpose();
  const VectorXd norms = data.colwise().norm().transpose();
  VectorXd inverse(n);
  Index multiplicity = 0;
  for (Index i = 0; i < n; ++i) {
    if (is_effectively_zero(lengths[i], std::max(scale, norms[i]))) {
      ++multiplicity;
      inverse[i] = 0;
    } else {
      inverse[i] = 1.0 / lengths[i];
    }
  }
  return {diff * inverse / static_cast<double>(n) - u, multiplicity};
}

bool anchor_passes(const AnchorTest& test, Index n) {
  return test.reduced.norm() <= static_cast<double>(test.multiplicity) / static_cast<double>(n);
}

VectorXd coordinatewise_median(const MatrixXd& data) {
  VectorXd out(data.rows());
  std::vector<double> row(static_cast<std::size_t>(data.cols()));
  for (Index r = 0; r < data.rows(); ++r) {
    for (Index i = 0; i < data.cols(); ++i) row[static_cast<std::size_t>(i)] = data(r, i);
    const std::size_t mid = row.size() / 2;
    std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(mid), row.end());
    double value = row[mid];
    if (row.size() % 2 == 0) {
      value = 0.5 * (value + *std::max_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(mid)));
    }
    out[r] = value;
  }
  return out;
}

// Collinear data: minimize n^-1 sum |q - s_i| - u_e q along the supporting
// line. The minimizer is the ceil(n (1 + u_e) / 2)-th order statistic, or the
// midpoint of a flat stretch when that count is attained exactly.
CoefficientSolution solve_on_line(const MatrixXd& data, const VectorXd& u, const VectorXd& center,
                                  const VectorXd& direction) {
  const Index n = data.cols();
  VectorXd s = direction.transpose() * (data.colwise() - center);
  const double u_line = direction.dot(u);
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return s[a] < s[b]; });

  const double target = static_cast<double>(n) * (1.0 + u_line) / 2.0;
  Index k = std::clamp<Index>(static_cast<Index>(std::ceil(target - 1e-12)), 1, n);
  CoefficientSolution solution;
  solution.degenerate = true;
  solution.converged = true;
  double q = s[order[static_cast<std::size_t>(k - 1)]];
  if (std::abs(static_cast<double>(k) - target) <= 1e-12 && k < n) {
    q = 0.5 * (q + s[order[static_cast<std::size_t>(k)]]);
  }
  solution.point = center + q * direction;
  if (auto hit = coincident_datum(solution.point, data)) {
    const AnchorTest test = anchor_test(data, *hit, direction * u_line);
    solution.anchored_at_datum = *hit;
    solution.point = data.col(*hit);
    solution.grad_norm = test.reduced.norm();
  } else {
    solution.grad_norm = direction.dot(gradient(solution.point, data, VectorXd(direction * u_line)));
    solution.grad_norm = std::abs(solution.grad_norm);
  }
  solution.objective = objective(solution.point, data, u);
  return solution;
}

struct LineSearch {
  bool accepted = false;
  double step = 0;
  double value = 0;
};

// Backtracking on the objective from step `initial`. With a descent slope the
// Armijo condition is used; otherwise plain decrease.
template <typename F>
LineSearch backtrack(const F& evaluate, double current, double slope, double initial) {
  double t = initial;
  for (int attempt = 0; attempt < 60; ++attempt, t *= 0.5) {
    const double value = evaluate(t);
    if (!std::isfinite(value)) continue;
    const bool armijo = slope < 0 ? value <= current + 1e-4 * t * slope : value < current;
    if (armijo) return {true, t, value};
  }
  return {};
}

}  // namespace

CoefficientSolution minimize_quantile(const MatrixXd& data, const VectorXd& u, const QuantileOptions& options) {
  const Index n = data.cols();
  const Index d = data.rows();
  if (n < 1) throw InvalidArgument("quantile of an empty sample");
  if (u.size() != d) throw InvalidArgument("direction and data dimensions differ");
  if (!(u.norm() < 1.0)) throw InvalidArgument("direction u must satisfy ||u|| < 1");

  const VectorXd center = data.rowwise().mean();
  {
    const MatrixXd centered = data.colwise() - center;
    Eigen::SelfAdjointEigenSolver<MatrixXd> scatter(centered * centered.transpose());
    const VectorXd& spread = scatter.eigenvalues();
    const double top = spread[d - 1];
    const double scale = data.cwiseAbs2().colwise().sum().maxCoeff();
    if (top <= 1e-24 * (1.0 + scale)) {
      CoefficientSolution solution;
      solution.point = data.col(0);
      solution.anchored_at_datum = 0;
      solution.converged = true;
      solution.degenerate = true;
      solution.grad_norm = anchor_test(data, 0, u).reduced.norm();
      solution.objective = objective(solution.point, data, u);
      return solution;
    }
    if (d == 1 || spread[d - 2] <= 1e-12 * top) {
      return solve_on_line(data, u, center, scatter.eigenvectors().col(d - 1));
    }
  }

  auto value_at = [&](const VectorXd& q) { return objective(q, data, u); };

  CoefficientSolution solution;
  VectorXd q = coordinatewise_median(data);
  double f = value_at(q);
  if (options.record_objective) solution.objective_trace.push_back(f);
  double grad_norm = INFINITY;
  int stalled = 0;

  auto finish = [&](int iterations) {
    solution.point = q;
    solution.iterations = iterations;
    solution.grad_norm = grad_norm;
    solution.objective = f;
    solution.converged = true;
    return solution;
  };

  for (int iter = 0; iter < options.max_iter; ++iter) {
    // Nearest datum: the optimality test there is exact, so an iterate
    // drifting onto an optimal datum is resolved immediately.
    Index nearest = 0;
    const double nearest_distance = (data.colwise() - q).colwise().norm().minCoeff(&nearest);
    const AnchorTest anchor = anchor_test(data, nearest, u);
    if (anchor_passes(anchor, n)) {
      q = data.col(nearest);
      f = value_at(q);
      grad_norm = anchor.reduced.norm();
      if (options.record_objective) solution.objective_trace.push_back(f);
      solution.anchored_at_datum = nearest;
      return finish(iter);
    }
    if (is_effectively_zero(nearest_distance, std::max(q.norm(), data.col(nearest).norm()))) {
      // Sitting on a non-optimal datum: leave along the reduced gradient.
      const VectorXd direction = -anchor.reduced.normalized();
      const double initial = (data.colwise() - q).colwise().norm().mean();
      const LineSearch step =
          backtrack([&](double t) { return value_at(q + t * direction); }, f, 0.0, std::max(initial, 1e-8));
      if (!step.accepted) break;
      q += step.step * direction;
      f = step.value;
      ++solution.fallback_steps;
      if (options.record_objective) solution.objective_trace.push_back(f);
      continue;
    }

    const VectorXd g = gradient(q, data, u);
    grad_norm = g.norm();
    if (grad_norm <= options.grad_tol) return finish(iter);

    const MatrixXd h = hessian(q, data);
    Eigen::SelfAdjointEigenSolver<MatrixXd> eigen(h);
    const VectorXd& lambda = eigen.eigenvalues();
    LineSearch step;
    VectorXd direction;
    if (lambda[0] > 0 && lambda[d - 1] / lambda[0] <= options.hessian_condition_limit) {
      direction = -(eigen.eigenvectors() *
                    (eigen.eigenvectors().transpose() * g).cwiseQuotient(lambda));
      const double slope = g.dot(direction);
      // Near the optimum the decrease drops below rounding and backtracking
      // only sees noise; judge the full step by the gradient instead.
      const auto full_step = [&]() -> LineSearch {
        const VectorXd trial = q + direction;
        const double value = value_at(trial);
        if (value <= f + 1e-13 * (1.0 + std::abs(f)) && !coincident_datum(trial, data) &&
            gradient(trial, data, u).norm() < grad_norm) {
          return {true, 1.0, value};
        }
        return {};
      };
      const bool below_resolution = -slope <= 1e-12 * (1.0 + std::abs(f));
      if (below_resolution) step = full_step();
      if (!step.accepted) step = backtrack([&](double t) { return value_at(q + t * direction); }, f, slope, 1.0);
      if (!step.accepted && !below_resolution) step = full_step();
      if (step.accepted) ++solution.newton_steps;
    }
    if (!step.accepted) {
      // Weiszfeld fixed point with the u term: Q = (sum X_i/r_i + n u) / sum 1/r_i.
      const VectorXd inverse = (data.colwise() - q).colwise().norm().cwiseInverse().transpose();
      const VectorXd target = (data * inverse + static_cast<double>(n) * u) / inverse.sum();
      direction = target - q;
      step = backtrack([&](double t) { return value_at(q + t * direction); }, f, g.dot(direction), 1.0);
      if (!step.accepted) {
        direction = -g;
        const double curvature = lambda[d - 1] > 0 ? lambda[d - 1] : 1.0;
        step = backtrack([&](double t) { return value_at(q + t * direction); }, f, -grad_norm * grad_norm,
                         1.0 / curvature);
      }
      if (step.accepted) ++solution.fallback_steps;
    }
    if (!step.accepted) break;

    const double moved = step.step * direction.norm();
    q += step.step * direction;
    f = step.value;
    if (options.record_objective) solution.objective_trace.push_back(f);
    solution.iterations = iter + 1;
    if (moved <= options.step_tol * (1.0 + q.norm())) {
      if (++stalled >= 3) break;
    } else {
      stalled = 0;
    }
  }

  if (!coincident_datum(q, data)) {
    grad_norm = gradient(q, data, u).norm();
    if (grad_norm <= options.grad_tol) return finish(solution.iterations);
  }
  throw ConvergenceError("quantile solver did not reach the gradient tolerance (grad norm " +
                             std::to_string(grad_norm) + ")",
                         q, grad_norm);
}

QuantileSolution solve_quantile(const FunctionalSample& sample, const DirectionU& u, const BasisPtr& basis,
                                Index d, const QuantileOptions& options) {
  if (!basis) throw InvalidArgument("solve_quantile needs a basis");
  if (d == 0) d = default_truncation(sample.size());
  if (d < 1 || d > basis->size()) {
    throw InvalidArgument("truncation " + std::to_string(d) + " exceeds the basis size " +
                          std::to_string(basis->size()));
  }
  const Curve mean = sample.mean();
  const MatrixXd data = project_sample(sample.centered(), basis, d);
  const CoefficientSolution found = minimize_quantile(data, u.truncated(d), options);
  Coefficients coefficients(found.point, basis);
  Curve curve = mean + reconstruct(coefficients);
  return QuantileSolution{std::move(coefficients), std::move(curve), found.iterations, found.grad_norm,
                          found.objective, found.converged, found.anchored_at_datum, found.degenerate};
}

std::vector<FanEntry> quantile_fan(const FunctionalSample& sample, const std::vector<Index>& ks,
                                   const std::vector<double>& cs, BasisPtr basis, Index d,
                                   const QuantileOptions& options) {
  if (d == 0) d = default_truncation(sample.size());
  if (!basis) basis = pca(sample, d);
  std::vector<std::pair<Index, double>> directions{{0, 0.0}};
  for (Index k : ks) {
    for (double c : cs) {
      directions.emplace_back(k, c);
      directions.emplace_back(k, -c);
    }
  }
  std::vector<std::optional<FanEntry>> solved(directions.size());
  parallel_for(directions.size(), [&](std::size_t i) {
    const auto [k, c] = directions[i];
    const DirectionU u = k == 0 ? DirectionU::zero(d) : DirectionU::along(k, c, d);
    solved[i] = FanEntry{k, c, solve_quantile(sample, u, basis, d, options)};
  });
  std::vector<FanEntry> out;
  out.reserve(solved.size());
  for (auto& entry : solved) out.push_back(std::move(*entry));
  return out;
}

BahadurReference bahadur_reference(const MatrixXd& reference_coefficients, const VectorXd& u,
                                   const QuantileOptions& options) {
  const CoefficientSolution found = minimize_quantile(reference_coefficients, u, options);
  if (found.anchored_at_datum || found.degenerate) {
    throw ConditioningError("reference quantile sits on a datum; Hessian undefined", INFINITY);
  }
  const MatrixXd h = hessian(found.point, reference_coefficients);
  Eigen::SelfAdjointEigenSolver<MatrixXd> eigen(h);
  const VectorXd& lambda = eigen.eigenvalues();
  const double condition = lambda[0] > 0 ? lambda[lambda.size() - 1] / lambda[0] : INFINITY;
  if (!(condition <= options.hessian_condition_limit)) {
    throw ConditioningError("Hessian at the reference quantile is singular", condition);
  }
  MatrixXd inverse = eigen.eigenvectors() * lambda.cwiseInverse().asDiagonal() * eigen.eigenvectors().transpose();
  return {found.point, std::move(inverse), u, reference_coefficients.cols()};
}

BahadurReport bahadur_residual(const MatrixXd& sample_coefficients, const BahadurReference& reference,
                               const QuantileOptions& options) {
  const CoefficientSolution estimate = minimize_quantile(sample_coefficients, reference.u, options);
  // Mean score at Q_n(u) is the sample gradient there.
  const VectorXd linear = reference.inverse_hessian * gradient(reference.quantile, sample_coefficients, reference.u);
  const VectorXd residual = (estimate.point - reference.quantile) + linear;
  return {residual.norm(), sample_coefficients.cols(), sample_coefficients.rows(), linear.norm(), reference.size};
}

BahadurReport bahadur_residual(const FunctionalSample& sample, const DirectionU& u, const BasisPtr& basis, Index d,
                               const FunctionalSample& reference, const QuantileOptions& options) {
  if (!basis) throw InvalidArgument("bahadur_residual needs a basis");
  if (d < 1 || d > basis->size()) throw InvalidArgument("truncation exceeds the basis size");
  const VectorXd direction = u.truncated(d);
  const BahadurReference population = bahadur_reference(project_sample(reference, basis, d), direction, options);
  return bahadur_residual(project_sample(sample, basis, d), population, options);
}

}  // namespace fsq
