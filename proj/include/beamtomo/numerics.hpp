#pragma once

// Special functions and quadrature primitives: physicists' Hermite
// polynomials, Gauss-Hermite rules, the Hermite-Gaussian integral identity
// and trapezoid quadrature for chirped (Fresnel-type) line integrals.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <type_traits>

#include "beamtomo/errors.hpp"

namespace beamtomo {

using Eigen::Index;

template <typename T>
struct is_complex : std::false_type {};
template <typename T>
struct is_complex<std::complex<T>> : std::true_type {};

namespace detail {

template <typename T>
bool is_finite(const T& x) {
  if constexpr (is_complex<T>::value) {
    return std::isfinite(x.real()) && std::isfinite(x.imag());
  } else {
    return std::isfinite(x);
  }
}

}  // namespace detail

/// Truncation box, node count and absolute tolerance for a numeric integral.
template <typename Scalar = double>
struct QuadratureSpec {
  Scalar half_width = Scalar(12);
  Index nodes_per_axis = 4096;
  Scalar abs_tol = Scalar(1e-9);

  void validate() const {
    if (!(half_width > 0) || !std::isfinite(half_width))
      throw ValidationError("quadrature half_width must be positive and finite");
    if (nodes_per_axis < 2) throw ValidationError("quadrature needs at least 2 nodes per axis");
    if (!(abs_tol > 0)) throw ValidationError("quadrature abs_tol must be positive");
  }
};

/// Uniform 1D grid, symmetric about `center`:
///   x_j = center + (j - (count - 1) / 2) * step,  j = 0 .. count-1.
/// Symmetric placement makes x_{count-1-j} = 2*center - x_j hold exactly.
template <typename Scalar = double>
struct UniformGrid {
  Scalar center = 0;
  Scalar step = 1;
  Index count = 2;

  static UniformGrid spanning(Scalar half_span, Index count, Scalar center = 0) {
    if (count < 2) throw ValidationError("grid needs at least 2 points");
    return {center, Scalar(2) * half_span / Scalar(count - 1), count};
  }

  void validate() const {
    if (count < 2) throw ValidationError("grid count must be >= 2");
    if (!(step > 0) || !std::isfinite(step)) throw ValidationError("grid step must be positive");
    if (!std::isfinite(center)) throw ValidationError("grid center must be finite");
  }

  Scalar operator[](Index j) const {
    return center + (Scalar(j) - Scalar(count - 1) / Scalar(2)) * step;
  }
  Scalar half_span() const { return Scalar(count - 1) / Scalar(2) * step; }
  Scalar lower() const { return center - half_span(); }
  Scalar upper() const { return center + half_span(); }

  /// Momentum grid paired with this one by the discrete Fourier transform.
  UniformGrid conjugate() const {
    return {Scalar(0), Scalar(2) * std::numbers::pi_v<Scalar> / (Scalar(count) * step), count};
  }

  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> nodes() const {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x(count);
    for (Index j = 0; j < count; ++j) x[j] = (*this)[j];
    return x;
  }

  friend bool operator==(const UniformGrid&, const UniformGrid&) = default;
};

/// Physicists' Hermite polynomial H_n(x) by the three-term recurrence
/// H_{k+1} = 2x H_k - 2k H_{k-1}. Works for real and complex arguments.
template <typename T>
T hermite_poly(int n, const T& x) {
  if (n < 0) throw ValidationError("Hermite order must be nonnegative");
  if (!detail::is_finite(x)) throw ValidationError("Hermite argument must be finite");
  T previous(1);
  if (n == 0) return previous;
  T current = T(2) * x;
  for (int k = 1; k < n; ++k) {
    T next = T(2) * x * current - T(2 * k) * previous;
    previous = current;
    current = next;
  }
  return current;
}

/// s^n H_n(u / s) with s^2 = s_squared, evaluated without forming s.
///
/// The result is a polynomial in (u, s^2), so it is branch-free and stays
/// regular as s -> 0, where it tends to (2u)^n.
template <typename T>
T hermite_scaled(int n, const T& u, const T& s_squared) {
  if (n < 0) throw ValidationError("Hermite order must be nonnegative");
  T previous(1);
  if (n == 0) return previous;
  T current = T(2) * u;
  for (int k = 1; k < n; ++k) {
    T next = T(2) * u * current - T(2 * k) * s_squared * previous;
    previous = current;
    current = next;
  }
  return current;
}

/// Closed form of  \int H_n(alpha y) exp(-(y - beta)^2) dy
///   = sqrt(pi) (1 - alpha^2)^{n/2} H_n(alpha beta / sqrt(1 - alpha^2)).
///
/// Evaluated through hermite_scaled, so only even powers of the square root
/// appear and the principal-branch choice drops out. At alpha^2 = 1 this
/// returns the regular limit sqrt(pi) (2 beta)^n.
template <typename Scalar>
std::complex<Scalar> hermite_gaussian_integral(int n, const std::complex<Scalar>& alpha,
                                               const std::complex<Scalar>& beta) {
  if (!detail::is_finite(alpha) || !detail::is_finite(beta))
    throw ValidationError("hermite_gaussian_integral: non-finite argument");
  const std::complex<Scalar> one(1);
  return std::sqrt(std::numbers::pi_v<Scalar>) *
         hermite_scaled(n, alpha * beta, one - alpha * alpha);
}

template <typename Scalar = double>
struct GaussHermiteRule {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> nodes;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> weights;

  template <typename F>
  auto integrate(F&& f) const {
    using R = std::decay_t<decltype(f(nodes[0]))>;
    R sum(0);
    for (Index i = 0; i < nodes.size(); ++i) sum += weights[i] * f(nodes[i]);
    return sum;
  }
};

inline constexpr int kMaxGaussHermiteOrder = 200;

/// Gauss-Hermite rule for the weight exp(-x^2).
///
/// Golub-Welsch eigen-decomposition of the Jacobi matrix gives starting
/// nodes; each node is then polished by Newton steps on the orthonormal
/// Hermite recurrence, and weights are taken from the derivative formula.
template <typename Scalar = double>
GaussHermiteRule<Scalar> gauss_hermite_rule(int order) {
  if (order < 1 || order > kMaxGaussHermiteOrder)
    throw ValidationError("Gauss-Hermite order must lie in [1, " +
                          std::to_string(kMaxGaussHermiteOrder) + "]");
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Scalar pi = std::numbers::pi_v<Scalar>;

  Matrix jacobi = Matrix::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(Scalar(k) / Scalar(2));
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(jacobi);
  Vector nodes = solver.eigenvalues();
  Vector weights(order);

  // Orthonormal recurrence: p_{j+1} = x sqrt(2/(j+1)) p_j - sqrt(j/(j+1)) p_{j-1}.
  auto evaluate = [order, pi](Scalar x, Scalar& p_n, Scalar& dp_n) {
    Scalar p_prev = 0;
    Scalar p = std::pow(pi, Scalar(-0.25));
    for (int j = 0; j < order; ++j) {
      Scalar p_next = x * std::sqrt(Scalar(2) / Scalar(j + 1)) * p -
                      std::sqrt(Scalar(j) / Scalar(j + 1)) * p_prev;
      p_prev = p;
      p = p_next;
    }
    p_n = p;
    dp_n = std::sqrt(Scalar(2 * order)) * p_prev;
  };

  for (int i = 0; i < order; ++i) {
    Scalar x = nodes[i];
    Scalar p = 0, dp = 1;
    for (int iter = 0; iter < 3; ++iter) {
      evaluate(x, p, dp);
      x -= p / dp;
    }
    evaluate(x, p, dp);
    nodes[i] = x;
    weights[i] = Scalar(2) / (dp * dp);
  }

  // Enforce exact symmetry of the rule.
  for (int i = 0; i < order / 2; ++i) {
    const int j = order - 1 - i;
    const Scalar x = (nodes[j] - nodes[i]) / Scalar(2);
    const Scalar w = (weights[i] + weights[j]) / Scalar(2);
    nodes[i] = -x;
    nodes[j] = x;
    weights[i] = weights[j] = w;
  }
  if (order % 2 == 1) nodes[order / 2] = 0;
  return {std::move(nodes), std::move(weights)};
}

namespace detail {

// Trapezoid sum of f(x) exp(i(a x^2/2 + b x)) over samples of `grid`,
// using every `stride`-th node (stride 2 gives the coarse companion sum).
template <typename Scalar, typename Samples>
std::complex<Scalar> chirped_trapezoid(const Samples& f, const UniformGrid<Scalar>& grid,
                                       Scalar chirp_a, Scalar linear_b, Index stride) {
  std::complex<Scalar> sum(0);
  const Index last = grid.count - 1;
  for (Index j = 0; j <= last; j += stride) {
    const Scalar x = grid[j];
    const Scalar phase = chirp_a * x * x / Scalar(2) + linear_b * x;
    const Scalar end_weight = (j == 0 || j == last) ? Scalar(0.5) : Scalar(1);
    sum += end_weight * std::complex<Scalar>(f[j]) * std::polar(Scalar(1), phase);
  }
  return sum * grid.step * Scalar(stride);
}

}  // namespace detail

/// \int f(x) exp(i (a x^2 / 2 + b x)) dx for f sampled on `grid`.
///
/// The grid is fixed, so convergence is judged by comparing against the
/// sum over every second node: a change above 10 * abs_tol is reported as
/// non-convergence (typically an unresolved chirp).
template <typename Scalar, typename Derived>
std::complex<Scalar> oscillatory_line_integral(const Eigen::MatrixBase<Derived>& samples,
                                               const UniformGrid<Scalar>& grid, Scalar chirp_a,
                                               Scalar linear_b, const QuadratureSpec<Scalar>& spec) {
  grid.validate();
  spec.validate();
  if (samples.size() != grid.count) throw ValidationError("sample count does not match grid");
  if (!std::isfinite(chirp_a) || !std::isfinite(linear_b))
    throw ValidationError("chirp parameters must be finite");
  const auto fine = detail::chirped_trapezoid(samples.derived(), grid, chirp_a, linear_b, 1);
  const auto coarse = detail::chirped_trapezoid(samples.derived(), grid, chirp_a, linear_b, 2);
  if (std::abs(fine - coarse) > Scalar(10) * spec.abs_tol)
    throw NonConvergenceError("oscillatory integral not resolved on the sampling grid");
  return fine;
}

/// \int f(x) exp(i (a x^2 / 2 + b x)) dx for callable f on [-half_width, half_width].
///
/// Starts from spec.nodes_per_axis nodes and doubles (nested) until two
/// successive sums agree within abs_tol, at most `max_doublings` times.
template <typename Scalar, typename F>
std::complex<Scalar> oscillatory_line_integral(F&& f, Scalar chirp_a, Scalar linear_b,
                                               const QuadratureSpec<Scalar>& spec,
                                               int max_doublings = 4) {
  spec.validate();
  if (!std::isfinite(chirp_a) || !std::isfinite(linear_b))
    throw ValidationError("chirp parameters must be finite");
  const Scalar edge = std::max(std::abs(std::complex<Scalar>(f(-spec.half_width))),
                               std::abs(std::complex<Scalar>(f(spec.half_width))));
  if (edge > spec.abs_tol)
    throw ValidationError("integrand does not decay below abs_tol at the truncation edge");

  auto integrate = [&](Index nodes) {
    const auto grid = UniformGrid<Scalar>::spanning(spec.half_width, nodes);
    std::complex<Scalar> sum(0);
    for (Index j = 0; j < nodes; ++j) {
      const Scalar x = grid[j];
      const Scalar w = (j == 0 || j == nodes - 1) ? Scalar(0.5) : Scalar(1);
      sum += w * std::complex<Scalar>(f(x)) *
             std::polar(Scalar(1), chirp_a * x * x / Scalar(2) + linear_b * x);
    }
    return sum * grid.step;
  };

  Index nodes = spec.nodes_per_axis;
  std::complex<Scalar> previous = integrate(nodes);
  Scalar change = 0;
  for (int d = 0; d < max_doublings; ++d) {
    nodes = 2 * nodes - 1;
    const std::complex<Scalar> current = integrate(nodes);
    change = std::abs(current - previous);
    previous = current;
    if (change <= spec.abs_tol) return current;
  }
  if (change > Scalar(10) * spec.abs_tol)
    throw NonConvergenceError("oscillatory integral did not converge under node doubling");
  return previous;
}

}  // namespace beamtomo
