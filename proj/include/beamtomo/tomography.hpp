#pragma once

// Symplectic, optical and Fresnel tomograms of two-dimensional beams.
//
// The symplectic tomogram is the joint density of X_k = mu_k x_k + nu_k p_k:
//
//   w(X1, mu1, nu1, X2, mu2, nu2) = 1 / (4 pi^2 |nu1 nu2|)
//       | \int psi(x, y) exp[i (mu1 x^2/(2 nu1) + mu2 y^2/(2 nu2)
//                               - X1 x / nu1 - X2 y / nu2)] dx dy |^2
//
// The optical tomogram restricts (mu, nu) to (cos theta, sin theta), the
// Fresnel tomogram to mu = 1. For HG modes the integral has a closed form;
// for sampled fields it is done by quadrature. Both honour the nu -> 0
// limit w -> |mu|^{-1} x intensity at X / mu.

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <optional>
#include <utility>

#include "beamtomo/beam_model.hpp"

namespace beamtomo {

/// Below this |nu| an axis is evaluated by its delta-kernel limit.
inline constexpr double kNuEps = 1e-8;

template <typename Scalar = double>
struct TomogramQuery {
  Scalar X1 = 0, mu1 = 1, nu1 = 0;
  Scalar X2 = 0, mu2 = 1, nu2 = 0;

  void validate() const {
    for (Scalar v : {X1, mu1, nu1, X2, mu2, nu2})
      if (!std::isfinite(v)) throw ValidationError("tomogram query has a non-finite entry");
    if ((mu1 == 0 && nu1 == 0) || (mu2 == 0 && nu2 == 0))
      throw DegenerateQueryError("tomogram query has (mu, nu) = (0, 0) on an axis");
  }

  /// All axis-k arguments multiplied by lambda_k.
  TomogramQuery scaled(Scalar lambda1, Scalar lambda2) const {
    return {lambda1 * X1, lambda1 * mu1, lambda1 * nu1, lambda2 * X2, lambda2 * mu2, lambda2 * nu2};
  }
};

template <typename Scalar = double>
struct OpticalAngles {
  Scalar theta1 = 0;
  Scalar theta2 = 0;
};

/// theta reduced into [0, pi) together with the sign to apply to X:
/// w_opt(X, theta + pi) = w_opt(-X, theta).
template <typename Scalar>
std::pair<Scalar, Scalar> canonical_angle(Scalar theta) {
  const Scalar pi = std::numbers::pi_v<Scalar>;
  const Scalar turns = std::floor(theta / pi);
  Scalar reduced = theta - turns * pi;
  if (reduced >= pi) reduced -= pi;
  if (reduced < 0) reduced = 0;
  const bool odd = std::fmod(std::abs(turns), Scalar(2)) == 1;
  return {reduced, odd ? Scalar(-1) : Scalar(1)};
}

/// Per-axis quantities of the HG closed form:
///   q = 1/sigma0^2 - i mu/(2 nu),  alpha = sqrt2 / (sigma0 sqrt q),
///   beta = -i X / (2 nu sqrt q).
/// Re q = 1/sigma0^2 > 0 keeps the Gaussian convergent.
template <typename Scalar = double>
struct ClosedFormIntermediates {
  std::array<std::complex<Scalar>, 2> alpha, beta, q;
};

template <typename Scalar>
ClosedFormIntermediates<Scalar> closed_form_intermediates(Scalar sigma0,
                                                          const TomogramQuery<Scalar>& query) {
  using Complex = std::complex<Scalar>;
  ClosedFormIntermediates<Scalar> out;
  const std::array<std::array<Scalar, 3>, 2> axes{{{query.X1, query.mu1, query.nu1},
                                                   {query.X2, query.mu2, query.nu2}}};
  for (std::size_t k = 0; k < 2; ++k) {
    const auto [X, mu, nu] = axes[k];
    if (std::abs(nu) < Scalar(kNuEps))
      throw DegenerateQueryError("closed-form intermediates need |nu| >= nu_eps");
    const Complex q(Scalar(1) / (sigma0 * sigma0), -mu / (2 * nu));
    const Complex root = std::sqrt(q);
    out.q[k] = q;
    out.alpha[k] = std::numbers::sqrt2_v<Scalar> / (sigma0 * root);
    out.beta[k] = Complex(0, -X) / (2 * nu * root);
  }
  return out;
}

/// One axis of the HG(n) tomogram, w_k(X, mu, nu) with \int w_k dX = 1.
///
/// For |nu| >= nu_eps:
///   w_k = N_n^2 pi |I|^2 / (2 pi |nu|),
///   I   = (1 - alpha^2)^{n/2} H_n(alpha beta / sqrt(1 - alpha^2)) exp(-X^2 / (4 nu^2 q)) / sqrt q,
/// with the Hermite-Gaussian integral supplying sqrt(pi) (1 - alpha^2)^{n/2} H_n(...).
/// For |nu| < nu_eps the delta-kernel limit |mu|^{-1} psi_n(X/mu)^2 is used.
template <typename Scalar>
Scalar hg_axis_tomogram(int order, Scalar sigma0, Scalar X, Scalar mu, Scalar nu) {
  using Complex = std::complex<Scalar>;
  if (mu == 0 && nu == 0) throw DegenerateQueryError("(mu, nu) = (0, 0)");
  const Scalar pi = std::numbers::pi_v<Scalar>;
  if (std::abs(nu) < Scalar(kNuEps)) {
    const Scalar psi = hg_axis_amplitude(order, sigma0, X / mu);
    return psi * psi / std::abs(mu);
  }
  const Complex q(Scalar(1) / (sigma0 * sigma0), -mu / (2 * nu));
  const Complex root = std::sqrt(q);
  const Complex alpha = std::numbers::sqrt2_v<Scalar> / (sigma0 * root);
  const Complex beta = Complex(0, -X) / (2 * nu * root);
  const Complex integral = hermite_gaussian_integral(order, alpha, beta);
  const Complex envelope = std::exp(-X * X / (4 * nu * nu * q)) / root;
  // N_n^2 for the 1D mode: sqrt(2 / (pi sigma0^2)) / (2^n n!).
  const Scalar log_norm2 = Scalar(0.5) * std::log(Scalar(2) / (pi * sigma0 * sigma0)) -
                           Scalar(order) * std::numbers::ln2_v<Scalar> - std::lgamma(Scalar(order + 1));
  return std::exp(log_norm2) * std::norm(integral * envelope) / (2 * pi * std::abs(nu));
}

/// Effective distance, width and confocal parameter of one tomogram axis:
///   z_k = 2 pi nu_k / (lambda mu_k),  sigma_k = sigma0 sqrt(1 + (z_k / z0)^2),
///   z0 = pi sigma0^2 / lambda.
/// rho = mu / nu is set when both axes share the same ratio.
template <typename Scalar = double>
struct PropagationGeometry {
  Eigen::Array<Scalar, 2, 1> sigma_of_z;
  Eigen::Array<Scalar, 2, 1> z;
  Scalar z0 = 0;
  std::optional<Scalar> rho;
};

template <typename Scalar>
PropagationGeometry<Scalar> propagation_geometry(const HGModeSpec<Scalar>& spec,
                                                 const TomogramQuery<Scalar>& query) {
  spec.validate();
  if (query.mu1 == 0 || query.mu2 == 0)
    throw DegenerateQueryError("propagation geometry needs mu_k != 0");
  PropagationGeometry<Scalar> g;
  const Scalar two_pi = 2 * std::numbers::pi_v<Scalar>;
  g.z0 = spec.confocal_parameter();
  g.z << two_pi * query.nu1 / (spec.lambda * query.mu1), two_pi * query.nu2 / (spec.lambda * query.mu2);
  g.sigma_of_z = spec.sigma0 * (1 + (g.z / g.z0).square()).sqrt();
  const Scalar ratio1 = query.mu1 / query.nu1;
  const Scalar ratio2 = query.mu2 / query.nu2;
  if (query.nu1 != 0 && query.nu2 != 0 &&
      std::abs(ratio1 - ratio2) <= Scalar(1e-12) * std::max(std::abs(ratio1), std::abs(ratio2)))
    g.rho = ratio1;
  return g;
}

/// HG tomogram in propagation form: the product over axes of
///   1/|mu_k| (sigma0 / sigma_k) N_n^2 H_n(sqrt2 X_k/(mu_k sigma_k))^2 exp(-2 X_k^2/(mu_k sigma_k)^2)
/// (with sigma0-normalized N_n), i.e. the HG intensity of width sigma_k(z_k)
/// in the plane rescaled by mu_k. Requires mu_k != 0.
template <typename Scalar>
Scalar symplectic_tomogram_hg_propagation_form(const HGModeSpec<Scalar>& spec,
                                               const TomogramQuery<Scalar>& query) {
  query.validate();
  const auto g = propagation_geometry(spec, query);
  const Scalar mu_sigma1 = std::abs(query.mu1) * g.sigma_of_z[0];
  const Scalar mu_sigma2 = std::abs(query.mu2) * g.sigma_of_z[1];
  const Scalar a1 = hg_axis_amplitude(spec.n, mu_sigma1, query.X1);
  const Scalar a2 = hg_axis_amplitude(spec.m, mu_sigma2, query.X2);
  return a1 * a1 * a2 * a2;
}

/// Closed-form symplectic tomogram of HG(n, m); order n on axis 1, m on axis 2.
template <typename Scalar>
Scalar symplectic_tomogram_hg(const HGModeSpec<Scalar>& spec, const TomogramQuery<Scalar>& query) {
  spec.validate();
  query.validate();
  return hg_axis_tomogram(spec.n, spec.sigma0, query.X1, query.mu1, query.nu1) *
         hg_axis_tomogram(spec.m, spec.sigma0, query.X2, query.mu2, query.nu2);
}

namespace detail {

// Eight-point Lagrange weights reproducing f(x) from samples on `grid`;
// zero outside the grid, exact at grid nodes.
template <typename Scalar>
Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1> interpolation_weights(
    const UniformGrid<Scalar>& grid, Scalar x) {
  using Vector = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;
  Vector w = Vector::Zero(grid.count);
  const Scalar s = (x - grid[0]) / grid.step;
  if (s < 0 || s > Scalar(grid.count - 1)) return w;
  const Index nearest = static_cast<Index>(std::llround(s));
  if (std::abs(s - Scalar(nearest)) < Scalar(1e-12)) {
    w[nearest] = 1;
    return w;
  }
  constexpr Index points = 8;
  Index first = static_cast<Index>(std::floor(s)) - points / 2 + 1;
  first = std::clamp<Index>(first, 0, std::max<Index>(0, grid.count - points));
  const Index last = std::min(grid.count - 1, first + points - 1);
  for (Index j = first; j <= last; ++j) {
    Scalar l = 1;
    for (Index k = first; k <= last; ++k)
      if (k != j) l *= (s - Scalar(k)) / Scalar(j - k);
    w[j] = l;
  }
  return w;
}

// Linear functional on the samples of one axis whose squared modulus times
// `prefactor` is the axis tomogram.
template <typename Scalar>
struct AxisFunctional {
  Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1> weights;
  Scalar prefactor = 1;
};

template <typename Scalar>
AxisFunctional<Scalar> axis_functional(const UniformGrid<Scalar>& grid, Scalar X, Scalar mu, Scalar nu,
                                       Index stride) {
  AxisFunctional<Scalar> f;
  if (std::abs(nu) < Scalar(kNuEps)) {
    f.weights = interpolation_weights(grid, X / mu);
    f.prefactor = Scalar(1) / std::abs(mu);
    return f;
  }
  const Scalar a = mu / nu;
  const Scalar b = -X / nu;
  f.weights.resize(grid.count);
  const Index last = grid.count - 1;
  for (Index j = 0; j <= last; ++j) {
    if (j % stride != 0) {
      f.weights[j] = 0;
      continue;
    }
    const Scalar x = grid[j];
    const Scalar end = (j == 0 || j == last) ? Scalar(0.5) : Scalar(1);
    f.weights[j] = end * grid.step * Scalar(stride) * std::polar(Scalar(1), a * x * x / 2 + b * x);
  }
  f.prefactor = Scalar(1) / (2 * std::numbers::pi_v<Scalar> * std::abs(nu));
  return f;
}

}  // namespace detail

/// Symplectic tomogram of a sampled field by direct trapezoid quadrature of
/// the defining Fresnel integral. The kernel is separable, so the 2D sum is
/// two contractions. Validated against the same sum on every second node;
/// a difference above 10 * abs_tol raises NonConvergenceError.
template <typename Scalar>
Scalar symplectic_tomogram_numeric(const SampledField<Scalar>& field, const TomogramQuery<Scalar>& query,
                                   const QuadratureSpec<Scalar>& spec = {}) {
  query.validate();
  spec.validate();
  auto evaluate = [&](Index stride) {
    const auto f1 = detail::axis_functional(field.axis1(), query.X1, query.mu1, query.nu1, stride);
    const auto f2 = detail::axis_functional(field.axis2(), query.X2, query.mu2, query.nu2, stride);
    const std::complex<Scalar> amplitude = f1.weights.transpose() * field.amplitudes() * f2.weights;
    return f1.prefactor * f2.prefactor * std::norm(amplitude);
  };
  const Scalar fine = evaluate(1);
  const Scalar coarse = evaluate(2);
  if (std::abs(fine - coarse) > Scalar(10) * spec.abs_tol)
    throw NonConvergenceError("symplectic tomogram quadrature not resolved on the field grid");
  return std::max(fine, Scalar(0));
}

/// Symplectic tomogram of a 1D sampled amplitude (one axis of the above).
template <typename Scalar, typename Derived>
Scalar line_tomogram_numeric(const Eigen::MatrixBase<Derived>& samples, const UniformGrid<Scalar>& grid,
                             Scalar X, Scalar mu, Scalar nu, const QuadratureSpec<Scalar>& spec = {}) {
  if (mu == 0 && nu == 0) throw DegenerateQueryError("(mu, nu) = (0, 0)");
  if (std::abs(nu) < Scalar(kNuEps)) {
    const auto w = detail::interpolation_weights(grid, X / mu);
    const std::complex<Scalar> value = w.dot(samples.derived().template cast<std::complex<Scalar>>());
    return std::norm(value) / std::abs(mu);
  }
  const auto integral = oscillatory_line_integral(samples, grid, mu / nu, -X / nu, spec);
  return std::norm(integral) / (2 * std::numbers::pi_v<Scalar> * std::abs(nu));
}

// Source dispatch: HG specs use the closed form, sampled fields quadrature.

template <typename Scalar>
Scalar symplectic_tomogram(const HGModeSpec<Scalar>& spec, const TomogramQuery<Scalar>& query,
                           const QuadratureSpec<Scalar>& = {}) {
  return symplectic_tomogram_hg(spec, query);
}

template <typename Scalar>
Scalar symplectic_tomogram(const SampledField<Scalar>& field, const TomogramQuery<Scalar>& query,
                           const QuadratureSpec<Scalar>& quadrature = {}) {
  return symplectic_tomogram_numeric(field, query, quadrature);
}

/// w_opt(X1, theta1, X2, theta2) = w(X1, cos theta1, sin theta1, X2, cos theta2, sin theta2),
/// with angles first reduced into [0, pi).
template <typename Source, typename Scalar>
Scalar optical_tomogram(const Source& source, Scalar X1, const OpticalAngles<Scalar>& angles, Scalar X2,
                        const QuadratureSpec<Scalar>& quadrature = {}) {
  const auto [t1, s1] = canonical_angle(angles.theta1);
  const auto [t2, s2] = canonical_angle(angles.theta2);
  const TomogramQuery<Scalar> query{s1 * X1, std::cos(t1), std::sin(t1), s2 * X2, std::cos(t2), std::sin(t2)};
  return symplectic_tomogram(source, query, quadrature);
}

/// w_F(X1, nu1, X2, nu2) = w(X1, 1, nu1, X2, 1, nu2); nu_k = 0 is rejected.
template <typename Source, typename Scalar>
Scalar fresnel_tomogram(const Source& source, Scalar X1, Scalar nu1, Scalar X2, Scalar nu2,
                        const QuadratureSpec<Scalar>& quadrature = {}) {
  if (nu1 == 0 || nu2 == 0) throw DegenerateQueryError("Fresnel tomogram needs nu1, nu2 != 0");
  return symplectic_tomogram(source, TomogramQuery<Scalar>{X1, 1, nu1, X2, 1, nu2}, quadrature);
}

/// Symplectic tomogram rebuilt from the optical one (mu_k > 0):
///   w = ((mu1^2 + nu1^2)(mu2^2 + nu2^2))^{-1/2}
///       w_opt(X1 / r1, atan(nu1/mu1), X2 / r2, atan(nu2/mu2)),  r_k = sqrt(mu_k^2 + nu_k^2).
template <typename Source, typename Scalar>
Scalar symplectic_from_optical(const Source& source, const TomogramQuery<Scalar>& query,
                               const QuadratureSpec<Scalar>& quadrature = {}) {
  query.validate();
  if (!(query.mu1 > 0) || !(query.mu2 > 0))
    throw ValidationError("optical conversion is stated for mu_k > 0");
  const Scalar r1 = std::hypot(query.mu1, query.nu1);
  const Scalar r2 = std::hypot(query.mu2, query.nu2);
  const OpticalAngles<Scalar> angles{std::atan(query.nu1 / query.mu1), std::atan(query.nu2 / query.mu2)};
  return optical_tomogram(source, query.X1 / r1, angles, query.X2 / r2, quadrature) / (r1 * r2);
}

/// Symplectic tomogram rebuilt from the Fresnel one (mu_k != 0):
///   w = |mu1 mu2|^{-1} w_F(X1/mu1, nu1/mu1, X2/mu2, nu2/mu2).
template <typename Source, typename Scalar>
Scalar symplectic_from_fresnel(const Source& source, const TomogramQuery<Scalar>& query,
                               const QuadratureSpec<Scalar>& quadrature = {}) {
  query.validate();
  if (query.mu1 == 0 || query.mu2 == 0) throw ValidationError("Fresnel conversion needs mu_k != 0");
  return fresnel_tomogram(source, query.X1 / query.mu1, query.nu1 / query.mu1, query.X2 / query.mu2,
                          query.nu2 / query.mu2, quadrature) /
         std::abs(query.mu1 * query.mu2);
}

/// Both sides of the homogeneity law
///   w(l1 X1, l1 mu1, l1 nu1, l2 X2, l2 mu2, l2 nu2) = w(X1, ...) / |l1 l2|.
template <typename Source, typename Scalar>
std::pair<Scalar, Scalar> homogeneity_check(const TomogramQuery<Scalar>& query, Scalar lambda1,
                                            Scalar lambda2, const Source& source,
                                            const QuadratureSpec<Scalar>& quadrature = {}) {
  if (lambda1 == 0 || lambda2 == 0) throw ValidationError("homogeneity scale factors must be nonzero");
  const Scalar lhs = symplectic_tomogram(source, query.scaled(lambda1, lambda2), quadrature);
  const Scalar rhs = symplectic_tomogram(source, query, quadrature) / std::abs(lambda1 * lambda2);
  return {lhs, rhs};
}

// ---------------------------------------------------------------------------
// Whole-plane tomogram profiles

/// Tomogram values on a rectangular (X1, X2) grid for one (mu, nu) setting.
template <typename Scalar = double>
struct TomogramProfile {
  UniformGrid<Scalar> X1, X2;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> values;

  Scalar total() const { return values.sum() * X1.step * X2.step; }
};

/// Standard deviation scale of the HG(n) axis tomogram at (mu, nu):
/// the waist sqrt(mu^2 sigma0^2 + 4 nu^2 / sigma0^2) of the equivalent HG intensity.
template <typename Scalar>
Scalar hg_tomogram_waist(Scalar sigma0, Scalar mu, Scalar nu) {
  return std::sqrt(mu * mu * sigma0 * sigma0 + 4 * nu * nu / (sigma0 * sigma0));
}

/// Half-width of the X box holding the HG(n) axis tomogram.
template <typename Scalar>
Scalar hg_tomogram_box(int order, Scalar sigma0, Scalar mu, Scalar nu) {
  return hg_tomogram_waist(sigma0, mu, nu) * (std::sqrt(Scalar(2 * order + 1) / 2) + Scalar(4));
}

/// Closed-form HG profile on symmetric X grids of `nodes` points spanning
/// `inflation` times the tomogram box on each axis.
template <typename Scalar>
TomogramProfile<Scalar> tomogram_profile(const HGModeSpec<Scalar>& spec, Scalar mu1, Scalar nu1, Scalar mu2,
                                         Scalar nu2, Index nodes, Scalar inflation = Scalar(1.5)) {
  spec.validate();
  TomogramQuery<Scalar>{0, mu1, nu1, 0, mu2, nu2}.validate();
  TomogramProfile<Scalar> p;
  p.X1 = UniformGrid<Scalar>::spanning(inflation * hg_tomogram_box(spec.n, spec.sigma0, mu1, nu1), nodes);
  p.X2 = UniformGrid<Scalar>::spanning(inflation * hg_tomogram_box(spec.m, spec.sigma0, mu2, nu2), nodes);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> w1(nodes), w2(nodes);
  for (Index i = 0; i < nodes; ++i) w1[i] = hg_axis_tomogram(spec.n, spec.sigma0, p.X1[i], mu1, nu1);
  for (Index j = 0; j < nodes; ++j) w2[j] = hg_axis_tomogram(spec.m, spec.sigma0, p.X2[j], mu2, nu2);
  p.values = w1 * w2.transpose();
  return p;
}

namespace detail {

struct ShearedAxis {
  // X grid in storage order; X_j = scale * (grid offset), so scale < 0 runs backwards.
  double scale = 1;
  double center = 0;
  double step = 1;
};

// Replaces the samples along `axis` by the axis-tomogram amplitude. The
// returned axis maps storage index to X; the density prefactor is 1/|scale|.
//
// |nu| <= |mu|: free evolution for time t = nu/mu in the spectral domain;
//               X = mu x, density |mu|^{-1} |psi_t(X/mu)|^2.
// |nu| >  |mu|: multiply by exp(i (mu/nu) x^2 / 2) and Fourier transform;
//               X = nu p, density |nu|^{-1} |phi(X/nu)|^2.
// Either way the chirp rate is at most 1, so it stays resolvable.
template <typename Scalar, typename Matrix>
ShearedAxis shear_axis(Matrix& a, const UniformGrid<Scalar>& grid, Axis axis,
                                                  Scalar mu, Scalar nu) {
  const Scalar pi = std::numbers::pi_v<Scalar>;
  CenteredDft<Scalar> dft(grid);
  const auto& momentum = dft.momentum_grid();
  auto marginal_along = [&](const Matrix& m) {
    const auto power = m.cwiseAbs2();
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out =
        axis == Axis::first ? Eigen::Matrix<Scalar, Eigen::Dynamic, 1>(power.rowwise().sum())
                            : Eigen::Matrix<Scalar, Eigen::Dynamic, 1>(power.colwise().sum().transpose());
    return out;
  };

  if (std::abs(nu) <= std::abs(mu)) {
    const Scalar t = nu / mu;
    if (t != 0) {
      for_each_line(a, axis, [&](auto& line) { dft.forward(line); });
      const Scalar band = support_radius(marginal_along(a), momentum);
      if (std::abs(t) * band * momentum.step > pi)
        throw AliasingError("tomogram shear exceeds the grid Nyquist limit");
      for_each_line(a, axis, [&](auto& line) {
        for (Index k = 0; k < grid.count; ++k)
          line[k] *= std::polar(Scalar(1), -t * momentum[k] * momentum[k] / 2);
        dft.inverse(line);
      });
    }
    return {double(mu), double(mu * grid.center), double(grid.step)};
  }
  const Scalar s = mu / nu;
  const Scalar reach = support_radius(marginal_along(a), grid);
  if (std::abs(s) * reach * grid.step > pi)
    throw AliasingError("tomogram chirp exceeds the grid Nyquist limit");
  for_each_line(a, axis, [&](auto& line) {
    for (Index j = 0; j < grid.count; ++j) line[j] *= std::polar(Scalar(1), s * grid[j] * grid[j] / 2);
    dft.forward(line);
  });
  return {double(nu), 0.0, double(momentum.step)};
}

}  // namespace detail

namespace detail {

// Field amplitudes after the per-axis shear, with the axis maps; |a|^2 over
// |scale1 scale2| is the tomogram, in storage order.
template <typename Scalar>
struct ShearedField {
  typename SampledField<Scalar>::Amplitudes amplitudes;
  ShearedAxis axis1, axis2;
};

template <typename Scalar>
ShearedField<Scalar> shear_field(const SampledField<Scalar>& field, Scalar mu1, Scalar nu1, Scalar mu2, Scalar nu2) {
  TomogramQuery<Scalar>{0, mu1, nu1, 0, mu2, nu2}.validate();
  ShearedField<Scalar> out{field.amplitudes(), {}, {}};
  out.axis1 = shear_axis(out.amplitudes, field.axis1(), Axis::first, mu1, nu1);
  out.axis2 = shear_axis(out.amplitudes, field.axis2(), Axis::second, mu2, nu2);
  return out;
}

}  // namespace detail

/// Profile of a sampled field at (mu1, nu1, mu2, nu2) for all X at once.
/// The X grids are fixed by the field grid: X_k = mu_k x or nu_k p.
template <typename Scalar>
TomogramProfile<Scalar> tomogram_profile(const SampledField<Scalar>& field, Scalar mu1, Scalar nu1, Scalar mu2,
                                         Scalar nu2) {
  const auto sheared = detail::shear_field(field, mu1, nu1, mu2, nu2);
  const auto& s1 = sheared.axis1;
  const auto& s2 = sheared.axis2;
  TomogramProfile<Scalar> p;
  p.X1 = {Scalar(s1.center), std::abs(Scalar(s1.scale)) * Scalar(s1.step), field.axis1().count};
  p.X2 = {Scalar(s2.center), std::abs(Scalar(s2.scale)) * Scalar(s2.step), field.axis2().count};
  p.values = sheared.amplitudes.cwiseAbs2() / std::abs(Scalar(s1.scale * s2.scale));
  // Store X ascending.
  if (s1.scale < 0) p.values = p.values.colwise().reverse().eval();
  if (s2.scale < 0) p.values = p.values.rowwise().reverse().eval();
  return p;
}

// ---------------------------------------------------------------------------
// 1D inversion

template <typename Scalar = double>
struct InversionSpec {
  Scalar mu_max = 30;
  Index mu_nodes = 256;
  // Inner X integral runs over |X| <= x_box * sqrt(mu^2 + nu^2).
  Scalar x_box = 12;
  Index x_nodes = 257;
  Scalar tail_tol = Scalar(1e-9);

  /// mu_max = 30 / sigma0 for Gaussian-envelope modes of waist sigma0.
  static InversionSpec for_waist(Scalar sigma0) {
    InversionSpec s;
    s.mu_max = Scalar(30) / sigma0;
    s.x_box = Scalar(6) * (sigma0 / 2 + Scalar(1) / sigma0) + Scalar(6);
    return s;
  }
};

/// Two-point correlation psi(x) psi*(x') of a pure 1D mode from its tomogram:
///   psi(x) psi*(x') = (2 pi)^{-1} \int\int w(X, mu, x - x') exp(i (X - mu (x + x')/2)) dX dmu.
///
/// The inner X integral is taken in the homogeneity-rescaled variable
/// u = X / sqrt(mu^2 + nu^2), where the tomogram keeps an O(1) width for
/// every (mu, nu). `sampler(X, mu, nu)` returns the 1D tomogram.
template <typename Scalar, typename Sampler>
std::complex<Scalar> reconstruct_correlation_1d(Sampler&& sampler, Scalar x, Scalar xprime,
                                                const InversionSpec<Scalar>& spec) {
  using Complex = std::complex<Scalar>;
  if (!(spec.mu_max > 0) || spec.mu_nodes < 2 || spec.x_nodes < 2 || !(spec.x_box > 0))
    throw ValidationError("invalid inversion spec");
  const Scalar nu = x - xprime;
  const Scalar centre = (x + xprime) / 2;
  const auto u_grid = UniformGrid<Scalar>::spanning(spec.x_box, spec.x_nodes);

  auto characteristic = [&](Scalar mu) {
    const Scalar r = std::hypot(mu, nu);
    if (r == 0) return Complex(1);
    Complex sum(0);
    for (Index j = 0; j < u_grid.count; ++j) {
      const Scalar u = u_grid[j];
      const Scalar end = (j == 0 || j == u_grid.count - 1) ? Scalar(0.5) : Scalar(1);
      sum += end * sampler(r * u, mu, nu) * r * std::polar(Scalar(1), r * u);
    }
    return sum * u_grid.step;
  };

  // Even node count keeps mu = 0 off the grid.
  const Index mu_nodes = spec.mu_nodes + (spec.mu_nodes % 2);
  const auto mu_grid = UniformGrid<Scalar>::spanning(spec.mu_max, mu_nodes);
  Complex total(0);
  Scalar tail = 0;
  for (Index k = 0; k < mu_grid.count; ++k) {
    const Scalar mu = mu_grid[k];
    const Complex c = characteristic(mu);
    if (k == 0 || k == mu_grid.count - 1) tail = std::max(tail, std::abs(c));
    const Scalar end = (k == 0 || k == mu_grid.count - 1) ? Scalar(0.5) : Scalar(1);
    total += end * c * std::polar(Scalar(1), -mu * centre);
  }
  if (tail > spec.tail_tol) throw NonConvergenceError("tomogram characteristic not decayed at mu_max");
  return total * mu_grid.step / (2 * std::numbers::pi_v<Scalar>);
}

}  // namespace beamtomo
