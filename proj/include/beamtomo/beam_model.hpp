#pragma once

// Two-dimensional paraxial beam modes: analytic Hermite-Gauss specs and
// complex fields sampled on rectangular grids, with the (2 pi)^{-1}
// Fourier transform and free-space Fresnel propagation.
//
// Transverse coordinates and momenta are in reduced units: tomogram
// formulas carry no reduced wavelength. The wavelength only enters through
// propagation distances, z * lambda / (2 pi) being the free-evolution time.

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <utility>
#include <vector>

#include "beamtomo/numerics.hpp"

namespace beamtomo {

template <typename Scalar = double>
struct HGModeSpec {
  int n = 0;
  int m = 0;
  Scalar sigma0 = 1;
  Scalar lambda = 2 * std::numbers::pi_v<Scalar>;

  void validate() const {
    if (n < 0 || m < 0) throw ValidationError("HG mode orders must be nonnegative");
    if (!(sigma0 > 0) || !std::isfinite(sigma0)) throw ValidationError("sigma0 must be positive");
    if (!(lambda > 0) || !std::isfinite(lambda)) throw ValidationError("lambda must be positive");
  }

  int max_order() const { return std::max(n, m); }

  /// N_nm = sqrt(2 / (pi sigma0^2 n! m! 2^{n+m})).
  Scalar normalization() const {
    const Scalar log_n2 = std::log(Scalar(2) / (std::numbers::pi_v<Scalar> * sigma0 * sigma0)) -
                          std::lgamma(Scalar(n + 1)) - std::lgamma(Scalar(m + 1)) -
                          Scalar(n + m) * std::numbers::ln2_v<Scalar>;
    return std::exp(log_n2 / Scalar(2));
  }

  /// Rayleigh range z0 = pi sigma0^2 / lambda.
  Scalar confocal_parameter() const { return std::numbers::pi_v<Scalar> * sigma0 * sigma0 / lambda; }
};

/// Normalized 1D Hermite-Gauss amplitude of the given order and waist:
///   (2 / (pi sigma0^2))^{1/4} / sqrt(2^n n!) H_n(sqrt2 x / sigma0) exp(-x^2 / sigma0^2).
/// Uses the orthonormal Hermite-function recurrence, so large orders do not overflow.
template <typename Scalar>
Scalar hg_axis_amplitude(int order, Scalar sigma0, Scalar x) {
  if (order < 0) throw ValidationError("HG order must be nonnegative");
  const Scalar t = std::numbers::sqrt2_v<Scalar> * x / sigma0;
  Scalar previous = 0;
  Scalar current = std::pow(std::numbers::pi_v<Scalar>, Scalar(-0.25)) * std::exp(-t * t / 2);
  for (int k = 0; k < order; ++k) {
    const Scalar next = std::sqrt(Scalar(2) / Scalar(k + 1)) * t * current -
                        std::sqrt(Scalar(k) / Scalar(k + 1)) * previous;
    previous = current;
    current = next;
  }
  return std::sqrt(std::numbers::sqrt2_v<Scalar> / sigma0) * current;
}

template <typename Scalar>
std::complex<Scalar> hg_amplitude(const HGModeSpec<Scalar>& spec, Scalar x1, Scalar x2) {
  return {hg_axis_amplitude(spec.n, spec.sigma0, x1) * hg_axis_amplitude(spec.m, spec.sigma0, x2),
          Scalar(0)};
}

struct position_domain {};
struct momentum_domain {};

/// Complex amplitudes on a rectangular grid; rows follow axis 1, columns axis 2.
/// Immutable once built. `norm()` is the cached discrete L2 norm
/// sqrt(sum |psi|^2 dx1 dx2).
template <typename Scalar, typename Domain>
class GridField {
 public:
  using Complex = std::complex<Scalar>;
  using Amplitudes = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic>;
  using Grid = UniformGrid<Scalar>;

  GridField(Grid axis1, Grid axis2, Amplitudes amplitudes)
      : axis1_(axis1), axis2_(axis2), amplitudes_(std::move(amplitudes)) {
    axis1_.validate();
    axis2_.validate();
    if (amplitudes_.rows() != axis1_.count || amplitudes_.cols() != axis2_.count)
      throw ValidationError("amplitude matrix shape does not match the grids");
    norm_ = std::sqrt(amplitudes_.squaredNorm() * axis1_.step * axis2_.step);
  }

  const Grid& axis1() const { return axis1_; }
  const Grid& axis2() const { return axis2_; }
  const Amplitudes& amplitudes() const { return amplitudes_; }
  Scalar norm() const { return norm_; }
  Scalar cell_area() const { return axis1_.step * axis2_.step; }

  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> intensity() const {
    return amplitudes_.cwiseAbs2();
  }

  GridField normalized() const {
    if (!(norm_ > 0)) throw ValidationError("cannot normalize a zero field");
    return GridField(axis1_, axis2_, amplitudes_ / norm_);
  }

  bool is_normalized(Scalar tol = Scalar(1e-6)) const { return std::abs(norm_ - 1) <= tol; }

 private:
  Grid axis1_;
  Grid axis2_;
  Amplitudes amplitudes_;
  Scalar norm_ = 0;
};

/// psi(x1, x2) sampled in the transverse plane.
template <typename Scalar = double>
using SampledField = GridField<Scalar, position_domain>;

/// psi~(p1, p2) sampled on the conjugate momentum grid.
template <typename Scalar = double>
using SpectralField = GridField<Scalar, momentum_domain>;

/// Half-width a grid must reach to hold HG(n, m): turning point plus Gaussian tail.
template <typename Scalar>
Scalar required_half_span(const HGModeSpec<Scalar>& spec) {
  return spec.sigma0 * (std::sqrt(Scalar(2 * spec.max_order() + 1)) + Scalar(4));
}

/// 512 points per axis over +-sigma0 (sqrt(2 max(n,m) + 1) + 8).
template <typename Scalar>
UniformGrid<Scalar> default_grid(const HGModeSpec<Scalar>& spec, Index count = 512) {
  spec.validate();
  const Scalar half = spec.sigma0 * (std::sqrt(Scalar(2 * spec.max_order() + 1)) + Scalar(8));
  return UniformGrid<Scalar>::spanning(half, count);
}

/// Grid wide enough in both position and momentum for every tomogram of the
/// mode with |mu/nu| <= 1 or |nu/mu| <= 1, i.e. for the sheared field used in
/// tomogram_profile. Both the spatial extent and the Nyquist band cover the
/// widest sheared waist sqrt(sigma0^2 + 4 / sigma0^2). Count is a power of two.
template <typename Scalar>
UniformGrid<Scalar> phase_space_grid(const HGModeSpec<Scalar>& spec, Index min_count = 256) {
  spec.validate();
  const Scalar widest = std::sqrt(spec.sigma0 * spec.sigma0 + Scalar(4) / (spec.sigma0 * spec.sigma0));
  const Scalar radius =
      widest * (std::sqrt(Scalar(2 * spec.max_order() + 1) / Scalar(2)) + Scalar(5.5));
  const Scalar needed = Scalar(2) * radius * radius / std::numbers::pi_v<Scalar> + 1;
  Index count = 2;
  while (Scalar(count) < needed || count < min_count) count *= 2;
  return UniformGrid<Scalar>::spanning(radius, count);
}

template <typename Scalar, typename F>
SampledField<Scalar> sample_function(F&& f, const UniformGrid<Scalar>& axis1,
                                     const UniformGrid<Scalar>& axis2) {
  axis1.validate();
  axis2.validate();
  typename SampledField<Scalar>::Amplitudes a(axis1.count, axis2.count);
  for (Index j = 0; j < axis2.count; ++j)
    for (Index i = 0; i < axis1.count; ++i) a(i, j) = std::complex<Scalar>(f(axis1[i], axis2[j]));
  return SampledField<Scalar>(axis1, axis2, std::move(a));
}

/// Samples HG(n, m) on the product grid. Rejects grids that do not reach
/// +-sigma0 (sqrt(2 max(n, m) + 1) + 4) on both axes.
template <typename Scalar>
SampledField<Scalar> sample(const HGModeSpec<Scalar>& spec, const UniformGrid<Scalar>& axis1,
                            const UniformGrid<Scalar>& axis2) {
  spec.validate();
  const Scalar bound = required_half_span(spec);
  for (const auto* g : {&axis1, &axis2}) {
    g->validate();
    if (g->lower() > -bound || g->upper() < bound)
      throw GridTooSmallError("grid does not cover +-" + std::to_string(bound) +
                              " required by the mode");
  }
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> f1(axis1.count), f2(axis2.count);
  for (Index i = 0; i < axis1.count; ++i) f1[i] = hg_axis_amplitude(spec.n, spec.sigma0, axis1[i]);
  for (Index j = 0; j < axis2.count; ++j) f2[j] = hg_axis_amplitude(spec.m, spec.sigma0, axis2[j]);
  typename SampledField<Scalar>::Amplitudes a = (f1 * f2.transpose()).template cast<std::complex<Scalar>>();
  return SampledField<Scalar>(axis1, axis2, std::move(a));
}

template <typename Scalar>
SampledField<Scalar> sample(const HGModeSpec<Scalar>& spec, const UniformGrid<Scalar>& grid) {
  return sample(spec, grid, grid);
}

namespace detail {

// Exact DFT between a symmetric position grid and its conjugate momentum grid,
// continuous-transform scaled:
//   forward: out(p_k) = (2 pi)^{-1/2} sum_j in(x_j) exp(-i p_k x_j) dx
//   inverse: out(x_j) = (2 pi)^{-1/2} sum_k in(p_k) exp(+i p_k x_j) dp
// The grid offsets are absorbed in pre/post phase ramps around a plain FFT.
template <typename Scalar>
class CenteredDft {
 public:
  using Complex = std::complex<Scalar>;

  explicit CenteredDft(const UniformGrid<Scalar>& position)
      : position_(position), momentum_(position.conjugate()) {
    fft_.SetFlag(Eigen::FFT<Scalar>::Unscaled);
    const Index n = position.count;
    const Scalar pi = std::numbers::pi_v<Scalar>;
    const Scalar s = Scalar(n - 1) / Scalar(2);
    ramp_.resize(n);
    post_.resize(n);
    // 2 pi s^2 / N reduced mod 2 pi before use.
    const Scalar global = std::fmod(Scalar(2) * pi * s * s / Scalar(n), Scalar(2) * pi);
    for (Index j = 0; j < n; ++j) {
      const Scalar r = std::fmod(Scalar(2) * pi * s * Scalar(j) / Scalar(n), Scalar(2) * pi);
      ramp_[j] = std::polar(Scalar(1), r);
      post_[j] = std::polar(Scalar(1), r - global - momentum_[j] * position.center);
    }
    forward_scale_ = position.step / std::sqrt(Scalar(2) * pi);
    inverse_scale_ = momentum_.step / std::sqrt(Scalar(2) * pi);
  }

  const UniformGrid<Scalar>& momentum_grid() const { return momentum_; }

  void forward(std::vector<Complex>& data) {
    const Index n = position_.count;
    for (Index j = 0; j < n; ++j) buffer_in(j, data[j] * ramp_[j]);
    fft_.fwd(out_, in_);
    for (Index k = 0; k < n; ++k) data[k] = out_[k] * post_[k] * forward_scale_;
  }

  void inverse(std::vector<Complex>& data) {
    const Index n = position_.count;
    for (Index k = 0; k < n; ++k) buffer_in(k, data[k] * std::conj(post_[k]));
    fft_.inv(out_, in_);
    for (Index j = 0; j < n; ++j) data[j] = out_[j] * std::conj(ramp_[j]) * inverse_scale_;
  }

 private:
  void buffer_in(Index j, Complex v) {
    if (in_.size() != static_cast<std::size_t>(position_.count)) in_.resize(position_.count);
    in_[j] = v;
  }

  UniformGrid<Scalar> position_;
  UniformGrid<Scalar> momentum_;
  Eigen::FFT<Scalar> fft_;
  std::vector<Complex> ramp_, post_, in_, out_;
  Scalar forward_scale_ = 1, inverse_scale_ = 1;
};

enum class Axis { first, second };

// Applies `op(std::vector<Complex>&)` to every line of `a` along `axis`.
template <typename Matrix, typename Op>
void for_each_line(Matrix& a, Axis axis, Op&& op) {
  using Complex = typename Matrix::Scalar;
  if (axis == Axis::first) {
    std::vector<Complex> line(a.rows());
    for (Index j = 0; j < a.cols(); ++j) {
      for (Index i = 0; i < a.rows(); ++i) line[i] = a(i, j);
      op(line);
      for (Index i = 0; i < a.rows(); ++i) a(i, j) = line[i];
    }
  } else {
    std::vector<Complex> line(a.cols());
    for (Index i = 0; i < a.rows(); ++i) {
      for (Index j = 0; j < a.cols(); ++j) line[j] = a(i, j);
      op(line);
      for (Index j = 0; j < a.cols(); ++j) a(i, j) = line[j];
    }
  }
}

// Largest |coordinate| at which the marginal power still exceeds
// rel_cutoff * peak. Used to judge whether a chirp is resolved where the
// field actually lives.
template <typename Scalar, typename Derived>
Scalar support_radius(const Eigen::MatrixBase<Derived>& marginal, const UniformGrid<Scalar>& grid,
                      Scalar rel_cutoff = Scalar(1e-15)) {
  const Scalar peak = marginal.maxCoeff();
  Scalar radius = 0;
  for (Index j = 0; j < grid.count; ++j)
    if (marginal[j] > rel_cutoff * peak) radius = std::max(radius, std::abs(grid[j]));
  return radius;
}

}  // namespace detail

/// Two-dimensional transform psi~(p) = (2 pi)^{-1} \int psi(x) exp(-i p.x) d^2x,
/// evaluated exactly as a DFT onto the conjugate momentum grid.
template <typename Scalar>
SpectralField<Scalar> fourier_transform(const SampledField<Scalar>& field) {
  auto a = field.amplitudes();
  detail::CenteredDft<Scalar> dft1(field.axis1()), dft2(field.axis2());
  detail::for_each_line(a, detail::Axis::first, [&](auto& line) { dft1.forward(line); });
  detail::for_each_line(a, detail::Axis::second, [&](auto& line) { dft2.forward(line); });
  return SpectralField<Scalar>(dft1.momentum_grid(), dft2.momentum_grid(), std::move(a));
}

/// Inverse of fourier_transform onto the position grids centred at (center1, center2).
template <typename Scalar>
SampledField<Scalar> inverse_fourier_transform(const SpectralField<Scalar>& spectrum,
                                               Scalar center1 = 0, Scalar center2 = 0) {
  const Scalar two_pi = 2 * std::numbers::pi_v<Scalar>;
  auto position_of = [two_pi](const UniformGrid<Scalar>& p, Scalar c) {
    return UniformGrid<Scalar>{c, two_pi / (Scalar(p.count) * p.step), p.count};
  };
  const auto x1 = position_of(spectrum.axis1(), center1);
  const auto x2 = position_of(spectrum.axis2(), center2);
  auto a = spectrum.amplitudes();
  detail::CenteredDft<Scalar> dft1(x1), dft2(x2);
  detail::for_each_line(a, detail::Axis::first, [&](auto& line) { dft1.inverse(line); });
  detail::for_each_line(a, detail::Axis::second, [&](auto& line) { dft2.inverse(line); });
  return SampledField<Scalar>(x1, x2, std::move(a));
}

/// Free-space paraxial propagation over distance z: multiplies the spectrum
/// by exp(-i z lambda_bar (p1^2 + p2^2) / 2), lambda_bar = lambda / (2 pi).
/// Throws AliasingError when the transfer chirp, over the band where the
/// spectrum carries power, steps by more than pi between momentum samples.
template <typename Scalar>
SampledField<Scalar> free_space_propagate(const SampledField<Scalar>& field, Scalar z,
                                          Scalar lambda) {
  if (!(z >= 0) || !std::isfinite(z)) throw ValidationError("propagation distance must be >= 0");
  if (!(lambda > 0)) throw ValidationError("lambda must be positive");
  if (z == 0) return field;
  const Scalar shear = z * lambda / (2 * std::numbers::pi_v<Scalar>);

  auto spectrum = fourier_transform(field);
  const auto power = spectrum.intensity();
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> marginal1 = power.rowwise().sum();
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> marginal2 = power.colwise().sum().transpose();
  const Scalar band1 = detail::support_radius(marginal1, spectrum.axis1());
  const Scalar band2 = detail::support_radius(marginal2, spectrum.axis2());
  if (shear * band1 * spectrum.axis1().step > std::numbers::pi_v<Scalar> ||
      shear * band2 * spectrum.axis2().step > std::numbers::pi_v<Scalar>)
    throw AliasingError("propagation chirp exceeds the grid Nyquist limit");

  auto a = spectrum.amplitudes();
  for (Index j = 0; j < a.cols(); ++j) {
    const Scalar p2 = spectrum.axis2()[j];
    for (Index i = 0; i < a.rows(); ++i) {
      const Scalar p1 = spectrum.axis1()[i];
      a(i, j) *= std::polar(Scalar(1), -shear * (p1 * p1 + p2 * p2) / 2);
    }
  }
  return inverse_fourier_transform(SpectralField<Scalar>(spectrum.axis1(), spectrum.axis2(), std::move(a)),
                                   field.axis1().center, field.axis2().center);
}

/// Per-axis RMS width sqrt(<x^2> - <x>^2) of the intensity.
template <typename Scalar, typename Domain>
Eigen::Array<Scalar, 2, 1> rms_width(const GridField<Scalar, Domain>& field) {
  const auto power = field.intensity();
  const Scalar total = power.sum();
  const auto x1 = field.axis1().nodes();
  const auto x2 = field.axis2().nodes();
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> m1 = power.rowwise().sum() / total;
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> m2 = power.colwise().sum().transpose() / total;
  auto width = [](const auto& marginal, const auto& x) {
    const Scalar mean = marginal.dot(x);
    const Scalar second = marginal.dot(x.cwiseProduct(x));
    return std::sqrt(std::max(Scalar(0), second - mean * mean));
  };
  return {width(m1, x1), width(m2, x2)};
}

/// Discrete inner product <a, b> = sum conj(a) b dx1 dx2 on a shared grid.
template <typename Scalar>
std::complex<Scalar> overlap(const SampledField<Scalar>& a, const SampledField<Scalar>& b) {
  if (!(a.axis1() == b.axis1()) || !(a.axis2() == b.axis2()))
    throw ValidationError("overlap requires fields on the same grid");
  return (a.amplitudes().conjugate().cwiseProduct(b.amplitudes())).sum() * a.cell_area();
}

}  // namespace beamtomo
