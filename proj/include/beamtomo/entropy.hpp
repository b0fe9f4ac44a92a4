#pragma once

// Tomographic Shannon entropies (nats), the position-momentum entropic
// bound and the uncertainty surface
//
//   R(theta1, theta2) = H_opt(theta1, theta2) + H_opt(theta1 + pi/2, theta2 + pi/2) - 2 ln(pi e),
//
// which is nonnegative for every pure beam mode.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <string>
#include <exception>
#include <numbers>
#include <optional>
#include <thread>
#include <type_traits>
#include <utility>
#include <vector>

#include "beamtomo/tomography.hpp"

namespace beamtomo {

inline constexpr double kEntropyTolerance = 1e-4;
inline constexpr double kDensityFloor = 1e-300;
inline constexpr double kRTolerance = 1e-4;
// Node doubling keeps going until successive values agree this well.
inline constexpr double kEntropyTarget = 1e-8;
inline constexpr Index kMaxEntropyNodes = 1 << 16;
// Sampled-field profiles are Fourier-interpolated up to this many points per axis.
inline constexpr Index kProfileUpsampleCount = 4096;

template <typename Scalar = double>
struct EntropyValue {
  Scalar value = 0;
  Scalar estimated_error = 0;
};

/// 2 ln(pi e): the two-dimensional entropic bound.
template <typename Scalar = double>
Scalar entropic_bound() {
  return 2 * (std::log(std::numbers::pi_v<Scalar>) + 1);
}

/// Quadrature settings for entropy integrals. Entropies of HG sources start
/// at `nodes_per_axis` per axis and double until the value settles.
template <typename Scalar = double>
QuadratureSpec<Scalar> entropy_quadrature() {
  return {Scalar(12), 256, Scalar(1e-9)};
}

namespace detail {

// -sum w ln w dA over a density grid, with 0 ln 0 = 0 below the floor;
// `stride` 2 gives the coarse companion sum.
template <typename Scalar, typename Derived>
Scalar grid_entropy(const Eigen::MatrixBase<Derived>& w, Scalar cell_area, Index stride = 1) {
  Scalar sum = 0;
  for (Index j = 0; j < w.cols(); j += stride)
    for (Index i = 0; i < w.rows(); i += stride) {
      const Scalar v = w(i, j);
      if (v > Scalar(kDensityFloor)) sum -= v * std::log(v);
    }
  return sum * cell_area * Scalar(stride * stride);
}

// -sum w ln w dX over one axis and the matching mass sum w dX.
template <typename Scalar>
std::pair<Scalar, Scalar> line_entropy_and_mass(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& w, Scalar step) {
  Scalar entropy = 0, mass = 0;
  for (Index i = 0; i < w.size(); ++i) {
    mass += w[i];
    if (w[i] > Scalar(kDensityFloor)) entropy -= w[i] * std::log(w[i]);
  }
  return {entropy * step, mass * step};
}

// Same as grid_entropy for the outer product w1 w2^T, in O(N):
// the double sum splits into H1 M2 + H2 M1 with M the discrete masses.
template <typename Scalar>
Scalar product_entropy(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& w1, Scalar step1,
                       const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& w2, Scalar step2) {
  const auto [h1, m1] = line_entropy_and_mass(w1, step1);
  const auto [h2, m2] = line_entropy_and_mass(w2, step2);
  return h1 * m2 + h2 * m1;
}

// Node doubling for trapezoid entropies. At zeros of an excited-mode tomogram
// w ln w has a log kink, so the sums converge only like h^3; doubling goes on
// to kEntropyTarget while affordable and fails only above kEntropyTolerance.
template <typename Scalar, typename Evaluate>
EntropyValue<Scalar> refine_entropy(Evaluate&& evaluate, Index nodes, const char* what) {
  Scalar previous = evaluate(nodes);
  Scalar change = std::numeric_limits<Scalar>::infinity();
  Scalar current = previous;
  while (nodes < kMaxEntropyNodes) {
    nodes = 2 * nodes - 1;
    current = evaluate(nodes);
    change = std::abs(current - previous);
    if (change <= Scalar(kEntropyTarget)) break;
    previous = current;
  }
  if (!(change <= Scalar(kEntropyTolerance))) throw NonConvergenceError(std::string(what) + " did not converge under node doubling");
  return {current, change};
}

// Band-limited interpolation of one periodic line by `factor`, through zero
// padding of its discrete spectrum.
template <typename Real>
class LineUpsampler {
 public:
  using Complex = std::complex<Real>;

  LineUpsampler(Index n, Index factor) : n_(n), big_(n * factor), factor_(factor), padded_(n * factor) {}

  const std::vector<Complex>& operator()(const std::vector<Complex>& line) {
    fft_.fwd(spectrum_, line);
    std::fill(padded_.begin(), padded_.end(), Complex(0));
    const Index positive = (n_ + 1) / 2;
    for (Index k = 0; k < positive; ++k) padded_[k] = spectrum_[k];
    for (Index k = positive; k < n_; ++k) padded_[big_ - n_ + k] = spectrum_[k];
    if (n_ % 2 == 0) {
      // Split the Nyquist bin so real lines stay real.
      padded_[n_ / 2] = spectrum_[n_ / 2] / Real(2);
      padded_[big_ - n_ / 2] = spectrum_[n_ / 2] / Real(2);
    }
    fft_.inv(result_, padded_);
    for (auto& v : result_) v *= Real(factor_);
    return result_;
  }

 private:
  Index n_, big_, factor_;
  Eigen::FFT<Real> fft_;
  std::vector<Complex> spectrum_, padded_, result_;
};

// Power-of-two factor in [2, 8] keeping the interpolated grid within kProfileUpsampleCount.
inline Index upsample_factor(Index rows, Index cols) {
  Index factor = 2;
  while (factor < 8 && 2 * factor * std::max(rows, cols) <= kProfileUpsampleCount) factor *= 2;
  return factor;
}

// -\int |a|^2 ln |a|^2 over a grid of cell `area`, after band-limited
// interpolation of a by `factor` per axis (a must have decayed at the edges,
// the lines being treated as periodic). Returns the sum on the interpolated
// grid and on every second interpolated sample. The second axis is streamed
// so the interpolated matrix is never stored.
template <typename Scalar, typename Matrix>
std::pair<Scalar, Scalar> interpolated_entropy(const Matrix& a, Scalar area, Index factor) {
  using Complex = std::complex<Scalar>;
  const Index rows = a.rows(), cols = a.cols();
  const Index big_rows = rows * factor, big_cols = cols * factor;
  Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic> tall(big_rows, cols);
  {
    LineUpsampler<Scalar> up(rows, factor);
    std::vector<Complex> line(rows);
    for (Index j = 0; j < cols; ++j) {
      for (Index i = 0; i < rows; ++i) line[i] = a(i, j);
      const auto& out = up(line);
      for (Index i = 0; i < big_rows; ++i) tall(i, j) = out[i];
    }
  }
  LineUpsampler<Scalar> up(cols, factor);
  std::vector<Complex> line(cols);
  const Scalar peak = tall.cwiseAbs2().maxCoeff();
  Scalar fine = 0, coarse = 0;
  for (Index i = 0; i < big_rows; ++i) {
    // Rows far below the peak add nothing at double precision.
    if (tall.row(i).cwiseAbs2().maxCoeff() < Scalar(1e-40) * peak) continue;
    for (Index j = 0; j < cols; ++j) line[j] = tall(i, j);
    const auto& out = up(line);
    for (Index j = 0; j < big_cols; ++j) {
      const Scalar w = std::norm(out[j]);
      if (w <= Scalar(kDensityFloor)) continue;
      const Scalar term = -w * std::log(w);
      fine += term;
      if (i % 2 == 0 && j % 2 == 0) coarse += term;
    }
  }
  const Scalar cell = area / Scalar(factor * factor);
  return {fine * cell, coarse * cell * 4};
}

}  // namespace detail

/// Entropy of one HG(order) tomogram axis, -\int w ln w dX, by trapezoid
/// with node doubling.
template <typename Scalar>
EntropyValue<Scalar> axis_entropy(int order, Scalar sigma0, Scalar mu, Scalar nu,
                                  const QuadratureSpec<Scalar>& spec = entropy_quadrature<Scalar>()) {
  spec.validate();
  const Scalar box = Scalar(1.5) * hg_tomogram_box(order, sigma0, mu, nu);
  auto evaluate = [&](Index nodes) {
    const auto grid = UniformGrid<Scalar>::spanning(box, nodes);
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> w(nodes);
    for (Index i = 0; i < nodes; ++i) w[i] = hg_axis_tomogram(order, sigma0, grid[i], mu, nu);
    return detail::line_entropy_and_mass(w, grid.step).first;
  };
  return detail::refine_entropy<Scalar>(evaluate, spec.nodes_per_axis, "axis entropy");
}

/// H(mu1, nu1, mu2, nu2) = -\int w ln w dX1 dX2 for an HG mode: the product
/// trapezoid rule on the closed-form tomogram over 1.5x its truncation box,
/// doubling nodes until successive values settle.
template <typename Scalar>
EntropyValue<Scalar> tomographic_entropy(const HGModeSpec<Scalar>& spec, Scalar mu1, Scalar nu1, Scalar mu2,
                                         Scalar nu2,
                                         const QuadratureSpec<Scalar>& quadrature = entropy_quadrature<Scalar>()) {
  quadrature.validate();
  spec.validate();
  TomogramQuery<Scalar>{0, mu1, nu1, 0, mu2, nu2}.validate();
  const Scalar box1 = Scalar(1.5) * hg_tomogram_box(spec.n, spec.sigma0, mu1, nu1);
  const Scalar box2 = Scalar(1.5) * hg_tomogram_box(spec.m, spec.sigma0, mu2, nu2);
  auto evaluate = [&](Index nodes) {
    const auto g1 = UniformGrid<Scalar>::spanning(box1, nodes);
    const auto g2 = UniformGrid<Scalar>::spanning(box2, nodes);
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> w1(nodes), w2(nodes);
    for (Index i = 0; i < nodes; ++i) w1[i] = hg_axis_tomogram(spec.n, spec.sigma0, g1[i], mu1, nu1);
    for (Index j = 0; j < nodes; ++j) w2[j] = hg_axis_tomogram(spec.m, spec.sigma0, g2[j], mu2, nu2);
    return detail::product_entropy(w1, g1.step, w2, g2.step);
  };
  return detail::refine_entropy<Scalar>(evaluate, quadrature.nodes_per_axis, "tomographic entropy");
}

/// Tomographic entropy of a sampled field from its whole-plane profile.
/// The sheared amplitude is band-limited on the field grid, so it is
/// Fourier-interpolated (factor 2 to 8 per axis) before summing -w ln w,
/// which has log kinks at zeros of w. The error estimate compares against
/// every second interpolated sample.
template <typename Scalar>
EntropyValue<Scalar> tomographic_entropy(const SampledField<Scalar>& field, Scalar mu1, Scalar nu1, Scalar mu2,
                                         Scalar nu2, const QuadratureSpec<Scalar>& = entropy_quadrature<Scalar>()) {
  const auto sheared = detail::shear_field(field, mu1, nu1, mu2, nu2);
  // w = |a|^2 / |scale| on cells of |scale| h1 h2: the 1/|scale| goes into the log only.
  const Scalar scale = std::abs(Scalar(sheared.axis1.scale * sheared.axis2.scale));
  const Index factor = detail::upsample_factor(sheared.amplitudes.rows(), sheared.amplitudes.cols());
  const Scalar cell = Scalar(sheared.axis1.step * sheared.axis2.step);
  auto [fine, coarse] = detail::interpolated_entropy(sheared.amplitudes, cell, factor);
  const Scalar mass = sheared.amplitudes.squaredNorm() * cell;
  fine += mass * std::log(scale);
  coarse += mass * std::log(scale);
  const Scalar change = std::abs(fine - coarse);
  if (change > Scalar(kEntropyTolerance))
    throw NonConvergenceError("tomographic entropy not resolved on the field grid");
  return {fine, change};
}

template <typename Source, typename Scalar>
EntropyValue<Scalar> optical_entropy(const Source& source, const OpticalAngles<Scalar>& angles,
                                     const QuadratureSpec<Scalar>& quadrature = entropy_quadrature<Scalar>()) {
  // X -> -X reflections from angle reduction leave the entropy unchanged.
  const Scalar t1 = canonical_angle(angles.theta1).first;
  const Scalar t2 = canonical_angle(angles.theta2).first;
  return tomographic_entropy(source, std::cos(t1), std::sin(t1), std::cos(t2), std::sin(t2), quadrature);
}

template <typename Source, typename Scalar>
EntropyValue<Scalar> fresnel_entropy(const Source& source, Scalar nu1, Scalar nu2,
                                     const QuadratureSpec<Scalar>& quadrature = entropy_quadrature<Scalar>()) {
  if (nu1 == 0 || nu2 == 0) throw DegenerateQueryError("Fresnel entropy needs nu1, nu2 != 0");
  return tomographic_entropy(source, Scalar(1), nu1, Scalar(1), nu2, quadrature);
}

template <typename Scalar = double>
struct EntropicBoundReport {
  Scalar position_entropy = 0;
  Scalar momentum_entropy = 0;
  Scalar slack = 0;
};

/// Hx = -\int |psi|^2 ln |psi|^2, Hp likewise for psi~, and
/// slack = Hx + Hp - 2 ln(pi e), which is >= 0 for every normalized field.
template <typename Scalar>
EntropicBoundReport<Scalar> position_momentum_entropy_sum(const SampledField<Scalar>& field) {
  if (!field.is_normalized()) throw ValidationError("entropic bound needs a normalized field");
  const auto spectrum = fourier_transform(field);
  auto entropy_of = [](const auto& f) {
    const Index factor = detail::upsample_factor(f.amplitudes().rows(), f.amplitudes().cols());
    const auto [fine, coarse] = detail::interpolated_entropy(f.amplitudes(), f.cell_area(), factor);
    if (std::abs(fine - coarse) > Scalar(kEntropyTolerance))
      throw NonConvergenceError("intensity entropy not resolved on the grid");
    return fine;
  };
  EntropicBoundReport<Scalar> r;
  r.position_entropy = entropy_of(field);
  r.momentum_entropy = entropy_of(spectrum);
  r.slack = r.position_entropy + r.momentum_entropy - entropic_bound<Scalar>();
  return r;
}

/// R(theta1, theta2) in nats.
template <typename Source, typename Scalar>
Scalar r_function(const Source& source, const OpticalAngles<Scalar>& angles,
                  const QuadratureSpec<Scalar>& quadrature = entropy_quadrature<Scalar>()) {
  const Scalar half_pi = std::numbers::pi_v<Scalar> / 2;
  const auto h = optical_entropy(source, angles, quadrature);
  const auto h_conjugate =
      optical_entropy(source, OpticalAngles<Scalar>{angles.theta1 + half_pi, angles.theta2 + half_pi}, quadrature);
  return h.value + h_conjugate.value - entropic_bound<Scalar>();
}

template <typename Scalar = double>
struct ModeMeta {
  int n = 0;
  int m = 0;
  Scalar sigma0 = 1;
};

/// R on the lattice theta_j = j pi / grid_n over [0, pi)^2; values(i, j)
/// holds R(theta1_i, theta2_j).
template <typename Scalar = double>
struct RSurface {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> theta1, theta2;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> values;
  std::optional<ModeMeta<Scalar>> mode;

  Scalar min() const { return values.minCoeff(); }
  Scalar max() const { return values.maxCoeff(); }
  Scalar mean() const { return values.mean(); }
};

/// Scan parallelism: `threads` if positive, else hardware concurrency.
inline unsigned scan_threads(int threads) {
  if (threads > 0) return static_cast<unsigned>(threads);
  return std::max(1u, std::thread::hardware_concurrency());
}

template <typename Source, typename Scalar = double>
RSurface<Scalar> r_surface_scan(const Source& source, Index grid_n,
                                const QuadratureSpec<Scalar>& quadrature = entropy_quadrature<Scalar>(),
                                int threads = 0) {
  if (grid_n < 2) throw ValidationError("R-surface grid needs at least 2 points per axis");
  const Scalar pi = std::numbers::pi_v<Scalar>;
  const Scalar half_pi = pi / 2;
  RSurface<Scalar> s;
  s.theta1.resize(grid_n);
  for (Index j = 0; j < grid_n; ++j) s.theta1[j] = Scalar(j) * pi / Scalar(grid_n);
  s.theta2 = s.theta1;
  s.values.resize(grid_n, grid_n);

  // H_opt is pi-periodic per axis, so both terms of R come from one table on
  // the lattice when grid_n is even; otherwise the shifted table is separate.
  const bool shared = grid_n % 2 == 0;
  const Index cells = grid_n * grid_n;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> h(grid_n, grid_n), h_shift(grid_n, grid_n);
  const Index jobs = shared ? cells : 2 * cells;

  std::atomic<Index> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (Index job = next++; job < jobs && !failed; job = next++) {
      try {
        const bool shifted = job >= cells;
        const Index cell = job % cells;
        const Index i = cell / grid_n, j = cell % grid_n;
        const Scalar offset = shifted ? half_pi : Scalar(0);
        const Scalar value =
            optical_entropy(source, OpticalAngles<Scalar>{s.theta1[i] + offset, s.theta2[j] + offset}, quadrature)
                .value;
        (shifted ? h_shift : h)(i, j) = value;
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    }
  };
  const unsigned count = std::min<unsigned>(scan_threads(threads), static_cast<unsigned>(jobs));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < count; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  const Index half = grid_n / 2;
  for (Index i = 0; i < grid_n; ++i)
    for (Index j = 0; j < grid_n; ++j) {
      const Scalar conjugate = shared ? h((i + half) % grid_n, (j + half) % grid_n) : h_shift(i, j);
      s.values(i, j) = h(i, j) + conjugate - entropic_bound<Scalar>();
    }
  if constexpr (std::is_same_v<Source, HGModeSpec<Scalar>>) s.mode = ModeMeta<Scalar>{source.n, source.m, source.sigma0};
  return s;
}

}  // namespace beamtomo
