#include <doctest.h>

#include "beamtomo/beam_model.hpp"
#include "oracles.hpp"

using namespace beamtomo;
using cd = std::complex<double>;

TEST_CASE("hg_amplitude examples") {
  const HGModeSpec<> ground{0, 0, std::sqrt(2.0)};
  CHECK(hg_amplitude(ground, 0.0, 0.0).real() == doctest::Approx(1 / std::sqrt(oracle::pi)).epsilon(1e-14));
  CHECK(hg_amplitude(ground, 0.0, 0.0).imag() == 0.0);
  for (double s : {0.5, 1.0, 3.0}) {
    CHECK(hg_amplitude(HGModeSpec<>{1, 0, s}, 0.0, 0.7).real() == 0.0);
    const HGModeSpec<> g{0, 0, s};
    CHECK(hg_amplitude(g, s, 0.0).real() == doctest::Approx(g.normalization() * std::exp(-1.0)).epsilon(1e-14));
  }
}

TEST_CASE("hg_amplitude agrees with the direct Hermite formula") {
  for (int n = 0; n <= 6; ++n)
    for (int m = 0; m <= 3; ++m) {
      const HGModeSpec<> spec{n, m, 1.3};
      for (double x1 : {-2.1, -0.4, 0.0, 0.9, 2.6})
        for (double x2 : {-1.7, 0.3, 1.2}) {
          const double direct = spec.normalization() * oracle::hermite_explicit(n, std::sqrt(2.0) * x1 / 1.3) *
                                oracle::hermite_explicit(m, std::sqrt(2.0) * x2 / 1.3) *
                                std::exp(-(x1 * x1 + x2 * x2) / (1.3 * 1.3));
          CHECK(hg_amplitude(spec, x1, x2).real() == doctest::Approx(direct).epsilon(1e-12));
        }
    }
}

TEST_CASE("HGModeSpec validation") {
  CHECK_THROWS_AS((HGModeSpec<>{-1, 0, 1.0}).validate(), ValidationError);
  CHECK_THROWS_AS((HGModeSpec<>{0, 0, 0.0}).validate(), ValidationError);
  CHECK_THROWS_AS((HGModeSpec<>{0, 0, 1.0, -1.0}).validate(), ValidationError);
}

TEST_CASE("sample is normalized") {
  const auto grid = UniformGrid<>::spanning(8, 256);
  CHECK(sample(HGModeSpec<>{0, 0, 1.0}, grid).norm() == doctest::Approx(1).epsilon(1e-6));
  CHECK(sample(HGModeSpec<>{3, 3, 1.0}, grid).norm() == doctest::Approx(1).epsilon(1e-6));
  CHECK_THROWS_AS(sample(HGModeSpec<>{0, 0, 4.0}, UniformGrid<>::spanning(1, 64)), GridTooSmallError);
  CHECK_THROWS_AS(sample(HGModeSpec<>{0, 0, 1.0}, UniformGrid<>::spanning(8, 64, 4.0)), GridTooSmallError);
}

TEST_CASE("sampled HG modes are orthonormal and have parity") {
  const auto grid = UniformGrid<>::spanning(10, 201);
  std::vector<SampledField<>> modes;
  std::vector<std::pair<int, int>> orders;
  for (int n = 0; n <= 4; ++n)
    for (int m = 0; m <= 4; ++m) {
      modes.push_back(sample(HGModeSpec<>{n, m, 1.2}, grid));
      orders.emplace_back(n, m);
    }
  for (std::size_t a = 0; a < modes.size(); ++a)
    for (std::size_t b = a; b < modes.size(); ++b) {
      const double expected = a == b ? 1.0 : 0.0;
      CHECK(std::abs(overlap(modes[a], modes[b]) - expected) < 1e-6);
    }
  for (std::size_t k = 0; k < modes.size(); ++k) {
    const auto& psi = modes[k].amplitudes();
    const double sign = orders[k].first % 2 ? -1.0 : 1.0;
    for (Index i = 0; i < grid.count; ++i) CHECK(psi(grid.count - 1 - i, 37) == sign * psi(i, 37));
  }
}

TEST_CASE("fourier_transform of the ground mode") {
  const double sigma0 = 1.5;
  const auto field = sample(HGModeSpec<>{0, 0, sigma0}, UniformGrid<>::spanning(12, 257));
  const auto spectrum = fourier_transform(field);
  // Analytic pair: psi~ is the ground mode of waist 2 / sigma0 in p.
  const HGModeSpec<> dual{0, 0, 2 / sigma0};
  double worst = 0;
  for (Index i = 0; i < spectrum.axis1().count; i += 7)
    for (Index j = 0; j < spectrum.axis2().count; j += 5)
      worst = std::max(worst, std::abs(spectrum.amplitudes()(i, j) -
                                       hg_amplitude(dual, spectrum.axis1()[i], spectrum.axis2()[j])));
  CHECK(worst < 1e-10);
  CHECK(spectrum.norm() == doctest::Approx(field.norm()).epsilon(1e-12));
  Index peak_i, peak_j;
  spectrum.intensity().maxCoeff(&peak_i, &peak_j);
  CHECK(spectrum.axis1()[peak_i] == doctest::Approx(0).epsilon(1e-12));
}

TEST_CASE("fourier_transform preserves odd parity and the self-Fourier family") {
  const auto grid = UniformGrid<>::spanning(11, 255);  // odd count puts p = 0 on the grid
  const auto field = sample(HGModeSpec<>{1, 0, 1.0}, grid);
  const auto spectrum = fourier_transform(field);
  const Index zero = spectrum.axis1().count / 2;
  CHECK(spectrum.axis1()[zero] == doctest::Approx(0.0));
  CHECK(spectrum.amplitudes().row(zero).cwiseAbs().maxCoeff() < 1e-12);

  // sigma0 = sqrt2: |psi~_nm| equals |psi_nm| at the same arguments.
  for (int n = 0; n <= 3; ++n) {
    const HGModeSpec<> spec{n, 3 - n, std::sqrt(2.0)};
    const auto f = sample(spec, UniformGrid<>::spanning(std::sqrt(oracle::pi * 256 / 2), 257));
    const auto s = fourier_transform(f);
    double worst = 0;
    for (Index i = 0; i < s.axis1().count; i += 3)
      for (Index j = 0; j < s.axis2().count; j += 3)
        worst = std::max(worst, std::abs(std::abs(s.amplitudes()(i, j)) -
                                         std::abs(hg_amplitude(spec, s.axis1()[i], s.axis2()[j]))));
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("double fourier transform flips parity") {
  const auto grid = UniformGrid<>::spanning(10, 200);
  auto f = [](double x, double y) { return cd(std::exp(-(x - 1) * (x - 1) - 0.5 * y * y), 0.3 * x * std::exp(-x * x - y * y)); };
  const auto field = sample_function(f, grid, grid);
  const auto once = fourier_transform(field);
  const auto twice = fourier_transform(SampledField<>(once.axis1(), once.axis2(), once.amplitudes()));
  REQUIRE(twice.axis1().step == doctest::Approx(grid.step));
  const auto& a = field.amplitudes();
  const auto& b = twice.amplitudes();
  double worst = 0;
  for (Index i = 0; i < grid.count; ++i)
    for (Index j = 0; j < grid.count; ++j) worst = std::max(worst, std::abs(b(i, j) - a(grid.count - 1 - i, grid.count - 1 - j)));
  CHECK(worst < 1e-12);
}

TEST_CASE("inverse transform restores off-centre grids") {
  const UniformGrid<> g1{0.75, 0.05, 300};
  const UniformGrid<> g2{-0.4, 0.06, 256};
  auto f = [](double x, double y) { return cd(std::exp(-(x - 0.8) * (x - 0.8) - y * y), std::sin(x) * std::exp(-x * x - (y + 0.3) * (y + 0.3))); };
  const auto field = sample_function(f, g1, g2);
  const auto back = inverse_fourier_transform(fourier_transform(field), g1.center, g2.center);
  CHECK((back.amplitudes() - field.amplitudes()).cwiseAbs().maxCoeff() < 1e-12);
  // And the forward transform is the continuous one: compare a sample against direct summation.
  const auto spectrum = fourier_transform(field);
  const Index k1 = 140, k2 = 101;
  cd direct = 0;
  for (Index i = 0; i < g1.count; ++i)
    for (Index j = 0; j < g2.count; ++j)
      direct += field.amplitudes()(i, j) *
                std::polar(1.0, -(spectrum.axis1()[k1] * g1[i] + spectrum.axis2()[k2] * g2[j]));
  direct *= g1.step * g2.step / (2 * oracle::pi);
  CHECK(std::abs(direct - spectrum.amplitudes()(k1, k2)) < 1e-12);
}

TEST_CASE("free_space_propagate") {
  const HGModeSpec<> spec{0, 0, 1.0};
  const auto grid = UniformGrid<>::spanning(12, 512);
  const auto field = sample(spec, grid);
  const double lambda = 2 * oracle::pi;

  const auto same = free_space_propagate(field, 0.0, lambda);
  CHECK((same.amplitudes() - field.amplitudes()).cwiseAbs().maxCoeff() == 0.0);

  const double z0 = spec.confocal_parameter();
  const auto far = free_space_propagate(field, z0, lambda);
  const auto ratio = rms_width(far) / rms_width(field);
  CHECK(ratio[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-3));
  CHECK(ratio[1] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-3));

  for (int n = 0; n <= 3; ++n) {
    const auto f = sample(HGModeSpec<>{n, 1, 1.0}, grid);
    CHECK(free_space_propagate(f, 1.7, 0.9).norm() == doctest::Approx(1).epsilon(1e-6));
  }
  CHECK_THROWS_AS(free_space_propagate(field, -1.0, lambda), ValidationError);
  CHECK_THROWS_AS(free_space_propagate(field, 1e4, lambda), AliasingError);
}

TEST_CASE("propagated HG width follows the confocal law") {
  // sigma(z) = sigma0 sqrt(1 + (z / z0)^2) for every order; RMS width scales the same way.
  const HGModeSpec<> spec{2, 1, 1.4, 0.8};
  const auto field = sample(spec, UniformGrid<>::spanning(20, 512));
  const double z0 = spec.confocal_parameter();
  for (double z : {0.3 * z0, z0, 2.2 * z0}) {
    const auto ratio = rms_width(free_space_propagate(field, z, spec.lambda)) / rms_width(field);
    CHECK(ratio[0] == doctest::Approx(std::sqrt(1 + (z / z0) * (z / z0))).epsilon(1e-6));
  }
}

TEST_CASE("default and phase-space grids hold the mode") {
  for (int n : {0, 2, 4})
    for (double s : {0.5, 1.0, 4.0}) {
      const HGModeSpec<> spec{n, 1, s};
      CHECK_NOTHROW(sample(spec, default_grid(spec)));
      const auto g = phase_space_grid(spec);
      const auto field = sample(spec, g);
      CHECK(field.norm() == doctest::Approx(1).epsilon(1e-9));
    }
}
