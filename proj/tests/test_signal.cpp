#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "wscat/signal.hpp"

using namespace wscat;

namespace {

Grid test_grid(std::size_t n = 1024) {
  return Grid{-8.0 * kPi, 16.0 * kPi / static_cast<double>(n), n};
}

Signal random_signal(const Grid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<cd> s(g.length);
  for (auto& z : s) z = cd(gauss(rng), gauss(rng));
  return Signal(g, std::move(s));
}

Signal gaussian(const Grid& g, double center, double sigma) {
  std::vector<cd> s(g.length);
  for (std::size_t i = 0; i < g.length; ++i) {
    double u = (g.point(i) - center) / sigma;
    s[i] = cd(std::exp(-0.5 * u * u), 0.0);
  }
  return Signal(g, std::move(s));
}

}  // namespace

TEST_CASE("grid geometry", "[signal]") {
  Grid g = test_grid(512);
  REQUIRE(g.period() == Catch::Approx(16.0 * kPi));
  REQUIRE(g.nyquist() == Catch::Approx(kPi / g.spacing));
  REQUIRE(g.domega() == Catch::Approx(2.0 * kPi / g.period()));
  REQUIRE(g.point(0) == -8.0 * kPi);
  REQUIRE(g.point(256) == Catch::Approx(0.0).margin(1e-12));

  Grid bad{0.0, 1.0, 300};
  REQUIRE_THROWS_AS(validate_grid(bad), ParameterViolation);
}

TEST_CASE("fourier round trip and Parseval", "[signal]") {
  Grid g = test_grid();
  Signal f = random_signal(g, 42);

  Spectrum F = fourier(f);
  Signal back = inverse_fourier(F);
  double err = l2_norm(back - f) / l2_norm(f);
  REQUIRE(err < 1e-12);

  REQUIRE(l2_norm(F) == Catch::Approx(l2_norm(f)).epsilon(1e-12));
}

TEST_CASE("gaussian spectrum matches the closed form", "[signal]") {
  Grid g = test_grid();
  const double sigma = 1.0, x0 = 0.7;
  Signal f = gaussian(g, x0, sigma);
  Spectrum F = fourier(f);

  for (std::size_t i = 0; i < g.length; ++i) {
    double om = F.grid().omega(i);
    if (std::abs(om) > 10.0) continue;
    cd expect = sigma * std::sqrt(2.0 * kPi) *
                std::exp(-0.5 * sigma * sigma * om * om) *
                std::exp(cd(0.0, -om * x0));
    REQUIRE(std::abs(F.bins()[i] - expect) < 1e-9);
  }
}

TEST_CASE("translate matches the analytic shift", "[signal]") {
  Grid g = test_grid();
  Signal f = gaussian(g, 0.0, 1.3);
  const double c = 0.9;
  Signal shifted = translate(f, c);
  Signal expect = gaussian(g, c, 1.3);
  REQUIRE(l2_norm(shifted - expect) / l2_norm(f) < 1e-10);

  Signal round = translate(shifted, -c);
  REQUIRE(l2_norm(round - f) / l2_norm(f) < 1e-12);
}

TEST_CASE("spectral derivative", "[signal]") {
  Grid g = test_grid();
  std::vector<cd> s(g.length), d(g.length);
  for (std::size_t i = 0; i < g.length; ++i) {
    s[i] = cd(std::sin(g.point(i)), 0.0);
    d[i] = cd(std::cos(g.point(i)), 0.0);
  }
  Signal f(g, std::move(s)), expect(g, std::move(d));
  REQUIRE(l2_norm(derivative(f) - expect) / l2_norm(expect) < 1e-10);
}

TEST_CASE("dilation relabels the grid exactly", "[signal]") {
  Grid g = test_grid();
  Signal f = random_signal(g, 7);
  Signal d = dilate(f, 2);
  REQUIRE(d.grid().origin == g.origin / 4.0);
  REQUIRE(d.grid().spacing == g.spacing / 4.0);
  REQUIRE(d.grid().length == g.length);
  REQUIRE(l2_norm(d) == Catch::Approx(l2_norm(f)).epsilon(1e-14));

  Signal back = dilate(d, -2);
  REQUIRE(l2_norm(back - f) / l2_norm(f) < 1e-15);
}

TEST_CASE("band projection partitions the energy", "[signal]") {
  Grid g = test_grid();
  Signal f = random_signal(g, 13);
  Signal lo = band_project(f, Band::low(2.0));
  Signal mid = band_project(f, Band::annulus(2.0, 8.0));
  Signal hi = band_project(f, Band::high(8.0));

  REQUIRE(l2_norm(lo + mid + hi - f) / l2_norm(f) < 1e-12);
  double total = l2_norm_sq(lo) + l2_norm_sq(mid) + l2_norm_sq(hi);
  REQUIRE(total == Catch::Approx(l2_norm_sq(f)).epsilon(1e-12));

  Signal twice = band_project(lo, Band::low(2.0));
  REQUIRE(l2_norm(twice - lo) <= 1e-12 * l2_norm(f));
}

TEST_CASE("trigonometric resampling matches the direct sum", "[signal]") {
  Grid g{-2.0 * kPi, 4.0 * kPi / 256.0, 256};
  Signal f = random_signal(g, 3);

  // exact at the grid points
  std::vector<double> pts(g.length);
  for (std::size_t i = 0; i < g.length; ++i) pts[i] = g.point(i);
  std::vector<cd> at = resample_at(f, pts);
  for (std::size_t i = 0; i < g.length; ++i)
    REQUIRE(std::abs(at[i] - f[i]) < 1e-11 * sup_norm(f));

  // off-grid: naive DFT-sum oracle
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<double> off(17);
  for (auto& p : off) p = g.origin + uni(rng) * g.period();
  std::vector<cd> fast = resample_at(f, off);

  std::vector<cd> dft = f.samples();
  fft_inplace(dft);
  const std::size_t n = g.length;
  for (std::size_t p = 0; p < off.size(); ++p) {
    cd acc(0.0, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      long k = static_cast<long>(i) - static_cast<long>(n / 2);
      std::size_t src =
          static_cast<std::size_t>(k >= 0 ? k : k + static_cast<long>(n));
      double om = g.domega() * static_cast<double>(k);
      acc += dft[src] * std::polar(1.0, om * (off[p] - g.origin));
    }
    acc /= static_cast<double>(n);
    REQUIRE(std::abs(fast[p] - acc) < 5e-12 * sup_norm(f));
  }
}

TEST_CASE("resampling adjoint pairs exactly with the forward map", "[signal]") {
  Grid g{-2.0 * kPi, 4.0 * kPi / 256.0, 256};
  Signal f = random_signal(g, 21);

  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> pts(40);
  std::vector<cd> v(40);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    pts[i] = g.origin + uni(rng) * g.period();
    v[i] = cd(gauss(rng), gauss(rng));
  }

  std::vector<cd> lf = resample_at(f, pts);
  Signal lh = resample_adjoint_at(g, pts, v);

  cd lhs(0.0, 0.0), rhs(0.0, 0.0);
  for (std::size_t i = 0; i < pts.size(); ++i) lhs += lf[i] * std::conj(v[i]);
  for (std::size_t i = 0; i < g.length; ++i)
    rhs += f[i] * std::conj(lh[i]);

  double fn = 0.0, vn = 0.0;
  for (std::size_t i = 0; i < g.length; ++i) fn += std::norm(f[i]);
  for (std::size_t i = 0; i < v.size(); ++i) vn += std::norm(v[i]);
  REQUIRE(std::abs(lhs - rhs) < 1e-12 * std::sqrt(fn) * std::sqrt(vn));
}

TEST_CASE("band-limited downsampling is lossless", "[signal]") {
  Grid fine = test_grid(1024);
  Grid coarse{fine.origin, fine.spacing * 4.0, fine.length / 4};
  double coarse_ny = kPi / coarse.spacing;

  Signal f = bandlimited_noise(fine, 5, 0.0, 0.8 * coarse_ny);
  Signal down = resample_to_grid(f, coarse);
  Signal up = resample_to_grid(down, fine);
  REQUIRE(l2_norm(down) == Catch::Approx(l2_norm(f)).epsilon(1e-12));
  REQUIRE(l2_norm(up - f) / l2_norm(f) < 1e-12);

  Signal wide = bandlimited_noise(fine, 6, 1.2 * coarse_ny, 2.0 * coarse_ny);
  REQUIRE_THROWS_AS(resample_to_grid(wide, coarse), BandwidthExceeded);
}

TEST_CASE("band-limited noise is deterministic, real, unit norm", "[signal]") {
  Grid g = test_grid(512);
  Signal a = bandlimited_noise(g, 11, 0.5, 12.0);
  Signal b = bandlimited_noise(g, 11, 0.5, 12.0);
  for (std::size_t i = 0; i < g.length; ++i) {
    REQUIRE(a[i] == b[i]);
    REQUIRE(std::abs(a[i].imag()) < 1e-13);
  }
  REQUIRE(l2_norm(a) == Catch::Approx(1.0).epsilon(1e-12));

  Signal out_of_band = band_project(a, Band::high(12.5));
  REQUIRE(l2_norm(out_of_band) < 1e-12);
}
