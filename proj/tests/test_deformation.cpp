#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <random>
#include <vector>

#include "wscat/deformation.hpp"

using namespace wscat;

namespace {

Grid test_grid(std::size_t n) {
  return Grid{-8.0 * kPi, 16.0 * kPi / static_cast<double>(n), n};
}

Signal gaussian(const Grid& g, double center, double sigma) {
  std::vector<cd> s(g.length);
  for (std::size_t i = 0; i < g.length; ++i) {
    double u = (g.point(i) - center) / sigma;
    s[i] = cd(std::exp(-0.5 * u * u), 0.0);
  }
  return Signal(g, std::move(s));
}

Signal random_signal(const Grid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<cd> s(g.length);
  for (auto& z : s) z = cd(gauss(rng), gauss(rng));
  return Signal(g, std::move(s));
}

double brute_holder(const std::vector<double>& v, double spacing,
                    double alpha) {
  double best = 0.0;
  for (std::size_t i = 0; i + 1 < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j) {
      double q = std::abs(v[j] - v[i]) /
                 std::pow(static_cast<double>(j - i) * spacing, alpha);
      if (q > best) best = q;
    }
  return best;
}

}  // namespace

TEST_CASE("zero and constant warps act exactly", "[deform]") {
  Grid g = test_grid(1024);
  Signal f = gaussian(g, 0.0, 1.0);

  Signal same = apply_deformation(f, zero_field(g));
  for (std::size_t i = 0; i < g.length; ++i) REQUIRE(same[i] == f[i]);

  const double c = 0.7;
  Signal warped = apply_deformation(f, constant_field(g, c));
  Signal shifted = translate(f, c);
  REQUIRE(l2_norm(warped - shifted) / l2_norm(f) < 1e-11);
}

TEST_CASE("oscillatory field satisfies the amplitude condition", "[deform]") {
  Grid g = test_grid(2048);  // Nyquist 128
  DeformationField tau = oscillatory_bump_field(g, 32);

  double a_max = bump_constants().a_max;
  REQUIRE(a_max * (1.0 + bump_constants().sup_deriv) ==
          Catch::Approx(0.5).epsilon(1e-12));
  REQUIRE(sup_abs(tau.dtau) < 0.5);

  REQUIRE_THROWS_AS(oscillatory_bump_field(g, 128), NyquistViolation);
  REQUIRE_THROWS_AS(oscillatory_bump_field(g, 32, 10.0), ParameterViolation);
}

TEST_CASE("warping the linear profile reproduces the field", "[deform]") {
  Grid g = test_grid(4096);
  Signal f = ramp_signal(g);
  DeformationField tau = oscillatory_bump_field(g, 32);
  Signal g_res = apply_deformation(f, tau) - f;

  // On the plateau f(x) = x, so f(x - tau) - f(x) = -tau(x).
  double worst = 0.0, scale = sup_abs(tau.tau);
  for (std::size_t i = 0; i < g.length; ++i) {
    double x = g.point(i);
    if (x < 0.5 || x > 2.0 * kPi - 0.5) continue;
    worst = std::max(worst, std::abs(g_res[i].real() + tau.tau[i]));
  }
  REQUIRE(worst < 1e-5 * scale);
}

TEST_CASE("domain escape fires only for content at the seam", "[deform]") {
  Grid g = test_grid(512);
  DeformationField shift = constant_field(g, 0.5);

  std::vector<cd> ones(g.length, cd(1.0, 0.0));
  Signal flat(g, std::move(ones));
  REQUIRE_THROWS_AS(apply_deformation(flat, shift), DomainEscape);
  REQUIRE_NOTHROW(
      apply_deformation(flat, shift, false, SeamPolicy::Periodic));

  Signal centered = gaussian(g, 0.0, 1.0);
  REQUIRE_NOTHROW(apply_deformation(centered, shift));

  DeformationField steep = constant_field(g, 0.5);
  for (auto& v : steep.dtau) v = 0.8;
  REQUIRE_THROWS_AS(apply_deformation(centered, steep), UsabilityViolation);
  REQUIRE_NOTHROW(apply_deformation(centered, steep, true));
}

TEST_CASE("dyadic sweep brackets the exact Hoelder seminorm", "[deform]") {
  const double alpha = 0.5;
  {
    Grid g = test_grid(1024);
    DeformationField fld = smooth_random_field(g, 5, 1.0, 0.3);
    double lib = holder_seminorm(fld.tau, g.spacing, alpha);
    REQUIRE(lib == brute_holder(fld.tau, g.spacing, alpha));
  }
  {
    Grid g = test_grid(4096);
    DeformationField fld = smooth_random_field(g, 6, 1.0, 0.3);
    double dyadic = holder_seminorm(fld.tau, g.spacing, alpha);
    double exact = brute_holder(fld.tau, g.spacing, alpha);
    double chain = std::pow(2.0, alpha) / (std::pow(2.0, alpha) - 1.0);
    REQUIRE(dyadic <= exact * (1.0 + 1e-12));
    REQUIRE(exact <= dyadic * chain * (1.0 + 1e-12));
  }
  REQUIRE_THROWS_AS(holder_seminorm({0.0, 1.0}, 1.0, 1.5), ParameterViolation);
}

TEST_CASE("rescaled pairs contract in Hoelder norm exactly", "[deform]") {
  Grid g = test_grid(1024);
  Signal f = ramp_signal(g);
  DeformationField tau = oscillatory_bump_field(g, 16);
  const double alpha = 0.5;
  double base = holder_seminorm(tau.tau, g.spacing, alpha);

  for (int n : {1, 2, 3}) {
    ScalePair sp = scale_pair(f, tau, n);
    double scaled = holder_seminorm(sp.field.tau, sp.f.grid().spacing, alpha);
    double expect =
        std::pow(2.0, -static_cast<double>(n) * (1.0 - alpha)) * base;
    REQUIRE(scaled == Catch::Approx(expect).epsilon(1e-12));
    REQUIRE(l2_norm(sp.f) == Catch::Approx(l2_norm(f)).epsilon(1e-14));
  }
}

TEST_CASE("smoothness functionals on simple fields", "[deform]") {
  Grid g = test_grid(1024);
  const int J = 4;
  const std::vector<double> alphas{0.5};

  DeformationMetrics zero = compute_metrics(zero_field(g), alphas);
  REQUIRE(k2_functional(zero, J) == 0.0);
  REQUIRE(k1alpha_functional(zero, J, 0.5) == 0.0);

  DeformationMetrics cst = compute_metrics(constant_field(g, 0.3), alphas);
  REQUIRE(k2_functional(cst, J) ==
          Catch::Approx(std::pow(2.0, -J) * 0.3).epsilon(1e-12));
  REQUIRE(k1alpha_functional(cst, J, 0.5) ==
          Catch::Approx(std::pow(2.0, -J) * 0.3).epsilon(1e-12));

  DeformationField smooth = smooth_random_field(g, 9, 1.0, 0.2);
  DeformationMetrics m = compute_metrics(smooth, alphas);
  double middle = std::max(std::log(m.osc_tau / m.sup_dtau), 1.0) * m.sup_dtau;
  REQUIRE(k2_functional(m, J) ==
          Catch::Approx(std::pow(2.0, -J) * m.sup_tau + middle + m.sup_d2tau)
              .epsilon(1e-12));
  REQUIRE(k1alpha_functional(m, J, 0.5) ==
          Catch::Approx(std::pow(2.0, -J) * m.sup_tau + middle +
                        m.holder_dtau.at(0.5))
              .epsilon(1e-12));
  double win = std::max(static_cast<double>(J), 1.0) * m.sup_dtau;
  REQUIRE(k2_functional(m, J, MiddleFactor::WindowScale) ==
          Catch::Approx(std::pow(2.0, -J) * m.sup_tau + win + m.sup_d2tau)
              .epsilon(1e-12));
  REQUIRE_THROWS_AS(k1alpha_functional(m, J, 0.75), ParameterViolation);
}

TEST_CASE("warp inversion meets its residual gate", "[deform]") {
  Grid g = test_grid(512);
  DeformationField fld = smooth_random_field(g, 12, 0.4, 0.3);
  WarpInverse inv = invert_warp(fld);

  Signal tau_sig = fld.tau_signal();
  std::vector<cd> tau_at = resample_at(tau_sig, inv.xi);
  for (std::size_t i = 0; i < g.length; ++i) {
    double res = inv.xi[i] - tau_at[i].real() - g.point(i);
    REQUIRE(std::abs(res) <= 1e-12);
  }
}

TEST_CASE("continuum adjoint agrees with the transpose on smooth content",
          "[deform]") {
  Grid g = test_grid(512);
  DeformationField fld = smooth_random_field(g, 12, 0.3, 0.15);
  Signal probe = gaussian(g, 0.4, 1.2);

  Signal cont = apply_deformation_adjoint(probe, invert_warp(fld));
  Signal disc = apply_deformation_transpose(probe, fld);
  REQUIRE(l2_norm(cont - disc) / l2_norm(probe) < 1e-8);
}

TEST_CASE("exact transpose pairs with the forward warp", "[deform]") {
  Grid g = test_grid(512);
  DeformationField fld = smooth_random_field(g, 14, 0.8, 0.25);
  Signal f = random_signal(g, 1);
  Signal h = random_signal(g, 2);

  Signal lf = apply_deformation(f, fld, false, SeamPolicy::Periodic);
  Signal lth = apply_deformation_transpose(h, fld);

  cd lhs(0.0, 0.0), rhs(0.0, 0.0);
  for (std::size_t i = 0; i < g.length; ++i) {
    lhs += lf[i] * std::conj(h[i]);
    rhs += f[i] * std::conj(lth[i]);
  }
  double fn = 0.0, hn = 0.0;
  for (std::size_t i = 0; i < g.length; ++i) {
    fn += std::norm(f[i]);
    hn += std::norm(h[i]);
  }
  REQUIRE(std::abs(lhs - rhs) <= 1e-12 * std::sqrt(fn * hn));
}

TEST_CASE("field csv round trip", "[deform]") {
  namespace fs = std::filesystem;
  Grid g = test_grid(512);
  DeformationField fld = smooth_random_field(g, 33, 1.0, 0.2);

  fs::create_directories("test_artifacts");
  const std::string path = "test_artifacts/field_roundtrip.csv";
  export_field_csv(fld, path);
  DeformationField loaded = import_field_csv(path, g);

  for (std::size_t i = 0; i < g.length; ++i)
    REQUIRE(loaded.tau[i] == fld.tau[i]);
  for (std::size_t i = 0; i < g.length; ++i)
    REQUIRE(loaded.dtau[i] == Catch::Approx(fld.dtau[i]).margin(1e-9));
}
