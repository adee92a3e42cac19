#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "wscat/operator_norm.hpp"

using namespace wscat;

namespace {

Grid test_grid(std::size_t n) {
  return Grid{-8.0 * kPi, 16.0 * kPi / static_cast<double>(n), n};
}

std::vector<cd> random_vec(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<cd> v(n);
  for (auto& z : v) z = cd(gauss(rng), gauss(rng));
  return v;
}

// |<Op f, h> - <f, Op* h>| / (||f|| ||h||) on random probes.
double pairing_defect(const LinearOperator& op, std::uint64_t seed) {
  std::vector<cd> f = random_vec(op.input_dim, seed);
  std::vector<cd> h = random_vec(op.output_dim, seed + 1);
  std::vector<cd> of = op.apply(f);
  std::vector<cd> ah = op.adjoint_apply(h);
  cd lhs(0.0, 0.0), rhs(0.0, 0.0);
  for (std::size_t i = 0; i < h.size(); ++i) lhs += of[i] * std::conj(h[i]);
  for (std::size_t i = 0; i < f.size(); ++i) rhs += f[i] * std::conj(ah[i]);
  return std::abs(lhs - rhs) /
         (detail::vec_norm(f) * detail::vec_norm(h));
}

}  // namespace

TEST_CASE("wavelet stack norm reflects the analytic doubling", "[opnorm]") {
  Grid g = test_grid(256);
  FilterBank bank = build_filter_bank(g, 2);
  LinearOperator op = wavelet_operator(bank);

  // On complex inputs the stack multiplier is |phi|^2 + 2q, which reaches 2
  // on bins where the window has died; the unit energy identity only holds
  // for real signals through Hermitian symmetry.
  NormEstimate dense = dense_operator_norm(op);
  NormEstimate power = operator_norm(op);
  REQUIRE(dense.value == Catch::Approx(std::sqrt(2.0)).margin(1e-6));
  REQUIRE(power.converged);
  REQUIRE(std::abs(power.value - dense.value) < 1e-3);
}

TEST_CASE("operator handles satisfy the pairing identity", "[opnorm]") {
  Grid g = test_grid(256);
  FilterBank bank = build_filter_bank(g, 2);
  DeformationField field = smooth_random_field(g, 5, 0.8, 0.3);

  REQUIRE(pairing_defect(wavelet_operator(bank), 100) < 1e-8);
  REQUIRE(pairing_defect(deformation_operator(field), 200) < 1e-8);
  REQUIRE(pairing_defect(commutator_handle(bank, field), 300) < 1e-8);
}

TEST_CASE("warp norm estimate matches the dense decomposition", "[opnorm]") {
  Grid g = test_grid(256);
  DeformationField field = smooth_random_field(g, 4, 0.6, 0.35);
  LinearOperator op = deformation_operator(field);

  NormEstimate power = operator_norm(op);
  NormEstimate dense = dense_operator_norm(op);
  REQUIRE(power.converged);
  REQUIRE(dense.value > 0.0);
  REQUIRE(std::abs(power.value - dense.value) / dense.value < 1e-3);
}

TEST_CASE("commutator vanishes for translation-invariant warps", "[opnorm]") {
  Grid g = test_grid(256);
  FilterBank bank = build_filter_bank(g, 2);

  NormEstimate zero = operator_norm(commutator_handle(bank, zero_field(g)));
  REQUIRE(zero.converged);
  REQUIRE(zero.value < 1e-10);

  NormEstimate cst =
      operator_norm(commutator_handle(bank, constant_field(g, 0.1)));
  REQUIRE(cst.converged);
  REQUIRE(cst.value < 1e-8);
}

TEST_CASE("commutator norm and bound ratio on a generic field", "[opnorm]") {
  Grid g = test_grid(128);
  FilterBank bank = build_filter_bank(g, 2);
  DeformationField field = smooth_random_field(g, 7, 0.5, 0.1);

  CommutatorResult res = commutator_bound_ratio(bank, field, 0.5);
  REQUIRE(res.norm.converged);
  REQUIRE(res.norm.value > 0.0);
  REQUIRE(res.k1alpha > 0.0);
  REQUIRE(res.ratio == Catch::Approx(res.norm.value / res.k1alpha));

  NormEstimate dense = dense_operator_norm(commutator_handle(bank, field));
  REQUIRE(std::abs(res.norm.value - dense.value) / dense.value < 1e-3);
}

TEST_CASE("estimator reports non-convergence instead of guessing", "[opnorm]") {
  Grid g = test_grid(128);
  FilterBank bank = build_filter_bank(g, 2);
  PowerIterOptions opts;
  opts.max_iter = 1;
  NormEstimate est = operator_norm(wavelet_operator(bank), opts);
  REQUIRE_FALSE(est.converged);
  REQUIRE(est.iterations == 1);
  REQUIRE(est.value > 0.0);
}

TEST_CASE("handles validate their inputs", "[opnorm]") {
  Grid g = test_grid(128);
  Grid other = test_grid(256);
  FilterBank bank = build_filter_bank(g, 2);

  REQUIRE_THROWS_AS(commutator_handle(bank, zero_field(other)), GridMismatch);

  DeformationField steep = constant_field(g, 0.2);
  for (auto& v : steep.dtau) v = 0.8;
  REQUIRE_THROWS_AS(deformation_operator(steep), UsabilityViolation);
  REQUIRE_THROWS_AS(commutator_handle(bank, steep), UsabilityViolation);
}
