#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wscat/scattering.hpp"

using namespace wscat;

namespace {

Grid test_grid(std::size_t n) {
  return Grid{-8.0 * kPi, 16.0 * kPi / static_cast<double>(n), n};
}

// Keep the ceiling well inside the covered band: modulus spectra grow tails
// above their parent's band, and mass pushed past covered_omega_max leaves
// the exact telescoping budget.
Signal in_band_noise(const Grid& g, const FilterBank& bank,
                     std::uint64_t seed) {
  return bandlimited_noise(g, seed, 0.3, 0.25 * bank.covered_omega_max());
}

}  // namespace

TEST_CASE("path enumeration is canonical and invertible", "[scattering]") {
  PathSet ps({-1, 0, 1}, 3, 1000);
  REQUIRE(ps.size() == 1 + 3 + 9 + 27);
  REQUIRE(ps.layer_begin(0) == 0);
  REQUIRE(ps.layer_begin(1) == 1);
  REQUIRE(ps.layer_begin(2) == 4);

  for (std::size_t i = 0; i < ps.size(); ++i)
    REQUIRE(ps.index_of(ps.path_at(i)) == i);

  REQUIRE_THROWS_AS(PathSet({-1, 0, 1}, 3, 5), DepthBudgetExceeded);
}

TEST_CASE("energy telescopes through the cascade", "[scattering]") {
  Grid g = test_grid(2048);
  FilterBank bank = build_filter_bank(g, 3);

  for (std::uint64_t seed : {101, 102, 103}) {
    Signal f = in_band_noise(g, bank, seed);
    ScatteringCoefficients sc = scatter(f, bank, 3);

    double windows = scattering_norm(sc);
    double tail = sc.layer_u_norms.back();
    double total = windows * windows + tail * tail;
    REQUIRE(total == Catch::Approx(l2_norm_sq(f)).epsilon(1e-6));
    REQUIRE(sc.layer_u_norms[0] == Catch::Approx(l2_norm(f)).epsilon(1e-12));
  }
}

TEST_CASE("scattering distance is nonexpansive", "[scattering]") {
  Grid g = test_grid(1024);
  FilterBank bank = build_filter_bank(g, 3);

  for (std::uint64_t seed : {7, 8, 9}) {
    Signal f = in_band_noise(g, bank, seed);
    Signal h = in_band_noise(g, bank, seed + 50);
    ScatteringCoefficients sf = scatter(f, bank, 3);
    ScatteringCoefficients sh = scatter(h, bank, 3);

    double dist = scattering_distance(sf, sh);
    REQUIRE(dist <= l2_norm(f - h) * (1.0 + 1e-6));
    REQUIRE(dist == scattering_distance(sh, sf));
    REQUIRE(scattering_distance(sf, sf) == 0.0);
  }
}

TEST_CASE("coarse coefficient storage is lossless", "[scattering]") {
  Grid g = test_grid(1024);
  FilterBank bank = build_filter_bank(g, 3);
  Signal f = in_band_noise(g, bank, 31);
  ScatteringCoefficients sc = scatter(f, bank, 2);

  for (const Path& p : {Path{}, Path{2}, Path{2, 0}}) {
    Signal full = window_output(propagate_path(f, bank, p), bank);
    Signal stored = sc.at(p);
    Signal down = resample_to_grid(full, sc.coarse_grid);
    REQUIRE(l2_norm(stored - down) <= 1e-11 * (l2_norm(full) + 1.0));
    REQUIRE(l2_norm(stored) == Catch::Approx(l2_norm(full)).epsilon(1e-11));
  }
}

TEST_CASE("zero input stays zero", "[scattering]") {
  Grid g = test_grid(512);
  FilterBank bank = build_filter_bank(g, 2);
  ScatteringCoefficients sc = scatter(Signal::zeros(g), bank, 3);
  REQUIRE(scattering_norm(sc) == 0.0);
  for (const Signal& c : sc.coeffs)
    for (std::size_t i = 0; i < c.size(); ++i) REQUIRE(c[i] == cd(0.0, 0.0));
  for (double v : sc.layer_u_norms) REQUIRE(v == 0.0);
}

TEST_CASE("results do not depend on the thread cap", "[scattering]") {
  Grid g = test_grid(1024);
  FilterBank bank = build_filter_bank(g, 3);
  Signal f = in_band_noise(g, bank, 77);

  ScatteringCoefficients one = scatter(f, bank, 3, 50000, 1);
  ScatteringCoefficients four = scatter(f, bank, 3, 50000, 4);

  REQUIRE(one.layer_u_norms == four.layer_u_norms);
  for (std::size_t p = 0; p < one.coeffs.size(); ++p)
    for (std::size_t i = 0; i < one.coeffs[p].size(); ++i)
      REQUIRE(one.coeffs[p][i] == four.coeffs[p][i]);
}

TEST_CASE("modulus homogeneity makes doubling additive", "[scattering]") {
  Grid g = test_grid(1024);
  FilterBank bank = build_filter_bank(g, 3);
  Signal f = in_band_noise(g, bank, 55);
  // S(2f) = 2 S(f) path by path, so S(f + f) - S(f) - S(f) vanishes.
  REQUIRE(check_separation_additivity(f, f, bank, 2) < 1e-10);
}

TEST_CASE("dilation covariance on nested grids", "[scattering]") {
  Grid g = test_grid(2048);
  Signal f = bandlimited_noise(g, 61, 0.5, 8.0);

  const int l = 1;
  FilterBank bank_base = build_filter_bank(g, 3);
  FilterBank bank_dil = build_filter_bank(dilate(f, l).grid(), 2);

  for (const Path& p : {Path{1}, Path{2, 1}}) {
    double defect = check_dilation_covariance(f, bank_dil, bank_base, p, l);
    REQUIRE(defect < 1e-9 * l2_norm(f));
  }

  REQUIRE_THROWS_AS(
      check_dilation_covariance(f, bank_base, bank_base, Path{1}, l),
      StructureMismatch);
}

TEST_CASE("incompatible coefficient sets are rejected", "[scattering]") {
  Grid g = test_grid(512);
  FilterBank b2 = build_filter_bank(g, 2);
  FilterBank b3 = build_filter_bank(g, 3);
  Signal f = in_band_noise(g, b2, 5);
  ScatteringCoefficients sa = scatter(f, b2, 2);
  ScatteringCoefficients sb = scatter(f, b3, 2);
  REQUIRE_THROWS_AS(scattering_distance(sa, sb), StructureMismatch);
}

TEST_CASE("coefficient csv layout", "[scattering]") {
  namespace fs = std::filesystem;
  Grid g = test_grid(512);
  FilterBank bank = build_filter_bank(g, 2);
  Signal f = in_band_noise(g, bank, 91);
  ScatteringCoefficients sc = scatter(f, bank, 2);

  const std::string dir = "test_artifacts/coeffs";
  write_scattering_csv(sc, dir);

  for (int m = 0; m <= 2; ++m) {
    std::ifstream in(dir + "/layer_" + std::to_string(m) + ".csv");
    REQUIRE(in.good());
    std::size_t lines = 0;
    for (std::string line; std::getline(in, line);) ++lines;
    REQUIRE(lines == 1 + (sc.paths.layer_end(m) - sc.paths.layer_begin(m)));
  }

  std::ifstream min(dir + "/manifest.json");
  nlohmann::json man = nlohmann::json::parse(min);
  REQUIRE(man.at("bank_id").get<std::string>() == sc.bank_id);
  REQUIRE(man.at("max_depth").get<int>() == 2);
}
