#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "wscat/experiments.hpp"

using namespace wscat;

TEST_CASE("oscillatory-pair experiment: ratios, audit, determinism",
          "[experiments]") {
  InstabilityConfig cfg;
  cfg.grid = GridConfig{-4.0 * kPi, 16.0 * kPi, 4096};
  cfg.bank.J = 4;
  cfg.n_osc_list = {16};
  cfg.n_list = {0, 1};
  cfg.audit_n_max = 1;

  ExperimentReport rep = run_instability(cfg);
  REQUIRE(rep.rows.size() == 2);
  REQUIRE(rep.manifest["excluded_rows"].empty());

  for (std::size_t r = 0; r < rep.rows.size(); ++r) {
    REQUIRE(rep.cell(r, "dist") > 0.0);
    REQUIRE(rep.cell(r, "g_norm_ratio") == Catch::Approx(1.0).margin(0.2));
    REQUIRE(rep.cell(r, "g_low_frac") < 0.15);
    REQUIRE(rep.cell(r, "sup_dtau") < 0.5);
    REQUIRE(rep.cell(r, "ratio_pro0_0.5") > 0.0);
  }
  // tau_n shrinks by 2^{-n} in sup and 2^{-n/2} in C^{1/2} (exact relabeling)
  REQUIRE(rep.cell(1, "sup_tau") ==
          Catch::Approx(0.5 * rep.cell(0, "sup_tau")).epsilon(1e-12));
  REQUIRE(rep.cell(1, "tau_calpha_0.5") ==
          Catch::Approx(rep.cell(0, "tau_calpha_0.5") / std::sqrt(2.0))
              .epsilon(1e-12));
  // dilating (f, tau) while deepening the window leaves the distance intact
  REQUIRE(rep.cell(1, "audit_dist") > 0.0);
  REQUIRE(rep.cell(1, "audit_rel_err") < 0.05);

  ExperimentReport again = run_instability(cfg);
  REQUIRE(again.rows == rep.rows);

  cfg.n_list.clear();
  REQUIRE_THROWS_AS(run_instability(cfg), ConfigError);
}

TEST_CASE("instability rejects undersampled oscillations", "[experiments]") {
  InstabilityConfig cfg;
  cfg.grid = GridConfig{-4.0 * kPi, 16.0 * kPi, 1024};
  cfg.bank.J = 3;
  cfg.n_osc_list = {64};  // 2 samples per oscillation on this grid
  cfg.n_list = {0};
  REQUIRE_THROWS_AS(run_instability(cfg), ParameterViolation);
}

TEST_CASE("stability sweep reports bounded ratios", "[experiments]") {
  StabilityConfig cfg;
  cfg.grid.length = 2048;
  cfg.J_list = {3};
  cfg.alpha_list = {0.5};
  DeformationConfig f1;
  f1.kind = "profile_eps";
  f1.eps = 0.1;
  f1.seed = 11;
  f1.bandwidth = 2.0;
  DeformationConfig f2;
  f2.kind = "sine_packet";
  f2.freq = 2.0;
  f2.amp = 0.1;
  cfg.fields = {f1, f2};

  ExperimentReport rep = run_stability_sweep(cfg);
  REQUIRE(rep.rows.size() == 4);  // 2 signals x 1 J x 2 fields x 1 alpha

  double max_ratio = 0.0;
  for (std::size_t r = 0; r < rep.rows.size(); ++r) {
    REQUIRE(rep.cell(r, "dist") > 0.0);
    REQUIRE(rep.cell(r, "k1alpha") > 0.0);
    REQUIRE(rep.cell(r, "ratio") > 0.0);
    REQUIRE(rep.cell(r, "sup_dtau") <= 0.5);
    REQUIRE(std::isfinite(rep.cell(r, "ratio_k2")));
    max_ratio = std::max(max_ratio, rep.cell(r, "ratio"));
  }
  REQUIRE(rep.manifest["max_ratio"].get<double>() ==
          Catch::Approx(max_ratio));

  // the eps metadata column survives only for the profile family
  REQUIRE(rep.cell(0, "eps") == 0.1);
  REQUIRE(rep.cell(1, "eps") == 0.0);
}

TEST_CASE("translation distance shrinks as the window grows", "[experiments]") {
  TranslationConfig cfg;
  cfg.grid.length = 2048;
  cfg.J_list = {2, 3, 4};

  ExperimentReport rep = run_translation(cfg);
  REQUIRE(rep.rows.size() == 3);
  REQUIRE(rep.manifest["nonincreasing"].get<bool>());
  REQUIRE(rep.manifest["log2_slope"].get<double>() < -0.5);
  for (std::size_t r = 0; r < rep.rows.size(); ++r)
    REQUIRE(rep.cell(r, "dist") > 0.0);
}

TEST_CASE("band growth raises the deformation loss slowly", "[experiments]") {
  BandlimitedConfig cfg;
  cfg.grid.length = 2048;
  cfg.R_list = {4.0, 8.0, 16.0};

  ExperimentReport rep = run_bandlimited_lipschitz(cfg);
  REQUIRE(rep.rows.size() == 3);
  for (std::size_t r = 0; r < rep.rows.size(); ++r) {
    REQUIRE(rep.cell(r, "dist") > 0.0);
    REQUIRE(rep.cell(r, "f_norm") == 1.0);
    REQUIRE(rep.cell(r, "logw_norm") > 0.0);
  }
  REQUIRE(rep.cell(2, "log_arg") > rep.cell(0, "log_arg"));
  REQUIRE_FALSE(rep.manifest["log_slope"].is_null());
  REQUIRE(std::abs(rep.manifest["log_slope"].get<double>()) < 2.0);
}

TEST_CASE("decay profile hits its calibration point exactly", "[experiments]") {
  DecayProfile p{2.0, 1.0};
  for (int m = 0; m <= 6; ++m) {
    double omega = p.r * std::pow(p.a, m);
    REQUIRE(decay_profile_value(p, m, omega) ==
            Catch::Approx(1.0 - std::exp(-2.0)).epsilon(1e-12));
  }
  REQUIRE(decay_profile_value(p, 0, 0.0) == 0.0);
  REQUIRE(decay_profile_value(p, 0, 3.0) > decay_profile_value(p, 2, 3.0));
  REQUIRE_THROWS_AS(decay_profile_value({1.0, 1.0}, 0, 1.0),
                    ParameterViolation);
  REQUIRE_THROWS_AS(decay_profile_value({2.0, 0.0}, 0, 1.0),
                    ParameterViolation);
}

TEST_CASE("layer energies fall under the spectral profile", "[experiments]") {
  DecayConfig cfg;
  cfg.grid.length = 2048;
  cfg.bank.max_depth = 3;
  SignalConfig gauss;
  gauss.kind = "gaussian";
  gauss.sigma = 1.0;
  cfg.signals = {gauss};

  ExperimentReport rep = run_energy_decay(cfg);
  REQUIRE(rep.rows.size() == 4);  // m = 0..3
  for (std::size_t r = 0; r < rep.rows.size(); ++r) {
    if (rep.cell(r, "m") < 1.0) continue;  // m = 0 compares f against a strict cap
    REQUIRE(rep.cell(r, "cap_pass") == 1.0);
  }
  REQUIRE(rep.cell(3, "layer_frac") < 0.1);
  REQUIRE(rep.cell(0, "embed_ratio_log") > 0.0);
  REQUIRE(rep.cell(0, "embed_ratio_logbeta") > 0.0);
}

TEST_CASE("commutator sweep separates flat and generic fields",
          "[experiments]") {
  CommutatorConfig cfg;  // 256-point grid, zero / constant / random fields

  ExperimentReport rep = run_commutator(cfg);
  REQUIRE(rep.rows.size() == 3);
  for (std::size_t r = 0; r < rep.rows.size(); ++r)
    REQUIRE(rep.cell(r, "converged") == 1.0);

  REQUIRE(rep.cell(0, "norm") < 1e-10);
  REQUIRE(rep.cell(0, "ratio") == 0.0);
  REQUIRE(rep.cell(1, "norm") < 1e-8);
  REQUIRE(rep.cell(2, "norm") > 1e-6);
  REQUIRE(rep.cell(2, "k1alpha") > 0.0);
  REQUIRE(rep.cell(2, "dense_rel_err") < 1e-3);
}

TEST_CASE("single-pair deformation report is deterministic", "[experiments]") {
  DeformReportConfig cfg;
  cfg.grid.length = 2048;
  cfg.bank.J = 3;
  cfg.signal.kind = "gabor";
  cfg.field.kind = "smooth_random";
  cfg.field.seed = 3;
  cfg.field.lip = 0.2;

  DeformReportResult a = run_deform_report(cfg);
  DeformReportResult b = run_deform_report(cfg);
  REQUIRE(a.report.rows == b.report.rows);
  REQUIRE(a.report.rows.size() == 1);
  REQUIRE(a.report.cell(0, "g_norm") > 0.0);
  REQUIRE(a.report.cell(0, "dist") > 0.0);
  REQUIRE(a.report.cell(0, "k2") > 0.0);
  REQUIRE(a.report.cell(0, "k1alpha_0.5") >=
          a.report.cell(0, "holder_dtau_0.5"));
  REQUIRE(l2_norm(a.warped - b.warped) == 0.0);
}
