#pragma once

#include <climits>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wscat/deformation.hpp"
#include "wscat/errors.hpp"
#include "wscat/filter_bank.hpp"
#include "wscat/operator_norm.hpp"
#include "wscat/report.hpp"
#include "wscat/scattering.hpp"
#include "wscat/signal.hpp"

namespace wscat {

// ---------------------------------------------------------------------------
// Config building blocks shared by the runners and the CLI.
// ---------------------------------------------------------------------------

struct GridConfig {
  double origin = -8.0 * kPi;
  double period = 16.0 * kPi;
  std::size_t length = 8192;

  Grid make() const {
    return Grid{origin, period / static_cast<double>(length), length};
  }
};

struct BankConfig {
  int J = 4;
  int j_max = INT_MIN;  // INT_MIN selects the largest grid-admissible octave
  double omega_lo = 1.0;
  int max_depth = 3;
  std::size_t path_cap = 50000;
  double lp_tol = 1e-9;

  FilterBank make(const Grid& grid) const {
    return build_filter_bank(grid, J, j_max, omega_lo);
  }
  FilterBank make(const Grid& grid, int window_scale, int extra_octaves = 0) const {
    int jm = (j_max == INT_MIN) ? INT_MIN : j_max + extra_octaves;
    return build_filter_bank(grid, window_scale, jm, omega_lo);
  }
};

struct SignalConfig {
  std::string kind = "gaussian";  // gaussian | gabor | ramp |
                                  // bandlimited_noise | constant | zero
  double center = 0.0;
  double sigma = 1.0;
  double amplitude = 1.0;
  double freq = 6.0;      // gabor carrier
  double band_lo = 0.0;   // bandlimited_noise
  double band_hi = 16.0;
  std::uint64_t seed = 1;
  double value = 0.0;     // constant
};

inline Signal make_signal(const SignalConfig& cfg, const Grid& grid) {
  validate_grid(grid);
  if (cfg.kind == "zero") return Signal::zeros(grid);
  if (cfg.kind == "constant") {
    std::vector<cd> s(grid.length, cd(cfg.value, 0.0));
    return Signal(grid, std::move(s));
  }
  if (cfg.kind == "ramp") return ramp_signal(grid);
  if (cfg.kind == "bandlimited_noise")
    return bandlimited_noise(grid, cfg.seed, cfg.band_lo, cfg.band_hi);
  if (cfg.kind == "gaussian" || cfg.kind == "gabor") {
    std::vector<cd> s(grid.length);
    for (std::size_t i = 0; i < grid.length; ++i) {
      double u = (grid.point(i) - cfg.center) / cfg.sigma;
      double v = cfg.amplitude * std::exp(-0.5 * u * u);
      if (cfg.kind == "gabor")
        v *= std::cos(cfg.freq * (grid.point(i) - cfg.center));
      s[i] = cd(v, 0.0);
    }
    return Signal(grid, std::move(s));
  }
  throw ConfigError("signal.kind: unknown kind '" + cfg.kind + "'");
}

struct DeformationConfig {
  std::string kind = "zero";  // zero | constant | oscillatory_bump | smooth_random |
                              // profile_eps | sine_packet | sawtooth
  double c = 0.0;             // constant
  int n_osc = 128;            // oscillatory_bump
  double amplitude = -1.0;    // oscillatory_bump (<= 0: largest admissible)
  std::uint64_t seed = 11;    // smooth_random / profile_eps
  double bandwidth = 1.5;
  double lip = 0.3;           // smooth_random Lipschitz target
  double eps = 0.1;           // profile_eps Lipschitz target
  double freq = 4.0;          // sine_packet
  double amp = 0.05;
  double lo = -6.0;           // window for sine_packet / sawtooth
  double hi = 6.0;
  double ramp = 2.0;
  double slope = 0.4;         // sawtooth
  double tooth_width = 1.0;
  double sigma_mult = 4.0;    // sawtooth mollification = sigma_mult * spacing
  double scale = 1.0;         // final multiplier on (tau, tau')
};

inline DeformationField make_field(const DeformationConfig& cfg,
                                   const Grid& grid) {
  DeformationField field;
  if (cfg.kind == "zero")
    field = zero_field(grid);
  else if (cfg.kind == "constant")
    field = constant_field(grid, cfg.c);
  else if (cfg.kind == "oscillatory_bump")
    field = oscillatory_bump_field(grid, cfg.n_osc, cfg.amplitude);
  else if (cfg.kind == "smooth_random")
    field = smooth_random_field(grid, cfg.seed, cfg.bandwidth, cfg.lip);
  else if (cfg.kind == "profile_eps")
    field = smooth_random_field(grid, cfg.seed, cfg.bandwidth, cfg.eps);
  else if (cfg.kind == "sine_packet")
    field = sine_packet_field(grid, cfg.freq, cfg.amp, cfg.lo, cfg.hi, cfg.ramp);
  else if (cfg.kind == "sawtooth")
    field = sawtooth_field(grid, cfg.slope, cfg.tooth_width, cfg.lo, cfg.hi,
                           cfg.ramp, cfg.sigma_mult * grid.spacing);
  else
    throw ConfigError("deformation.kind: unknown kind '" + cfg.kind + "'");

  if (cfg.scale != 1.0) {
    for (auto& v : field.tau) v *= cfg.scale;
    for (auto& v : field.dtau) v *= cfg.scale;
    field.source += ";scaled(" + std::to_string(cfg.scale) + ")";
  }
  return field;
}

// (1/2pi) * integral |f_hat|^2 w(|omega|) d omega, discretized over the bins.
template <typename WeightFn>
double spectral_weighted_energy(const Signal& f, WeightFn&& w) {
  Spectrum F = fourier(f);
  double acc = 0.0;
  for (std::size_t i = 0; i < F.size(); ++i)
    acc += std::norm(F.bins()[i]) * w(std::abs(F.grid().omega(i)));
  return acc / F.grid().period();
}

// ---------------------------------------------------------------------------
// Instability experiment: the oscillatory pair (f_n, tau_n).
// ---------------------------------------------------------------------------

struct InstabilityConfig {
  GridConfig grid{-4.0 * kPi, 16.0 * kPi, 16384};
  BankConfig bank{6, INT_MIN, 1.0, 3, 50000, 1e-9};
  std::vector<int> n_osc_list{64, 128};
  std::vector<int> n_list{0, 1, 2, 3, 4};
  std::vector<double> alpha_list{0.5};
  double amplitude = -1.0;  // <= 0: largest admissible A
  int j_prime = -1;         // window scale of the pro-ratio norm; -1 -> bank.J
  int audit_n_max = 3;      // scale-equivariance audit for 1 <= n <= this
  int min_samples_per_osc = 16;
  unsigned threads = 1;
};

inline ExperimentReport run_instability(const InstabilityConfig& cfg) {
  if (cfg.n_osc_list.empty() || cfg.n_list.empty() || cfg.alpha_list.empty())
    throw ConfigError("experiment: n_osc_list, n_list, alpha_list must be nonempty");

  const Grid grid = cfg.grid.make();
  const Signal f = ramp_signal(grid);
  const double A = cfg.amplitude > 0.0 ? cfg.amplitude
                                       : 0.999 * bump_constants().a_max;
  const int j_prime = cfg.j_prime < 0 ? cfg.bank.J : cfg.j_prime;

  ExperimentReport rep;
  rep.columns = {"n_osc", "n", "J", "dist", "dist_times_n_osc",
                 "g_norm", "g_low_norm", "g_high_norm", "g_low_frac",
                 "g_norm_ratio", "sup_tau", "sup_dtau"};
  for (double a : cfg.alpha_list)
    rep.columns.push_back("tau_calpha_" + detail::format_double(a));
  rep.columns.push_back("u2_norm");
  for (double a : cfg.alpha_list)
    rep.columns.push_back("ratio_pro0_" + detail::format_double(a));
  rep.columns.insert(rep.columns.end(),
                     {"tail_frac", "audit_dist", "audit_rel_err"});

  nlohmann::ordered_json excluded = nlohmann::ordered_json::array();
  double lp_residual_base = 0.0;

  for (int n_osc : cfg.n_osc_list) {
    double samples_per_osc =
        2.0 * kPi / (static_cast<double>(n_osc) * grid.spacing);
    if (samples_per_osc < static_cast<double>(cfg.min_samples_per_osc))
      throw ParameterViolation(
          "run_instability: n_osc=" + std::to_string(n_osc) +
          " leaves fewer than the required samples per oscillation");

    const DeformationField tau = oscillatory_bump_field(grid, n_osc, A);
    const Signal lf_base = apply_deformation(f, tau);

    for (int n : cfg.n_list) {
      ScalePair sp = scale_pair(f, tau, n);
      FilterBank bank_n = cfg.bank.make(sp.f.grid(), cfg.bank.J, n);
      if (n == 0) lp_residual_base = bank_n.lp_residual;

      Signal lfn = Signal::zeros(sp.f.grid());
      try {
        lfn = apply_deformation(sp.f, sp.field);
      } catch (const DomainEscape& e) {
        excluded.push_back({{"n_osc", n_osc}, {"n", n}, {"error", e.what()}});
        continue;
      }

      ScatteringCoefficients sa =
          scatter(sp.f, bank_n, cfg.bank.max_depth, cfg.bank.path_cap,
                  cfg.threads);
      ScatteringCoefficients sb =
          scatter(lfn, bank_n, cfg.bank.max_depth, cfg.bank.path_cap,
                  cfg.threads);
      double dist = scattering_distance(sa, sb);

      Signal g = lfn - sp.f;
      double g_norm = l2_norm(g);
      double omega_c = 0.5 * static_cast<double>(n_osc) *
                       std::pow(2.0, static_cast<double>(n));
      double g_low = l2_norm(band_project(g, Band::low(omega_c)));
      double g_high = l2_norm(band_project(g, Band::high(omega_c)));
      double g_target = A * bump_constants().l2_norm /
                        (std::sqrt(2.0) * static_cast<double>(n_osc));

      double sup_tau_n = sup_abs(sp.field.tau);
      double sup_dtau_n = sup_abs(sp.field.dtau);

      std::vector<double> tau_calpha;
      for (double a : cfg.alpha_list)
        tau_calpha.push_back(
            holder_seminorm(sp.field.tau, sp.f.grid().spacing, a));

      // ||U[P_{J'}]f_n|| (l2 across layers, truncated at max_depth).
      double u2;
      if (j_prime == cfg.bank.J) {
        u2 = u_norm_mixed(sa, NormKind::L2);
      } else {
        FilterBank bank_jp = cfg.bank.make(sp.f.grid(), j_prime, n);
        u2 = u_norm_mixed(sp.f, bank_jp, cfg.bank.max_depth, NormKind::L2,
                          cfg.bank.path_cap);
      }

      double f_norm = l2_norm(sp.f);
      double tail_frac =
          std::max(sa.layer_u_norms.back(), sb.layer_u_norms.back()) /
          (f_norm > 0.0 ? f_norm : 1.0);

      // Scale-equivariance audit: dist(n, J) on G_n vs dist(0, J+n) on G.
      double audit_dist = 0.0, audit_rel = 0.0;
      if (n >= 1 && n <= cfg.audit_n_max) {
        FilterBank bank_jn = cfg.bank.make(grid, cfg.bank.J + n, 0);
        ScatteringCoefficients qa = scatter(f, bank_jn, cfg.bank.max_depth,
                                            cfg.bank.path_cap, cfg.threads);
        ScatteringCoefficients qb = scatter(lf_base, bank_jn,
                                            cfg.bank.max_depth,
                                            cfg.bank.path_cap, cfg.threads);
        audit_dist = scattering_distance(qa, qb);
        audit_rel = dist > 0.0 ? std::abs(dist - audit_dist) / dist : 0.0;
      }

      std::vector<double> row = {
          static_cast<double>(n_osc), static_cast<double>(n),
          static_cast<double>(cfg.bank.J), dist,
          dist * static_cast<double>(n_osc), g_norm, g_low, g_high,
          g_norm > 0.0 ? g_low / g_norm : 0.0,
          g_target > 0.0 ? g_norm / g_target : 0.0, sup_tau_n, sup_dtau_n};
      for (double v : tau_calpha) row.push_back(v);
      row.push_back(u2);
      for (std::size_t ai = 0; ai < cfg.alpha_list.size(); ++ai) {
        double a = cfg.alpha_list[ai];
        double denom = std::pow(2.0, static_cast<double>(n) * (1.0 - a)) *
                       tau_calpha[ai] * u2;
        double factor =
            std::sqrt(std::max(static_cast<double>(j_prime + n), 1.0));
        row.push_back(denom > 0.0 ? dist * factor / denom : 0.0);
      }
      row.insert(row.end(), {tail_frac, audit_dist, audit_rel});
      rep.add_row(row);
    }
  }

  rep.manifest["experiment"] = "instability";
  rep.manifest["A"] = A;
  rep.manifest["bump_sup_deriv"] = bump_constants().sup_deriv;
  rep.manifest["bump_l2_norm"] = bump_constants().l2_norm;
  rep.manifest["J"] = cfg.bank.J;
  rep.manifest["j_prime"] = j_prime;
  rep.manifest["lp_residual"] = lp_residual_base;
  rep.manifest["excluded_rows"] = excluded;
  return rep;
}

// ---------------------------------------------------------------------------
// Stability sweep: dist / (K_{1+alpha}(tau) * ||U[P_J]f||_1).
// ---------------------------------------------------------------------------

struct StabilityConfig {
  GridConfig grid{-8.0 * kPi, 16.0 * kPi, 8192};
  BankConfig bank{4, INT_MIN, 1.0, 3, 50000, 1e-9};
  std::vector<int> J_list{3, 4, 5};
  std::vector<double> alpha_list{0.25, 0.5, 0.75};
  std::vector<SignalConfig> signals;
  std::vector<DeformationConfig> fields;
  unsigned threads = 1;
};

inline std::vector<SignalConfig> default_stability_signals() {
  SignalConfig gauss;
  gauss.kind = "gaussian";
  gauss.center = 0.0;
  gauss.sigma = 1.0;
  SignalConfig gabor;
  gabor.kind = "gabor";
  gabor.center = 0.0;
  gabor.sigma = 1.5;
  gabor.freq = 6.0;
  return {gauss, gabor};
}

inline std::vector<DeformationConfig> default_stability_fields() {
  std::vector<DeformationConfig> out;
  for (double eps : {0.02, 0.05, 0.1, 0.2}) {
    DeformationConfig c;
    c.kind = "profile_eps";
    c.eps = eps;
    c.seed = 11;
    c.bandwidth = 2.0;
    out.push_back(c);
  }
  for (std::uint64_t seed : {21ull, 22ull}) {
    DeformationConfig c;
    c.kind = "smooth_random";
    c.seed = seed;
    c.bandwidth = 1.5;
    c.lip = 0.3;
    out.push_back(c);
  }
  // Frequency ramp at (approximately) fixed C^{1+1/2} size: |tau'|_{C^{1/2}}
  // ~ amp * freq^{3/2}, so amp = k / freq^{3/2} keeps it level while
  // sup|tau'| = amp * freq = k / sqrt(freq) stays under 1/2.
  for (double freq : {1.0, 2.0, 4.0}) {
    DeformationConfig c;
    c.kind = "sine_packet";
    c.freq = freq;
    c.amp = 0.3 / std::pow(freq, 1.5);
    c.lo = -6.0;
    c.hi = 6.0;
    c.ramp = 2.0;
    out.push_back(c);
  }
  return out;
}

inline ExperimentReport run_stability_sweep(const StabilityConfig& cfg_in) {
  StabilityConfig cfg = cfg_in;
  if (cfg.signals.empty()) cfg.signals = default_stability_signals();
  if (cfg.fields.empty()) cfg.fields = default_stability_fields();
  if (cfg.J_list.empty() || cfg.alpha_list.empty())
    throw ConfigError("experiment: J_list and alpha_list must be nonempty");

  const Grid grid = cfg.grid.make();

  ExperimentReport rep;
  rep.columns = {"f_id",   "tau_id", "J",        "alpha",   "eps",
                 "dist",   "k1alpha", "k2",      "u1_norm", "tail_frac",
                 "ratio",  "ratio_k2", "sup_tau", "sup_dtau"};

  struct FieldData {
    DeformationField field;
    DeformationMetrics metrics;
    double eps;
  };
  std::vector<FieldData> fields;
  for (const auto& fc : cfg.fields) {
    FieldData fd{make_field(fc, grid), {},
                 fc.kind == "profile_eps" ? fc.eps : 0.0};
    fd.metrics = compute_metrics(fd.field, cfg.alpha_list);
    if (fd.metrics.sup_dtau > 0.5)
      throw UsabilityViolation("run_stability_sweep: field '" +
                               fd.field.source + "' exceeds sup|tau'| <= 1/2");
    fields.push_back(std::move(fd));
  }

  double max_ratio = 0.0;
  double lp_res = 0.0;

  for (std::size_t fi = 0; fi < cfg.signals.size(); ++fi) {
    Signal f = make_signal(cfg.signals[fi], grid);
    std::vector<Signal> warped;
    warped.reserve(fields.size());
    for (const auto& fd : fields)
      warped.push_back(apply_deformation(f, fd.field));

    for (int J : cfg.J_list) {
      FilterBank bank = cfg.bank.make(grid, J, 0);
      if (fi == 0 && J == cfg.J_list.front()) lp_res = bank.lp_residual;
      ScatteringCoefficients sf =
          scatter(f, bank, cfg.bank.max_depth, cfg.bank.path_cap, cfg.threads);
      double u1 = u_norm_mixed(sf, NormKind::L1);
      double f_norm = l2_norm(f);

      for (std::size_t ti = 0; ti < fields.size(); ++ti) {
        ScatteringCoefficients sw =
            scatter(warped[ti], bank, cfg.bank.max_depth, cfg.bank.path_cap,
                    cfg.threads);
        double dist = scattering_distance(sf, sw);
        double tail =
            std::max(sf.layer_u_norms.back(), sw.layer_u_norms.back()) /
            (f_norm > 0.0 ? f_norm : 1.0);
        double k2 = k2_functional(fields[ti].metrics, J);

        for (double alpha : cfg.alpha_list) {
          double k1a = k1alpha_functional(fields[ti].metrics, J, alpha);
          double denom = k1a * u1;
          double ratio = denom > 0.0 ? dist / denom : 0.0;
          double denom2 = k2 * u1;
          double ratio2 = denom2 > 0.0 ? dist / denom2 : 0.0;
          max_ratio = std::max(max_ratio, ratio);
          rep.add_row({static_cast<double>(fi), static_cast<double>(ti),
                       static_cast<double>(J), alpha, fields[ti].eps, dist,
                       k1a, k2, u1, tail, ratio, ratio2,
                       fields[ti].metrics.sup_tau,
                       fields[ti].metrics.sup_dtau});
        }
      }
    }
  }

  rep.manifest["experiment"] = "stability";
  rep.manifest["max_ratio"] = max_ratio;
  rep.manifest["lp_residual"] = lp_res;
  nlohmann::ordered_json sources = nlohmann::ordered_json::array();
  for (const auto& fd : fields) sources.push_back(fd.field.source);
  rep.manifest["fields"] = sources;
  return rep;
}

// ---------------------------------------------------------------------------
// Translation decay: dist(J) between f and translate(f, c).
// ---------------------------------------------------------------------------

struct TranslationConfig {
  GridConfig grid{-64.0 * kPi, 128.0 * kPi, 8192};
  BankConfig bank{4, INT_MIN, 1.0, 3, 50000, 1e-9};
  std::vector<int> J_list{2, 3, 4, 5, 6, 7};
  SignalConfig signal;  // default gaussian, sigma 1, center 0
  double shift = 0.8;   // 0.1 * (8 sigma) support diameter of the default f
  unsigned threads = 1;
};

inline ExperimentReport run_translation(const TranslationConfig& cfg) {
  if (cfg.J_list.empty()) throw ConfigError("experiment: J_list must be nonempty");
  const Grid grid = cfg.grid.make();
  const Signal f = make_signal(cfg.signal, grid);
  const Signal tf = translate(f, cfg.shift);
  const double f_norm = l2_norm(f);

  ExperimentReport rep;
  rep.columns = {"J", "shift", "dist", "dist_rel", "log2_dist", "tail_frac"};

  std::vector<double> js, logs;
  for (int J : cfg.J_list) {
    FilterBank bank = cfg.bank.make(grid, J, 0);
    ScatteringCoefficients sa =
        scatter(f, bank, cfg.bank.max_depth, cfg.bank.path_cap, cfg.threads);
    ScatteringCoefficients sb =
        scatter(tf, bank, cfg.bank.max_depth, cfg.bank.path_cap, cfg.threads);
    double dist = scattering_distance(sa, sb);
    double tail = std::max(sa.layer_u_norms.back(), sb.layer_u_norms.back()) /
                  (f_norm > 0.0 ? f_norm : 1.0);
    double l2d = dist > 0.0 ? std::log2(dist)
                            : -std::numeric_limits<double>::infinity();
    if (dist > 0.0) {
      js.push_back(static_cast<double>(J));
      logs.push_back(l2d);
    }
    rep.add_row({static_cast<double>(J), cfg.shift, dist,
                 f_norm > 0.0 ? dist / f_norm : 0.0, l2d, tail});
  }

  rep.manifest["experiment"] = "translation";
  if (js.size() >= 2)
    rep.manifest["log2_slope"] = least_squares_slope(js, logs);
  else
    rep.manifest["log2_slope"] = nullptr;
  bool monotone = true;
  for (std::size_t r = 1; r < rep.rows.size(); ++r)
    if (rep.cell(r, "dist") > rep.cell(r - 1, "dist") + 1e-9) monotone = false;
  rep.manifest["nonincreasing"] = monotone;
  return rep;
}

// ---------------------------------------------------------------------------
// Band-limited Lipschitz loss: dist(R) for f_R = P_{<=R} f, fixed rough tau.
// ---------------------------------------------------------------------------

struct BandlimitedConfig {
  GridConfig grid{-8.0 * kPi, 16.0 * kPi, 8192};
  BankConfig bank{4, INT_MIN, 1.0, 3, 50000, 1e-9};
  std::vector<double> R_list{8.0, 16.0, 32.0, 64.0};
  SignalConfig base;       // broad-spectrum base signal
  DeformationConfig tau;   // default: mollified sawtooth
  double beta = 2.5;
  unsigned threads = 1;

  BandlimitedConfig() {
    base.kind = "gaussian";
    base.center = 0.0;
    base.sigma = 1.0 / 64.0;
    tau.kind = "sawtooth";
    tau.slope = 0.4;
    tau.tooth_width = 1.0;
    tau.lo = -4.0;
    tau.hi = 4.0;
    tau.ramp = 1.0;
    tau.sigma_mult = 4.0;
  }
};

inline ExperimentReport run_bandlimited_lipschitz(const BandlimitedConfig& cfg) {
  if (cfg.R_list.empty()) throw ConfigError("experiment: R_list must be nonempty");
  const Grid grid = cfg.grid.make();
  const Signal base = make_signal(cfg.base, grid);
  const DeformationField tau = make_field(cfg.tau, grid);
  const double two_j = std::pow(2.0, static_cast<double>(cfg.bank.J));
  FilterBank bank = cfg.bank.make(grid);

  ExperimentReport rep;
  rep.columns = {"R",        "dist",     "log_dist", "log_arg",
                 "logw_norm", "f_norm",  "tail_frac"};

  std::vector<double> xs, ys;
  for (double R : cfg.R_list) {
    Signal fr = band_project(base, Band::low(R));
    double nrm = l2_norm(fr);
    if (nrm == 0.0)
      throw ParameterViolation("run_bandlimited_lipschitz: empty band at R=" +
                               std::to_string(R));
    fr = cd(1.0 / nrm, 0.0) * fr;

    Signal lfr = apply_deformation(fr, tau);
    ScatteringCoefficients sa =
        scatter(fr, bank, cfg.bank.max_depth, cfg.bank.path_cap, cfg.threads);
    ScatteringCoefficients sb =
        scatter(lfr, bank, cfg.bank.max_depth, cfg.bank.path_cap, cfg.threads);
    double dist = scattering_distance(sa, sb);
    double log_arg = std::log(1.0 + two_j * R);
    double logw = std::sqrt(spectral_weighted_energy(fr, [&](double om) {
      double t = std::log(std::exp(1.0) + two_j * om);
      return std::pow(t, cfg.beta);
    }));
    double tail = std::max(sa.layer_u_norms.back(), sb.layer_u_norms.back());
    double ld = dist > 0.0 ? std::log(dist)
                           : -std::numeric_limits<double>::infinity();
    if (dist > 0.0) {
      xs.push_back(log_arg);
      ys.push_back(ld);
    }
    rep.add_row({R, dist, ld, log_arg, logw, 1.0, tail});
  }

  rep.manifest["experiment"] = "bandlimited";
  rep.manifest["beta"] = cfg.beta;
  rep.manifest["tau_source"] = tau.source;
  rep.manifest["sup_dtau"] = sup_abs(tau.dtau);
  if (xs.size() >= 2)
    rep.manifest["log_slope"] = least_squares_slope(xs, ys);
  else
    rep.manifest["log_slope"] = nullptr;
  return rep;
}

// ---------------------------------------------------------------------------
// Energy decay across layers at window scale J = 0.
// ---------------------------------------------------------------------------

struct DecayProfile {
  double a = 2.0;
  double r = 1.0;
};

inline double decay_profile_value(const DecayProfile& p, int m, double omega) {
  if (!(p.a > 1.0) || !(p.r > 0.0))
    throw ParameterViolation("decay profile: requires a > 1 and r > 0");
  double s = p.r * std::pow(p.a, static_cast<double>(m));
  double t = omega / s;
  return 1.0 - std::exp(-2.0 * t * t);
}

struct DecayConfig {
  GridConfig grid{-8.0 * kPi, 16.0 * kPi, 8192};
  BankConfig bank{0, INT_MIN, 1.0, 4, 50000, 1e-9};
  std::vector<SignalConfig> signals;
  std::vector<DecayProfile> profiles{{2.0, 1.0}};
  double beta = 2.5;
  unsigned threads = 1;
};

inline std::vector<SignalConfig> default_decay_signals() {
  SignalConfig gauss;
  gauss.kind = "gaussian";
  gauss.sigma = 1.0;
  SignalConfig gabor;
  gabor.kind = "gabor";
  gabor.sigma = 2.0;
  gabor.freq = 8.0;
  SignalConfig ramp;
  ramp.kind = "ramp";
  return {gauss, gabor, ramp};
}

inline ExperimentReport run_energy_decay(const DecayConfig& cfg_in) {
  DecayConfig cfg = cfg_in;
  if (cfg.signals.empty()) cfg.signals = default_decay_signals();
  if (cfg.profiles.empty()) throw ConfigError("experiment: profiles must be nonempty");

  const Grid grid = cfg.grid.make();
  FilterBank bank = cfg.bank.make(grid, 0, 0);

  ExperimentReport rep;
  rep.columns = {"signal_id", "profile_id", "a", "r", "m",
                 "layer_norm", "layer_frac", "cap_lhs", "cap_rhs",
                 "cap_pass", "embed_ratio_log", "embed_ratio_logbeta",
                 "tail_frac"};

  for (std::size_t si = 0; si < cfg.signals.size(); ++si) {
    Signal f = make_signal(cfg.signals[si], grid);
    double f_norm = l2_norm(f);
    ScatteringCoefficients s =
        scatter(f, bank, cfg.bank.max_depth, cfg.bank.path_cap, cfg.threads);

    double u2 = u_norm_mixed(s, NormKind::L2);
    double u1 = u_norm_mixed(s, NormKind::L1);
    double i_log = spectral_weighted_energy(
        f, [](double om) { return std::log(std::exp(1.0) + om); });
    double i_logb = spectral_weighted_energy(f, [&](double om) {
      return std::pow(std::log(std::exp(1.0) + om), cfg.beta);
    });
    double embed_log = i_log > 0.0 ? u2 * u2 / i_log : 0.0;
    double embed_logb = i_logb > 0.0 ? u1 / std::sqrt(i_logb) : 0.0;
    double tail = s.layer_u_norms.back() / (f_norm > 0.0 ? f_norm : 1.0);

    for (std::size_t pi = 0; pi < cfg.profiles.size(); ++pi) {
      const DecayProfile& prof = cfg.profiles[pi];
      for (int m = 0; m <= cfg.bank.max_depth; ++m) {
        double layer = s.layer_u_norms[static_cast<std::size_t>(m)];
        double lhs = layer * layer;
        double rhs = spectral_weighted_energy(f, [&](double om) {
          return decay_profile_value(prof, m, om);
        });
        rep.add_row({static_cast<double>(si), static_cast<double>(pi),
                     prof.a, prof.r, static_cast<double>(m), layer,
                     f_norm > 0.0 ? layer / f_norm : 0.0, lhs, rhs,
                     lhs <= rhs * (1.0 + 1e-9) ? 1.0 : 0.0, embed_log,
                     embed_logb, tail});
      }
    }
  }

  rep.manifest["experiment"] = "decay";
  rep.manifest["lp_residual"] = bank.lp_residual;
  rep.manifest["beta"] = cfg.beta;
  return rep;
}

// ---------------------------------------------------------------------------
// Single-pair deformation report (CLI `deform`).
// ---------------------------------------------------------------------------

struct DeformReportConfig {
  GridConfig grid;
  BankConfig bank;
  SignalConfig signal;
  DeformationConfig field;
  std::vector<double> alpha_list{0.5};
  bool allow_unsafe = false;
  unsigned threads = 1;
};

struct DeformReportResult {
  ExperimentReport report;
  Signal warped;
  DeformationField field;
};

inline DeformReportResult run_deform_report(const DeformReportConfig& cfg) {
  if (cfg.alpha_list.empty())
    throw ConfigError("experiment.alpha_list: must be nonempty");
  const Grid grid = cfg.grid.make();
  Signal f = make_signal(cfg.signal, grid);
  DeformationField field = make_field(cfg.field, grid);
  Signal lf = apply_deformation(f, field, cfg.allow_unsafe);

  DeformationMetrics metrics = compute_metrics(field, cfg.alpha_list);
  FilterBank bank = cfg.bank.make(grid);
  ScatteringCoefficients sa =
      scatter(f, bank, cfg.bank.max_depth, cfg.bank.path_cap, cfg.threads);
  ScatteringCoefficients sb =
      scatter(lf, bank, cfg.bank.max_depth, cfg.bank.path_cap, cfg.threads);
  double dist = scattering_distance(sa, sb);

  ExperimentReport rep;
  rep.columns = {"J", "f_norm", "g_norm", "dist", "sup_tau", "sup_dtau",
                 "osc_tau", "sup_d2tau", "k2"};
  std::vector<double> row = {static_cast<double>(cfg.bank.J), l2_norm(f),
                             l2_norm(lf - f), dist, metrics.sup_tau,
                             metrics.sup_dtau, metrics.osc_tau,
                             metrics.sup_d2tau,
                             k2_functional(metrics, cfg.bank.J)};
  for (double a : cfg.alpha_list) {
    rep.columns.push_back("holder_dtau_" + detail::format_double(a));
    row.push_back(metrics.holder_dtau.at(a));
  }
  for (double a : cfg.alpha_list) {
    rep.columns.push_back("k1alpha_" + detail::format_double(a));
    row.push_back(k1alpha_functional(metrics, cfg.bank.J, a));
  }
  rep.add_row(row);

  rep.manifest["experiment"] = "deform";
  rep.manifest["field_source"] = field.source;
  rep.manifest["bank_id"] = bank.id;
  return DeformReportResult{std::move(rep), std::move(lf), std::move(field)};
}

// ---------------------------------------------------------------------------
// Commutator norms across a deformation sweep (small grids).
// ---------------------------------------------------------------------------

struct CommutatorConfig {
  GridConfig grid{-8.0 * kPi, 16.0 * kPi, 256};
  BankConfig bank{2, INT_MIN, 1.0, 3, 50000, 1e-9};
  std::vector<DeformationConfig> fields;
  double alpha = 0.5;
  PowerIterOptions power;
  bool dense_check = true;
  unsigned threads = 1;
};

inline std::vector<DeformationConfig> default_commutator_fields() {
  DeformationConfig zero;
  zero.kind = "zero";
  DeformationConfig cst;
  cst.kind = "constant";
  cst.c = 0.1;
  DeformationConfig rnd;
  rnd.kind = "smooth_random";
  rnd.seed = 7;
  rnd.bandwidth = 0.5;
  rnd.lip = 0.1;
  return {zero, cst, rnd};
}

inline ExperimentReport run_commutator(const CommutatorConfig& cfg_in) {
  CommutatorConfig cfg = cfg_in;
  if (cfg.fields.empty()) cfg.fields = default_commutator_fields();
  const Grid grid = cfg.grid.make();
  FilterBank bank = cfg.bank.make(grid);

  ExperimentReport rep;
  rep.columns = {"field_id",  "norm",    "iterations", "residual",
                 "converged", "k1alpha", "ratio",      "dense_norm",
                 "dense_rel_err"};

  for (std::size_t ti = 0; ti < cfg.fields.size(); ++ti) {
    DeformationField field = make_field(cfg.fields[ti], grid);
    CommutatorResult res =
        commutator_bound_ratio(bank, field, cfg.alpha, cfg.power);
    double dense = 0.0, rel = 0.0;
    if (cfg.dense_check) {
      LinearOperator op = commutator_handle(bank, field);
      dense = dense_operator_norm(op).value;
      rel = dense > 1e-12 ? std::abs(res.norm.value - dense) / dense
                          : std::abs(res.norm.value - dense);
    }
    rep.add_row({static_cast<double>(ti), res.norm.value,
                 static_cast<double>(res.norm.iterations), res.norm.residual,
                 res.norm.converged ? 1.0 : 0.0, res.k1alpha, res.ratio, dense,
                 rel});
  }

  rep.manifest["experiment"] = "commutator";
  rep.manifest["alpha"] = cfg.alpha;
  rep.manifest["lp_residual"] = bank.lp_residual;
  return rep;
}

}  // namespace wscat
