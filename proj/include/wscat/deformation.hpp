#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "wscat/errors.hpp"
#include "wscat/filter_bank.hpp"  // smooth_step_nu
#include "wscat/signal.hpp"

namespace wscat {

// ---------------------------------------------------------------------------
// Smooth building blocks (C-infinity, exactly 0/1 outside the transitions).
// ---------------------------------------------------------------------------

inline double nu_prime(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  double a = std::exp(-1.0 / t);
  double b = std::exp(-1.0 / (1.0 - t));
  double da = a / (t * t);
  double db = b / ((1.0 - t) * (1.0 - t));
  double s = a + b;
  return (da * b + a * db) / (s * s);
}

// Plateau window: 1 on [lo+ramp, hi-ramp], 0 outside [lo, hi].
inline double plateau(double x, double lo, double hi, double ramp) {
  return smooth_step_nu((x - lo) / ramp) * smooth_step_nu((hi - x) / ramp);
}

inline double plateau_deriv(double x, double lo, double hi, double ramp) {
  double up = smooth_step_nu((x - lo) / ramp);
  double dn = smooth_step_nu((hi - x) / ramp);
  return nu_prime((x - lo) / ramp) / ramp * dn -
         up * nu_prime((hi - x) / ramp) / ramp;
}

// C-infinity bump on (0, 2*pi): exp(1 - 1/(1-u^2)) with u = (x-pi)/pi.
// Equals 1 at x = pi and vanishes with all derivatives at 0 and 2*pi.
inline double bump_envelope(double x) {
  double u = (x - kPi) / kPi;
  double w = 1.0 - u * u;
  if (w <= 0.0) return 0.0;
  return std::exp(1.0 - 1.0 / w);
}

inline double bump_envelope_deriv(double x) {
  double u = (x - kPi) / kPi;
  double w = 1.0 - u * u;
  if (w <= 0.0) return 0.0;
  return bump_envelope(x) * (-2.0 * u / (w * w)) / kPi;
}

// Grid-independent constants of the bump: sup|phi'|, ||phi||_{L2} and the
// largest amplitude A with A*(1 + sup|phi'|) <= 1/2.  Evaluated once on a
// fixed dense quadrature so every experiment row sees identical values.
struct BumpConstants {
  double sup_deriv;
  double l2_norm;
  double a_max;
};

inline const BumpConstants& bump_constants() {
  static const BumpConstants c = [] {
    const std::size_t n = 1 << 16;
    const double h = 2.0 * kPi / static_cast<double>(n);
    double sup_d = 0.0, sum_sq = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
      double x = h * static_cast<double>(i);
      sup_d = std::max(sup_d, std::abs(bump_envelope_deriv(x)));
      double v = bump_envelope(x);
      double w = (i == 0 || i == n) ? 0.5 : 1.0;  // trapezoid
      sum_sq += w * v * v;
    }
    BumpConstants out;
    out.sup_deriv = sup_d;
    out.l2_norm = std::sqrt(sum_sq * h);
    out.a_max = 0.5 / (1.0 + sup_d);
    return out;
  }();
  return c;
}

// ---------------------------------------------------------------------------
// Deformation fields: tau and its derivative sampled on a grid.
// ---------------------------------------------------------------------------

struct DeformationField {
  Grid grid;
  std::vector<double> tau;
  std::vector<double> dtau;
  std::string source;

  Signal tau_signal() const {
    std::vector<cd> s(tau.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = cd(tau[i], 0.0);
    return Signal(grid, std::move(s));
  }
};

inline double sup_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

namespace detail {

// Spectral derivative of real samples (Nyquist bin zeroed so the result
// stays real).
inline std::vector<double> spectral_derivative(const Grid& g,
                                               const std::vector<double>& v) {
  std::vector<cd> bins(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) bins[i] = cd(v[i], 0.0);
  fft_inplace(bins);
  for (std::size_t i = 0; i < bins.size(); ++i) {
    if (g.bin_to_k(i) == -static_cast<long>(g.length / 2))
      bins[i] = cd(0.0, 0.0);
    else
      bins[i] *= cd(0.0, g.omega(i));
  }
  ifft_inplace(bins);
  std::vector<double> out(v.size());
  double inv_n = 1.0 / static_cast<double>(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = bins[i].real() * inv_n;
  return out;
}

}  // namespace detail

inline DeformationField zero_field(const Grid& grid) {
  validate_grid(grid);
  return DeformationField{grid, std::vector<double>(grid.length, 0.0),
                          std::vector<double>(grid.length, 0.0), "zero"};
}

inline DeformationField constant_field(const Grid& grid, double c) {
  validate_grid(grid);
  return DeformationField{grid, std::vector<double>(grid.length, c),
                          std::vector<double>(grid.length, 0.0),
                          "constant(" + std::to_string(c) + ")"};
}

// Arbitrary samples; the derivative is computed spectrally, so the samples
// should describe a smooth periodic function resolved by the grid.
inline DeformationField tabulated_field(const Grid& grid,
                                        std::vector<double> samples,
                                        std::string source = "tabulated") {
  validate_grid(grid);
  if (samples.size() != grid.length)
    throw ParameterViolation("deformation: sample count does not match grid");
  auto dtau = detail::spectral_derivative(grid, samples);
  return DeformationField{grid, std::move(samples), std::move(dtau),
                          std::move(source)};
}

// The oscillatory instability field
//   tau(x) = -(A/N) sin(Nx) phi(x),  phi = bump_envelope on (0, 2*pi),
// with A*(1 + sup|phi'|) <= 1/2 so sup|tau'| <= 1/2 for every N >= 1.
// Pass amplitude <= 0 to use the largest admissible A.
inline DeformationField oscillatory_bump_field(const Grid& grid, int n_osc,
                                     double amplitude = -1.0) {
  validate_grid(grid);
  if (n_osc < 1)
    throw ParameterViolation("oscillatory_bump_field: oscillation count must be >= 1");
  // at least 4 samples per oscillation of sin(Nx)
  if (2.0 * static_cast<double>(n_osc) > grid.nyquist())
    throw NyquistViolation(
        "oscillatory_bump_field: oscillation frequency too high for the grid");
  const BumpConstants& bc = bump_constants();
  double A = amplitude > 0.0 ? amplitude : 0.999 * bc.a_max;
  if (A * (1.0 + bc.sup_deriv) > 0.5 + 1e-12)
    throw ParameterViolation(
        "oscillatory_bump_field: amplitude violates A*(1+sup|phi'|) <= 1/2");

  const double N = static_cast<double>(n_osc);
  std::vector<double> tau(grid.length), dtau(grid.length);
  for (std::size_t i = 0; i < grid.length; ++i) {
    double x = grid.point(i);
    double p = bump_envelope(x);
    double dp = bump_envelope_deriv(x);
    double s = std::sin(N * x), c = std::cos(N * x);
    tau[i] = -(A / N) * s * p;
    dtau[i] = -A * c * p - (A / N) * s * dp;
  }
  return DeformationField{grid, std::move(tau), std::move(dtau),
                          "oscillatory_bump(N=" + std::to_string(n_osc) + ")"};
}

// Real band-limited noise scaled to a prescribed Lipschitz constant.
inline DeformationField smooth_random_field(const Grid& grid,
                                            std::uint64_t seed,
                                            double bandwidth,
                                            double lip_target) {
  Signal noise = bandlimited_noise(grid, seed, 0.0, bandwidth);
  std::vector<double> tau(grid.length);
  for (std::size_t i = 0; i < grid.length; ++i) tau[i] = noise[i].real();
  auto dtau = detail::spectral_derivative(grid, tau);
  double sup_d = sup_abs(dtau);
  double scale = sup_d > 0.0 ? lip_target / sup_d : 0.0;
  for (auto& v : tau) v *= scale;
  for (auto& v : dtau) v *= scale;
  std::ostringstream os;
  os << "smooth_random(seed=" << seed << ",bw=" << bandwidth
     << ",lip=" << lip_target << ")";
  return DeformationField{grid, std::move(tau), std::move(dtau), os.str()};
}

// Windowed sine packet amp*sin(freq*x)*plateau, with analytic derivative.
inline DeformationField sine_packet_field(const Grid& grid, double freq,
                                          double amplitude, double lo,
                                          double hi, double ramp) {
  validate_grid(grid);
  if (2.0 * freq > grid.nyquist())
    throw NyquistViolation("sine_packet_field: frequency too high for grid");
  std::vector<double> tau(grid.length), dtau(grid.length);
  for (std::size_t i = 0; i < grid.length; ++i) {
    double x = grid.point(i);
    double w = plateau(x, lo, hi, ramp);
    double dw = plateau_deriv(x, lo, hi, ramp);
    tau[i] = amplitude * std::sin(freq * x) * w;
    dtau[i] = amplitude * (freq * std::cos(freq * x) * w +
                           std::sin(freq * x) * dw);
  }
  std::ostringstream os;
  os << "sine_packet(freq=" << freq << ",amp=" << amplitude << ")";
  return DeformationField{grid, std::move(tau), std::move(dtau), os.str()};
}

// Windowed triangle wave mollified by a Gaussian of width sigma: Lipschitz
// with a large C^{1+alpha} seminorm; the classic near-worst case for the
// stability bound.
inline DeformationField sawtooth_field(const Grid& grid, double slope,
                                       double tooth_width, double lo,
                                       double hi, double ramp,
                                       double sigma) {
  validate_grid(grid);
  const double half = 0.5 * tooth_width;
  std::vector<cd> bins(grid.length);
  for (std::size_t i = 0; i < grid.length; ++i) {
    double x = grid.point(i);
    double phase = std::fmod(x - lo, tooth_width);
    if (phase < 0.0) phase += tooth_width;
    double tri = (phase < half) ? phase : tooth_width - phase;  // in [0, half]
    double val = slope * (tri - 0.25 * tooth_width);            // zero mean
    bins[i] = cd(val * plateau(x, lo, hi, ramp), 0.0);
  }
  fft_inplace(bins);
  for (std::size_t i = 0; i < grid.length; ++i) {
    double om = grid.omega(i);
    bins[i] *= std::exp(-0.5 * om * om * sigma * sigma);
  }
  ifft_inplace(bins);
  std::vector<double> tau(grid.length);
  double inv_n = 1.0 / static_cast<double>(grid.length);
  for (std::size_t i = 0; i < grid.length; ++i)
    tau[i] = bins[i].real() * inv_n;
  auto dtau = detail::spectral_derivative(grid, tau);
  std::ostringstream os;
  os << "sawtooth(slope=" << slope << ",width=" << tooth_width << ")";
  return DeformationField{grid, std::move(tau), std::move(dtau), os.str()};
}

// ---------------------------------------------------------------------------
// Warping:  L_tau f(x) = f(x - tau(x)).
// ---------------------------------------------------------------------------

// When modeling functions on the line with a periodic grid, a warp that
// pulls real content across the periodization seam silently corrupts the
// model; SeamPolicy::Check detects that.  On genuinely periodic data the
// wrap-around is exact and SeamPolicy::Periodic admits it.
enum class SeamPolicy { Check, Periodic };

// Samples with tau == 0 are copied through unchanged; the rest are evaluated
// by trigonometric interpolation at x - tau(x).  Throws UsabilityViolation
// when sup|tau'| > 1/2 (unless overridden) and DomainEscape when the warp
// pulls non-negligible content across the periodization seam.
inline Signal apply_deformation(const Signal& f, const DeformationField& field,
                                bool allow_unsafe = false,
                                SeamPolicy seam = SeamPolicy::Check) {
  require_same_grid(f.grid(), field.grid, "apply_deformation");
  const Grid& g = f.grid();
  if (!allow_unsafe) {
    double lip = sup_abs(field.dtau);
    if (lip > 0.5)
      throw UsabilityViolation(
          "apply_deformation: sup|tau'| = " + std::to_string(lip) +
          " exceeds 1/2");
  }

  std::vector<std::size_t> moved;
  std::vector<double> warp;
  moved.reserve(g.length);
  warp.reserve(g.length);
  for (std::size_t i = 0; i < g.length; ++i) {
    if (field.tau[i] == 0.0) continue;
    moved.push_back(i);
    warp.push_back(g.point(i) - field.tau[i]);
  }

  std::vector<cd> out = f.samples();
  if (!moved.empty()) {
    std::vector<cd> values = resample_at(f, warp);
    const double hi = g.origin + g.period();
    const double tol = 1e-9 * std::max(1.0, sup_norm(f));
    for (std::size_t m = 0; m < moved.size(); ++m) {
      double w = warp[m];
      if (seam == SeamPolicy::Check && (w < g.origin || w >= hi) &&
          std::abs(values[m]) > tol)
        throw DomainEscape(
            "apply_deformation: warp moves signal content across the "
            "periodization seam near x = " + std::to_string(g.point(moved[m])));
      out[moved[m]] = values[m];
    }
  }
  return Signal(g, std::move(out));
}

// Numerical inverse of the warp x -> x - tau(x) on the grid, plus the
// change-of-variables weight 1/(1 - tau'(xi)).  Fixed-point iteration
// x <- u + tau(x); with sup|tau'| <= 1/2 the map is a contraction and the
// residual |xi - tau(xi) - u| is driven below 1e-12 (at most 200 sweeps,
// at least 30).  O(N^2) per sweep; intended for the small operator grids.
struct WarpInverse {
  std::vector<double> xi;      // xi(u_i)
  std::vector<double> weight;  // 1/(1 - tau'(xi(u_i)))
};

inline WarpInverse invert_warp(const DeformationField& field) {
  const Grid& g = field.grid;
  double lip = sup_abs(field.dtau);
  if (lip >= 1.0)
    throw UsabilityViolation("invert_warp: sup|tau'| >= 1 is not invertible");

  Signal tau_sig = field.tau_signal();
  std::vector<cd> dtau_c(field.dtau.size());
  for (std::size_t i = 0; i < field.dtau.size(); ++i)
    dtau_c[i] = cd(field.dtau[i], 0.0);
  Signal dtau_sig(g, std::move(dtau_c));

  WarpInverse inv;
  inv.xi.resize(g.length);
  for (std::size_t i = 0; i < g.length; ++i) inv.xi[i] = g.point(i);

  for (int it = 0; it < 200; ++it) {
    std::vector<cd> tau_at = resample_at(tau_sig, inv.xi);
    double worst = 0.0;
    for (std::size_t i = 0; i < g.length; ++i) {
      double next = g.point(i) + tau_at[i].real();
      worst = std::max(worst, std::abs(next - inv.xi[i]));
      inv.xi[i] = next;
    }
    if (it >= 29 && worst < 1e-13) break;
  }
  // residual check
  {
    std::vector<cd> tau_at = resample_at(tau_sig, inv.xi);
    double worst = 0.0;
    for (std::size_t i = 0; i < g.length; ++i)
      worst = std::max(worst,
                       std::abs(inv.xi[i] - tau_at[i].real() - g.point(i)));
    if (worst > 1e-12)
      throw UsabilityViolation(
          "invert_warp: fixed-point inversion did not reach residual 1e-12");
  }

  std::vector<cd> dtau_at = resample_at(dtau_sig, inv.xi);
  inv.weight.resize(g.length);
  for (std::size_t i = 0; i < g.length; ++i)
    inv.weight[i] = 1.0 / (1.0 - dtau_at[i].real());
  return inv;
}

// Adjoint warp via the exact change-of-variables formula,
//   (L_tau^* g)(u) = g(xi(u)) / (1 - tau'(xi(u))),
// with xi the inverse of x -> x - tau(x).
inline Signal apply_deformation_adjoint(const Signal& gsig,
                                        const WarpInverse& inv) {
  const Grid& g = gsig.grid();
  if (inv.xi.size() != g.length)
    throw GridMismatch("apply_deformation_adjoint: inverse warp grid mismatch");
  std::vector<cd> values = resample_at(gsig, inv.xi);
  std::vector<cd> out(g.length);
  for (std::size_t i = 0; i < g.length; ++i) out[i] = values[i] * inv.weight[i];
  return Signal(g, std::move(out));
}

// Exact conjugate transpose of the sampled warp matrix behind
// apply_deformation(..., SeamPolicy::Periodic): identity on the tau == 0
// rows, adjoint trigonometric resampling on the rest.  Unlike the
// change-of-variables formula above, this pairs with the forward map to
// machine precision regardless of how rough the probe signals are, which is
// what the operator-norm machinery needs.
inline Signal apply_deformation_transpose(const Signal& gsig,
                                          const DeformationField& field) {
  require_same_grid(gsig.grid(), field.grid, "apply_deformation_transpose");
  const Grid& g = gsig.grid();
  std::vector<double> warp;
  std::vector<cd> vals;
  warp.reserve(g.length);
  vals.reserve(g.length);
  std::vector<cd> out(g.length, cd(0.0, 0.0));
  for (std::size_t i = 0; i < g.length; ++i) {
    if (field.tau[i] == 0.0) {
      out[i] = gsig.samples()[i];
    } else {
      warp.push_back(g.point(i) - field.tau[i]);
      vals.push_back(gsig.samples()[i]);
    }
  }
  if (!warp.empty()) {
    Signal back = resample_adjoint_at(g, warp, vals);
    for (std::size_t i = 0; i < g.length; ++i) out[i] += back.samples()[i];
  }
  return Signal(g, std::move(out));
}

// ---------------------------------------------------------------------------
// Hoelder seminorm and deformation metrics.
// ---------------------------------------------------------------------------

// |g|_{C^alpha} = sup_{i != j} |g_i - g_j| / |x_i - x_j|^alpha.
// Exact O(N^2) pair sweep for N <= 2048.  Larger grids use the dyadic
// separation sweep (all pairs at distances 2^k * spacing); binary chaining
// shows the true sup is within a factor 2^alpha/(2^alpha - 1) of that value,
// and for smooth samples the two agree far better in practice.
inline double holder_seminorm(const std::vector<double>& values,
                              double spacing, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw ParameterViolation("holder_seminorm: alpha must lie in (0, 1]");
  if (!(spacing > 0.0))
    throw ParameterViolation("holder_seminorm: spacing must be positive");
  const std::size_t n = values.size();
  if (n < 2) return 0.0;

  double best = 0.0;
  if (n <= 2048) {
    for (std::size_t i = 0; i + 1 < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        double q = std::abs(values[j] - values[i]) /
                   std::pow(static_cast<double>(j - i) * spacing, alpha);
        if (q > best) best = q;
      }
    return best;
  }
  for (std::size_t d = 1; d < n; d *= 2) {
    double denom = std::pow(static_cast<double>(d) * spacing, alpha);
    for (std::size_t i = 0; i + d < n; ++i) {
      double q = std::abs(values[i + d] - values[i]) / denom;
      if (q > best) best = q;
    }
  }
  return best;
}

struct DeformationMetrics {
  double sup_tau = 0.0;   // ||tau||_inf
  double sup_dtau = 0.0;  // ||tau'||_inf
  double osc_tau = 0.0;   // ||Delta tau||_inf = sup tau - inf tau
  double sup_d2tau = 0.0; // ||tau''||_inf (spectral)
  std::map<double, double> holder_dtau;  // alpha -> |tau'|_{C^alpha}
};

inline DeformationMetrics compute_metrics(const DeformationField& field,
                                          const std::vector<double>& alphas) {
  DeformationMetrics m;
  m.sup_tau = sup_abs(field.tau);
  m.sup_dtau = sup_abs(field.dtau);
  double lo = field.tau.empty() ? 0.0 : field.tau[0], hi = lo;
  for (double v : field.tau) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  m.osc_tau = hi - lo;
  m.sup_d2tau = sup_abs(detail::spectral_derivative(field.grid, field.dtau));
  for (double a : alphas)
    m.holder_dtau[a] = holder_seminorm(field.dtau, field.grid.spacing, a);
  return m;
}

// Middle-term convention of the deformation size functionals.
enum class MiddleFactor {
  LogRatio,     // max(log(||Delta tau|| / ||tau'||), 1)
  WindowScale,  // max(J, 1)
};

inline double middle_term(const DeformationMetrics& m, int J,
                          MiddleFactor mode) {
  if (m.sup_dtau == 0.0) return 0.0;
  double factor;
  if (mode == MiddleFactor::LogRatio)
    factor = std::max(std::log(m.osc_tau / m.sup_dtau), 1.0);
  else
    factor = std::max(static_cast<double>(J), 1.0);
  return factor * m.sup_dtau;
}

// K_2(tau) = 2^{-J}||tau|| + max(log(||Delta tau||/||tau'||), 1)||tau'||
//            + ||tau''||.
inline double k2_functional(const DeformationMetrics& m, int J,
                            MiddleFactor mode = MiddleFactor::LogRatio) {
  return std::pow(2.0, -static_cast<double>(J)) * m.sup_tau +
         middle_term(m, J, mode) + m.sup_d2tau;
}

// K_{1+alpha}(tau): same with |tau'|_{C^alpha} as the smoothness term.
inline double k1alpha_functional(const DeformationMetrics& m, int J,
                                 double alpha,
                                 MiddleFactor mode = MiddleFactor::LogRatio) {
  auto it = m.holder_dtau.find(alpha);
  if (it == m.holder_dtau.end())
    throw ParameterViolation(
        "k1alpha_functional: metrics were not computed for this alpha");
  return std::pow(2.0, -static_cast<double>(J)) * m.sup_tau +
         middle_term(m, J, mode) + it->second;
}

// ---------------------------------------------------------------------------
// The instability pair: f(x) = x on [0, 2*pi] (smoothly cut off) and the
// dilated family (f_n, tau_n).
// ---------------------------------------------------------------------------

// f(x) = x * ramp(x) with a C-infinity plateau ramp equal to 1 on [0, 2*pi]
// and supported in [-1, 2*pi + 1].  On [0, 2*pi] it is exactly the identity,
// so L_tau f - f = -tau there for any tau supported in (0, 2*pi).
inline Signal ramp_signal(const Grid& grid) {
  validate_grid(grid);
  if (grid.origin > -1.0 || grid.origin + grid.period() < 2.0 * kPi + 1.0)
    throw ParameterViolation(
        "ramp_signal: grid must contain the support [-1, 2*pi + 1]");
  std::vector<cd> samples(grid.length);
  for (std::size_t i = 0; i < grid.length; ++i) {
    double x = grid.point(i);
    samples[i] = cd(x * plateau(x, -1.0, 2.0 * kPi + 1.0, 1.0), 0.0);
  }
  return Signal(grid, std::move(samples));
}

// (f_n, tau_n) = (2^{n/2} f(2^n .), 2^{-n} tau(2^n .)) on the nested grid
// G_n = {origin/2^n, spacing/2^n, N}.  Pure relabeling: sup|tau_n'| is
// preserved exactly and |tau_n'|_{C^alpha} scales by 2^{-n(1-alpha)} on the
// dyadic sweep.
struct ScalePair {
  Signal f;
  DeformationField field;
};

inline ScalePair scale_pair(const Signal& f, const DeformationField& field,
                            int n) {
  require_same_grid(f.grid(), field.grid, "scale_pair");
  Signal fn = dilate(f, n);
  double s = std::pow(2.0, -static_cast<double>(n));
  DeformationField fn_field;
  fn_field.grid = fn.grid();
  fn_field.tau.resize(field.tau.size());
  fn_field.dtau = field.dtau;  // tau_n'(x) = tau'(2^n x), samplewise identical
  for (std::size_t i = 0; i < field.tau.size(); ++i)
    fn_field.tau[i] = s * field.tau[i];
  fn_field.source = field.source + ";dilated(n=" + std::to_string(n) + ")";
  return ScalePair{std::move(fn), std::move(fn_field)};
}

// ---------------------------------------------------------------------------
// CSV import/export of deformation fields (columns: x, tau).
// ---------------------------------------------------------------------------

inline void export_field_csv(const DeformationField& field,
                             const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw Error("export_field_csv: cannot open " + path);
  std::fprintf(fp, "x,tau\n");
  for (std::size_t i = 0; i < field.grid.length; ++i)
    std::fprintf(fp, "%.17g,%.17g\n", field.grid.point(i), field.tau[i]);
  std::fclose(fp);
}

inline DeformationField import_field_csv(const std::string& path,
                                         const Grid& grid) {
  validate_grid(grid);
  std::ifstream in(path);
  if (!in) throw Error("import_field_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("x,tau", 0) != 0)
    throw ParameterViolation("import_field_csv: expected header 'x,tau'");
  std::vector<double> tau;
  tau.reserve(grid.length);
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (row >= grid.length)
      throw ParameterViolation("import_field_csv: too many rows for grid");
    std::istringstream ls(line);
    std::string cell;
    std::getline(ls, cell, ',');
    double x = std::stod(cell);
    if (std::abs(x - grid.point(row)) > 1e-9 * std::max(1.0, grid.period()))
      throw ParameterViolation("import_field_csv: x column does not match grid");
    if (!std::getline(ls, cell, ','))
      throw ParameterViolation("import_field_csv: missing tau column");
    tau.push_back(std::stod(cell));
    ++row;
  }
  if (row != grid.length)
    throw ParameterViolation("import_field_csv: row count does not match grid");
  return tabulated_field(grid, std::move(tau), "imported(" + path + ")");
}

}  // namespace wscat
