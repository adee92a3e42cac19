#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wscat/errors.hpp"
#include "wscat/fft.hpp"

namespace wscat {

using cd = std::complex<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

inline bool is_pow2(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

// Uniform periodic sampling grid: points x_i = origin + i*spacing,
// i = 0..length-1, period T = length*spacing.  Length is a power of two.
struct Grid {
  double origin = 0.0;
  double spacing = 1.0;
  std::size_t length = 0;

  double period() const { return spacing * static_cast<double>(length); }
  double nyquist() const { return kPi / spacing; }
  double domega() const { return 2.0 * kPi / period(); }
  double point(std::size_t i) const {
    return origin + spacing * static_cast<double>(i);
  }

  // FFT bin index -> signed wavenumber k in [-N/2, N/2).
  long bin_to_k(std::size_t i) const {
    return i < length / 2 ? static_cast<long>(i)
                          : static_cast<long>(i) - static_cast<long>(length);
  }
  // Angular frequency of FFT bin i: omega_k = 2*pi*k/T.
  double omega(std::size_t i) const {
    return domega() * static_cast<double>(bin_to_k(i));
  }
};

inline void validate_grid(const Grid& g) {
  if (!is_pow2(g.length))
    throw ParameterViolation("grid: length must be a power of two >= 2");
  if (!(g.spacing > 0.0) || !std::isfinite(g.spacing))
    throw ParameterViolation("grid: spacing must be positive and finite");
  if (!std::isfinite(g.origin))
    throw ParameterViolation("grid: origin must be finite");
}

inline bool same_grid(const Grid& a, const Grid& b, double rtol = 1e-12) {
  if (a.length != b.length) return false;
  double scale = std::max(std::abs(a.period()), std::abs(b.period()));
  return std::abs(a.spacing - b.spacing) <= rtol * scale &&
         std::abs(a.origin - b.origin) <= rtol * scale;
}

// Complex samples on a grid.
class Signal {
 public:
  Signal() = default;
  Signal(Grid grid, std::vector<cd> samples)
      : grid_(grid), samples_(std::move(samples)) {
    validate_grid(grid_);
    if (samples_.size() != grid_.length)
      throw ParameterViolation("signal: sample count does not match grid length");
  }

  static Signal zeros(const Grid& grid) {
    return Signal(grid, std::vector<cd>(grid.length, cd(0.0, 0.0)));
  }

  const Grid& grid() const { return grid_; }
  const std::vector<cd>& samples() const { return samples_; }
  std::vector<cd>& samples() { return samples_; }
  std::size_t size() const { return samples_.size(); }
  cd operator[](std::size_t i) const { return samples_[i]; }

 private:
  Grid grid_;
  std::vector<cd> samples_;
};

// Frequency bins of a signal, FFT ordering.  bins[i] approximates the
// continuous Fourier transform at omega(i):
//   f_hat(omega_k) = spacing * exp(-i*omega_k*origin) * DFT_k
// so that f(x) = (1/T) * sum_k f_hat(omega_k) exp(i*omega_k*x) on the grid.
class Spectrum {
 public:
  Spectrum() = default;
  Spectrum(Grid grid, std::vector<cd> bins)
      : grid_(grid), bins_(std::move(bins)) {
    validate_grid(grid_);
    if (bins_.size() != grid_.length)
      throw ParameterViolation("spectrum: bin count does not match grid length");
  }

  const Grid& grid() const { return grid_; }
  const std::vector<cd>& bins() const { return bins_; }
  std::vector<cd>& bins() { return bins_; }
  std::size_t size() const { return bins_.size(); }

 private:
  Grid grid_;
  std::vector<cd> bins_;
};

inline void require_same_grid(const Grid& a, const Grid& b, const char* where) {
  if (!same_grid(a, b))
    throw GridMismatch(std::string(where) + ": operands live on different grids");
}

inline Spectrum fourier(const Signal& f) {
  const Grid& g = f.grid();
  std::vector<cd> bins = f.samples();
  fft_inplace(bins);
  for (std::size_t i = 0; i < bins.size(); ++i)
    bins[i] *= g.spacing * std::polar(1.0, -g.omega(i) * g.origin);
  return Spectrum(g, std::move(bins));
}

inline Signal inverse_fourier(const Spectrum& F) {
  const Grid& g = F.grid();
  std::vector<cd> samples = F.bins();
  for (std::size_t i = 0; i < samples.size(); ++i)
    samples[i] *= std::polar(1.0, g.omega(i) * g.origin) / g.spacing;
  ifft_inplace(samples);
  double inv_n = 1.0 / static_cast<double>(g.length);
  for (auto& z : samples) z *= inv_n;
  return Signal(g, std::move(samples));
}

// Discrete L2 norm, ||f||^2 = spacing * sum |f_i|^2.  Matches the spectral
// side via Parseval: ||f||^2 = (1/T) * sum_k |f_hat(omega_k)|^2.
inline double l2_norm_sq(const Signal& f) {
  double acc = 0.0;
  for (const cd& z : f.samples()) acc += std::norm(z);
  return f.grid().spacing * acc;
}

inline double l2_norm(const Signal& f) { return std::sqrt(l2_norm_sq(f)); }

inline double l2_norm(const Spectrum& F) {
  double acc = 0.0;
  for (const cd& z : F.bins()) acc += std::norm(z);
  return std::sqrt(acc / F.grid().period());
}

inline cd inner_product(const Signal& a, const Signal& b) {
  require_same_grid(a.grid(), b.grid(), "inner_product");
  cd acc(0.0, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    acc += a[i] * std::conj(b[i]);
  return a.grid().spacing * acc;
}

inline double sup_norm(const Signal& f) {
  double m = 0.0;
  for (const cd& z : f.samples()) m = std::max(m, std::abs(z));
  return m;
}

inline Signal operator+(const Signal& a, const Signal& b) {
  require_same_grid(a.grid(), b.grid(), "operator+");
  std::vector<cd> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return Signal(a.grid(), std::move(out));
}

inline Signal operator-(const Signal& a, const Signal& b) {
  require_same_grid(a.grid(), b.grid(), "operator-");
  std::vector<cd> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return Signal(a.grid(), std::move(out));
}

inline Signal operator*(cd c, const Signal& f) {
  std::vector<cd> out(f.samples());
  for (auto& z : out) z *= c;
  return Signal(f.grid(), std::move(out));
}

inline Signal modulus(const Signal& f) {
  std::vector<cd> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = cd(std::abs(f[i]), 0.0);
  return Signal(f.grid(), std::move(out));
}

// Half-open frequency band lo < |omega| <= hi.  Constructed so that
// low / annulus / high with shared cut points partition the axis exactly.
struct Band {
  double lo = -1.0;
  double hi = std::numeric_limits<double>::infinity();

  static Band low(double cut) { return Band{-1.0, cut}; }
  static Band annulus(double lo, double hi) { return Band{lo, hi}; }
  static Band high(double cut) {
    return Band{cut, std::numeric_limits<double>::infinity()};
  }
  bool contains(double omega) const {
    double a = std::abs(omega);
    return a > lo && a <= hi;
  }
};

// Zero out all bins outside the band.  Complementary bands partition the
// energy exactly and their projections sum back to f (up to one FFT round
// trip of rounding).
inline Signal band_project(const Signal& f, const Band& band) {
  const Grid& g = f.grid();
  std::vector<cd> bins = f.samples();
  fft_inplace(bins);
  for (std::size_t i = 0; i < bins.size(); ++i)
    if (!band.contains(g.omega(i))) bins[i] = cd(0.0, 0.0);
  ifft_inplace(bins);
  double inv_n = 1.0 / static_cast<double>(g.length);
  for (auto& z : bins) z *= inv_n;
  return Signal(g, std::move(bins));
}

// Trigonometric interpolation of f at arbitrary points:
//   f(x) = (1/N) * sum_k DFT_k exp(i*omega_k*(x - origin)).
// Exact (up to rounding) for band-limited content; reproduces the samples at
// the grid points.  The phase factors are advanced by a complex rotation
// recurrence, re-anchored with a direct sin/cos every `block` bins to keep
// the accumulated rounding below ~1e-13.
inline std::vector<cd> resample_at(const Signal& f,
                                   std::span<const double> points) {
  const Grid& g = f.grid();
  const std::size_t n = g.length;
  std::vector<cd> dft = f.samples();
  fft_inplace(dft);

  // Reorder bins to ascending k = -N/2 .. N/2-1 for a fixed summation order.
  std::vector<cd> asc(n);
  std::vector<double> omega_asc(n);
  for (std::size_t i = 0; i < n; ++i) {
    long k = static_cast<long>(i) - static_cast<long>(n / 2);
    std::size_t src = static_cast<std::size_t>(k >= 0 ? k : k + static_cast<long>(n));
    asc[i] = dft[src];
    omega_asc[i] = g.domega() * static_cast<double>(k);
  }

  constexpr std::size_t block = 128;
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<cd> out(points.size());
  for (std::size_t p = 0; p < points.size(); ++p) {
    const double u = points[p] - g.origin;
    const cd step = std::polar(1.0, g.domega() * u);
    cd acc(0.0, 0.0);
    for (std::size_t start = 0; start < n; start += block) {
      cd w = std::polar(1.0, omega_asc[start] * u);
      std::size_t stop = std::min(start + block, n);
      for (std::size_t i = start; i < stop; ++i) {
        acc += asc[i] * w;
        w *= step;
      }
    }
    out[p] = acc * inv_n;
  }
  return out;
}

// Adjoint of f -> resample_at(f, points) with respect to the Euclidean inner
// products on samples and point values.  Regenerates the same phase factors
// as the forward recurrence, so the two maps are exact conjugate transposes.
inline Signal resample_adjoint_at(const Grid& g, std::span<const double> points,
                                  std::span<const cd> values) {
  validate_grid(g);
  if (points.size() != values.size())
    throw ParameterViolation("resample_adjoint_at: points/values mismatch");
  const std::size_t n = g.length;
  std::vector<cd> asc(n, cd(0.0, 0.0));
  std::vector<double> omega_asc(n);
  for (std::size_t i = 0; i < n; ++i) {
    long k = static_cast<long>(i) - static_cast<long>(n / 2);
    omega_asc[i] = g.domega() * static_cast<double>(k);
  }

  constexpr std::size_t block = 128;
  for (std::size_t p = 0; p < points.size(); ++p) {
    const double u = points[p] - g.origin;
    const cd step = std::polar(1.0, g.domega() * u);
    const cd v = values[p];
    for (std::size_t start = 0; start < n; start += block) {
      cd w = std::polar(1.0, omega_asc[start] * u);
      std::size_t stop = std::min(start + block, n);
      for (std::size_t i = start; i < stop; ++i) {
        asc[i] += std::conj(w) * v;
        w *= step;
      }
    }
  }

  std::vector<cd> bins(n);
  for (std::size_t i = 0; i < n; ++i) {
    long k = static_cast<long>(i) - static_cast<long>(n / 2);
    std::size_t dst =
        static_cast<std::size_t>(k >= 0 ? k : k + static_cast<long>(n));
    bins[dst] = asc[i];
  }
  ifft_inplace(bins);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (auto& z : bins) z *= inv_n;
  return Signal(g, std::move(bins));
}

// dilate(f, l)(x) = 2^{l/2} f(2^l x), realized exactly as a grid relabeling:
// the dilated signal lives on the nested grid {origin/2^l, spacing/2^l, N}.
// Norm preserving; power-of-two scale factors are exact in binary floating
// point, so dilate(dilate(f, l), -l) == f bit for bit up to the 2^{l/2}
// amplitude rounding.
inline Signal dilate(const Signal& f, int l) {
  const Grid& g = f.grid();
  double s = std::pow(2.0, -static_cast<double>(l));
  Grid g2{g.origin * s, g.spacing * s, g.length};
  double amp = std::pow(2.0, 0.5 * static_cast<double>(l));
  std::vector<cd> out(f.samples());
  for (auto& z : out) z *= amp;
  return Signal(g2, std::move(out));
}

// Periodic translation, translate(f, c)(x) = f(x - c), applied spectrally.
inline Signal translate(const Signal& f, double c) {
  const Grid& g = f.grid();
  std::vector<cd> bins = f.samples();
  fft_inplace(bins);
  for (std::size_t i = 0; i < bins.size(); ++i)
    bins[i] *= std::polar(1.0, -g.omega(i) * c);
  ifft_inplace(bins);
  double inv_n = 1.0 / static_cast<double>(g.length);
  for (auto& z : bins) z *= inv_n;
  return Signal(g, std::move(bins));
}

// Spectral derivative.  The Nyquist bin is zeroed (its one-sided phase has no
// consistent derivative and real signals keep a real derivative this way).
inline Signal derivative(const Signal& f) {
  const Grid& g = f.grid();
  std::vector<cd> bins = f.samples();
  fft_inplace(bins);
  for (std::size_t i = 0; i < bins.size(); ++i) {
    if (g.bin_to_k(i) == -static_cast<long>(g.length / 2))
      bins[i] = cd(0.0, 0.0);
    else
      bins[i] *= cd(0.0, g.omega(i));
  }
  ifft_inplace(bins);
  double inv_n = 1.0 / static_cast<double>(g.length);
  for (auto& z : bins) z *= inv_n;
  return Signal(g, std::move(bins));
}

// Spectral re-gridding onto a grid with the same origin and period but a
// different (power of two) length.  Shrinking the grid truncates bins above
// the new Nyquist; if those carry more than `tail_tol` of the total energy
// the content does not fit and BandwidthExceeded is thrown.
inline Signal resample_to_grid(const Signal& f, const Grid& target,
                               double tail_tol = 1e-9) {
  const Grid& g = f.grid();
  validate_grid(target);
  double scale = std::max(g.period(), target.period());
  if (std::abs(g.period() - target.period()) > 1e-9 * scale ||
      std::abs(g.origin - target.origin) > 1e-9 * scale)
    throw GridMismatch("resample_to_grid: target must share origin and period");

  Spectrum F = fourier(f);
  std::vector<cd> out(target.length, cd(0.0, 0.0));
  const long half_src = static_cast<long>(g.length / 2);
  const long half_dst = static_cast<long>(target.length / 2);
  double total = 0.0, kept = 0.0;
  for (std::size_t i = 0; i < g.length; ++i) {
    long k = g.bin_to_k(i);
    double e = std::norm(F.bins()[i]);
    total += e;
    if (k >= -half_dst && k < half_dst) {
      std::size_t j = static_cast<std::size_t>(
          k >= 0 ? k : k + static_cast<long>(target.length));
      out[j] = F.bins()[i];
      kept += e;
    }
  }
  (void)half_src;
  if (total > 0.0 && (total - kept) > tail_tol * total)
    throw BandwidthExceeded(
        "resample_to_grid: content above the target Nyquist frequency");
  return inverse_fourier(Spectrum(target, std::move(out)));
}

// Real random signal whose spectrum is supported in om_lo < |omega| <= om_hi
// (hermitian-symmetric Gaussian bin weights), normalized to unit L2 norm.
inline Signal bandlimited_noise(const Grid& grid, std::uint64_t seed,
                                double om_lo, double om_hi) {
  validate_grid(grid);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const std::size_t n = grid.length;
  std::vector<cd> bins(n, cd(0.0, 0.0));
  Band band{om_lo, om_hi};
  if (band.contains(0.0)) bins[0] = cd(gauss(rng), 0.0);
  for (std::size_t k = 1; k < n / 2; ++k) {
    if (!band.contains(grid.domega() * static_cast<double>(k))) continue;
    cd z(gauss(rng), gauss(rng));
    bins[k] = z;
    bins[n - k] = std::conj(z);
  }
  ifft_inplace(bins);
  double inv_n = 1.0 / static_cast<double>(n);
  for (auto& z : bins) z *= inv_n;
  Signal f(grid, std::move(bins));
  double nrm = l2_norm(f);
  if (nrm == 0.0) return f;
  return cd(1.0 / nrm, 0.0) * f;
}

inline void export_signal_csv(const Signal& f, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("export_signal_csv: cannot open '" + path + "'");
  os << "x,re,im\n";
  char buf[96];
  for (std::size_t i = 0; i < f.grid().length; ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g", f.grid().point(i),
                  f.samples()[i].real(), f.samples()[i].imag());
    os << buf << '\n';
  }
  if (!os) throw Error("export_signal_csv: write failed for '" + path + "'");
}

}  // namespace wscat
