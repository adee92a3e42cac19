#pragma once

#include <algorithm>
#include <climits>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "wscat/errors.hpp"
#include "wscat/signal.hpp"

namespace wscat {

// ---------------------------------------------------------------------------
// Meyer-type analytic wavelet pair.
//
// nu(t) is the standard C-infinity step built from theta(t) = exp(-1/t):
// identically 0 for t <= 0, identically 1 for t >= 1 (exact in floating
// point, exp underflows to 0).  s(om) = nu(om/a - 1) rises on [a, 2a], and
//
//   psi_hat(om)^2 = 2 * (s(om) - s(om/2)),   support [a, 4a], om > 0 only
//   phi_hat(om)^2 = 1 - s(|om|/2),           support |om| <= 4a
//
// Dyadic dilates telescope:  phi_hat(2^J om)^2 + sum_{j=-J+1}^{jmax}
// psi_hat(2^-j om)^2 / ... collapses to 1 - s(2^-jmax-1 om), which is exactly
// 1 for 0 < om <= 2^{jmax+1} a.  Because the scaled arguments differ by exact
// powers of two, the cancellation also holds in floating point to ~1e-15.
// The factor 2 in psi_hat^2 makes the analytic (positive-frequency-only)
// convention energy preserving for real signals.
// ---------------------------------------------------------------------------

inline double smooth_step_nu(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  double a = std::exp(-1.0 / t);
  double b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

inline double meyer_s(double om, double a) { return smooth_step_nu(om / a - 1.0); }

inline double meyer_psi_hat(double om, double a) {
  if (om <= a || om >= 4.0 * a) return 0.0;
  double q = meyer_s(om, a) - meyer_s(0.5 * om, a);
  return std::sqrt(2.0 * std::max(0.0, q));
}

inline double meyer_phi_hat(double om, double a) {
  double u = 0.5 * std::abs(om);
  if (u >= 2.0 * a) return 0.0;
  return std::sqrt(std::max(0.0, 1.0 - meyer_s(u, a)));
}

// ---------------------------------------------------------------------------
// Filter bank: sampled dyadic wavelet family on a grid.
//
// Channel j holds psi_hat(2^-j omega_k) over the FFT bins; j runs over
// j_values (ascending, all > -J).  phi_hat holds the window profile
// phi_hat(2^J omega_k).  Everything is kept as plain tables so an imported
// (tabulated) bank goes through the same transform path as a built one.
// ---------------------------------------------------------------------------

struct FilterBank {
  Grid grid;
  int J = 0;
  double omega_lo = 1.0;  // transition start `a` of the generator
  std::vector<int> j_values;
  std::vector<std::vector<double>> psi_hat;  // [channel][bin]
  std::vector<double> phi_hat;               // [bin]
  double lp_residual = 0.0;
  int coarse_factor = 1;
  std::string id;

  int j_max() const { return j_values.empty() ? -J : j_values.back(); }
  std::size_t channels() const { return j_values.size(); }

  int channel_of(int j) const {
    auto it = std::lower_bound(j_values.begin(), j_values.end(), j);
    if (it == j_values.end() || *it != j)
      throw UnknownScale("filter bank: scale j=" + std::to_string(j) +
                         " is not part of the bank");
    return static_cast<int>(it - j_values.begin());
  }

  // Upper edge of the band on which the Littlewood-Paley sum is exactly 1.
  double covered_omega_max() const {
    if (j_values.empty()) return 0.0;
    return omega_lo * std::pow(2.0, static_cast<double>(j_max() + 1));
  }
};

// Max over covered bins of |phi_hat(2^J om)^2
//   + (1/2) sum_j (psi_hat(2^-j om)^2 + psi_hat(-2^-j om)^2) - 1|.
// Covered bins are |omega_k| <= covered_omega_max (always including DC).
inline double littlewood_paley_residual(const FilterBank& bank) {
  const Grid& g = bank.grid;
  const std::size_t n = g.length;
  double cov = bank.covered_omega_max();
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double om = g.omega(i);
    if (std::abs(om) > cov && i != 0) continue;
    double lp = bank.phi_hat[i] * bank.phi_hat[i];
    for (std::size_t c = 0; c < bank.channels(); ++c) {
      // psi_hat is sampled per bin; the reflected term psi_hat(-2^-j om) is
      // the table value at the mirrored bin.
      std::size_t im = (i == 0) ? 0 : n - i;
      double plus = bank.psi_hat[c][i];
      double minus = bank.psi_hat[c][im];
      lp += 0.5 * (plus * plus + minus * minus);
    }
    worst = std::max(worst, std::abs(lp - 1.0));
  }
  return worst;
}

namespace detail {

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string bank_fingerprint(const FilterBank& b) {
  std::ostringstream os;
  os << "meyer-analytic;a=" << format_double(b.omega_lo) << ";J=" << b.J
     << ";grid=" << format_double(b.grid.origin) << ","
     << format_double(b.grid.spacing) << "," << b.grid.length << ";j=";
  for (int j : b.j_values) os << j << ",";
  double checksum = 0.0;
  for (const auto& ch : b.psi_hat)
    for (std::size_t i = 0; i < ch.size(); i += 97) checksum += ch[i];
  for (std::size_t i = 0; i < b.phi_hat.size(); i += 97) checksum += b.phi_hat[i];
  os << ";chk=" << format_double(checksum);
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(os.str())));
  return buf;
}

// Subsampling factor for window outputs: phi_hat(2^J omega) vanishes for
// |omega| > 4a/2^J, so window outputs can live on the coarsest nested grid
// whose Nyquist still covers that band with a factor-2 margin (floor of 8
// samples).  Spectral truncation to that grid is exact.
inline int window_coarse_factor(const Grid& g, int J, double a) {
  double cutoff = a * std::pow(2.0, 2.0 - static_cast<double>(J));
  int factor = 1;
  while (g.length / static_cast<std::size_t>(factor) > 8 &&
         g.nyquist() / static_cast<double>(2 * factor) >= 2.0 * cutoff)
    factor *= 2;
  return factor;
}

}  // namespace detail

// Build the Meyer-type analytic bank on a grid.  j_values = {-J+1, ..., j_max};
// pass j_max_request = INT_MIN to auto-select the largest j_max whose wavelet
// support [a 2^j, 4a 2^j] still fits under the grid Nyquist.
inline FilterBank build_filter_bank(const Grid& grid, int J,
                                    int j_max_request = INT_MIN,
                                    double a = 1.0) {
  validate_grid(grid);
  if (!(a > 0.0) || !std::isfinite(a))
    throw ParameterViolation("filter bank: omega_lo must be positive");

  const double ny = grid.nyquist();
  int j_fit = static_cast<int>(std::floor(std::log2(ny / (4.0 * a)) + 1e-12));
  int j_max = (j_max_request == INT_MIN) ? j_fit : j_max_request;
  if (j_max > j_fit)
    throw NyquistViolation(
        "filter bank: wavelet support at j_max=" + std::to_string(j_max) +
        " exceeds the grid Nyquist frequency");

  FilterBank bank;
  bank.grid = grid;
  bank.J = J;
  bank.omega_lo = a;
  for (int j = -J + 1; j <= j_max; ++j) bank.j_values.push_back(j);

  const std::size_t n = grid.length;
  bank.psi_hat.resize(bank.j_values.size());
  for (std::size_t c = 0; c < bank.j_values.size(); ++c) {
    double scale = std::pow(2.0, -static_cast<double>(bank.j_values[c]));
    auto& tab = bank.psi_hat[c];
    tab.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      tab[i] = meyer_psi_hat(scale * grid.omega(i), a);
  }
  bank.phi_hat.resize(n);
  double wscale = std::pow(2.0, static_cast<double>(J));
  for (std::size_t i = 0; i < n; ++i)
    bank.phi_hat[i] = meyer_phi_hat(wscale * grid.omega(i), a);

  bank.coarse_factor = detail::window_coarse_factor(grid, J, a);
  bank.lp_residual = littlewood_paley_residual(bank);
  bank.id = detail::bank_fingerprint(bank);
  return bank;
}

// ---------------------------------------------------------------------------
// Single-level wavelet transform.
// ---------------------------------------------------------------------------

struct WaveletCoeffs {
  Signal low;                    // f * phi_{2^J}
  std::vector<Signal> channels;  // f * psi_{2^j}, ascending j
};

inline void require_bank_grid(const FilterBank& bank, const Signal& f,
                              const char* where) {
  if (!same_grid(bank.grid, f.grid()))
    throw GridMismatch(std::string(where) +
                       ": signal grid does not match the filter bank grid");
}

// f * psi_j / f * phi as diagonal Fourier multipliers.  One forward FFT, one
// inverse FFT per channel.
inline WaveletCoeffs wavelet_transform(const Signal& f, const FilterBank& bank) {
  require_bank_grid(bank, f, "wavelet_transform");
  const std::size_t n = f.size();
  std::vector<cd> dft = f.samples();
  fft_inplace(dft);
  const double inv_n = 1.0 / static_cast<double>(n);

  auto apply = [&](const std::vector<double>& profile) {
    std::vector<cd> bins(n);
    for (std::size_t i = 0; i < n; ++i) bins[i] = dft[i] * profile[i];
    ifft_inplace(bins);
    for (auto& z : bins) z *= inv_n;
    return Signal(f.grid(), std::move(bins));
  };

  WaveletCoeffs out;
  out.low = apply(bank.phi_hat);
  out.channels.reserve(bank.channels());
  for (std::size_t c = 0; c < bank.channels(); ++c)
    out.channels.push_back(apply(bank.psi_hat[c]));
  return out;
}

// ---------------------------------------------------------------------------
// CSV export / import of the sampled profiles.
// Columns: omega, psi_hat_<j> for each j ascending, phi_hat; rows in
// ascending omega order.  Import revalidates support and positivity so a
// table produced elsewhere can be compared against a built bank.
// ---------------------------------------------------------------------------

inline void export_bank_csv(const FilterBank& bank, const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw Error("export_bank_csv: cannot open " + path);
  std::fprintf(fp, "omega");
  for (int j : bank.j_values) std::fprintf(fp, ",psi_hat_%d", j);
  std::fprintf(fp, ",phi_hat\n");
  const std::size_t n = bank.grid.length;
  for (std::size_t r = 0; r < n; ++r) {
    // ascending k = -N/2 .. N/2-1 -> bin index
    long k = static_cast<long>(r) - static_cast<long>(n / 2);
    std::size_t i =
        static_cast<std::size_t>(k >= 0 ? k : k + static_cast<long>(n));
    std::fprintf(fp, "%.17g", bank.grid.omega(i));
    for (std::size_t c = 0; c < bank.channels(); ++c)
      std::fprintf(fp, ",%.17g", bank.psi_hat[c][i]);
    std::fprintf(fp, ",%.17g\n", bank.phi_hat[i]);
  }
  std::fclose(fp);
}

inline FilterBank import_bank_csv(const std::string& path, const Grid& grid,
                                  int J, double a = 1.0) {
  validate_grid(grid);
  std::ifstream in(path);
  if (!in) throw Error("import_bank_csv: cannot open " + path);

  std::string header;
  if (!std::getline(in, header))
    throw InvalidProfile("import_bank_csv: empty file");
  std::vector<int> j_values;
  {
    std::istringstream hs(header);
    std::string col;
    bool first = true;
    while (std::getline(hs, col, ',')) {
      if (first) {
        if (col != "omega")
          throw InvalidProfile("import_bank_csv: first column must be omega");
        first = false;
      } else if (col.rfind("psi_hat_", 0) == 0) {
        j_values.push_back(std::stoi(col.substr(8)));
      } else if (col != "phi_hat") {
        throw InvalidProfile("import_bank_csv: unexpected column " + col);
      }
    }
  }
  if (!std::is_sorted(j_values.begin(), j_values.end()))
    throw InvalidProfile("import_bank_csv: psi columns must be ascending in j");
  for (int j : j_values)
    if (j <= -J)
      throw InvalidProfile("import_bank_csv: scale j=" + std::to_string(j) +
                           " is not admissible for window scale J=" +
                           std::to_string(J));

  FilterBank bank;
  bank.grid = grid;
  bank.J = J;
  bank.omega_lo = a;
  bank.j_values = j_values;
  bank.psi_hat.assign(j_values.size(), std::vector<double>(grid.length, 0.0));
  bank.phi_hat.assign(grid.length, 0.0);

  const std::size_t n = grid.length;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (row >= n) throw InvalidProfile("import_bank_csv: too many rows");
    long k = static_cast<long>(row) - static_cast<long>(n / 2);
    std::size_t i =
        static_cast<std::size_t>(k >= 0 ? k : k + static_cast<long>(n));
    std::istringstream ls(line);
    std::string cell;
    std::getline(ls, cell, ',');
    double om = std::stod(cell);
    if (std::abs(om - grid.omega(i)) >
        1e-9 * std::max(1.0, grid.nyquist()))
      throw InvalidProfile("import_bank_csv: omega column does not match grid");
    for (std::size_t c = 0; c < j_values.size(); ++c) {
      if (!std::getline(ls, cell, ','))
        throw InvalidProfile("import_bank_csv: short row");
      double v = std::stod(cell);
      if (v < 0.0)
        throw InvalidProfile("import_bank_csv: negative psi_hat value");
      if (v != 0.0 && om <= 0.0)
        throw InvalidProfile(
            "import_bank_csv: analytic wavelet must vanish for omega <= 0");
      bank.psi_hat[c][i] = v;
    }
    if (!std::getline(ls, cell, ','))
      throw InvalidProfile("import_bank_csv: missing phi_hat column");
    double v = std::stod(cell);
    if (v < 0.0) throw InvalidProfile("import_bank_csv: negative phi_hat value");
    bank.phi_hat[i] = v;
    ++row;
  }
  if (row != n) throw InvalidProfile("import_bank_csv: row count does not match grid");

  bank.coarse_factor = detail::window_coarse_factor(grid, J, a);
  bank.lp_residual = littlewood_paley_residual(bank);
  bank.id = detail::bank_fingerprint(bank);
  return bank;
}

}  // namespace wscat
