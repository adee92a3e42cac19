#pragma once

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "wscat/errors.hpp"
#include "wscat/filter_bank.hpp"
#include "wscat/signal.hpp"

namespace wscat {

// A scattering path is the sequence of wavelet octaves j_1 .. j_m applied in
// order; the empty path is the plain window output.
using Path = std::vector<int>;

// One propagation step, U[2^j]f = |f * psi_{2^j}|.
inline Signal propagate_one(const Signal& f, const FilterBank& bank, int j) {
  require_bank_grid(bank, f, "propagate_one");
  int c = bank.channel_of(j);
  const std::size_t n = f.size();
  std::vector<cd> bins = f.samples();
  fft_inplace(bins);
  const auto& profile = bank.psi_hat[static_cast<std::size_t>(c)];
  for (std::size_t i = 0; i < n; ++i) bins[i] *= profile[i];
  ifft_inplace(bins);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (auto& z : bins) z = cd(std::abs(z) * inv_n, 0.0);
  return Signal(f.grid(), std::move(bins));
}

inline Signal propagate_path(const Signal& f, const FilterBank& bank,
                             const Path& p) {
  Signal h = f;
  for (int j : p) h = propagate_one(h, bank, j);
  return h;
}

// Window output A_J h = h * phi_{2^J} at full resolution.
inline Signal window_output(const Signal& h, const FilterBank& bank) {
  require_bank_grid(bank, h, "window_output");
  const std::size_t n = h.size();
  std::vector<cd> bins = h.samples();
  fft_inplace(bins);
  for (std::size_t i = 0; i < n; ++i) bins[i] *= bank.phi_hat[i];
  ifft_inplace(bins);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (auto& z : bins) z *= inv_n;
  return Signal(h.grid(), std::move(bins));
}

// ---------------------------------------------------------------------------
// Canonical path enumeration: by depth, then lexicographically in the scale
// sequence (channel indices ascending).  Every consumer that iterates paths
// or reduces over them uses this order, which is what makes outputs
// bit-reproducible regardless of thread count.
// ---------------------------------------------------------------------------

class PathSet {
 public:
  PathSet() = default;
  PathSet(std::vector<int> j_values, int max_depth, std::size_t path_cap)
      : j_values_(std::move(j_values)), max_depth_(max_depth) {
    if (max_depth < 0)
      throw ParameterViolation("path set: max depth must be >= 0");
    const std::size_t s = j_values_.size();
    offsets_.assign(static_cast<std::size_t>(max_depth) + 2, 0);
    std::size_t layer = 1, total = 0;
    for (int m = 0; m <= max_depth; ++m) {
      offsets_[static_cast<std::size_t>(m)] = total;
      total += layer;
      if (total > path_cap)
        throw DepthBudgetExceeded(
            "path set: " + std::to_string(total) + " paths exceed the budget of " +
            std::to_string(path_cap));
      if (s > 0 && layer > path_cap / s + 1) layer = path_cap + 1;  // overflow guard
      layer *= s;
    }
    offsets_[static_cast<std::size_t>(max_depth) + 1] = total;
  }

  std::size_t size() const { return offsets_.back(); }
  int max_depth() const { return max_depth_; }
  std::size_t scales() const { return j_values_.size(); }
  std::size_t layer_begin(int m) const {
    return offsets_[static_cast<std::size_t>(m)];
  }
  std::size_t layer_end(int m) const {
    return offsets_[static_cast<std::size_t>(m) + 1];
  }

  std::size_t index_of(const Path& p) const {
    if (static_cast<int>(p.size()) > max_depth_)
      throw UnknownScale("path set: path deeper than the cascade depth");
    std::size_t idx = 0;
    const std::size_t s = j_values_.size();
    for (int j : p) {
      auto it = std::lower_bound(j_values_.begin(), j_values_.end(), j);
      if (it == j_values_.end() || *it != j)
        throw UnknownScale("path set: scale j=" + std::to_string(j) +
                           " is not part of the bank");
      idx = idx * s + static_cast<std::size_t>(it - j_values_.begin());
    }
    return offsets_[p.size()] + idx;
  }

  Path path_at(std::size_t index) const {
    int m = 0;
    while (index >= layer_end(m)) ++m;
    std::size_t rel = index - layer_begin(m);
    Path p(static_cast<std::size_t>(m));
    const std::size_t s = j_values_.size();
    for (int d = m - 1; d >= 0; --d) {
      p[static_cast<std::size_t>(d)] = j_values_[rel % s];
      rel /= s;
    }
    return p;
  }

 private:
  std::vector<int> j_values_;
  int max_depth_ = 0;
  std::vector<std::size_t> offsets_;
};

// ---------------------------------------------------------------------------
// Scattering coefficients.
//
// S_J[p]f = U[p]f * phi_{2^J} is band-limited to |omega| <= 4a/2^J exactly
// (phi_hat has compact support), so each coefficient is stored on the
// coarsest nested grid that still covers that band: a lossless spectral
// truncation that preserves norms and distances bit for bit while keeping a
// full depth-3 cascade on a 2^14 grid within desktop memory.
//
// layer_u_norms[m] = sqrt(sum_{|p|=m} ||U[p]f||^2) for m = 0..M, and entry
// M+1 holds the same quantity for the first untouched layer (the truncation
// residual of the depth budget).
// ---------------------------------------------------------------------------

struct ScatteringCoefficients {
  std::string bank_id;
  int J = 0;
  int max_depth = 0;
  std::vector<int> j_values;
  Grid full_grid;
  Grid coarse_grid;
  PathSet paths;
  std::vector<Signal> coeffs;
  std::vector<double> layer_u_norms;

  const Signal& at(const Path& p) const { return coeffs[paths.index_of(p)]; }
};

namespace detail {

// Run n_tasks closures on up to n_threads threads.  Task outputs must go to
// preallocated per-task slots; callers reduce over task index afterwards so
// results do not depend on the execution schedule.
template <typename Fn>
void run_tasks(std::size_t n_tasks, unsigned n_threads, Fn&& fn) {
  if (n_tasks == 0) return;
  unsigned workers = std::max(1u, std::min<unsigned>(
      n_threads, static_cast<unsigned>(n_tasks)));
  if (workers == 1) {
    for (std::size_t t = 0; t < n_tasks; ++t) fn(t);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t t = next.fetch_add(1);
        if (t >= n_tasks) return;
        fn(t);
      }
    });
  }
  for (auto& th : pool) th.join();
}

struct CascadeScratch {
  const FilterBank* bank = nullptr;
  const PathSet* paths = nullptr;
  int max_depth = 0;
  std::vector<Signal>* coeffs = nullptr;
  std::vector<double>* layer_sq = nullptr;  // per-task accumulator, size M+2
};

// Exact spectral truncation of the window output onto the coarse grid.
// `dft` holds the unnormalized DFT of the node; the phi multiplier leaves no
// energy at or above the coarse Nyquist, so copying the low bins is lossless.
inline Signal subsample_window(const std::vector<cd>& dft,
                               const FilterBank& bank, const Grid& coarse) {
  const std::size_t nf = bank.grid.length;
  const std::size_t nc = coarse.length;
  std::vector<cd> bins(nc);
  for (std::size_t i = 0; i < nc; ++i) {
    // signed coarse bin k in [-nc/2, nc/2) -> source bin on the full grid
    long k = (i < nc / 2) ? static_cast<long>(i)
                          : static_cast<long>(i) - static_cast<long>(nc);
    std::size_t src =
        static_cast<std::size_t>(k >= 0 ? k : k + static_cast<long>(nf));
    bins[i] = dft[src] * bank.phi_hat[src];
  }
  ifft_inplace(bins);
  const double inv_nf = 1.0 / static_cast<double>(nf);
  for (auto& z : bins) z *= inv_nf;
  return Signal(coarse, std::move(bins));
}

// Depth-first expansion of one node.  `samples` are the node's time samples
// (real after the first modulus), `path` its scale sequence.
inline void expand_node(const std::vector<cd>& samples, Path& path,
                        const Grid& coarse, CascadeScratch& ctx) {
  const FilterBank& bank = *ctx.bank;
  const std::size_t n = bank.grid.length;
  const double spacing = bank.grid.spacing;
  const int depth = static_cast<int>(path.size());

  std::vector<cd> dft = samples;
  fft_inplace(dft);

  (*ctx.coeffs)[ctx.paths->index_of(path)] = subsample_window(dft, bank, coarse);

  if (depth == ctx.max_depth) {
    // Residual layer: || |h * psi_j| || = ||h * psi_j||, evaluated spectrally.
    double acc = 0.0;
    for (std::size_t c = 0; c < bank.channels(); ++c) {
      const auto& profile = bank.psi_hat[c];
      double e = 0.0;
      for (std::size_t i = 0; i < n; ++i) e += profile[i] * profile[i] * std::norm(dft[i]);
      acc += e;
    }
    (*ctx.layer_sq)[static_cast<std::size_t>(depth) + 1] +=
        acc * spacing / static_cast<double>(n);
    return;
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t c = 0; c < bank.channels(); ++c) {
    const auto& profile = bank.psi_hat[c];
    std::vector<cd> child(n);
    for (std::size_t i = 0; i < n; ++i) child[i] = dft[i] * profile[i];
    ifft_inplace(child);
    double e = 0.0;
    for (auto& z : child) {
      double a = std::abs(z) * inv_n;
      z = cd(a, 0.0);
      e += a * a;
    }
    (*ctx.layer_sq)[static_cast<std::size_t>(depth) + 1] += e * spacing;
    path.push_back(bank.j_values[c]);
    expand_node(child, path, coarse, ctx);
    path.pop_back();
  }
}

}  // namespace detail

// Full scattering cascade to depth M.
inline ScatteringCoefficients scatter(const Signal& f, const FilterBank& bank,
                                      int max_depth = 3,
                                      std::size_t path_cap = 50000,
                                      unsigned threads = 1) {
  require_bank_grid(bank, f, "scatter");

  ScatteringCoefficients out;
  out.bank_id = bank.id;
  out.J = bank.J;
  out.max_depth = max_depth;
  out.j_values = bank.j_values;
  out.full_grid = bank.grid;
  out.paths = PathSet(bank.j_values, max_depth, path_cap);

  const int factor = bank.coarse_factor;
  out.coarse_grid = Grid{bank.grid.origin,
                         bank.grid.spacing * static_cast<double>(factor),
                         bank.grid.length / static_cast<std::size_t>(factor)};

  out.coeffs.resize(out.paths.size());
  const std::size_t n_layers = static_cast<std::size_t>(max_depth) + 2;
  out.layer_u_norms.assign(n_layers, 0.0);

  // Root layer.
  std::vector<cd> root_dft = f.samples();
  fft_inplace(root_dft);
  out.coeffs[0] = detail::subsample_window(root_dft, bank, out.coarse_grid);
  double root_sq = 0.0;
  for (const cd& z : f.samples()) root_sq += std::norm(z);
  root_sq *= bank.grid.spacing;

  std::vector<std::vector<double>> task_layer_sq;
  const std::size_t s = bank.channels();

  if (max_depth == 0) {
    // Only the residual layer remains, computed spectrally from the root.
    task_layer_sq.assign(1, std::vector<double>(n_layers, 0.0));
    double acc = 0.0;
    for (std::size_t c = 0; c < s; ++c) {
      const auto& profile = bank.psi_hat[c];
      for (std::size_t i = 0; i < bank.grid.length; ++i)
        acc += profile[i] * profile[i] * std::norm(root_dft[i]);
    }
    task_layer_sq[0][1] =
        acc * bank.grid.spacing / static_cast<double>(bank.grid.length);
  } else {
    // One task per depth-1 subtree; each writes only its own coefficient
    // slots and its own layer accumulator.
    task_layer_sq.assign(s, std::vector<double>(n_layers, 0.0));
    const std::size_t n = bank.grid.length;
    const double inv_n = 1.0 / static_cast<double>(n);
    detail::run_tasks(s, threads, [&](std::size_t c) {
      const auto& profile = bank.psi_hat[c];
      std::vector<cd> child(n);
      for (std::size_t i = 0; i < n; ++i) child[i] = root_dft[i] * profile[i];
      ifft_inplace(child);
      double e = 0.0;
      for (auto& z : child) {
        double a = std::abs(z) * inv_n;
        z = cd(a, 0.0);
        e += a * a;
      }
      task_layer_sq[c][1] += e * bank.grid.spacing;

      detail::CascadeScratch ctx;
      ctx.bank = &bank;
      ctx.paths = &out.paths;
      ctx.max_depth = max_depth;
      ctx.coeffs = &out.coeffs;
      ctx.layer_sq = &task_layer_sq[c];
      Path path{bank.j_values[c]};
      detail::expand_node(child, path, out.coarse_grid, ctx);
    });
  }

  // Fixed-order reduction over tasks keeps the sums schedule independent.
  std::vector<double> layer_sq(n_layers, 0.0);
  layer_sq[0] = root_sq;
  for (const auto& partial : task_layer_sq)
    for (std::size_t m = 1; m < n_layers; ++m) layer_sq[m] += partial[m];
  for (std::size_t m = 0; m < n_layers; ++m)
    out.layer_u_norms[m] = std::sqrt(layer_sq[m]);

  return out;
}

inline void require_comparable(const ScatteringCoefficients& a,
                               const ScatteringCoefficients& b) {
  if (a.bank_id != b.bank_id || a.J != b.J || a.max_depth != b.max_depth ||
      a.j_values != b.j_values || a.coeffs.size() != b.coeffs.size() ||
      !same_grid(a.coarse_grid, b.coarse_grid))
    throw StructureMismatch(
        "scattering coefficients were produced with different banks, depths "
        "or grids and cannot be compared");
}

// l2 distance in the feature space: sqrt(sum_p ||S[p]a - S[p]b||_{L2}^2),
// accumulated in canonical path order.
inline double scattering_distance(const ScatteringCoefficients& a,
                                  const ScatteringCoefficients& b) {
  require_comparable(a, b);
  const double spacing = a.coarse_grid.spacing;
  double acc = 0.0;
  for (std::size_t p = 0; p < a.coeffs.size(); ++p) {
    const auto& xa = a.coeffs[p].samples();
    const auto& xb = b.coeffs[p].samples();
    double e = 0.0;
    for (std::size_t i = 0; i < xa.size(); ++i) e += std::norm(xa[i] - xb[i]);
    acc += e * spacing;
  }
  return std::sqrt(acc);
}

// Norm of the full feature vector, sqrt(sum_p ||S[p]f||^2).
inline double scattering_norm(const ScatteringCoefficients& a) {
  const double spacing = a.coarse_grid.spacing;
  double acc = 0.0;
  for (const auto& c : a.coeffs) {
    double e = 0.0;
    for (const cd& z : c.samples()) e += std::norm(z);
    acc += e * spacing;
  }
  return std::sqrt(acc);
}

// Elementwise sum of two coefficient sets (used by the separation check).
// Layer norms of the sum are not meaningful and are left empty.
inline ScatteringCoefficients add_coefficients(
    const ScatteringCoefficients& a, const ScatteringCoefficients& b) {
  require_comparable(a, b);
  ScatteringCoefficients out = a;
  for (std::size_t p = 0; p < out.coeffs.size(); ++p)
    out.coeffs[p] = out.coeffs[p] + b.coeffs[p];
  out.layer_u_norms.clear();
  return out;
}

enum class NormKind { L1, L2 };

// Mixed norm of the propagated layers, ||U[P_J]f||:
//   L1:  sum_{m=0..M} ||U[Lambda^m]f||
//   L2:  sqrt(sum_{m=0..M} ||U[Lambda^m]f||^2)
// where ||U[Lambda^m]f|| = layer_u_norms[m].  The residual layer M+1 is not
// included; it is reported alongside as the truncation tail.
inline double u_norm_mixed(const ScatteringCoefficients& sc, NormKind kind) {
  if (sc.layer_u_norms.empty())
    throw StructureMismatch("u_norm_mixed: coefficient set has no layer norms");
  double acc = 0.0;
  for (int m = 0; m <= sc.max_depth; ++m) {
    double v = sc.layer_u_norms[static_cast<std::size_t>(m)];
    acc += (kind == NormKind::L1) ? v : v * v;
  }
  return (kind == NormKind::L1) ? acc : std::sqrt(acc);
}

inline double u_norm_mixed(const Signal& f, const FilterBank& bank,
                           int max_depth, NormKind kind,
                           std::size_t path_cap = 50000) {
  return u_norm_mixed(scatter(f, bank, max_depth, path_cap), kind);
}

// Defect of additivity on spectrally separated inputs:
//   || S(f + g) - (S(f) + S(g)) ||.
// Exactly zero (to rounding) when every wavelet channel sees at most one of
// the two spectra.
inline double check_separation_additivity(const Signal& f, const Signal& g,
                                          const FilterBank& bank,
                                          int max_depth = 3,
                                          std::size_t path_cap = 50000) {
  ScatteringCoefficients sum = scatter(f + g, bank, max_depth, path_cap);
  ScatteringCoefficients parts =
      add_coefficients(scatter(f, bank, max_depth, path_cap),
                       scatter(g, bank, max_depth, path_cap));
  return scattering_distance(sum, parts);
}

// Defect of dilation covariance along one path:
//   || S_J[p](dilate(f, l)) - dilate(S_{J+l}[p - l]f, l) ||
// where (p - l) subtracts l from every octave.  bank_dil must live on the
// grid of dilate(f, l) with window scale J; bank_base on f's grid with
// window scale J + l.
inline double check_dilation_covariance(const Signal& f,
                                        const FilterBank& bank_dil,
                                        const FilterBank& bank_base,
                                        const Path& p, int l) {
  if (bank_base.J != bank_dil.J + l)
    throw StructureMismatch(
        "check_dilation_covariance: window scales must differ by the dilation "
        "amount");
  Signal fd = dilate(f, l);
  Signal lhs = window_output(propagate_path(fd, bank_dil, p), bank_dil);

  Path shifted = p;
  for (int& j : shifted) j -= l;
  Signal rhs =
      dilate(window_output(propagate_path(f, bank_base, shifted), bank_base), l);
  return l2_norm(lhs - rhs);
}

// ---------------------------------------------------------------------------
// Serialization: one CSV per layer (path id, scale sequence, coefficient L2
// norm) plus a JSON manifest describing bank, depth and grids.
// ---------------------------------------------------------------------------

inline void write_scattering_csv(const ScatteringCoefficients& sc,
                                 const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  for (int m = 0; m <= sc.max_depth; ++m) {
    std::string path = dir + "/layer_" + std::to_string(m) + ".csv";
    std::FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw Error("write_scattering_csv: cannot open " + path);
    std::fprintf(fp, "path_id");
    for (int d = 1; d <= m; ++d) std::fprintf(fp, ",j%d", d);
    std::fprintf(fp, ",norm\n");
    for (std::size_t idx = sc.paths.layer_begin(m); idx < sc.paths.layer_end(m);
         ++idx) {
      Path p = sc.paths.path_at(idx);
      std::fprintf(fp, "%zu", idx);
      for (int j : p) std::fprintf(fp, ",%d", j);
      std::fprintf(fp, ",%.17g\n", l2_norm(sc.coeffs[idx]));
    }
    std::fclose(fp);
  }

  nlohmann::ordered_json manifest;
  manifest["bank_id"] = sc.bank_id;
  manifest["J"] = sc.J;
  manifest["max_depth"] = sc.max_depth;
  manifest["j_values"] = sc.j_values;
  manifest["grid"] = {{"origin", sc.full_grid.origin},
                      {"spacing", sc.full_grid.spacing},
                      {"length", sc.full_grid.length}};
  manifest["coarse_grid"] = {{"origin", sc.coarse_grid.origin},
                             {"spacing", sc.coarse_grid.spacing},
                             {"length", sc.coarse_grid.length}};
  manifest["layer_u_norms"] = sc.layer_u_norms;
  std::ofstream out(dir + "/manifest.json");
  if (!out) throw Error("write_scattering_csv: cannot open manifest");
  out << manifest.dump(2) << "\n";
}

}  // namespace wscat
