#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "wscat/deformation.hpp"
#include "wscat/errors.hpp"
#include "wscat/filter_bank.hpp"
#include "wscat/signal.hpp"

namespace wscat {

// Matrix-free linear operator on flat complex vectors.  Both the input and
// the output carry the same uniform grid weight, so operator norms in L2
// coincide with plain Euclidean vector norms and no weights appear here.
struct LinearOperator {
  std::size_t input_dim = 0;
  std::size_t output_dim = 0;
  std::function<std::vector<cd>(const std::vector<cd>&)> apply;
  std::function<std::vector<cd>(const std::vector<cd>&)> adjoint_apply;
};

struct NormEstimate {
  double value = 0.0;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
  std::string method;
};

struct PowerIterOptions {
  double tol = 1e-6;
  int max_iter = 500;
  std::uint64_t seed = 12345;
  // Estimates below this count as a numerically zero operator.  A commutator
  // that vanishes up to rounding never stabilizes in *relative* terms, so the
  // relative-change test alone would spin forever on noise.
  double zero_floor = 1e-10;
};

namespace detail {

inline double vec_norm(const std::vector<cd>& v) {
  double acc = 0.0;
  for (const cd& z : v) acc += std::norm(z);
  return std::sqrt(acc);
}

}  // namespace detail

// Largest singular value by power iteration on Op*Op.  Never throws on slow
// convergence: the best estimate is returned with converged = false.
inline NormEstimate operator_norm(const LinearOperator& op,
                                  const PowerIterOptions& opts = {}) {
  NormEstimate est;
  est.method = "power_iteration";

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<cd> v(op.input_dim);
  for (auto& z : v) z = cd(gauss(rng), gauss(rng));
  double vn = detail::vec_norm(v);
  if (vn == 0.0) return est;
  for (auto& z : v) z /= vn;

  double sigma_prev = -1.0;
  for (int it = 1; it <= opts.max_iter; ++it) {
    std::vector<cd> w = op.apply(v);
    double sigma = detail::vec_norm(w);
    est.iterations = it;
    est.value = sigma;
    if (sigma <= opts.zero_floor) {  // operator annihilates the iterate
      est.residual = 0.0;
      est.converged = true;
      return est;
    }
    est.residual = (sigma_prev < 0.0)
                       ? 1.0
                       : std::abs(sigma - sigma_prev) / sigma;
    if (est.residual < opts.tol) {
      est.converged = true;
      return est;
    }
    sigma_prev = sigma;
    std::vector<cd> z = op.adjoint_apply(w);
    double zn = detail::vec_norm(z);
    if (zn == 0.0) {
      est.converged = true;
      return est;
    }
    for (auto& y : z) y /= zn;
    v = std::move(z);
  }
  return est;  // converged stays false; best estimate kept
}

// Dense oracle: assemble the matrix column by column and take the largest
// singular value.  Intended for small grids only.
inline NormEstimate dense_operator_norm(const LinearOperator& op) {
  Eigen::MatrixXcd mat(op.output_dim, op.input_dim);
  std::vector<cd> e(op.input_dim, cd(0.0, 0.0));
  for (std::size_t c = 0; c < op.input_dim; ++c) {
    e[c] = cd(1.0, 0.0);
    std::vector<cd> col = op.apply(e);
    for (std::size_t r = 0; r < op.output_dim; ++r) mat(r, c) = col[r];
    e[c] = cd(0.0, 0.0);
  }
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(mat);
  NormEstimate est;
  est.value = svd.singularValues()(0);
  est.iterations = 0;
  est.residual = 0.0;
  est.converged = true;
  est.method = "dense_svd";
  return est;
}

// ---------------------------------------------------------------------------
// Concrete handles.
// ---------------------------------------------------------------------------

namespace detail {

inline Signal to_signal(const Grid& g, const std::vector<cd>& v,
                        std::size_t offset) {
  std::vector<cd> s(v.begin() + static_cast<std::ptrdiff_t>(offset),
                    v.begin() + static_cast<std::ptrdiff_t>(offset + g.length));
  return Signal(g, std::move(s));
}

// Stacked wavelet transform W_J f = (A_J f, f * psi_j ...), channel 0 the
// window, then ascending j.  Adjoint in Fourier: sum of the (real) profiles
// applied to each channel.
inline std::vector<cd> wavelet_stack_apply(const FilterBank& bank,
                                           const std::vector<cd>& in) {
  const std::size_t n = bank.grid.length;
  std::vector<cd> dft = in;
  fft_inplace(dft);
  const double inv_n = 1.0 / static_cast<double>(n);
  const std::size_t n_ch = bank.channels() + 1;
  std::vector<cd> out(n_ch * n);
  for (std::size_t c = 0; c < n_ch; ++c) {
    const std::vector<double>& profile =
        (c == 0) ? bank.phi_hat : bank.psi_hat[c - 1];
    std::vector<cd> bins(n);
    for (std::size_t i = 0; i < n; ++i) bins[i] = dft[i] * profile[i];
    ifft_inplace(bins);
    for (std::size_t i = 0; i < n; ++i) out[c * n + i] = bins[i] * inv_n;
  }
  return out;
}

inline std::vector<cd> wavelet_stack_adjoint(const FilterBank& bank,
                                             const std::vector<cd>& in) {
  const std::size_t n = bank.grid.length;
  const std::size_t n_ch = bank.channels() + 1;
  std::vector<cd> acc(n, cd(0.0, 0.0));
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t c = 0; c < n_ch; ++c) {
    std::vector<cd> bins(in.begin() + static_cast<std::ptrdiff_t>(c * n),
                         in.begin() + static_cast<std::ptrdiff_t>((c + 1) * n));
    fft_inplace(bins);
    const std::vector<double>& profile =
        (c == 0) ? bank.phi_hat : bank.psi_hat[c - 1];
    for (std::size_t i = 0; i < n; ++i) acc[i] += bins[i] * profile[i];
  }
  ifft_inplace(acc);
  for (auto& z : acc) z *= inv_n;
  return acc;
}

}  // namespace detail

// W_J as a flat-vector handle (signal -> stacked channels).
inline LinearOperator wavelet_operator(const FilterBank& bank) {
  const std::size_t n = bank.grid.length;
  const std::size_t n_ch = bank.channels() + 1;
  LinearOperator op;
  op.input_dim = n;
  op.output_dim = n_ch * n;
  op.apply = [&bank](const std::vector<cd>& v) {
    return detail::wavelet_stack_apply(bank, v);
  };
  op.adjoint_apply = [&bank](const std::vector<cd>& v) {
    return detail::wavelet_stack_adjoint(bank, v);
  };
  return op;
}

// L_tau as a flat-vector handle.  The adjoint is the exact conjugate
// transpose of the sampled warp, so power iteration on Op*Op sees the same
// operator a dense decomposition of `apply` does.  Warps act on periodic
// vectors here, so the seam check is off.
inline LinearOperator deformation_operator(const DeformationField& field) {
  double lip = sup_abs(field.dtau);
  if (lip > 0.5)
    throw UsabilityViolation(
        "deformation_operator: sup|tau'| exceeds 1/2");
  auto fld = std::make_shared<DeformationField>(field);
  const Grid g = field.grid;

  LinearOperator op;
  op.input_dim = g.length;
  op.output_dim = g.length;
  op.apply = [fld, g](const std::vector<cd>& v) {
    Signal f(g, v);
    return apply_deformation(f, *fld, false, SeamPolicy::Periodic).samples();
  };
  op.adjoint_apply = [fld, g](const std::vector<cd>& v) {
    Signal f(g, v);
    return apply_deformation_transpose(f, *fld).samples();
  };
  return op;
}

// Commutator [W_J, L_tau] = W_J L_tau - (L_tau applied channelwise) W_J,
// mapping a signal to stacked channels.
inline LinearOperator commutator_handle(const FilterBank& bank,
                                        const DeformationField& field) {
  if (!same_grid(bank.grid, field.grid))
    throw GridMismatch("commutator_handle: bank and field grids differ");
  double lip = sup_abs(field.dtau);
  if (lip > 0.5)
    throw UsabilityViolation("commutator_handle: sup|tau'| exceeds 1/2");

  auto fld = std::make_shared<DeformationField>(field);
  const Grid g = bank.grid;
  const std::size_t n = g.length;
  const std::size_t n_ch = bank.channels() + 1;

  LinearOperator op;
  op.input_dim = n;
  op.output_dim = n_ch * n;

  op.apply = [&bank, fld, g, n, n_ch](const std::vector<cd>& v) {
    Signal f(g, v);
    Signal lf = apply_deformation(f, *fld, false, SeamPolicy::Periodic);
    std::vector<cd> w_of_lf = detail::wavelet_stack_apply(bank, lf.samples());
    std::vector<cd> wf = detail::wavelet_stack_apply(bank, v);
    for (std::size_t c = 0; c < n_ch; ++c) {
      Signal ch = detail::to_signal(g, wf, c * n);
      Signal lch = apply_deformation(ch, *fld, false, SeamPolicy::Periodic);
      for (std::size_t i = 0; i < n; ++i)
        w_of_lf[c * n + i] -= lch[i];
    }
    return w_of_lf;
  };

  op.adjoint_apply = [&bank, fld, g, n, n_ch](const std::vector<cd>& v) {
    // (W L)^* = L^* W^*; (channelwise L . W)^* = W^* . channelwise L^*.
    std::vector<cd> wstar = detail::wavelet_stack_adjoint(bank, v);
    Signal first(g, std::move(wstar));
    std::vector<cd> a = apply_deformation_transpose(first, *fld).samples();

    std::vector<cd> lstar(v.size());
    for (std::size_t c = 0; c < n_ch; ++c) {
      Signal ch = detail::to_signal(g, v, c * n);
      std::vector<cd> lch = apply_deformation_transpose(ch, *fld).samples();
      std::copy(lch.begin(), lch.end(),
                lstar.begin() + static_cast<std::ptrdiff_t>(c * n));
    }
    std::vector<cd> b = detail::wavelet_stack_adjoint(bank, lstar);
    for (std::size_t i = 0; i < n; ++i) a[i] -= b[i];
    return a;
  };
  return op;
}

// ||[W_J, L_tau]|| / K_{1+alpha}(tau), the measured counterpart of the
// commutator bound.  Zero deformation reports ratio 0.
struct CommutatorResult {
  NormEstimate norm;
  double k1alpha = 0.0;
  double ratio = 0.0;
};

inline CommutatorResult commutator_bound_ratio(
    const FilterBank& bank, const DeformationField& field, double alpha,
    const PowerIterOptions& opts = {},
    MiddleFactor mode = MiddleFactor::LogRatio) {
  CommutatorResult res;
  LinearOperator op = commutator_handle(bank, field);
  res.norm = operator_norm(op, opts);
  DeformationMetrics m = compute_metrics(field, {alpha});
  res.k1alpha = k1alpha_functional(m, bank.J, alpha, mode);
  res.ratio = (res.k1alpha > 0.0) ? res.norm.value / res.k1alpha : 0.0;
  return res;
}

}  // namespace wscat
