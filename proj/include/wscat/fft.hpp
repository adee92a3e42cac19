#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <vector>

#include <fftw3.h>

#include "wscat/errors.hpp"

namespace wscat {

// Thin wrapper around FFTW complex transforms.
//
// Plans are created with FFTW_ESTIMATE so planning never benchmarks (measured
// plans depend on machine noise and would break bit-reproducibility), and with
// FFTW_UNALIGNED so one cached plan serves any std::vector buffer.  Plan
// creation is serialized by a mutex; fftw_execute_dft on an existing plan is
// thread-safe.
class FftEngine {
 public:
  static FftEngine& instance() {
    static FftEngine engine;
    return engine;
  }

  // In-place transform of `data`, sign = FFTW_FORWARD or FFTW_BACKWARD.
  // No normalization is applied in either direction.
  void transform(std::vector<std::complex<double>>& data, int sign) {
    if (data.empty()) return;
    fftw_plan plan = plan_for(data.size(), sign);
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, buf, buf);
  }

  FftEngine(const FftEngine&) = delete;
  FftEngine& operator=(const FftEngine&) = delete;

 private:
  FftEngine() = default;

  ~FftEngine() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan plan_for(std::size_t n, int sign) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto key = std::make_pair(n, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    // Planning with FFTW_ESTIMATE does not touch the buffer contents, but use
    // a scratch buffer anyway so caller data is never an input to planning.
    std::vector<std::complex<double>> scratch(n);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, sign,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!plan) throw Error("fft: plan creation failed");
    plans_.emplace(key, plan);
    return plan;
  }

  std::mutex mutex_;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

// Unnormalized DFT: X_k = sum_n x_n exp(-2*pi*i*k*n/N).
inline void fft_inplace(std::vector<std::complex<double>>& data) {
  FftEngine::instance().transform(data, FFTW_FORWARD);
}

// Unnormalized inverse DFT: x_n = sum_k X_k exp(+2*pi*i*k*n/N).  Divide by N
// to invert fft_inplace.
inline void ifft_inplace(std::vector<std::complex<double>>& data) {
  FftEngine::instance().transform(data, FFTW_BACKWARD);
}

}  // namespace wscat
