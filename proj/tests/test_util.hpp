#pragma once

// Shared helpers for the unit and acceptance suites: independent oracle
// implementations (naive DFT, textbook Adam) and small measurement
// utilities. Everything here is deliberately written the straightforward
// O(n^2) way so it cannot share bugs with the library code under test.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "stn/audio.hpp"

namespace testutil {

inline std::vector<std::complex<double>> naive_dft(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double ang = -2.0 * std::numbers::pi * static_cast<double>(k * t) / n;
      acc += x[t] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    out[k] = acc;
  }
  return out;
}

inline std::vector<double> naive_dct2(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    double acc = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      acc += x[t] * std::cos(std::numbers::pi / n * (t + 0.5) * k);
    }
    const double scale = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    out[k] = scale * acc;
  }
  return out;
}

/// Textbook Adam with the same clipping contract as the library, written
/// from the update equations.
class ReferenceAdam {
 public:
  ReferenceAdam(double lr, double beta1, double beta2, double eps, double clip)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), clip_(clip) {}

  void step(std::vector<double>& params, std::vector<double> grad) {
    double norm = 0.0;
    for (double g : grad) norm += g * g;
    norm = std::sqrt(norm);
    if (norm > clip_) {
      for (double& g : grad) g *= clip_ / norm;
    }
    if (m_.empty()) {
      m_.assign(params.size(), 0.0);
      v_.assign(params.size(), 0.0);
    }
    ++t_;
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
      v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
      const double mhat = m_[i] / (1.0 - std::pow(beta1_, t_));
      const double vhat = v_[i] / (1.0 - std::pow(beta2_, t_));
      params[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }

 private:
  double lr_, beta1_, beta2_, eps_, clip_;
  std::vector<double> m_, v_;
  long t_ = 0;
};

/// Least-squares line fit; returns (slope, intercept).
inline std::pair<double, double> line_fit(const std::vector<double>& x,
                                          const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return {slope, (sy - slope * sx) / n};
}

/// Interior local minima below `ceiling`, as indices.
inline std::vector<std::size_t> local_minima(const std::vector<double>& v, double ceiling) {
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    if (v[i] < v[i - 1] && v[i] <= v[i + 1] && v[i] < ceiling) out.push_back(i);
  }
  return out;
}

struct SpectrumPeak {
  double frequency_hz = 0.0;
  double amplitude = 0.0;  // full-scale units (sine of amplitude a measures a)
};

/// Hann-windowed averaged spectrum peak near expected_hz, searched within
/// +-search_hz, with parabolic refinement. Window must divide into the
/// signal at hop window/2.
SpectrumPeak measure_peak(const stn::AudioBuffer& in, std::size_t window, double expected_hz,
                          double search_hz);

/// RMS of a sample range.
inline double range_rms(const std::vector<double>& x, std::size_t begin, std::size_t end) {
  double acc = 0.0;
  for (std::size_t i = begin; i < end; ++i) acc += x[i] * x[i];
  return std::sqrt(acc / static_cast<double>(end - begin));
}

inline double energy(const std::vector<double>& x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc;
}

/// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& tag);

}  // namespace testutil
