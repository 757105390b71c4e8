#include <doctest.h>

#include <cmath>
#include <numbers>

#include "stn/analysis.hpp"
#include "stn/harmonic.hpp"
#include "test_util.hpp"

using namespace stn;
using std::numbers::pi;

namespace {

std::vector<PeakEstimate> peaks_from(const std::vector<double>& freqs) {
  std::vector<PeakEstimate> out(freqs.size());
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    out[i].partial_index = static_cast<int>(i) + 1;
    out[i].frequency_hz = freqs[i];
  }
  return out;
}

}  // namespace

TEST_CASE("stiff string partial series") {
  const auto f = partial_frequencies(100.0, 1e-3, 5, 12000.0);
  REQUIRE(f.size() == 5);
  for (int m = 1; m <= 5; ++m) {
    CHECK(f[m - 1] == doctest::Approx(m * 100.0 * (1.0 + 1e-3 * m * m)).epsilon(1e-15));
  }
  for (std::size_t i = 1; i < f.size(); ++i) CHECK(f[i] > f[i - 1]);

  // Truncation below nyquist.
  const auto g = partial_frequencies(1000.0, 0.0, 50, 12000.0);
  CHECK(g.size() == 11);
  CHECK(g.back() < 12000.0);

  CHECK_THROWS_AS(partial_frequencies(0.0, 1e-4, 5, 12000.0), std::invalid_argument);
  CHECK_THROWS_AS(partial_frequencies(13000.0, 1e-4, 5, 12000.0), std::invalid_argument);
  CHECK_THROWS_AS(partial_frequencies(100.0, -1e-4, 5, 12000.0), std::invalid_argument);
  CHECK_THROWS_AS(partial_frequencies(100.0, 1e-4, 0, 12000.0), std::invalid_argument);
}

TEST_CASE("default partial count") {
  CHECK(default_partial_count(27.5, 1e-4, 24000) == 100);  // capped
  CHECK(default_partial_count(5000.0, 0.0, 24000) == 2);   // 10 kHz < 10.8 kHz < 15 kHz
  CHECK(default_partial_count(10000.0, 0.0, 24000) == 1);  // floor of one partial
}

TEST_CASE("pairwise inharmonicity inversion is exact") {
  const auto freqs = partial_frequencies(261.63, 5e-4, 6, 12000.0);
  const InharmonicityEstimate est = estimate_inharmonicity(peaks_from(freqs));
  CHECK(est.samples.size() == 30);  // all ordered pairs of 6 peaks
  CHECK(std::abs(est.mean - 5e-4) / 5e-4 < 1e-10);
  for (double b : est.samples) CHECK(std::abs(b - 5e-4) / 5e-4 < 1e-9);

  // f0 recovery closes the loop.
  CHECK(estimate_f0(peaks_from(freqs), est.mean) == doctest::Approx(261.63).epsilon(1e-10));
}

TEST_CASE("inharmonicity estimation discards invalid pairs") {
  // Peaks below the harmonic series (negative implied stiffness) produce
  // negative samples, which are dropped.
  std::vector<double> freqs = {100.0, 199.0, 297.0, 394.0};  // compressed series
  const auto peaks = peaks_from(freqs);
  CHECK_THROWS_AS(estimate_inharmonicity(peaks), EstimationError);

  std::vector<PeakEstimate> one = {peaks[0]};
  CHECK_THROWS_AS(estimate_inharmonicity(one), std::invalid_argument);
}

TEST_CASE("damping law") {
  const DampingCoeffs d{0.5, 1e-2, 1e-9, 1e-4};
  const std::vector<double> freqs = {100.0, 1000.0, 5000.0};
  const auto sig = decay_rates(freqs, d, 24000);
  REQUIRE(sig.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    const double f = freqs[i];
    const double expected =
        pi * (0.5 + 1e-2 * std::sqrt(f) + 1e-9 * f * f * f + 1e-4 * f) / 24000.0;
    CHECK(sig[i] == doctest::Approx(expected).epsilon(1e-14));
    CHECK(sig[i] >= 0.0);
  }

  // Coefficients act through their moduli.
  const DampingCoeffs neg{-0.5, -1e-2, -1e-9, -1e-4};
  const auto sig_neg = decay_rates(freqs, neg, 24000);
  for (std::size_t i = 0; i < 3; ++i) CHECK(sig_neg[i] == sig[i]);
}

TEST_CASE("partial accumulation matches the direct oscillator sum") {
  PartialSet set;
  set.frequencies = {220.0, 445.1, 673.9};
  set.amplitudes = {0.5, 0.3, 0.2};
  set.decay_rates = {1e-4, 2e-4, 3e-4};
  const int fs = 24000;
  const AudioBuffer fast = render_partial_set(set, 24000, fs);

  double max_err = 0.0;
  for (std::size_t n = 0; n < fast.size(); ++n) {
    double direct = 0.0;
    for (std::size_t p = 0; p < set.frequencies.size(); ++p) {
      direct += set.amplitudes[p] * std::exp(-set.decay_rates[p] * static_cast<double>(n)) *
                std::sin(2.0 * pi * set.frequencies[p] * static_cast<double>(n) / fs);
    }
    max_err = std::max(max_err, std::abs(fast.samples[n] - direct));
  }
  CHECK(max_err < 1e-9);
}

TEST_CASE("phantom partial families") {
  // Vertical set with f0 = 65.4: even phantoms at 2 f_m for partials with
  // 2 f_m >= 10 f0, odd phantoms at consecutive sums.
  const double f0 = 65.4, b = 1e-3;
  const int fs = 24000;
  PolarizationParams params;
  params.f0 = f0;
  params.inharmonicity = b;
  params.alpha_v = {0.5, 0.45, 0.4, 0.35, 0.3, 0.25, 0.2, 0.15};
  params.alpha_h = {0.25, 0.2, 0.18, 0.16, 0.14, 0.12, 0.1, 0.08};
  const DampingCoeffs damping{0.2, 1e-3, 1e-10, 1e-5};
  const auto sets = transverse_sets(params, damping, fs);
  REQUIRE(sets.size() == 2);
  CHECK(sets[0].family == PartialFamily::vertical);
  CHECK(sets[1].family == PartialFamily::horizontal);

  const auto phantoms = phantom_partials(sets[0], sets[1], f0, 12000.0);
  // Two even families (one per polarization) and two odd families.
  REQUIRE(phantoms.size() == 4);

  const auto& freqs_v = sets[0].frequencies;
  const auto& sig_v = sets[0].decay_rates;

  for (const PartialSet& fam : phantoms) {
    REQUIRE(fam.frequencies.size() == fam.amplitudes.size());
    REQUIRE(fam.frequencies.size() == fam.decay_rates.size());
    for (std::size_t i = 0; i < fam.frequencies.size(); ++i) {
      CHECK(fam.frequencies[i] >= 10.0 * f0);
      CHECK(fam.frequencies[i] < 12000.0);
      if (i > 0) CHECK(fam.frequencies[i] > fam.frequencies[i - 1]);
    }
  }

  // Even vertical family: exactly 2 f_m, alpha^2, 2 sigma.
  const PartialSet& even_v = phantoms[0];
  CHECK(even_v.family == PartialFamily::phantom_even_v);
  std::size_t matched = 0;
  for (std::size_t m = 0; m < freqs_v.size(); ++m) {
    const double target = 2.0 * freqs_v[m];
    if (target < 10.0 * f0 || target >= 12000.0) continue;
    bool found = false;
    for (std::size_t i = 0; i < even_v.frequencies.size(); ++i) {
      if (std::abs(even_v.frequencies[i] - target) < 1e-9) {
        CHECK(even_v.amplitudes[i] ==
              doctest::Approx(params.alpha_v[m] * params.alpha_v[m]).epsilon(1e-12));
        CHECK(even_v.decay_rates[i] == doctest::Approx(2.0 * sig_v[m]).epsilon(1e-12));
        found = true;
      }
    }
    CHECK(found);
    ++matched;
  }
  CHECK(matched > 0);

  // Odd family: consecutive sums f_m + f_{m+1} with product amplitudes.
  const PartialSet& odd = phantoms[2];
  CHECK(odd.family == PartialFamily::phantom_odd);
  bool found_sum = false;
  for (std::size_t m = 0; m + 1 < freqs_v.size(); ++m) {
    const double target = freqs_v[m] + freqs_v[m + 1];
    if (target < 10.0 * f0 || target >= 12000.0) continue;
    for (std::size_t i = 0; i < odd.frequencies.size(); ++i) {
      if (std::abs(odd.frequencies[i] - target) < 1e-9) {
        CHECK(odd.amplitudes[i] ==
              doctest::Approx(params.alpha_v[m] * params.alpha_v[m + 1]).epsilon(1e-12));
        CHECK(odd.decay_rates[i] == doctest::Approx(sig_v[m] + sig_v[m + 1]).epsilon(1e-12));
        found_sum = true;
      }
    }
  }
  CHECK(found_sum);

  // High f0 admits nothing: frequencies never reach 10 f0 below nyquist.
  PolarizationParams high = params;
  high.f0 = 2000.0;
  high.alpha_v.resize(3);
  high.alpha_h.resize(3);
  const auto high_sets = transverse_sets(high, damping, fs);
  CHECK(phantom_partials(high_sets[0], high_sets[1], high.f0, 12000.0).empty());
}

TEST_CASE("transverse sets share the damping law and shift the horizontal series") {
  PolarizationParams params;
  params.f0 = 220.0;
  params.inharmonicity = 2e-4;
  params.detune = 0.7;
  params.alpha_v = {0.5, 0.4};
  params.alpha_h = {0.3, 0.2};
  const DampingCoeffs damping{0.5, 1e-2, 1e-9, 1e-4};
  const auto sets = transverse_sets(params, damping, 24000);
  REQUIRE(sets.size() == 2);
  REQUIRE(sets[0].frequencies.size() == 2);
  REQUIRE(sets[1].frequencies.size() == 2);
  for (int m = 1; m <= 2; ++m) {
    CHECK(sets[0].frequencies[m - 1] ==
          doctest::Approx(m * 220.0 * (1.0 + 2e-4 * m * m)).epsilon(1e-14));
    CHECK(sets[1].frequencies[m - 1] ==
          doctest::Approx(m * 220.7 * (1.0 + 2e-4 * m * m)).epsilon(1e-14));
    // Same sigma(f) law evaluated at each family's own frequencies.
    const auto expect_v = decay_rates({sets[0].frequencies[m - 1]}, damping, 24000);
    CHECK(sets[0].decay_rates[m - 1] == expect_v[0]);
  }
}

TEST_CASE("render_harmonic composes polarizations and clips amplitudes") {
  PolarizationParams params;
  params.f0 = 440.0;
  params.inharmonicity = 0.0;
  params.detune = 0.0;
  params.alpha_v = {5.0};   // clipped to 1
  params.alpha_h = {-3.0};  // clipped to -1
  const DampingCoeffs none{0.0, 0.0, 0.0, 0.0};
  const AudioBuffer out = render_harmonic(params, none, 2400, 24000, false);
  // Clipped to +1 and -1: the polarizations cancel exactly.
  CHECK(peak_abs(out) < 1e-12);
}
