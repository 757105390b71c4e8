#include "stn/harmonic.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace stn {

namespace {

constexpr int kMaxPartials = 100;

double clip_amp(double a) { return std::clamp(a, -1.0, 1.0); }

struct PhantomEntry {
  double frequency;
  double amplitude;
  double decay;
};

// Keeps entries passing the admission rule, sorts by frequency and
// merges exact duplicates (same frequency, amplitudes add).
PartialSet finish_family(std::vector<PhantomEntry> entries, PartialFamily family,
                         double f0, double nyquist) {
  std::erase_if(entries, [&](const PhantomEntry& e) {
    return !(e.frequency >= 10.0 * f0) || !(e.frequency < nyquist) || e.amplitude == 0.0;
  });
  std::sort(entries.begin(), entries.end(),
            [](const PhantomEntry& a, const PhantomEntry& b) {
              return a.frequency < b.frequency;
            });
  PartialSet set;
  set.family = family;
  for (const PhantomEntry& e : entries) {
    if (!set.frequencies.empty() && set.frequencies.back() == e.frequency) {
      set.amplitudes.back() = clip_amp(set.amplitudes.back() + e.amplitude);
      continue;
    }
    set.frequencies.push_back(e.frequency);
    set.amplitudes.push_back(clip_amp(e.amplitude));
    set.decay_rates.push_back(e.decay);
  }
  return set;
}

}  // namespace

std::vector<double> partial_frequencies(double f0, double inharmonicity, int count,
                                        double nyquist) {
  if (!(f0 > 0.0)) throw std::invalid_argument("partial_frequencies: f0 must be positive");
  if (!(f0 < nyquist)) {
    throw std::invalid_argument("partial_frequencies: f0 at or above nyquist");
  }
  if (inharmonicity < 0.0) {
    throw std::invalid_argument("partial_frequencies: negative inharmonicity");
  }
  if (count < 1) throw std::invalid_argument("partial_frequencies: count must be >= 1");

  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int m = 1; m <= count; ++m) {
    const double dm = static_cast<double>(m);
    const double f = dm * f0 * (1.0 + inharmonicity * dm * dm);
    if (f >= nyquist) break;
    out.push_back(f);
  }
  return out;
}

int default_partial_count(double f0, double inharmonicity, int sample_rate) {
  const double limit = 0.45 * sample_rate;
  int m = 0;
  while (m < kMaxPartials) {
    const double dm = static_cast<double>(m + 1);
    if (dm * f0 * (1.0 + inharmonicity * dm * dm) >= limit) break;
    ++m;
  }
  return std::max(m, 1);
}

std::vector<double> decay_rates(const std::vector<double>& frequencies,
                                const DampingCoeffs& damping, int sample_rate) {
  if (sample_rate <= 0) throw std::invalid_argument("decay_rates: bad sample rate");
  const double b0 = std::abs(damping.b0), b1 = std::abs(damping.b1);
  const double b2 = std::abs(damping.b2), b3 = std::abs(damping.b3);
  std::vector<double> out(frequencies.size());
  for (std::size_t i = 0; i < frequencies.size(); ++i) {
    const double f = frequencies[i];
    if (!(f > 0.0)) throw std::invalid_argument("decay_rates: non-positive frequency");
    out[i] = std::numbers::pi * (b0 + b1 * std::sqrt(f) + b2 * f * f * f + b3 * f) /
             static_cast<double>(sample_rate);
  }
  return out;
}

std::vector<PartialSet> phantom_partials(const PartialSet& vertical,
                                         const PartialSet& horizontal, double f0,
                                         double nyquist) {
  if (!(f0 > 0.0)) throw std::invalid_argument("phantom_partials: f0 must be positive");

  std::vector<PartialSet> families;
  const auto even_from = [&](const PartialSet& src, PartialFamily family) {
    std::vector<PhantomEntry> entries;
    for (std::size_t m = 0; m < src.frequencies.size(); ++m) {
      entries.push_back({2.0 * src.frequencies[m],
                         src.amplitudes[m] * src.amplitudes[m],
                         2.0 * src.decay_rates[m]});
    }
    return finish_family(std::move(entries), family, f0, nyquist);
  };
  const auto odd_from = [&](const PartialSet& src) {
    std::vector<PhantomEntry> entries;
    for (std::size_t m = 0; m + 1 < src.frequencies.size(); ++m) {
      const double amp = src.amplitudes[m] * src.amplitudes[m + 1];
      const double dec = src.decay_rates[m] + src.decay_rates[m + 1];
      entries.push_back({src.frequencies[m + 1] + src.frequencies[m], amp, dec});
      entries.push_back({src.frequencies[m + 1] - src.frequencies[m], amp, dec});
    }
    return finish_family(std::move(entries), PartialFamily::phantom_odd, f0, nyquist);
  };

  PartialSet even_v = even_from(vertical, PartialFamily::phantom_even_v);
  PartialSet even_h = even_from(horizontal, PartialFamily::phantom_even_h);
  PartialSet odd_v = odd_from(vertical);
  PartialSet odd_h = odd_from(horizontal);
  for (PartialSet* s : {&even_v, &even_h, &odd_v, &odd_h}) {
    if (!s->frequencies.empty()) families.push_back(std::move(*s));
  }
  return families;
}

void accumulate_partials(const PartialSet& set, std::vector<double>& out, int sample_rate) {
  if (sample_rate <= 0) throw std::invalid_argument("accumulate_partials: bad sample rate");
  const std::size_t n_samples = out.size();
  for (std::size_t p = 0; p < set.frequencies.size(); ++p) {
    const double amp = set.amplitudes[p];
    if (amp == 0.0) continue;
    const double omega = 2.0 * std::numbers::pi * set.frequencies[p] / sample_rate;
    const double decay = std::exp(-set.decay_rates[p]);
    // One complex rotation per sample: state = amp * e^(-sigma n) * e^(i omega n),
    // imaginary part is the decaying sine with zero initial phase.
    const std::complex<double> rot(decay * std::cos(omega), decay * std::sin(omega));
    std::complex<double> state(amp, 0.0);
    for (std::size_t n = 0; n < n_samples; ++n) {
      out[n] += state.imag();
      state *= rot;
    }
  }
}

AudioBuffer render_partial_set(const PartialSet& set, std::size_t duration,
                               int sample_rate) {
  AudioBuffer out = make_silence(duration, sample_rate);
  accumulate_partials(set, out.samples, sample_rate);
  return out;
}

std::vector<PartialSet> transverse_sets(const PolarizationParams& params,
                                        const DampingCoeffs& damping, int sample_rate) {
  const double nyquist = 0.5 * sample_rate;
  const int count = static_cast<int>(std::max(params.alpha_v.size(), params.alpha_h.size()));
  if (count == 0) throw std::invalid_argument("transverse_sets: no amplitudes");

  std::vector<double> fv = partial_frequencies(params.f0, params.inharmonicity, count, nyquist);
  std::vector<double> fh =
      partial_frequencies(params.f0 + params.detune, params.inharmonicity, count, nyquist);
  // Both polarizations share the partial order; truncate to the common length.
  const std::size_t shared = std::min(fv.size(), fh.size());
  fv.resize(shared);
  fh.resize(shared);

  const auto build = [&](std::vector<double> freqs, const std::vector<double>& alpha,
                         PartialFamily family) {
    PartialSet set;
    set.family = family;
    set.decay_rates = decay_rates(freqs, damping, sample_rate);
    set.frequencies = std::move(freqs);
    set.amplitudes.resize(set.frequencies.size(), 0.0);
    for (std::size_t i = 0; i < set.frequencies.size() && i < alpha.size(); ++i) {
      set.amplitudes[i] = clip_amp(alpha[i]);
    }
    return set;
  };
  return {build(std::move(fv), params.alpha_v, PartialFamily::vertical),
          build(std::move(fh), params.alpha_h, PartialFamily::horizontal)};
}

AudioBuffer render_harmonic(const PolarizationParams& params, const DampingCoeffs& damping,
                            std::size_t duration, int sample_rate, bool include_phantoms) {
  std::vector<PartialSet> sets = transverse_sets(params, damping, sample_rate);
  AudioBuffer out = make_silence(duration, sample_rate);
  accumulate_partials(sets[0], out.samples, sample_rate);
  accumulate_partials(sets[1], out.samples, sample_rate);
  if (include_phantoms) {
    for (const PartialSet& ph :
         phantom_partials(sets[0], sets[1], params.f0, 0.5 * sample_rate)) {
      accumulate_partials(ph, out.samples, sample_rate);
    }
  }
  return out;
}

}  // namespace stn
