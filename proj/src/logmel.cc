// src/logmel.cc
//
// Copyright 2026 The TTA Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <fftw3.h>

#include <cmath>
#include <memory>

#include "tta/corpus.h"
#include "tta/error.h"

namespace tta {

namespace {

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// Triangular HTK-style filters, num_bins x (fft_size / 2 + 1).
Mat MelFilterbank(int num_bins, int fft_size, int sample_rate, double low, double high) {
  const int n_freq = fft_size / 2 + 1;
  Mat fb = Mat::Zero(num_bins, n_freq);
  const double mel_lo = HzToMel(low), mel_hi = HzToMel(high);
  std::vector<double> edges(num_bins + 2);
  for (int i = 0; i < num_bins + 2; ++i) {
    edges[i] = MelToHz(mel_lo + (mel_hi - mel_lo) * i / (num_bins + 1));
  }
  for (int b = 0; b < num_bins; ++b) {
    for (int k = 0; k < n_freq; ++k) {
      const double f = static_cast<double>(k) * sample_rate / fft_size;
      double w = 0.0;
      if (f > edges[b] && f <= edges[b + 1]) {
        w = (f - edges[b]) / (edges[b + 1] - edges[b]);
      } else if (f > edges[b + 1] && f < edges[b + 2]) {
        w = (edges[b + 2] - f) / (edges[b + 2] - edges[b + 1]);
      }
      fb(b, k) = w;
    }
  }
  return fb;
}

struct PlanDeleter {
  void operator()(fftw_plan_s *p) const { fftw_destroy_plan(p); }
};

}  // namespace

FeatureMatrix LogMel(std::span<const double> waveform, int sample_rate, const LogMelOptions &opts) {
  if (sample_rate <= 0) throw InputError("sample_rate must be positive");
  const int win = static_cast<int>(std::lround(opts.window_ms * 1e-3 * sample_rate));
  const int hop = static_cast<int>(std::lround(opts.hop_ms * 1e-3 * sample_rate));
  if (win < 2 || hop < 1) throw InputError("window/hop too small for sample rate");
  if (static_cast<int64_t>(waveform.size()) < win) {
    throw InputError("waveform of " + std::to_string(waveform.size()) +
                     " samples is shorter than one " + std::to_string(win) + "-sample window");
  }
  int fft_size = 1;
  while (fft_size < win) fft_size <<= 1;
  const int n_freq = fft_size / 2 + 1;
  const int frames = static_cast<int>((waveform.size() - win) / hop) + 1;
  const double high = opts.high_hz > 0.0 ? opts.high_hz : sample_rate / 2.0;
  const Mat fb = MelFilterbank(opts.num_bins, fft_size, sample_rate, opts.low_hz, high);

  std::vector<double> window(win);
  for (int i = 0; i < win; ++i) window[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / (win - 1));

  double *in = fftw_alloc_real(fft_size);
  fftw_complex *out = fftw_alloc_complex(n_freq);
  std::unique_ptr<fftw_plan_s, PlanDeleter> plan(
      fftw_plan_dft_r2c_1d(fft_size, in, out, FFTW_ESTIMATE));

  FeatureMatrix result{Mat(frames, opts.num_bins), 1000.0 / opts.hop_ms};
  Eigen::VectorXd power(n_freq);
  for (int f = 0; f < frames; ++f) {
    const double *src = waveform.data() + static_cast<size_t>(f) * hop;
    for (int i = 0; i < fft_size; ++i) in[i] = i < win ? src[i] * window[i] : 0.0;
    fftw_execute(plan.get());
    for (int k = 0; k < n_freq; ++k) power(k) = out[k][0] * out[k][0] + out[k][1] * out[k][1];
    Eigen::VectorXd mel = fb * power;
    for (int b = 0; b < opts.num_bins; ++b) result.data(f, b) = std::log(mel(b) + opts.floor);
  }
  plan.reset();
  fftw_free(in);
  fftw_free(out);
  return result;
}

}  // namespace tta
