// Copyright (c) 2026 nnSpeech Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dsp/mel.hpp"

#include <cmath>

#include "dsp/fft.hpp"
#include "util/error.hpp"

namespace nns {

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double MelToHz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

Eigen::MatrixXd MelFilterbank(const AudioConfig& config, int n_fft) {
  const int n_bins = n_fft / 2 + 1;
  Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(config.n_mels, n_bins);
  const double mel_lo = HzToMel(config.fmin);
  const double mel_hi = HzToMel(config.fmax);
  std::vector<double> edges(static_cast<size_t>(config.n_mels) + 2);
  for (int i = 0; i < config.n_mels + 2; ++i) {
    edges[static_cast<size_t>(i)] =
        MelToHz(mel_lo + (mel_hi - mel_lo) * i / (config.n_mels + 1));
  }
  const double bin_hz = static_cast<double>(config.sample_rate) / n_fft;
  for (int m = 0; m < config.n_mels; ++m) {
    const double f0 = edges[static_cast<size_t>(m)];
    const double f1 = edges[static_cast<size_t>(m) + 1];
    const double f2 = edges[static_cast<size_t>(m) + 2];
    for (int k = 0; k < n_bins; ++k) {
      const double f = k * bin_hz;
      double w = 0.0;
      if (f > f0 && f < f1) {
        w = (f - f0) / (f1 - f0);
      } else if (f >= f1 && f < f2) {
        w = (f2 - f) / (f2 - f1);
      }
      fb(m, k) = w;
    }
  }
  return fb;
}

Eigen::Index NumFrames(size_t num_samples, const AudioConfig& config) {
  if (num_samples < static_cast<size_t>(config.win_length)) return 0;
  return static_cast<Eigen::Index>(
      (num_samples - static_cast<size_t>(config.win_length)) /
          static_cast<size_t>(config.hop_length) +
      1);
}

namespace {

std::vector<double> HannWindow(int n) {
  std::vector<double> w(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    w[static_cast<size_t>(i)] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / n);
  }
  return w;
}

}  // namespace

MelSpectrogram ExtractMel(const std::vector<float>& waveform,
                          const AudioConfig& config) {
  auto report = Validate(config);
  if (!report.ok()) ThrowInvalid("invalid audio config: " + report.issues[0]);
  const Eigen::Index num_frames = NumFrames(waveform.size(), config);
  if (num_frames < 1) {
    ThrowInvalid("waveform shorter than one analysis window (" +
                 std::to_string(waveform.size()) + " < " +
                 std::to_string(config.win_length) + " samples)");
  }
  const int n_fft = NextPow2(config.win_length);
  const Eigen::MatrixXd fb = MelFilterbank(config, n_fft);
  const std::vector<double> window = HannWindow(config.win_length);

  MelSpectrogram mel;
  mel.config = config;
  mel.frames.resize(num_frames, config.n_mels);
  std::vector<double> frame(static_cast<size_t>(config.win_length));
  for (Eigen::Index t = 0; t < num_frames; ++t) {
    const size_t start = static_cast<size_t>(t) *
                         static_cast<size_t>(config.hop_length);
    for (int i = 0; i < config.win_length; ++i) {
      frame[static_cast<size_t>(i)] =
          static_cast<double>(waveform[start + static_cast<size_t>(i)]) *
          window[static_cast<size_t>(i)];
    }
    const std::vector<double> power =
        PowerSpectrum(frame.data(), config.win_length, n_fft);
    Eigen::Map<const Eigen::VectorXd> p(power.data(),
                                        static_cast<Eigen::Index>(power.size()));
    Eigen::VectorXd energies = fb * p;
    for (int m = 0; m < config.n_mels; ++m) {
      mel.frames(t, m) =
          static_cast<float>(std::log(std::max(energies(m), kMelFloor)));
    }
  }
  return mel;
}

std::vector<double> FrameRms(const std::vector<float>& waveform,
                             const AudioConfig& config) {
  const Eigen::Index num_frames = NumFrames(waveform.size(), config);
  std::vector<double> rms(static_cast<size_t>(num_frames));
  for (Eigen::Index t = 0; t < num_frames; ++t) {
    const size_t start = static_cast<size_t>(t) *
                         static_cast<size_t>(config.hop_length);
    double acc = 0.0;
    for (int i = 0; i < config.win_length; ++i) {
      const double v = waveform[start + static_cast<size_t>(i)];
      acc += v * v;
    }
    rms[static_cast<size_t>(t)] = std::sqrt(acc / config.win_length);
  }
  return rms;
}

namespace {

constexpr double kVoicingThreshold = 0.5;
constexpr double kSilenceRms = 1e-4;

// Autocorrelation f0 of one window; 0 marks unvoiced.
double AutocorrPitch(const float* x, int len, const AudioConfig& config,
                     double f0_min, double f0_max) {
  const int lag_min = std::max(
      2, static_cast<int>(std::floor(config.sample_rate / f0_max)));
  const int lag_max =
      std::min(len - 2, static_cast<int>(std::ceil(config.sample_rate / f0_min)));
  if (lag_max <= lag_min) return 0.0;

  double energy = 0.0;
  for (int i = 0; i < len; ++i) energy += static_cast<double>(x[i]) * x[i];
  if (std::sqrt(energy / len) < kSilenceRms) return 0.0;

  double max_r = 0.0;
  std::vector<double> corr(static_cast<size_t>(lag_max) + 1, 0.0);
  for (int lag = lag_min; lag <= lag_max; ++lag) {
    double num = 0.0, e0 = 0.0, e1 = 0.0;
    const int n = len - lag;
    for (int i = 0; i < n; ++i) {
      num += static_cast<double>(x[i]) * x[i + lag];
      e0 += static_cast<double>(x[i]) * x[i];
      e1 += static_cast<double>(x[i + lag]) * x[i + lag];
    }
    const double denom = std::sqrt(e0 * e1);
    const double r = denom > 0.0 ? num / denom : 0.0;
    corr[static_cast<size_t>(lag)] = r;
    max_r = std::max(max_r, r);
  }
  if (max_r < kVoicingThreshold) return 0.0;

  // The autocorrelation also peaks at integer multiples of the period;
  // take the smallest local peak close to the global one to avoid
  // octave-down errors.
  int best_lag = 0;
  for (int lag = lag_min; lag <= lag_max; ++lag) {
    const double r = corr[static_cast<size_t>(lag)];
    const bool local_peak =
        (lag == lag_min || r >= corr[static_cast<size_t>(lag) - 1]) &&
        (lag == lag_max || r >= corr[static_cast<size_t>(lag) + 1]);
    if (local_peak && r >= 0.9 * max_r && r >= kVoicingThreshold) {
      best_lag = lag;
      break;
    }
  }
  if (best_lag == 0) return 0.0;

  double lag_refined = best_lag;
  if (best_lag > lag_min && best_lag < lag_max) {
    // Parabolic interpolation around the autocorrelation peak.
    const double rm = corr[static_cast<size_t>(best_lag) - 1];
    const double r0 = corr[static_cast<size_t>(best_lag)];
    const double rp = corr[static_cast<size_t>(best_lag) + 1];
    const double denom = rm - 2.0 * r0 + rp;
    if (std::abs(denom) > 1e-12) lag_refined += 0.5 * (rm - rp) / denom;
  }
  return config.sample_rate / lag_refined;
}

double SegmentRms(const float* x, size_t len) {
  double acc = 0.0;
  for (size_t i = 0; i < len; ++i) acc += static_cast<double>(x[i]) * x[i];
  return len > 0 ? std::sqrt(acc / static_cast<double>(len)) : 0.0;
}

}  // namespace

std::vector<double> FramePitch(const std::vector<float>& waveform,
                               const AudioConfig& config, double f0_min,
                               double f0_max) {
  const Eigen::Index num_frames = NumFrames(waveform.size(), config);
  std::vector<double> pitch(static_cast<size_t>(num_frames), 0.0);
  for (Eigen::Index t = 0; t < num_frames; ++t) {
    const size_t start = static_cast<size_t>(t) *
                         static_cast<size_t>(config.hop_length);
    pitch[static_cast<size_t>(t)] = AutocorrPitch(
        waveform.data() + start, config.win_length, config, f0_min, f0_max);
  }
  return pitch;
}

ProsodyTargets ExtractProsody(const std::vector<float>& waveform,
                              const std::vector<size_t>& boundaries,
                              const AudioConfig& config) {
  if (boundaries.empty()) ThrowInvalid("phoneme boundaries are empty");
  if (boundaries.back() != waveform.size()) {
    ThrowInvalid("phoneme boundaries do not cover the waveform");
  }
  for (size_t i = 1; i < boundaries.size(); ++i) {
    if (boundaries[i] <= boundaries[i - 1]) {
      ThrowInvalid("phoneme boundaries must be strictly increasing");
    }
  }
  const Eigen::Index num_frames = NumFrames(waveform.size(), config);
  if (num_frames < 1) ThrowInvalid("waveform shorter than one window");

  const size_t L = boundaries.size();
  // Frame t belongs to the phoneme whose sample span contains the frame
  // start t*hop; the last phoneme absorbs trailing frames.
  std::vector<Eigen::Index> frames_per(L, 0);
  {
    size_t ph = 0;
    for (Eigen::Index t = 0; t < num_frames; ++t) {
      const size_t start = static_cast<size_t>(t) *
                           static_cast<size_t>(config.hop_length);
      while (ph + 1 < L && start >= boundaries[ph]) ++ph;
      ++frames_per[ph];
    }
  }
  for (size_t i = 0; i < L; ++i) {
    if (frames_per[i] == 0) {
      ThrowInvalid("phoneme " + std::to_string(i) +
                   " spans no analysis frame; boundaries too fine for the "
                   "hop length");
    }
  }

  // Pitch and energy use analysis windows contained in the phoneme's sample
  // span, so a window never straddles a boundary (the 4x window/hop overlap
  // would otherwise leak neighboring phonemes into silence segments). Short
  // phonemes fall back to one window over their whole span.
  ProsodyTargets p;
  p.durations.resize(L);
  p.pitch.resize(L);
  p.energy.resize(L);
  size_t seg_start = 0;
  for (size_t i = 0; i < L; ++i) {
    p.durations[i] = static_cast<int32_t>(frames_per[i]);
    const size_t seg_end = boundaries[i];
    const size_t seg_len = seg_end - seg_start;

    double pitch_sum = 0.0, energy_sum = 0.0;
    int voiced = 0, windows = 0;
    if (seg_len >= static_cast<size_t>(config.win_length)) {
      for (size_t start = seg_start;
           start + static_cast<size_t>(config.win_length) <= seg_end;
           start += static_cast<size_t>(config.hop_length)) {
        const double f0 = AutocorrPitch(waveform.data() + start,
                                        config.win_length, config, 80.0,
                                        400.0);
        if (f0 > 0.0) {
          pitch_sum += f0;
          ++voiced;
        }
        energy_sum += SegmentRms(waveform.data() + start,
                                 static_cast<size_t>(config.win_length));
        ++windows;
      }
    } else {
      const double f0 = AutocorrPitch(waveform.data() + seg_start,
                                      static_cast<int>(seg_len), config, 80.0,
                                      400.0);
      if (f0 > 0.0) {
        pitch_sum += f0;
        ++voiced;
      }
      energy_sum += SegmentRms(waveform.data() + seg_start, seg_len);
      ++windows;
    }
    p.pitch[i] = voiced > 0 ? static_cast<float>(pitch_sum / voiced) : 0.0f;
    p.energy[i] = static_cast<float>(energy_sum / windows);
    seg_start = seg_end;
  }
  return p;
}

}  // namespace nns
