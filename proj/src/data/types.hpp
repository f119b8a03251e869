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

#ifndef NNSPEECH_DATA_TYPES_HPP_
#define NNSPEECH_DATA_TYPES_HPP_

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace nns {

// All domain types are immutable by convention after construction and safe
// to share across threads. Feature matrices are float32 (the on-disk
// precision); model-side math promotes to double.

struct AudioConfig {
  int sample_rate = 22050;
  int hop_length = 256;
  int win_length = 1024;
  int n_mels = 80;
  double fmin = 0.0;
  double fmax = 8000.0;

  bool operator==(const AudioConfig&) const = default;
};

struct MelSpectrogram {
  // frames(t, m): log mel energy of frame t, band m. Rows T, cols n_mels.
  Eigen::MatrixXf frames;
  AudioConfig config;
};

struct PhonemeSequence {
  std::vector<int32_t> ids;
  std::string text;  // optional provenance
};

struct ProsodyTargets {
  std::vector<int32_t> durations;  // frames per phoneme
  std::vector<float> pitch;        // Hz; 0 marks unvoiced
  std::vector<float> energy;       // mean frame RMS
};

enum class SpeakerSource : uint8_t { kLookup = 0, kPredicted = 1, kAveraged = 2 };

struct SpeakerEmbedding {
  Eigen::VectorXd vector;
  SpeakerSource source = SpeakerSource::kLookup;
};

struct DiagonalGaussian {
  Eigen::VectorXd mu;
  Eigen::VectorXd log_var;

  Eigen::Index dim() const { return mu.size(); }
};

enum class LatentSource : uint8_t { kRecognition = 0, kPrior = 1 };

struct LatentSequence {
  Eigen::MatrixXd z;    // L x D_z
  Eigen::MatrixXd eps;  // noise actually used; zero matrix for mean mode
  LatentSource source = LatentSource::kRecognition;
};

struct ManifestEntry {
  std::string utterance_id;
  std::string speaker_id;
  std::string split;  // train | seen-eval | unseen-eval
  std::string wav_path;
  std::string mel_path;
  std::string prosody_path;
  std::vector<int32_t> phoneme_ids;
};

struct CorpusManifest {
  std::vector<ManifestEntry> entries;
  std::string root_dir;  // paths in entries are relative to this
};

struct ValidationReport {
  std::vector<std::string> issues;
  bool ok() const { return issues.empty(); }
};

ValidationReport Validate(const AudioConfig& c);
ValidationReport Validate(const MelSpectrogram& m);
ValidationReport Validate(const PhonemeSequence& p, int vocab_size);
// Pass mel_frames < 0 to skip the duration/frame pairing check.
ValidationReport Validate(const ProsodyTargets& p, Eigen::Index mel_frames);
ValidationReport Validate(const SpeakerEmbedding& s, Eigen::Index expected_dim);
ValidationReport Validate(const DiagonalGaussian& g);
ValidationReport Validate(const LatentSequence& z);
ValidationReport Validate(const CorpusManifest& m, bool check_files);

}  // namespace nns

#endif  // NNSPEECH_DATA_TYPES_HPP_
