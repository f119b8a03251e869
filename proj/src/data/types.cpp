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

#include "data/types.hpp"

#include <cmath>
#include <filesystem>
#include <set>
#include <unordered_set>

namespace nns {

namespace {

template <typename Derived>
bool AllFinite(const Eigen::DenseBase<Derived>& m) {
  return m.derived().array().isFinite().all();
}

void Check(ValidationReport& r, bool ok, const std::string& issue) {
  if (!ok) r.issues.push_back(issue);
}

}  // namespace

ValidationReport Validate(const AudioConfig& c) {
  ValidationReport r;
  Check(r, c.sample_rate > 0, "sample_rate must be positive");
  Check(r, c.hop_length > 0, "hop_length must be positive");
  Check(r, c.win_length > 0, "win_length must be positive");
  Check(r, c.hop_length < c.win_length, "hop_length must be < win_length");
  Check(r, c.n_mels >= 1, "n_mels must be >= 1");
  Check(r, c.fmin >= 0.0, "fmin must be >= 0");
  Check(r, c.fmax > c.fmin, "fmax must be > fmin");
  Check(r, c.fmax <= c.sample_rate / 2.0 + 1e-9,
        "fmax must not exceed the Nyquist frequency");
  return r;
}

ValidationReport Validate(const MelSpectrogram& m) {
  ValidationReport r = Validate(m.config);
  Check(r, m.frames.rows() >= 1, "mel must have at least one frame");
  Check(r, m.frames.cols() == m.config.n_mels,
        "mel band count must equal config.n_mels");
  Check(r, AllFinite(m.frames), "mel entries must be finite");
  return r;
}

ValidationReport Validate(const PhonemeSequence& p, int vocab_size) {
  ValidationReport r;
  Check(r, !p.ids.empty(), "phoneme sequence must be non-empty");
  for (size_t i = 0; i < p.ids.size(); ++i) {
    if (p.ids[i] < 0 || p.ids[i] >= vocab_size) {
      r.issues.push_back("phoneme id out of vocabulary at position " +
                         std::to_string(i));
    }
  }
  return r;
}

ValidationReport Validate(const ProsodyTargets& p, Eigen::Index mel_frames) {
  ValidationReport r;
  const size_t L = p.durations.size();
  Check(r, L >= 1, "prosody targets must be non-empty");
  Check(r, p.pitch.size() == L && p.energy.size() == L,
        "durations/pitch/energy length mismatch");
  int64_t total = 0;
  for (size_t i = 0; i < L; ++i) {
    if (p.durations[i] < 1) {
      r.issues.push_back("duration must be >= 1 at position " +
                         std::to_string(i));
    }
    total += p.durations[i];
  }
  if (mel_frames >= 0) {
    Check(r, total == mel_frames,
          "sum of durations must equal paired mel frame count");
  }
  for (size_t i = 0; i < p.pitch.size(); ++i) {
    if (!std::isfinite(p.pitch[i])) {
      r.issues.push_back("pitch must be finite at position " +
                         std::to_string(i));
    }
  }
  for (size_t i = 0; i < p.energy.size(); ++i) {
    if (!std::isfinite(p.energy[i])) {
      r.issues.push_back("energy must be finite at position " +
                         std::to_string(i));
    }
  }
  return r;
}

ValidationReport Validate(const SpeakerEmbedding& s,
                          Eigen::Index expected_dim) {
  ValidationReport r;
  if (expected_dim >= 0) {
    Check(r, s.vector.size() == expected_dim,
          "speaker embedding has wrong dimension");
  } else {
    Check(r, s.vector.size() >= 1, "speaker embedding must be non-empty");
  }
  Check(r, AllFinite(s.vector), "speaker embedding entries must be finite");
  return r;
}

ValidationReport Validate(const DiagonalGaussian& g) {
  ValidationReport r;
  Check(r, g.mu.size() == g.log_var.size(), "length mismatch");
  Check(r, g.mu.size() >= 1, "gaussian must have dimension >= 1");
  Check(r, AllFinite(g.mu), "mu entries must be finite");
  Check(r, AllFinite(g.log_var), "log_var entries must be finite");
  return r;
}

ValidationReport Validate(const LatentSequence& z) {
  ValidationReport r;
  Check(r, z.z.rows() == z.eps.rows() && z.z.cols() == z.eps.cols(),
        "z and eps must have the same shape");
  Check(r, z.z.rows() >= 1 && z.z.cols() >= 1, "latent must be non-empty");
  Check(r, AllFinite(z.z) && AllFinite(z.eps),
        "latent entries must be finite");
  return r;
}

ValidationReport Validate(const CorpusManifest& m, bool check_files) {
  ValidationReport r;
  std::set<std::string> train_speakers;
  std::set<std::string> unseen_speakers;
  std::unordered_set<std::string> ids;
  for (const auto& e : m.entries) {
    if (!ids.insert(e.utterance_id).second) {
      r.issues.push_back("duplicate utterance id: " + e.utterance_id);
    }
    if (e.split == "train") {
      train_speakers.insert(e.speaker_id);
    } else if (e.split == "unseen-eval") {
      unseen_speakers.insert(e.speaker_id);
    } else if (e.split != "seen-eval") {
      r.issues.push_back("unknown split label: " + e.split);
    }
    if (check_files) {
      namespace fs = std::filesystem;
      for (const std::string& rel : {e.wav_path, e.mel_path, e.prosody_path}) {
        fs::path p = fs::path(m.root_dir) / rel;
        if (!fs::exists(p)) {
          r.issues.push_back("referenced file missing: " + p.string());
        }
      }
    }
  }
  for (const auto& s : unseen_speakers) {
    if (train_speakers.count(s)) {
      r.issues.push_back("unseen-eval speaker also appears in train: " + s);
    }
  }
  return r;
}

}  // namespace nns
