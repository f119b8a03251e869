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
//
// Deterministic synthetic multi-speaker corpus. Each speaker is a
// harmonic-plus-noise voice with its own spectral envelope (formant shift,
// tilt), base pitch and speaking rate; each phoneme symbol has its own
// formant pattern. Every quantity is a pure function of (seed, ids), which
// is what makes generator parameters usable as test oracles.

#ifndef NNSPEECH_CORPUS_CORPUS_HPP_
#define NNSPEECH_CORPUS_CORPUS_HPP_

#include <string>
#include <vector>

#include "data/types.hpp"
#include "util/kvfile.hpp"

namespace nns {

struct CorpusSpec {
  int n_speakers = 8;
  int utterances_per_speaker = 50;
  int phoneme_vocab_size = 24;  // includes the silence symbol, id 0
  uint64_t seed = 1;
  double unseen_speaker_fraction = 0.25;
  AudioConfig audio;

  static CorpusSpec FromKv(const KvFile& kv);
  KvFile ToKv() const;
};

ValidationReport Validate(const CorpusSpec& spec);

struct PhonemeSymbol {
  std::string name;
  bool voiced = true;
  bool silence = false;
  double formant1_hz = 500.0;
  double formant2_hz = 1500.0;
  double bandwidth1_hz = 120.0;
  double bandwidth2_hz = 160.0;
  double base_duration_frames = 6.0;
  double pitch_factor = 1.0;   // multiplies the speaker base pitch
  double energy_factor = 1.0;  // target frame RMS scale
};

struct SyntheticSpeaker {
  std::string speaker_id;
  int index = 0;
  double base_pitch_hz = 200.0;
  double formant_shift = 1.0;    // vocal-tract length proxy
  double tilt_db_per_octave = -4.0;
  double speaking_rate = 1.0;    // duration multiplier, >1 is slower
  double loudness = 1.0;
};

struct RenderedUtterance {
  std::vector<float> samples;
  std::vector<size_t> boundaries;      // phoneme end positions in samples
  std::vector<int32_t> frame_durations;  // per phoneme, sums to mel frames
  std::vector<double> true_f0_hz;      // 0 for unvoiced/silence phonemes
};

// Deterministic derivations from the spec.
std::vector<PhonemeSymbol> MakeVocabulary(const CorpusSpec& spec);
SyntheticSpeaker MakeSpeaker(const CorpusSpec& spec, int speaker_index);
// Shared across speakers so that every text has a ground-truth rendering by
// every speaker; index is the utterance number.
PhonemeSequence MakeText(const CorpusSpec& spec, int utterance_index);

RenderedUtterance RenderUtterance(const CorpusSpec& spec,
                                  const SyntheticSpeaker& speaker,
                                  const PhonemeSequence& text,
                                  const std::vector<PhonemeSymbol>& vocab);

// Generates waveform/mel/prosody files plus symbols.txt, corpus_spec.txt
// and manifest.txt under out_dir. Returns the manifest.
CorpusManifest GenerateCorpus(const CorpusSpec& spec,
                              const std::string& out_dir);

// Split sizing used by GenerateCorpus, exposed for tests/tools.
int NumUnseenSpeakers(const CorpusSpec& spec);

}  // namespace nns

#endif  // NNSPEECH_CORPUS_CORPUS_HPP_
