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

#include "corpus/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "data/matio.hpp"
#include "dsp/mel.hpp"
#include "util/error.hpp"
#include "util/rng.hpp"

namespace nns {

namespace fs = std::filesystem;

CorpusSpec CorpusSpec::FromKv(const KvFile& kv) {
  CorpusSpec s;
  s.n_speakers = static_cast<int>(kv.GetInt("n_speakers", s.n_speakers));
  s.utterances_per_speaker = static_cast<int>(
      kv.GetInt("utterances_per_speaker", s.utterances_per_speaker));
  s.phoneme_vocab_size = static_cast<int>(
      kv.GetInt("phoneme_vocab_size", s.phoneme_vocab_size));
  s.seed = static_cast<uint64_t>(kv.GetInt("seed", static_cast<int64_t>(s.seed)));
  s.unseen_speaker_fraction =
      kv.GetDouble("unseen_speaker_fraction", s.unseen_speaker_fraction);
  s.audio.sample_rate =
      static_cast<int>(kv.GetInt("sample_rate", s.audio.sample_rate));
  s.audio.hop_length =
      static_cast<int>(kv.GetInt("hop_length", s.audio.hop_length));
  s.audio.win_length =
      static_cast<int>(kv.GetInt("win_length", s.audio.win_length));
  s.audio.n_mels = static_cast<int>(kv.GetInt("n_mels", s.audio.n_mels));
  s.audio.fmin = kv.GetDouble("fmin", s.audio.fmin);
  s.audio.fmax = kv.GetDouble("fmax", s.audio.fmax);
  return s;
}

KvFile CorpusSpec::ToKv() const {
  KvFile kv;
  kv.Set("n_speakers", static_cast<int64_t>(n_speakers));
  kv.Set("utterances_per_speaker", static_cast<int64_t>(utterances_per_speaker));
  kv.Set("phoneme_vocab_size", static_cast<int64_t>(phoneme_vocab_size));
  kv.Set("seed", static_cast<int64_t>(seed));
  kv.Set("unseen_speaker_fraction", unseen_speaker_fraction);
  kv.Set("sample_rate", static_cast<int64_t>(audio.sample_rate));
  kv.Set("hop_length", static_cast<int64_t>(audio.hop_length));
  kv.Set("win_length", static_cast<int64_t>(audio.win_length));
  kv.Set("n_mels", static_cast<int64_t>(audio.n_mels));
  kv.Set("fmin", audio.fmin);
  kv.Set("fmax", audio.fmax);
  return kv;
}

ValidationReport Validate(const CorpusSpec& spec) {
  ValidationReport r = Validate(spec.audio);
  if (spec.n_speakers < 4) r.issues.push_back("n_speakers must be >= 4");
  if (spec.utterances_per_speaker < 2) {
    r.issues.push_back("utterances_per_speaker must be >= 2");
  }
  if (spec.phoneme_vocab_size < 4) {
    r.issues.push_back("phoneme_vocab_size must be >= 4");
  }
  if (!(spec.unseen_speaker_fraction > 0.0 &&
        spec.unseen_speaker_fraction < 1.0)) {
    r.issues.push_back("unseen_speaker_fraction must be in (0, 1)");
  }
  return r;
}

int NumUnseenSpeakers(const CorpusSpec& spec) {
  int n = static_cast<int>(
      std::llround(spec.n_speakers * spec.unseen_speaker_fraction));
  n = std::max(1, n);
  n = std::min(spec.n_speakers - 2, n);
  return n;
}

std::vector<PhonemeSymbol> MakeVocabulary(const CorpusSpec& spec) {
  std::vector<PhonemeSymbol> vocab(static_cast<size_t>(spec.phoneme_vocab_size));
  vocab[0].name = "sil";
  vocab[0].silence = true;
  vocab[0].voiced = false;
  vocab[0].energy_factor = 0.0;
  vocab[0].base_duration_frames = 4.0;
  Rng master(spec.seed);
  for (int id = 1; id < spec.phoneme_vocab_size; ++id) {
    Rng rng = master.Fork(0x500 + static_cast<uint64_t>(id));
    PhonemeSymbol& p = vocab[static_cast<size_t>(id)];
    p.silence = false;
    // Roughly a quarter of the symbols are unvoiced.
    p.voiced = rng.Uniform() > 0.25;
    p.formant1_hz = rng.UniformRange(320.0, 900.0);
    p.formant2_hz = rng.UniformRange(1000.0, 2600.0);
    p.bandwidth1_hz = rng.UniformRange(90.0, 180.0);
    p.bandwidth2_hz = rng.UniformRange(120.0, 240.0);
    p.base_duration_frames = rng.UniformRange(4.0, 9.0);
    p.pitch_factor = rng.UniformRange(0.95, 1.05);
    p.energy_factor = rng.UniformRange(0.08, 0.2);
    char name[16];
    std::snprintf(name, sizeof(name), "p%02d%c", id, p.voiced ? 'v' : 'u');
    p.name = name;
  }
  return vocab;
}

SyntheticSpeaker MakeSpeaker(const CorpusSpec& spec, int speaker_index) {
  if (speaker_index < 0 || speaker_index >= spec.n_speakers) {
    ThrowInvalid("speaker index out of range");
  }
  Rng master(spec.seed);
  const int n = spec.n_speakers;

  // Base pitch and formant shift are spread over their ranges through two
  // seeded permutations, so any two speakers are guaranteed separated in at
  // least one strong cue; the rest is jittered per speaker.
  std::vector<int> pitch_rank(static_cast<size_t>(n));
  std::vector<int> shift_rank(static_cast<size_t>(n));
  std::iota(pitch_rank.begin(), pitch_rank.end(), 0);
  std::iota(shift_rank.begin(), shift_rank.end(), 0);
  Rng perm_rng = master.Fork(0x200);
  for (int i = n - 1; i > 0; --i) {
    std::swap(pitch_rank[static_cast<size_t>(i)],
              pitch_rank[perm_rng.UniformInt(static_cast<uint64_t>(i) + 1)]);
  }
  for (int i = n - 1; i > 0; --i) {
    std::swap(shift_rank[static_cast<size_t>(i)],
              shift_rank[perm_rng.UniformInt(static_cast<uint64_t>(i) + 1)]);
  }

  Rng rng = master.Fork(0x300 + static_cast<uint64_t>(speaker_index));
  SyntheticSpeaker s;
  s.index = speaker_index;
  char id[16];
  std::snprintf(id, sizeof(id), "spk%02d", speaker_index);
  s.speaker_id = id;
  const double pitch_pos =
      static_cast<double>(pitch_rank[static_cast<size_t>(speaker_index)]) /
      std::max(1, n - 1);
  const double shift_pos =
      static_cast<double>(shift_rank[static_cast<size_t>(speaker_index)]) /
      std::max(1, n - 1);
  s.base_pitch_hz = 140.0 + 140.0 * pitch_pos + rng.UniformRange(-4.0, 4.0);
  s.formant_shift = 0.85 + 0.35 * shift_pos + rng.UniformRange(-0.01, 0.01);
  s.tilt_db_per_octave = rng.UniformRange(-8.0, -1.0);
  s.speaking_rate = rng.UniformRange(0.85, 1.25);
  s.loudness = rng.UniformRange(0.7, 1.0);
  return s;
}

PhonemeSequence MakeText(const CorpusSpec& spec, int utterance_index) {
  Rng master(spec.seed);
  Rng rng = master.Fork(0x700 + static_cast<uint64_t>(utterance_index));
  PhonemeSequence text;
  const int body = 4 + static_cast<int>(rng.UniformInt(5));  // 4..8 phonemes
  if (rng.Uniform() < 0.4) text.ids.push_back(0);
  for (int i = 0; i < body; ++i) {
    text.ids.push_back(1 + static_cast<int32_t>(rng.UniformInt(
                               static_cast<uint64_t>(spec.phoneme_vocab_size) -
                               1)));
  }
  if (rng.Uniform() < 0.4) text.ids.push_back(0);
  char name[16];
  std::snprintf(name, sizeof(name), "utt%03d", utterance_index);
  text.text = name;
  return text;
}

namespace {

double PhonemeEnvelope(const PhonemeSymbol& p, const SyntheticSpeaker& s,
                       double freq_hz) {
  const double f1 = p.formant1_hz * s.formant_shift;
  const double f2 = p.formant2_hz * s.formant_shift;
  const double g1 = std::exp(-0.5 * std::pow((freq_hz - f1) / p.bandwidth1_hz, 2.0));
  const double g2 = std::exp(-0.5 * std::pow((freq_hz - f2) / p.bandwidth2_hz, 2.0));
  double env = 0.05 + g1 + 0.7 * g2;
  if (freq_hz > 150.0) {
    const double octaves = std::log2(freq_hz / 150.0);
    env *= std::pow(10.0, s.tilt_db_per_octave * octaves / 20.0);
  }
  return env;
}

}  // namespace

RenderedUtterance RenderUtterance(const CorpusSpec& spec,
                                  const SyntheticSpeaker& speaker,
                                  const PhonemeSequence& text,
                                  const std::vector<PhonemeSymbol>& vocab) {
  const AudioConfig& a = spec.audio;
  const size_t L = text.ids.size();
  if (L == 0) ThrowInvalid("cannot render an empty phoneme sequence");

  RenderedUtterance out;
  out.frame_durations.resize(L);
  out.true_f0_hz.resize(L);
  int64_t total_frames = 0;
  for (size_t i = 0; i < L; ++i) {
    const auto& p = vocab[static_cast<size_t>(text.ids[i])];
    const int frames = std::max(
        2, static_cast<int>(std::lround(p.base_duration_frames *
                                        speaker.speaking_rate)));
    out.frame_durations[i] = frames;
    total_frames += frames;
  }
  const size_t n_samples = static_cast<size_t>(total_frames - 1) *
                               static_cast<size_t>(a.hop_length) +
                           static_cast<size_t>(a.win_length);
  out.samples.assign(n_samples, 0.0f);

  Rng master(spec.seed);
  // Noise stream depends on speaker and text so repeated generation is
  // reproducible while distinct utterances stay distinct.
  Rng noise_rng = master.Fork(0x900 + 131 * static_cast<uint64_t>(speaker.index));
  for (int32_t id : text.ids) noise_rng = noise_rng.Fork(17 + static_cast<uint64_t>(id));

  constexpr int kMaxHarmonics = 40;
  // Phases accumulate continuously across phoneme boundaries, so the voiced
  // source has no boundary clicks and autocorrelation pitch is clean.
  std::vector<double> phase(kMaxHarmonics, 0.0);
  {
    Rng phase_rng = master.Fork(0xA00 + static_cast<uint64_t>(speaker.index));
    for (auto& ph : phase) ph = phase_rng.UniformRange(0.0, 2.0 * M_PI);
  }

  size_t cursor = 0;
  int64_t frame_cursor = 0;
  out.boundaries.resize(L);
  for (size_t i = 0; i < L; ++i) {
    const auto& p = vocab[static_cast<size_t>(text.ids[i])];
    frame_cursor += out.frame_durations[i];
    const size_t seg_end =
        (i + 1 == L) ? n_samples
                     : static_cast<size_t>(frame_cursor) *
                           static_cast<size_t>(a.hop_length);
    out.boundaries[i] = seg_end;

    if (p.silence) {
      out.true_f0_hz[i] = 0.0;
      cursor = seg_end;
      continue;
    }

    const double target_rms = p.energy_factor * speaker.loudness;
    if (p.voiced) {
      const double f0 = speaker.base_pitch_hz * p.pitch_factor;
      out.true_f0_hz[i] = f0;
      const int n_harm = std::min(
          kMaxHarmonics,
          static_cast<int>(0.45 * a.sample_rate / f0));
      std::vector<double> amp(static_cast<size_t>(n_harm));
      double energy = 0.0;
      for (int h = 1; h <= n_harm; ++h) {
        const double e = PhonemeEnvelope(p, speaker, h * f0);
        amp[static_cast<size_t>(h - 1)] = e;
        energy += e * e;
      }
      // Scale so the segment RMS of the harmonic sum hits the target.
      const double scale =
          energy > 0.0 ? target_rms * std::sqrt(2.0 / energy) : 0.0;
      const double step = 2.0 * M_PI * f0 / a.sample_rate;
      for (size_t t = cursor; t < seg_end; ++t) {
        double v = 0.0;
        for (int h = 1; h <= n_harm; ++h) {
          v += amp[static_cast<size_t>(h - 1)] *
               std::sin(phase[static_cast<size_t>(h - 1)]);
          phase[static_cast<size_t>(h - 1)] += step * h;
        }
        out.samples[t] = static_cast<float>(scale * v);
      }
      for (int h = 0; h < kMaxHarmonics; ++h) {
        phase[static_cast<size_t>(h)] =
            std::fmod(phase[static_cast<size_t>(h)], 2.0 * M_PI);
      }
    } else {
      out.true_f0_hz[i] = 0.0;
      for (size_t t = cursor; t < seg_end; ++t) {
        // Flat noise band; unvoiced identity comes from energy and the lack
        // of harmonic structure.
        const double v = 2.0 * noise_rng.Uniform() - 1.0;
        out.samples[t] = static_cast<float>(target_rms * 1.7320508 * v * 0.5);
      }
    }
    cursor = seg_end;
  }
  return out;
}

namespace {

std::string UttId(int speaker, int utterance) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "spk%02d_utt%03d", speaker, utterance);
  return buf;
}

}  // namespace

CorpusManifest GenerateCorpus(const CorpusSpec& spec,
                              const std::string& out_dir) {
  auto report = Validate(spec);
  if (!report.ok()) ThrowInvalid("invalid corpus spec: " + report.issues[0]);

  fs::create_directories(fs::path(out_dir) / "wav");
  fs::create_directories(fs::path(out_dir) / "mel");
  fs::create_directories(fs::path(out_dir) / "prosody");

  const auto vocab = MakeVocabulary(spec);
  {
    std::ofstream sym(fs::path(out_dir) / "symbols.txt");
    if (!sym) ThrowIo("cannot write symbol table");
    for (size_t i = 0; i < vocab.size(); ++i) {
      sym << i << '\t' << vocab[i].name << '\n';
    }
  }
  spec.ToKv().Save((fs::path(out_dir) / "corpus_spec.txt").string());

  const int n_unseen = NumUnseenSpeakers(spec);
  const int first_unseen = spec.n_speakers - n_unseen;
  const int seen_eval_per_speaker =
      std::max(1, spec.utterances_per_speaker / 10);

  CorpusManifest manifest;
  manifest.root_dir = out_dir;
  for (int si = 0; si < spec.n_speakers; ++si) {
    const SyntheticSpeaker speaker = MakeSpeaker(spec, si);
    for (int ui = 0; ui < spec.utterances_per_speaker; ++ui) {
      const PhonemeSequence text = MakeText(spec, ui);
      const RenderedUtterance r = RenderUtterance(spec, speaker, text, vocab);

      const MelSpectrogram mel = ExtractMel(r.samples, spec.audio);
      ProsodyTargets prosody =
          ExtractProsody(r.samples, r.boundaries, spec.audio);

      ManifestEntry e;
      e.utterance_id = UttId(si, ui);
      e.speaker_id = speaker.speaker_id;
      if (si >= first_unseen) {
        e.split = "unseen-eval";
      } else if (ui >= spec.utterances_per_speaker - seen_eval_per_speaker) {
        e.split = "seen-eval";
      } else {
        e.split = "train";
      }
      e.wav_path = "wav/" + e.utterance_id + ".nns";
      e.mel_path = "mel/" + e.utterance_id + ".nns";
      e.prosody_path = "prosody/" + e.utterance_id + ".nns";
      e.phoneme_ids = text.ids;

      SaveWaveform((fs::path(out_dir) / e.wav_path).string(), r.samples,
                   spec.audio.sample_rate);
      SaveMel((fs::path(out_dir) / e.mel_path).string(), mel);
      SaveProsody((fs::path(out_dir) / e.prosody_path).string(), prosody);
      manifest.entries.push_back(std::move(e));
    }
  }
  SaveManifest((fs::path(out_dir) / "manifest.txt").string(), manifest);
  return manifest;
}

}  // namespace nns
