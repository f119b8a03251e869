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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "corpus/corpus.hpp"
#include "data/matio.hpp"
#include "dsp/mel.hpp"
#include "testutil.hpp"

using namespace nns;
namespace fs = std::filesystem;

namespace {

CorpusSpec TinySpec(uint64_t seed = 7) {
  CorpusSpec spec;
  spec.n_speakers = 4;
  spec.utterances_per_speaker = 4;
  spec.phoneme_vocab_size = 12;
  spec.seed = seed;
  spec.unseen_speaker_fraction = 0.25;
  return spec;
}

std::string HashDirectory(const std::string& dir) {
  // Order-stable concatenation of (relative path, size, bytes) — enough to
  // detect any byte difference between two generated corpora.
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::string content((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
    files[fs::relative(entry.path(), dir).string()] = std::move(content);
  }
  std::string acc;
  for (const auto& [name, content] : files) {
    acc += name;
    acc += '\0';
    acc += content;
    acc += '\1';
  }
  return acc;
}

}  // namespace

TEST_CASE("same seed twice gives byte-identical corpora") {
  const std::string dir_a = nns::test::TempDir("corpus_det_a");
  const std::string dir_b = nns::test::TempDir("corpus_det_b");
  GenerateCorpus(TinySpec(7), dir_a);
  GenerateCorpus(TinySpec(7), dir_b);
  CHECK(HashDirectory(dir_a) == HashDirectory(dir_b));

  const std::string dir_c = nns::test::TempDir("corpus_det_c");
  GenerateCorpus(TinySpec(8), dir_c);
  CHECK(HashDirectory(dir_a) != HashDirectory(dir_c));
}

TEST_CASE("unseen split arithmetic and disjointness") {
  CorpusSpec spec = TinySpec();
  spec.n_speakers = 10;
  spec.utterances_per_speaker = 3;
  spec.unseen_speaker_fraction = 0.2;
  CHECK(NumUnseenSpeakers(spec) == 2);

  const std::string dir = nns::test::TempDir("corpus_split");
  const CorpusManifest manifest = GenerateCorpus(spec, dir);

  std::set<std::string> train_speakers, unseen_speakers;
  for (const auto& e : manifest.entries) {
    if (e.split == "train") train_speakers.insert(e.speaker_id);
    if (e.split == "unseen-eval") unseen_speakers.insert(e.speaker_id);
  }
  CHECK(unseen_speakers.size() == 2);
  CHECK(train_speakers.size() == 8);
  for (const auto& s : unseen_speakers) {
    CHECK(train_speakers.count(s) == 0);
  }
  CHECK(Validate(manifest, /*check_files=*/true).ok());
}

TEST_CASE("two speakers render the same text differently but scale durations") {
  const CorpusSpec spec = TinySpec();
  const auto vocab = MakeVocabulary(spec);
  const PhonemeSequence text = MakeText(spec, 0);
  const SyntheticSpeaker a = MakeSpeaker(spec, 0);
  const SyntheticSpeaker b = MakeSpeaker(spec, 1);

  const RenderedUtterance ra = RenderUtterance(spec, a, text, vocab);
  const RenderedUtterance rb = RenderUtterance(spec, b, text, vocab);

  const MelSpectrogram mel_a = ExtractMel(ra.samples, spec.audio);
  const MelSpectrogram mel_b = ExtractMel(rb.samples, spec.audio);

  // Mels differ on the shared frame span.
  const Eigen::Index shared =
      std::min(mel_a.frames.rows(), mel_b.frames.rows());
  const double l2 = (mel_a.frames.topRows(shared) -
                     mel_b.frames.topRows(shared))
                        .norm();
  CHECK(l2 > 0.0);

  // Duration pattern follows the speaking-rate ratio within rounding.
  REQUIRE(ra.frame_durations.size() == rb.frame_durations.size());
  const double rate_ratio = b.speaking_rate / a.speaking_rate;
  for (size_t i = 0; i < ra.frame_durations.size(); ++i) {
    const double predicted = ra.frame_durations[i] * rate_ratio;
    CHECK(std::abs(predicted - rb.frame_durations[i]) <= 1.0 + 0.05 * predicted);
  }
}

TEST_CASE("per-phoneme pitch tracks the generator parameters") {
  const CorpusSpec spec = TinySpec(21);
  const auto vocab = MakeVocabulary(spec);
  for (int si = 0; si < 2; ++si) {
    const SyntheticSpeaker speaker = MakeSpeaker(spec, si);
    const PhonemeSequence text = MakeText(spec, 1);
    const RenderedUtterance r = RenderUtterance(spec, speaker, text, vocab);
    const ProsodyTargets p = ExtractProsody(r.samples, r.boundaries, spec.audio);

    REQUIRE(p.pitch.size() == text.ids.size());
    for (size_t i = 0; i < text.ids.size(); ++i) {
      const auto& symbol = vocab[static_cast<size_t>(text.ids[i])];
      if (symbol.voiced && !symbol.silence) {
        CHECK(p.pitch[i] > 0.0f);
        CHECK(std::abs(p.pitch[i] - r.true_f0_hz[i]) < 5.0);
      } else if (symbol.silence) {
        CHECK(p.pitch[i] == 0.0f);
        CHECK(p.energy[i] < 1e-5f);
      }
    }
  }
}

TEST_CASE("prosody/mel consistency over the generated corpus") {
  const std::string dir = nns::test::TempDir("corpus_consistency");
  const CorpusManifest manifest = GenerateCorpus(TinySpec(9), dir);
  for (const auto& e : manifest.entries) {
    const MelSpectrogram mel = LoadMel(dir + "/" + e.mel_path);
    const ProsodyTargets prosody = LoadProsody(dir + "/" + e.prosody_path);
    int64_t total = 0;
    for (int32_t d : prosody.durations) total += d;
    CHECK(total == mel.frames.rows());
    CHECK(Validate(prosody, mel.frames.rows()).ok());
    CHECK(prosody.durations.size() == e.phoneme_ids.size());
  }
}

TEST_CASE("speaker separability: within-speaker distance < cross-speaker") {
  CorpusSpec spec = TinySpec(13);
  spec.n_speakers = 6;
  spec.utterances_per_speaker = 6;
  const std::string dir = nns::test::TempDir("corpus_separability");
  const CorpusManifest manifest = GenerateCorpus(spec, dir);

  // Mean mel vector per utterance.
  std::map<std::string, std::vector<Eigen::VectorXf>> by_speaker;
  for (const auto& e : manifest.entries) {
    const MelSpectrogram mel = LoadMel(dir + "/" + e.mel_path);
    by_speaker[e.speaker_id].push_back(mel.frames.colwise().mean().transpose());
  }

  double within = 0.0, cross = 0.0;
  int64_t n_within = 0, n_cross = 0;
  std::vector<std::pair<std::string, Eigen::VectorXf>> all;
  for (const auto& [spk, vecs] : by_speaker) {
    for (const auto& v : vecs) all.emplace_back(spk, v);
  }
  for (size_t i = 0; i < all.size(); ++i) {
    for (size_t j = i + 1; j < all.size(); ++j) {
      const double d = (all[i].second - all[j].second).norm();
      if (all[i].first == all[j].first) {
        within += d;
        ++n_within;
      } else {
        cross += d;
        ++n_cross;
      }
    }
  }
  within /= static_cast<double>(n_within);
  cross /= static_cast<double>(n_cross);
  CHECK(within < cross);
}

TEST_CASE("invalid specs are rejected") {
  CorpusSpec spec = TinySpec();
  spec.n_speakers = 3;
  CHECK_FALSE(Validate(spec).ok());
  spec = TinySpec();
  spec.unseen_speaker_fraction = 1.0;
  CHECK_FALSE(Validate(spec).ok());
  spec = TinySpec();
  spec.unseen_speaker_fraction = 0.0;
  CHECK_FALSE(Validate(spec).ok());
}

TEST_CASE("corpus spec round trips through its config file") {
  const CorpusSpec spec = TinySpec(42);
  const CorpusSpec parsed = CorpusSpec::FromKv(
      KvFile::Parse(spec.ToKv().Serialize()));
  CHECK(parsed.n_speakers == spec.n_speakers);
  CHECK(parsed.seed == spec.seed);
  CHECK(parsed.unseen_speaker_fraction ==
        doctest::Approx(spec.unseen_speaker_fraction));
  CHECK(parsed.audio == spec.audio);
}
