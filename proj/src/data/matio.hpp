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
// NNSPK1 binary matrix container. One record is:
//
//   magic   6 bytes  "NNSPK1"
//   dtype   u8       0 = float32, 1 = float64
//   flags   u8       bit 0: metadata trailer present
//   rows    u32 le
//   cols    u32 le
//   data    rows*cols elements, row-major, little endian
//   meta    (only if flags bit 0)
//           u32 le pair count, then per pair:
//           u16 le key length, key bytes, u32 le value length, value bytes
//
// A file may hold several records back to back. The full layout is
// documented in docs/FORMATS.md.

#ifndef NNSPEECH_DATA_MATIO_HPP_
#define NNSPEECH_DATA_MATIO_HPP_

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "data/types.hpp"

namespace nns {

enum class MatDtype : uint8_t { kFloat32 = 0, kFloat64 = 1 };

struct MatRecord {
  MatDtype dtype = MatDtype::kFloat32;
  // Values held as double; float32 payloads are exactly representable, so
  // a float32 -> double -> float32 round trip is bitwise.
  Eigen::MatrixXd data;
  std::map<std::string, std::string> meta;
};

void WriteRecord(std::ostream& out, const MatRecord& rec);
// Throws on corrupt or truncated input. Returns false at clean EOF.
bool ReadRecord(std::istream& in, MatRecord* rec);

void WriteRecordsFile(const std::string& path,
                      const std::vector<MatRecord>& recs);
std::vector<MatRecord> ReadRecordsFile(const std::string& path);

// Domain-type serialization on top of the container. Feature matrices
// (mel, prosody, waveform) are float32 on disk; distribution, latent and
// embedding records are float64 so round trips preserve in-memory values
// bitwise.
void SaveMel(const std::string& path, const MelSpectrogram& mel);
MelSpectrogram LoadMel(const std::string& path);

void SaveProsody(const std::string& path, const ProsodyTargets& p);
ProsodyTargets LoadProsody(const std::string& path);

void SaveWaveform(const std::string& path, const std::vector<float>& samples,
                  int sample_rate);
std::vector<float> LoadWaveform(const std::string& path,
                                int* sample_rate = nullptr);

void SaveSpeakerEmbedding(const std::string& path, const SpeakerEmbedding& s);
SpeakerEmbedding LoadSpeakerEmbedding(const std::string& path);

void SaveGaussian(const std::string& path, const DiagonalGaussian& g);
DiagonalGaussian LoadGaussian(const std::string& path);

void SaveLatent(const std::string& path, const LatentSequence& z);
LatentSequence LoadLatent(const std::string& path);

// Manifest: line-delimited text records, tab separated:
//   utterance_id  speaker_id  split  wav  mel  prosody  phoneme ids
void SaveManifest(const std::string& path, const CorpusManifest& m);
CorpusManifest LoadManifest(const std::string& path);

}  // namespace nns

#endif  // NNSPEECH_DATA_MATIO_HPP_
