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

#include "data/matio.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "util/error.hpp"

namespace nns {

namespace {

constexpr char kMagic[6] = {'N', 'N', 'S', 'P', 'K', '1'};
constexpr uint8_t kFlagHasMeta = 0x01;

void PutU16(std::ostream& out, uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>(v >> 8)};
  out.write(reinterpret_cast<const char*>(b), 2);
}

void PutU32(std::ostream& out, uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

bool GetBytes(std::istream& in, void* dst, size_t n) {
  in.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
  return static_cast<size_t>(in.gcount()) == n;
}

uint16_t GetU16(std::istream& in) {
  unsigned char b[2];
  if (!GetBytes(in, b, 2)) ThrowIo("corrupt header: truncated stream");
  return static_cast<uint16_t>(b[0] | (b[1] << 8));
}

uint32_t GetU32(std::istream& in) {
  unsigned char b[4];
  if (!GetBytes(in, b, 4)) ThrowIo("corrupt header: truncated stream");
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
  return v;
}

}  // namespace

void WriteRecord(std::ostream& out, const MatRecord& rec) {
  out.write(kMagic, sizeof(kMagic));
  out.put(static_cast<char>(rec.dtype));
  out.put(static_cast<char>(rec.meta.empty() ? 0 : kFlagHasMeta));
  const auto rows = static_cast<uint32_t>(rec.data.rows());
  const auto cols = static_cast<uint32_t>(rec.data.cols());
  PutU32(out, rows);
  PutU32(out, cols);
  if (rec.dtype == MatDtype::kFloat32) {
    for (uint32_t r = 0; r < rows; ++r) {
      for (uint32_t c = 0; c < cols; ++c) {
        float v = static_cast<float>(rec.data(r, c));
        out.write(reinterpret_cast<const char*>(&v), sizeof(v));
      }
    }
  } else {
    for (uint32_t r = 0; r < rows; ++r) {
      for (uint32_t c = 0; c < cols; ++c) {
        double v = rec.data(r, c);
        out.write(reinterpret_cast<const char*>(&v), sizeof(v));
      }
    }
  }
  if (!rec.meta.empty()) {
    PutU32(out, static_cast<uint32_t>(rec.meta.size()));
    for (const auto& [k, v] : rec.meta) {
      PutU16(out, static_cast<uint16_t>(k.size()));
      out.write(k.data(), static_cast<std::streamsize>(k.size()));
      PutU32(out, static_cast<uint32_t>(v.size()));
      out.write(v.data(), static_cast<std::streamsize>(v.size()));
    }
  }
  if (!out) ThrowIo("write failure while serializing matrix record");
}

bool ReadRecord(std::istream& in, MatRecord* rec) {
  char magic[6];
  in.read(magic, sizeof(magic));
  if (in.gcount() == 0 && in.eof()) return false;  // clean end of stream
  if (static_cast<size_t>(in.gcount()) != sizeof(magic) ||
      std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    ThrowIo("corrupt header: bad magic");
  }
  int dtype_byte = in.get();
  int flags = in.get();
  if (dtype_byte == EOF || flags == EOF) {
    ThrowIo("corrupt header: truncated stream");
  }
  if (dtype_byte != 0 && dtype_byte != 1) {
    ThrowIo("corrupt header: unknown dtype " + std::to_string(dtype_byte));
  }
  const uint32_t rows = GetU32(in);
  const uint32_t cols = GetU32(in);
  rec->dtype = static_cast<MatDtype>(dtype_byte);
  rec->data.resize(rows, cols);
  if (rec->dtype == MatDtype::kFloat32) {
    std::vector<float> buf(static_cast<size_t>(rows) * cols);
    if (!GetBytes(in, buf.data(), buf.size() * sizeof(float))) {
      ThrowIo("corrupt header: payload shorter than declared shape");
    }
    size_t i = 0;
    for (uint32_t r = 0; r < rows; ++r)
      for (uint32_t c = 0; c < cols; ++c) rec->data(r, c) = buf[i++];
  } else {
    std::vector<double> buf(static_cast<size_t>(rows) * cols);
    if (!GetBytes(in, buf.data(), buf.size() * sizeof(double))) {
      ThrowIo("corrupt header: payload shorter than declared shape");
    }
    size_t i = 0;
    for (uint32_t r = 0; r < rows; ++r)
      for (uint32_t c = 0; c < cols; ++c) rec->data(r, c) = buf[i++];
  }
  rec->meta.clear();
  if (flags & kFlagHasMeta) {
    const uint32_t n = GetU32(in);
    for (uint32_t i = 0; i < n; ++i) {
      const uint16_t klen = GetU16(in);
      std::string key(klen, '\0');
      if (!GetBytes(in, key.data(), klen)) ThrowIo("corrupt meta trailer");
      const uint32_t vlen = GetU32(in);
      std::string val(vlen, '\0');
      if (!GetBytes(in, val.data(), vlen)) ThrowIo("corrupt meta trailer");
      rec->meta.emplace(std::move(key), std::move(val));
    }
  }
  return true;
}

void WriteRecordsFile(const std::string& path,
                      const std::vector<MatRecord>& recs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) ThrowIo("cannot open for writing: " + path);
  for (const auto& r : recs) WriteRecord(out, r);
  if (!out) ThrowIo("write failure: " + path);
}

std::vector<MatRecord> ReadRecordsFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) ThrowIo("cannot open: " + path);
  std::vector<MatRecord> recs;
  MatRecord rec;
  while (ReadRecord(in, &rec)) recs.push_back(rec);
  return recs;
}

namespace {

MatRecord SingleRecord(const std::string& path) {
  auto recs = ReadRecordsFile(path);
  if (recs.size() != 1) {
    ThrowIo("expected a single matrix record in " + path);
  }
  return std::move(recs.front());
}

std::string MetaOrThrow(const MatRecord& rec, const std::string& key,
                        const std::string& path) {
  auto it = rec.meta.find(key);
  if (it == rec.meta.end()) ThrowIo("missing meta key `" + key + "` in " + path);
  return it->second;
}

}  // namespace

void SaveMel(const std::string& path, const MelSpectrogram& mel) {
  MatRecord rec;
  rec.dtype = MatDtype::kFloat32;
  rec.data = mel.frames.cast<double>();
  rec.meta["kind"] = "mel";
  rec.meta["sample_rate"] = std::to_string(mel.config.sample_rate);
  rec.meta["hop_length"] = std::to_string(mel.config.hop_length);
  rec.meta["win_length"] = std::to_string(mel.config.win_length);
  rec.meta["n_mels"] = std::to_string(mel.config.n_mels);
  {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", mel.config.fmin);
    rec.meta["fmin"] = buf;
    std::snprintf(buf, sizeof(buf), "%.17g", mel.config.fmax);
    rec.meta["fmax"] = buf;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) ThrowIo("cannot open for writing: " + path);
  WriteRecord(out, rec);
}

MelSpectrogram LoadMel(const std::string& path) {
  MatRecord rec = SingleRecord(path);
  MelSpectrogram mel;
  mel.frames = rec.data.cast<float>();
  mel.config.sample_rate = std::stoi(MetaOrThrow(rec, "sample_rate", path));
  mel.config.hop_length = std::stoi(MetaOrThrow(rec, "hop_length", path));
  mel.config.win_length = std::stoi(MetaOrThrow(rec, "win_length", path));
  mel.config.n_mels = std::stoi(MetaOrThrow(rec, "n_mels", path));
  mel.config.fmin = std::stod(MetaOrThrow(rec, "fmin", path));
  mel.config.fmax = std::stod(MetaOrThrow(rec, "fmax", path));
  return mel;
}

void SaveProsody(const std::string& path, const ProsodyTargets& p) {
  const auto L = static_cast<Eigen::Index>(p.durations.size());
  MatRecord rec;
  rec.dtype = MatDtype::kFloat32;
  rec.data.resize(3, L);
  for (Eigen::Index i = 0; i < L; ++i) {
    rec.data(0, i) = static_cast<double>(p.durations[i]);
    rec.data(1, i) = p.pitch[i];
    rec.data(2, i) = p.energy[i];
  }
  rec.meta["kind"] = "prosody";
  std::ofstream out(path, std::ios::binary);
  if (!out) ThrowIo("cannot open for writing: " + path);
  WriteRecord(out, rec);
}

ProsodyTargets LoadProsody(const std::string& path) {
  MatRecord rec = SingleRecord(path);
  if (rec.data.rows() != 3) ThrowIo("prosody record must have 3 rows: " + path);
  ProsodyTargets p;
  const auto L = rec.data.cols();
  p.durations.resize(L);
  p.pitch.resize(L);
  p.energy.resize(L);
  for (Eigen::Index i = 0; i < L; ++i) {
    p.durations[i] = static_cast<int32_t>(std::lround(rec.data(0, i)));
    p.pitch[i] = static_cast<float>(rec.data(1, i));
    p.energy[i] = static_cast<float>(rec.data(2, i));
  }
  return p;
}

void SaveWaveform(const std::string& path, const std::vector<float>& samples,
                  int sample_rate) {
  MatRecord rec;
  rec.dtype = MatDtype::kFloat32;
  rec.data.resize(1, static_cast<Eigen::Index>(samples.size()));
  for (size_t i = 0; i < samples.size(); ++i) {
    rec.data(0, static_cast<Eigen::Index>(i)) = samples[i];
  }
  rec.meta["kind"] = "waveform";
  rec.meta["sample_rate"] = std::to_string(sample_rate);
  std::ofstream out(path, std::ios::binary);
  if (!out) ThrowIo("cannot open for writing: " + path);
  WriteRecord(out, rec);
}

std::vector<float> LoadWaveform(const std::string& path, int* sample_rate) {
  MatRecord rec = SingleRecord(path);
  if (rec.data.rows() != 1) ThrowIo("waveform record must have 1 row: " + path);
  if (sample_rate != nullptr) {
    *sample_rate = std::stoi(MetaOrThrow(rec, "sample_rate", path));
  }
  std::vector<float> samples(static_cast<size_t>(rec.data.cols()));
  for (Eigen::Index i = 0; i < rec.data.cols(); ++i) {
    samples[static_cast<size_t>(i)] = static_cast<float>(rec.data(0, i));
  }
  return samples;
}

namespace {

const char* SourceName(SpeakerSource s) {
  switch (s) {
    case SpeakerSource::kLookup: return "lookup";
    case SpeakerSource::kPredicted: return "predicted";
    case SpeakerSource::kAveraged: return "averaged";
  }
  return "lookup";
}

SpeakerSource SourceFromName(const std::string& n) {
  if (n == "predicted") return SpeakerSource::kPredicted;
  if (n == "averaged") return SpeakerSource::kAveraged;
  return SpeakerSource::kLookup;
}

}  // namespace

void SaveSpeakerEmbedding(const std::string& path, const SpeakerEmbedding& s) {
  MatRecord rec;
  rec.dtype = MatDtype::kFloat64;
  rec.data = s.vector.transpose();
  rec.meta["kind"] = "speaker_embedding";
  rec.meta["source"] = SourceName(s.source);
  std::ofstream out(path, std::ios::binary);
  if (!out) ThrowIo("cannot open for writing: " + path);
  WriteRecord(out, rec);
}

SpeakerEmbedding LoadSpeakerEmbedding(const std::string& path) {
  MatRecord rec = SingleRecord(path);
  SpeakerEmbedding s;
  s.vector = rec.data.row(0).transpose();
  s.source = SourceFromName(MetaOrThrow(rec, "source", path));
  return s;
}

void SaveGaussian(const std::string& path, const DiagonalGaussian& g) {
  MatRecord rec;
  rec.dtype = MatDtype::kFloat64;
  rec.data.resize(2, g.mu.size());
  rec.data.row(0) = g.mu.transpose();
  rec.data.row(1) = g.log_var.transpose();
  rec.meta["kind"] = "diag_gaussian";
  std::ofstream out(path, std::ios::binary);
  if (!out) ThrowIo("cannot open for writing: " + path);
  WriteRecord(out, rec);
}

DiagonalGaussian LoadGaussian(const std::string& path) {
  MatRecord rec = SingleRecord(path);
  if (rec.data.rows() != 2) {
    ThrowIo("gaussian record must have 2 rows: " + path);
  }
  DiagonalGaussian g;
  g.mu = rec.data.row(0).transpose();
  g.log_var = rec.data.row(1).transpose();
  return g;
}

void SaveLatent(const std::string& path, const LatentSequence& z) {
  MatRecord zr;
  zr.dtype = MatDtype::kFloat64;
  zr.data = z.z;
  zr.meta["kind"] = "latent_z";
  zr.meta["source"] =
      z.source == LatentSource::kRecognition ? "recognition" : "prior";
  MatRecord er;
  er.dtype = MatDtype::kFloat64;
  er.data = z.eps;
  er.meta["kind"] = "latent_eps";
  WriteRecordsFile(path, {zr, er});
}

LatentSequence LoadLatent(const std::string& path) {
  auto recs = ReadRecordsFile(path);
  if (recs.size() != 2) ThrowIo("latent file must hold 2 records: " + path);
  LatentSequence z;
  z.z = recs[0].data;
  z.eps = recs[1].data;
  z.source = MetaOrThrow(recs[0], "source", path) == "prior"
                 ? LatentSource::kPrior
                 : LatentSource::kRecognition;
  return z;
}

void SaveManifest(const std::string& path, const CorpusManifest& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) ThrowIo("cannot open for writing: " + path);
  out << "#nnspeech-manifest\tv1\n";
  for (const auto& e : m.entries) {
    out << e.utterance_id << '\t' << e.speaker_id << '\t' << e.split << '\t'
        << e.wav_path << '\t' << e.mel_path << '\t' << e.prosody_path << '\t';
    for (size_t i = 0; i < e.phoneme_ids.size(); ++i) {
      if (i) out << ' ';
      out << e.phoneme_ids[i];
    }
    out << '\n';
  }
  if (!out) ThrowIo("write failure: " + path);
}

CorpusManifest LoadManifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) ThrowIo("cannot open: " + path);
  CorpusManifest m;
  m.root_dir = std::filesystem::path(path).parent_path().string();
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    ManifestEntry e;
    std::string phonemes;
    if (!std::getline(ls, e.utterance_id, '\t') ||
        !std::getline(ls, e.speaker_id, '\t') ||
        !std::getline(ls, e.split, '\t') ||
        !std::getline(ls, e.wav_path, '\t') ||
        !std::getline(ls, e.mel_path, '\t') ||
        !std::getline(ls, e.prosody_path, '\t') ||
        !std::getline(ls, phonemes)) {
      ThrowIo("manifest line " + std::to_string(lineno) + " is malformed");
    }
    std::istringstream ps(phonemes);
    int32_t id;
    while (ps >> id) e.phoneme_ids.push_back(id);
    m.entries.push_back(std::move(e));
  }
  return m;
}

}  // namespace nns
