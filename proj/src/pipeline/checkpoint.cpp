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

#include "pipeline/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "data/matio.hpp"
#include "util/error.hpp"
#include "util/kvfile.hpp"

namespace nns {

namespace {

constexpr char kCkptMagic[8] = {'N', 'N', 'S', 'C', 'K', 'P', 'T', '1'};
constexpr uint32_t kCkptVersion = 1;

void PutU32(std::ostream& out, uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t GetU32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (in.gcount() != 4) ThrowIo("corrupt checkpoint: truncated header");
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
  return v;
}

Eigen::MatrixXd HistoryToMatrix(const std::vector<LossBreakdown>& history) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(history.size()), 10);
  for (size_t i = 0; i < history.size(); ++i) {
    const auto& h = history[i];
    const auto r = static_cast<Eigen::Index>(i);
    m(r, 0) = static_cast<double>(i + 1);
    m(r, 1) = h.mel;
    m(r, 2) = h.spk;
    m(r, 3) = h.kl;
    m(r, 4) = h.duration;
    m(r, 5) = h.pitch;
    m(r, 6) = h.energy;
    m(r, 7) = h.total;
    m(r, 8) = h.weights.alpha;
    m(r, 9) = h.weights.gamma;
  }
  return m;
}

std::vector<LossBreakdown> HistoryFromMatrix(const Eigen::MatrixXd& m) {
  std::vector<LossBreakdown> history(static_cast<size_t>(m.rows()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    auto& h = history[static_cast<size_t>(r)];
    h.mel = m(r, 1);
    h.spk = m(r, 2);
    h.kl = m(r, 3);
    h.duration = m(r, 4);
    h.pitch = m(r, 5);
    h.energy = m(r, 6);
    h.total = m(r, 7);
    h.weights.alpha = m(r, 8);
    h.weights.beta = m(r, 8);
    h.weights.gamma = m(r, 9);
  }
  return history;
}

}  // namespace

void SaveCheckpoint(const std::string& path, Model& model, int64_t step,
                    const std::vector<std::string>& train_speakers,
                    const std::vector<LossBreakdown>& history) {
  std::ofstream out(path, std::ios::binary);
  if (!out) ThrowIo("cannot open checkpoint for writing: " + path);
  out.write(kCkptMagic, sizeof(kCkptMagic));
  PutU32(out, kCkptVersion);

  KvFile meta = model.config.ToKv();
  meta.Set("step", static_cast<int64_t>(step));
  meta.Set("pitch_lo", model.adaptor.pitch_range.lo);
  meta.Set("pitch_hi", model.adaptor.pitch_range.hi);
  meta.Set("energy_lo", model.adaptor.energy_range.lo);
  meta.Set("energy_hi", model.adaptor.energy_range.hi);
  {
    std::ostringstream spk;
    for (size_t i = 0; i < train_speakers.size(); ++i) {
      if (i) spk << ',';
      spk << train_speakers[i];
    }
    meta.Set("train_speakers", spk.str());
  }
  const std::string meta_text = meta.Serialize();
  PutU32(out, static_cast<uint32_t>(meta_text.size()));
  out.write(meta_text.data(), static_cast<std::streamsize>(meta_text.size()));

  for (Param* p : model.AllParams()) {
    MatRecord rec;
    rec.dtype = MatDtype::kFloat64;
    rec.data = p->value;
    rec.meta["name"] = p->name;
    WriteRecord(out, rec);
  }
  MatRecord hist;
  hist.dtype = MatDtype::kFloat64;
  hist.data = HistoryToMatrix(history);
  hist.meta["name"] = "loss_history";
  WriteRecord(out, hist);
  if (!out) ThrowIo("write failure: " + path);
}

namespace {

Checkpoint LoadImpl(const std::string& path, Model* into) {
  std::ifstream in(path, std::ios::binary);
  if (!in) ThrowIo("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (in.gcount() != sizeof(magic) ||
      std::memcmp(magic, kCkptMagic, sizeof(kCkptMagic)) != 0) {
    ThrowIo("not a checkpoint file: " + path);
  }
  const uint32_t version = GetU32(in);
  if (version != kCkptVersion) {
    ThrowIo("unsupported checkpoint version " + std::to_string(version));
  }
  const uint32_t meta_len = GetU32(in);
  std::string meta_text(meta_len, '\0');
  in.read(meta_text.data(), meta_len);
  if (static_cast<uint32_t>(in.gcount()) != meta_len) {
    ThrowIo("corrupt checkpoint: truncated metadata");
  }
  const KvFile meta = KvFile::Parse(meta_text);

  Checkpoint ckpt;
  ckpt.config = ModelConfig::FromKv(meta);
  ckpt.step = meta.GetInt("step", 0);
  ckpt.pitch_range = QuantRange{meta.GetDouble("pitch_lo", 0.0),
                                meta.GetDouble("pitch_hi", 1.0)};
  ckpt.energy_range = QuantRange{meta.GetDouble("energy_lo", 0.0),
                                 meta.GetDouble("energy_hi", 1.0)};
  {
    std::istringstream spk(meta.GetString("train_speakers", ""));
    std::string id;
    while (std::getline(spk, id, ',')) {
      if (!id.empty()) ckpt.train_speakers.push_back(id);
    }
  }

  Model* model = into;
  if (into != nullptr) {
    if (!(into->config == ckpt.config)) {
      ThrowInvalid("checkpoint config does not match the model config");
    }
  } else {
    ckpt.model = std::make_unique<Model>(ckpt.config);
    model = ckpt.model.get();
  }
  model->adaptor.pitch_range = ckpt.pitch_range;
  model->adaptor.energy_range = ckpt.energy_range;

  for (Param* p : model->AllParams()) {
    MatRecord rec;
    if (!ReadRecord(in, &rec)) {
      ThrowIo("corrupt checkpoint: missing parameter record for " + p->name);
    }
    auto it = rec.meta.find("name");
    if (it == rec.meta.end() || it->second != p->name) {
      ThrowIo("checkpoint parameter order mismatch at " + p->name);
    }
    if (rec.data.rows() != p->value.rows() ||
        rec.data.cols() != p->value.cols()) {
      ThrowInvalid("checkpoint shape mismatch for " + p->name);
    }
    p->value = rec.data;
  }
  MatRecord hist;
  if (ReadRecord(in, &hist)) {
    ckpt.loss_history = HistoryFromMatrix(hist.data);
  }
  return ckpt;
}

}  // namespace

Checkpoint LoadCheckpoint(const std::string& path) {
  return LoadImpl(path, nullptr);
}

void LoadCheckpointInto(const std::string& path, Model& model) {
  LoadImpl(path, &model);
}

}  // namespace nns
