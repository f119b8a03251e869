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

#include "pipeline/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "pipeline/checkpoint.hpp"
#include "util/error.hpp"
#include "util/rng.hpp"

namespace nns {

namespace fs = std::filesystem;

TrainConfig TrainConfig::FromKv(const KvFile& kv) {
  TrainConfig c;
  c.stage1_steps = kv.GetInt("stage1_steps", c.stage1_steps);
  c.stage2_steps = kv.GetInt("stage2_steps", c.stage2_steps);
  c.batch_size = static_cast<int>(kv.GetInt("batch_size", c.batch_size));
  c.learning_rate = kv.GetDouble("learning_rate", c.learning_rate);
  c.warmup_steps = kv.GetInt("warmup_steps", c.warmup_steps);
  c.gamma = kv.GetDouble("gamma", c.gamma);
  c.seed = static_cast<uint64_t>(kv.GetInt("seed", static_cast<int64_t>(c.seed)));
  c.checkpoint_every = kv.GetInt("checkpoint_every", c.checkpoint_every);
  c.model = ModelConfig::FromKv(kv);
  return c;
}

KvFile TrainConfig::ToKv() const {
  KvFile kv = model.ToKv();
  kv.Set("stage1_steps", stage1_steps);
  kv.Set("stage2_steps", stage2_steps);
  kv.Set("batch_size", static_cast<int64_t>(batch_size));
  kv.Set("learning_rate", learning_rate);
  kv.Set("warmup_steps", warmup_steps);
  kv.Set("gamma", gamma);
  kv.Set("seed", static_cast<int64_t>(seed));
  kv.Set("checkpoint_every", checkpoint_every);
  return kv;
}

ValidationReport Validate(const TrainConfig& c) {
  ValidationReport r;
  if (c.stage1_steps <= 0) r.issues.push_back("stage1_steps must be > 0");
  if (c.stage2_steps <= 0) r.issues.push_back("stage2_steps must be > 0");
  if (c.batch_size < 1) r.issues.push_back("batch_size must be >= 1");
  if (c.gamma < 0.0) r.issues.push_back("gamma must be >= 0");
  if (c.learning_rate <= 0.0) r.issues.push_back("learning_rate must be > 0");
  return r;
}

LossBreakdown TrainStepExample(Model& model, const TrainingExample& example,
                               const LossWeights& weights,
                               bool include_speaker_loss,
                               const Eigen::MatrixXd& eps,
                               double objective_scale, bool do_backward) {
  const auto& flags = model.config.flags;
  Tape t(/*grad_enabled=*/do_backward);

  Expr mel_target = t.Constant(example.mel);
  Expr x = model.reference_encoder.Forward(t, mel_target);
  Expr c = model.phoneme_encoder.Forward(t, example.phoneme_ids);
  GaussianExpr q = model.recognition.Forward(t, x, c);
  Expr s = model.BindSpeakerRow(t, example.speaker_index);
  GaussianExpr p = model.prior.Forward(t, c, s);
  Expr z = ReparameterizeExpr(t, q, eps);

  Expr dec_in = model.latent_for_decoder.Forward(t, z, c, flags);
  VarianceOutputs var =
      model.adaptor.Forward(t, dec_in, s, &example.prosody);
  Expr x_hat = model.decoder.Forward(t, var.frames, s);

  Expr mel_loss = t.Mse(mel_target, x_hat);
  Expr kl = KlDiagExpr(t, q, p);

  const auto L = static_cast<Eigen::Index>(example.prosody.durations.size());
  Mat dur_target(L, 1), pitch_target(L, 1), energy_target(L, 1);
  for (Eigen::Index i = 0; i < L; ++i) {
    dur_target(i, 0) = std::log(
        static_cast<double>(example.prosody.durations[static_cast<size_t>(i)]));
    pitch_target(i, 0) = example.prosody.pitch[static_cast<size_t>(i)];
    energy_target(i, 0) = example.prosody.energy[static_cast<size_t>(i)];
  }
  Expr dur_loss = t.Mse(var.log_durations, t.Constant(dur_target));
  Expr pitch_loss = t.Mse(var.pitch, t.Constant(pitch_target));
  Expr energy_loss = t.Mse(var.energy, t.Constant(energy_target));

  double spk_value = 0.0;
  Expr spk_loss;
  if (!flags.no_speaker_predictor) {
    Expr s_hat = model.speaker_predictor.Forward(t, z);
    spk_loss = t.Mse(s, s_hat);
    spk_value = t.ScalarValue(spk_loss);
  }

  Expr objective = t.Add(
      t.Scale(mel_loss, weights.alpha),
      t.Add(t.Scale(kl, weights.gamma),
            t.Add(dur_loss, t.Add(pitch_loss, energy_loss))));
  if (include_speaker_loss && !flags.no_speaker_predictor) {
    objective = t.Add(objective, t.Scale(spk_loss, weights.beta));
  }
  objective = t.Scale(objective, objective_scale);

  if (do_backward) {
    t.Backward(objective);
    t.AccumulateParamGrads();
  }

  return TotalLoss(t.ScalarValue(mel_loss), spk_value, t.ScalarValue(kl),
                   t.ScalarValue(dur_loss), t.ScalarValue(pitch_loss),
                   t.ScalarValue(energy_loss), weights);
}

namespace {

void AppendLogLine(std::ofstream& log, int64_t step, const LossBreakdown& b) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "step=%lld mel=%.17g spk=%.17g kl=%.17g duration=%.17g "
                "pitch=%.17g energy=%.17g total=%.17g\n",
                static_cast<long long>(step), b.mel, b.spk, b.kl, b.duration,
                b.pitch, b.energy, b.total);
  log << buf;
}

}  // namespace

TrainResult Train(
    Model& model, const TrainConfig& config, const Dataset& dataset,
    const std::string& out_dir,
    const std::function<void(int64_t, const LossBreakdown&)>& on_step) {
  {
    auto report = Validate(config);
    if (!report.ok()) ThrowInvalid("invalid train config: " + report.issues[0]);
    if (dataset.train_indices.empty()) {
      ThrowInvalid("training requires a non-empty train split");
    }
  }

  model.adaptor.pitch_range = dataset.pitch_range;
  model.adaptor.energy_range = dataset.energy_range;

  Adam optimizer(AdamConfig{config.learning_rate, 0.9, 0.98, 1e-9});
  Rng master(config.seed);
  Rng shuffle_rng = master.Fork(0x11);
  Rng noise_rng = master.Fork(0x22);

  std::ofstream log;
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    log.open(fs::path(out_dir) / "train_log.txt", std::ios::binary);
    if (!log) ThrowIo("cannot open training log for writing");
  }

  std::vector<size_t> order = dataset.train_indices;
  size_t cursor = order.size();  // force an initial shuffle

  const LossWeights weights = config.weights();
  TrainResult result;
  result.history.reserve(static_cast<size_t>(config.total_steps()));

  for (int64_t step = 1; step <= config.total_steps(); ++step) {
    const bool stage2 = step > config.stage1_steps;
    std::vector<Param*> trainable =
        model.TrainableParams(/*include_speaker_predictor=*/stage2 &&
                              !model.config.flags.no_speaker_predictor);
    for (Param* p : trainable) p->ZeroGrad();
    // Frozen parameters must also not carry stale gradients.
    for (Param* p : model.AllParams()) {
      if (std::find(trainable.begin(), trainable.end(), p) == trainable.end()) {
        p->ZeroGrad();
      }
    }

    LossBreakdown batch_mean;
    batch_mean.weights = weights;
    const double scale = 1.0 / config.batch_size;
    for (int b = 0; b < config.batch_size; ++b) {
      if (cursor >= order.size()) {
        for (size_t i = order.size(); i > 1; --i) {
          std::swap(order[i - 1], order[shuffle_rng.UniformInt(i)]);
        }
        cursor = 0;
      }
      const DatasetItem& item = dataset.items[order[cursor++]];
      Eigen::MatrixXd eps(
          static_cast<Eigen::Index>(item.example.phoneme_ids.size()),
          model.config.d_z);
      noise_rng.NormalFill(eps.data(), static_cast<size_t>(eps.size()));

      LossBreakdown lb;
      try {
        lb = TrainStepExample(model, item.example, weights,
                              /*include_speaker_loss=*/stage2, eps, scale,
                              /*do_backward=*/true);
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::kRuntime) {
          ThrowRuntime("training diverged at step " + std::to_string(step) +
                       ": " + e.what());
        }
        throw;
      }
      batch_mean.mel += lb.mel * scale;
      batch_mean.spk += lb.spk * scale;
      batch_mean.kl += lb.kl * scale;
      batch_mean.duration += lb.duration * scale;
      batch_mean.pitch += lb.pitch * scale;
      batch_mean.energy += lb.energy * scale;
    }
    try {
      batch_mean = TotalLoss(batch_mean.mel, batch_mean.spk, batch_mean.kl,
                             batch_mean.duration, batch_mean.pitch,
                             batch_mean.energy, weights);
    } catch (const Error&) {
      ThrowRuntime("training diverged at step " + std::to_string(step) +
                   ": non-finite loss");
    }

    const double lr =
        config.learning_rate *
        std::min(1.0, static_cast<double>(step) /
                          static_cast<double>(std::max<int64_t>(
                              1, config.warmup_steps)));
    optimizer.Step(trainable, lr);

    result.history.push_back(batch_mean);
    if (log.is_open()) AppendLogLine(log, step, batch_mean);
    if (on_step) on_step(step, batch_mean);

    if (!out_dir.empty() && config.checkpoint_every > 0 &&
        step % config.checkpoint_every == 0 && step != config.total_steps()) {
      char name[64];
      std::snprintf(name, sizeof(name), "ckpt_step%08lld.nnsckpt",
                    static_cast<long long>(step));
      SaveCheckpoint((fs::path(out_dir) / name).string(), model, step,
                     dataset.train_speakers, result.history);
    }
  }

  if (!out_dir.empty()) {
    const std::string final_path =
        (fs::path(out_dir) / "ckpt_final.nnsckpt").string();
    SaveCheckpoint(final_path, model, config.total_steps(),
                   dataset.train_speakers, result.history);
    result.final_checkpoint = final_path;
  }
  return result;
}

}  // namespace nns
