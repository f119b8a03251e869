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
// Two-stage training. Stage 1 optimizes everything except the speaker loss
// with the speaker predictor frozen; stage 2 optimizes the full objective
// end to end. The logged breakdown always carries the full objective,
// including the (frozen) speaker term in stage 1, so the series is
// comparable across the boundary.

#ifndef NNSPEECH_PIPELINE_TRAINER_HPP_
#define NNSPEECH_PIPELINE_TRAINER_HPP_

#include <functional>
#include <string>
#include <vector>

#include "model/model.hpp"
#include "objective/losses.hpp"
#include "pipeline/dataset.hpp"
#include "util/kvfile.hpp"

namespace nns {

struct TrainConfig {
  int64_t stage1_steps = 2000;
  int64_t stage2_steps = 8000;
  int batch_size = 8;
  double learning_rate = 1e-4;
  int64_t warmup_steps = 200;
  double gamma = 5e-4;
  uint64_t seed = 1;
  int64_t checkpoint_every = 2000;
  ModelConfig model;  // vocab/speaker counts are overwritten from the corpus

  int64_t total_steps() const { return stage1_steps + stage2_steps; }
  LossWeights weights() const { return LossWeights{1.0, 1.0, gamma}; }

  static TrainConfig FromKv(const KvFile& kv);
  KvFile ToKv() const;
};

ValidationReport Validate(const TrainConfig& c);

// Builds the training graph for one example and returns the full loss
// breakdown. When `do_backward` is set, gradients of the stage objective
// (scaled by `objective_scale`) are accumulated into the model parameters.
LossBreakdown TrainStepExample(Model& model, const TrainingExample& example,
                               const LossWeights& weights,
                               bool include_speaker_loss,
                               const Eigen::MatrixXd& eps,
                               double objective_scale, bool do_backward);

struct TrainResult {
  std::vector<LossBreakdown> history;  // one entry per step
  std::string final_checkpoint;        // empty when out_dir was empty
};

// Runs the schedule; writes checkpoints and a line-delimited loss log under
// out_dir unless it is empty. Aborts with a runtime error naming the step
// if the loss turns non-finite. `on_step` (optional) observes each step.
TrainResult Train(
    Model& model, const TrainConfig& config, const Dataset& dataset,
    const std::string& out_dir,
    const std::function<void(int64_t, const LossBreakdown&)>& on_step = {});

}  // namespace nns

#endif  // NNSPEECH_PIPELINE_TRAINER_HPP_
