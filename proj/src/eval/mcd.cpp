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

#include "eval/mcd.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "util/error.hpp"

namespace nns {

namespace {

constexpr double kMcdScale = 10.0 / 2.302585092994045684;  // 10 / ln 10

}  // namespace

Eigen::MatrixXd MelToCepstra(const Eigen::MatrixXd& log_mel, int n_cepstra) {
  if (n_cepstra < 1) ThrowInvalid("mcd: n_cepstra must be >= 1");
  const Eigen::Index T = log_mel.rows();
  const Eigen::Index M = log_mel.cols();
  if (n_cepstra >= M) {
    ThrowInvalid("mcd: n_cepstra must be below the mel band count");
  }
  // Orthonormal DCT-II basis for coefficients 1..n_cepstra.
  Eigen::MatrixXd basis(M, n_cepstra);
  const double norm = std::sqrt(2.0 / static_cast<double>(M));
  for (Eigen::Index m = 0; m < M; ++m) {
    for (int k = 1; k <= n_cepstra; ++k) {
      basis(m, k - 1) =
          norm * std::cos(M_PI * (static_cast<double>(m) + 0.5) * k /
                          static_cast<double>(M));
    }
  }
  return log_mel * basis;
}

namespace {

double FrameDistance(const Eigen::MatrixXd& a, Eigen::Index i,
                     const Eigen::MatrixXd& b, Eigen::Index j) {
  return (a.row(i) - b.row(j)).norm();
}

double DtwMeanDistance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                       double band_fraction) {
  const Eigen::Index n = a.rows();
  const Eigen::Index m = b.rows();
  const Eigen::Index band = std::max<Eigen::Index>(
      std::abs(n - m),
      static_cast<Eigen::Index>(
          std::ceil(band_fraction * static_cast<double>(std::max(n, m)))));
  const double inf = std::numeric_limits<double>::infinity();

  // cost(i, j): cumulative distance; path length tracked alongside so the
  // final value can be a mean over path nodes.
  Eigen::MatrixXd cost = Eigen::MatrixXd::Constant(n, m, inf);
  Eigen::MatrixXi len = Eigen::MatrixXi::Zero(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index j_lo = std::max<Eigen::Index>(0, i - band);
    const Eigen::Index j_hi = std::min<Eigen::Index>(m - 1, i + band);
    for (Eigen::Index j = j_lo; j <= j_hi; ++j) {
      const double d = FrameDistance(a, i, b, j);
      if (i == 0 && j == 0) {
        cost(i, j) = d;
        len(i, j) = 1;
        continue;
      }
      double best = inf;
      Eigen::Index bi = -1, bj = -1;
      if (i > 0 && cost(i - 1, j) < best) {
        best = cost(i - 1, j);
        bi = i - 1;
        bj = j;
      }
      if (j > 0 && cost(i, j - 1) < best) {
        best = cost(i, j - 1);
        bi = i;
        bj = j - 1;
      }
      if (i > 0 && j > 0 && cost(i - 1, j - 1) < best) {
        best = cost(i - 1, j - 1);
        bi = i - 1;
        bj = j - 1;
      }
      if (bi < 0) continue;  // unreachable inside the band
      cost(i, j) = best + d;
      len(i, j) = len(bi, bj) + 1;
    }
  }
  if (!std::isfinite(cost(n - 1, m - 1)) || len(n - 1, m - 1) == 0) {
    ThrowRuntime("mcd: empty overlap after alignment");
  }
  return cost(n - 1, m - 1) / static_cast<double>(len(n - 1, m - 1));
}

}  // namespace

double Mcd(const Eigen::MatrixXd& ref_log_mel,
           const Eigen::MatrixXd& syn_log_mel, const McdConfig& config) {
  if (ref_log_mel.cols() != syn_log_mel.cols()) {
    ThrowInvalid("mcd: mel band count mismatch");
  }
  const Eigen::MatrixXd ca = MelToCepstra(ref_log_mel, config.n_cepstra);
  const Eigen::MatrixXd cb = MelToCepstra(syn_log_mel, config.n_cepstra);
  double mean_dist = 0.0;
  if (config.alignment == McdConfig::Alignment::kNone) {
    if (ca.rows() != cb.rows()) {
      ThrowInvalid("mcd: frame counts differ and alignment is none");
    }
    for (Eigen::Index t = 0; t < ca.rows(); ++t) {
      mean_dist += FrameDistance(ca, t, cb, t);
    }
    mean_dist /= static_cast<double>(ca.rows());
  } else {
    mean_dist = DtwMeanDistance(ca, cb, config.dtw_band_fraction);
  }
  return kMcdScale * std::sqrt(2.0) * mean_dist;
}

double Mcd(const MelSpectrogram& ref, const MelSpectrogram& syn,
           const McdConfig& config) {
  if (!(ref.config == syn.config)) {
    ThrowInvalid("mcd: audio configs differ");
  }
  return Mcd(ref.frames.cast<double>(), syn.frames.cast<double>(), config);
}

}  // namespace nns
