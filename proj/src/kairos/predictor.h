/*
 * Copyright 2026 The Kairos Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Quantile throughput predictors. The attention variant interpolates the
// irregularly sampled observations onto a regular reference grid before a
// GLU + LayerNorm block, an LSTM, and a monotone quantile head. The plain
// LSTM variant consumes the observation sequence directly and shares the
// same head, so the two differ only in the encoder.

#ifndef KAIROS_PREDICTOR_H_
#define KAIROS_PREDICTOR_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kairos/tensor.h"
#include "kairos/window.h"

namespace kairos {

// Predictions below this are clamped up; keeps downstream ratios sane.
inline constexpr double kPredictionFloorMbps = 0.01;

struct PredictorHyper {
  int k = 8;             // observation window length, chunks
  double eta_s = 4.0;    // reference point spacing, s
  int heads = 4;         // attention heads
  int d_k = 16;          // time embedding width
  int latent = 32;       // interpolated feature width (J)
  int lstm_hidden = 32;
  int mlp_hidden = 16;
  std::vector<double> quantiles = {0.1, 0.5, 0.9};
  double theta = 1.2;    // smoothness threshold
  bool literal_second_diff = false;

  int levels() const { return static_cast<int>(quantiles.size()); }
  int MedianIndex() const;
  int LowIndex() const;  // index of the 0.1 level
  void Validate() const;
};

// Divisors that bring the observation features to O(1).
struct FeatureScales {
  double throughput_mbps = 4.3;  // also scales the latency feature and outputs
  double buffer_s = 60.0;
  double rebuffer_s = 4.0;
};

struct QuantilePrediction {
  std::vector<double> levels;
  std::vector<double> values_mbps;

  double ValueAt(double level) const;  // throws when the level is absent
  void Validate() const;               // positive and non-crossing
};

enum class ModelKind { kMtan, kLstm };

std::string ModelKindName(ModelKind kind);
ModelKind ModelKindFromName(const std::string& name);

class ThroughputModel {
 public:
  ThroughputModel(ModelKind kind, PredictorHyper hyper, FeatureScales scales);

  // Deterministic parameter initialization.
  void InitParams(uint64_t seed);

  struct Forward {
    Tensor encoded;                   // k x J interpolation output (attention kind)
    std::vector<Tensor> values_mbps;  // one scalar per quantile level
  };

  // Builds the forward graph on `tape`. With trainable=true the parameters
  // enter as differentiable leaves, otherwise as frozen copies.
  Forward Build(Tape& tape, const ObservationWindow& window, bool trainable) const;

  // Interpolation encoder alone (attention kind only).
  Tensor EncodeGraph(Tape& tape, const ObservationWindow& window,
                     bool trainable) const;

  // Per-head continuous time embedding of a batch of time points
  // (rows = times). Column 0 is the learnable linear term, the rest are
  // learnable sinusoids.
  Tensor TimeEmbedGraph(Tape& tape, const std::vector<double>& times_s, int head,
                        bool trainable) const;
  std::vector<double> TimeEmbedValue(double time_s, int head) const;

  // Forward-only prediction; safe for concurrent use on a frozen model.
  QuantilePrediction Predict(const ObservationWindow& window) const;

  std::vector<Param*> Params();
  std::vector<const Param*> Params() const;

  ModelKind kind() const { return kind_; }
  const PredictorHyper& hyper() const { return hyper_; }
  const FeatureScales& scales() const { return scales_; }

 private:
  Tensor ObservationMatrix(Tape& tape, const ObservationWindow& window,
                           bool oldest_first) const;

  ModelKind kind_;
  PredictorHyper hyper_;
  FeatureScales scales_;

  // Attention encoder (kMtan only).
  std::vector<Param> embed_omega_;  // per head, {d_k}
  std::vector<Param> embed_bias_;   // per head, {d_k}
  Param attn_w_;                    // {d_k}
  Param attn_v_;                    // {d_k}
  std::vector<Param> interp_;       // per head, {4, J}
  Param glu_w_;                     // {J, J}
  Param glu_b_;                     // {J}
  Param ln_gain_;                   // {J}
  Param ln_bias_;                   // {J}

  // Shared head.
  Param lstm_wx_;  // {input, 4*hidden}
  Param lstm_wh_;  // {hidden, 4*hidden}
  Param lstm_b_;   // {4*hidden}
  Param mlp_w1_;   // {hidden, mlp_hidden}
  Param mlp_b1_;   // {mlp_hidden}
  Param mlp_w2_;   // {mlp_hidden, levels}
  Param mlp_b2_;   // {levels}
};

// Mean-over-batch pinball loss; sums over quantile levels within a sample.
Tensor QuantileLossGraph(Tape& tape,
                         const std::vector<std::vector<Tensor>>& preds_mbps,
                         std::span<const double> truths_mbps,
                         std::span<const double> levels);

// Smoothness regularizer for one window: 0.1 * ratio penalty on the median
// prediction (active only above theta/k times the window throughput sum)
// plus the mean squared second difference of the interpolated rows.
Tensor SmoothLossGraph(Tape& tape, const Tensor& encoded,
                       const Tensor& median_pred_mbps,
                       const ObservationWindow& window,
                       const PredictorHyper& hyper);

}  // namespace kairos

#endif  // KAIROS_PREDICTOR_H_
