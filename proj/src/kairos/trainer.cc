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

#include "kairos/trainer.h"

#include <cmath>
#include <sstream>

#include "kairos/error.h"
#include "kairos/rng.h"
#include "kairos/text_util.h"

namespace kairos {

namespace {

// Loss of one batch of windows; trainable=false reuses the same graph for
// validation without gradient bookkeeping.
Tensor BatchLossGraph(Tape& tape, const ThroughputModel& model,
                      const WindowDataset& dataset,
                      std::span<const size_t> indices, bool smooth_loss,
                      bool trainable) {
  std::vector<std::vector<Tensor>> preds;
  std::vector<double> truths;
  Tensor smooth_total = tape.ConstantScalar(0.0);
  int median_idx = model.hyper().MedianIndex();
  for (size_t idx : indices) {
    const ObservationWindow& w = dataset.windows[idx];
    ThroughputModel::Forward fwd = model.Build(tape, w, trainable);
    preds.push_back(fwd.values_mbps);
    truths.push_back(w.truth_mbps);
    if (smooth_loss && model.kind() == ModelKind::kMtan) {
      Tensor ls = SmoothLossGraph(tape, fwd.encoded,
                                  fwd.values_mbps[static_cast<size_t>(median_idx)], w,
                                  model.hyper());
      smooth_total = Add(smooth_total, ls);
    }
  }
  Tensor loss = QuantileLossGraph(tape, preds, truths, model.hyper().quantiles);
  if (smooth_loss && model.kind() == ModelKind::kMtan) {
    loss = Add(loss, Scale(smooth_total, 1.0 / static_cast<double>(indices.size())));
  }
  return loss;
}

double EvalLoss(const ThroughputModel& model, const WindowDataset& dataset,
                std::span<const size_t> indices, bool smooth_loss) {
  if (indices.empty()) return 0.0;
  double total = 0.0;
  size_t chunk = 256;
  for (size_t start = 0; start < indices.size(); start += chunk) {
    size_t end = std::min(indices.size(), start + chunk);
    Tape tape;
    Tensor loss = BatchLossGraph(tape, model, dataset,
                                 indices.subspan(start, end - start), smooth_loss,
                                 /*trainable=*/false);
    total += loss.Scalar() * static_cast<double>(end - start);
  }
  return total / static_cast<double>(indices.size());
}

}  // namespace

TrainResult TrainModel(ModelKind kind, const WindowDataset& dataset,
                       const PredictorHyper& hyper, const FeatureScales& scales,
                       const TrainOptions& options) {
  if (dataset.windows.empty()) throw DataError("train: dataset is empty");
  for (const ObservationWindow& w : dataset.windows) {
    if (!w.has_truth()) throw DataError("train: window without truth");
    if (w.k() != hyper.k) throw DataError("train: window length != hyper k");
  }
  std::vector<size_t> train_idx = dataset.TrainIndices();
  std::vector<size_t> val_idx = dataset.ValIndices();
  if (train_idx.empty()) throw DataError("train: no training windows after split");

  TrainResult result{ThroughputModel(kind, hyper, scales), {}};
  ThroughputModel& model = result.model;
  model.InitParams(options.seed);
  std::vector<Param*> params = model.Params();
  AdamOptimizer optimizer(params, AdamConfig{options.lr, 0.9, 0.999, 1e-8});
  Rng shuffle_rng(MixSeed(options.seed, 0x747261696eULL));

  bool use_smooth = options.smooth_loss && kind == ModelKind::kMtan;
  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    shuffle_rng.Shuffle(train_idx);
    double epoch_loss = 0.0;
    size_t batches = 0;
    for (size_t start = 0; start < train_idx.size();
         start += static_cast<size_t>(options.batch)) {
      size_t end =
          std::min(train_idx.size(), start + static_cast<size_t>(options.batch));
      Tape tape;
      std::span<const size_t> batch(train_idx.data() + start, end - start);
      Tensor loss =
          BatchLossGraph(tape, model, dataset, batch, use_smooth, /*trainable=*/true);
      double loss_value = loss.Scalar();
      if (!std::isfinite(loss_value)) {
        throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch) +
                           ", batch " + std::to_string(batches));
      }
      optimizer.ZeroGrad();
      tape.Backward(loss);
      ClipGradGlobalNorm(params, options.grad_clip);
      optimizer.Step();
      epoch_loss += loss_value;
      ++batches;
    }
    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = epoch_loss / static_cast<double>(std::max<size_t>(batches, 1));
    stats.val_loss = EvalLoss(model, dataset, val_idx, use_smooth);
    std::vector<ObservationWindow> val_windows;
    val_windows.reserve(val_idx.size());
    for (size_t i : val_idx) val_windows.push_back(dataset.windows[i]);
    stats.val_mape_pct = val_windows.empty() ? 0.0 : ModelMedianMape(model, val_windows);
    result.log.push_back(stats);
  }
  return result;
}

std::string FormatTrainingLog(const std::vector<EpochStats>& log) {
  std::ostringstream out;
  out << "epoch\ttrain_loss\tval_loss\tval_mape_pct\n";
  for (const EpochStats& e : log) {
    out << e.epoch << "\t" << FormatDouble(e.train_loss) << "\t"
        << FormatDouble(e.val_loss) << "\t" << FormatDouble(e.val_mape_pct) << "\n";
  }
  return out.str();
}

double ModelMedianMape(const ThroughputModel& model,
                       std::span<const ObservationWindow> windows) {
  if (windows.empty()) throw DataError("mape: no windows");
  double total = 0.0;
  size_t count = 0;
  for (const ObservationWindow& w : windows) {
    if (!w.has_truth() || w.truth_mbps <= 0.0) {
      throw DataError("mape: window without positive truth");
    }
    QuantilePrediction pred = model.Predict(w);
    double median = pred.ValueAt(0.5);
    total += std::fabs(median - w.truth_mbps) / w.truth_mbps;
    ++count;
  }
  return 100.0 * total / static_cast<double>(count);
}

}  // namespace kairos
