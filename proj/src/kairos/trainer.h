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

#ifndef KAIROS_TRAINER_H_
#define KAIROS_TRAINER_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kairos/predictor.h"
#include "kairos/window.h"

namespace kairos {

struct TrainOptions {
  uint64_t seed = 1;
  int epochs = 30;
  double lr = 1e-3;
  int batch = 64;
  double grad_clip = 5.0;
  bool smooth_loss = true;  // include the smoothness regularizer (attention kind)
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_mape_pct = 0.0;
};

struct TrainResult {
  ThroughputModel model;
  std::vector<EpochStats> log;
};

// Single-worker, deterministic for a given seed. Aborts with a diagnostic
// when the loss turns non-finite.
TrainResult TrainModel(ModelKind kind, const WindowDataset& dataset,
                       const PredictorHyper& hyper, const FeatureScales& scales,
                       const TrainOptions& options);

std::string FormatTrainingLog(const std::vector<EpochStats>& log);

// Median-quantile MAPE of the model over windows carrying truth, percent.
double ModelMedianMape(const ThroughputModel& model,
                       std::span<const ObservationWindow> windows);

}  // namespace kairos

#endif  // KAIROS_TRAINER_H_
