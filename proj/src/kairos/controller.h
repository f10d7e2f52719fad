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

#ifndef KAIROS_CONTROLLER_H_
#define KAIROS_CONTROLLER_H_

#include <vector>

#include "kairos/predictor.h"
#include "kairos/session.h"
#include "kairos/trace_io.h"

namespace kairos {

struct ControllerConfig {
  int lookahead = 5;          // chunks
  double lambda = 4.3;        // rebuffer weight, QoE per second
  double mu = 1.0;            // smoothness weight, QoE per Mbps
  double alpha = 0.2;         // uncertainty floor
  double beta = 2.0;          // buffer sensitivity, seconds
  double buffer_eps_s = 0.1;  // floor for the 1/B term
  double gamma_cap = 1.0;
  double b_max_s = 60.0;
  double bola_buffer_low_s = 0.0;   // 0 = derived from b_max and chunk length
  double dp_buffer_grid_s = 0.1;    // offline planner buffer discretization
};

// Buffer-aware shift from the median toward the 0.1-quantile:
// gamma = clamp(alpha + beta / max(B, eps), 0, cap), result clamped to
// at least kPredictionFloorMbps.
double AdjustPrediction(const QuantilePrediction& prediction, double buffer_s,
                        const ControllerConfig& config);

// Exhaustive lookahead maximizing sum of per-chunk QoE
// (bitrate - lambda * stall - mu * |bitrate step|) under planning dynamics
// with the prediction held constant; returns the first rung of the best
// sequence. Ties prefer the lower first rung, then the lexicographically
// smaller sequence.
int MpcDecide(const PlayerState& state, double predicted_mbps,
              const VideoManifest& manifest, const ControllerConfig& config);

// Buffer-based Lyapunov rule: argmax over rungs of
// (V * (utility + gamma_b) - B) / size.
int BolaDecide(const PlayerState& state, const VideoManifest& manifest,
               const ControllerConfig& config);

struct BolaParams {
  double v = 0.0;
  double gamma_b = 0.0;
  std::vector<double> utilities;
  std::vector<double> sizes_mbit;
};
BolaParams DeriveBolaParams(const VideoManifest& manifest,
                            const ControllerConfig& config);

struct OfflinePlan {
  std::vector<int> rungs;
  double average_qoe = 0.0;
};

// Clairvoyant reference: dynamic programming over (chunk, previous rung,
// discretized buffer) with exactly simulated download times.
OfflinePlan OfflineOptimal(const NetworkTrace& trace, const VideoManifest& manifest,
                           const ControllerConfig& config, const SimConfig& sim);

}  // namespace kairos

#endif  // KAIROS_CONTROLLER_H_
