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

#include "kairos/controller.h"

#include <algorithm>
#include <cmath>

#include "kairos/error.h"
#include "kairos/simulator.h"

namespace kairos {

double AdjustPrediction(const QuantilePrediction& prediction, double buffer_s,
                        const ControllerConfig& config) {
  if (buffer_s < 0.0) throw DataError("adjust: negative buffer");
  double median = prediction.ValueAt(0.5);
  double low = prediction.ValueAt(0.1);
  double gamma = config.alpha + config.beta / std::max(buffer_s, config.buffer_eps_s);
  gamma = std::clamp(gamma, 0.0, config.gamma_cap);
  double adjusted = median - gamma * (median - low);
  return std::max(adjusted, kPredictionFloorMbps);
}

int MpcDecide(const PlayerState& state, double predicted_mbps,
              const VideoManifest& manifest, const ControllerConfig& config) {
  if (!(predicted_mbps > 0.0)) throw DataError("mpc: prediction must be positive");
  int remaining = manifest.num_chunks() - state.next_chunk;
  if (remaining < 1) throw DataError("mpc: no chunks remaining");
  int steps = std::min(config.lookahead, remaining);
  int rungs = manifest.num_rungs();
  const std::vector<double>& ladder = manifest.ladder_mbps();
  double dhat = manifest.chunk_duration_s();

  std::vector<int> seq(static_cast<size_t>(steps), 0);
  std::vector<int> best_seq;
  double best_total = -std::numeric_limits<double>::infinity();
  while (true) {
    // Planning recursion: stall when the modeled download outlasts the
    // buffer, then the buffer gains a chunk and loses the download time.
    double buffer = state.buffer_s;
    double prev_rate = state.last_rung >= 0 ? ladder[state.last_rung] : -1.0;
    double total = 0.0;
    for (int j = 0; j < steps; ++j) {
      double rate = ladder[seq[static_cast<size_t>(j)]];
      double download = rate * dhat / predicted_mbps;
      double stall = std::max(0.0, download - buffer);
      buffer = std::clamp(buffer + dhat - download, 0.0, config.b_max_s);
      double qoe = rate - config.lambda * stall;
      if (prev_rate >= 0.0) qoe -= config.mu * std::fabs(rate - prev_rate);
      total += qoe;
      prev_rate = rate;
    }
    // Lexicographic enumeration + strict improvement realizes the
    // lower-first-rung, then lexicographically-smaller tie break.
    if (total > best_total) {
      best_total = total;
      best_seq = seq;
    }
    int pos = steps - 1;
    while (pos >= 0 && seq[static_cast<size_t>(pos)] == rungs - 1) {
      seq[static_cast<size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
    ++seq[static_cast<size_t>(pos)];
  }
  return best_seq[0];
}

BolaParams DeriveBolaParams(const VideoManifest& manifest,
                            const ControllerConfig& config) {
  BolaParams p;
  int rungs = manifest.num_rungs();
  p.sizes_mbit.resize(static_cast<size_t>(rungs));
  p.utilities.resize(static_cast<size_t>(rungs));
  for (int l = 0; l < rungs; ++l) {
    p.sizes_mbit[static_cast<size_t>(l)] =
        manifest.ladder_mbps()[static_cast<size_t>(l)] * manifest.chunk_duration_s();
  }
  for (int l = 0; l < rungs; ++l) {
    p.utilities[static_cast<size_t>(l)] =
        std::log(p.sizes_mbit[static_cast<size_t>(l)] / p.sizes_mbit[0]);
  }
  // Pins the objective to prefer the lowest rung at buffer_low and the top
  // rung at b_max.
  double buffer_low = config.bola_buffer_low_s;
  if (buffer_low <= 0.0) {
    buffer_low = std::max(2.0 * manifest.chunk_duration_s(), 0.1 * config.b_max_s);
  }
  buffer_low = std::min(buffer_low, 0.5 * config.b_max_s);
  double top_utility = p.utilities.back();
  p.v = (config.b_max_s - buffer_low) / top_utility;
  p.gamma_b = 1.0 + buffer_low / p.v;
  return p;
}

int BolaDecide(const PlayerState& state, const VideoManifest& manifest,
               const ControllerConfig& config) {
  BolaParams p = DeriveBolaParams(manifest, config);
  int best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int l = 0; l < manifest.num_rungs(); ++l) {
    double score = (p.v * (p.utilities[static_cast<size_t>(l)] + p.gamma_b) -
                    state.buffer_s) /
                   p.sizes_mbit[static_cast<size_t>(l)];
    if (score > best_score) {
      best_score = score;
      best = l;
    }
  }
  return best;
}

OfflinePlan OfflineOptimal(const NetworkTrace& trace, const VideoManifest& manifest,
                           const ControllerConfig& config, const SimConfig& sim) {
  int chunks = manifest.num_chunks();
  int rungs = manifest.num_rungs();
  double grid = config.dp_buffer_grid_s;
  int buckets = static_cast<int>(std::lround(sim.b_max_s / grid)) + 1;
  const std::vector<double>& ladder = manifest.ladder_mbps();

  struct Cell {
    double score = -std::numeric_limits<double>::infinity();
    double buffer_s = 0.0;
    double wall_s = 0.0;
    int prev_rung = -1;
    int prev_bucket = -1;
  };
  auto bucket_of = [&](double buffer) {
    int b = static_cast<int>(std::lround(buffer / grid));
    return std::clamp(b, 0, buckets - 1);
  };

  size_t layer_size = static_cast<size_t>(rungs) * static_cast<size_t>(buckets);
  std::vector<std::vector<Cell>> layers(
      static_cast<size_t>(chunks) + 1, std::vector<Cell>(layer_size));
  auto at = [&](std::vector<Cell>& layer, int rung, int bucket) -> Cell& {
    return layer[static_cast<size_t>(rung) * static_cast<size_t>(buckets) +
                 static_cast<size_t>(bucket)];
  };

  // Chunk 0 from the empty player; its reward is excluded from QoE.
  for (int r = 0; r < rungs; ++r) {
    PlayerState start;
    StepOutcome out = Step(start, r, trace, manifest, sim);
    Cell& c = at(layers[1], r, bucket_of(out.state.buffer_s));
    if (0.0 > c.score) {
      c.score = 0.0;
      c.buffer_s = out.state.buffer_s;
      c.wall_s = out.state.wall_s;
      c.prev_rung = -1;
      c.prev_bucket = -1;
    }
  }

  for (int chunk = 1; chunk < chunks; ++chunk) {
    std::vector<Cell>& prev_layer = layers[static_cast<size_t>(chunk)];
    std::vector<Cell>& next_layer = layers[static_cast<size_t>(chunk) + 1];
    for (int pr = 0; pr < rungs; ++pr) {
      for (int pb = 0; pb < buckets; ++pb) {
        const Cell& from = at(prev_layer, pr, pb);
        if (!std::isfinite(from.score)) continue;
        for (int r = 0; r < rungs; ++r) {
          PlayerState st;
          st.buffer_s = from.buffer_s;
          st.wall_s = from.wall_s;
          st.next_chunk = chunk;
          st.last_rung = pr;
          StepOutcome out = Step(st, r, trace, manifest, sim);
          double reward = ladder[static_cast<size_t>(r)] -
                          config.lambda * out.record.rebuffer_s -
                          config.mu * std::fabs(ladder[static_cast<size_t>(r)] -
                                                ladder[static_cast<size_t>(pr)]);
          double score = from.score + reward;
          Cell& dest = at(next_layer, r, bucket_of(out.state.buffer_s));
          bool better = score > dest.score ||
                        (score == dest.score && out.state.buffer_s > dest.buffer_s);
          if (better) {
            dest.score = score;
            dest.buffer_s = out.state.buffer_s;
            dest.wall_s = out.state.wall_s;
            dest.prev_rung = pr;
            dest.prev_bucket = pb;
          }
        }
      }
    }
  }

  // Best terminal cell, then walk the parents back.
  int best_rung = 0;
  int best_bucket = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  std::vector<Cell>& last = layers[static_cast<size_t>(chunks)];
  for (int r = 0; r < rungs; ++r) {
    for (int b = 0; b < buckets; ++b) {
      const Cell& c = at(last, r, b);
      if (c.score > best_score) {
        best_score = c.score;
        best_rung = r;
        best_bucket = b;
      }
    }
  }
  OfflinePlan plan;
  plan.rungs.assign(static_cast<size_t>(chunks), 0);
  int rung = best_rung;
  int bucket = best_bucket;
  for (int chunk = chunks; chunk >= 1; --chunk) {
    plan.rungs[static_cast<size_t>(chunk - 1)] = rung;
    const Cell& c = at(layers[static_cast<size_t>(chunk)], rung, bucket);
    rung = c.prev_rung;
    bucket = c.prev_bucket;
    if (chunk > 1 && (rung < 0 || bucket < 0)) {
      throw NumericError("offline planner: broken parent chain");
    }
  }
  plan.average_qoe = best_score / static_cast<double>(chunks - 1);
  return plan;
}

}  // namespace kairos
