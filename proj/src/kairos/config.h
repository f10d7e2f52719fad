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

#ifndef KAIROS_CONFIG_H_
#define KAIROS_CONFIG_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "kairos/controller.h"
#include "kairos/predictor.h"
#include "kairos/session.h"
#include "kairos/trainer.h"

namespace kairos {

// Every tunable in one place. Values flow to the per-module configs via
// the From* helpers below; each run prints and embeds the resolved form.
struct RunConfig {
  uint64_t seed = 1;
  int workers = 0;  // 0 = hardware concurrency

  // predictor
  int k = 8;
  double eta_s = 4.0;
  int heads = 4;
  int d_k = 16;
  int latent = 32;
  int lstm_hidden = 32;
  int mlp_hidden = 16;
  std::vector<double> quantiles = {0.1, 0.5, 0.9};
  double theta = 1.2;
  bool literal_second_diff = false;
  bool smooth_loss = true;

  // training
  double lr = 1e-3;
  int batch = 64;
  int epochs = 30;
  double grad_clip = 5.0;
  double val_frac = 0.1;

  // reference predictors
  int hm_window = 5;
  int robust_error_window = 5;

  // controller
  int lookahead = 5;
  double lambda = 4.3;
  double mu = 1.0;
  double alpha = 0.2;
  double beta = 2.0;
  double buffer_eps_s = 0.1;
  double gamma_cap = 1.0;
  double bola_buffer_low_s = 0.0;
  double dp_buffer_grid_s = 0.1;

  // player
  double b_max_s = 60.0;
  double rtt_s = 0.08;
};

struct ConfigKey {
  std::string name;
  std::string unit;
  std::string description;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

const std::vector<ConfigKey>& ConfigKeys();
void SetConfigValue(RunConfig& config, const std::string& key,
                    const std::string& value);
// "key = value" lines with '#' comments.
void ApplyConfigFile(RunConfig& config, const std::string& text);
std::string SerializeConfig(const RunConfig& config);
// One line per key with default and unit, for --help.
std::string DescribeConfigKeys();

PredictorHyper HyperFromConfig(const RunConfig& config);
FeatureScales ScalesFromConfig(const RunConfig& config, const VideoManifest& manifest);
ControllerConfig ControllerFromConfig(const RunConfig& config);
SimConfig SimFromConfig(const RunConfig& config);
TrainOptions TrainFromConfig(const RunConfig& config);

}  // namespace kairos

#endif  // KAIROS_CONFIG_H_
