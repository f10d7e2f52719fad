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

#include "kairos/config.h"

#include <sstream>

#include "kairos/error.h"
#include "kairos/text_util.h"

namespace kairos {

namespace {

std::string FormatQuantiles(const std::vector<double>& levels) {
  std::string out;
  for (size_t i = 0; i < levels.size(); ++i) {
    if (i > 0) out += ",";
    out += FormatDouble(levels[i]);
  }
  return out;
}

std::vector<double> ParseQuantiles(const std::string& text) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    out.push_back(ParseDouble(Trim(item), "quantiles"));
  }
  if (out.empty()) throw DataError("quantiles: empty list");
  return out;
}

bool ParseBool(const std::string& text, const std::string& where) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw DataError(where + ": expected true/false, got '" + text + "'");
}

template <typename T>
ConfigKey IntKey(const std::string& name, const std::string& unit,
                 const std::string& desc, T RunConfig::* field) {
  return ConfigKey{
      name, unit, desc,
      [field](const RunConfig& c) { return std::to_string(c.*field); },
      [field, name](RunConfig& c, const std::string& v) {
        c.*field = static_cast<T>(ParseLong(v, name));
      }};
}

ConfigKey DoubleKey(const std::string& name, const std::string& unit,
                    const std::string& desc, double RunConfig::* field) {
  return ConfigKey{
      name, unit, desc,
      [field](const RunConfig& c) { return FormatDouble(c.*field); },
      [field, name](RunConfig& c, const std::string& v) {
        c.*field = ParseDouble(v, name);
      }};
}

ConfigKey BoolKey(const std::string& name, const std::string& desc,
                  bool RunConfig::* field) {
  return ConfigKey{
      name, "bool", desc,
      [field](const RunConfig& c) { return c.*field ? "true" : "false"; },
      [field, name](RunConfig& c, const std::string& v) {
        c.*field = ParseBool(v, name);
      }};
}

std::vector<ConfigKey> BuildKeys() {
  std::vector<ConfigKey> keys;
  keys.push_back(ConfigKey{
      "seed", "integer", "master random seed",
      [](const RunConfig& c) { return std::to_string(c.seed); },
      [](RunConfig& c, const std::string& v) {
        c.seed = static_cast<uint64_t>(ParseLong(v, "seed"));
      }});
  keys.push_back(IntKey("workers", "count", "parallel session workers (0 = auto)",
                        &RunConfig::workers));
  keys.push_back(IntKey("k", "chunks", "observation window length", &RunConfig::k));
  keys.push_back(DoubleKey("eta_s", "s", "reference point spacing", &RunConfig::eta_s));
  keys.push_back(IntKey("heads", "count", "attention heads", &RunConfig::heads));
  keys.push_back(IntKey("d_k", "dims", "time embedding width", &RunConfig::d_k));
  keys.push_back(IntKey("latent", "dims", "interpolated feature width", &RunConfig::latent));
  keys.push_back(IntKey("lstm_hidden", "dims", "recurrent state width",
                        &RunConfig::lstm_hidden));
  keys.push_back(IntKey("mlp_hidden", "dims", "head hidden width", &RunConfig::mlp_hidden));
  keys.push_back(ConfigKey{
      "quantiles", "levels", "prediction quantile levels, comma separated",
      [](const RunConfig& c) { return FormatQuantiles(c.quantiles); },
      [](RunConfig& c, const std::string& v) { c.quantiles = ParseQuantiles(v); }});
  keys.push_back(DoubleKey("theta", "ratio", "smoothness penalty threshold",
                           &RunConfig::theta));
  keys.push_back(BoolKey("literal_second_diff",
                         "use the printed-sign curvature variant",
                         &RunConfig::literal_second_diff));
  keys.push_back(BoolKey("smooth_loss", "train with the smoothness regularizer",
                         &RunConfig::smooth_loss));
  keys.push_back(DoubleKey("lr", "1/step", "Adam learning rate", &RunConfig::lr));
  keys.push_back(IntKey("batch", "windows", "training batch size", &RunConfig::batch));
  keys.push_back(IntKey("epochs", "count", "training epochs", &RunConfig::epochs));
  keys.push_back(DoubleKey("grad_clip", "norm", "global gradient norm cap",
                           &RunConfig::grad_clip));
  keys.push_back(DoubleKey("val_frac", "fraction", "validation trace share",
                           &RunConfig::val_frac));
  keys.push_back(IntKey("hm_window", "chunks", "harmonic mean lookback",
                        &RunConfig::hm_window));
  keys.push_back(IntKey("robust_error_window", "chunks",
                        "error-discount lookback", &RunConfig::robust_error_window));
  keys.push_back(IntKey("lookahead", "chunks", "planning horizon", &RunConfig::lookahead));
  keys.push_back(DoubleKey("lambda", "QoE/s", "rebuffer penalty weight",
                           &RunConfig::lambda));
  keys.push_back(DoubleKey("mu", "QoE/Mbps", "smoothness penalty weight",
                           &RunConfig::mu));
  keys.push_back(DoubleKey("alpha", "unitless", "uncertainty shift floor",
                           &RunConfig::alpha));
  keys.push_back(DoubleKey("beta", "s", "uncertainty buffer sensitivity",
                           &RunConfig::beta));
  keys.push_back(DoubleKey("buffer_eps_s", "s", "buffer floor in the shift rule",
                           &RunConfig::buffer_eps_s));
  keys.push_back(DoubleKey("gamma_cap", "unitless", "uncertainty shift cap",
                           &RunConfig::gamma_cap));
  keys.push_back(DoubleKey("bola_buffer_low_s", "s",
                           "buffer pinning the lowest rung (0 = derived)",
                           &RunConfig::bola_buffer_low_s));
  keys.push_back(DoubleKey("dp_buffer_grid_s", "s",
                           "offline planner buffer discretization",
                           &RunConfig::dp_buffer_grid_s));
  keys.push_back(DoubleKey("b_max_s", "s", "playback buffer capacity",
                           &RunConfig::b_max_s));
  keys.push_back(DoubleKey("rtt_s", "s", "per-chunk request latency", &RunConfig::rtt_s));
  return keys;
}

}  // namespace

const std::vector<ConfigKey>& ConfigKeys() {
  static const std::vector<ConfigKey>* keys = new std::vector<ConfigKey>(BuildKeys());
  return *keys;
}

void SetConfigValue(RunConfig& config, const std::string& key,
                    const std::string& value) {
  for (const ConfigKey& k : ConfigKeys()) {
    if (k.name == key) {
      k.set(config, value);
      return;
    }
  }
  throw UsageError("unknown config key '" + key + "'");
}

void ApplyConfigFile(RunConfig& config, const std::string& text) {
  for (const std::string& raw : SplitLines(text)) {
    std::string line = Trim(raw);
    if (line.empty() || line[0] == '#') continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw DataError("config: expected 'key = value', got '" + line + "'");
    }
    SetConfigValue(config, Trim(line.substr(0, eq)), Trim(line.substr(eq + 1)));
  }
}

std::string SerializeConfig(const RunConfig& config) {
  std::ostringstream out;
  for (const ConfigKey& k : ConfigKeys()) {
    out << k.name << " = " << k.get(config) << "\n";
  }
  return out.str();
}

std::string DescribeConfigKeys() {
  RunConfig defaults;
  std::ostringstream out;
  for (const ConfigKey& k : ConfigKeys()) {
    char line[200];
    std::snprintf(line, sizeof(line), "  %-22s default %-14s [%s] %s\n",
                  k.name.c_str(), k.get(defaults).c_str(), k.unit.c_str(),
                  k.description.c_str());
    out << line;
  }
  return out.str();
}

PredictorHyper HyperFromConfig(const RunConfig& config) {
  PredictorHyper h;
  h.k = config.k;
  h.eta_s = config.eta_s;
  h.heads = config.heads;
  h.d_k = config.d_k;
  h.latent = config.latent;
  h.lstm_hidden = config.lstm_hidden;
  h.mlp_hidden = config.mlp_hidden;
  h.quantiles = config.quantiles;
  h.theta = config.theta;
  h.literal_second_diff = config.literal_second_diff;
  h.Validate();
  return h;
}

FeatureScales ScalesFromConfig(const RunConfig& config,
                               const VideoManifest& manifest) {
  FeatureScales s;
  s.throughput_mbps = manifest.ladder_mbps().back();
  s.buffer_s = config.b_max_s;
  s.rebuffer_s = manifest.chunk_duration_s();
  return s;
}

ControllerConfig ControllerFromConfig(const RunConfig& config) {
  ControllerConfig c;
  c.lookahead = config.lookahead;
  c.lambda = config.lambda;
  c.mu = config.mu;
  c.alpha = config.alpha;
  c.beta = config.beta;
  c.buffer_eps_s = config.buffer_eps_s;
  c.gamma_cap = config.gamma_cap;
  c.b_max_s = config.b_max_s;
  c.bola_buffer_low_s = config.bola_buffer_low_s;
  c.dp_buffer_grid_s = config.dp_buffer_grid_s;
  return c;
}

SimConfig SimFromConfig(const RunConfig& config) {
  SimConfig s;
  s.rtt_s = config.rtt_s;
  s.b_max_s = config.b_max_s;
  return s;
}

TrainOptions TrainFromConfig(const RunConfig& config) {
  TrainOptions t;
  t.seed = config.seed;
  t.epochs = config.epochs;
  t.lr = config.lr;
  t.batch = config.batch;
  t.grad_clip = config.grad_clip;
  t.smooth_loss = config.smooth_loss;
  return t;
}

}  // namespace kairos
