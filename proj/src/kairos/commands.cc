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

#include "kairos/commands.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <sstream>

#include "kairos/checkpoint.h"
#include "kairos/error.h"
#include "kairos/harness.h"
#include "kairos/rng.h"
#include "kairos/text_util.h"
#include "kairos/trainer.h"

namespace kairos {

namespace fs = std::filesystem;

namespace {

void WriteRunManifest(const std::string& out_dir, const std::string& command,
                      const std::vector<std::pair<std::string, std::string>>& inputs,
                      const RunConfig& config) {
  std::ostringstream out;
  out << "command " << command << "\n";
  for (const auto& [key, value] : inputs) out << key << " " << value << "\n";
  out << "config:\n" << SerializeConfig(config);
  WriteFile(out_dir + "/run_manifest.txt", out.str());
}

std::vector<NetworkTrace> LoadTracesDir(const std::string& dir) {
  std::vector<NetworkTrace> traces;
  for (const std::string& path : ListTraceFiles(dir)) {
    traces.push_back(LoadTraceFile(path));
  }
  if (traces.empty()) throw DataError("no .trace files under " + dir);
  return traces;
}

std::optional<ThroughputModel> MaybeLoadCheckpoint(const std::string& path) {
  if (!fs::exists(path)) return std::nullopt;
  return LoadCheckpoint(path);
}

struct LoadedModels {
  std::optional<ThroughputModel> mtan;
  std::optional<ThroughputModel> mtan_ns;
  std::optional<ThroughputModel> lstm;

  void FillToolkit(PolicyToolkit& toolkit) const {
    toolkit.mtan = mtan.has_value() ? &*mtan : nullptr;
    toolkit.mtan_ns = mtan_ns.has_value() ? &*mtan_ns : nullptr;
    toolkit.lstm = lstm.has_value() ? &*lstm : nullptr;
  }
};

LoadedModels LoadModels(const std::string& ckpt_dir) {
  LoadedModels m;
  if (ckpt_dir.empty()) return m;
  m.mtan = MaybeLoadCheckpoint(ckpt_dir + "/mtan.ckpt");
  m.mtan_ns = MaybeLoadCheckpoint(ckpt_dir + "/mtan_ns.ckpt");
  m.lstm = MaybeLoadCheckpoint(ckpt_dir + "/lstm.ckpt");
  return m;
}

}  // namespace

std::vector<std::string> ListTraceFiles(const std::string& dir) {
  if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir);
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".trace") {
      files.push_back(entry.path().string());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

void CmdGenTraces(const RunConfig& config, const std::string& spec_path,
                  const std::string& out_dir, int count) {
  if (count < 1) throw UsageError("gen-traces: count must be >= 1");
  SyntheticTraceSpec spec = ParseTraceSpec(ReadFile(spec_path));
  fs::create_directories(out_dir);
  for (int i = 0; i < count; ++i) {
    char name[64];
    std::snprintf(name, sizeof(name), "synthetic_%04d", i);
    NetworkTrace trace =
        GenerateTrace(spec, MixSeed(config.seed, static_cast<uint64_t>(i)), name);
    WriteFile(out_dir + "/" + name + ".trace", SerializeTrace(trace));
  }
  WriteRunManifest(out_dir, "gen-traces",
                   {{"spec", spec_path}, {"count", std::to_string(count)}}, config);
}

void CmdMakeDataset(const RunConfig& config, const std::string& traces_dir,
                    const std::string& manifest_path, const std::string& out_dir) {
  std::vector<NetworkTrace> traces = LoadTracesDir(traces_dir);
  VideoManifest manifest = LoadManifestFile(manifest_path);
  fs::create_directories(out_dir);

  PolicyToolkit toolkit;
  toolkit.manifest = &manifest;
  toolkit.controller = ControllerFromConfig(config);
  toolkit.sim = SimFromConfig(config);
  toolkit.hm_window = config.hm_window;
  toolkit.robust_error_window = config.robust_error_window;

  WindowDataset dataset;
  dataset.k = config.k;
  dataset.eta_s = config.eta_s;
  for (const NetworkTrace& trace : traces) {
    std::unique_ptr<Policy> policy = MakePolicy("hm-mpc", toolkit, &trace);
    SessionResult session =
        RunSession(trace, manifest, *policy, toolkit.sim, config.lambda, config.mu,
                   "hm-mpc");
    std::vector<ObservationWindow> windows =
        SliceSessionWindows(session, config.k, manifest.chunk_duration_s());
    dataset.windows.insert(dataset.windows.end(), windows.begin(), windows.end());
  }

  // Split by trace so overlapping windows never straddle the split.
  std::vector<std::string> ids;
  for (const NetworkTrace& t : traces) ids.push_back(t.id());
  Rng rng(MixSeed(config.seed, 0x73706c6974ULL));
  rng.Shuffle(ids);
  size_t val_count = static_cast<size_t>(
      std::max(0.0, std::round(config.val_frac * static_cast<double>(ids.size()))));
  if (val_count >= ids.size()) val_count = ids.size() - 1;
  dataset.val_traces.assign(ids.begin(), ids.begin() + static_cast<long>(val_count));
  dataset.train_traces.assign(ids.begin() + static_cast<long>(val_count), ids.end());
  std::sort(dataset.val_traces.begin(), dataset.val_traces.end());
  std::sort(dataset.train_traces.begin(), dataset.train_traces.end());

  WriteFile(out_dir + "/dataset.txt", SerializeDataset(dataset));
  WriteRunManifest(out_dir, "make-dataset",
                   {{"traces", traces_dir},
                    {"manifest", manifest_path},
                    {"windows", std::to_string(dataset.windows.size())}},
                   config);
}

void CmdTrain(const RunConfig& config, const std::string& dataset_path,
              const std::string& manifest_path, const std::string& arch,
              const std::string& name, const std::string& out_dir) {
  WindowDataset dataset = ParseDataset(ReadFile(dataset_path));
  VideoManifest manifest = LoadManifestFile(manifest_path);
  ModelKind kind = ModelKindFromName(arch);
  PredictorHyper hyper = HyperFromConfig(config);
  if (hyper.k != dataset.k) {
    throw DataError("train: config k=" + std::to_string(hyper.k) +
                    " but dataset was sliced with k=" + std::to_string(dataset.k));
  }
  FeatureScales scales = ScalesFromConfig(config, manifest);
  TrainResult result =
      TrainModel(kind, dataset, hyper, scales, TrainFromConfig(config));
  fs::create_directories(out_dir);
  SaveCheckpoint(out_dir + "/" + name + ".ckpt", result.model, config.seed);
  WriteFile(out_dir + "/" + name + "_training_log.tsv", FormatTrainingLog(result.log));
  WriteRunManifest(out_dir, "train",
                   {{"dataset", dataset_path},
                    {"manifest", manifest_path},
                    {"arch", arch},
                    {"name", name}},
                   config);
  if (!result.log.empty()) {
    const EpochStats& last = result.log.back();
    std::printf("trained %s: final train_loss %.6f val_loss %.6f val_mape %.2f%%\n",
                name.c_str(), last.train_loss, last.val_loss, last.val_mape_pct);
  }
}

void CmdSimulate(const RunConfig& config, const std::string& trace_path,
                 const std::string& manifest_path, const std::string& controller,
                 const std::string& ckpt_dir, const std::string& out_dir) {
  NetworkTrace trace = LoadTraceFile(trace_path);
  VideoManifest manifest = LoadManifestFile(manifest_path);
  LoadedModels models = LoadModels(ckpt_dir);

  PolicyToolkit toolkit;
  toolkit.manifest = &manifest;
  toolkit.controller = ControllerFromConfig(config);
  toolkit.sim = SimFromConfig(config);
  toolkit.hm_window = config.hm_window;
  toolkit.robust_error_window = config.robust_error_window;
  models.FillToolkit(toolkit);

  std::unique_ptr<Policy> policy = MakePolicy(controller, toolkit, &trace);
  SessionResult session = RunSession(trace, manifest, *policy, toolkit.sim,
                                     config.lambda, config.mu, controller);
  fs::create_directories(out_dir);
  WriteFile(out_dir + "/session.log", SerializeSessionLog(session));
  WriteRunManifest(out_dir, "simulate",
                   {{"trace", trace_path},
                    {"manifest", manifest_path},
                    {"controller", controller}},
                   config);
  std::printf("%s on %s: qoe %.4f (utility %.4f, rebuffer %.4f, smooth %.4f)\n",
              controller.c_str(), trace.id().c_str(), session.qoe.average,
              session.qoe.utility, session.qoe.rebuffer_penalty,
              session.qoe.smoothness_penalty);
}

namespace {

void RunMatrix(const RunConfig& config, const std::string& traces_dir,
               const std::string& manifest_path, const std::string& ckpt_dir,
               const std::vector<std::string>& controllers,
               const std::string& out_dir, const std::string& command) {
  std::vector<NetworkTrace> traces = LoadTracesDir(traces_dir);
  VideoManifest manifest = LoadManifestFile(manifest_path);
  LoadedModels models = LoadModels(ckpt_dir);

  PolicyToolkit toolkit;
  toolkit.manifest = &manifest;
  toolkit.controller = ControllerFromConfig(config);
  toolkit.sim = SimFromConfig(config);
  toolkit.hm_window = config.hm_window;
  toolkit.robust_error_window = config.robust_error_window;
  models.FillToolkit(toolkit);

  ComparisonReport report = RunComparison(traces, controllers, toolkit, config.workers);
  report.mape = BuildMapeTable(report, toolkit);
  fs::create_directories(out_dir);
  WriteComparisonFiles(out_dir, report);
  WriteRunManifest(out_dir, command,
                   {{"traces", traces_dir},
                    {"manifest", manifest_path},
                    {"checkpoints", ckpt_dir.empty() ? "-" : ckpt_dir}},
                   config);
  for (const ControllerAggregate& a : report.aggregates) {
    std::printf("%-16s mean qoe %.4f (utility %.4f, rebuffer %.4f, smooth %.4f)\n",
                a.controller.c_str(), a.mean.average, a.mean.utility,
                a.mean.rebuffer_penalty, a.mean.smoothness_penalty);
  }
}

}  // namespace

void CmdCompare(const RunConfig& config, const std::string& traces_dir,
                const std::string& manifest_path, const std::string& ckpt_dir,
                const std::vector<std::string>& controllers,
                const std::string& out_dir) {
  std::vector<std::string> list = controllers.empty() ? DefaultControllers() : controllers;
  RunMatrix(config, traces_dir, manifest_path, ckpt_dir, list, out_dir, "compare");
}

void CmdAblate(const RunConfig& config, const std::string& traces_dir,
               const std::string& manifest_path, const std::string& ckpt_dir,
               const std::string& out_dir) {
  RunMatrix(config, traces_dir, manifest_path, ckpt_dir, AblationControllers(), out_dir,
            "ablate");
}

}  // namespace kairos
