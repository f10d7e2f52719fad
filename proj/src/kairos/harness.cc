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

#include "kairos/harness.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <sstream>
#include <thread>

#include "kairos/baselines.h"
#include "kairos/error.h"
#include "kairos/text_util.h"
#include "kairos/trainer.h"
#include "kairos/window.h"

namespace kairos {

QoeBreakdown ComputeQoeBreakdown(std::span<const ChunkRecord> records, double lambda,
                                 double mu) {
  if (records.size() < 2) throw DataError("qoe: need at least 2 chunks");
  double utility = 0.0;
  double stall = 0.0;
  double switches = 0.0;
  for (size_t i = 1; i < records.size(); ++i) {
    utility += records[i].bitrate_mbps;
    stall += records[i].rebuffer_s;
    switches += std::fabs(records[i].bitrate_mbps - records[i - 1].bitrate_mbps);
  }
  double denom = static_cast<double>(records.size() - 1);
  QoeBreakdown q;
  q.utility = utility / denom;
  q.rebuffer_penalty = lambda * stall / denom;
  q.smoothness_penalty = mu * switches / denom;
  q.average = q.utility - q.rebuffer_penalty - q.smoothness_penalty;
  return q;
}

double Mape(std::span<const double> predicted, std::span<const double> actual) {
  if (predicted.size() != actual.size()) throw DataError("mape: length mismatch");
  if (predicted.empty()) throw DataError("mape: empty input");
  double total = 0.0;
  for (size_t i = 0; i < predicted.size(); ++i) {
    if (!(actual[i] > 0.0)) throw DataError("mape: actual values must be positive");
    total += std::fabs(predicted[i] - actual[i]) / actual[i];
  }
  return 100.0 * total / static_cast<double>(predicted.size());
}

std::vector<std::pair<double, double>> EmpiricalCdf(std::vector<double> values) {
  if (values.empty()) throw DataError("cdf: empty input");
  std::sort(values.begin(), values.end());
  std::vector<std::pair<double, double>> points;
  points.reserve(values.size());
  for (size_t i = 0; i < values.size(); ++i) {
    points.emplace_back(values[i],
                        static_cast<double>(i + 1) / static_cast<double>(values.size()));
  }
  return points;
}

namespace {

std::vector<double> RecentThroughputs(const std::vector<ChunkRecord>& history,
                                      int window) {
  size_t take = std::min(history.size(), static_cast<size_t>(window));
  std::vector<double> out;
  out.reserve(take);
  for (size_t i = history.size() - take; i < history.size(); ++i) {
    out.push_back(history[i].throughput_mbps);
  }
  return out;
}

class HmMpcPolicy : public Policy {
 public:
  HmMpcPolicy(const PolicyToolkit& toolkit, bool robust)
      : toolkit_(toolkit),
        robust_(robust),
        discounter_(toolkit.robust_error_window) {}

  Decision Decide(const PlayerState& state,
                  const std::vector<ChunkRecord>& history) override {
    if (history.empty()) return Decision{};
    double hm = HarmonicMean(RecentThroughputs(history, toolkit_.hm_window));
    double used = robust_ ? discounter_.Apply(hm) : hm;
    Decision d;
    d.rung = MpcDecide(state, used, *toolkit_.manifest, toolkit_.controller);
    d.q10 = d.q50 = d.q90 = hm;
    d.adjusted = used;
    return d;
  }

  void Observe(const ChunkRecord& record) override {
    if (robust_) discounter_.Observe(record.throughput_mbps);
  }

 private:
  const PolicyToolkit& toolkit_;
  bool robust_;
  RobustDiscounter discounter_;
};

class BolaPolicy : public Policy {
 public:
  explicit BolaPolicy(const PolicyToolkit& toolkit) : toolkit_(toolkit) {}

  Decision Decide(const PlayerState& state,
                  const std::vector<ChunkRecord>& history) override {
    (void)history;
    Decision d;
    d.rung = BolaDecide(state, *toolkit_.manifest, toolkit_.controller);
    return d;
  }

 private:
  const PolicyToolkit& toolkit_;
};

// Quantile model + MPC. Uncertainty handling is either the buffer-aware
// shift or the error-discount rule applied to the median.
class ModelMpcPolicy : public Policy {
 public:
  ModelMpcPolicy(const PolicyToolkit& toolkit, const ThroughputModel* model,
                 bool buffer_aware)
      : toolkit_(toolkit),
        model_(model),
        buffer_aware_(buffer_aware),
        discounter_(toolkit.robust_error_window) {
    if (model_ == nullptr) throw DataError("policy: missing model checkpoint");
  }

  Decision Decide(const PlayerState& state,
                  const std::vector<ChunkRecord>& history) override {
    if (history.empty()) return Decision{};
    ObservationWindow window = WindowFromHistory(
        history, model_->hyper().k, toolkit_.manifest->chunk_duration_s());
    QuantilePrediction pred = model_->Predict(window);
    double adjusted;
    if (buffer_aware_) {
      adjusted = AdjustPrediction(pred, state.buffer_s, toolkit_.controller);
    } else {
      adjusted = std::max(discounter_.Apply(pred.ValueAt(0.5)), kPredictionFloorMbps);
    }
    Decision d;
    d.rung = MpcDecide(state, adjusted, *toolkit_.manifest, toolkit_.controller);
    d.q10 = pred.ValueAt(0.1);
    d.q50 = pred.ValueAt(0.5);
    d.q90 = pred.levels.size() > 2 ? pred.values_mbps.back() : d.q50;
    d.adjusted = adjusted;
    return d;
  }

  void Observe(const ChunkRecord& record) override {
    if (!buffer_aware_) discounter_.Observe(record.throughput_mbps);
  }

 private:
  const PolicyToolkit& toolkit_;
  const ThroughputModel* model_;
  bool buffer_aware_;
  RobustDiscounter discounter_;
};

class PlanPolicy : public Policy {
 public:
  explicit PlanPolicy(std::vector<int> plan) : plan_(std::move(plan)) {}

  Decision Decide(const PlayerState& state,
                  const std::vector<ChunkRecord>& history) override {
    (void)history;
    Decision d;
    d.rung = plan_[static_cast<size_t>(state.next_chunk)];
    return d;
  }

 private:
  std::vector<int> plan_;
};

}  // namespace

std::unique_ptr<Policy> MakePolicy(const std::string& name,
                                   const PolicyToolkit& toolkit,
                                   const NetworkTrace* trace) {
  if (toolkit.manifest == nullptr) throw DataError("policy: toolkit has no manifest");
  if (name == "hm-mpc") return std::make_unique<HmMpcPolicy>(toolkit, false);
  if (name == "robust-hm-mpc") return std::make_unique<HmMpcPolicy>(toolkit, true);
  if (name == "bola") return std::make_unique<BolaPolicy>(toolkit);
  if (name == "kairos") return std::make_unique<ModelMpcPolicy>(toolkit, toolkit.mtan, true);
  if (name == "kairos-na")
    return std::make_unique<ModelMpcPolicy>(toolkit, toolkit.mtan, false);
  if (name == "kairos-ni")
    return std::make_unique<ModelMpcPolicy>(toolkit, toolkit.lstm, true);
  if (name == "kairos-ns")
    return std::make_unique<ModelMpcPolicy>(toolkit, toolkit.mtan_ns, true);
  if (name == "offline-optimal") {
    if (trace == nullptr) throw DataError("offline-optimal needs the trace");
    OfflinePlan plan =
        OfflineOptimal(*trace, *toolkit.manifest, toolkit.controller, toolkit.sim);
    return std::make_unique<PlanPolicy>(std::move(plan.rungs));
  }
  throw DataError("unknown controller '" + name + "'");
}

std::vector<std::string> DefaultControllers() {
  return {"kairos", "robust-hm-mpc", "hm-mpc", "bola", "offline-optimal"};
}

std::vector<std::string> AblationControllers() {
  return {"kairos", "kairos-na", "kairos-ni", "kairos-ns"};
}

int ComparisonReport::ControllerIndex(const std::string& name) const {
  for (size_t i = 0; i < controllers.size(); ++i) {
    if (controllers[i] == name) return static_cast<int>(i);
  }
  return -1;
}

ComparisonReport RunComparison(const std::vector<NetworkTrace>& traces,
                               const std::vector<std::string>& controllers,
                               const PolicyToolkit& toolkit, int workers) {
  if (traces.empty()) throw DataError("comparison: no traces");
  if (controllers.empty()) throw DataError("comparison: no controllers");
  ComparisonReport report;
  report.controllers = controllers;
  for (const NetworkTrace& t : traces) report.trace_ids.push_back(t.id());
  size_t total = traces.size() * controllers.size();
  report.sessions.resize(total);

  if (workers <= 0) {
    workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers <= 0) workers = 1;
  }
  workers = std::min<int>(workers, static_cast<int>(total));
  std::atomic<size_t> cursor{0};
  std::atomic<bool> failed{false};
  std::string failure;
  std::mutex failure_mutex;
  auto run = [&]() {
    while (true) {
      size_t idx = cursor.fetch_add(1);
      if (idx >= total || failed.load()) return;
      size_t t = idx / controllers.size();
      size_t c = idx % controllers.size();
      try {
        std::unique_ptr<Policy> policy =
            MakePolicy(controllers[c], toolkit, &traces[t]);
        report.sessions[idx] = RunSession(
            traces[t], *toolkit.manifest, *policy, toolkit.sim,
            toolkit.controller.lambda, toolkit.controller.mu, controllers[c]);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        failed.store(true);
        if (failure.empty()) {
          failure = "session " + traces[t].id() + "/" + controllers[c] + ": " + e.what();
        }
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  for (std::thread& th : pool) th.join();
  if (failed.load()) throw DataError("comparison failed: " + failure);

  for (size_t c = 0; c < controllers.size(); ++c) {
    ControllerAggregate agg;
    agg.controller = controllers[c];
    for (size_t t = 0; t < traces.size(); ++t) {
      const QoeBreakdown& q = report.Session(t, c).qoe;
      agg.mean.utility += q.utility;
      agg.mean.rebuffer_penalty += q.rebuffer_penalty;
      agg.mean.smoothness_penalty += q.smoothness_penalty;
      agg.mean.average += q.average;
    }
    double n = static_cast<double>(traces.size());
    agg.mean.utility /= n;
    agg.mean.rebuffer_penalty /= n;
    agg.mean.smoothness_penalty /= n;
    agg.mean.average /= n;
    report.aggregates.push_back(agg);
  }

  size_t nc = controllers.size();
  report.improvement_pct.assign(nc, std::vector<double>(nc, 0.0));
  report.win_fraction.assign(nc, std::vector<double>(nc, 0.0));
  for (size_t a = 0; a < nc; ++a) {
    for (size_t b = 0; b < nc; ++b) {
      double ma = report.aggregates[a].mean.average;
      double mb = report.aggregates[b].mean.average;
      report.improvement_pct[a][b] =
          mb == 0.0 ? std::nan("") : (ma - mb) / std::fabs(mb) * 100.0;
      size_t wins = 0;
      for (size_t t = 0; t < traces.size(); ++t) {
        if (report.Session(t, a).qoe.average > report.Session(t, b).qoe.average) ++wins;
      }
      report.win_fraction[a][b] =
          static_cast<double>(wins) / static_cast<double>(traces.size());
    }
  }
  return report;
}

namespace {

double HmWindowsMape(std::span<const ObservationWindow> windows, int hm_window) {
  std::vector<double> pred;
  std::vector<double> actual;
  for (const ObservationWindow& w : windows) {
    size_t take = std::min(static_cast<size_t>(hm_window), w.features.size());
    std::vector<double> recent;
    for (size_t m = 0; m < take; ++m) {
      recent.push_back(w.features[m][kFeatThroughput]);  // newest-first
    }
    pred.push_back(HarmonicMean(recent));
    actual.push_back(w.truth_mbps);
  }
  return Mape(pred, actual);
}

double StreamingMapeOf(std::span<const SessionResult> sessions) {
  std::vector<double> pred;
  std::vector<double> actual;
  for (const SessionResult& s : sessions) {
    for (const ChunkRecord& r : s.records) {
      if (r.pred_q50 > 0.0) {
        pred.push_back(r.pred_q50);
        actual.push_back(r.throughput_mbps);
      }
    }
  }
  if (pred.empty()) return -1.0;
  return Mape(pred, actual);
}

}  // namespace

std::vector<MapeEntry> BuildMapeTable(const ComparisonReport& report,
                                      const PolicyToolkit& toolkit) {
  std::vector<MapeEntry> table;
  int hm_idx = report.ControllerIndex("hm-mpc");
  if (hm_idx < 0) return table;
  std::vector<ObservationWindow> windows;
  int k = toolkit.mtan != nullptr ? toolkit.mtan->hyper().k
                                  : (toolkit.lstm != nullptr ? toolkit.lstm->hyper().k : 8);
  for (size_t t = 0; t < report.trace_ids.size(); ++t) {
    const SessionResult& s = report.Session(t, static_cast<size_t>(hm_idx));
    std::vector<ObservationWindow> sliced =
        SliceSessionWindows(s, k, toolkit.manifest->chunk_duration_s());
    windows.insert(windows.end(), sliced.begin(), sliced.end());
  }
  if (windows.empty()) return table;

  MapeEntry hm_entry;
  hm_entry.predictor = "hm";
  hm_entry.eval_mape_pct = HmWindowsMape(windows, toolkit.hm_window);
  table.push_back(hm_entry);

  int kairos_idx = report.ControllerIndex("kairos");
  if (toolkit.mtan != nullptr) {
    MapeEntry entry;
    entry.predictor = "mtan";
    entry.eval_mape_pct = ModelMedianMape(*toolkit.mtan, windows);
    if (kairos_idx >= 0) {
      std::vector<SessionResult> ks;
      for (size_t t = 0; t < report.trace_ids.size(); ++t) {
        ks.push_back(report.Session(t, static_cast<size_t>(kairos_idx)));
      }
      entry.streaming_mape_pct = StreamingMapeOf(ks);
    }
    table.push_back(entry);
  }
  if (toolkit.lstm != nullptr) {
    MapeEntry entry;
    entry.predictor = "lstm";
    entry.eval_mape_pct = ModelMedianMape(*toolkit.lstm, windows);
    table.push_back(entry);
  }
  return table;
}

std::vector<AblationDelta> AblationDeltas(const ComparisonReport& report) {
  std::vector<AblationDelta> deltas;
  int base = report.ControllerIndex("kairos");
  if (base < 0) return deltas;
  const QoeBreakdown& ref = report.aggregates[static_cast<size_t>(base)].mean;
  for (size_t c = 0; c < report.controllers.size(); ++c) {
    if (static_cast<int>(c) == base) continue;
    const QoeBreakdown& mean = report.aggregates[c].mean;
    AblationDelta d;
    d.variant = report.controllers[c];
    d.qoe_delta = mean.average - ref.average;
    d.rebuffer_delta = mean.rebuffer_penalty - ref.rebuffer_penalty;
    d.smoothness_delta = mean.smoothness_penalty - ref.smoothness_penalty;
    deltas.push_back(d);
  }
  return deltas;
}

void WriteComparisonFiles(const std::string& dir, const ComparisonReport& report) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  fs::create_directories(dir + "/sessions");

  std::ostringstream summary;
  summary << "trace\tcontroller\tutility\trebuffer_penalty\tsmoothness_penalty\t"
             "average_qoe\n";
  for (size_t t = 0; t < report.trace_ids.size(); ++t) {
    for (size_t c = 0; c < report.controllers.size(); ++c) {
      const SessionResult& s = report.Session(t, c);
      summary << s.trace_id << "\t" << s.controller_id << "\t"
              << FormatDouble(s.qoe.utility) << "\t"
              << FormatDouble(s.qoe.rebuffer_penalty) << "\t"
              << FormatDouble(s.qoe.smoothness_penalty) << "\t"
              << FormatDouble(s.qoe.average) << "\n";
      WriteFile(dir + "/sessions/" + s.trace_id + "__" + s.controller_id + ".log",
                SerializeSessionLog(s));
    }
  }
  WriteFile(dir + "/summary.tsv", summary.str());

  std::ostringstream cdf;
  cdf << "controller\taverage_qoe\tcum_fraction\n";
  for (size_t c = 0; c < report.controllers.size(); ++c) {
    std::vector<double> values;
    for (size_t t = 0; t < report.trace_ids.size(); ++t) {
      values.push_back(report.Session(t, c).qoe.average);
    }
    for (const auto& [value, fraction] : EmpiricalCdf(values)) {
      cdf << report.controllers[c] << "\t" << FormatDouble(value) << "\t"
          << FormatDouble(fraction) << "\n";
    }
  }
  WriteFile(dir + "/fig_qoe_cdf.tsv", cdf.str());

  std::ostringstream sub;
  sub << "controller\tutility\trebuffer_penalty\tsmoothness_penalty\taverage_qoe\n";
  for (const ControllerAggregate& a : report.aggregates) {
    sub << a.controller << "\t" << FormatDouble(a.mean.utility) << "\t"
        << FormatDouble(a.mean.rebuffer_penalty) << "\t"
        << FormatDouble(a.mean.smoothness_penalty) << "\t"
        << FormatDouble(a.mean.average) << "\n";
  }
  WriteFile(dir + "/fig_submetrics.tsv", sub.str());

  if (!report.mape.empty()) {
    std::ostringstream mape;
    mape << "predictor\teval_mape_pct\tstreaming_mape_pct\n";
    for (const MapeEntry& e : report.mape) {
      mape << e.predictor << "\t" << FormatDouble(e.eval_mape_pct) << "\t"
           << (e.streaming_mape_pct < 0.0 ? std::string("-")
                                          : FormatDouble(e.streaming_mape_pct))
           << "\n";
    }
    WriteFile(dir + "/fig_mape.tsv", mape.str());
  }

  // Per-chunk time series of the first trace for side-by-side plots.
  if (!report.trace_ids.empty()) {
    std::ostringstream ts;
    ts << "controller\tchunk\tbitrate_mbps\tbuffer_s\trebuffer_s\t"
          "throughput_mbps\tpred_adjusted\n";
    for (size_t c = 0; c < report.controllers.size(); ++c) {
      const SessionResult& s = report.Session(0, c);
      for (const ChunkRecord& r : s.records) {
        ts << s.controller_id << "\t" << r.index << "\t"
           << FormatDouble(r.bitrate_mbps) << "\t" << FormatDouble(r.buffer_s) << "\t"
           << FormatDouble(r.rebuffer_s) << "\t" << FormatDouble(r.throughput_mbps)
           << "\t" << FormatDouble(r.pred_adjusted) << "\n";
      }
    }
    WriteFile(dir + "/fig_timeseries.tsv", ts.str());
  }

  std::ostringstream rpt;
  rpt << "controllers: " << report.controllers.size()
      << "  traces: " << report.trace_ids.size() << "\n\n";
  rpt << "mean QoE per controller\n";
  rpt << "controller            utility  rebuffer  smooth   average\n";
  for (const ControllerAggregate& a : report.aggregates) {
    char line[160];
    std::snprintf(line, sizeof(line), "%-20s %8.4f %9.4f %7.4f %9.4f\n",
                  a.controller.c_str(), a.mean.utility, a.mean.rebuffer_penalty,
                  a.mean.smoothness_penalty, a.mean.average);
    rpt << line;
  }
  rpt << "\npairwise mean-QoE improvement %% (row over column)\n";
  rpt << "                    ";
  for (const std::string& c : report.controllers) {
    char cell[40];
    std::snprintf(cell, sizeof(cell), " %14s", c.c_str());
    rpt << cell;
  }
  rpt << "\n";
  for (size_t a = 0; a < report.controllers.size(); ++a) {
    char head[40];
    std::snprintf(head, sizeof(head), "%-20s", report.controllers[a].c_str());
    rpt << head;
    for (size_t b = 0; b < report.controllers.size(); ++b) {
      char cell[40];
      std::snprintf(cell, sizeof(cell), " %14.2f", report.improvement_pct[a][b]);
      rpt << cell;
    }
    rpt << "\n";
  }
  rpt << "\nfraction of sessions won (row over column)\n";
  for (size_t a = 0; a < report.controllers.size(); ++a) {
    char head[40];
    std::snprintf(head, sizeof(head), "%-20s", report.controllers[a].c_str());
    rpt << head;
    for (size_t b = 0; b < report.controllers.size(); ++b) {
      char cell[40];
      std::snprintf(cell, sizeof(cell), " %14.3f", report.win_fraction[a][b]);
      rpt << cell;
    }
    rpt << "\n";
  }
  if (!report.mape.empty()) {
    rpt << "\npredictor MAPE %%\n";
    for (const MapeEntry& e : report.mape) {
      char line[120];
      if (e.streaming_mape_pct >= 0.0) {
        std::snprintf(line, sizeof(line), "%-10s eval %7.2f  streaming %7.2f\n",
                      e.predictor.c_str(), e.eval_mape_pct, e.streaming_mape_pct);
      } else {
        std::snprintf(line, sizeof(line), "%-10s eval %7.2f\n", e.predictor.c_str(),
                      e.eval_mape_pct);
      }
      rpt << line;
    }
  }
  std::vector<AblationDelta> deltas = AblationDeltas(report);
  if (!deltas.empty() && report.ControllerIndex("kairos-ns") >= 0) {
    rpt << "\nablation deltas vs kairos (positive = variant worse on penalties)\n";
    for (const AblationDelta& d : deltas) {
      char line[160];
      std::snprintf(line, sizeof(line),
                    "%-12s qoe %+9.4f  rebuffer %+9.4f  smooth %+9.4f\n",
                    d.variant.c_str(), d.qoe_delta, d.rebuffer_delta,
                    d.smoothness_delta);
      rpt << line;
    }
  }
  WriteFile(dir + "/report.txt", rpt.str());
}

}  // namespace kairos
