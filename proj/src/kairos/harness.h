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

#ifndef KAIROS_HARNESS_H_
#define KAIROS_HARNESS_H_

#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kairos/controller.h"
#include "kairos/predictor.h"
#include "kairos/session.h"
#include "kairos/simulator.h"
#include "kairos/trace_io.h"

namespace kairos {

// Average QoE over chunks 2..N: mean bitrate minus lambda-weighted stalls
// minus mu-weighted bitrate switches.
QoeBreakdown ComputeQoeBreakdown(std::span<const ChunkRecord> records, double lambda,
                                 double mu);

// 100 * mean(|pred - actual| / actual); actual values must be positive.
double Mape(std::span<const double> predicted, std::span<const double> actual);

// Empirical CDF points (sorted value, i/n).
std::vector<std::pair<double, double>> EmpiricalCdf(std::vector<double> values);

// Everything needed to assemble any decision policy.
struct PolicyToolkit {
  const VideoManifest* manifest = nullptr;
  ControllerConfig controller;
  SimConfig sim;
  int hm_window = 5;
  int robust_error_window = 5;
  const ThroughputModel* mtan = nullptr;     // kairos / kairos-na
  const ThroughputModel* mtan_ns = nullptr;  // kairos-ns
  const ThroughputModel* lstm = nullptr;     // kairos-ni
};

// Known policies: kairos, kairos-na, kairos-ni, kairos-ns, hm-mpc,
// robust-hm-mpc, bola, offline-optimal. The trace is needed only by the
// offline planner.
std::unique_ptr<Policy> MakePolicy(const std::string& name,
                                   const PolicyToolkit& toolkit,
                                   const NetworkTrace* trace);

std::vector<std::string> DefaultControllers();
std::vector<std::string> AblationControllers();

struct ControllerAggregate {
  std::string controller;
  QoeBreakdown mean;
};

struct MapeEntry {
  std::string predictor;
  double eval_mape_pct = 0.0;
  double streaming_mape_pct = -1.0;  // < 0 when unavailable
};

struct ComparisonReport {
  std::vector<std::string> controllers;
  std::vector<std::string> trace_ids;
  // trace-major: sessions[t * controllers.size() + c]
  std::vector<SessionResult> sessions;
  std::vector<ControllerAggregate> aggregates;
  // (mean_a - mean_b) / |mean_b| * 100
  std::vector<std::vector<double>> improvement_pct;
  // fraction of traces where controller a strictly beats controller b
  std::vector<std::vector<double>> win_fraction;
  std::vector<MapeEntry> mape;

  const SessionResult& Session(size_t trace, size_t controller) const {
    return sessions[trace * controllers.size() + controller];
  }
  int ControllerIndex(const std::string& name) const;
};

// Runs every (trace, controller) session; deterministic and independent of
// the worker count.
ComparisonReport RunComparison(const std::vector<NetworkTrace>& traces,
                               const std::vector<std::string>& controllers,
                               const PolicyToolkit& toolkit, int workers);

// Predictor accuracy rows from the report's sessions: windows sliced from
// the hm-mpc sessions feed every predictor; in-streaming MAPE comes from
// the kairos sessions' logged medians.
std::vector<MapeEntry> BuildMapeTable(const ComparisonReport& report,
                                      const PolicyToolkit& toolkit);

struct AblationDelta {
  std::string variant;
  double qoe_delta = 0.0;
  double rebuffer_delta = 0.0;
  double smoothness_delta = 0.0;
};
std::vector<AblationDelta> AblationDeltas(const ComparisonReport& report);

// report.txt, summary.tsv, fig_*.tsv, sessions/*.log under `dir`.
void WriteComparisonFiles(const std::string& dir, const ComparisonReport& report);

}  // namespace kairos

#endif  // KAIROS_HARNESS_H_
