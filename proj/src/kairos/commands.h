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

// Command implementations shared by the CLI and the test harnesses. Every
// command writes its artifacts plus run_manifest.txt under `out_dir` and is
// byte-deterministic for a fixed seed.

#ifndef KAIROS_COMMANDS_H_
#define KAIROS_COMMANDS_H_

#include <string>
#include <vector>

#include "kairos/config.h"

namespace kairos {

void CmdGenTraces(const RunConfig& config, const std::string& spec_path,
                  const std::string& out_dir, int count);

void CmdMakeDataset(const RunConfig& config, const std::string& traces_dir,
                    const std::string& manifest_path, const std::string& out_dir);

// arch is "mtan" or "lstm"; `name` names the checkpoint files.
void CmdTrain(const RunConfig& config, const std::string& dataset_path,
              const std::string& manifest_path, const std::string& arch,
              const std::string& name, const std::string& out_dir);

void CmdSimulate(const RunConfig& config, const std::string& trace_path,
                 const std::string& manifest_path, const std::string& controller,
                 const std::string& ckpt_dir, const std::string& out_dir);

void CmdCompare(const RunConfig& config, const std::string& traces_dir,
                const std::string& manifest_path, const std::string& ckpt_dir,
                const std::vector<std::string>& controllers,
                const std::string& out_dir);

void CmdAblate(const RunConfig& config, const std::string& traces_dir,
               const std::string& manifest_path, const std::string& ckpt_dir,
               const std::string& out_dir);

// Sorted *.trace files under dir.
std::vector<std::string> ListTraceFiles(const std::string& dir);

}  // namespace kairos

#endif  // KAIROS_COMMANDS_H_
