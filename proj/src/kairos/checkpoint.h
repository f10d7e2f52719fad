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

#ifndef KAIROS_CHECKPOINT_H_
#define KAIROS_CHECKPOINT_H_

#include <cstdint>
#include <string>

#include "kairos/predictor.h"

namespace kairos {

inline constexpr char kCheckpointMagic[] = "KAIROS-TP/1";

// Self-describing text checkpoint: magic, kind tag, hyperparameters,
// normalization constants, then every parameter array with exact
// round-tripping doubles. Byte-deterministic for a given model.
std::string SerializeCheckpoint(const ThroughputModel& model, uint64_t seed);
ThroughputModel ParseCheckpoint(const std::string& text);

void SaveCheckpoint(const std::string& path, const ThroughputModel& model,
                    uint64_t seed);
ThroughputModel LoadCheckpoint(const std::string& path);

}  // namespace kairos

#endif  // KAIROS_CHECKPOINT_H_
