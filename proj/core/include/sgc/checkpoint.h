// Copyright 2026 The SGC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SGC_CHECKPOINT_H_
#define SGC_CHECKPOINT_H_

#include <string>

#include "sgc/decode.h"
#include "sgc/model.h"

namespace sgc {

struct Checkpoint {
  ModelParams params;
  DecodeConfig decode;
};

// JSON: {"version", "config": {...}, "tensors": {name: {"shape", "data"}}}
// with row-major data. Parsing rebuilds the shapes from "config" and rejects
// tensors that are missing or shaped differently (kDimMismatch).
std::string SerializeCheckpoint(const ModelParams& params, const DecodeConfig& decode);
Checkpoint ParseCheckpoint(const std::string& json_text);

void SaveCheckpoint(const std::string& path, const ModelParams& params,
                    const DecodeConfig& decode);
Checkpoint LoadCheckpoint(const std::string& path);

}  // namespace sgc

#endif  // SGC_CHECKPOINT_H_
