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

#include "sgc/errors.h"

namespace sgc {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kDegenerateProjection: return "DegenerateProjection";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kDimMismatch: return "DimMismatch";
    case ErrorCode::kUnknownCamera: return "UnknownCamera";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kEmptyScene: return "EmptyScene";
    case ErrorCode::kMissingLabel: return "MissingLabel";
    case ErrorCode::kMultiplePeaks: return "MultiplePeaks";
    case ErrorCode::kNoPeak: return "NoPeak";
    case ErrorCode::kEmptyEdgeSet: return "EmptyEdgeSet";
    case ErrorCode::kNonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::kEmptyPool: return "EmptyPool";
    case ErrorCode::kTooFewSamples: return "TooFewSamples";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace sgc
