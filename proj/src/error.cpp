// Copyright 2026 The INADE Authors. All Rights Reserved.
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

#include "inade/error.hpp"

namespace inade {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kInconsistentInstance: return "InconsistentInstance";
    case ErrorCode::kEmptyInstanceLabel: return "EmptyInstanceLabel";
    case ErrorCode::kLabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::kClassOutOfRange: return "ClassOutOfRange";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kNoInstances: return "NoInstances";
    case ErrorCode::kDegenerateSet: return "DegenerateSet";
    case ErrorCode::kConfigInvalid: return "ConfigInvalid";
    case ErrorCode::kCorruptFile: return "CorruptFile";
    case ErrorCode::kSchemaMismatch: return "SchemaMismatch";
    case ErrorCode::kFileNotFound: return "FileNotFound";
    case ErrorCode::kPairMismatch: return "PairMismatch";
    case ErrorCode::kEpochOutOfRange: return "EpochOutOfRange";
    case ErrorCode::kNonFiniteLoss: return "NonFiniteLoss";
  }
  return "Unknown";
}

}  // namespace inade
