// Copyright 2026 The fcm-bias Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fcm_bias/error.h"

namespace fcm_bias {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidSchema: return "invalid_schema";
    case ErrorCode::kMissingColumn: return "missing_column";
    case ErrorCode::kTypeMismatch: return "type_mismatch";
    case ErrorCode::kMissingValue: return "missing_value";
    case ErrorCode::kEmptyDataset: return "empty_dataset";
    case ErrorCode::kNonExhaustivePredicate: return "non_exhaustive_predicate";
    case ErrorCode::kIo: return "io_error";
    case ErrorCode::kConstantColumn: return "constant_column";
    case ErrorCode::kSingleCategory: return "single_category";
    case ErrorCode::kLengthMismatch: return "length_mismatch";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kInvalidConfig: return "invalid_config";
    case ErrorCode::kPhiIsOne: return "phi_is_one";
    case ErrorCode::kUnknownConcept: return "unknown_concept";
    case ErrorCode::kProtectedActivation: return "protected_activation";
    case ErrorCode::kOutOfRange: return "out_of_range";
  }
  return "unknown";
}

}  // namespace fcm_bias
