// Copyright 2026 The SPGCL Authors
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


#include "spgcl/error.hpp"

namespace spgcl {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kCapExceeded: return "CapExceeded";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kRankTooLarge: return "RankTooLarge";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kNonFiniteValue: return "NonFiniteValue";
    case ErrorCode::kTapeEmpty: return "TapeEmpty";
    case ErrorCode::kEmptyTrainSet: return "EmptyTrainSet";
    case ErrorCode::kEmptyMask: return "EmptyMask";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kInconsistentCounts: return "InconsistentCounts";
    case ErrorCode::kUnknownSplitToken: return "UnknownSplitToken";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace spgcl
