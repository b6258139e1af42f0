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


#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>

#include "spgcl/encoder.hpp"

namespace spgcl {

struct CheckpointInfo {
  std::uint64_t seed = 0;
  std::size_t epoch = 0;
};

/// Text checkpoint: one JSON header line (format, version, dims, seed, epoch)
/// followed by the rows of every weight matrix, values at round-trip
/// precision. Throws IoError.
void save_checkpoint(const std::filesystem::path& file, const GcnParams& params,
                     const CheckpointInfo& info);

/// Throws IoError or ParseError (unknown format/version, bad shape).
GcnParams load_checkpoint(const std::filesystem::path& file, CheckpointInfo* info = nullptr);

}  // namespace spgcl
