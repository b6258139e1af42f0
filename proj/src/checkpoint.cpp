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


#include "spgcl/checkpoint.hpp"

#include <charconv>
#include <fstream>
#include <string>

#include <json.hpp>

#include "spgcl/error.hpp"

namespace spgcl {

namespace {

constexpr const char* kFormat = "spgcl-params";
constexpr int kVersion = 1;

}  // namespace

void save_checkpoint(const std::filesystem::path& file, const GcnParams& params,
                     const CheckpointInfo& info) {
  params.validate();
  const nlohmann::json header = {{"format", kFormat},
                                 {"version", kVersion},
                                 {"dims", params.dims()},
                                 {"seed", info.seed},
                                 {"epoch", info.epoch}};
  std::string text = header.dump() + "\n";
  char buf[32];
  for (const Matrix& w : params.weights) {
    for (std::size_t i = 0; i < w.rows(); ++i) {
      const auto row = w.row(i);
      for (std::size_t j = 0; j < row.size(); ++j) {
        if (j) text += ',';
        text.append(buf, std::to_chars(buf, buf + sizeof buf, row[j]).ptr);
      }
      text += '\n';
    }
  }
  std::ofstream out(file, std::ios::binary);
  if (!out || !(out << text)) throw Error(ErrorCode::kIoError, "cannot write " + file.string());
}

GcnParams load_checkpoint(const std::filesystem::path& file, CheckpointInfo* info) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + file.string());
  std::string line;
  std::getline(in, line);
  nlohmann::json header;
  std::vector<std::size_t> dims;
  try {
    header = nlohmann::json::parse(line);
    if (header.at("format") != kFormat || header.at("version") != kVersion) {
      throw Error(ErrorCode::kParseError, file.string() + ": unsupported checkpoint format");
    }
    dims = header.at("dims").get<std::vector<std::size_t>>();
    if (info) {
      info->seed = header.at("seed").get<std::uint64_t>();
      info->epoch = header.at("epoch").get<std::size_t>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, file.string() + ": bad header: " + e.what());
  }
  if (dims.size() < 2) throw Error(ErrorCode::kParseError, file.string() + ": need >= 2 dims");

  GcnParams params;
  std::size_t line_no = 1;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    Matrix w(dims[l], dims[l + 1]);
    for (std::size_t i = 0; i < w.rows(); ++i) {
      ++line_no;
      if (!std::getline(in, line)) {
        throw Error(ErrorCode::kParseError, file.string() + ": truncated at line " +
                                                std::to_string(line_no));
      }
      const char* p = line.data();
      const char* end = p + line.size();
      auto row = w.row(i);
      for (std::size_t j = 0; j < row.size(); ++j) {
        const auto res = std::from_chars(p, end, row[j]);
        const bool last = j + 1 == row.size();
        if (res.ec != std::errc{} || (last ? res.ptr != end : (res.ptr == end || *res.ptr != ','))) {
          throw Error(ErrorCode::kParseError,
                      file.string() + ":" + std::to_string(line_no) + ": malformed row");
        }
        p = res.ptr + 1;
      }
    }
    params.weights.push_back(std::move(w));
  }
  params.validate();
  return params;
}

}  // namespace spgcl
