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


#include "spgcl/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>
#include <unordered_map>

#include "spgcl/error.hpp"
#include "spgcl/perturbation.hpp"

namespace spgcl {

namespace fs = std::filesystem;

namespace {

struct Line {
  std::size_t number;
  std::string_view text;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<Line> content_lines(const std::string& text) {
  std::vector<Line> lines;
  std::size_t start = 0;
  std::size_t number = 1;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    const std::string_view raw = trim(std::string_view(text).substr(start, end - start));
    if (!raw.empty() && raw.front() != '#') lines.push_back({number, raw});
    start = end + 1;
    ++number;
  }
  return lines;
}

std::vector<std::string_view> split_commas(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = s.find(',', start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void parse_error(const fs::path& file, std::size_t line, const std::string& what) {
  throw Error(ErrorCode::kParseError,
              file.filename().string() + ":" + std::to_string(line) + ": " + what);
}

template <typename T>
T parse_number(std::string_view token, const fs::path& file, std::size_t line) {
  T value{};
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    parse_error(file, line, "cannot parse '" + std::string(token) + "'");
  }
  return value;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string format_float(float v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

}  // namespace

void DatasetBundle::validate() const {
  const std::size_t n = graph.n_nodes();
  if (features.rows() != n) {
    throw Error(ErrorCode::kInconsistentCounts, "feature rows " + std::to_string(features.rows()) +
                                                    " != nodes " + std::to_string(n));
  }
  if (!features.all_finite()) throw Error(ErrorCode::kInconsistentCounts, "non-finite feature");
  labels.validate(n);
  std::vector<std::uint8_t> seen(labels.num_classes, 0);
  for (int y : labels.labels) {
    if (y >= 0) seen[static_cast<std::size_t>(y)] = 1;
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw Error(ErrorCode::kInconsistentCounts, "class ids are not contiguous from 0");
  }
}

DatasetBundle load_dataset(const fs::path& dir, LoadReport* report) {
  DatasetBundle bundle;
  bundle.name = dir.filename().string();
  if (bundle.name.empty()) bundle.name = dir.parent_path().filename().string();

  // Features define the node count.
  const fs::path features_path = dir / "features.csv";
  const std::string feature_text = read_file(features_path);  // owns the line views
  const auto feature_lines = content_lines(feature_text);
  const std::size_t n = feature_lines.size();
  std::size_t d = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto tokens = split_commas(feature_lines[i].text);
    if (i == 0) {
      d = tokens.size();
      bundle.features = FeatureMatrix(n, d);
    } else if (tokens.size() != d) {
      parse_error(features_path, feature_lines[i].number,
                  "expected " + std::to_string(d) + " values, got " + std::to_string(tokens.size()));
    }
    for (std::size_t j = 0; j < d; ++j) {
      const auto v = parse_number<float>(tokens[j], features_path, feature_lines[i].number);
      if (!std::isfinite(v)) parse_error(features_path, feature_lines[i].number, "non-finite value");
      bundle.features(i, j) = static_cast<double>(v);
    }
  }

  const fs::path labels_path = dir / "labels.csv";
  const std::string label_text = read_file(labels_path);  // owns the line views
  const auto label_lines = content_lines(label_text);
  if (label_lines.size() != n) {
    throw Error(ErrorCode::kInconsistentCounts, "labels.csv has " +
                                                    std::to_string(label_lines.size()) +
                                                    " rows, features.csv has " + std::to_string(n));
  }
  bundle.labels.labels.resize(n);
  int max_label = -1;
  for (std::size_t i = 0; i < n; ++i) {
    const int y = parse_number<int>(label_lines[i].text, labels_path, label_lines[i].number);
    if (y < kUnlabeled) parse_error(labels_path, label_lines[i].number, "negative label");
    bundle.labels.labels[i] = y;
    max_label = std::max(max_label, y);
  }
  bundle.labels.num_classes = static_cast<std::size_t>(max_label + 1);

  const fs::path splits_path = dir / "splits.csv";
  const std::string split_text = read_file(splits_path);  // owns the line views
  const auto split_lines = content_lines(split_text);
  if (split_lines.size() != n) {
    throw Error(ErrorCode::kInconsistentCounts, "splits.csv has " +
                                                    std::to_string(split_lines.size()) +
                                                    " rows, features.csv has " + std::to_string(n));
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::string_view token = split_lines[i].text;
    const auto v = static_cast<NodeId>(i);
    if (token == "train") {
      bundle.labels.train.push_back(v);
    } else if (token == "val") {
      bundle.labels.val.push_back(v);
    } else if (token == "test") {
      bundle.labels.test.push_back(v);
    } else if (token != "none") {
      throw Error(ErrorCode::kUnknownSplitToken, splits_path.filename().string() + ":" +
                                                     std::to_string(split_lines[i].number) +
                                                     ": '" + std::string(token) + "'");
    }
  }

  const fs::path edges_path = dir / "edges.csv";
  const std::string edge_text = read_file(edges_path);  // owns the line views
  const auto edge_lines = content_lines(edge_text);
  std::vector<Edge> edges;
  edges.reserve(edge_lines.size());
  std::unordered_map<std::uint64_t, bool> seen;
  seen.reserve(edge_lines.size() * 2);
  LoadReport local;
  for (const auto& line : edge_lines) {
    const auto tokens = split_commas(line.text);
    if (tokens.size() != 2 && tokens.size() != 3) {
      parse_error(edges_path, line.number, "expected src,dst[,weight]");
    }
    const auto a = parse_number<std::uint64_t>(tokens[0], edges_path, line.number);
    const auto b = parse_number<std::uint64_t>(tokens[1], edges_path, line.number);
    const double w = tokens.size() == 3 ? parse_number<double>(tokens[2], edges_path, line.number)
                                        : 1.0;
    if (a >= n || b >= n) {
      throw Error(ErrorCode::kInconsistentCounts,
                  edges_path.filename().string() + ":" + std::to_string(line.number) +
                      ": node index out of range");
    }
    if (!(w > 0.0) || !std::isfinite(w)) parse_error(edges_path, line.number, "weight must be > 0");
    if (a == b) {
      ++local.self_loops_dropped;
      continue;
    }
    const auto u = static_cast<NodeId>(std::min(a, b));
    const auto v = static_cast<NodeId>(std::max(a, b));
    if (!seen.emplace(edge_key(u, v), true).second) {
      ++local.duplicate_edges_merged;
      continue;
    }
    edges.push_back({u, v, w});
  }
  bundle.graph = SparseGraph(n, std::move(edges));
  if (report != nullptr) *report = local;
  bundle.validate();
  return bundle;
}

void save_dataset(const DatasetBundle& bundle, const fs::path& dir, bool always_write_weights) {
  bundle.validate();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + dir.string());

  const bool weighted = always_write_weights || std::any_of(bundle.graph.edges().begin(), bundle.graph.edges().end(),
                                    [](const Edge& e) { return e.weight != 1.0; });
  std::string edges;
  for (const Edge& e : bundle.graph.edges()) {
    edges += std::to_string(e.a) + "," + std::to_string(e.b);
    if (weighted) edges += "," + format_double(e.weight);
    edges += '\n';
  }
  write_file(dir / "edges.csv", edges);

  std::string features;
  for (std::size_t i = 0; i < bundle.features.rows(); ++i) {
    for (std::size_t j = 0; j < bundle.features.cols(); ++j) {
      if (j > 0) features += ',';
      features += format_float(static_cast<float>(bundle.features(i, j)));
    }
    features += '\n';
  }
  write_file(dir / "features.csv", features);

  std::string labels;
  for (int y : bundle.labels.labels) labels += std::to_string(y) + '\n';
  write_file(dir / "labels.csv", labels);

  std::vector<const char*> tokens(bundle.graph.n_nodes(), "none");
  for (NodeId v : bundle.labels.train) tokens[v] = "train";
  for (NodeId v : bundle.labels.val) tokens[v] = "val";
  for (NodeId v : bundle.labels.test) tokens[v] = "test";
  std::string splits;
  for (const char* t : tokens) splits += std::string(t) + '\n';
  write_file(dir / "splits.csv", splits);
}

void SbmSpec::validate() const {
  auto prob_ok = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (blocks.empty()) throw Error(ErrorCode::kInvalidConfig, "SBM needs at least one block");
  for (std::size_t s : blocks) {
    if (s == 0) throw Error(ErrorCode::kInvalidConfig, "SBM block sizes must be >= 1");
  }
  if (!prob_ok(p_intra) || !prob_ok(p_inter)) {
    throw Error(ErrorCode::kInvalidConfig, "SBM probabilities must lie in [0, 1]");
  }
  if (feature_dim == 0) throw Error(ErrorCode::kInvalidConfig, "feature_dim must be >= 1");
  if (!(train_fraction > 0.0) || !(val_fraction >= 0.0) || train_fraction + val_fraction > 1.0) {
    throw Error(ErrorCode::kInvalidConfig, "invalid SBM split fractions");
  }
}

DatasetBundle generate_sbm(const SbmSpec& spec) {
  spec.validate();
  std::vector<int> block_of;
  for (std::size_t b = 0; b < spec.blocks.size(); ++b) {
    block_of.insert(block_of.end(), spec.blocks[b], static_cast<int>(b));
  }
  const std::size_t n = block_of.size();

  SeededRng edge_rng = SeededRng::derive(spec.seed, StreamPurpose::kSbm, 0);
  std::vector<Edge> edges;
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = i + 1; j < n; ++j) {
      const double p = block_of[i] == block_of[j] ? spec.p_intra : spec.p_inter;
      if (edge_rng.bernoulli(p)) edges.push_back({i, j, 1.0});
    }
  }

  SeededRng feature_rng = SeededRng::derive(spec.seed, StreamPurpose::kSbm, 1);
  FeatureMatrix x(n, spec.feature_dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < spec.feature_dim; ++j) x(i, j) = feature_rng.normal();
    x(i, static_cast<std::size_t>(block_of[i]) % spec.feature_dim) += spec.feature_signal;
  }

  SeededRng split_rng = SeededRng::derive(spec.seed, StreamPurpose::kSplit);
  DatasetBundle bundle;
  bundle.name = "sbm";
  bundle.graph = SparseGraph(n, std::move(edges));
  bundle.features = std::move(x);
  bundle.labels = stratified_split(block_of, spec.blocks.size(), spec.train_fraction,
                                   spec.val_fraction, split_rng);
  return bundle;
}

SparseGraph inject_noise(const SparseGraph& g, double remove_ratio, SeededRng& rng) {
  if (!(remove_ratio >= 0.0 && remove_ratio < 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "noise ratio must lie in [0, 1)");
  }
  const auto all = g.edges();
  const std::size_t k = ratio_count(remove_ratio, all.size());
  std::vector<std::uint8_t> drop(all.size(), 0);
  for (std::uint64_t idx : rng.sample_without_replacement(all.size(), k)) drop[idx] = 1;
  std::vector<Edge> keep;
  keep.reserve(all.size() - k);
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (drop[i] == 0) keep.push_back(all[i]);
  }
  return SparseGraph(g.n_nodes(), std::move(keep));
}

}  // namespace spgcl
