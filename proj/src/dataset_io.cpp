// Copyright 2026 The GNN Transfer Lab Authors.
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

#include "gtl/dataset_io.hpp"

#include <bit>
#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gtl/errors.hpp"

namespace gtl {

namespace fs = std::filesystem;
using nlohmann::json;

std::string read_text_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw InputError("cannot open " + file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const fs::path& file, const std::string& text) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + file.string());
  out << text;
  if (!out) throw InputError("write failed for " + file.string());
}

void write_f64_file(const fs::path& file, std::span<const double> values) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::string bytes(values.size() * 8, '\0');
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto bits = std::bit_cast<std::uint64_t>(values[i]);
    for (int b = 0; b < 8; ++b) bytes[i * 8 + b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
  }
  write_text_file(file, bytes);
}

std::vector<double> read_f64_file(const fs::path& file, std::size_t expected_count) {
  const std::string bytes = read_text_file(file);
  if (bytes.size() != expected_count * 8) {
    throw FormatError(file.filename().string() + ": expected " +
                      std::to_string(expected_count * 8) + " bytes, found " +
                      std::to_string(bytes.size()) + " (offset " +
                      std::to_string(std::min(bytes.size(), expected_count * 8)) + ")");
  }
  std::vector<double> values(expected_count);
  for (std::size_t i = 0; i < expected_count; ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b)
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[i * 8 + b])) << (8 * b);
    values[i] = std::bit_cast<double>(bits);
  }
  return values;
}

namespace {

constexpr const char* kNodeFormat = "gtl-node-graph";
constexpr const char* kGraphFormat = "gtl-graph-dataset";

json read_meta(const fs::path& dir) {
  const fs::path file = dir / "meta.json";
  if (!fs::exists(file)) throw FormatError(file.string() + ": missing");
  try {
    return json::parse(read_text_file(file));
  } catch (const json::parse_error& e) {
    throw FormatError("meta.json: parse error at byte " + std::to_string(e.byte) + ": " +
                      e.what());
  }
}

template <typename T>
T meta_field(const json& meta, const char* key) {
  if (!meta.contains(key)) throw FormatError(std::string("meta.json: missing field '") + key + "'");
  try {
    return meta.at(key).get<T>();
  } catch (const json::exception&) {
    throw FormatError(std::string("meta.json: field '") + key + "' has the wrong type");
  }
}

void check_header(const json& meta, const char* format) {
  const auto found = meta_field<std::string>(meta, "format");
  if (found != format)
    throw FormatError("meta.json: format '" + found + "', expected '" + format + "'");
  const int version = meta_field<int>(meta, "version");
  if (version != kDatasetFormatVersion) {
    throw UnsupportedVersionError("meta.json: unsupported version " + std::to_string(version) +
                                  " (this build reads version " +
                                  std::to_string(kDatasetFormatVersion) + ")");
  }
}

/// Reads a two-column integer CSV (after the exact header). Returns pairs.
std::vector<std::pair<long long, std::string>> read_two_column_csv(const fs::path& file,
                                                                   const std::string& header) {
  std::istringstream in(read_text_file(file));
  const std::string name = file.filename().string();
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line) || line != header)
    throw FormatError(name + ":1: expected header '" + header + "'");
  std::vector<std::pair<long long, std::string>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw FormatError(name + ":" + std::to_string(lineno) + ": expected two columns");
    long long first = 0;
    const char* begin = line.data();
    auto [ptr, ec] = std::from_chars(begin, begin + comma, first);
    if (ec != std::errc() || ptr != begin + comma)
      throw FormatError(name + ":" + std::to_string(lineno) + ": bad integer '" +
                        line.substr(0, comma) + "'");
    rows.emplace_back(first, line.substr(comma + 1));
  }
  return rows;
}

long long parse_int(const std::string& text, const std::string& where) {
  long long value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw FormatError(where + ": bad integer '" + text + "'");
  return value;
}

std::vector<double> flatten_rows(const GraphDataset& dataset) {
  std::vector<double> all;
  for (const auto& s : dataset.samples)
    all.insert(all.end(), s.features.values().begin(), s.features.values().end());
  return all;
}

}  // namespace

void save_node_graph(const NodeGraph& graph, const fs::path& dir) {
  graph.validate();
  fs::create_directories(dir);
  json meta = {{"format", kNodeFormat},
               {"version", kDatasetFormatVersion},
               {"num_nodes", graph.num_nodes()},
               {"num_features", graph.num_features()},
               {"num_classes", graph.num_classes},
               {"directed", graph.adj.directed()}};
  write_text_file(dir / "meta.json", meta.dump(2) + "\n");

  std::ostringstream edges;
  edges << "src,dst\n";
  for (const auto& [u, v] : graph.adj.edge_list()) edges << u << ',' << v << '\n';
  write_text_file(dir / "edges.csv", edges.str());

  write_f64_file(dir / "features.bin", graph.features.values());

  std::ostringstream labels;
  labels << "node,label\n";
  for (std::size_t v = 0; v < graph.num_nodes(); ++v) labels << v << ',' << graph.labels[v] << '\n';
  write_text_file(dir / "labels.csv", labels.str());

  std::ostringstream splits;
  splits << "node,tag\n";
  for (std::size_t v = 0; v < graph.num_nodes(); ++v)
    splits << v << ',' << split_name(graph.split[v]) << '\n';
  write_text_file(dir / "splits.csv", splits.str());
}

NodeGraph load_node_graph(const fs::path& dir) {
  const json meta = read_meta(dir);
  check_header(meta, kNodeFormat);
  const auto n = meta_field<std::size_t>(meta, "num_nodes");
  const auto f = meta_field<std::size_t>(meta, "num_features");
  const int k = meta_field<int>(meta, "num_classes");
  const bool directed = meta_field<bool>(meta, "directed");

  std::vector<Edge> edges;
  std::size_t line = 1;
  for (const auto& [src, rest] : read_two_column_csv(dir / "edges.csv", "src,dst")) {
    ++line;
    const long long dst = parse_int(rest, "edges.csv:" + std::to_string(line));
    if (src < 0 || dst < 0 || static_cast<std::size_t>(src) >= n ||
        static_cast<std::size_t>(dst) >= n)
      throw FormatError("edges.csv:" + std::to_string(line) + ": node index out of range");
    edges.emplace_back(static_cast<NodeId>(src), static_cast<NodeId>(dst));
  }

  NodeGraph g;
  g.adj = Adjacency::from_edges(edges, n, directed);
  g.features = Tensor(n, f, read_f64_file(dir / "features.bin", n * f));
  g.num_classes = k;
  g.labels.assign(n, -1);
  g.split.assign(n, Split::kTrain);

  auto check_node = [&](long long node, const std::string& where) {
    if (node < 0 || static_cast<std::size_t>(node) >= n)
      throw FormatError(where + ": node index out of range");
    return static_cast<std::size_t>(node);
  };
  line = 1;
  for (const auto& [node, rest] : read_two_column_csv(dir / "labels.csv", "node,label")) {
    const std::string where = "labels.csv:" + std::to_string(++line);
    g.labels[check_node(node, where)] = static_cast<int>(parse_int(rest, where));
  }
  line = 1;
  for (const auto& [node, rest] : read_two_column_csv(dir / "splits.csv", "node,tag")) {
    const std::string where = "splits.csv:" + std::to_string(++line);
    try {
      g.split[check_node(node, where)] = parse_split(rest);
    } catch (const FormatError& e) {
      throw FormatError(where + ": " + e.what());
    }
  }
  try {
    g.validate();
  } catch (const InputError& e) {
    throw FormatError(dir.string() + ": " + e.what());
  }
  return g;
}

void save_graph_dataset(const GraphDataset& dataset, const fs::path& dir) {
  dataset.validate();
  fs::create_directories(dir);
  std::vector<std::size_t> offsets{0};
  for (const auto& s : dataset.samples) offsets.push_back(offsets.back() + s.adj.num_nodes());
  json meta = {{"format", kGraphFormat},
               {"version", kDatasetFormatVersion},
               {"num_graphs", dataset.size()},
               {"num_features", dataset.num_features},
               {"num_classes", dataset.num_classes},
               {"feature_offsets", offsets}};
  write_text_file(dir / "meta.json", meta.dump() + "\n");

  std::ostringstream lines;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& s = dataset.samples[i];
    json edges = json::array();
    for (const auto& [u, v] : s.adj.edge_list()) edges.push_back({u, v});
    json record = {{"num_nodes", s.adj.num_nodes()},
                   {"directed", s.adj.directed()},
                   {"edges", std::move(edges)},
                   {"label", s.label},
                   {"split", split_name(dataset.split[i])}};
    lines << record.dump() << '\n';
  }
  write_text_file(dir / "graphs.jsonl", lines.str());
  write_f64_file(dir / "features.bin", flatten_rows(dataset));
}

GraphDataset load_graph_dataset(const fs::path& dir) {
  const json meta = read_meta(dir);
  check_header(meta, kGraphFormat);
  const auto num_graphs = meta_field<std::size_t>(meta, "num_graphs");
  const auto f = meta_field<std::size_t>(meta, "num_features");
  const auto offsets = meta_field<std::vector<std::size_t>>(meta, "feature_offsets");
  if (offsets.size() != num_graphs + 1 || offsets.front() != 0)
    throw FormatError("meta.json: feature_offsets must have num_graphs + 1 entries from 0");
  for (std::size_t i = 0; i < num_graphs; ++i)
    if (offsets[i + 1] < offsets[i]) throw FormatError("meta.json: feature_offsets decreasing");

  GraphDataset ds;
  ds.num_features = f;
  ds.num_classes = meta_field<int>(meta, "num_classes");
  const std::vector<double> rows = read_f64_file(dir / "features.bin", offsets.back() * f);

  std::istringstream in(read_text_file(dir / "graphs.jsonl"));
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = "graphs.jsonl:" + std::to_string(lineno);
    const std::size_t i = ds.samples.size();
    if (i >= num_graphs) throw FormatError(where + ": more records than num_graphs");
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw FormatError(where + ": parse error at column " + std::to_string(e.byte));
    }
    GraphSample s;
    std::size_t nodes = 0;
    std::vector<Edge> edges;
    Split tag = Split::kTrain;
    try {
      nodes = rec.at("num_nodes").get<std::size_t>();
      for (const auto& e : rec.at("edges")) edges.emplace_back(e.at(0).get<NodeId>(), e.at(1).get<NodeId>());
      s.label = rec.at("label").get<int>();
      tag = parse_split(rec.at("split").get<std::string>());
      s.adj = Adjacency::from_edges(edges, nodes, rec.at("directed").get<bool>());
    } catch (const json::exception& e) {
      throw FormatError(where + ": " + e.what());
    } catch (const InputError& e) {
      throw FormatError(where + ": " + e.what());
    }
    if (offsets[i + 1] - offsets[i] != nodes)
      throw FormatError(where + ": num_nodes disagrees with feature_offsets");
    s.features = Tensor(nodes, f,
                        std::vector<double>(rows.begin() + static_cast<std::ptrdiff_t>(offsets[i] * f),
                                            rows.begin() + static_cast<std::ptrdiff_t>(offsets[i + 1] * f)));
    ds.samples.push_back(std::move(s));
    ds.split.push_back(tag);
  }
  if (ds.samples.size() != num_graphs)
    throw FormatError("graphs.jsonl: expected " + std::to_string(num_graphs) + " records, found " +
                      std::to_string(ds.samples.size()) + " (line " + std::to_string(lineno) + ")");
  try {
    ds.validate();
  } catch (const InputError& e) {
    throw FormatError(dir.string() + ": " + e.what());
  }
  return ds;
}

Dataset load_dataset(const fs::path& dir) {
  const json meta = read_meta(dir);
  const auto format = meta_field<std::string>(meta, "format");
  if (format == kNodeFormat) return load_node_graph(dir);
  if (format == kGraphFormat) return load_graph_dataset(dir);
  throw FormatError("meta.json: unknown format '" + format + "'");
}

void save_dataset(const Dataset& dataset, const fs::path& dir) {
  std::visit(
      [&](const auto& d) {
        if constexpr (std::is_same_v<std::decay_t<decltype(d)>, NodeGraph>)
          save_node_graph(d, dir);
        else
          save_graph_dataset(d, dir);
      },
      dataset);
}

}  // namespace gtl
