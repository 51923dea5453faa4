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

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gtl/graph.hpp"

// On-disk dataset layout. Both kinds are directories.
//
// Node graph:
//   meta.json     {"format": "gtl-node-graph", "version": 1, "num_nodes",
//                  "num_features", "num_classes", "directed"}
//   edges.csv     header "src,dst"; one arc per line for directed graphs,
//                 one u<v pair per undirected edge
//   features.bin  num_nodes * num_features little-endian float64, row-major
//   labels.csv    header "node,label"
//   splits.csv    header "node,tag", tag in {train, valid, test}
//
// Graph dataset:
//   meta.json     {"format": "gtl-graph-dataset", "version": 1, "num_graphs",
//                  "num_features", "num_classes", "feature_offsets"}
//                 feature_offsets[i] is the first features.bin row of graph i
//                 (num_graphs + 1 entries)
//   graphs.jsonl  one object per graph: {"num_nodes", "directed", "edges":
//                 [[u, v], ...], "label", "split"}
//   features.bin  all graphs' feature rows, concatenated

namespace gtl {

inline constexpr int kDatasetFormatVersion = 1;

void save_node_graph(const NodeGraph& graph, const std::filesystem::path& dir);
NodeGraph load_node_graph(const std::filesystem::path& dir);

void save_graph_dataset(const GraphDataset& dataset, const std::filesystem::path& dir);
GraphDataset load_graph_dataset(const std::filesystem::path& dir);

using Dataset = std::variant<NodeGraph, GraphDataset>;

/// Dispatches on the "format" field of meta.json.
Dataset load_dataset(const std::filesystem::path& dir);
void save_dataset(const Dataset& dataset, const std::filesystem::path& dir);

// Little-endian float64 blobs, shared with checkpoints.
void write_f64_file(const std::filesystem::path& file, std::span<const double> values);
std::vector<double> read_f64_file(const std::filesystem::path& file, std::size_t expected_count);

std::string read_text_file(const std::filesystem::path& file);
void write_text_file(const std::filesystem::path& file, const std::string& text);

}  // namespace gtl
