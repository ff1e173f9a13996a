// Copyright 2026 The Treelets Authors
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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "treelets/basis.hpp"
#include "treelets/data_matrix.hpp"
#include "treelets/pipelines.hpp"
#include "treelets/synthetic.hpp"
#include "treelets/tree.hpp"

namespace treelets::io {

using json = nlohmann::json;

inline constexpr std::string_view kFormatVersion = "1";

// ---- CSV ------------------------------------------------------------------

/// First row holds unique variable names, every later row one observation.
/// Ragged rows, non-numeric or non-finite cells and duplicate names are
/// rejected with their (1-based) line and column.
DataMatrix parse_csv(std::string_view text, std::string_view source = "<input>");
DataMatrix read_csv(const std::filesystem::path& path);

/// Every value printed with 17 significant digits, which round-trips exactly.
std::string format_double(double v);
std::string format_csv(const std::vector<std::string>& header, std::span<const double> values,
                       std::size_t rows);
std::string format_csv(const DataMatrix& m);

// ---- files ----------------------------------------------------------------

std::string read_file(const std::filesystem::path& path);
/// Writes to a sibling temporary and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
/// 64-bit FNV-1a of the bytes, as 16 lowercase hex digits.
std::string fnv1a64_hex(std::string_view bytes);

/// Two-space indented dump plus a trailing newline. Object keys are sorted
/// and doubles printed in shortest round-trip form, so equal documents are
/// byte-identical.
std::string dump_canonical(const json& j);
json parse_json(std::string_view text, std::string_view source = "<input>");

// ---- tree documents -------------------------------------------------------

struct TreeMetadata {
  std::optional<std::uint64_t> seed;
  std::string input_hash;
  json run_config = json::object();
  std::vector<std::string> variable_names;
};

struct TreeDocument {
  TreeletTree tree;
  TreeMetadata metadata;
};

json tree_to_json(const TreeDocument& doc);
/// Strict: unknown or missing fields are InputError, as is a tree failing
/// validate_tree.
TreeDocument tree_from_json(const json& j);

std::string serialize_tree(const TreeDocument& doc);
TreeDocument parse_tree(std::string_view text);

// ---- other artifacts ------------------------------------------------------

json basis_to_json(const TreeletBasis& basis);
json features_to_json(const FeatureSet& features);

/// Strict BlockModelSpec reader. "variances" may be a number or a list.
BlockModelSpec block_spec_from_json(const json& j);
json block_spec_to_json(const BlockModelSpec& spec);

json experiment_to_json(const ExperimentResult& result);
json cv_to_json(const CvResult& result);
json two_way_to_json(const TwoWayResult& result);

/// Header "phi_<slot>" for scaling then "psi_<slot>" for detail columns,
/// matching Coefficients order.
std::vector<std::string> coefficient_names(const TreeletBasis& basis);

}  // namespace treelets::io
