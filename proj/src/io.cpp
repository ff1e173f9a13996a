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

#include "treelets/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "treelets/error.hpp"

namespace treelets::io {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos
                                                                          : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string at(std::string_view source, std::size_t line, std::size_t col) {
  return std::string(source) + ":" + std::to_string(line) + ":" + std::to_string(col);
}

void require_keys(const json& j, const std::set<std::string>& required,
                  const std::set<std::string>& optional, const std::string& what) {
  if (!j.is_object()) throw InputError(what + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!required.count(key) && !optional.count(key)) {
      throw InputError(what + " has unknown field '" + key + "'");
    }
  }
  for (const auto& key : required)
    if (!j.contains(key)) throw InputError(what + " is missing field '" + key + "'");
}

template <class T>
T get_as(const json& j, const std::string& key, const std::string& what) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InputError(what + " field '" + key + "': " + e.what());
  }
}

std::size_t get_index(const json& j, const std::string& key, const std::string& what) {
  const json& v = j.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    throw InputError(what + " field '" + key + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

json kind_json(FunctionKind k) { return k == FunctionKind::scaling ? "scaling" : "detail"; }

}  // namespace

DataMatrix parse_csv(std::string_view text, std::string_view source) {
  std::vector<std::pair<std::size_t, std::string_view>> lines;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    std::string_view line = trim(text.substr(start, end - start));
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.remove_prefix(3);
    if (!line.empty()) lines.emplace_back(line_no, line);
    start = end + 1;
  }
  if (lines.empty()) throw InputError(std::string(source) + ": empty CSV");

  std::vector<std::string> names;
  std::set<std::string> seen;
  const auto header = split(lines.front().second);
  for (std::size_t c = 0; c < header.size(); ++c) {
    std::string_view name = header[c];
    if (name.size() >= 2 && name.front() == '"' && name.back() == '"')
      name = name.substr(1, name.size() - 2);
    if (name.empty()) throw InputError(at(source, lines.front().first, c + 1) + ": empty name");
    if (!seen.insert(std::string(name)).second) {
      throw InputError(at(source, lines.front().first, c + 1) + ": duplicate name '" +
                       std::string(name) + "'");
    }
    names.emplace_back(name);
  }

  const std::size_t cols = names.size();
  std::vector<double> values;
  values.reserve((lines.size() - 1) * cols);
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const auto [number, line] = lines[l];
    const auto cells = split(line);
    if (cells.size() != cols) {
      throw InputError(at(source, number, cells.size()) + ": expected " + std::to_string(cols) +
                       " cells, found " + std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < cols; ++c) {
      std::string_view cell = cells[c];
      if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
        throw InputError(at(source, number, c + 1) + ": not a number '" +
                         std::string(cells[c]) + "'");
      }
      if (!std::isfinite(v)) {
        throw InputError(at(source, number, c + 1) + ": non-finite value '" +
                         std::string(cells[c]) + "'");
      }
      values.push_back(v);
    }
  }
  return DataMatrix(lines.size() - 1, cols, std::move(values), std::move(names));
}

DataMatrix read_csv(const std::filesystem::path& path) {
  return parse_csv(read_file(path), path.string());
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string format_csv(const std::vector<std::string>& header, std::span<const double> values,
                       std::size_t rows) {
  const std::size_t cols = header.size();
  if (values.size() != rows * cols) throw ContractError("CSV shape mismatch");
  std::string out;
  for (std::size_t c = 0; c < cols; ++c) {
    if (c) out += ',';
    out += header[c];
  }
  out += '\n';
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (c) out += ',';
      out += format_double(values[r * cols + c]);
    }
    out += '\n';
  }
  return out;
}

std::string format_csv(const DataMatrix& m) { return format_csv(m.names(), m.values(), m.rows()); }

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw InputError("failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw InputError("cannot move output into '" + path.string() + "': " + ec.message());
}

std::string fnv1a64_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[i] = digits[h & 0xf];
  return out;
}

std::string dump_canonical(const json& j) { return j.dump(2) + "\n"; }

json parse_json(std::string_view text, std::string_view source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string(source) + ": invalid JSON: " + e.what());
  }
}

json tree_to_json(const TreeDocument& doc) {
  json rotations = json::array();
  for (const auto& r : doc.tree.rotations) {
    rotations.push_back({{"level", r.level},
                         {"alpha", r.alpha},
                         {"beta", r.beta},
                         {"theta", r.theta},
                         {"sum_index", r.sum_index}});
  }
  json meta = {{"input_hash", doc.metadata.input_hash},
               {"flags",
                {{"near_zero_similarity", doc.tree.flags.near_zero_similarity},
                 {"early_stopped", doc.tree.flags.early_stopped}}},
               {"run_config", doc.metadata.run_config},
               {"variable_names", doc.metadata.variable_names}};
  if (doc.metadata.seed) meta["seed"] = *doc.metadata.seed;
  return {{"format_version", kFormatVersion},
          {"p", doc.tree.p},
          {"measure", to_string(doc.tree.measure)},
          {"tie_rule", "lex"},
          {"rotations", std::move(rotations)},
          {"metadata", std::move(meta)}};
}

TreeDocument tree_from_json(const json& j) {
  const std::string what = "tree document";
  require_keys(j, {"format_version", "p", "measure", "tie_rule", "rotations", "metadata"}, {},
               what);
  if (get_as<std::string>(j, "format_version", what) != kFormatVersion) {
    throw InputError("unsupported tree format_version");
  }
  if (get_as<std::string>(j, "tie_rule", what) != "lex") throw InputError("unsupported tie_rule");
  TreeDocument doc;
  doc.tree.p = get_index(j, "p", what);
  doc.tree.measure = parse_measure(get_as<std::string>(j, "measure", what));
  const json& rots = j.at("rotations");
  if (!rots.is_array()) throw InputError("rotations must be an array");
  for (const json& r : rots) {
    const std::string rw = "rotation record";
    require_keys(r, {"level", "alpha", "beta", "theta", "sum_index"}, {}, rw);
    RotationRecord rec;
    rec.level = get_index(r, "level", rw);
    rec.alpha = get_index(r, "alpha", rw);
    rec.beta = get_index(r, "beta", rw);
    if (!r.at("theta").is_number()) throw InputError("rotation theta must be a number");
    rec.theta = r.at("theta").get<double>();
    rec.sum_index = get_index(r, "sum_index", rw);
    rec.detail_index = rec.sum_index == rec.alpha ? rec.beta : rec.alpha;
    doc.tree.rotations.push_back(rec);
  }
  const json& meta = j.at("metadata");
  const std::string mw = "tree metadata";
  require_keys(meta, {"input_hash", "flags"}, {"seed", "run_config", "variable_names"}, mw);
  doc.metadata.input_hash = get_as<std::string>(meta, "input_hash", mw);
  const json& flags = meta.at("flags");
  require_keys(flags, {"near_zero_similarity", "early_stopped"}, {}, "tree flags");
  doc.tree.flags.near_zero_similarity = get_as<bool>(flags, "near_zero_similarity", "tree flags");
  doc.tree.flags.early_stopped = get_as<bool>(flags, "early_stopped", "tree flags");
  if (meta.contains("seed")) doc.metadata.seed = get_as<std::uint64_t>(meta, "seed", mw);
  if (meta.contains("run_config")) doc.metadata.run_config = meta.at("run_config");
  if (meta.contains("variable_names")) {
    doc.metadata.variable_names = get_as<std::vector<std::string>>(meta, "variable_names", mw);
    if (doc.metadata.variable_names.size() != doc.tree.p) {
      throw InputError("variable_names length does not match p");
    }
  }
  validate_tree(doc.tree);
  return doc;
}

std::string serialize_tree(const TreeDocument& doc) { return dump_canonical(tree_to_json(doc)); }

TreeDocument parse_tree(std::string_view text) { return tree_from_json(parse_json(text, "tree")); }

json basis_to_json(const TreeletBasis& basis) {
  json columns = json::array();
  for (std::size_t k = 0; k < basis.size(); ++k) {
    auto col = basis.column(k);
    columns.push_back({{"column", k},
                       {"kind", kind_json(basis.kind(k))},
                       {"origin_level", basis.origin_level(k)},
                       {"loadings", std::vector<double>(col.begin(), col.end())}});
  }
  return {{"format_version", kFormatVersion},
          {"p", basis.size()},
          {"level", basis.level()},
          {"columns", std::move(columns)}};
}

json features_to_json(const FeatureSet& fs) {
  json rows = json::array();
  for (std::size_t f = 0; f < fs.k(); ++f) {
    rows.push_back(
        {{"rank", f + 1},
         {"column", fs.columns[f]},
         {"kind", kind_json(fs.kinds[f])},
         {"origin_level", fs.origin_levels[f]},
         {"variance", fs.variances[f]},
         {"loadings", std::vector<double>(fs.loadings.begin() + f * fs.p,
                                          fs.loadings.begin() + (f + 1) * fs.p)}});
  }
  return {{"level", fs.level}, {"k", fs.k()}, {"p", fs.p}, {"features", std::move(rows)}};
}

BlockModelSpec block_spec_from_json(const json& j) {
  const std::string what = "block model spec";
  require_keys(j, {"p", "partition"},
               {"within_corr", "across_corr", "variances", "noise_sd", "seed"}, what);
  BlockModelSpec spec;
  spec.p = get_index(j, "p", what);
  spec.partition = get_as<Partition>(j, "partition", what);
  if (j.contains("within_corr")) spec.within_corr = get_as<double>(j, "within_corr", what);
  if (j.contains("across_corr")) spec.across_corr = get_as<double>(j, "across_corr", what);
  if (j.contains("noise_sd")) spec.noise_sd = get_as<double>(j, "noise_sd", what);
  if (j.contains("seed")) spec.seed = get_as<std::uint64_t>(j, "seed", what);
  if (j.contains("variances")) {
    if (j.at("variances").is_number()) {
      spec.variances.assign(spec.p, j.at("variances").get<double>());
    } else {
      spec.variances = get_as<std::vector<double>>(j, "variances", what);
    }
  }
  validate(spec);
  return spec;
}

json block_spec_to_json(const BlockModelSpec& spec) {
  json j = {{"p", spec.p},
            {"partition", spec.partition},
            {"within_corr", spec.within_corr},
            {"across_corr", spec.across_corr},
            {"noise_sd", spec.noise_sd},
            {"seed", spec.seed}};
  if (!spec.variances.empty()) j["variances"] = spec.variances;
  return j;
}

json experiment_to_json(const ExperimentResult& result) {
  json rows = json::array();
  for (const auto& r : result.rows) {
    rows.push_back({{"p", r.p},
                    {"n_star", r.n_star ? json(*r.n_star) : json(nullptr)},
                    {"censored", !r.n_star.has_value()}});
  }
  json grid = json::array();
  for (const auto& g : result.grid) {
    grid.push_back(
        {{"p", g.p}, {"n", g.n}, {"trials", g.trials}, {"recovered_fraction", g.recovered_fraction}});
  }
  const auto slope = log_log_slope(result.rows);
  return {{"target", result.target},
          {"trials", result.trials},
          {"rows", std::move(rows)},
          {"grid", std::move(grid)},
          {"log_log_slope", slope ? json(*slope) : json(nullptr)}};
}

json cv_to_json(const CvResult& result) {
  json grid = json::array();
  for (const auto& g : result.grid) grid.push_back({{"level", g.level}, {"k", g.k}, {"score", g.score}});
  return {{"best_level", result.best_level},
          {"best_k", result.best_k},
          {"cv_score", result.cv_score},
          {"grid", std::move(grid)},
          {"skipped_folds", result.skipped_folds},
          {"warnings", result.warnings}};
}

json two_way_to_json(const TwoWayResult& result) {
  TreeDocument vt;
  vt.tree = result.variable_tree;
  return {{"branch_assignment", result.branch_assignment},
          {"class_of_branch", {result.class_of_branch[0], result.class_of_branch[1]}},
          {"predicted", result.predicted},
          {"test_error", result.test_error},
          {"flags",
           {{"empty_branch", result.flags.empty_branch}, {"vote_tie", result.flags.vote_tie}}},
          {"feature_columns", result.feature_columns},
          {"variable_tree", tree_to_json(vt)}};
}

std::vector<std::string> coefficient_names(const TreeletBasis& basis) {
  std::vector<std::string> names;
  for (std::size_t k : basis.scaling_columns()) names.push_back("phi_" + std::to_string(k));
  for (std::size_t k : basis.detail_columns()) names.push_back("psi_" + std::to_string(k));
  return names;
}

}  // namespace treelets::io
