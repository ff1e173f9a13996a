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

#include "treelets/cli.hpp"

#include <charconv>
#include <iostream>
#include <optional>
#include <set>

#include "CLI11.hpp"
#include "treelets/basis.hpp"
#include "treelets/bench.hpp"
#include "treelets/error.hpp"
#include "treelets/io.hpp"
#include "treelets/pipelines.hpp"
#include "treelets/synthetic.hpp"
#include "treelets/tree.hpp"

namespace treelets::cli {

namespace {

using io::json;

// "full" or a positive integer.
std::optional<std::size_t> parse_level(const std::string& text) {
  if (text == "full") return std::nullopt;
  std::size_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || v == 0) {
    throw InputError("level must be 'full' or a positive integer, got '" + text + "'");
  }
  return v;
}

std::size_t resolve_level(const std::string& text, std::size_t available) {
  const auto level = parse_level(text);
  if (!level) return available;
  return *level;
}

json envelope(json run_config) {
  return {{"format_version", io::kFormatVersion}, {"run_config", std::move(run_config)}};
}

void write_json(const std::string& path, const json& j) {
  io::write_file_atomic(path, io::dump_canonical(j));
}

// CSV outputs cannot carry metadata, so it goes in a sibling file.
void write_csv_with_meta(const std::string& path, const std::string& csv, json run_config) {
  io::write_file_atomic(path, csv);
  write_json(path + ".meta.json", envelope(std::move(run_config)));
}

io::TreeDocument load_tree(const std::string& path) { return io::parse_tree(io::read_file(path)); }

void check_names(const io::TreeDocument& doc, const DataMatrix& x) {
  if (x.cols() != doc.tree.p) {
    throw InputError("input has " + std::to_string(x.cols()) + " columns but the tree covers " +
                     std::to_string(doc.tree.p) + " variables");
  }
  if (!doc.metadata.variable_names.empty() && doc.metadata.variable_names != x.names()) {
    throw InputError("input column names do not match the tree's variable names");
  }
}

struct BuildArgs {
  std::string input, out, measure = "correlation", level = "full";
  std::optional<double> stop_below;
};

void cmd_build(const BuildArgs& a) {
  const std::string bytes = io::read_file(a.input);
  const DataMatrix x = io::parse_csv(bytes, a.input);
  BuildOptions options;
  options.measure = parse_measure(a.measure);
  options.level = parse_level(a.level);
  options.stop_below = a.stop_below;
  io::TreeDocument doc;
  doc.tree = build_tree(x, options);
  doc.metadata.input_hash = io::fnv1a64_hex(bytes);
  doc.metadata.variable_names = x.names();
  doc.metadata.run_config = {{"command", "build"},
                             {"input", a.input},
                             {"measure", a.measure},
                             {"level", a.level},
                             {"stop_below", a.stop_below ? json(*a.stop_below) : json(nullptr)}};
  io::write_file_atomic(a.out, io::serialize_tree(doc));
}

struct TransformArgs {
  std::string tree, input, out, level = "full", basis_out;
  bool inverse = false;
};

void cmd_transform(const TransformArgs& a) {
  const io::TreeDocument doc = load_tree(a.tree);
  const TreeletBasis basis = basis_at_level(doc.tree, resolve_level(a.level, doc.tree.levels()));
  const std::string bytes = io::read_file(a.input);
  const DataMatrix x = io::parse_csv(bytes, a.input);
  const auto coef_names = io::coefficient_names(basis);
  const std::size_t p = basis.size();
  const std::size_t n_scaling = basis.scaling_columns().size();

  std::vector<double> out(x.rows() * p);
  std::vector<std::string> header;
  if (!a.inverse) {
    check_names(doc, x);
    for (std::size_t r = 0; r < x.rows(); ++r) {
      const Coefficients c = forward(basis, x.row(r));
      std::copy(c.s.begin(), c.s.end(), out.begin() + r * p);
      std::copy(c.d.begin(), c.d.end(), out.begin() + r * p + n_scaling);
    }
    header = coef_names;
  } else {
    if (x.names() != coef_names) {
      throw InputError("coefficient header does not match the basis at this level");
    }
    for (std::size_t r = 0; r < x.rows(); ++r) {
      const auto row = x.row(r);
      Coefficients c;
      c.s.assign(row.begin(), row.begin() + n_scaling);
      c.d.assign(row.begin() + n_scaling, row.end());
      const std::vector<double> v = inverse(basis, c);
      std::copy(v.begin(), v.end(), out.begin() + r * p);
    }
    header = doc.metadata.variable_names.empty() ? default_names(p) : doc.metadata.variable_names;
  }
  write_csv_with_meta(a.out, io::format_csv(header, out, x.rows()),
                      {{"command", "transform"},
                       {"tree", a.tree},
                       {"input", a.input},
                       {"input_hash", io::fnv1a64_hex(bytes)},
                       {"level", basis.level()},
                       {"inverse", a.inverse}});
  if (!a.basis_out.empty()) write_json(a.basis_out, io::basis_to_json(basis));
}

struct FeaturesArgs {
  std::string tree, input, out, level = "full";
  std::size_t k = 0;
};

void cmd_features(const FeaturesArgs& a) {
  const io::TreeDocument doc = load_tree(a.tree);
  const std::string bytes = io::read_file(a.input);
  const DataMatrix x = io::parse_csv(bytes, a.input);
  check_names(doc, x);
  const std::size_t level = resolve_level(a.level, doc.tree.levels());
  const FeatureSet fs = top_k_features(doc.tree, x, level, a.k);
  json j = envelope({{"command", "features"},
                     {"tree", a.tree},
                     {"input", a.input},
                     {"input_hash", io::fnv1a64_hex(bytes)},
                     {"level", a.level},
                     {"k", a.k}});
  j["result"] = io::features_to_json(fs);
  write_json(a.out, j);
}

struct SynthArgs {
  std::string spec, out;
  std::size_t n = 0;
  std::uint64_t seed = 0;
};

void cmd_synth(const SynthArgs& a) {
  BlockModelSpec spec =
      io::block_spec_from_json(io::parse_json(io::read_file(a.spec), a.spec));
  spec.seed = a.seed;
  const DataMatrix x = sample(spec, a.n);
  write_csv_with_meta(a.out, io::format_csv(x),
                      {{"command", "synth"},
                       {"spec", io::block_spec_to_json(spec)},
                       {"n", a.n},
                       {"seed", a.seed}});
}

struct RecoveryArgs {
  std::string out, measure = "correlation";
  std::vector<std::size_t> p_list{16, 64, 256};
  ExperimentTemplate tmpl;
  double target = 0.9;
  std::size_t trials = 50;
};

void cmd_bench_recovery(RecoveryArgs a) {
  a.tmpl.measure = parse_measure(a.measure);
  const ExperimentResult r = min_sample_experiment(a.p_list, a.tmpl, a.target, a.trials);
  json j = envelope({{"command", "bench-recovery"},
                     {"p", a.p_list},
                     {"block_size", a.tmpl.block_size},
                     {"within_corr", a.tmpl.within_corr},
                     {"across_corr", a.tmpl.across_corr},
                     {"variance", a.tmpl.variance},
                     {"noise_sd", a.tmpl.noise_sd},
                     {"measure", a.measure},
                     {"n_min", a.tmpl.n_min},
                     {"n_max", a.tmpl.n_max},
                     {"target", a.target},
                     {"trials", a.trials},
                     {"seed", a.tmpl.seed}});
  j["result"] = io::experiment_to_json(r);
  write_json(a.out, j);
}

struct TimingArgs {
  std::string out;
  std::vector<std::size_t> p_list{64, 256, 1024};
  std::size_t n = 50;
  std::size_t repeats = 3;
  std::uint64_t seed = 0;
};

void cmd_bench_timing(const TimingArgs& a) {
  const auto rows = timing_table(a.p_list, a.n, a.seed, a.repeats);
  json table = json::array();
  for (const auto& r : rows) {
    table.push_back({{"p", r.p},
                     {"n", r.n},
                     {"covariance_seconds", r.covariance_seconds},
                     {"naive_seconds", r.naive_seconds},
                     {"incremental_seconds", r.incremental_seconds},
                     {"ratio", r.ratio},
                     {"identical_trees", r.identical_trees}});
  }
  json j = envelope({{"command", "bench-timing"},
                     {"p", a.p_list},
                     {"n", a.n},
                     {"repeats", a.repeats},
                     {"seed", a.seed}});
  j["result"] = {{"rows", std::move(table)}};
  write_json(a.out, j);
}

struct CvArgs {
  std::string input, out, response, task = "regression", measure = "correlation";
  std::vector<std::size_t> levels, ks;
  std::size_t folds = 5;
  std::uint64_t seed = 0;
};

void cmd_cv(const CvArgs& a) {
  const std::string bytes = io::read_file(a.input);
  const DataMatrix full = io::parse_csv(bytes, a.input);
  const auto& names = full.names();
  const auto it = std::find(names.begin(), names.end(), a.response);
  if (it == names.end()) throw InputError("response column '" + a.response + "' not found");
  const auto yc = static_cast<std::size_t>(it - names.begin());
  std::vector<double> y = full.column(yc);
  std::vector<double> values;
  std::vector<std::string> kept;
  for (std::size_t c = 0; c < full.cols(); ++c)
    if (c != yc) kept.push_back(names[c]);
  for (std::size_t r = 0; r < full.rows(); ++r)
    for (std::size_t c = 0; c < full.cols(); ++c)
      if (c != yc) values.push_back(full(r, c));
  const DataMatrix x(full.rows(), full.cols() - 1, std::move(values), kept);

  PipelineConfig config;
  config.measure = parse_measure(a.measure);
  config.task = parse_task(a.task);
  config.level_grid = a.levels;
  config.k_grid = a.ks;
  config.folds = a.folds;
  config.seed = a.seed;
  const CvResult r = cv_select(x, y, config);
  json j = envelope({{"command", "cv"},
                     {"input", a.input},
                     {"input_hash", io::fnv1a64_hex(bytes)},
                     {"response", a.response},
                     {"task", a.task},
                     {"measure", a.measure},
                     {"levels", a.levels},
                     {"k", a.ks},
                     {"folds", a.folds},
                     {"seed", a.seed}});
  j["result"] = io::cv_to_json(r);
  write_json(a.out, j);
}

struct TwoWayArgs {
  std::string input, labels, out, level = "full";
  std::string variable_measure = "correlation", sample_measure = "correlation";
  std::size_t k = 2;
};

void cmd_two_way(const TwoWayArgs& a) {
  const std::string bytes = io::read_file(a.input);
  const DataMatrix samples = io::parse_csv(bytes, a.input);
  const std::string label_bytes = io::read_file(a.labels);
  const DataMatrix labels = io::parse_csv(label_bytes, a.labels);
  if (labels.names() != std::vector<std::string>{"row", "label", "train"}) {
    throw InputError("labels file must have header row,label,train");
  }
  std::vector<std::size_t> train_rows, test_rows;
  std::vector<int> train_labels, test_labels;
  std::set<std::size_t> listed;
  for (std::size_t r = 0; r < labels.rows(); ++r) {
    const double row = labels(r, 0), label = labels(r, 1), train = labels(r, 2);
    if (row < 0 || row != std::floor(row) || label != std::floor(label) ||
        (train != 0.0 && train != 1.0)) {
      throw InputError(a.labels + ": line " + std::to_string(r + 2) +
                       ": row must be a non-negative integer, label an integer, train 0 or 1");
    }
    const auto idx = static_cast<std::size_t>(row);
    if (!listed.insert(idx).second) {
      throw InputError(a.labels + ": row " + std::to_string(idx) + " listed twice");
    }
    (train == 1.0 ? train_rows : test_rows).push_back(idx);
    (train == 1.0 ? train_labels : test_labels).push_back(static_cast<int>(label));
  }
  TwoWayConfig config;
  config.k = a.k;
  config.level = parse_level(a.level);
  config.variable_measure = parse_measure(a.variable_measure);
  config.sample_measure = parse_measure(a.sample_measure);
  const TwoWayResult r =
      two_way_classify(samples, train_rows, train_labels, test_rows, test_labels, config);
  json j = envelope({{"command", "two-way"},
                     {"input", a.input},
                     {"input_hash", io::fnv1a64_hex(bytes)},
                     {"labels", a.labels},
                     {"labels_hash", io::fnv1a64_hex(label_bytes)},
                     {"k", a.k},
                     {"level", a.level},
                     {"variable_measure", a.variable_measure},
                     {"sample_measure", a.sample_measure}});
  j["result"] = io::two_way_to_json(r);
  write_json(a.out, j);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Treelet transform: adaptive multiscale bases for unordered variables",
               "treelets"};
  app.require_subcommand(1);
  const auto measures = CLI::IsMember({"covariance", "correlation"});

  BuildArgs build;
  auto* b = app.add_subcommand("build", "Build a treelet tree from a CSV data matrix");
  b->add_option("--input", build.input, "Data CSV")->required();
  b->add_option("--out", build.out, "Tree JSON output")->required();
  b->add_option("--measure", build.measure, "Similarity measure")->check(measures);
  b->add_option("--level", build.level, "Number of merges or 'full'");
  b->add_option("--stop-below", build.stop_below, "Stop once the best |similarity| is below this");

  TransformArgs tr;
  auto* t = app.add_subcommand("transform", "Expand data in a treelet basis (or invert)");
  t->add_option("--tree", tr.tree, "Tree JSON")->required();
  t->add_option("--input", tr.input, "Data CSV, or coefficient CSV with --inverse")->required();
  t->add_option("--out", tr.out, "Output CSV")->required();
  t->add_option("--level", tr.level, "Basis level or 'full'");
  t->add_flag("--inverse", tr.inverse, "Reconstruct data from coefficients");
  t->add_option("--basis-out", tr.basis_out, "Also write the materialized basis as JSON");

  FeaturesArgs fe;
  auto* f = app.add_subcommand("features", "Rank basis columns by coefficient variance");
  f->add_option("--tree", fe.tree, "Tree JSON")->required();
  f->add_option("--input", fe.input, "Data CSV")->required();
  f->add_option("--out", fe.out, "Feature table JSON")->required();
  f->add_option("--level", fe.level, "Basis level or 'full'");
  f->add_option("--k", fe.k, "Number of features")->required();

  SynthArgs sy;
  auto* s = app.add_subcommand("synth", "Sample a block covariance model");
  s->add_option("--spec", sy.spec, "Block model spec JSON")->required();
  s->add_option("--n", sy.n, "Number of observations")->required();
  s->add_option("--seed", sy.seed, "Generator seed")->required();
  s->add_option("--out", sy.out, "Data CSV output")->required();

  RecoveryArgs rec;
  auto* br = app.add_subcommand("bench-recovery", "Minimum sample size for block recovery");
  br->add_option("--p", rec.p_list, "Comma-separated variable counts")->delimiter(',');
  br->add_option("--block-size", rec.tmpl.block_size, "Variables per block");
  br->add_option("--within-corr", rec.tmpl.within_corr, "Within-block correlation");
  br->add_option("--across-corr", rec.tmpl.across_corr, "Across-block correlation");
  br->add_option("--variance", rec.tmpl.variance, "Signal variance per variable");
  br->add_option("--noise-sd", rec.tmpl.noise_sd, "Observation noise sd");
  br->add_option("--measure", rec.measure, "Similarity measure")->check(measures);
  br->add_option("--n-min", rec.tmpl.n_min, "Smallest sample size searched");
  br->add_option("--n-max", rec.tmpl.n_max, "Largest sample size searched");
  br->add_option("--target", rec.target, "Required recovered fraction");
  br->add_option("--trials", rec.trials, "Replicates per (p, n)");
  br->add_option("--seed", rec.tmpl.seed, "Master seed")->required();
  br->add_option("--out", rec.out, "Grid JSON output")->required();

  TimingArgs tim;
  auto* bt = app.add_subcommand("bench-timing", "Exhaustive vs cached pair search wall clock");
  bt->add_option("--p", tim.p_list, "Comma-separated variable counts")->delimiter(',');
  bt->add_option("--n", tim.n, "Observations per data set");
  bt->add_option("--repeats", tim.repeats, "Timed runs per build (minimum reported)");
  bt->add_option("--seed", tim.seed, "Data seed")->required();
  bt->add_option("--out", tim.out, "Timing table JSON output")->required();

  CvArgs cv;
  auto* c = app.add_subcommand("cv", "Cross-validated choice of level and feature count");
  c->add_option("--input", cv.input, "Data CSV including the response column")->required();
  c->add_option("--response", cv.response, "Response column name")->required();
  c->add_option("--task", cv.task, "regression or classification")
      ->check(CLI::IsMember({"regression", "classification"}));
  c->add_option("--measure", cv.measure, "Similarity measure")->check(measures);
  c->add_option("--levels", cv.levels, "Comma-separated candidate levels")
      ->delimiter(',')
      ->required();
  c->add_option("--k", cv.ks, "Comma-separated candidate feature counts")
      ->delimiter(',')
      ->required();
  c->add_option("--folds", cv.folds, "Fold count");
  c->add_option("--seed", cv.seed, "Fold assignment seed")->required();
  c->add_option("--out", cv.out, "Result JSON output")->required();

  TwoWayArgs tw;
  auto* w = app.add_subcommand("two-way", "Semi-supervised two-way classification");
  w->add_option("--input", tw.input, "All samples CSV (labeled and unlabeled)")->required();
  w->add_option("--labels", tw.labels, "CSV with header row,label,train")->required();
  w->add_option("--out", tw.out, "Result JSON output")->required();
  w->add_option("--k", tw.k, "Number of maximum-variance features");
  w->add_option("--level", tw.level, "Variable-tree level or 'full'");
  w->add_option("--variable-measure", tw.variable_measure, "Measure for the variable tree")
      ->check(measures);
  w->add_option("--sample-measure", tw.sample_measure, "Measure for the sample tree")
      ->check(measures);

  std::vector<std::string> argv_store;
  argv_store.reserve(args.size() + 1);
  argv_store.emplace_back("treelets");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kUserError;
  }

  try {
    if (*b) cmd_build(build);
    else if (*t) cmd_transform(tr);
    else if (*f) cmd_features(fe);
    else if (*s) cmd_synth(sy);
    else if (*br) cmd_bench_recovery(rec);
    else if (*bt) cmd_bench_timing(tim);
    else if (*c) cmd_cv(cv);
    else if (*w) cmd_two_way(tw);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kUserError;
  } catch (const Error& e) {
    err << "internal error: " << e.what() << "\n";
    return kInvariantError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInvariantError;
  }
  return kOk;
}

}  // namespace treelets::cli
