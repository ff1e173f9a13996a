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

#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "support/helpers.hpp"
#include "support/instances.hpp"
#include "support/oracles.hpp"
#include "treelets/cli.hpp"
#include "treelets/io.hpp"

using namespace treelets;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string p(const fs::path& x) { return x.string(); }

void write(const fs::path& path, const std::string& text) { io::write_file_atomic(path, text); }

}  // namespace

TEST_CASE("build, transform and inverse reproduce the input") {
  const auto dir = helpers::scratch_dir("cli_roundtrip");
  const auto x = oracle::correlated_matrix(30, 7, 12);
  write(dir / "d.csv", io::format_csv(x));
  REQUIRE(run({"build", "--input", p(dir / "d.csv"), "--measure", "correlation", "--level", "full",
               "--out", p(dir / "t.json")})
              .code == 0);
  REQUIRE(run({"transform", "--tree", p(dir / "t.json"), "--input", p(dir / "d.csv"), "--level",
               "full", "--out", p(dir / "c.csv")})
              .code == 0);
  REQUIRE(run({"transform", "--tree", p(dir / "t.json"), "--input", p(dir / "c.csv"),
               "--inverse", "--out", p(dir / "r.csv")})
              .code == 0);
  const auto back = io::read_csv(dir / "r.csv");
  CHECK(back.names() == x.names());
  std::vector<double> a(x.values().begin(), x.values().end());
  std::vector<double> b(back.values().begin(), back.values().end());
  CHECK(oracle::max_abs_diff(a, b) < 1e-10);

  const auto meta = io::parse_json(io::read_file(dir / "c.csv.meta.json"));
  CHECK(meta.at("format_version") == "1");
  CHECK(meta.at("run_config").at("command") == "transform");

  // Partial level and the basis side output.
  REQUIRE(run({"transform", "--tree", p(dir / "t.json"), "--input", p(dir / "d.csv"), "--level",
               "3", "--out", p(dir / "c3.csv"), "--basis-out", p(dir / "b3.json")})
              .code == 0);
  CHECK(io::read_csv(dir / "c3.csv").cols() == 7);
  CHECK(fs::exists(dir / "b3.json"));
}

TEST_CASE("identical runs give byte-identical artifacts") {
  const auto dir = helpers::scratch_dir("cli_determinism");
  write(dir / "spec.json",
        R"({"p": 8, "partition": [[0,1,2,3],[4,5,6,7]], "within_corr": 0.9, "noise_sd": 0.2})");
  for (const char* name : {"a.csv", "b.csv"})
    REQUIRE(run({"synth", "--spec", p(dir / "spec.json"), "--n", "200", "--seed", "5", "--out",
                 p(dir / name)})
                .code == 0);
  CHECK(io::read_file(dir / "a.csv") == io::read_file(dir / "b.csv"));
  CHECK(io::read_file(dir / "a.csv.meta.json") == io::read_file(dir / "b.csv.meta.json"));
  REQUIRE(run({"synth", "--spec", p(dir / "spec.json"), "--n", "200", "--seed", "6", "--out",
               p(dir / "c.csv")})
              .code == 0);
  CHECK(io::read_file(dir / "a.csv") != io::read_file(dir / "c.csv"));

  for (const char* name : {"t1.json", "t2.json"})
    REQUIRE(run({"build", "--input", p(dir / "a.csv"), "--out", p(dir / name)}).code == 0);
  CHECK(io::read_file(dir / "t1.json") == io::read_file(dir / "t2.json"));

  for (const char* name : {"f1.json", "f2.json"})
    REQUIRE(run({"features", "--tree", p(dir / "t1.json"), "--input", p(dir / "a.csv"), "--k",
                 "3", "--out", p(dir / name)})
                .code == 0);
  CHECK(io::read_file(dir / "f1.json") == io::read_file(dir / "f2.json"));
  const auto f = io::parse_json(io::read_file(dir / "f1.json"));
  CHECK(f.at("result").at("features").size() == 3);

  for (const char* name : {"r1.json", "r2.json"})
    REQUIRE(run({"bench-recovery", "--p", "8,16", "--trials", "5", "--n-max", "256", "--seed", "3",
                 "--out", p(dir / name)})
                .code == 0);
  CHECK(io::read_file(dir / "r1.json") == io::read_file(dir / "r2.json"));
  const auto r = io::parse_json(io::read_file(dir / "r1.json"));
  CHECK(r.at("result").at("rows").size() == 2);
  CHECK(r.at("run_config").at("seed") == 3);
}

TEST_CASE("bench-timing table shape") {
  const auto dir = helpers::scratch_dir("cli_timing");
  REQUIRE(run({"bench-timing", "--p", "8,32", "--n", "20", "--repeats", "1", "--seed", "1",
               "--out", p(dir / "t.json")})
              .code == 0);
  const auto j = io::parse_json(io::read_file(dir / "t.json"));
  const auto& rows = j.at("result").at("rows");
  REQUIRE(rows.size() == 2);
  for (const auto& row : rows) {
    CHECK(row.at("identical_trees") == true);
    CHECK(row.at("naive_seconds").get<double>() > 0.0);
  }
}

TEST_CASE("cv and two-way commands") {
  const auto dir = helpers::scratch_dir("cli_pipelines");
  const auto inst = instances::two_way_instance(2026);
  write(dir / "s.csv", io::format_csv(inst.samples));
  std::string labels = "row,label,train\n";
  for (std::size_t i = 0; i < inst.train_rows.size(); ++i)
    labels += std::to_string(inst.train_rows[i]) + "," + std::to_string(inst.train_labels[i]) + ",1\n";
  for (std::size_t i = 0; i < inst.test_rows.size(); ++i)
    labels += std::to_string(inst.test_rows[i]) + "," + std::to_string(inst.test_labels[i]) + ",0\n";
  write(dir / "labels.csv", labels);
  REQUIRE(run({"two-way", "--input", p(dir / "s.csv"), "--labels", p(dir / "labels.csv"), "--out",
               p(dir / "tw.json")})
              .code == 0);
  const auto tw = io::parse_json(io::read_file(dir / "tw.json"));
  CHECK(tw.at("result").at("test_error") == 0.0);

  // Response: mean of the first block, as a named column.
  std::string csv = "x0,x1,x2,x3,x4,y\n";
  const auto x = oracle::correlated_matrix(60, 5, 2, 1.0);
  for (std::size_t r = 0; r < 60; ++r) {
    for (std::size_t j = 0; j < 5; ++j) csv += io::format_double(x(r, j)) + ",";
    csv += io::format_double(x(r, 0) + x(r, 1)) + "\n";
  }
  write(dir / "reg.csv", csv);
  REQUIRE(run({"cv", "--input", p(dir / "reg.csv"), "--response", "y", "--levels", "2,4", "--k",
               "1,3", "--seed", "1", "--out", p(dir / "cv.json")})
              .code == 0);
  const auto cv = io::parse_json(io::read_file(dir / "cv.json"));
  CHECK(cv.at("result").at("grid").size() == 4);
  CHECK(run({"cv", "--input", p(dir / "reg.csv"), "--response", "z", "--levels", "2", "--k", "1",
             "--seed", "1", "--out", p(dir / "cv2.json")})
            .code == 1);
}

TEST_CASE("exit codes for user errors") {
  const auto dir = helpers::scratch_dir("cli_errors");
  const auto x = oracle::correlated_matrix(10, 4, 1);
  write(dir / "d.csv", io::format_csv(x));
  write(dir / "spec.json", R"({"p": 4, "partition": [[0,1],[2,3]]})");
  CHECK(run({"--help"}).code == 0);
  CHECK(run({}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"synth", "--spec", p(dir / "spec.json"), "--n", "5", "--out", p(dir / "o.csv")}).code == 1);
  CHECK(run({"bench-timing", "--out", p(dir / "o.json")}).code == 1);
  CHECK(run({"build", "--input", p(dir / "missing.csv"), "--out", p(dir / "t.json")}).code == 1);
  CHECK(run({"build", "--input", p(dir / "d.csv"), "--level", "seven", "--out", p(dir / "t.json")}).code == 1);
  CHECK(run({"build", "--input", p(dir / "d.csv"), "--level", "4", "--out", p(dir / "t.json")}).code == 1);
  CHECK(run({"build", "--input", p(dir / "d.csv"), "--measure", "kendall", "--out", p(dir / "t.json")}).code == 1);
  REQUIRE(run({"build", "--input", p(dir / "d.csv"), "--out", p(dir / "t.json")}).code == 0);
  CHECK(run({"features", "--tree", p(dir / "t.json"), "--input", p(dir / "d.csv"), "--k", "5",
             "--out", p(dir / "f.json")})
            .code == 1);
  write(dir / "other.csv", "a,b,c,d\n1,2,3,4\n5,6,7,9\n");
  const auto mismatch = run({"transform", "--tree", p(dir / "t.json"), "--input",
                             p(dir / "other.csv"), "--out", p(dir / "c.csv")});
  CHECK(mismatch.code == 1);
  CHECK(mismatch.err.find("names") != std::string::npos);
  write(dir / "broken.json", "{\"format_version\": \"1\"}");
  CHECK(run({"transform", "--tree", p(dir / "broken.json"), "--input", p(dir / "d.csv"), "--out",
             p(dir / "c.csv")})
            .code == 1);
  CHECK_FALSE(fs::exists(dir / "c.csv"));
}
