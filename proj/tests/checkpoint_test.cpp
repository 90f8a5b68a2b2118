// Copyright 2026 The rlsum Authors
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

#include "rlsum/checkpoint.hpp"

#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "json.hpp"
#include "rlsum/errors.hpp"

using namespace rlsum;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / "rlsum_ckpt_test";
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

Vocabulary vocab_of_size(int n) {
  Vocabulary v;
  for (int i = kNumReservedIds; i < n; ++i) v.add("w" + std::to_string(i));
  return v;
}

}  // namespace

TEST_CASE("checkpoint: round trip preserves parameters, vocabulary, and counters") {
  TempDir dir;
  Seq2SeqModel m = init_model(10, 5, 42);
  m.nll_warm_started = true;
  m.iterations_trained = 321;
  const Vocabulary vocab = vocab_of_size(10);
  const json echo = {{"seed", 42}, {"note", "round-trip"}};

  save_checkpoint(dir.file("m.ckpt.json"), m, vocab, echo);
  const LoadedCheckpoint loaded = load_checkpoint(dir.file("m.ckpt.json"));

  CHECK(loaded.model.vocab_size() == 10);
  CHECK(loaded.model.hidden_size() == 5);
  CHECK(loaded.model.nll_warm_started);
  CHECK(loaded.model.iterations_trained == 321);
  CHECK(loaded.config_echo == echo);
  CHECK(loaded.vocab.size() == 10);
  CHECK(loaded.vocab.token_of(4) == "w4");

  const auto got = loaded.model.parameters();
  const auto want = m.parameters();
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    CHECK(got[i]->name == want[i]->name);
    CHECK(got[i]->value == want[i]->value);  // bitwise-identical doubles
  }
}

TEST_CASE("checkpoint: vocabulary must match the model width on save") {
  TempDir dir;
  const Seq2SeqModel m = init_model(10, 5, 0);
  CHECK_THROWS_AS(save_checkpoint(dir.file("bad.json"), m, vocab_of_size(9), json::object()),
                  std::invalid_argument);
}

TEST_CASE("checkpoint: missing file raises an I/O error") {
  CHECK_THROWS_AS(load_checkpoint("/nonexistent/dir/m.ckpt.json"), IoError);
}

TEST_CASE("checkpoint: malformed JSON is a parse error") {
  TempDir dir;
  std::ofstream(dir.file("junk.json")) << "{not json";
  CHECK_THROWS_AS(load_checkpoint(dir.file("junk.json")), ParseError);
}

TEST_CASE("checkpoint: unknown format version is rejected") {
  TempDir dir;
  const Seq2SeqModel m = init_model(8, 4, 1);
  save_checkpoint(dir.file("v.json"), m, vocab_of_size(8), json::object());
  json j;
  std::ifstream(dir.file("v.json")) >> j;
  j["format_version"] = 99;
  std::ofstream(dir.file("v.json")) << j.dump();
  CHECK_THROWS_AS(load_checkpoint(dir.file("v.json")), ParseError);
}

TEST_CASE("checkpoint: parameter shape mismatches are rejected") {
  TempDir dir;
  const Seq2SeqModel m = init_model(8, 4, 1);
  save_checkpoint(dir.file("s.json"), m, vocab_of_size(8), json::object());
  json j;
  std::ifstream(dir.file("s.json")) >> j;

  SUBCASE("wrong declared rows") {
    j["parameters"][0]["rows"] = 7;
    std::ofstream(dir.file("s.json")) << j.dump();
    CHECK_THROWS_AS(load_checkpoint(dir.file("s.json")), ParseError);
  }
  SUBCASE("truncated data array") {
    auto& data = j["parameters"][0]["data"];
    data.erase(data.size() - 1);
    std::ofstream(dir.file("s.json")) << j.dump();
    CHECK_THROWS_AS(load_checkpoint(dir.file("s.json")), ParseError);
  }
  SUBCASE("renamed parameter") {
    j["parameters"][0]["name"] = "imposter";
    std::ofstream(dir.file("s.json")) << j.dump();
    CHECK_THROWS_AS(load_checkpoint(dir.file("s.json")), ParseError);
  }
  SUBCASE("vocabulary shorter than declared size") {
    auto& words = j["vocab"];
    words.erase(words.size() - 1);
    std::ofstream(dir.file("s.json")) << j.dump();
    CHECK_THROWS_AS(load_checkpoint(dir.file("s.json")), ParseError);
  }
}
