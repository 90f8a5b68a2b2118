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

#include "rlsum/training.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "rlsum/data.hpp"
#include "rlsum/errors.hpp"

using namespace rlsum;
namespace fs = std::filesystem;

namespace {

// Small lead-k corpus with clean labels; easy to fit, fast to train.
SplitCorpus tiny_corpus(std::uint64_t seed = 3) {
  SyntheticTaskSpec spec;
  spec.vocab_size = 8;
  spec.source_len_min = 3;
  spec.source_len_max = 6;
  spec.rule = SyntheticRule::kLeadK;
  spec.lead_k = 2;
  spec.seed = seed;
  const SyntheticCorpus corpus = generate_synthetic(spec, 60);
  return split(corpus.examples, 0.7, 0.15, 0.15, 5);
}

TrainConfig quick_config(Objective objective, long long iters) {
  TrainConfig c;
  c.objective = objective;
  c.max_iterations = iters;
  c.validate_every = iters;  // validate only at the end
  c.learning_rate = 5e-3;
  c.seed = 11;
  return c;
}

}  // namespace

TEST_CASE("training: objective names round-trip and reject unknowns") {
  for (Objective o : {Objective::kNll, Objective::kRwbHinge, Objective::kRisk2,
                      Objective::kRisk3}) {
    CHECK(objective_from_string(to_string(o)) == o);
  }
  CHECK_THROWS_AS(objective_from_string("pegasus"), ConfigError);
}

TEST_CASE("training: each objective declares its candidate samplers") {
  CHECK(samplers_for(Objective::kNll).empty());
  CHECK(samplers_for(Objective::kRwbHinge) ==
        std::vector<SampleMethod>{SampleMethod::kArgmax, SampleMethod::kGumbel});
  CHECK(samplers_for(Objective::kRisk2) ==
        std::vector<SampleMethod>{SampleMethod::kArgmax, SampleMethod::kGumbel});
  CHECK(samplers_for(Objective::kRisk3) ==
        std::vector<SampleMethod>{SampleMethod::kArgmax, SampleMethod::kSecondBest,
                                  SampleMethod::kGumbel});
}

TEST_CASE("training: config validation rejects out-of-range knobs") {
  TrainConfig c;
  c.gamma = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = TrainConfig{};
  c.learning_rate = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = TrainConfig{};
  c.max_iterations = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = TrainConfig{};
  c.samplers = {SampleMethod::kArgmax};  // wrong list for nll
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = TrainConfig{};
  c.objective = Objective::kRisk3;
  c.samplers = samplers_for(Objective::kRisk3);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("training: early_stop fires only after patience validations without a new minimum") {
  CHECK_FALSE(early_stop({}, 3));
  CHECK_FALSE(early_stop({1.0, 0.9, 0.8}, 3));          // still improving
  CHECK_FALSE(early_stop({1.0, 0.9, 0.95, 0.95}, 3));   // two stale checks
  CHECK(early_stop({1.0, 0.9, 0.95, 0.95, 0.95}, 3));   // three stale checks
  CHECK(early_stop({0.5, 0.6, 0.7, 0.8}, 3));           // minimum was the first entry
  CHECK_FALSE(early_stop({1.0, 0.9, 0.95, 0.85, 0.9}, 3));  // fresh minimum resets the clock
  CHECK_THROWS_AS(early_stop({1.0}, 0), std::invalid_argument);
}

TEST_CASE("training: near-zero initialization scores close to a uniform model") {
  const SplitCorpus parts = tiny_corpus();
  Seq2SeqModel model = init_model(12, 6, 1);  // 8 content + 4 reserved ids
  const ValidationScores scores = validate(model, parts.dev);
  // U[-0.08, 0.08] weights keep logits near zero, so NLL is close to ln(12).
  CHECK(scores.loss == doctest::Approx(std::log(12.0)).epsilon(0.05));
}

TEST_CASE("training: warm start reduces loss and stamps the model") {
  const SplitCorpus parts = tiny_corpus();
  Seq2SeqModel model = init_model(12, 6, 2);
  const double before = validate(model, parts.dev).loss;
  const RunResult result = train_nll(model, parts.train, parts.dev, quick_config(Objective::kNll, 150));
  CHECK(model.nll_warm_started);
  CHECK(model.iterations_trained == 150);
  CHECK(result.loss_trace.size() == 150);
  REQUIRE(!result.validations.empty());
  CHECK(result.best_dev_loss < before);
  CHECK(result.stop_reason == "max_iterations");
  CHECK(result.best_iteration >= 1);
}

TEST_CASE("training: train_nll only accepts the nll objective") {
  const SplitCorpus parts = tiny_corpus();
  Seq2SeqModel model = init_model(12, 6, 2);
  CHECK_THROWS_AS(train_nll(model, parts.train, parts.dev, quick_config(Objective::kRisk2, 10)),
                  ConfigError);
  CHECK_THROWS_AS(train_nll(model, {}, parts.dev, quick_config(Objective::kNll, 10)),
                  std::invalid_argument);
}

TEST_CASE("training: finetune_rl guards the warm start unless overridden") {
  const SplitCorpus parts = tiny_corpus();
  Seq2SeqModel cold = init_model(12, 6, 2);
  TrainConfig config = quick_config(Objective::kRwbHinge, 5);
  CHECK_THROWS_AS(finetune_rl(cold, parts.train, parts.dev, config), StateError);
  CHECK_THROWS_AS(finetune_rl(cold, parts.train, parts.dev, quick_config(Objective::kNll, 5)),
                  ConfigError);
  config.allow_cold_start = true;
  CHECK_NOTHROW(finetune_rl(cold, parts.train, parts.dev, config));
}

TEST_CASE("training: gamma=1 fine-tuning walks the same path as continued nll training") {
  const SplitCorpus parts = tiny_corpus();
  Seq2SeqModel warm = init_model(12, 6, 4);
  train_nll(warm, parts.train, parts.dev, quick_config(Objective::kNll, 40));

  Seq2SeqModel a = warm;
  Seq2SeqModel b = warm;
  TrainConfig nll_more = quick_config(Objective::kNll, 30);
  nll_more.seed = 21;
  TrainConfig rl_frozen = quick_config(Objective::kRisk3, 30);
  rl_frozen.seed = 21;
  rl_frozen.gamma = 1.0;

  const RunResult ra = train_nll(a, parts.train, parts.dev, nll_more);
  const RunResult rb = finetune_rl(b, parts.train, parts.dev, rl_frozen);
  REQUIRE(ra.loss_trace.size() == rb.loss_trace.size());
  for (std::size_t i = 0; i < ra.loss_trace.size(); ++i) {
    CHECK(ra.loss_trace[i] == rb.loss_trace[i]);  // bitwise-identical path
  }
  const auto pa = a.parameters();
  const auto pb = b.parameters();
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i]->value == pb[i]->value);
}

TEST_CASE("training: fine-tuning at gamma<1 changes the trajectory") {
  const SplitCorpus parts = tiny_corpus();
  Seq2SeqModel warm = init_model(12, 6, 4);
  train_nll(warm, parts.train, parts.dev, quick_config(Objective::kNll, 40));

  Seq2SeqModel a = warm;
  Seq2SeqModel b = warm;
  TrainConfig pure = quick_config(Objective::kNll, 20);
  TrainConfig mixed = quick_config(Objective::kRwbHinge, 20);
  mixed.gamma = 0.5;
  const RunResult ra = train_nll(a, parts.train, parts.dev, pure);
  const RunResult rb = finetune_rl(b, parts.train, parts.dev, mixed);
  bool differs = false;
  for (std::size_t i = 0; i < ra.loss_trace.size(); ++i) {
    if (ra.loss_trace[i] != rb.loss_trace[i]) differs = true;
  }
  CHECK(differs);
}

TEST_CASE("training: validation cadence and final-iteration validation") {
  const SplitCorpus parts = tiny_corpus();
  Seq2SeqModel model = init_model(12, 6, 8);
  TrainConfig config = quick_config(Objective::kNll, 50);
  config.validate_every = 20;
  const RunResult result = train_nll(model, parts.train, parts.dev, config);
  REQUIRE(result.validations.size() == 3);  // iterations 20, 40, and the final 50
  CHECK(result.validations[0].iteration == 20);
  CHECK(result.validations[1].iteration == 40);
  CHECK(result.validations[2].iteration == 50);
}

TEST_CASE("training: long-budget runs can stop early on a stale dev loss") {
  SyntheticTaskSpec spec;
  spec.vocab_size = 6;
  spec.source_len_min = 2;
  spec.source_len_max = 3;
  spec.rule = SyntheticRule::kLeadK;
  spec.lead_k = 1;
  spec.seed = 12;
  const SyntheticCorpus corpus = generate_synthetic(spec, 40);
  const SplitCorpus parts = split(corpus.examples, 0.6, 0.2, 0.2, 2);

  TrainConfig config;
  config.objective = Objective::kNll;
  config.few_shot = false;  // the fixed-budget protocol never stops early
  config.max_iterations = 4000;
  config.validate_every = 10;
  config.patience = 30;  // three stale validations
  config.learning_rate = 5.0;  // overshoots wildly, so dev loss stalls
  config.seed = 1;
  Seq2SeqModel model = init_model(10, 4, 1);
  const RunResult result = train_nll(model, parts.train, parts.dev, config);
  CHECK(result.stop_reason == "early_stop");
  CHECK(result.loss_trace.size() < 4000);
}

TEST_CASE("training: a hundred fine-tuning steps stay finite for every objective") {
  const SplitCorpus parts = tiny_corpus();
  Seq2SeqModel warm = init_model(12, 6, 21);
  train_nll(warm, parts.train, parts.dev, quick_config(Objective::kNll, 150));
  const double start_dev = validate(warm, parts.dev).loss;

  for (Objective o : {Objective::kRwbHinge, Objective::kRisk2, Objective::kRisk3}) {
    CAPTURE(to_string(o));
    Seq2SeqModel model = warm;
    TrainConfig cfg = quick_config(o, 100);
    cfg.gamma = 0.9;
    cfg.validate_every = 20;
    const RunResult result = finetune_rl(model, parts.train, parts.dev, cfg);
    REQUIRE(result.loss_trace.size() == 100);
    for (double loss : result.loss_trace) CHECK(std::isfinite(loss));
    for (const ValidationRecord& rec : result.validations) {
      CHECK(std::isfinite(rec.dev_loss));
      CHECK(rec.dev_loss <= 10.0 * start_dev);
    }
  }
}

TEST_CASE("training: gamma_sweep emits one row per grid value using the proxy") {
  const SplitCorpus parts = tiny_corpus();
  Seq2SeqModel warm = init_model(12, 6, 9);
  train_nll(warm, parts.train, parts.dev, quick_config(Objective::kNll, 30));

  TrainConfig base = quick_config(Objective::kNll, 15);
  const std::vector<double> grid = {0.1, 0.5, 0.9};
  const std::vector<GammaRow> rows = gamma_sweep(warm, parts.train, parts.dev, grid, base);
  REQUIRE(rows.size() == 3);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(rows[i].gamma == grid[i]);
  CHECK_THROWS_AS(gamma_sweep(warm, parts.train, parts.dev, {}, base), std::invalid_argument);
  CHECK_THROWS_AS(gamma_sweep(warm, parts.train, parts.dev, {1.2}, base), std::invalid_argument);
}

TEST_CASE("training: select_gamma prefers higher rouge then lower gamma") {
  GammaRow a;
  a.gamma = 0.3;
  a.rouge_l = 0.5;
  GammaRow b;
  b.gamma = 0.7;
  b.rouge_l = 0.6;
  GammaRow c;
  c.gamma = 0.1;
  c.rouge_l = 0.6;
  CHECK(select_gamma({a, b}).gamma == 0.7);
  CHECK(select_gamma({a, b, c}).gamma == 0.1);  // tie on rouge, lower gamma wins
  CHECK_THROWS_AS(select_gamma({}), std::invalid_argument);
}

TEST_CASE("training: trace csv has a header and one line per iteration") {
  const SplitCorpus parts = tiny_corpus();
  Seq2SeqModel model = init_model(12, 6, 3);
  TrainConfig config = quick_config(Objective::kNll, 10);
  config.validate_every = 5;
  const RunResult result = train_nll(model, parts.train, parts.dev, config);

  const fs::path path = fs::temp_directory_path() / "rlsum_trace_test.csv";
  write_trace_csv(path.string(), result);
  std::ifstream in(path);
  std::string line;
  int lines = 0;
  REQUIRE(std::getline(in, line));
  CHECK(line == "iteration,loss,dev_loss,rouge1,rouge2,rougeL");
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 10);
  fs::remove(path);

  const nlohmann::json j = result_to_json(result);
  CHECK(j.at("iterations_run") == 10);
  CHECK(j.at("validations").size() == 2);
}
