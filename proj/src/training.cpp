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

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <unordered_map>
#include <utility>

#include "rlsum/errors.hpp"
#include "rlsum/objectives.hpp"
#include "rlsum/rng.hpp"
#include "rlsum/text_metrics.hpp"

namespace rlsum {

namespace {

// Substream indices under Rng::derive. Example order and candidate sampling
// never share a stream, so disabling sampling (gamma=1) cannot shift the
// example order.
constexpr std::uint64_t kOrderStream = 0;
constexpr std::uint64_t kSampleStream = 1;

// Internal shape of one training loop; the public entry points and the
// sweep's REINFORCE proxy all reduce to this.
struct LoopSpec {
  Objective objective = Objective::kNll;
  bool reinforce_proxy = false;  // single Gumbel sample, reward-only weight
  double gamma = 1.0;
  double learning_rate = 5e-4;
  double clip_norm = 1.0;
  long long max_iterations = 1;
  long long validate_every = 1;
  long long patience = 1;
  bool few_shot = true;
  std::uint64_t seed = 0;
  double temperature = 0.1;
};

double score_candidate(const Example& ex, const Candidate& cand) {
  return rouge_l_f1(ex.summary, cand.tokens).f1;
}

LossValue rl_loss_for(const LoopSpec& spec, const ProbMatrix& dist, const Example& ex,
                      Rng& sample_rng) {
  if (spec.reinforce_proxy) {
    Candidate sample = gumbel_softmax_sample(dist, spec.temperature, sample_rng);
    sample.reward = score_candidate(ex, sample);
    return rwb_loss(-sample.reward, candidate_logprob_nodes(dist, sample), /*hinge=*/false);
  }

  Candidate greedy = argmax_decode(dist);
  greedy.reward = score_candidate(ex, greedy);
  Candidate sample = gumbel_softmax_sample(dist, spec.temperature, sample_rng);
  sample.reward = score_candidate(ex, sample);

  switch (spec.objective) {
    case Objective::kRwbHinge: {
      const double alpha = rwb_alpha(sample.reward, greedy.reward, /*hinge=*/true);
      return rwb_loss(alpha, candidate_logprob_nodes(dist, sample), /*hinge=*/true);
    }
    case Objective::kRisk2: {
      CandidateSet set = make_candidate_set(dist, {std::move(greedy), std::move(sample)});
      risk_candidate_probs(set);
      return risk_loss(set);
    }
    case Objective::kRisk3: {
      Candidate runner_up = second_best_decode(dist);
      runner_up.reward = score_candidate(ex, runner_up);
      CandidateSet set = make_candidate_set(
          dist, {std::move(greedy), std::move(runner_up), std::move(sample)});
      risk_candidate_probs(set);
      return risk_loss(set);
    }
    case Objective::kNll:
      break;
  }
  throw ConfigError("rl_loss_for: objective has no RL loss");
}

RunResult run_loop(Seq2SeqModel& model, const std::vector<Example>& train,
                   const std::vector<Example>& dev, const LoopSpec& spec) {
  if (train.empty()) throw std::invalid_argument("training: empty train corpus");
  if (dev.empty()) throw std::invalid_argument("training: empty dev corpus");

  const bool rl_active = spec.gamma < 1.0 && (spec.reinforce_proxy || spec.objective != Objective::kNll);

  Rng order_rng(Rng::derive(spec.seed, kOrderStream));
  Rng sample_rng(Rng::derive(spec.seed, kSampleStream));
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size();  // forces a shuffle before the first pick

  RunResult result;
  result.best_dev_loss = std::numeric_limits<double>::infinity();
  result.stop_reason = "max_iterations";

  for (long long t = 1; t <= spec.max_iterations; ++t) {
    if (cursor == order.size()) {
      order_rng.shuffle(order);
      cursor = 0;
    }
    const Example& ex = train[order[cursor++]];

    ad::Tape tape(true);
    ProbMatrix dist = forward_teacher_forced(tape, model, ex.source, ex.summary);
    LossValue loss = nll_loss(dist, ex.summary);
    if (rl_active) {
      loss = mixed_loss(loss, rl_loss_for(spec, dist, ex, sample_rng), spec.gamma);
    }
    tape.backward(loss.node);
    sgd_step(model, spec.learning_rate, spec.clip_norm);
    model.iterations_trained += 1;
    result.loss_trace.push_back(loss.value());

    if (t % spec.validate_every == 0 || t == spec.max_iterations) {
      const ValidationScores v = validate(model, dev);
      result.validations.push_back({t, v.loss, v.rouge1, v.rouge2, v.rouge_l});
      if (v.loss < result.best_dev_loss) {
        result.best_dev_loss = v.loss;
        result.best_iteration = t;
        result.best_model = model;
      }
      if (!spec.few_shot) {
        std::vector<double> losses;
        losses.reserve(result.validations.size());
        for (const auto& rec : result.validations) losses.push_back(rec.dev_loss);
        if (early_stop(losses, spec.patience / spec.validate_every)) {
          result.stop_reason = "early_stop";
          break;
        }
      }
    }
  }
  return result;
}

LoopSpec loop_spec_from(const TrainConfig& config) {
  LoopSpec spec;
  spec.objective = config.objective;
  spec.gamma = config.gamma;
  spec.learning_rate = config.learning_rate;
  spec.clip_norm = config.clip_norm;
  spec.max_iterations = config.max_iterations;
  spec.validate_every = config.validate_every;
  spec.patience = config.patience;
  spec.few_shot = config.few_shot;
  spec.seed = config.seed;
  spec.temperature = config.gumbel_temperature;
  return spec;
}

}  // namespace

std::string to_string(Objective objective) {
  switch (objective) {
    case Objective::kNll: return "nll";
    case Objective::kRwbHinge: return "rwb_hinge";
    case Objective::kRisk2: return "risk2";
    case Objective::kRisk3: return "risk3";
  }
  return "unknown";
}

Objective objective_from_string(const std::string& name) {
  if (name == "nll") return Objective::kNll;
  if (name == "rwb_hinge") return Objective::kRwbHinge;
  if (name == "risk2") return Objective::kRisk2;
  if (name == "risk3") return Objective::kRisk3;
  throw ConfigError("unknown objective '" + name +
                    "' (expected nll, rwb_hinge, risk2, or risk3)");
}

std::vector<SampleMethod> samplers_for(Objective objective) {
  switch (objective) {
    case Objective::kNll:
      return {};
    case Objective::kRwbHinge:
    case Objective::kRisk2:
      return {SampleMethod::kArgmax, SampleMethod::kGumbel};
    case Objective::kRisk3:
      return {SampleMethod::kArgmax, SampleMethod::kSecondBest, SampleMethod::kGumbel};
  }
  return {};
}

void TrainConfig::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("config: gamma must lie in [0, 1]");
  if (!(learning_rate > 0.0)) throw ConfigError("config: learning_rate must be > 0");
  if (!(clip_norm > 0.0)) throw ConfigError("config: clip_norm must be > 0");
  if (max_iterations < 1) throw ConfigError("config: max_iterations must be >= 1");
  if (validate_every < 1) throw ConfigError("config: validate_every must be >= 1");
  if (patience < validate_every || patience % validate_every != 0) {
    throw ConfigError("config: patience must be a positive multiple of validate_every");
  }
  if (!(gumbel_temperature > 0.0)) throw ConfigError("config: gumbel_temperature must be > 0");
  if (!samplers.empty() && samplers != samplers_for(objective)) {
    throw ConfigError("config: sampler recipe does not match objective " + to_string(objective));
  }
}

nlohmann::json to_json(const TrainConfig& config) {
  nlohmann::json j;
  j["objective"] = to_string(config.objective);
  j["gamma"] = config.gamma;
  j["learning_rate"] = config.learning_rate;
  j["clip_norm"] = config.clip_norm;
  j["max_iterations"] = config.max_iterations;
  j["validate_every"] = config.validate_every;
  j["patience"] = config.patience;
  j["few_shot"] = config.few_shot;
  j["seed"] = config.seed;
  j["gumbel_temperature"] = config.gumbel_temperature;
  std::vector<std::string> names;
  for (SampleMethod m : samplers_for(config.objective)) {
    switch (m) {
      case SampleMethod::kArgmax: names.emplace_back("argmax"); break;
      case SampleMethod::kSecondBest: names.emplace_back("second_best"); break;
      case SampleMethod::kGumbel: names.emplace_back("gumbel"); break;
    }
  }
  j["samplers"] = names;
  return j;
}

ValidationScores validate(Seq2SeqModel& model, const std::vector<Example>& dev) {
  if (dev.empty()) throw std::invalid_argument("validate: empty dev corpus");
  ValidationScores scores;
  for (const Example& ex : dev) {
    ad::Tape tape(/*grad_enabled=*/false);
    ProbMatrix dist = forward_teacher_forced(tape, model, ex.source, ex.summary);
    scores.loss += nll_loss(dist, ex.summary).value();
    const Candidate greedy = argmax_decode(dist);
    scores.rouge1 += rouge_n_f1(ex.summary, greedy.tokens, 1).f1;
    scores.rouge2 += rouge_n_f1(ex.summary, greedy.tokens, 2).f1;
    scores.rouge_l += rouge_l_f1(ex.summary, greedy.tokens).f1;
  }
  const double n = static_cast<double>(dev.size());
  scores.loss /= n;
  scores.rouge1 /= n;
  scores.rouge2 /= n;
  scores.rouge_l /= n;
  return scores;
}

bool early_stop(const std::vector<double>& dev_losses, long long patience_validations) {
  if (patience_validations < 1) {
    throw std::invalid_argument("early_stop: patience_validations must be >= 1");
  }
  if (dev_losses.empty()) return false;
  double running_min = dev_losses.front();
  std::size_t last_improvement = 0;
  for (std::size_t i = 1; i < dev_losses.size(); ++i) {
    if (dev_losses[i] < running_min) {
      running_min = dev_losses[i];
      last_improvement = i;
    }
  }
  const auto since = static_cast<long long>(dev_losses.size() - 1 - last_improvement);
  return since >= patience_validations;
}

RunResult train_nll(Seq2SeqModel& model, const std::vector<Example>& train,
                    const std::vector<Example>& dev, const TrainConfig& config) {
  config.validate();
  if (config.objective != Objective::kNll) {
    throw ConfigError("train_nll: config.objective must be nll");
  }
  model.nll_warm_started = true;  // snapshots below inherit the flag
  LoopSpec spec = loop_spec_from(config);
  spec.gamma = 1.0;  // pure cross-entropy regardless of the mixed weight
  return run_loop(model, train, dev, spec);
}

RunResult finetune_rl(Seq2SeqModel& model, const std::vector<Example>& train,
                      const std::vector<Example>& dev, const TrainConfig& config) {
  config.validate();
  if (config.objective == Objective::kNll) {
    throw ConfigError("finetune_rl: config.objective must be an RL objective");
  }
  if (!model.nll_warm_started && !config.allow_cold_start) {
    throw StateError(
        "finetune_rl: model is not NLL-warm-started (set allow_cold_start to override)");
  }
  return run_loop(model, train, dev, loop_spec_from(config));
}

std::vector<GammaRow> gamma_sweep(const Seq2SeqModel& warm_start,
                                  const std::vector<Example>& train,
                                  const std::vector<Example>& dev,
                                  const std::vector<double>& grid, const TrainConfig& base) {
  if (grid.empty()) throw std::invalid_argument("gamma_sweep: empty grid");
  for (double g : grid) {
    if (!(g >= 0.0 && g <= 1.0)) {
      throw std::invalid_argument("gamma_sweep: grid value outside [0, 1]");
    }
  }
  base.validate();

  std::vector<GammaRow> rows;
  rows.reserve(grid.size());
  for (double g : grid) {
    Seq2SeqModel model = warm_start;
    LoopSpec spec = loop_spec_from(base);
    spec.reinforce_proxy = true;
    spec.gamma = g;
    const RunResult result = run_loop(model, train, dev, spec);
    // Report the best checkpoint's validation row.
    GammaRow row;
    row.gamma = g;
    for (const ValidationRecord& rec : result.validations) {
      if (rec.iteration == result.best_iteration) {
        row.dev_loss = rec.dev_loss;
        row.rouge1 = rec.rouge1;
        row.rouge2 = rec.rouge2;
        row.rouge_l = rec.rouge_l;
      }
    }
    rows.push_back(row);
  }
  return rows;
}

GammaRow select_gamma(const std::vector<GammaRow>& table) {
  if (table.empty()) throw std::invalid_argument("select_gamma: empty table");
  const GammaRow* best = &table.front();
  for (const GammaRow& row : table) {
    if (row.rouge_l > best->rouge_l ||
        (row.rouge_l == best->rouge_l && row.gamma < best->gamma)) {
      best = &row;
    }
  }
  return *best;
}

void write_trace_csv(const std::string& path, const RunResult& result) {
  std::ofstream out(path);
  if (!out) throw IoError("write_trace_csv: cannot open " + path + " for writing");
  std::unordered_map<long long, const ValidationRecord*> by_iter;
  for (const ValidationRecord& rec : result.validations) by_iter[rec.iteration] = &rec;

  out << "iteration,loss,dev_loss,rouge1,rouge2,rougeL\n";
  char buf[160];
  for (std::size_t i = 0; i < result.loss_trace.size(); ++i) {
    const long long iter = static_cast<long long>(i) + 1;
    const auto it = by_iter.find(iter);
    if (it != by_iter.end()) {
      std::snprintf(buf, sizeof(buf), "%lld,%.6f,%.6f,%.4f,%.4f,%.4f\n", iter,
                    result.loss_trace[i], it->second->dev_loss, it->second->rouge1,
                    it->second->rouge2, it->second->rouge_l);
    } else {
      std::snprintf(buf, sizeof(buf), "%lld,%.6f,,,,\n", iter, result.loss_trace[i]);
    }
    out << buf;
  }
  out.close();
  if (!out) throw IoError("write_trace_csv: write to " + path + " failed");
}

nlohmann::json result_to_json(const RunResult& result) {
  nlohmann::json j;
  j["stop_reason"] = result.stop_reason;
  j["iterations_run"] = result.loss_trace.size();
  j["best_iteration"] = result.best_iteration;
  j["best_dev_loss"] = result.best_dev_loss;
  nlohmann::json vals = nlohmann::json::array();
  for (const ValidationRecord& rec : result.validations) {
    vals.push_back({{"iteration", rec.iteration},
                    {"dev_loss", rec.dev_loss},
                    {"rouge1", rec.rouge1},
                    {"rouge2", rec.rouge2},
                    {"rougeL", rec.rouge_l}});
  }
  j["validations"] = std::move(vals);
  return j;
}

}  // namespace rlsum
