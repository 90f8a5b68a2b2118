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

#ifndef RLSUM_TRAINING_HPP_
#define RLSUM_TRAINING_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "rlsum/data.hpp"
#include "rlsum/model.hpp"
#include "rlsum/sampling.hpp"

namespace rlsum {

enum class Objective { kNll, kRwbHinge, kRisk2, kRisk3 };

std::string to_string(Objective objective);
/// Throws ConfigError on unknown names.
Objective objective_from_string(const std::string& name);

/// The fixed candidate recipe for each objective: rwb_hinge and risk2 decode
/// argmax + Gumbel; risk3 adds the second-best decode; nll uses none.
std::vector<SampleMethod> samplers_for(Objective objective);

/// One training phase's knobs. The two-phase protocol runs train_nll with
/// objective=nll, then finetune_rl with one of the RL objectives.
struct TrainConfig {
  Objective objective = Objective::kNll;
  double gamma = 0.9;  // weight of the cross-entropy term in the mixed loss
  double learning_rate = 5e-4;
  double clip_norm = 1.0;
  long long max_iterations = 2000;
  long long validate_every = 200;
  long long patience = 600;  // iterations without dev-loss improvement
  bool few_shot = true;      // fixed budget, checkpoint selection only
  std::uint64_t seed = 42;
  double gumbel_temperature = 0.1;
  bool allow_cold_start = false;  // lifts finetune_rl's warm-start guard

  /// Explicit sampler list; empty means "derive from objective". A non-empty
  /// list that disagrees with samplers_for(objective) is a ConfigError.
  std::vector<SampleMethod> samplers;

  /// Throws ConfigError on any out-of-range field or recipe mismatch.
  void validate() const;
};

nlohmann::json to_json(const TrainConfig& config);

struct ValidationRecord {
  long long iteration = 0;
  double dev_loss = 0.0;
  double rouge1 = 0.0;
  double rouge2 = 0.0;
  double rouge_l = 0.0;
};

/// Outcome of one training phase. best_model is the parameter snapshot at
/// the validation with the lowest dev loss (earliest wins ties); the final
/// iteration is always validated, so at least one record exists.
struct RunResult {
  std::vector<double> loss_trace;  // one entry per iteration
  std::vector<ValidationRecord> validations;
  Seq2SeqModel best_model;
  long long best_iteration = 0;
  double best_dev_loss = 0.0;
  std::string stop_reason;  // "max_iterations" or "early_stop"
};

/// Mean teacher-forced NLL over dev plus corpus-mean ROUGE-1/2/L F1 of the
/// argmax decodes. Read-only with respect to the model; idempotent.
struct ValidationScores {
  double loss = 0.0;
  double rouge1 = 0.0;
  double rouge2 = 0.0;
  double rouge_l = 0.0;
};
ValidationScores validate(Seq2SeqModel& model, const std::vector<Example>& dev);

/// True iff the running minimum of dev_losses has not strictly improved
/// within the last patience_validations entries.
bool early_stop(const std::vector<double>& dev_losses, long long patience_validations);

/// Cross-entropy training, batch size 1, shuffled epochs. Few-shot mode runs
/// the full iteration budget and selects by dev loss; otherwise early
/// stopping applies. Marks the model (and snapshots) nll_warm_started.
RunResult train_nll(Seq2SeqModel& model, const std::vector<Example>& train,
                    const std::vector<Example>& dev, const TrainConfig& config);

/// RL fine-tuning: per example, teacher-forced forward, candidates per the
/// objective's recipe, rewards from summary-level LCS F1 against the
/// reference, then gamma * L_XENT + (1-gamma) * L_RL. Requires an
/// NLL-warm-started model unless config.allow_cold_start. The sample rng is
/// a separate stream from the example-order rng, so gamma=1 reproduces
/// train_nll's trace exactly.
RunResult finetune_rl(Seq2SeqModel& model, const std::vector<Example>& train,
                      const std::vector<Example>& dev, const TrainConfig& config);

struct GammaRow {
  double gamma = 0.0;
  double dev_loss = 0.0;
  double rouge1 = 0.0;
  double rouge2 = 0.0;
  double rouge_l = 0.0;
};

/// For each grid value, fine-tunes a copy of the same warm-started model
/// with a single-Gumbel-sample REINFORCE proxy (reward itself as the weight,
/// no baseline) and reports the best checkpoint's dev scores. Single seed;
/// the iteration budget is base.max_iterations, conventionally set to the
/// warm-start phase's iteration count.
std::vector<GammaRow> gamma_sweep(const Seq2SeqModel& warm_start,
                                  const std::vector<Example>& train,
                                  const std::vector<Example>& dev,
                                  const std::vector<double>& grid, const TrainConfig& base);

/// Row with the highest dev ROUGE-L; ties break toward the lowest gamma.
GammaRow select_gamma(const std::vector<GammaRow>& table);

/// trace.csv: iteration,loss,dev_loss,rouge1,rouge2,rougeL with dev columns
/// populated only on validation iterations.
void write_trace_csv(const std::string& path, const RunResult& result);

/// result.json: stop reason, best iteration, and the validation records.
nlohmann::json result_to_json(const RunResult& result);

}  // namespace rlsum

#endif  // RLSUM_TRAINING_HPP_
