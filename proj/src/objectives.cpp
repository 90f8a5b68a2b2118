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

#include "rlsum/objectives.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "rlsum/errors.hpp"

namespace rlsum {

namespace {

ad::Tape& tape_of(const ad::Var& v, const char* op) {
  if (!v.attached()) throw StateError(std::string(op) + ": detached node");
  return *v.tape();
}

}  // namespace

LossValue make_loss(ad::Var node, LossKind kind) {
  const double v = node.scalar();  // also rejects non-1x1 nodes
  if (!std::isfinite(v)) {
    throw NumericalError("make_loss: non-finite loss value " + std::to_string(v));
  }
  return LossValue{std::move(node), kind};
}

std::vector<ad::Var> candidate_logprob_nodes(const ProbMatrix& dist, const Candidate& cand) {
  if (cand.tokens.size() != dist.slot_count()) {
    throw std::invalid_argument("candidate_logprob_nodes: candidate length " +
                                std::to_string(cand.tokens.size()) + " != slot count " +
                                std::to_string(dist.slot_count()));
  }
  std::vector<ad::Var> nodes;
  nodes.reserve(cand.tokens.tokens.size());
  for (std::size_t t = 0; t < cand.tokens.tokens.size(); ++t) {
    nodes.push_back(ad::log_pick(dist.rows[t], cand.tokens.tokens[t], kProbFloor));
  }
  return nodes;
}

LossValue nll_loss(const ProbMatrix& dist, const TokenSeq& reference) {
  if (reference.size() != dist.slot_count()) {
    throw std::invalid_argument("nll_loss: reference length " + std::to_string(reference.size()) +
                                " != row count " + std::to_string(dist.slot_count()));
  }
  if (reference.empty()) throw std::invalid_argument("nll_loss: empty reference");
  std::vector<ad::Var> logps;
  logps.reserve(reference.tokens.size());
  for (std::size_t t = 0; t < reference.tokens.size(); ++t) {
    logps.push_back(ad::log_pick(dist.rows[t], reference.tokens[t], kProbFloor));
  }
  const double inv_m = 1.0 / static_cast<double>(reference.size());
  return make_loss(ad::affine(ad::sum(logps), -inv_m, 0.0), LossKind::kNll);
}

double rwb_alpha(double r_sample, double r_argmax, bool hinge) {
  const double advantage = r_sample - r_argmax;
  if (hinge) return -std::max(0.0, advantage);
  return -advantage;
}

LossValue rwb_loss(double alpha, const std::vector<ad::Var>& sample_logprobs, bool hinge) {
  if (sample_logprobs.empty()) throw std::invalid_argument("rwb_loss: empty log-probability list");
  const LossKind kind = hinge ? LossKind::kRwbHinge : LossKind::kRwb;
  ad::Tape& tape = tape_of(sample_logprobs.front(), "rwb_loss");
  if (alpha == 0.0) {
    // Gated update: a constant node keeps the graph free of spurious
    // gradient paths through the suppressed sample.
    return make_loss(tape.scalar_constant(0.0), kind);
  }
  return make_loss(ad::affine(ad::sum(sample_logprobs), alpha, 0.0), kind);
}

CandidateSet make_candidate_set(const ProbMatrix& dist, std::vector<Candidate> candidates) {
  if (candidates.empty() || candidates.size() > 3) {
    throw std::invalid_argument("make_candidate_set: expected 1 to 3 candidates, got " +
                                std::to_string(candidates.size()));
  }
  CandidateSet set;
  set.candidates = std::move(candidates);
  for (const Candidate& c : set.candidates) {
    if (c.tokens.empty()) throw std::invalid_argument("make_candidate_set: empty candidate");
    set.rewards.push_back(c.reward);
    set.logprob_sums.push_back(ad::sum(candidate_logprob_nodes(dist, c)));
  }
  return set;
}

void risk_candidate_probs(CandidateSet& set) {
  if (set.candidates.empty()) throw std::invalid_argument("risk_candidate_probs: empty set");
  set.prob_nodes.clear();
  set.normalized_probs.clear();

  std::vector<ad::Var> f_nodes;
  f_nodes.reserve(set.candidates.size());
  for (std::size_t k = 0; k < set.candidates.size(); ++k) {
    const double m = static_cast<double>(set.candidates[k].tokens.size());
    f_nodes.push_back(ad::exp(ad::affine(set.logprob_sums[k], 1.0 / m, 0.0)));
  }
  const ad::Var total = ad::sum(f_nodes);
  double prob_sum = 0.0;
  for (const ad::Var& f : f_nodes) {
    ad::Var p = ad::div(f, total);
    prob_sum += p.scalar();
    set.normalized_probs.push_back(p.scalar());
    set.prob_nodes.push_back(std::move(p));
  }
  if (std::abs(prob_sum - 1.0) > 1e-9) {
    throw NumericalError("risk_candidate_probs: probabilities sum to " +
                         std::to_string(prob_sum));
  }
}

LossValue risk_loss(const CandidateSet& set) {
  if (!set.probs_populated()) {
    throw StateError("risk_loss: candidate probabilities not populated");
  }
  std::vector<ad::Var> terms;
  terms.reserve(set.prob_nodes.size());
  for (std::size_t k = 0; k < set.prob_nodes.size(); ++k) {
    terms.push_back(ad::affine(set.prob_nodes[k], -set.rewards[k], 0.0));
  }
  return make_loss(ad::sum(terms), LossKind::kRisk);
}

LossValue mixed_loss(const LossValue& l_xent, const LossValue& l_rl, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("mixed_loss: gamma must lie in [0, 1], got " +
                                std::to_string(gamma));
  }
  // Exact endpoints reuse the input node so gamma=1 reproduces pure
  // cross-entropy training bit for bit.
  if (gamma == 1.0) return LossValue{l_xent.node, LossKind::kMixed};
  if (gamma == 0.0) return LossValue{l_rl.node, LossKind::kMixed};
  return make_loss(ad::add(ad::affine(l_xent.node, gamma, 0.0), ad::affine(l_rl.node, 1.0 - gamma, 0.0)),
                   LossKind::kMixed);
}

}  // namespace rlsum
