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

#ifndef RLSUM_OBJECTIVES_HPP_
#define RLSUM_OBJECTIVES_HPP_

#include <vector>

#include "rlsum/autodiff.hpp"
#include "rlsum/sampling.hpp"
#include "rlsum/token_seq.hpp"

namespace rlsum {

enum class LossKind { kNll, kRwb, kRwbHinge, kRisk, kMixed };

/// A differentiable scalar loss. Construct through make_loss, which rejects
/// non-finite values.
struct LossValue {
  ad::Var node;
  LossKind kind = LossKind::kNll;

  double value() const { return node.scalar(); }
};

/// Wraps a 1x1 graph node as a loss; NaN/inf raise NumericalError.
LossValue make_loss(ad::Var node, LossKind kind);

/// Candidate summaries plus everything the expected-risk objective needs:
/// constant rewards, differentiable sequence log-probability sums, and
/// (after risk_candidate_probs) the normalized candidate probabilities.
struct CandidateSet {
  std::vector<Candidate> candidates;
  std::vector<double> rewards;
  std::vector<ad::Var> logprob_sums;      // one 1x1 node per candidate
  std::vector<ad::Var> prob_nodes;        // filled by risk_candidate_probs
  std::vector<double> normalized_probs;   // value mirror of prob_nodes

  bool probs_populated() const { return !prob_nodes.empty(); }
};

/// Differentiable log p(token_t) nodes for a candidate's tokens, one per
/// decoding slot of `dist`, floored at 1e-12. Requires the candidate length
/// to equal the slot count.
std::vector<ad::Var> candidate_logprob_nodes(const ProbMatrix& dist, const Candidate& cand);

/// Mean over slots of -log p(reference_j), probabilities floored at 1e-12.
/// Requires |reference| = row count.
LossValue nll_loss(const ProbMatrix& dist, const TokenSeq& reference);

/// Self-critical weight: -(r_sample - r_argmax), clamped to
/// -max(0, r_sample - r_argmax) when hinge is set. A plain constant; no
/// gradient ever flows through rewards.
double rwb_alpha(double r_sample, double r_argmax, bool hinge);

/// alpha * sum(sample_logprobs). When alpha == 0 the result is a constant
/// zero node contributing no gradient. The sum is deliberately not
/// length-normalized.
LossValue rwb_loss(double alpha, const std::vector<ad::Var>& sample_logprobs, bool hinge);

/// Bundles candidates (1 to 3, rewards already scored) with their sequence
/// log-probability nodes from `dist`.
CandidateSet make_candidate_set(const ProbMatrix& dist, std::vector<Candidate> candidates);

/// Per candidate k with m_k tokens: f_k = exp(logprob_sum_k / m_k), then
/// p_k = f_k / sum(f). Populates prob_nodes and normalized_probs (which sum
/// to 1 within 1e-9).
void risk_candidate_probs(CandidateSet& set);

/// Expected negative reward -sum_k r_k p_k. Rewards are constants; gradients
/// flow only through the candidate probabilities. Raises StateError if
/// risk_candidate_probs has not run.
LossValue risk_loss(const CandidateSet& set);

/// gamma * l_xent + (1-gamma) * l_rl. The endpoints gamma=1 and gamma=0
/// return the corresponding input node unchanged, so gamma=1 training is
/// bitwise-identical to pure cross-entropy.
LossValue mixed_loss(const LossValue& l_xent, const LossValue& l_rl, double gamma);

}  // namespace rlsum

#endif  // RLSUM_OBJECTIVES_HPP_
