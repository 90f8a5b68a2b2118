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

#ifndef RLSUM_DATA_HPP_
#define RLSUM_DATA_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "rlsum/token_seq.hpp"

namespace rlsum {

/// Default sequence caps applied when encoding corpora.
inline constexpr int kMaxSourceTokens = 64;
inline constexpr int kMaxTargetTokens = 16;
/// Few-shot training truncates the train split to this many examples.
inline constexpr int kFewShotTrainExamples = 1000;

/// A (source, reference summary) pair over a shared vocabulary.
struct Example {
  TokenSeq source;
  TokenSeq summary;
  std::string id;
};

/// An example still in word form, straight from JSONL tokenization.
struct RawExample {
  std::vector<std::string> source;
  std::vector<std::string> summary;
  std::string id;
};

enum class SyntheticRule { kLeadK, kKeywordExtract, kSortedUnique };

/// Recipe for a deterministic synthetic summarization corpus. Content words
/// occupy ids 4..vocab_size+3 (after the reserved ids) and are spelled
/// "w4", "w5", ... so corpora survive a JSONL round trip verbatim.
///
/// Rules: lead_k copies the first k source tokens; keyword_extract copies,
/// in order, the source tokens belonging to the first num_keywords content
/// words; sorted_unique lists the distinct source tokens in ascending id
/// order. Consecutive content ids form synonym classes of
/// synonym_class_size; noise flips each summary token, with probability
/// noise_rate, to a uniformly random other member of its class.
struct SyntheticTaskSpec {
  int vocab_size = 16;  // content words, excluding the 4 reserved ids
  int source_len_min = 4;
  int source_len_max = 12;
  SyntheticRule rule = SyntheticRule::kLeadK;
  double noise_rate = 0.0;  // must stay below 0.5
  std::uint64_t seed = 0;

  int lead_k = 3;
  int num_keywords = 5;
  int synonym_class_size = 4;
  int max_source_tokens = kMaxSourceTokens;
  int max_target_tokens = kMaxTargetTokens;

  /// Throws std::invalid_argument if any field is out of range.
  void validate() const;
};

/// A generated corpus together with the vocabulary that maps its ids to
/// word strings.
struct SyntheticCorpus {
  std::vector<Example> examples;
  Vocabulary vocab;
};

struct SplitCorpus {
  std::vector<Example> train;
  std::vector<Example> dev;
  std::vector<Example> test;
};

/// Deterministically generates n_examples examples from the task recipe.
/// With noise_rate = 0 the rule itself is a perfect-reward policy.
SyntheticCorpus generate_synthetic(const SyntheticTaskSpec& spec, int n_examples);

/// Reads one JSON object per line with string fields "source" and "summary"
/// (optional "id"), tokenizing both. Malformed or empty-field lines abort
/// with a line-numbered ParseError in strict mode; otherwise they are
/// skipped and described in *warnings. Missing file raises IoError.
std::vector<RawExample> load_jsonl(const std::string& path, bool strict,
                                   std::vector<std::string>* warnings = nullptr);

/// Writes the corpus as JSONL (UTF-8, LF line endings).
void save_jsonl(const std::string& path, const std::vector<RawExample>& corpus);

/// Decodes an example back to word form for serialization.
RawExample to_raw(const Example& ex, const Vocabulary& vocab);

/// Ranks tokens by frequency (then lexicographically) across sources and
/// summaries and keeps the top max_size-4 after the reserved ids.
/// Requires a non-empty corpus and max_size >= 5.
Vocabulary build_vocab(const std::vector<RawExample>& corpus, int max_size);

/// Encodes words to ids (unknowns map to unk), truncating to the caps.
std::vector<Example> encode_corpus(const std::vector<RawExample>& corpus, const Vocabulary& vocab,
                                   int max_source_tokens = kMaxSourceTokens,
                                   int max_target_tokens = kMaxTargetTokens);

/// Shuffles with the seed and partitions by the fractions (must sum to 1
/// within 1e-9, each >= 0). few_shot_cap > 0 truncates the train split to
/// at most that many examples after partitioning.
SplitCorpus split(const std::vector<Example>& corpus, double train_frac, double dev_frac,
                  double test_frac, std::uint64_t seed, int few_shot_cap = 0);

}  // namespace rlsum

#endif  // RLSUM_DATA_HPP_
