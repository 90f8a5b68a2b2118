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

#include "rlsum/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <unordered_map>
#include <utility>

#include "json.hpp"
#include "rlsum/errors.hpp"
#include "rlsum/rng.hpp"
#include "rlsum/text_metrics.hpp"

namespace rlsum {

namespace {

std::string join_words(const std::vector<std::string>& words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i > 0) out += ' ';
    out += words[i];
  }
  return out;
}

std::string example_id(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "syn-%06d", index);
  return buf;
}

std::vector<int> apply_rule(const SyntheticTaskSpec& spec, const std::vector<int>& source) {
  std::vector<int> summary;
  switch (spec.rule) {
    case SyntheticRule::kLeadK: {
      const int k = std::min<int>(spec.lead_k, static_cast<int>(source.size()));
      summary.assign(source.begin(), source.begin() + k);
      break;
    }
    case SyntheticRule::kKeywordExtract: {
      const int kw_end = kNumReservedIds + spec.num_keywords;
      for (int tok : source) {
        if (tok < kw_end) summary.push_back(tok);
      }
      break;
    }
    case SyntheticRule::kSortedUnique: {
      summary = source;
      std::sort(summary.begin(), summary.end());
      summary.erase(std::unique(summary.begin(), summary.end()), summary.end());
      break;
    }
  }
  if (static_cast<int>(summary.size()) > spec.max_target_tokens) {
    summary.resize(static_cast<std::size_t>(spec.max_target_tokens));
  }
  return summary;
}

void apply_noise(const SyntheticTaskSpec& spec, std::vector<int>& summary, Rng& rng) {
  if (spec.noise_rate <= 0.0) return;
  for (int& tok : summary) {
    if (rng.uniform() >= spec.noise_rate) continue;
    const int content = tok - kNumReservedIds;
    const int base = (content / spec.synonym_class_size) * spec.synonym_class_size;
    const int class_size = std::min(spec.synonym_class_size, spec.vocab_size - base);
    if (class_size < 2) continue;  // singleton class: nothing to flip to
    int picked = base + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(class_size - 1)));
    if (picked >= content) ++picked;  // skip the original member
    tok = kNumReservedIds + picked;
  }
}

}  // namespace

void SyntheticTaskSpec::validate() const {
  if (vocab_size < 1) throw std::invalid_argument("SyntheticTaskSpec: vocab_size must be >= 1");
  if (source_len_min < 1 || source_len_max < source_len_min) {
    throw std::invalid_argument("SyntheticTaskSpec: source length range is empty");
  }
  if (source_len_max > max_source_tokens) {
    throw std::invalid_argument("SyntheticTaskSpec: source_len_max exceeds max_source_tokens");
  }
  if (!(noise_rate >= 0.0 && noise_rate < 0.5)) {
    throw std::invalid_argument("SyntheticTaskSpec: noise_rate must lie in [0, 0.5)");
  }
  if (lead_k < 1) throw std::invalid_argument("SyntheticTaskSpec: lead_k must be >= 1");
  if (num_keywords < 1 || num_keywords > vocab_size) {
    throw std::invalid_argument("SyntheticTaskSpec: num_keywords must lie in [1, vocab_size]");
  }
  if (synonym_class_size < 1) {
    throw std::invalid_argument("SyntheticTaskSpec: synonym_class_size must be >= 1");
  }
  if (max_source_tokens < 1 || max_target_tokens < 1) {
    throw std::invalid_argument("SyntheticTaskSpec: sequence caps must be >= 1");
  }
}

SyntheticCorpus generate_synthetic(const SyntheticTaskSpec& spec, int n_examples) {
  spec.validate();
  if (n_examples < 1) throw std::invalid_argument("generate_synthetic: n_examples must be >= 1");

  SyntheticCorpus corpus;
  const int model_vocab = spec.vocab_size + kNumReservedIds;
  for (int id = kNumReservedIds; id < model_vocab; ++id) {
    corpus.vocab.add("w" + std::to_string(id));
  }

  // Noise draws live on their own substream so that corpora generated from
  // one seed share sources and rule outputs across different noise rates.
  Rng rng(Rng::derive(spec.seed, 0));
  Rng noise_rng(Rng::derive(spec.seed, 1));
  corpus.examples.reserve(static_cast<std::size_t>(n_examples));
  for (int n = 0; n < n_examples; ++n) {
    const int span = spec.source_len_max - spec.source_len_min + 1;
    const int len = spec.source_len_min + static_cast<int>(rng.uniform_int(span));
    std::vector<int> source(static_cast<std::size_t>(len));
    for (int& tok : source) {
      tok = kNumReservedIds + static_cast<int>(rng.uniform_int(spec.vocab_size));
    }
    if (spec.rule == SyntheticRule::kKeywordExtract) {
      // Guarantee a non-empty summary: force one keyword if none landed.
      const int kw_end = kNumReservedIds + spec.num_keywords;
      const bool has_kw = std::any_of(source.begin(), source.end(),
                                      [kw_end](int t) { return t < kw_end; });
      if (!has_kw) {
        const auto pos = static_cast<std::size_t>(rng.uniform_int(source.size()));
        source[pos] = kNumReservedIds + static_cast<int>(rng.uniform_int(spec.num_keywords));
      }
    }
    std::vector<int> summary = apply_rule(spec, source);
    apply_noise(spec, summary, noise_rng);

    Example ex;
    ex.id = example_id(n);
    ex.source = TokenSeq(std::move(source), model_vocab);
    ex.summary = TokenSeq(std::move(summary), model_vocab);
    corpus.examples.push_back(std::move(ex));
  }
  return corpus;
}

std::vector<RawExample> load_jsonl(const std::string& path, bool strict,
                                   std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw IoError("load_jsonl: cannot open " + path);

  std::vector<RawExample> corpus;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

    std::string problem;
    RawExample raw;
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      if (!j.is_object()) {
        problem = "not a JSON object";
      } else if (!j.contains("source") || !j["source"].is_string()) {
        problem = "missing string field \"source\"";
      } else if (!j.contains("summary") || !j["summary"].is_string()) {
        problem = "missing string field \"summary\"";
      } else {
        raw.source = tokenize(j["source"].get<std::string>());
        raw.summary = tokenize(j["summary"].get<std::string>());
        raw.id = j.value("id", "line-" + std::to_string(lineno));
        if (raw.source.empty()) problem = "source tokenizes to nothing";
        else if (raw.summary.empty()) problem = "summary tokenizes to nothing";
      }
    } catch (const nlohmann::json::exception& e) {
      problem = e.what();
    }

    if (!problem.empty()) {
      const std::string msg = path + ":" + std::to_string(lineno) + ": " + problem;
      if (strict) throw ParseError("load_jsonl: " + msg);
      if (warnings != nullptr) warnings->push_back(msg);
      continue;
    }
    corpus.push_back(std::move(raw));
  }
  if (corpus.empty() && warnings != nullptr) {
    warnings->push_back(path + ": no usable examples");
  }
  return corpus;
}

void save_jsonl(const std::string& path, const std::vector<RawExample>& corpus) {
  std::ofstream out(path);
  if (!out) throw IoError("save_jsonl: cannot open " + path + " for writing");
  for (const RawExample& ex : corpus) {
    nlohmann::json j;
    j["id"] = ex.id;
    j["source"] = join_words(ex.source);
    j["summary"] = join_words(ex.summary);
    out << j.dump() << '\n';
  }
  out.close();
  if (!out) throw IoError("save_jsonl: write to " + path + " failed");
}

RawExample to_raw(const Example& ex, const Vocabulary& vocab) {
  RawExample raw;
  raw.id = ex.id;
  raw.source = vocab.decode(ex.source.tokens);
  raw.summary = vocab.decode(ex.summary.tokens);
  return raw;
}

Vocabulary build_vocab(const std::vector<RawExample>& corpus, int max_size) {
  if (corpus.empty()) throw std::invalid_argument("build_vocab: empty corpus");
  if (max_size < kNumReservedIds + 1) {
    throw std::invalid_argument("build_vocab: max_size must be >= " +
                                std::to_string(kNumReservedIds + 1));
  }
  std::unordered_map<std::string, long long> freq;
  for (const RawExample& ex : corpus) {
    for (const std::string& w : ex.source) ++freq[w];
    for (const std::string& w : ex.summary) ++freq[w];
  }
  std::vector<std::pair<std::string, long long>> ranked(freq.begin(), freq.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  Vocabulary vocab;
  const std::size_t budget = static_cast<std::size_t>(max_size - kNumReservedIds);
  for (std::size_t i = 0; i < ranked.size() && i < budget; ++i) vocab.add(ranked[i].first);
  return vocab;
}

std::vector<Example> encode_corpus(const std::vector<RawExample>& corpus, const Vocabulary& vocab,
                                   int max_source_tokens, int max_target_tokens) {
  if (max_source_tokens < 1 || max_target_tokens < 1) {
    throw std::invalid_argument("encode_corpus: sequence caps must be >= 1");
  }
  std::vector<Example> out;
  out.reserve(corpus.size());
  for (const RawExample& raw : corpus) {
    std::vector<int> src = vocab.encode(raw.source);
    std::vector<int> sum = vocab.encode(raw.summary);
    if (static_cast<int>(src.size()) > max_source_tokens) {
      src.resize(static_cast<std::size_t>(max_source_tokens));
    }
    if (static_cast<int>(sum.size()) > max_target_tokens) {
      sum.resize(static_cast<std::size_t>(max_target_tokens));
    }
    Example ex;
    ex.id = raw.id;
    ex.source = TokenSeq(std::move(src), vocab.size());
    ex.summary = TokenSeq(std::move(sum), vocab.size());
    out.push_back(std::move(ex));
  }
  return out;
}

SplitCorpus split(const std::vector<Example>& corpus, double train_frac, double dev_frac,
                  double test_frac, std::uint64_t seed, int few_shot_cap) {
  const double sum = train_frac + dev_frac + test_frac;
  if (train_frac < 0.0 || dev_frac < 0.0 || test_frac < 0.0 || std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("split: fractions must be non-negative and sum to 1");
  }

  std::vector<std::size_t> order(corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  const auto n = static_cast<long long>(corpus.size());
  long long n_train = std::llround(train_frac * static_cast<double>(n));
  long long n_dev = std::llround(dev_frac * static_cast<double>(n));
  n_train = std::min(n_train, n);
  n_dev = std::min(n_dev, n - n_train);

  SplitCorpus result;
  for (long long i = 0; i < n; ++i) {
    const Example& ex = corpus[order[static_cast<std::size_t>(i)]];
    if (i < n_train) result.train.push_back(ex);
    else if (i < n_train + n_dev) result.dev.push_back(ex);
    else result.test.push_back(ex);
  }
  if (few_shot_cap > 0 && static_cast<int>(result.train.size()) > few_shot_cap) {
    result.train.resize(static_cast<std::size_t>(few_shot_cap));
  }
  return result;
}

}  // namespace rlsum
