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

#include "rlsum/cli.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "rlsum/analysis.hpp"
#include "rlsum/checkpoint.hpp"
#include "rlsum/data.hpp"
#include "rlsum/errors.hpp"
#include "rlsum/objectives.hpp"
#include "rlsum/text_metrics.hpp"
#include "rlsum/training.hpp"

namespace rlsum {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// ----- config resolution -------------------------------------------------

json default_config() {
  return json{
      {"objective", "nll"},
      {"gamma", 0.9},
      {"learning_rate", 5e-4},
      {"clip_norm", 1.0},
      {"max_iterations", 2000},
      {"validate_every", 200},
      {"patience", 600},
      {"few_shot", true},
      {"seed", 42},
      {"gumbel_temperature", 0.1},
      {"hidden_size", 32},
      {"max_vocab", 64},
      {"train_frac", 0.8},
      {"dev_frac", 0.1},
      {"test_frac", 0.1},
      {"split_seed", 1234},
      {"max_source_tokens", kMaxSourceTokens},
      {"max_target_tokens", kMaxTargetTokens},
      {"grid", {0.1, 0.3, 0.5, 0.7, 0.9}},
      {"sweep_max_iterations", 0},  // 0: inherit the warm start's iteration count
      {"resamples", 10000},
      {"alpha", 0.05},
      {"bootstrap_seed", 0},
      {"bucket_edges", {4, 8, 12, 16}},
      {"format", "csv"},
      {"task",
       {{"vocab_size", 16},
        {"source_len_min", 4},
        {"source_len_max", 12},
        {"rule", "lead_k"},
        {"noise_rate", 0.0},
        {"seed", 0},
        {"lead_k", 3},
        {"num_keywords", 5},
        {"synonym_class_size", 4}}},
  };
}

bool same_kind(const json& a, const json& b) {
  if (a.is_number() && b.is_number()) return true;
  if (a.is_boolean() && b.is_boolean()) return true;
  if (a.is_string() && b.is_string()) return true;
  if (a.is_array() && b.is_array()) return true;
  if (a.is_object() && b.is_object()) return true;
  return false;
}

void merge_config(json& base, const json& patch, const std::string& prefix) {
  for (const auto& [key, value] : patch.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!base.contains(key)) throw ConfigError("unknown config key '" + path + "'");
    if (base[key].is_object()) {
      if (!value.is_object()) throw ConfigError("config key '" + path + "' must be an object");
      merge_config(base[key], value, path);
      continue;
    }
    if (!same_kind(base[key], value)) {
      throw ConfigError("config key '" + path + "' has the wrong type");
    }
    base[key] = value;
  }
}

void apply_set_override(json& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("--set expects key=value, got '" + assignment + "'");
  }
  const std::string key_path = assignment.substr(0, eq);
  const std::string value_text = assignment.substr(eq + 1);

  json* node = &cfg;
  std::size_t start = 0;
  std::string leaf = key_path;
  while (true) {
    const auto dot = key_path.find('.', start);
    const std::string part = key_path.substr(start, dot - start);
    if (!node->contains(part)) throw ConfigError("unknown config key '" + key_path + "'");
    if (dot == std::string::npos) {
      leaf = part;
      break;
    }
    node = &(*node)[part];
    if (!node->is_object()) throw ConfigError("config key '" + key_path + "' has no sub-keys");
    start = dot + 1;
  }

  json parsed;
  try {
    parsed = json::parse(value_text);
  } catch (const json::exception&) {
    parsed = value_text;  // unquoted strings are taken verbatim
  }
  if (!same_kind((*node)[leaf], parsed)) {
    // A bare word failed + kinds differ: the value really is malformed.
    throw ConfigError("config key '" + key_path + "' has the wrong type");
  }
  (*node)[leaf] = parsed;
}

json resolve_config(const std::string& config_path, const std::vector<std::string>& sets) {
  json cfg = default_config();

  if (const char* env = std::getenv("RLSUM_SEED")) {
    try {
      const unsigned long long seed = std::stoull(env);
      cfg["seed"] = seed;
      cfg["task"]["seed"] = seed;
    } catch (const std::exception&) {
      throw ConfigError("RLSUM_SEED is not an unsigned integer: '" + std::string(env) + "'");
    }
  }

  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw IoError("cannot open config file " + config_path);
    json file_cfg;
    try {
      in >> file_cfg;
    } catch (const json::exception& e) {
      throw ParseError("config file " + config_path + ": " + e.what());
    }
    if (!file_cfg.is_object()) throw ParseError("config file " + config_path + ": not an object");
    merge_config(cfg, file_cfg, "");
  }

  for (const std::string& s : sets) apply_set_override(cfg, s);
  return cfg;
}

template <typename T>
T get_field(const json& cfg, const std::string& key) {
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + key + "' is missing or has the wrong type");
  }
}

TrainConfig train_config_from(const json& cfg) {
  TrainConfig c;
  c.objective = objective_from_string(get_field<std::string>(cfg, "objective"));
  c.gamma = get_field<double>(cfg, "gamma");
  c.learning_rate = get_field<double>(cfg, "learning_rate");
  c.clip_norm = get_field<double>(cfg, "clip_norm");
  c.max_iterations = get_field<long long>(cfg, "max_iterations");
  c.validate_every = get_field<long long>(cfg, "validate_every");
  c.patience = get_field<long long>(cfg, "patience");
  c.few_shot = get_field<bool>(cfg, "few_shot");
  c.seed = get_field<std::uint64_t>(cfg, "seed");
  c.gumbel_temperature = get_field<double>(cfg, "gumbel_temperature");
  return c;
}

SyntheticRule rule_from_string(const std::string& name) {
  if (name == "lead_k") return SyntheticRule::kLeadK;
  if (name == "keyword_extract") return SyntheticRule::kKeywordExtract;
  if (name == "sorted_unique") return SyntheticRule::kSortedUnique;
  throw ConfigError("unknown config value task.rule='" + name +
                    "' (expected lead_k, keyword_extract, or sorted_unique)");
}

SyntheticTaskSpec task_spec_from(const json& cfg) {
  const json& t = cfg.at("task");
  SyntheticTaskSpec spec;
  spec.vocab_size = get_field<int>(t, "vocab_size");
  spec.source_len_min = get_field<int>(t, "source_len_min");
  spec.source_len_max = get_field<int>(t, "source_len_max");
  spec.rule = rule_from_string(get_field<std::string>(t, "rule"));
  spec.noise_rate = get_field<double>(t, "noise_rate");
  spec.seed = get_field<std::uint64_t>(t, "seed");
  spec.lead_k = get_field<int>(t, "lead_k");
  spec.num_keywords = get_field<int>(t, "num_keywords");
  spec.synonym_class_size = get_field<int>(t, "synonym_class_size");
  spec.max_source_tokens = get_field<int>(cfg, "max_source_tokens");
  spec.max_target_tokens = get_field<int>(cfg, "max_target_tokens");
  return spec;
}

// ----- shared plumbing ---------------------------------------------------

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
  out.close();
  if (!out) throw IoError("write to " + path + " failed");
}

void make_output_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
}

// Every command persists its resolved configuration before doing real work.
void persist_config(const std::string& dir, const json& cfg) {
  write_json_file((fs::path(dir) / "config_resolved.json").string(), cfg);
}

std::vector<Example> load_encoded_corpus(const std::string& path, const Vocabulary& vocab,
                                         const json& cfg) {
  std::vector<std::string> warnings;
  const std::vector<RawExample> raw = load_jsonl(path, /*strict=*/false, &warnings);
  for (const std::string& w : warnings) std::cerr << "warning: " << w << '\n';
  if (raw.empty()) throw ParseError("corpus " + path + " contains no usable examples");
  return encode_corpus(raw, vocab, get_field<int>(cfg, "max_source_tokens"),
                       get_field<int>(cfg, "max_target_tokens"));
}

SplitCorpus split_from_config(const std::vector<Example>& corpus, const json& cfg) {
  const bool few_shot = get_field<bool>(cfg, "few_shot");
  return split(corpus, get_field<double>(cfg, "train_frac"), get_field<double>(cfg, "dev_frac"),
               get_field<double>(cfg, "test_frac"), get_field<std::uint64_t>(cfg, "split_seed"),
               few_shot ? kFewShotTrainExamples : 0);
}

std::string resolve_checkpoint_path(const std::string& path) {
  if (fs::is_directory(path)) return (fs::path(path) / "best.ckpt.json").string();
  return path;
}

void write_run_artifacts(const std::string& dir, const RunResult& result,
                         const Seq2SeqModel& final_model, const Vocabulary& vocab,
                         const json& cfg) {
  write_trace_csv((fs::path(dir) / "trace.csv").string(), result);
  write_json_file((fs::path(dir) / "result.json").string(), result_to_json(result));
  Seq2SeqModel best = result.best_model;
  save_checkpoint((fs::path(dir) / "best.ckpt.json").string(), best, vocab, cfg);
  save_checkpoint((fs::path(dir) / "final.ckpt.json").string(), final_model, vocab, cfg);
}

std::string join_words(const std::vector<std::string>& words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i > 0) out += ' ';
    out += words[i];
  }
  return out;
}

// ----- command implementations -------------------------------------------

int cmd_gen_data(const json& cfg, int n_examples, const std::string& out_path) {
  if (n_examples < 1) throw ConfigError("--n must be >= 1");
  fs::path parent = fs::path(out_path).parent_path();
  if (parent.empty()) parent = ".";
  make_output_dir(parent.string());
  persist_config(parent.string(), cfg);

  const SyntheticTaskSpec spec = task_spec_from(cfg);
  const SyntheticCorpus corpus = generate_synthetic(spec, n_examples);
  std::vector<RawExample> raw;
  raw.reserve(corpus.examples.size());
  for (const Example& ex : corpus.examples) raw.push_back(to_raw(ex, corpus.vocab));
  save_jsonl(out_path, raw);
  std::cout << "wrote " << raw.size() << " examples to " << out_path << '\n';
  return 0;
}

int cmd_train(const json& cfg, const std::string& corpus_path, const std::string& out_dir) {
  make_output_dir(out_dir);
  persist_config(out_dir, cfg);

  std::vector<std::string> warnings;
  const std::vector<RawExample> raw = load_jsonl(corpus_path, /*strict=*/false, &warnings);
  for (const std::string& w : warnings) std::cerr << "warning: " << w << '\n';
  if (raw.empty()) throw ParseError("corpus " + corpus_path + " contains no usable examples");
  const Vocabulary vocab = build_vocab(raw, get_field<int>(cfg, "max_vocab"));
  const std::vector<Example> corpus = encode_corpus(raw, vocab,
                                                    get_field<int>(cfg, "max_source_tokens"),
                                                    get_field<int>(cfg, "max_target_tokens"));
  const SplitCorpus parts = split_from_config(corpus, cfg);

  const TrainConfig config = train_config_from(cfg);
  Seq2SeqModel model =
      init_model(vocab.size(), get_field<int>(cfg, "hidden_size"), config.seed);
  const RunResult result = train_nll(model, parts.train, parts.dev, config);
  write_run_artifacts(out_dir, result, model, vocab, cfg);
  std::cout << "train: " << result.loss_trace.size() << " iterations, best dev loss "
            << result.best_dev_loss << " at iteration " << result.best_iteration << '\n';
  return 0;
}

int cmd_finetune(const json& cfg, const std::string& corpus_path, const std::string& warm_start,
                 const std::string& out_dir) {
  make_output_dir(out_dir);
  persist_config(out_dir, cfg);

  LoadedCheckpoint ckpt = load_checkpoint(resolve_checkpoint_path(warm_start));
  const std::vector<Example> corpus = load_encoded_corpus(corpus_path, ckpt.vocab, cfg);
  const SplitCorpus parts = split_from_config(corpus, cfg);

  const TrainConfig config = train_config_from(cfg);
  const RunResult result = finetune_rl(ckpt.model, parts.train, parts.dev, config);
  write_run_artifacts(out_dir, result, ckpt.model, ckpt.vocab, cfg);
  std::cout << "finetune[" << to_string(config.objective) << "]: "
            << result.loss_trace.size() << " iterations, best dev loss " << result.best_dev_loss
            << " at iteration " << result.best_iteration << '\n';
  return 0;
}

int cmd_sweep_gamma(const json& cfg, const std::string& corpus_path,
                    const std::string& warm_start, const std::string& out_dir) {
  make_output_dir(out_dir);
  persist_config(out_dir, cfg);

  LoadedCheckpoint ckpt = load_checkpoint(resolve_checkpoint_path(warm_start));
  const std::vector<Example> corpus = load_encoded_corpus(corpus_path, ckpt.vocab, cfg);
  const SplitCorpus parts = split_from_config(corpus, cfg);

  TrainConfig base = train_config_from(cfg);
  const auto cap = get_field<long long>(cfg, "sweep_max_iterations");
  base.max_iterations = cap > 0 ? cap : ckpt.model.iterations_trained;
  if (base.max_iterations < 1) {
    throw ConfigError("sweep_max_iterations is 0 and the warm start has no training history");
  }
  const auto grid = get_field<std::vector<double>>(cfg, "grid");

  const std::vector<GammaRow> rows = gamma_sweep(ckpt.model, parts.train, parts.dev, grid, base);

  std::ofstream out((fs::path(out_dir) / "sweep.csv").string());
  if (!out) throw IoError("cannot open " + out_dir + "/sweep.csv for writing");
  out << "gamma,dev_loss,rouge1,rouge2,rougeL\n";
  char buf[128];
  for (const GammaRow& row : rows) {
    std::snprintf(buf, sizeof(buf), "%.2f,%.6f,%.4f,%.4f,%.4f\n", row.gamma, row.dev_loss,
                  row.rouge1, row.rouge2, row.rouge_l);
    out << buf;
  }
  out.close();
  if (!out) throw IoError("write to " + out_dir + "/sweep.csv failed");

  const GammaRow best = select_gamma(rows);
  write_json_file((fs::path(out_dir) / "selected.json").string(),
                  json{{"gamma", best.gamma},
                       {"dev_loss", best.dev_loss},
                       {"rouge1", best.rouge1},
                       {"rouge2", best.rouge2},
                       {"rougeL", best.rouge_l}});
  std::cout << "sweep: selected gamma " << best.gamma << " (dev ROUGE-L " << best.rouge_l
            << ")\n";
  return 0;
}

int cmd_evaluate(const json& cfg, const std::string& corpus_path, const std::string& ckpt_path,
                 const std::string& split_name, const std::string& out_dir) {
  make_output_dir(out_dir);
  persist_config(out_dir, cfg);

  LoadedCheckpoint ckpt = load_checkpoint(resolve_checkpoint_path(ckpt_path));
  const std::vector<Example> corpus = load_encoded_corpus(corpus_path, ckpt.vocab, cfg);

  const std::vector<Example>* chosen = &corpus;
  SplitCorpus parts;
  if (split_name != "all") {
    parts = split_from_config(corpus, cfg);
    if (split_name == "train") chosen = &parts.train;
    else if (split_name == "dev") chosen = &parts.dev;
    else if (split_name == "test") chosen = &parts.test;
    else throw ConfigError("--split must be train, dev, test, or all");
  }
  if (chosen->empty()) throw ConfigError("selected split '" + split_name + "' is empty");

  std::ofstream decodes((fs::path(out_dir) / "decodes.jsonl").string());
  if (!decodes) throw IoError("cannot open " + out_dir + "/decodes.jsonl for writing");

  double loss = 0.0, r1 = 0.0, r2 = 0.0, rl = 0.0;
  for (const Example& ex : *chosen) {
    ad::Tape tape(/*grad_enabled=*/false);
    ProbMatrix dist = forward_teacher_forced(tape, ckpt.model, ex.source, ex.summary);
    const double ex_loss = nll_loss(dist, ex.summary).value();
    const Candidate greedy = argmax_decode(dist);
    const double ex_r1 = rouge_n_f1(ex.summary, greedy.tokens, 1).f1;
    const double ex_r2 = rouge_n_f1(ex.summary, greedy.tokens, 2).f1;
    const double ex_rl = rouge_l_f1(ex.summary, greedy.tokens).f1;
    loss += ex_loss;
    r1 += ex_r1;
    r2 += ex_r2;
    rl += ex_rl;
    decodes << json{{"id", ex.id},
                    {"source", join_words(ckpt.vocab.decode(ex.source.tokens))},
                    {"reference", join_words(ckpt.vocab.decode(ex.summary.tokens))},
                    {"decode", join_words(ckpt.vocab.decode(greedy.tokens.tokens))},
                    {"nll", ex_loss},
                    {"rouge1", ex_r1},
                    {"rouge2", ex_r2},
                    {"rougeL", ex_rl}}
                .dump()
            << '\n';
  }
  decodes.close();
  if (!decodes) throw IoError("write to " + out_dir + "/decodes.jsonl failed");

  const double n = static_cast<double>(chosen->size());
  const json metrics{{"split", split_name}, {"count", chosen->size()},
                     {"loss", loss / n},    {"rouge1", r1 / n},
                     {"rouge2", r2 / n},    {"rougeL", rl / n}};
  write_json_file((fs::path(out_dir) / "metrics.json").string(), metrics);
  std::cout << "evaluate[" << split_name << "]: ROUGE-1/2/L " << metrics["rouge1"] << '/'
            << metrics["rouge2"] << '/' << metrics["rougeL"] << " over " << chosen->size()
            << " examples\n";
  return 0;
}

struct DecodeFile {
  std::string name;
  std::vector<std::string> ids;
  std::vector<std::vector<std::string>> sources;
  std::vector<std::vector<std::string>> references;
  std::vector<std::vector<std::string>> decodes;
  std::vector<double> rouge_l;
};

// Accepts NAME=PATH; otherwise derives the name from the path.
DecodeFile read_decode_file(const std::string& arg, const std::string& fallback_name) {
  std::string name;
  std::string path = arg;
  const auto eq = arg.find('=');
  if (eq != std::string::npos && eq > 0) {
    name = arg.substr(0, eq);
    path = arg.substr(eq + 1);
  } else {
    const fs::path p(path);
    name = p.stem().string() == "decodes" && p.has_parent_path()
               ? p.parent_path().filename().string()
               : p.stem().string();
    if (name.empty()) name = fallback_name;
  }

  std::ifstream in(path);
  if (!in) throw IoError("cannot open decode file " + path);
  DecodeFile file;
  file.name = name;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      file.ids.push_back(j.at("id").get<std::string>());
      file.sources.push_back(tokenize(j.at("source").get<std::string>()));
      file.references.push_back(tokenize(j.at("reference").get<std::string>()));
      file.decodes.push_back(tokenize(j.at("decode").get<std::string>()));
      file.rouge_l.push_back(j.at("rougeL").get<double>());
    } catch (const json::exception& e) {
      throw ParseError("decode file " + path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (file.ids.empty()) throw ParseError("decode file " + path + " is empty");
  return file;
}

std::string sanitize(const std::string& name) {
  std::string out = name;
  for (char& c : out) {
    if (!std::isalnum(static_cast<unsigned char>(c))) c = '_';
  }
  return out;
}

int cmd_analyze(const json& cfg, const std::string& baseline_arg,
                const std::vector<std::string>& system_args, const std::string& out_dir) {
  make_output_dir(out_dir);
  persist_config(out_dir, cfg);

  const DecodeFile baseline = read_decode_file(baseline_arg, "baseline");
  std::vector<DecodeFile> systems;
  for (std::size_t i = 0; i < system_args.size(); ++i) {
    DecodeFile f = read_decode_file(system_args[i], "system" + std::to_string(i + 1));
    if (f.ids != baseline.ids) {
      throw std::invalid_argument("analyze: system '" + f.name +
                                  "' is not aligned with the baseline (example ids differ)");
    }
    systems.push_back(std::move(f));
  }

  const auto resamples = get_field<int>(cfg, "resamples");
  const double alpha = get_field<double>(cfg, "alpha");
  const auto boot_seed = get_field<std::uint64_t>(cfg, "bootstrap_seed");
  const std::string format = get_field<std::string>(cfg, "format");
  const std::string ext = format == "json" ? ".json" : ".csv";

  // Significance of each system against the baseline.
  const double base_mean =
      std::accumulate(baseline.rouge_l.begin(), baseline.rouge_l.end(), 0.0) /
      static_cast<double>(baseline.rouge_l.size());
  ReportTable sig;
  sig.columns = {"mean_rougeL", "baseline_mean", "delta", "p_value", "significant"};
  for (const DecodeFile& sys : systems) {
    PairedScores scores;
    scores.system_a = sys.rouge_l;
    scores.system_b = baseline.rouge_l;
    const BootstrapResult b = bootstrap_test(scores, resamples, alpha, boot_seed);
    const double mean = std::accumulate(sys.rouge_l.begin(), sys.rouge_l.end(), 0.0) /
                        static_cast<double>(sys.rouge_l.size());
    sig.rows.push_back(
        {sys.name, {mean, base_mean, mean - base_mean, b.p_value, b.significant ? 1.0 : 0.0}});
  }
  emit_report(sig, (fs::path(out_dir) / ("significance" + ext)).string(), format);

  // Shared vocabulary over every word seen, for id-space metrics.
  Vocabulary vocab;
  auto add_all = [&vocab](const std::vector<std::vector<std::string>>& seqs) {
    for (const auto& words : seqs) {
      for (const std::string& w : words) vocab.add(w);
    }
  };
  add_all(baseline.sources);
  add_all(baseline.references);
  add_all(baseline.decodes);
  for (const DecodeFile& sys : systems) add_all(sys.decodes);

  auto encode_seqs = [&vocab](const std::vector<std::vector<std::string>>& seqs) {
    std::vector<TokenSeq> out;
    out.reserve(seqs.size());
    for (const auto& words : seqs) out.emplace_back(vocab.encode(words), vocab.size());
    return out;
  };
  const std::vector<TokenSeq> sources = encode_seqs(baseline.sources);
  const std::vector<TokenSeq> references = encode_seqs(baseline.references);

  std::vector<std::pair<std::string, std::vector<TokenSeq>>> per_system;
  per_system.emplace_back("reference", references);
  per_system.emplace_back(baseline.name, encode_seqs(baseline.decodes));
  for (const DecodeFile& sys : systems) {
    per_system.emplace_back(sys.name, encode_seqs(sys.decodes));
  }

  const NoveltyReport novelty = novelty_profile(sources, per_system);
  ReportTable nov;
  for (int n : novelty.n_values) nov.columns.push_back("novelty" + std::to_string(n));
  for (std::size_t s = 0; s < novelty.systems.size(); ++s) {
    nov.rows.push_back({novelty.systems[s], novelty.mean_novelty[s]});
  }
  emit_report(nov, (fs::path(out_dir) / ("novelty" + ext)).string(), format);
  write_novelty_dat((fs::path(out_dir) / "novelty.dat").string(), novelty);

  // Reference-length buckets per system.
  std::vector<Example> examples(references.size());
  for (std::size_t i = 0; i < references.size(); ++i) {
    examples[i].id = baseline.ids[i];
    examples[i].source = sources[i];
    examples[i].summary = references[i];
  }
  const auto edges = get_field<std::vector<int>>(cfg, "bucket_edges");
  std::ofstream buckets((fs::path(out_dir) / "buckets.csv").string());
  if (!buckets) throw IoError("cannot open " + out_dir + "/buckets.csv for writing");
  buckets << "system,lo,hi,count,mean_rougeL\n";
  for (std::size_t s = 1; s < per_system.size(); ++s) {  // skip the reference row
    const auto rows = length_bucket_rouge(examples, per_system[s].second, edges);
    write_length_bucket_dat(
        (fs::path(out_dir) / ("buckets_" + sanitize(per_system[s].first) + ".dat")).string(),
        rows);
    for (const LengthBucketRow& row : rows) {
      buckets << per_system[s].first << ',' << row.lo << ',' << row.hi << ',' << row.count << ',';
      if (row.mean_rouge_l) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.4f", *row.mean_rouge_l);
        buckets << buf;
      }
      buckets << '\n';
    }
  }
  buckets.close();
  if (!buckets) throw IoError("write to " + out_dir + "/buckets.csv failed");

  std::cout << "analyze: " << systems.size() << " system(s) vs " << baseline.name << " over "
            << baseline.ids.size() << " examples\n";
  return 0;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> values;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const std::string part = text.substr(start, comma - start);
    if (!part.empty()) {
      try {
        values.push_back(std::stod(part));
      } catch (const std::exception&) {
        throw ConfigError("--grid: '" + part + "' is not a number");
      }
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (values.empty()) throw ConfigError("--grid: empty list");
  return values;
}

std::string normalize_objective(std::string name) {
  std::replace(name.begin(), name.end(), '-', '_');
  return name;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Sequence-level RL fine-tuning toolkit for abstractive summarization"};
  app.require_subcommand(1);

  // Shared option storage; each subcommand registers the subset it uses.
  std::string config_path;
  std::vector<std::string> sets;
  std::string out;
  std::string corpus;
  std::string warm_start;
  std::string objective_flag;
  double gamma_flag = 0.9;
  std::uint64_t seed_flag = 0;
  bool few_shot_flag = true;
  std::string grid_flag;
  std::string format_flag;
  std::string split_name = "test";
  int n_examples = 1000;
  std::string baseline_arg;
  std::vector<std::string> system_args;
  int resamples_flag = 10000;
  double alpha_flag = 0.05;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file merged over defaults");
    sub->add_option("--set", sets,
                    "Override a config key, e.g. --set gamma=0.7 or --set task.noise_rate=0.2")
        ->take_all();
  };

  CLI::App* gen = app.add_subcommand("gen-data", "Generate a synthetic corpus as JSONL");
  add_common(gen);
  gen->add_option("--spec", config_path, "Alias for --config");
  gen->add_option("--n", n_examples, "Number of examples")->capture_default_str();
  gen->add_option("--out", out, "Output corpus path (.jsonl)")->required();
  CLI::Option* gen_seed = gen->add_option("--seed", seed_flag, "Generation seed (task.seed)");

  CLI::App* train = app.add_subcommand("train", "Cross-entropy warm-start training");
  add_common(train);
  train->add_option("--corpus", corpus, "Corpus JSONL path")->required();
  train->add_option("--out", out, "Run directory")->required();
  CLI::Option* train_seed = train->add_option("--seed", seed_flag, "Training seed");
  CLI::Option* train_fs = train->add_flag("--few-shot,!--no-few-shot", few_shot_flag,
                                          "Few-shot protocol (1000 examples, fixed budget)");

  CLI::App* fine = app.add_subcommand("finetune", "RL fine-tuning from a warm-start checkpoint");
  add_common(fine);
  fine->add_option("--corpus", corpus, "Corpus JSONL path")->required();
  fine->add_option("--warm-start", warm_start, "Checkpoint file or run directory")->required();
  fine->add_option("--out", out, "Run directory")->required();
  CLI::Option* fine_obj =
      fine->add_option("--objective", objective_flag, "nll | rwb-hinge | risk2 | risk3");
  CLI::Option* fine_gamma = fine->add_option("--gamma", gamma_flag, "Cross-entropy weight");
  CLI::Option* fine_seed = fine->add_option("--seed", seed_flag, "Training seed");
  CLI::Option* fine_fs = fine->add_flag("--few-shot,!--no-few-shot", few_shot_flag,
                                        "Few-shot protocol (1000 examples, fixed budget)");

  CLI::App* sweep = app.add_subcommand("sweep-gamma", "Gamma grid search with a REINFORCE proxy");
  add_common(sweep);
  sweep->add_option("--corpus", corpus, "Corpus JSONL path")->required();
  sweep->add_option("--warm-start", warm_start, "Checkpoint file or run directory")->required();
  sweep->add_option("--out", out, "Output directory")->required();
  CLI::Option* sweep_grid = sweep->add_option("--grid", grid_flag, "Comma-separated gamma values");
  CLI::Option* sweep_seed = sweep->add_option("--seed", seed_flag, "Sweep seed (single seed)");

  CLI::App* eval = app.add_subcommand("evaluate", "Score a checkpoint on a corpus split");
  add_common(eval);
  eval->add_option("--corpus", corpus, "Corpus JSONL path")->required();
  eval->add_option("--checkpoint", warm_start, "Checkpoint file or run directory")->required();
  eval->add_option("--split", split_name, "train | dev | test | all")->capture_default_str();
  eval->add_option("--out", out, "Output directory")->required();

  CLI::App* analyze = app.add_subcommand("analyze", "Significance, novelty, and length buckets");
  add_common(analyze);
  analyze->add_option("--baseline", baseline_arg, "Baseline decodes.jsonl (or NAME=PATH)")
      ->required();
  analyze->add_option("--system", system_args, "System decodes.jsonl (or NAME=PATH); repeatable")
      ->required()
      ->take_all();
  analyze->add_option("--out", out, "Output directory")->required();
  CLI::Option* an_format = analyze->add_option("--format", format_flag, "csv | json");
  CLI::Option* an_resamples = analyze->add_option("--resamples", resamples_flag,
                                                  "Bootstrap resamples (>= 1000)");
  CLI::Option* an_alpha = analyze->add_option("--alpha", alpha_flag, "Significance level");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);  // prints help or the usage error
    return rc == 0 ? 0 : 1;
  }

  try {
    json cfg = resolve_config(config_path, sets);

    if (app.got_subcommand(gen)) {
      if (gen_seed->count() > 0) cfg["task"]["seed"] = seed_flag;
      return cmd_gen_data(cfg, n_examples, out);
    }
    if (app.got_subcommand(train)) {
      if (train_seed->count() > 0) cfg["seed"] = seed_flag;
      if (train_fs->count() > 0) cfg["few_shot"] = few_shot_flag;
      cfg["objective"] = "nll";
      return cmd_train(cfg, corpus, out);
    }
    if (app.got_subcommand(fine)) {
      if (fine_obj->count() > 0) cfg["objective"] = normalize_objective(objective_flag);
      if (fine_gamma->count() > 0) cfg["gamma"] = gamma_flag;
      if (fine_seed->count() > 0) cfg["seed"] = seed_flag;
      if (fine_fs->count() > 0) cfg["few_shot"] = few_shot_flag;
      return cmd_finetune(cfg, corpus, warm_start, out);
    }
    if (app.got_subcommand(sweep)) {
      if (sweep_grid->count() > 0) cfg["grid"] = parse_double_list(grid_flag);
      if (sweep_seed->count() > 0) cfg["seed"] = seed_flag;
      return cmd_sweep_gamma(cfg, corpus, warm_start, out);
    }
    if (app.got_subcommand(eval)) {
      return cmd_evaluate(cfg, corpus, warm_start, split_name, out);
    }
    if (app.got_subcommand(analyze)) {
      if (an_format->count() > 0) cfg["format"] = format_flag;
      if (an_resamples->count() > 0) cfg["resamples"] = resamples_flag;
      if (an_alpha->count() > 0) cfg["alpha"] = alpha_flag;
      return cmd_analyze(cfg, baseline_arg, system_args, out);
    }
    std::cerr << "error: no command selected\n";
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const StateError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

int run_cli(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args);
}

}  // namespace rlsum
