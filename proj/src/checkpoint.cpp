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

#include <fstream>
#include <vector>

#include "rlsum/errors.hpp"

namespace rlsum {

namespace {
constexpr int kFormatVersion = 1;
}

void save_checkpoint(const std::string& path, const Seq2SeqModel& model, const Vocabulary& vocab,
                     const nlohmann::json& config_echo) {
  if (vocab.size() != model.vocab_size()) {
    throw std::invalid_argument("save_checkpoint: vocabulary size " +
                                std::to_string(vocab.size()) + " != model vocab size " +
                                std::to_string(model.vocab_size()));
  }
  nlohmann::json j;
  j["format_version"] = kFormatVersion;
  j["vocab_size"] = model.vocab_size();
  j["hidden_size"] = model.hidden_size();
  j["nll_warm_started"] = model.nll_warm_started;
  j["iterations_trained"] = model.iterations_trained;
  j["vocab"] = vocab.tokens();
  j["config"] = config_echo;

  nlohmann::json params = nlohmann::json::array();
  for (const ad::Parameter* p : model.parameters()) {
    nlohmann::json entry;
    entry["name"] = p->name;
    entry["rows"] = p->value.rows();
    entry["cols"] = p->value.cols();
    // Column-major flat order, matching Eigen's default storage.
    entry["data"] = std::vector<double>(p->value.data(), p->value.data() + p->value.size());
    params.push_back(std::move(entry));
  }
  j["parameters"] = std::move(params);

  std::ofstream out(path);
  if (!out) throw IoError("save_checkpoint: cannot open " + path + " for writing");
  out << j.dump();
  out.close();
  if (!out) throw IoError("save_checkpoint: write to " + path + " failed");
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_checkpoint: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("load_checkpoint: " + path + ": " + e.what());
  }

  try {
    if (!j.contains("format_version") || j["format_version"].get<int>() != kFormatVersion) {
      throw ParseError("load_checkpoint: " + path + ": unsupported format version");
    }
    const int v = j.at("vocab_size").get<int>();
    const int d = j.at("hidden_size").get<int>();
    if (v < kNumReservedIds || d < 1) {
      throw ParseError("load_checkpoint: " + path + ": invalid model dimensions");
    }

    LoadedCheckpoint loaded;
    loaded.model = init_model(v, d, 0);
    loaded.model.nll_warm_started = j.at("nll_warm_started").get<bool>();
    loaded.model.iterations_trained = j.at("iterations_trained").get<long long>();
    loaded.config_echo = j.value("config", nlohmann::json::object());

    const auto names = j.at("vocab").get<std::vector<std::string>>();
    if (static_cast<int>(names.size()) != v) {
      throw ParseError("load_checkpoint: " + path + ": vocab length " +
                       std::to_string(names.size()) + " != vocab_size " + std::to_string(v));
    }
    for (int i = 0; i < kNumReservedIds; ++i) {
      if (names[static_cast<std::size_t>(i)] != loaded.vocab.token_of(i)) {
        throw ParseError("load_checkpoint: " + path + ": reserved token mismatch at id " +
                         std::to_string(i));
      }
    }
    for (std::size_t i = kNumReservedIds; i < names.size(); ++i) loaded.vocab.add(names[i]);
    if (loaded.vocab.size() != v) {
      throw ParseError("load_checkpoint: " + path + ": duplicate tokens in vocab");
    }

    const std::vector<ad::Parameter*> params = loaded.model.parameters();
    const auto& entries = j.at("parameters");
    if (entries.size() != params.size()) {
      throw ParseError("load_checkpoint: " + path + ": expected " +
                       std::to_string(params.size()) + " parameters, found " +
                       std::to_string(entries.size()));
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
      const auto& e = entries[i];
      ad::Parameter* p = params[i];
      if (e.at("name").get<std::string>() != p->name) {
        throw ParseError("load_checkpoint: " + path + ": parameter " + std::to_string(i) +
                         " named '" + e.at("name").get<std::string>() + "', expected '" + p->name +
                         "'");
      }
      const auto rows = e.at("rows").get<Eigen::Index>();
      const auto cols = e.at("cols").get<Eigen::Index>();
      if (rows != p->value.rows() || cols != p->value.cols()) {
        throw ParseError("load_checkpoint: " + path + ": shape mismatch for " + p->name);
      }
      const auto data = e.at("data").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(data.size()) != p->value.size()) {
        throw ParseError("load_checkpoint: " + path + ": data length mismatch for " + p->name);
      }
      std::copy(data.begin(), data.end(), p->value.data());
      p->zero_grad();
    }
    return loaded;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("load_checkpoint: " + path + ": " + e.what());
  }
}

}  // namespace rlsum
