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

#ifndef RLSUM_CHECKPOINT_HPP_
#define RLSUM_CHECKPOINT_HPP_

#include <string>

#include "json.hpp"
#include "rlsum/model.hpp"
#include "rlsum/token_seq.hpp"

namespace rlsum {

/// Versioned JSON model snapshot: shapes plus flat little-endian-order
/// parameter arrays, the vocabulary, training counters, and an echo of the
/// run configuration it was produced under.
struct LoadedCheckpoint {
  Seq2SeqModel model;
  Vocabulary vocab;
  nlohmann::json config_echo;
};

/// Writes the snapshot to `path`. Throws IoError if the file cannot be
/// opened, std::invalid_argument if the vocabulary size disagrees with the
/// model.
void save_checkpoint(const std::string& path, const Seq2SeqModel& model, const Vocabulary& vocab,
                     const nlohmann::json& config_echo);

/// Reads a snapshot. Throws IoError on missing files, ParseError on
/// malformed JSON, unknown format versions, or parameter shapes that
/// disagree with the declared model dimensions.
LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace rlsum

#endif  // RLSUM_CHECKPOINT_HPP_
