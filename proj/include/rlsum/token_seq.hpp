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

#ifndef RLSUM_TOKEN_SEQ_HPP_
#define RLSUM_TOKEN_SEQ_HPP_

#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace rlsum {

// Reserved token ids, fixed across the whole toolkit.
inline constexpr int kPadId = 0;
inline constexpr int kBosId = 1;
inline constexpr int kEosId = 2;
inline constexpr int kUnkId = 3;
inline constexpr int kNumReservedIds = 4;

/// A sequence of token ids bound to a vocabulary size. Empty sequences are
/// legal inputs everywhere.
struct TokenSeq {
  std::vector<int> tokens;
  int vocab_size = 0;

  TokenSeq() = default;
  TokenSeq(std::vector<int> t, int v) : tokens(std::move(t)), vocab_size(v) {
    validate();
  }

  int size() const { return static_cast<int>(tokens.size()); }
  bool empty() const { return tokens.empty(); }

  void validate() const {
    if (vocab_size <= 0) throw std::invalid_argument("TokenSeq: vocab_size must be positive");
    for (int t : tokens) {
      if (t < 0 || t >= vocab_size)
        throw std::invalid_argument("TokenSeq: token id " + std::to_string(t) +
                                    " out of range for vocab_size " + std::to_string(vocab_size));
    }
  }
};

/// Bidirectional token-string <-> id map with the four reserved ids in front.
class Vocabulary {
 public:
  Vocabulary() {
    for (const char* s : {"<pad>", "<bos>", "<eos>", "<unk>"}) add(s);
  }

  /// Appends a token (no-op if already present) and returns its id.
  int add(const std::string& token) {
    auto it = token_to_id_.find(token);
    if (it != token_to_id_.end()) return it->second;
    const int id = static_cast<int>(id_to_token_.size());
    id_to_token_.push_back(token);
    token_to_id_.emplace(token, id);
    return id;
  }

  /// Looks up a token, mapping unknown strings to the unk id.
  int id_of(const std::string& token) const {
    auto it = token_to_id_.find(token);
    return it == token_to_id_.end() ? kUnkId : it->second;
  }

  const std::string& token_of(int id) const { return id_to_token_.at(static_cast<std::size_t>(id)); }

  int size() const { return static_cast<int>(id_to_token_.size()); }
  const std::vector<std::string>& tokens() const { return id_to_token_; }

  std::vector<int> encode(const std::vector<std::string>& words) const {
    std::vector<int> ids;
    ids.reserve(words.size());
    for (const auto& w : words) ids.push_back(id_of(w));
    return ids;
  }

  std::vector<std::string> decode(const std::vector<int>& ids) const {
    std::vector<std::string> words;
    words.reserve(ids.size());
    for (int id : ids) words.push_back(token_of(id));
    return words;
  }

 private:
  std::vector<std::string> id_to_token_;
  std::unordered_map<std::string, int> token_to_id_;
};

}  // namespace rlsum

#endif  // RLSUM_TOKEN_SEQ_HPP_
