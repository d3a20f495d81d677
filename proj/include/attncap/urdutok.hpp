// Copyright 2026 The attncap Authors. All Rights Reserved.
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

// Urdu caption text handling: punctuation stripping, space-based
// tokenization with compound merging, and the word <-> id vocabulary.
//
// Captions are assumed to be hand-segmented (a space after every word), so
// splitting on spaces is the ground segmentation. Multi-word units that must
// stay together (compounds, reduplication, affixation, proper nouns) come
// from a user-supplied lexicon and are re-joined with U+200C.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace attncap::urdutok {

using Token = std::string;
using TokenList = std::vector<Token>;
using Id = std::uint32_t;

inline constexpr Id kPad = 0;
inline constexpr Id kStart = 1;
inline constexpr Id kEnd = 2;
inline constexpr Id kUnk = 3;
inline constexpr Id kFirstWordId = 4;

// ZERO WIDTH NON-JOINER, UTF-8 encoded.
inline constexpr std::string_view kJoiner = "\xE2\x80\x8C";

struct NormalizeOptions {
  // Codepoints removed outright.
  std::set<char32_t> punctuation;

  // ASCII punctuation plus the Urdu full stop, comma, semicolon and
  // question mark.
  static NormalizeOptions defaults();
};

std::string normalize(std::string_view text,
                      const NormalizeOptions& options = NormalizeOptions::defaults());

class CompoundLexicon {
 public:
  CompoundLexicon() = default;
  // Throws ContractError on duplicate entries, entries shorter than two
  // tokens, or an entry that is a prefix of another.
  explicit CompoundLexicon(std::vector<TokenList> entries);

  // One compound per line, tokens separated by single spaces. Blank lines
  // are ignored.
  static CompoundLexicon load(const std::filesystem::path& path);

  const std::vector<TokenList>& entries() const noexcept { return entries_; }
  bool empty() const noexcept { return entries_.empty(); }

  // Length of the entry matching tokens[pos...], or 0.
  std::size_t match(const TokenList& tokens, std::size_t pos) const;

 private:
  std::vector<TokenList> entries_;
  std::multimap<Token, std::size_t> by_head_;
};

TokenList tokenize(std::string_view normalized,
                   const CompoundLexicon& lexicon = {});

class Vocabulary {
 public:
  // Reserved tokens only.
  Vocabulary();

  static Vocabulary build(const std::vector<TokenList>& corpus,
                          std::uint32_t min_count);

  // Lines of `id<TAB>word<TAB>frequency`, ids contiguous from 0.
  static Vocabulary load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  std::size_t size() const noexcept { return words_.size(); }
  std::uint32_t min_count() const noexcept { return min_count_; }

  Id id(std::string_view word) const;  // kUnk when absent
  bool contains(std::string_view word) const;
  const std::string& word(Id id) const;
  std::uint64_t frequency(Id id) const;

  bool operator==(const Vocabulary& other) const {
    return words_ == other.words_ && counts_ == other.counts_;
  }

 private:
  void add(std::string word, std::uint64_t count);

  std::vector<std::string> words_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, Id> index_;
  std::uint32_t min_count_ = 1;
};

// [START] + ids + [END]
std::vector<Id> encode(const TokenList& tokens, const Vocabulary& vocab);

// Drops PAD and START, stops at the first END, joins with single spaces.
std::string decode_ids(const std::vector<Id>& ids, const Vocabulary& vocab);

// Surface words for a decoded id sequence, same rules as decode_ids.
TokenList words_of(const std::vector<Id>& ids, const Vocabulary& vocab);

struct CaptionRecord {
  std::string image_id;
  std::string index;  // caption number, or a 0/1 label for grammar data
  std::string text;
};

// `image_id<TAB>caption_index<TAB>caption_text` per line.
std::vector<CaptionRecord> read_caption_file(const std::filesystem::path& path);

}  // namespace attncap::urdutok
