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

#include "attncap/urdutok.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "attncap/errors.hpp"

namespace attncap::urdutok {
namespace {

constexpr char32_t kInvalid = 0xFFFFFFFF;

// Decodes one UTF-8 sequence at text[pos]. Returns kInvalid with length 1 for
// malformed input so that the byte is carried through untouched.
char32_t next_codepoint(std::string_view text, std::size_t pos,
                        std::size_t& length) {
  const auto lead = static_cast<unsigned char>(text[pos]);
  std::size_t extra = 0;
  char32_t cp = 0;
  if (lead < 0x80) {
    length = 1;
    return lead;
  } else if ((lead & 0xE0) == 0xC0) {
    extra = 1;
    cp = lead & 0x1F;
  } else if ((lead & 0xF0) == 0xE0) {
    extra = 2;
    cp = lead & 0x0F;
  } else if ((lead & 0xF8) == 0xF0) {
    extra = 3;
    cp = lead & 0x07;
  } else {
    length = 1;
    return kInvalid;
  }
  if (pos + extra >= text.size()) {
    length = 1;
    return kInvalid;
  }
  for (std::size_t i = 1; i <= extra; ++i) {
    const auto c = static_cast<unsigned char>(text[pos + i]);
    if ((c & 0xC0) != 0x80) {
      length = 1;
      return kInvalid;
    }
    cp = (cp << 6) | (c & 0x3F);
  }
  length = extra + 1;
  return cp;
}

bool is_space(char32_t cp) {
  return cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' ||
         cp == U'\v' || cp == U'\f' || cp == 0x00A0;
}

const std::string kReservedWords[] = {"<pad>", "<start>", "<end>", "<unk>"};

bool is_reserved_word(std::string_view w) {
  return std::find(std::begin(kReservedWords), std::end(kReservedWords), w) !=
         std::end(kReservedWords);
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t at = s.find(sep, start);
    out.emplace_back(s.substr(start, at - start));
    if (at == std::string_view::npos) break;
    start = at + 1;
  }
  return out;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

void strip_bom(std::string& line) {
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

}  // namespace

NormalizeOptions NormalizeOptions::defaults() {
  NormalizeOptions options;
  for (char32_t c = 0x21; c < 0x7F; ++c) {
    const bool alnum = (c >= U'0' && c <= U'9') || (c >= U'A' && c <= U'Z') ||
                       (c >= U'a' && c <= U'z');
    if (!alnum) options.punctuation.insert(c);
  }
  options.punctuation.insert(0x06D4);  // full stop
  options.punctuation.insert(0x060C);  // comma
  options.punctuation.insert(0x061B);  // semicolon
  options.punctuation.insert(0x061F);  // question mark
  return options;
}

std::string normalize(std::string_view text, const NormalizeOptions& options) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t length = 1;
    const char32_t cp = next_codepoint(text, pos, length);
    if (cp != kInvalid && options.punctuation.count(cp)) {
      // dropped
    } else if (cp != kInvalid && is_space(cp)) {
      pending_space = true;
    } else {
      if (pending_space && !out.empty()) out.push_back(' ');
      pending_space = false;
      out.append(text.substr(pos, length));
    }
    pos += length;
  }
  return out;
}

CompoundLexicon::CompoundLexicon(std::vector<TokenList> entries)
    : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const TokenList& e = entries_[i];
    if (e.size() < 2) {
      throw ContractError("lexicon entry " + std::to_string(i + 1) +
                          " has fewer than two tokens");
    }
    for (const Token& t : e) {
      if (t.empty()) {
        throw ContractError("lexicon entry " + std::to_string(i + 1) +
                            " contains an empty token");
      }
    }
    for (std::size_t j = 0; j < i; ++j) {
      const TokenList& f = entries_[j];
      const std::size_t n = std::min(e.size(), f.size());
      if (std::equal(e.begin(), e.begin() + n, f.begin())) {
        throw ContractError(
            "lexicon entries " + std::to_string(j + 1) + " and " +
            std::to_string(i + 1) +
            (e.size() == f.size() ? " are duplicates" : " overlap as prefix"));
      }
    }
    by_head_.emplace(e.front(), i);
  }
}

CompoundLexicon CompoundLexicon::load(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::vector<TokenList> entries;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    strip_cr(line);
    if (first) strip_bom(line);
    first = false;
    TokenList tokens = tokenize(normalize(line, NormalizeOptions{}));
    if (tokens.empty()) continue;
    entries.push_back(std::move(tokens));
  }
  return CompoundLexicon(std::move(entries));
}

std::size_t CompoundLexicon::match(const TokenList& tokens,
                                   std::size_t pos) const {
  auto [lo, hi] = by_head_.equal_range(tokens[pos]);
  for (auto it = lo; it != hi; ++it) {
    const TokenList& e = entries_[it->second];
    if (pos + e.size() <= tokens.size() &&
        std::equal(e.begin(), e.end(), tokens.begin() + pos)) {
      return e.size();
    }
  }
  return 0;
}

TokenList tokenize(std::string_view normalized,
                   const CompoundLexicon& lexicon) {
  TokenList words;
  for (std::string& w : split(normalized, ' ')) {
    if (!w.empty()) words.push_back(std::move(w));
  }
  if (lexicon.empty()) return words;

  TokenList merged;
  std::size_t pos = 0;
  while (pos < words.size()) {
    const std::size_t n = lexicon.match(words, pos);
    if (n == 0) {
      merged.push_back(words[pos++]);
      continue;
    }
    std::string joined = words[pos];
    for (std::size_t k = 1; k < n; ++k) {
      joined.append(kJoiner);
      joined.append(words[pos + k]);
    }
    merged.push_back(std::move(joined));
    pos += n;
  }
  return merged;
}

Vocabulary::Vocabulary() {
  for (const std::string& w : kReservedWords) add(w, 0);
}

void Vocabulary::add(std::string word, std::uint64_t count) {
  index_.emplace(word, static_cast<Id>(words_.size()));
  words_.push_back(std::move(word));
  counts_.push_back(count);
}

Vocabulary Vocabulary::build(const std::vector<TokenList>& corpus,
                             std::uint32_t min_count) {
  if (min_count < 1) throw ContractError("min_count must be at least 1");
  std::unordered_map<std::string, std::uint64_t> freq;
  for (const TokenList& sentence : corpus) {
    for (const Token& t : sentence) {
      if (!t.empty() && !is_reserved_word(t)) ++freq[t];
    }
  }
  std::vector<std::pair<std::string, std::uint64_t>> kept;
  for (auto& [word, count] : freq) {
    if (count >= min_count) kept.emplace_back(word, count);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  Vocabulary vocab;
  vocab.min_count_ = min_count;
  for (auto& [word, count] : kept) vocab.add(std::move(word), count);
  return vocab;
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::vector<std::string> words;
  std::vector<std::uint64_t> counts;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line_no == 1) strip_bom(line);
    if (line.empty()) continue;
    const auto fields = split(line, '\t');
    auto fail = [&](const std::string& why) {
      return FormatError(path.string() + ":" + std::to_string(line_no) +
                         ": " + why);
    };
    if (fields.size() != 3) throw fail("expected id<TAB>word<TAB>frequency");
    std::uint64_t id = 0, count = 0;
    auto parse = [](const std::string& s, std::uint64_t& v) {
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      return ec == std::errc() && p == s.data() + s.size() && !s.empty();
    };
    if (!parse(fields[0], id) || !parse(fields[2], count)) {
      throw fail("non-numeric id or frequency");
    }
    if (id != words.size()) throw fail("ids must be contiguous from 0");
    if (fields[1].empty()) throw fail("empty word");
    if (id < kFirstWordId) {
      if (fields[1] != kReservedWords[id]) {
        throw fail("reserved id " + std::to_string(id) + " must be " +
                   kReservedWords[id]);
      }
    } else if (is_reserved_word(fields[1])) {
      throw fail("reserved word used as a surface word");
    }
    words.push_back(fields[1]);
    counts.push_back(count);
  }
  if (words.size() < kFirstWordId) {
    throw FormatError(path.string() + ": missing reserved entries");
  }
  Vocabulary vocab;
  std::uint64_t smallest = 0;
  for (std::size_t i = kFirstWordId; i < words.size(); ++i) {
    if (vocab.index_.count(words[i])) {
      throw FormatError(path.string() + ": duplicate word '" + words[i] + "'");
    }
    vocab.add(words[i], counts[i]);
    smallest = i == kFirstWordId ? counts[i] : std::min(smallest, counts[i]);
  }
  vocab.min_count_ =
      static_cast<std::uint32_t>(std::max<std::uint64_t>(1, smallest));
  return vocab;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    out << i << '\t' << words_[i] << '\t' << counts_[i] << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

Id Vocabulary::id(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end() || it->second < kFirstWordId) return kUnk;
  return it->second;
}

bool Vocabulary::contains(std::string_view word) const {
  return id(word) != kUnk;
}

const std::string& Vocabulary::word(Id id) const {
  if (id >= words_.size()) {
    throw ContractError("token id " + std::to_string(id) +
                        " out of range for vocabulary of size " +
                        std::to_string(words_.size()));
  }
  return words_[id];
}

std::uint64_t Vocabulary::frequency(Id id) const {
  word(id);
  return counts_[id];
}

std::vector<Id> encode(const TokenList& tokens, const Vocabulary& vocab) {
  std::vector<Id> ids;
  ids.reserve(tokens.size() + 2);
  ids.push_back(kStart);
  for (const Token& t : tokens) ids.push_back(vocab.id(t));
  ids.push_back(kEnd);
  return ids;
}

TokenList words_of(const std::vector<Id>& ids, const Vocabulary& vocab) {
  TokenList words;
  for (Id id : ids) {
    const std::string& w = vocab.word(id);
    if (id == kEnd) break;
    if (id == kPad || id == kStart) continue;
    words.push_back(w);
  }
  return words;
}

std::string decode_ids(const std::vector<Id>& ids, const Vocabulary& vocab) {
  std::string out;
  for (const Token& w : words_of(ids, vocab)) {
    if (!out.empty()) out.push_back(' ');
    out += w;
  }
  return out;
}

std::vector<CaptionRecord> read_caption_file(
    const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::vector<CaptionRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line_no == 1) strip_bom(line);
    if (line.empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 3 || fields[0].empty()) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": expected image_id<TAB>caption_index<TAB>caption");
    }
    records.push_back(
        {std::move(fields[0]), std::move(fields[1]), std::move(fields[2])});
  }
  return records;
}

}  // namespace attncap::urdutok
