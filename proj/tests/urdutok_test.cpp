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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "attncap/errors.hpp"
#include "attncap/urdutok.hpp"

namespace ut = attncap::urdutok;
namespace fs = std::filesystem;

namespace {

const std::string kToy = ATTNCAP_TOY_DIR;

fs::path scratch(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "attncap_urdutok_test";
  fs::create_directories(dir);
  return dir / name;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

std::string joined(const std::string& a, const std::string& b) {
  return a + std::string(ut::kJoiner) + b;
}

ut::CompoundLexicon lex_of(std::vector<ut::TokenList> entries) {
  return ut::CompoundLexicon(std::move(entries));
}

}  // namespace

TEST(Normalize, StripsUrduFullStop) {
  EXPECT_EQ(ut::normalize("a b۔"), "a b");
}

TEST(Normalize, CollapsesWhitespace) {
  EXPECT_EQ(ut::normalize("  x   y  "), "x y");
  EXPECT_EQ(ut::normalize("x\t\ny z"), "x y z");
}

TEST(Normalize, Empty) { EXPECT_EQ(ut::normalize(""), ""); }

TEST(Normalize, ArabicScriptPunctuation) {
  EXPECT_EQ(ut::normalize("کیا؟ ہاں،"
                          " نہیں؛"),
            "کیا ہاں نہیں");
}

TEST(Normalize, KeepsJoinerAndLetters) {
  const std::string w = joined("یہاں", "وہاں");
  EXPECT_EQ(ut::normalize(w + "!"), w);
}

TEST(Tokenize, SplitsOnSpaces) {
  EXPECT_EQ(ut::tokenize("w1 w2 w3"), (ut::TokenList{"w1", "w2", "w3"}));
}

TEST(Tokenize, Empty) { EXPECT_TRUE(ut::tokenize("").empty()); }

TEST(Tokenize, MergesLexiconEntry) {
  auto lex = lex_of({{"a", "b"}});
  EXPECT_EQ(ut::tokenize("a b c", lex), (ut::TokenList{joined("a", "b"), "c"}));
}

TEST(Tokenize, GreedyLeftToRight) {
  auto lex = lex_of({{"a", "b"}, {"b", "c"}});
  EXPECT_EQ(ut::tokenize("a b c", lex), (ut::TokenList{joined("a", "b"), "c"}));
  EXPECT_EQ(ut::tokenize("x b c", lex), (ut::TokenList{"x", joined("b", "c")}));
}

TEST(Tokenize, NeverEmptyTokens) {
  std::mt19937_64 rng(1);
  const std::string alphabet[] = {"a", "b", " ", "  ", "۔", "‌"};
  auto lex = lex_of({{"a", "b"}});
  for (int trial = 0; trial < 500; ++trial) {
    std::string s;
    for (int i = 0; i < 12; ++i) s += alphabet[rng() % 6];
    for (const auto& tok : ut::tokenize(ut::normalize(s), lex)) {
      EXPECT_FALSE(tok.empty()) << s;
    }
  }
}

TEST(Lexicon, RejectsBadEntries) {
  EXPECT_THROW(lex_of({{"a"}}), attncap::ContractError);
  EXPECT_THROW(lex_of({{"a", "b"}, {"a", "b"}}),
               attncap::ContractError);
  EXPECT_THROW(lex_of({{"a", "b"}, {"a", "b", "c"}}),
               attncap::ContractError);
  EXPECT_THROW(lex_of({{"a", ""}}), attncap::ContractError);
}

TEST(Lexicon, LoadsToyFile) {
  auto lex = ut::CompoundLexicon::load(kToy + "/lexicon.txt");
  EXPECT_EQ(lex.entries().size(), 2u);
}

TEST(Vocabulary, FrequencyOrder) {
  auto v = ut::Vocabulary::build({{"a", "a", "b"}}, 1);
  EXPECT_EQ(v.id("a"), 4u);
  EXPECT_EQ(v.id("b"), 5u);
  EXPECT_EQ(v.size(), 6u);
}

TEST(Vocabulary, MinCountThreshold) {
  auto v = ut::Vocabulary::build({{"a", "b"}}, 2);
  EXPECT_EQ(v.size(), 4u);
  EXPECT_EQ(v.id("a"), ut::kUnk);
}

TEST(Vocabulary, MoreFrequentFirst) {
  auto v = ut::Vocabulary::build({{"a", "b"}, {"b"}}, 1);
  EXPECT_EQ(v.id("b"), 4u);
  EXPECT_EQ(v.id("a"), 5u);
}

TEST(Vocabulary, TiesAreLexicographic) {
  auto v = ut::Vocabulary::build({{"c", "a", "b"}}, 1);
  EXPECT_EQ(v.word(4), "a");
  EXPECT_EQ(v.word(5), "b");
  EXPECT_EQ(v.word(6), "c");
}

TEST(Vocabulary, ReservedIds) {
  ut::Vocabulary v;
  EXPECT_EQ(v.word(ut::kPad), "<pad>");
  EXPECT_EQ(v.word(ut::kStart), "<start>");
  EXPECT_EQ(v.word(ut::kEnd), "<end>");
  EXPECT_EQ(v.word(ut::kUnk), "<unk>");
  EXPECT_THROW(v.word(4), attncap::ContractError);
}

TEST(Vocabulary, DeterministicBuild) {
  std::vector<ut::TokenList> corpus;
  for (const auto& r : ut::read_caption_file(kToy + "/captions.tsv")) {
    corpus.push_back(ut::tokenize(ut::normalize(r.text)));
  }
  EXPECT_EQ(ut::Vocabulary::build(corpus, 1), ut::Vocabulary::build(corpus, 1));
}

TEST(Vocabulary, SaveLoadRoundTrip) {
  auto v = ut::Vocabulary::build({{"ک", "x", "x"}, {"y"}}, 1);
  const fs::path p = scratch("vocab.tsv");
  v.save(p);
  EXPECT_EQ(ut::Vocabulary::load(p), v);
}

TEST(Vocabulary, LoadRejectsGaps) {
  const fs::path p = scratch("bad_vocab.tsv");
  write(p, "0\t<pad>\t0\n1\t<start>\t0\n2\t<end>\t0\n3\t<unk>\t0\n5\tx\t1\n");
  EXPECT_THROW(ut::Vocabulary::load(p), attncap::FormatError);
  write(p, "0\t<pad>\n");
  EXPECT_THROW(ut::Vocabulary::load(p), attncap::FormatError);
}

TEST(Encode, EmptySentence) {
  EXPECT_EQ(ut::encode({}, ut::Vocabulary()), (std::vector<ut::Id>{1, 2}));
}

TEST(Encode, KnownAndUnknown) {
  auto v = ut::Vocabulary::build({{"a"}}, 1);
  EXPECT_EQ(ut::encode({"a"}, v), (std::vector<ut::Id>{1, 4, 2}));
  EXPECT_EQ(ut::encode({"zzz"}, v), (std::vector<ut::Id>{1, 3, 2}));
}

TEST(Decode, Basic) {
  auto v = ut::Vocabulary::build({{"a", "a", "b"}}, 1);
  EXPECT_EQ(ut::decode_ids({1, 4, 2}, v), "a");
  EXPECT_EQ(ut::decode_ids({1, 2}, v), "");
  EXPECT_EQ(ut::decode_ids({1, 4, 2, 5}, v), "a");
  EXPECT_EQ(ut::decode_ids({0, 1, 4, 5}, v), "a b");
}

TEST(RoundTrip, ToyCorpus) {
  auto lex = ut::CompoundLexicon::load(kToy + "/lexicon.txt");
  const auto records = ut::read_caption_file(kToy + "/captions.tsv");
  ASSERT_EQ(records.size(), 10u);
  std::vector<ut::TokenList> corpus;
  for (const auto& r : records) {
    corpus.push_back(ut::tokenize(ut::normalize(r.text), lex));
  }
  auto v = ut::Vocabulary::build(corpus, 1);
  std::size_t merged = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto ids = ut::encode(corpus[i], v);
    EXPECT_EQ(ids.front(), ut::kStart);
    EXPECT_EQ(std::count(ids.begin(), ids.end(), ut::kEnd), 1);
    // normalized text with compounds joined
    std::string want;
    for (const auto& tok : corpus[i]) {
      if (!want.empty()) want += ' ';
      want += tok;
      if (tok.find(ut::kJoiner) != std::string::npos) ++merged;
    }
    EXPECT_EQ(ut::decode_ids(ids, v), want);
    std::string plain = want;
    for (std::size_t at; (at = plain.find(ut::kJoiner)) != std::string::npos;) {
      plain.replace(at, ut::kJoiner.size(), " ");
    }
    EXPECT_EQ(plain, ut::normalize(records[i].text));
  }
  EXPECT_EQ(merged, 2u);
}

TEST(CaptionFile, RejectsMissingFields) {
  const fs::path p = scratch("bad_captions.tsv");
  write(p, "img1\t0\tok\nimg2\tbroken\n");
  EXPECT_THROW(ut::read_caption_file(p), attncap::DataError);
}
