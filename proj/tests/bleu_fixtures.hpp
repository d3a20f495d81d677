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

// Hand-computed BLEU fixtures and a brute-force n-gram counter shared by the
// unit tests and the acceptance run.

#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "attncap/eval.hpp"

namespace bleu_fixtures {

using attncap::eval::Sentence;

inline Sentence words(const std::string& text) {
  Sentence out;
  std::string cur;
  for (char c : text) {
    if (c == ' ') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

struct Fixture {
  std::string name;
  std::vector<attncap::eval::BleuPair> pairs;  // one pair = sentence BLEU
  std::size_t max_n;
  double expected;
};

inline std::vector<Fixture> fixtures() {
  return {
      {"identical", {{words("a b c d e"), {words("a b c d e")}}}, 4, 1.0},
      {"clipped unigram", {{words("a a a a"), {words("a b")}}}, 1, 0.25},
      {"no 4-gram overlap", {{words("a b c d"), {words("a b c e")}}}, 4, 0.0},
      // p_n all 1, BP = exp(1 - 6/4)
      {"brevity", {{words("the cat sat on"), {words("the cat sat on the mat")}}},
       4, 0.6065306597126334},
      // counts 8/9 6/7 4/5 2/3 summed over both pairs, c = r = 9
      {"two-pair corpus",
       {{words("a b c d e"), {words("a b c d f")}},
        {words("a b c d"), {words("x y"), words("a b c d")}}},
       4, 0.7984079523098931},
  };
}

// Independent counter: positional scans, no maps.
struct Counts {
  std::vector<std::uint64_t> matches, totals;
};

inline std::size_t occurrences(const Sentence& s, const Sentence& gram) {
  std::size_t n = 0;
  if (gram.size() > s.size()) return 0;
  for (std::size_t i = 0; i + gram.size() <= s.size(); ++i) {
    if (std::equal(gram.begin(), gram.end(), s.begin() + i)) ++n;
  }
  return n;
}

inline Counts brute_force(const Sentence& cand,
                          const std::vector<Sentence>& refs,
                          std::size_t max_n) {
  Counts c;
  for (std::size_t n = 1; n <= max_n; ++n) {
    std::uint64_t matched = 0, total = 0;
    for (std::size_t i = 0; i + n <= cand.size(); ++i) {
      ++total;
      const Sentence gram(cand.begin() + i, cand.begin() + i + n);
      // count each distinct n-gram once, at its first position
      bool seen = false;
      for (std::size_t j = 0; j < i && !seen; ++j) {
        seen = std::equal(gram.begin(), gram.end(), cand.begin() + j);
      }
      if (seen) continue;
      std::size_t best = 0;
      for (const auto& r : refs) best = std::max(best, occurrences(r, gram));
      matched += std::min(occurrences(cand, gram), best);
    }
    c.matches.push_back(matched);
    c.totals.push_back(total);
  }
  return c;
}

// All sentences over {a, b, c} of length 1..4.
inline std::vector<Sentence> all_sentences() {
  std::vector<Sentence> out;
  std::vector<Sentence> frontier{{}};
  for (int len = 1; len <= 4; ++len) {
    std::vector<Sentence> next;
    for (const auto& s : frontier) {
      for (const char* w : {"a", "b", "c"}) {
        Sentence t = s;
        t.push_back(w);
        next.push_back(t);
        out.push_back(t);
      }
    }
    frontier = std::move(next);
  }
  return out;
}

struct EnumerationResult {
  std::size_t cases = 0;
  std::size_t count_mismatches = 0;
  std::size_t clip_violations = 0;
};

// Every (candidate, reference) pair, plus every candidate against each
// reference pair drawn from length-2 sentences. Checks clipped counts
// against brute_force and that appending a token raises the unigram
// numerator by at most one and never past its clip bound.
inline EnumerationResult enumerate_clip_property() {
  EnumerationResult res;
  const auto all = all_sentences();
  std::vector<std::vector<Sentence>> ref_sets;
  for (const auto& r : all) ref_sets.push_back({r});
  for (const auto& r1 : all) {
    for (const auto& r2 : all) {
      if (r1.size() == 2 && r2.size() == 3) ref_sets.push_back({r1, r2});
    }
  }
  for (const auto& refs : ref_sets) {
    std::uint64_t bound = 0;  // sum over words of max reference count
    for (const char* w : {"a", "b", "c"}) {
      std::size_t best = 0;
      for (const auto& r : refs) best = std::max(best, occurrences(r, {w}));
      bound += best;
    }
    for (const auto& cand : all) {
      ++res.cases;
      const auto got = attncap::eval::bleu_stats(cand, refs, 4);
      const auto want = brute_force(cand, refs, 4);
      if (got.matches != want.matches || got.totals != want.totals) {
        ++res.count_mismatches;
      }
      if (cand.size() < 4) {
        for (const char* w : {"a", "b", "c"}) {
          Sentence longer = cand;
          longer.push_back(w);
          const auto m = attncap::eval::bleu_stats(longer, refs, 1).matches[0];
          if (m > got.matches[0] + 1 || m < got.matches[0] || m > bound) {
            ++res.clip_violations;
          }
        }
      }
    }
  }
  return res;
}

}  // namespace bleu_fixtures
