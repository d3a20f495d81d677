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

// Exercises the shared library through its C interface only.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <memory>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "attncap/attncap.h"

namespace fs = std::filesystem;

namespace {

const fs::path kToy = ATTNCAP_TOY_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void spit(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

class CApi : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() /
           (std::string("attncap_capi_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    ASSERT_EQ(attncap_lexicon_load((kToy / "lexicon.txt").c_str(), &lex_), ATTNCAP_OK);
    ASSERT_EQ(attncap_vocab_build(captions().c_str(), lex_, 1, &vocab_), ATTNCAP_OK);
  }
  void TearDown() override {
    attncap_vocab_free(vocab_);
    attncap_lexicon_free(lex_);
    fs::remove_all(dir_);
  }

  static std::string captions() { return (kToy / "captions.tsv").string(); }
  static std::string features() { return (kToy / "features").string(); }

  attncap_model* small_model(std::uint64_t seed = 1) {
    attncap_dims d{16, 32, 8, 8, 8};
    attncap_model* m = nullptr;
    EXPECT_EQ(attncap_model_create(&d, static_cast<uint32_t>(attncap_vocab_size(vocab_)),
                                   0, seed, &m),
              ATTNCAP_OK);
    return m;
  }

  attncap_dataset* dataset() {
    attncap_dataset* ds = nullptr;
    EXPECT_EQ(attncap_dataset_load(captions().c_str(), features().c_str(), lex_,
                                   vocab_, &ds),
              ATTNCAP_OK);
    return ds;
  }

  fs::path dir_;
  attncap_lexicon* lex_ = nullptr;
  attncap_vocab* vocab_ = nullptr;
};

}  // namespace

TEST(CApiBasics, StatusNamesAndVersion) {
  EXPECT_STREQ(attncap_status_name(ATTNCAP_OK), "ok");
  EXPECT_STREQ(attncap_status_name(ATTNCAP_E_FORMAT), "format");
  EXPECT_STREQ(attncap_status_name(ATTNCAP_E_INTERNAL), "internal");
  EXPECT_STREQ(attncap_version(), "0.1.0");
  EXPECT_EQ(static_cast<int>(ATTNCAP_E_IO), 8);
}

TEST(CApiBasics, NullArgumentsAreContractErrors) {
  attncap_vocab* v = nullptr;
  EXPECT_EQ(attncap_vocab_build(nullptr, nullptr, 1, &v), ATTNCAP_E_CONTRACT);
  EXPECT_EQ(v, nullptr);
  EXPECT_NE(std::string(attncap_last_error()), "");
  EXPECT_EQ(attncap_decode(nullptr, nullptr, 1, 5, nullptr), ATTNCAP_E_CONTRACT);
  attncap_bleu b;
  EXPECT_EQ(attncap_bleu_sentence("a", nullptr, 1, 4, &b), ATTNCAP_E_CONTRACT);
  // freeing NULL is fine
  attncap_model_free(nullptr);
  attncap_caption_free(nullptr);
}

TEST(CApiBasics, Defaults) {
  attncap_dims d;
  attncap_dims_default(&d);
  EXPECT_EQ(d.regions, 16u);
  EXPECT_EQ(d.feature_dim, 32u);
  EXPECT_EQ(d.embed, 64u);
  EXPECT_EQ(d.attention, 64u);
  EXPECT_EQ(d.hidden, 128u);
  attncap_train_config c;
  attncap_train_config_default(&c);
  EXPECT_STREQ(c.optimizer, "adam");
  EXPECT_EQ(c.learning_rate, 1e-3);
  EXPECT_EQ(c.epochs, 300u);
}

TEST(CApiBasics, BleuFixtures) {
  attncap_bleu b;
  const char* refs1[] = {"a b"};
  ASSERT_EQ(attncap_bleu_sentence("a a a a", refs1, 1, 1, &b), ATTNCAP_OK);
  EXPECT_NEAR(b.score, 0.25, 1e-12);
  EXPECT_EQ(b.candidate_length, 4u);
  const char* refs2[] = {"a b c d e f"};
  ASSERT_EQ(attncap_bleu_sentence("a b c d", refs2, 1, 4, &b), ATTNCAP_OK);
  EXPECT_NEAR(b.score, 0.6065306597126334, 1e-9);
  EXPECT_NEAR(b.brevity_penalty, 0.6065306597126334, 1e-9);
  EXPECT_EQ(attncap_bleu_sentence("a", refs1, 1, 5, &b), ATTNCAP_E_CONTRACT);
}

TEST_F(CApi, VocabSaveLoadRoundTrip) {
  EXPECT_EQ(attncap_vocab_size(vocab_), 43u);
  const auto p = dir_ / "vocab.tsv";
  ASSERT_EQ(attncap_vocab_save(vocab_, p.c_str()), ATTNCAP_OK);
  attncap_vocab* back = nullptr;
  ASSERT_EQ(attncap_vocab_load(p.c_str(), &back), ATTNCAP_OK);
  EXPECT_EQ(attncap_vocab_size(back), 43u);
  const auto p2 = dir_ / "vocab2.tsv";
  ASSERT_EQ(attncap_vocab_save(back, p2.c_str()), ATTNCAP_OK);
  EXPECT_EQ(slurp(p), slurp(p2));
  attncap_vocab_free(back);

  const auto enc = dir_ / "encoded.tsv";
  ASSERT_EQ(attncap_encode_captions(captions().c_str(), lex_, vocab_, enc.c_str()),
            ATTNCAP_OK);
  const std::string text = slurp(enc);
  EXPECT_EQ(text.rfind("img01\t0\t1 ", 0), 0u);
}

TEST_F(CApi, BadFilesMapToStatus) {
  attncap_vocab* v = nullptr;
  EXPECT_EQ(attncap_vocab_load((dir_ / "missing.tsv").c_str(), &v), ATTNCAP_E_IO);
  spit(dir_ / "junk.ckpt", "XXXXjunk");
  attncap_model* m = nullptr;
  EXPECT_EQ(attncap_model_load((dir_ / "junk.ckpt").c_str(), &m), ATTNCAP_E_FORMAT);
  EXPECT_NE(std::string(attncap_last_error()).find("magic"), std::string::npos);
  attncap_image* img = nullptr;
  EXPECT_EQ(attncap_image_load((dir_ / "junk.ckpt").c_str(), &img), ATTNCAP_E_FORMAT);
}

TEST_F(CApi, DatasetAndModelShape) {
  attncap_dataset* ds = dataset();
  EXPECT_EQ(attncap_dataset_size(ds), 10u);
  uint32_t l = 0, d = 0, pp = 0;
  ASSERT_EQ(attncap_dataset_shape(ds, &l, &d, &pp), ATTNCAP_OK);
  EXPECT_EQ(l, 16u);
  EXPECT_EQ(d, 32u);
  EXPECT_EQ(pp, 0u);
  attncap_dataset_free(ds);

  attncap_model* m = small_model();
  attncap_dims dims;
  uint32_t v = 0;
  ASSERT_EQ(attncap_model_dims(m, &dims, &v, &pp), ATTNCAP_OK);
  EXPECT_EQ(dims.regions, 0u);
  EXPECT_EQ(dims.feature_dim, 32u);
  EXPECT_EQ(dims.hidden, 8u);
  EXPECT_EQ(v, 43u);
  attncap_model_free(m);

  attncap_dims bad{16, 32, 0, 8, 8};
  EXPECT_EQ(attncap_model_create(&bad, 43, 0, 1, &m), ATTNCAP_E_CONFIG);
}

TEST_F(CApi, ResumeMatchesUninterrupted) {
  attncap_train_config cfg;
  attncap_train_config_default(&cfg);
  cfg.learning_rate = 1e-2;
  attncap_dataset* ds = dataset();
  attncap_model* m = small_model();

  attncap_trainer* full = nullptr;
  ASSERT_EQ(attncap_trainer_create(m, &cfg, &full), ATTNCAP_OK);
  double first_loss = 0, loss = 0, secs = 0;
  uint32_t epoch = 0;
  for (int i = 0; i < 4; ++i) {
    ASSERT_EQ(attncap_trainer_run_epoch(full, ds, &epoch, &loss, &secs), ATTNCAP_OK);
    if (i == 0) first_loss = loss;
    EXPECT_EQ(epoch, static_cast<uint32_t>(i + 1));
    EXPECT_GE(secs, 0.0);
  }
  EXPECT_LT(loss, first_loss);
  EXPECT_EQ(attncap_trainer_epochs_done(full), 4u);
  ASSERT_EQ(attncap_trainer_save(full, (dir_ / "full.ckpt").c_str()), ATTNCAP_OK);

  attncap_trainer* half = nullptr;
  ASSERT_EQ(attncap_trainer_create(m, &cfg, &half), ATTNCAP_OK);
  for (int i = 0; i < 2; ++i) {
    ASSERT_EQ(attncap_trainer_run_epoch(half, ds, &epoch, &loss, &secs), ATTNCAP_OK);
  }
  ASSERT_EQ(attncap_trainer_save(half, (dir_ / "half.ckpt").c_str()), ATTNCAP_OK);
  attncap_trainer_free(half);

  attncap_trainer* resumed = nullptr;
  ASSERT_EQ(attncap_trainer_resume((dir_ / "half.ckpt").c_str(), &cfg, &resumed),
            ATTNCAP_OK);
  EXPECT_EQ(attncap_trainer_epochs_done(resumed), 2u);
  for (int i = 0; i < 2; ++i) {
    ASSERT_EQ(attncap_trainer_run_epoch(resumed, ds, &epoch, &loss, &secs), ATTNCAP_OK);
  }
  EXPECT_EQ(epoch, 4u);
  ASSERT_EQ(attncap_trainer_save(resumed, (dir_ / "resumed.ckpt").c_str()), ATTNCAP_OK);
  EXPECT_EQ(slurp(dir_ / "full.ckpt"), slurp(dir_ / "resumed.ckpt"));

  cfg.optimizer = "rmsprop";
  attncap_trainer* wrong = nullptr;
  EXPECT_EQ(attncap_trainer_resume((dir_ / "half.ckpt").c_str(), &cfg, &wrong),
            ATTNCAP_E_CONFIG);
  cfg.optimizer = "adagrad";
  EXPECT_EQ(attncap_trainer_create(m, &cfg, &wrong), ATTNCAP_E_CONFIG);

  attncap_trainer_free(resumed);
  attncap_trainer_free(full);
  attncap_model_free(m);
  attncap_dataset_free(ds);
}

TEST_F(CApi, DecodeTextAndAttention) {
  attncap_model* m = small_model(3);
  attncap_image* img = nullptr;
  ASSERT_EQ(attncap_image_load((kToy / "features" / "img01.fgrd").c_str(), &img),
            ATTNCAP_OK);
  attncap_caption* greedy = nullptr;
  ASSERT_EQ(attncap_decode(m, img, 1, 6, &greedy), ATTNCAP_OK);
  const size_t n = attncap_caption_length(greedy);
  ASSERT_GE(n, 2u);
  ASSERT_LE(n, 7u);
  std::vector<uint32_t> ids(n);
  ASSERT_EQ(attncap_caption_ids(greedy, ids.data(), ids.size()), ATTNCAP_OK);
  EXPECT_EQ(ids[0], 1u);  // START
  EXPECT_EQ(attncap_caption_ids(greedy, ids.data(), n - 1), ATTNCAP_E_CONTRACT);
  EXPECT_LE(attncap_caption_logprob(greedy), 0.0);

  // same call, same answer
  attncap_caption* again = nullptr;
  ASSERT_EQ(attncap_decode(m, img, 1, 6, &again), ATTNCAP_OK);
  EXPECT_EQ(attncap_caption_logprob(again), attncap_caption_logprob(greedy));
  attncap_caption_free(again);

  attncap_caption* beam = nullptr;
  ASSERT_EQ(attncap_decode(m, img, 3, 6, &beam), ATTNCAP_OK);
  EXPECT_EQ(attncap_caption_ids(beam, nullptr, 0) == ATTNCAP_OK,
            attncap_caption_length(beam) == 0);
  attncap_caption_free(beam);

  size_t need = 0;
  ASSERT_EQ(attncap_caption_text(greedy, vocab_, nullptr, 0, &need), ATTNCAP_OK);
  ASSERT_GE(need, 1u);
  std::string buf(need, '\0');
  ASSERT_EQ(attncap_caption_text(greedy, vocab_, buf.data(), need, &need), ATTNCAP_OK);
  EXPECT_EQ(buf.back(), '\0');
  if (need > 1) {
    EXPECT_EQ(attncap_caption_text(greedy, vocab_, buf.data(), need - 1, &need),
              ATTNCAP_E_CONTRACT);
  }

  size_t written = 0;
  ASSERT_EQ(attncap_caption_write_attention(greedy, 0, (dir_ / "maps").c_str(), &written),
            ATTNCAP_OK);
  EXPECT_EQ(written, n - 1);
  size_t files = 0;
  for (const auto& e : fs::directory_iterator(dir_ / "maps")) {
    EXPECT_EQ(e.path().extension(), ".pgm");
    EXPECT_EQ(slurp(e.path()).rfind("P5\n4 4\n255\n", 0), 0u);
    ++files;
  }
  EXPECT_EQ(files, written);
  EXPECT_EQ(attncap_caption_write_attention(greedy, 3, (dir_ / "bad").c_str(), &written),
            ATTNCAP_E_CONTRACT);

  EXPECT_EQ(attncap_decode(m, img, 0, 6, &again), ATTNCAP_E_CONTRACT);
  attncap_caption_free(greedy);
  attncap_image_free(img);
  attncap_model_free(m);
}

TEST_F(CApi, EvaluateWritesReport) {
  attncap_model* m = small_model();
  attncap_bleu b4, b1;
  const auto report = dir_ / "eval.json";
  ASSERT_EQ(attncap_evaluate(m, vocab_, lex_, captions().c_str(), features().c_str(),
                             1, 5, report.c_str(), &b4, &b1),
            ATTNCAP_OK);
  EXPECT_EQ(b4.max_n, 4u);
  EXPECT_EQ(b1.max_n, 1u);
  EXPECT_GE(b1.score, 0.0);
  EXPECT_LE(b1.score, 1.0);
  EXPECT_NE(slurp(report).find("\"per_image\""), std::string::npos);
  attncap_model_free(m);
}

TEST_F(CApi, GrammarTrainSaveLoadScore) {
  attncap_train_config cfg;
  attncap_train_config_default(&cfg);
  cfg.learning_rate = 1e-2;
  cfg.epochs = 100;
  std::vector<double> losses;
  auto cb = [](uint32_t, double loss, void* user) {
    static_cast<std::vector<double>*>(user)->push_back(loss);
  };
  attncap_grammar* g = nullptr;
  double acc = 0;
  const auto data = kToy / "grammar.tsv";
  ASSERT_EQ(attncap_grammar_train(data.c_str(), lex_, &cfg, 32, 32, cb, &losses, &g, &acc),
            ATTNCAP_OK);
  EXPECT_EQ(losses.size(), 100u);
  EXPECT_LT(losses.back(), losses.front());
  EXPECT_GE(acc, 0.95);

  const char* good = "ایک آدمی سڑک پر یہاں وہاں چل رہا ہے۔";
  double p = 0;
  ASSERT_EQ(attncap_grammar_score(g, good, &p), ATTNCAP_OK);
  EXPECT_GT(p, 0.0);
  EXPECT_LT(p, 1.0);

  const auto ck = dir_ / "g.ckpt";
  const auto gv = dir_ / "g_vocab.tsv";
  ASSERT_EQ(attncap_grammar_save(g, ck.c_str(), gv.c_str()), ATTNCAP_OK);
  attncap_grammar* back = nullptr;
  ASSERT_EQ(attncap_grammar_load(ck.c_str(), gv.c_str(), lex_, &back), ATTNCAP_OK);
  double q = 0;
  ASSERT_EQ(attncap_grammar_score(back, good, &q), ATTNCAP_OK);
  EXPECT_EQ(p, q);
  attncap_grammar_free(back);
  attncap_grammar_free(g);

  // the caption file has index 0 everywhere: one class only
  EXPECT_EQ(attncap_grammar_train(captions().c_str(), lex_, &cfg, 8, 8, nullptr,
                                  nullptr, &g, nullptr),
            ATTNCAP_E_CONTRACT);
}
