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

// extern "C" surface over the C++ core. Every entry point converts
// exceptions into a status code plus a thread-local message.

#include "attncap/attncap.h"

#include <algorithm>
#include <cstring>
#include <exception>
#include <filesystem>
#include <map>
#include <memory>
#include <new>
#include <string>
#include <utility>
#include <vector>

#include "attncap/binio.hpp"
#include "attncap/captionnet.hpp"
#include "attncap/decode.hpp"
#include "attncap/errors.hpp"
#include "attncap/eval.hpp"
#include "attncap/train.hpp"
#include "attncap/urdutok.hpp"

namespace fs = std::filesystem;
namespace cn = attncap::captionnet;
namespace ut = attncap::urdutok;
namespace tr = attncap::train;
namespace dc = attncap::decode;
namespace ev = attncap::eval;

struct attncap_lexicon {
  ut::CompoundLexicon lexicon;
};
struct attncap_vocab {
  ut::Vocabulary vocab;
};
struct attncap_dataset {
  std::vector<tr::Example> examples;
};
struct attncap_image {
  cn::ImageInput image;
};
struct attncap_model {
  cn::CaptionModel model;
};
struct attncap_trainer {
  std::unique_ptr<tr::Trainer> trainer;
};
struct attncap_caption {
  dc::DecodeResult result;
};
struct attncap_grammar {
  ev::GrammarClassifier clf;
  ut::Vocabulary vocab;
  ut::CompoundLexicon lexicon;
};

namespace {

thread_local std::string g_last_error;

attncap_status fail(attncap_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename Fn>
attncap_status guarded(Fn&& fn) {
  try {
    fn();
    return ATTNCAP_OK;
  } catch (const attncap::Error& e) {
    return fail(static_cast<attncap_status>(static_cast<int>(e.kind())),
                e.what());
  } catch (const std::bad_alloc&) {
    return fail(ATTNCAP_E_INTERNAL, "out of memory");
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(ATTNCAP_E_IO, e.what());
  } catch (const std::exception& e) {
    return fail(ATTNCAP_E_INTERNAL, e.what());
  } catch (...) {
    return fail(ATTNCAP_E_INTERNAL, "unknown exception");
  }
}

void need(const void* p, const char* what) {
  if (p == nullptr) {
    throw attncap::ContractError(std::string("null argument: ") + what);
  }
}

const ut::CompoundLexicon& lexicon_or_empty(const attncap_lexicon* lex) {
  static const ut::CompoundLexicon kEmpty;
  return lex ? lex->lexicon : kEmpty;
}

ut::TokenList tokens_of(const std::string& text,
                        const ut::CompoundLexicon& lexicon) {
  return ut::tokenize(ut::normalize(text), lexicon);
}

// <dir>/<id>.fgrd, falling back to <dir>/<id>.pgm.
fs::path image_path(const fs::path& dir, const std::string& image_id) {
  fs::path p = dir / (image_id + ".fgrd");
  if (fs::exists(p)) return p;
  fs::path q = dir / (image_id + ".pgm");
  if (fs::exists(q)) return q;
  throw attncap::DataError("no feature file for image '" + image_id +
                           "' in " + dir.string());
}

tr::TrainingConfig to_config(const attncap_train_config* c) {
  tr::TrainingConfig cfg;
  if (c == nullptr) return cfg;
  if (c->optimizer) cfg.optimizer = tr::parse_optimizer(c->optimizer);
  cfg.learning_rate = c->learning_rate;
  cfg.momentum = c->momentum;
  cfg.beta1 = c->beta1;
  cfg.beta2 = c->beta2;
  cfg.adam_eps = c->adam_eps;
  cfg.rho = c->rho;
  cfg.rms_eps = c->rms_eps;
  cfg.clip = c->clip;
  cfg.epochs = c->epochs;
  cfg.batch_size = c->batch_size;
  cfg.seed = c->seed;
  cfg.validate();
  return cfg;
}

void fill_bleu(const ev::BleuReport& r, std::size_t max_n, attncap_bleu* out) {
  if (out == nullptr) return;
  *out = attncap_bleu{};
  out->max_n = static_cast<uint32_t>(max_n);
  for (std::size_t i = 0; i < r.precisions.size() && i < 4; ++i) {
    out->precision[i] = r.precisions[i];
  }
  out->brevity_penalty = r.brevity_penalty;
  out->score = r.score;
  out->candidate_length = r.stats.candidate_length;
  out->reference_length = r.stats.reference_length;
}

ut::TokenList split_spaces(const char* text) {
  ut::TokenList out;
  std::string cur;
  for (const char* p = text; *p; ++p) {
    if (*p == ' ') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(*p);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

template <typename T>
void release(T* p) {
  delete p;
}

}  // namespace

extern "C" {

const char* attncap_last_error(void) { return g_last_error.c_str(); }

const char* attncap_status_name(attncap_status status) {
  switch (status) {
    case ATTNCAP_OK: return "ok";
    case ATTNCAP_E_USAGE: return "usage";
    case ATTNCAP_E_DATA: return "data";
    case ATTNCAP_E_FORMAT: return "format";
    case ATTNCAP_E_DIMENSION: return "dimension";
    case ATTNCAP_E_DOMAIN: return "domain";
    case ATTNCAP_E_CONTRACT: return "contract";
    case ATTNCAP_E_CONFIG: return "config";
    case ATTNCAP_E_IO: return "io";
    case ATTNCAP_E_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* attncap_version(void) { return "0.1.0"; }

// ---- text

attncap_status attncap_lexicon_load(const char* path, attncap_lexicon** out) {
  return guarded([&] {
    need(out, "out");
    auto h = std::make_unique<attncap_lexicon>();
    if (path) h->lexicon = ut::CompoundLexicon::load(path);
    *out = h.release();
  });
}

void attncap_lexicon_free(attncap_lexicon* lexicon) { release(lexicon); }

attncap_status attncap_vocab_build(const char* captions_path,
                                   const attncap_lexicon* lexicon,
                                   uint32_t min_count, attncap_vocab** out) {
  return guarded([&] {
    need(captions_path, "captions_path");
    need(out, "out");
    std::vector<ut::TokenList> corpus;
    for (const ut::CaptionRecord& r : ut::read_caption_file(captions_path)) {
      corpus.push_back(tokens_of(r.text, lexicon_or_empty(lexicon)));
    }
    auto h = std::make_unique<attncap_vocab>();
    h->vocab = ut::Vocabulary::build(corpus, min_count);
    *out = h.release();
  });
}

attncap_status attncap_vocab_load(const char* path, attncap_vocab** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    auto h = std::make_unique<attncap_vocab>();
    h->vocab = ut::Vocabulary::load(path);
    *out = h.release();
  });
}

attncap_status attncap_vocab_save(const attncap_vocab* vocab, const char* path) {
  return guarded([&] {
    need(vocab, "vocab");
    need(path, "path");
    vocab->vocab.save(path);
  });
}

size_t attncap_vocab_size(const attncap_vocab* vocab) {
  return vocab ? vocab->vocab.size() : 0;
}

void attncap_vocab_free(attncap_vocab* vocab) { release(vocab); }

attncap_status attncap_encode_captions(const char* captions_path,
                                       const attncap_lexicon* lexicon,
                                       const attncap_vocab* vocab,
                                       const char* out_path) {
  return guarded([&] {
    need(captions_path, "captions_path");
    need(vocab, "vocab");
    need(out_path, "out_path");
    attncap::binio::ByteWriter w;
    for (const ut::CaptionRecord& r : ut::read_caption_file(captions_path)) {
      const auto ids =
          ut::encode(tokens_of(r.text, lexicon_or_empty(lexicon)), vocab->vocab);
      std::string line = r.image_id + "\t" + r.index + "\t";
      for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i) line += ' ';
        line += std::to_string(ids[i]);
      }
      line += '\n';
      w.bytes(line);
    }
    w.commit(out_path);
  });
}

// ---- configuration

void attncap_dims_default(attncap_dims* dims) {
  if (dims == nullptr) return;
  const cn::ModelDims d;
  dims->regions = 16;
  dims->feature_dim = static_cast<uint32_t>(d.feature_dim);
  dims->embed = static_cast<uint32_t>(d.embed);
  dims->attention = static_cast<uint32_t>(d.attention);
  dims->hidden = static_cast<uint32_t>(d.hidden);
}

void attncap_train_config_default(attncap_train_config* cfg) {
  if (cfg == nullptr) return;
  const tr::TrainingConfig d;
  cfg->optimizer = "adam";
  cfg->learning_rate = d.learning_rate;
  cfg->momentum = d.momentum;
  cfg->beta1 = d.beta1;
  cfg->beta2 = d.beta2;
  cfg->adam_eps = d.adam_eps;
  cfg->rho = d.rho;
  cfg->rms_eps = d.rms_eps;
  cfg->clip = d.clip;
  cfg->epochs = static_cast<uint32_t>(d.epochs);
  cfg->batch_size = static_cast<uint32_t>(d.batch_size);
  cfg->seed = d.seed;
}

// ---- data

attncap_status attncap_dataset_load(const char* captions_path,
                                    const char* features_dir,
                                    const attncap_lexicon* lexicon,
                                    const attncap_vocab* vocab,
                                    attncap_dataset** out) {
  return guarded([&] {
    need(captions_path, "captions_path");
    need(features_dir, "features_dir");
    need(vocab, "vocab");
    need(out, "out");
    auto h = std::make_unique<attncap_dataset>();
    std::map<std::string, cn::ImageInput> cache;
    for (const ut::CaptionRecord& r : ut::read_caption_file(captions_path)) {
      auto it = cache.find(r.image_id);
      if (it == cache.end()) {
        it = cache
                 .emplace(r.image_id,
                          cn::load_image(image_path(features_dir, r.image_id)))
                 .first;
      }
      h->examples.push_back(
          {r.image_id, it->second,
           ut::encode(tokens_of(r.text, lexicon_or_empty(lexicon)),
                      vocab->vocab)});
    }
    if (h->examples.empty()) throw attncap::DataError("caption file is empty");
    // one shape for everything
    const cn::ImageInput& first = h->examples.front().image;
    for (const tr::Example& e : h->examples) {
      if (e.image.index() != first.index()) {
        throw attncap::DataError("mixed feature files and raw images");
      }
      if (const auto* g = std::get_if<cn::FeatureGrid>(&e.image)) {
        const auto& g0 = std::get<cn::FeatureGrid>(first);
        if (g->regions != g0.regions || g->dim != g0.dim) {
          throw attncap::DataError("feature grid of '" + e.image_id +
                                   "' differs in shape from the first image");
        }
      } else {
        const auto& r = std::get<cn::RawImage>(e.image);
        const auto& r0 = std::get<cn::RawImage>(first);
        if (r.height != r0.height || r.width != r0.width) {
          throw attncap::DataError("image '" + e.image_id +
                                   "' differs in size from the first image");
        }
      }
    }
    *out = h.release();
  });
}

size_t attncap_dataset_size(const attncap_dataset* dataset) {
  return dataset ? dataset->examples.size() : 0;
}

attncap_status attncap_dataset_shape(const attncap_dataset* dataset,
                                     uint32_t* regions, uint32_t* feature_dim,
                                     uint32_t* patch_pixels) {
  return guarded([&] {
    need(dataset, "dataset");
    const cn::ImageInput& img = dataset->examples.front().image;
    uint32_t l = 0, d = 0, p = 0;
    if (const auto* g = std::get_if<cn::FeatureGrid>(&img)) {
      l = static_cast<uint32_t>(g->regions);
      d = static_cast<uint32_t>(g->dim);
    } else {
      const auto patches = cn::extract_patches(std::get<cn::RawImage>(img));
      l = static_cast<uint32_t>(patches.dim(0));
      p = static_cast<uint32_t>(patches.dim(1));
    }
    if (regions) *regions = l;
    if (feature_dim) *feature_dim = d;
    if (patch_pixels) *patch_pixels = p;
  });
}

void attncap_dataset_free(attncap_dataset* dataset) { release(dataset); }

attncap_status attncap_image_load(const char* path, attncap_image** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    auto h = std::make_unique<attncap_image>();
    h->image = cn::load_image(path);
    *out = h.release();
  });
}

void attncap_image_free(attncap_image* image) { release(image); }

// ---- model and training

attncap_status attncap_model_create(const attncap_dims* dims,
                                    uint32_t vocab_size, uint32_t patch_pixels,
                                    uint64_t seed, attncap_model** out) {
  return guarded([&] {
    need(dims, "dims");
    need(out, "out");
    if (dims->feature_dim == 0 || dims->embed == 0 || dims->attention == 0 ||
        dims->hidden == 0) {
      throw attncap::ConfigError("model dims must be positive");
    }
    if (vocab_size <= ut::kFirstWordId - 1) {
      throw attncap::ConfigError("vocabulary has no words");
    }
    cn::ModelDims d;
    d.feature_dim = dims->feature_dim;
    d.embed = dims->embed;
    d.attention = dims->attention;
    d.hidden = dims->hidden;
    d.vocab = vocab_size;
    d.patch_pixels = patch_pixels;
    auto h = std::make_unique<attncap_model>();
    h->model = cn::CaptionModel::create(d, seed);
    *out = h.release();
  });
}

attncap_status attncap_model_load(const char* checkpoint_path,
                                  attncap_model** out) {
  return guarded([&] {
    need(checkpoint_path, "checkpoint_path");
    need(out, "out");
    auto h = std::make_unique<attncap_model>();
    h->model = tr::load_checkpoint(checkpoint_path).model;
    *out = h.release();
  });
}

attncap_status attncap_model_dims(const attncap_model* model,
                                  attncap_dims* dims, uint32_t* vocab_size,
                                  uint32_t* patch_pixels) {
  return guarded([&] {
    need(model, "model");
    const cn::ModelDims& d = model->model.dims;
    if (dims) {
      dims->regions = 0;
      dims->feature_dim = static_cast<uint32_t>(d.feature_dim);
      dims->embed = static_cast<uint32_t>(d.embed);
      dims->attention = static_cast<uint32_t>(d.attention);
      dims->hidden = static_cast<uint32_t>(d.hidden);
    }
    if (vocab_size) *vocab_size = static_cast<uint32_t>(d.vocab);
    if (patch_pixels) *patch_pixels = static_cast<uint32_t>(d.patch_pixels);
  });
}

void attncap_model_free(attncap_model* model) { release(model); }

attncap_status attncap_trainer_create(const attncap_model* model,
                                      const attncap_train_config* cfg,
                                      attncap_trainer** out) {
  return guarded([&] {
    need(model, "model");
    need(out, "out");
    auto h = std::make_unique<attncap_trainer>();
    h->trainer =
        std::make_unique<tr::Trainer>(model->model.clone(), to_config(cfg));
    *out = h.release();
  });
}

attncap_status attncap_trainer_resume(const char* checkpoint_path,
                                      const attncap_train_config* cfg,
                                      attncap_trainer** out) {
  return guarded([&] {
    need(checkpoint_path, "checkpoint_path");
    need(out, "out");
    auto h = std::make_unique<attncap_trainer>();
    h->trainer = std::make_unique<tr::Trainer>(
        tr::Trainer::load(checkpoint_path, to_config(cfg)));
    *out = h.release();
  });
}

attncap_status attncap_trainer_run_epoch(attncap_trainer* trainer,
                                         const attncap_dataset* dataset,
                                         uint32_t* epoch, double* mean_loss,
                                         double* seconds) {
  return guarded([&] {
    need(trainer, "trainer");
    need(dataset, "dataset");
    const tr::EpochStats s = trainer->trainer->run_epoch(dataset->examples);
    if (epoch) *epoch = static_cast<uint32_t>(s.epoch);
    if (mean_loss) *mean_loss = s.mean_loss;
    if (seconds) *seconds = s.seconds;
  });
}

uint32_t attncap_trainer_epochs_done(const attncap_trainer* trainer) {
  return trainer ? static_cast<uint32_t>(trainer->trainer->epochs_done()) : 0;
}

attncap_status attncap_trainer_save(const attncap_trainer* trainer,
                                    const char* checkpoint_path) {
  return guarded([&] {
    need(trainer, "trainer");
    need(checkpoint_path, "checkpoint_path");
    trainer->trainer->save(checkpoint_path);
  });
}

attncap_status attncap_trainer_model(const attncap_trainer* trainer,
                                     attncap_model** out) {
  return guarded([&] {
    need(trainer, "trainer");
    need(out, "out");
    auto h = std::make_unique<attncap_model>();
    h->model = trainer->trainer->model().clone();
    *out = h.release();
  });
}

void attncap_trainer_free(attncap_trainer* trainer) { release(trainer); }

// ---- decoding

attncap_status attncap_decode(const attncap_model* model,
                              const attncap_image* image, uint32_t beam_width,
                              uint32_t max_len, attncap_caption** out) {
  return guarded([&] {
    need(model, "model");
    need(image, "image");
    need(out, "out");
    auto h = std::make_unique<attncap_caption>();
    h->result = beam_width == 1
                    ? dc::greedy_decode(model->model, image->image, max_len)
                    : dc::beam_decode(model->model, image->image, beam_width,
                                      max_len);
    *out = h.release();
  });
}

size_t attncap_caption_length(const attncap_caption* caption) {
  return caption ? caption->result.ids.size() : 0;
}

attncap_status attncap_caption_ids(const attncap_caption* caption,
                                   uint32_t* ids, size_t capacity) {
  return guarded([&] {
    need(caption, "caption");
    need(ids, "ids");
    const auto& src = caption->result.ids;
    if (capacity < src.size()) {
      throw attncap::ContractError("id buffer holds " +
                                   std::to_string(capacity) + ", need " +
                                   std::to_string(src.size()));
    }
    std::copy(src.begin(), src.end(), ids);
  });
}

double attncap_caption_logprob(const attncap_caption* caption) {
  return caption ? caption->result.total_logprob : 0.0;
}

attncap_status attncap_caption_text(const attncap_caption* caption,
                                    const attncap_vocab* vocab, char* buffer,
                                    size_t capacity, size_t* required) {
  return guarded([&] {
    need(caption, "caption");
    need(vocab, "vocab");
    const std::string text = ut::decode_ids(caption->result.ids, vocab->vocab);
    if (required) *required = text.size() + 1;
    if (buffer == nullptr && capacity == 0) return;
    need(buffer, "buffer");
    if (capacity < text.size() + 1) {
      throw attncap::ContractError("text buffer too small");
    }
    std::memcpy(buffer, text.c_str(), text.size() + 1);
  });
}

attncap_status attncap_caption_write_attention(const attncap_caption* caption,
                                               uint32_t grid_side,
                                               const char* out_dir,
                                               size_t* files_written) {
  return guarded([&] {
    need(caption, "caption");
    need(out_dir, "out_dir");
    std::size_t side = grid_side;
    if (side == 0 && !caption->result.weights.empty()) {
      const std::size_t l = caption->result.weights.front().size();
      while (side * side < l) ++side;
    }
    const auto paths = dc::emit_attention_maps(caption->result, side, out_dir);
    if (files_written) *files_written = paths.size();
  });
}

void attncap_caption_free(attncap_caption* caption) { release(caption); }

// ---- evaluation

attncap_status attncap_bleu_sentence(const char* candidate,
                                     const char* const* references,
                                     size_t reference_count, uint32_t max_n,
                                     attncap_bleu* out) {
  return guarded([&] {
    need(candidate, "candidate");
    need(out, "out");
    if (reference_count > 0) need(references, "references");
    if (max_n < 1 || max_n > 4) {
      throw attncap::ContractError("max_n must be in 1..4");
    }
    std::vector<ev::Sentence> refs;
    for (size_t i = 0; i < reference_count; ++i) {
      need(references[i], "reference");
      refs.push_back(split_spaces(references[i]));
    }
    fill_bleu(ev::sentence_bleu(split_spaces(candidate), refs, max_n), max_n,
              out);
  });
}

attncap_status attncap_evaluate(const attncap_model* model,
                                const attncap_vocab* vocab,
                                const attncap_lexicon* lexicon,
                                const char* captions_path,
                                const char* features_dir, uint32_t beam_width,
                                uint32_t max_len, const char* report_path,
                                attncap_bleu* bleu4, attncap_bleu* bleu1) {
  return guarded([&] {
    need(model, "model");
    need(vocab, "vocab");
    need(captions_path, "captions_path");
    need(features_dir, "features_dir");
    std::vector<ev::Reference> corpus;
    std::map<std::string, std::size_t> slot;
    for (const ut::CaptionRecord& r : ut::read_caption_file(captions_path)) {
      auto it = slot.find(r.image_id);
      if (it == slot.end()) {
        it = slot.emplace(r.image_id, corpus.size()).first;
        corpus.push_back(
            {r.image_id, cn::load_image(image_path(features_dir, r.image_id)),
             {}});
      }
      corpus[it->second].references.push_back(
          tokens_of(r.text, lexicon_or_empty(lexicon)));
    }
    if (corpus.empty()) throw attncap::DataError("caption file is empty");
    const ev::EvaluationReport report =
        ev::evaluate(model->model, vocab->vocab, corpus, beam_width, max_len);
    fill_bleu(report.corpus, 4, bleu4);
    if (bleu1) {
      std::vector<ev::BleuPair> pairs;
      for (std::size_t i = 0; i < corpus.size(); ++i) {
        pairs.push_back({split_spaces(report.per_image[i].caption.c_str()),
                         corpus[i].references});
      }
      fill_bleu(ev::corpus_bleu(pairs, 1), 1, bleu1);
    }
    if (report_path) {
      attncap::binio::ByteWriter w;
      w.bytes(report.to_json());
      w.bytes("\n");
      w.commit(report_path);
    }
  });
}

// ---- grammar classifier

attncap_status attncap_grammar_train(const char* data_path,
                                     const attncap_lexicon* lexicon,
                                     const attncap_train_config* cfg,
                                     uint32_t embed, uint32_t hidden,
                                     attncap_epoch_callback on_epoch,
                                     void* user, attncap_grammar** out,
                                     double* train_accuracy) {
  return guarded([&] {
    need(data_path, "data_path");
    need(out, "out");
    if (embed == 0 || hidden == 0) {
      throw attncap::ConfigError("grammar dims must be positive");
    }
    const ut::CompoundLexicon& lex = lexicon_or_empty(lexicon);
    std::vector<ut::TokenList> corpus;
    std::vector<int> labels;
    for (const ut::CaptionRecord& r : ut::read_caption_file(data_path)) {
      if (r.index != "0" && r.index != "1") {
        throw attncap::DataError("grammar label must be 0 or 1, got '" +
                                 r.index + "'");
      }
      corpus.push_back(tokens_of(r.text, lex));
      labels.push_back(r.index == "1" ? 1 : 0);
    }
    auto h = std::make_unique<attncap_grammar>();
    h->vocab = ut::Vocabulary::build(corpus, 1);
    h->lexicon = lex;
    std::vector<ev::LabeledSentence> data;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      ev::LabeledSentence s;
      for (const auto& tok : corpus[i]) s.ids.push_back(h->vocab.id(tok));
      s.label = labels[i];
      data.push_back(std::move(s));
    }
    tr::TrainingLog log;
    h->clf = ev::grammar_train(data, h->vocab.size(),
                               ev::GrammarDims{embed, hidden}, to_config(cfg),
                               &log);
    if (on_epoch) {
      for (const tr::EpochStats& s : log) {
        on_epoch(static_cast<uint32_t>(s.epoch), s.mean_loss, user);
      }
    }
    if (train_accuracy) *train_accuracy = ev::grammar_accuracy(h->clf, data);
    *out = h.release();
  });
}

attncap_status attncap_grammar_save(const attncap_grammar* grammar,
                                    const char* checkpoint_path,
                                    const char* vocab_path) {
  return guarded([&] {
    need(grammar, "grammar");
    need(checkpoint_path, "checkpoint_path");
    need(vocab_path, "vocab_path");
    tr::save_tensors(checkpoint_path, grammar->clf.named_parameters());
    grammar->vocab.save(vocab_path);
  });
}

attncap_status attncap_grammar_load(const char* checkpoint_path,
                                    const char* vocab_path,
                                    const attncap_lexicon* lexicon,
                                    attncap_grammar** out) {
  return guarded([&] {
    need(checkpoint_path, "checkpoint_path");
    need(vocab_path, "vocab_path");
    need(out, "out");
    auto h = std::make_unique<attncap_grammar>();
    h->clf =
        ev::GrammarClassifier::from_parameters(tr::load_tensors(checkpoint_path));
    h->vocab = ut::Vocabulary::load(vocab_path);
    if (h->vocab.size() != h->clf.vocab_size()) {
      throw attncap::FormatError("grammar vocabulary has " +
                                 std::to_string(h->vocab.size()) +
                                 " entries, classifier expects " +
                                 std::to_string(h->clf.vocab_size()));
    }
    h->lexicon = lexicon_or_empty(lexicon);
    *out = h.release();
  });
}

attncap_status attncap_grammar_score(const attncap_grammar* grammar,
                                     const char* sentence,
                                     double* probability) {
  return guarded([&] {
    need(grammar, "grammar");
    need(sentence, "sentence");
    need(probability, "probability");
    std::vector<ut::Id> ids;
    for (const auto& tok : tokens_of(sentence, grammar->lexicon)) {
      ids.push_back(grammar->vocab.id(tok));
    }
    if (ids.empty()) throw attncap::ContractError("empty sentence");
    *probability = ev::grammar_score(grammar->clf, ids);
  });
}

void attncap_grammar_free(attncap_grammar* grammar) { release(grammar); }

}  // extern "C"
