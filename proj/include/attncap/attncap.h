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

/*
 * attncap C API.
 *
 * Every object is an opaque handle created by an attncap_*_load / _create /
 * _build call and released with the matching _free (NULL is accepted).
 * Functions that can fail return attncap_status; on failure a one-line
 * description is available from attncap_last_error() on the same thread
 * until the next failing call.
 *
 * Handles are not internally synchronized. A model may be shared for
 * concurrent decoding by several threads; a trainer may not.
 */

#ifndef ATTNCAP_ATTNCAP_H_
#define ATTNCAP_ATTNCAP_H_

#include <stddef.h>
#include <stdint.h>

#if defined(ATTNCAP_BUILDING)
#define ATTNCAP_API __attribute__((visibility("default")))
#else
#define ATTNCAP_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum attncap_status {
  ATTNCAP_OK = 0,
  ATTNCAP_E_USAGE = 1,
  ATTNCAP_E_DATA = 2,
  ATTNCAP_E_FORMAT = 3,
  ATTNCAP_E_DIMENSION = 4,
  ATTNCAP_E_DOMAIN = 5,
  ATTNCAP_E_CONTRACT = 6,
  ATTNCAP_E_CONFIG = 7,
  ATTNCAP_E_IO = 8,
  ATTNCAP_E_INTERNAL = 9
} attncap_status;

ATTNCAP_API const char* attncap_last_error(void);
ATTNCAP_API const char* attncap_status_name(attncap_status status);
ATTNCAP_API const char* attncap_version(void);

/* ---- text ------------------------------------------------------------ */

typedef struct attncap_lexicon attncap_lexicon;

/* One compound per line, tokens separated by spaces. A NULL path yields an
 * empty lexicon. */
ATTNCAP_API attncap_status attncap_lexicon_load(const char* path,
                                                attncap_lexicon** out);
ATTNCAP_API void attncap_lexicon_free(attncap_lexicon* lexicon);

typedef struct attncap_vocab attncap_vocab;

/* Builds from a caption file (image_id<TAB>index<TAB>text). */
ATTNCAP_API attncap_status attncap_vocab_build(const char* captions_path,
                                               const attncap_lexicon* lexicon,
                                               uint32_t min_count,
                                               attncap_vocab** out);
ATTNCAP_API attncap_status attncap_vocab_load(const char* path,
                                              attncap_vocab** out);
ATTNCAP_API attncap_status attncap_vocab_save(const attncap_vocab* vocab,
                                              const char* path);
ATTNCAP_API size_t attncap_vocab_size(const attncap_vocab* vocab);
ATTNCAP_API void attncap_vocab_free(attncap_vocab* vocab);

/* Writes image_id<TAB>index<TAB>space-separated ids (START ... END). */
ATTNCAP_API attncap_status attncap_encode_captions(
    const char* captions_path, const attncap_lexicon* lexicon,
    const attncap_vocab* vocab, const char* out_path);

/* ---- configuration ---------------------------------------------------- */

typedef struct attncap_dims {
  uint32_t regions;     /* L */
  uint32_t feature_dim; /* D */
  uint32_t embed;       /* E */
  uint32_t attention;   /* A */
  uint32_t hidden;      /* H */
} attncap_dims;

/* 16 x 32 x 64 x 64 x 128 */
ATTNCAP_API void attncap_dims_default(attncap_dims* dims);

typedef struct attncap_train_config {
  const char* optimizer; /* "sgd_momentum", "adam" or "rmsprop" */
  double learning_rate;
  double momentum;
  double beta1;
  double beta2;
  double adam_eps;
  double rho;
  double rms_eps;
  double clip;
  uint32_t epochs;
  uint32_t batch_size;
  uint64_t seed;
} attncap_train_config;

ATTNCAP_API void attncap_train_config_default(attncap_train_config* cfg);

/* ---- data -------------------------------------------------------------- */

typedef struct attncap_dataset attncap_dataset;

/* Pairs every caption with <features_dir>/<image_id>.fgrd, or .pgm when no
 * feature file exists. All images must share one shape. */
ATTNCAP_API attncap_status attncap_dataset_load(const char* captions_path,
                                                const char* features_dir,
                                                const attncap_lexicon* lexicon,
                                                const attncap_vocab* vocab,
                                                attncap_dataset** out);
ATTNCAP_API size_t attncap_dataset_size(const attncap_dataset* dataset);
/* regions and feature_dim of the stored grids; for raw images regions is 16,
 * feature_dim 0 and patch_pixels the pixels per patch. */
ATTNCAP_API attncap_status attncap_dataset_shape(const attncap_dataset* dataset,
                                                 uint32_t* regions,
                                                 uint32_t* feature_dim,
                                                 uint32_t* patch_pixels);
ATTNCAP_API void attncap_dataset_free(attncap_dataset* dataset);

typedef struct attncap_image attncap_image;

/* FGRD feature file or binary PGM, chosen by magic. */
ATTNCAP_API attncap_status attncap_image_load(const char* path,
                                              attncap_image** out);
ATTNCAP_API void attncap_image_free(attncap_image* image);

/* ---- model and training ----------------------------------------------- */

typedef struct attncap_model attncap_model;

/* patch_pixels > 0 adds a trainable patch encoder for raw images. */
ATTNCAP_API attncap_status attncap_model_create(const attncap_dims* dims,
                                                uint32_t vocab_size,
                                                uint32_t patch_pixels,
                                                uint64_t seed,
                                                attncap_model** out);
ATTNCAP_API attncap_status attncap_model_load(const char* checkpoint_path,
                                              attncap_model** out);
/* dims->regions is reported as 0: the model accepts any region count. */
ATTNCAP_API attncap_status attncap_model_dims(const attncap_model* model,
                                              attncap_dims* dims,
                                              uint32_t* vocab_size,
                                              uint32_t* patch_pixels);
ATTNCAP_API void attncap_model_free(attncap_model* model);

typedef struct attncap_trainer attncap_trainer;

/* The trainer trains its own copy of `model`. */
ATTNCAP_API attncap_status attncap_trainer_create(
    const attncap_model* model, const attncap_train_config* cfg,
    attncap_trainer** out);
ATTNCAP_API attncap_status attncap_trainer_resume(
    const char* checkpoint_path, const attncap_train_config* cfg,
    attncap_trainer** out);
ATTNCAP_API attncap_status attncap_trainer_run_epoch(
    attncap_trainer* trainer, const attncap_dataset* dataset, uint32_t* epoch,
    double* mean_loss, double* seconds);
ATTNCAP_API uint32_t attncap_trainer_epochs_done(const attncap_trainer* trainer);
/* Model, optimizer slots and epoch counter. */
ATTNCAP_API attncap_status attncap_trainer_save(const attncap_trainer* trainer,
                                                const char* checkpoint_path);
/* Independent snapshot of the current parameters. */
ATTNCAP_API attncap_status attncap_trainer_model(const attncap_trainer* trainer,
                                                 attncap_model** out);
ATTNCAP_API void attncap_trainer_free(attncap_trainer* trainer);

/* ---- decoding ---------------------------------------------------------- */

typedef struct attncap_caption attncap_caption;

/* beam_width 1 is greedy decoding. */
ATTNCAP_API attncap_status attncap_decode(const attncap_model* model,
                                          const attncap_image* image,
                                          uint32_t beam_width, uint32_t max_len,
                                          attncap_caption** out);
/* Token ids including START (and END when produced). */
ATTNCAP_API size_t attncap_caption_length(const attncap_caption* caption);
ATTNCAP_API attncap_status attncap_caption_ids(const attncap_caption* caption,
                                               uint32_t* ids, size_t capacity);
ATTNCAP_API double attncap_caption_logprob(const attncap_caption* caption);
/* UTF-8 text. `required` receives the size including the terminator; the
 * call fails with ATTNCAP_E_CONTRACT when capacity is too small. */
ATTNCAP_API attncap_status attncap_caption_text(const attncap_caption* caption,
                                                const attncap_vocab* vocab,
                                                char* buffer, size_t capacity,
                                                size_t* required);
/* step_<k>_<word-id>.pgm per generated token. grid_side 0 takes the square
 * root of the region count, which must then be a perfect square. */
ATTNCAP_API attncap_status attncap_caption_write_attention(
    const attncap_caption* caption, uint32_t grid_side, const char* out_dir,
    size_t* files_written);
ATTNCAP_API void attncap_caption_free(attncap_caption* caption);

/* ---- evaluation -------------------------------------------------------- */

typedef struct attncap_bleu {
  uint32_t max_n;
  double precision[4];
  double brevity_penalty;
  double score;
  uint64_t candidate_length;
  uint64_t reference_length;
} attncap_bleu;

/* Space-separated token strings; max_n in 1..4. */
ATTNCAP_API attncap_status attncap_bleu_sentence(const char* candidate,
                                                 const char* const* references,
                                                 size_t reference_count,
                                                 uint32_t max_n,
                                                 attncap_bleu* out);

/* Captions every image named in the caption file and scores them against
 * all of that image's captions. Writes the JSON report when report_path is
 * not NULL. bleu4 / bleu1 may be NULL. */
ATTNCAP_API attncap_status attncap_evaluate(
    const attncap_model* model, const attncap_vocab* vocab,
    const attncap_lexicon* lexicon, const char* captions_path,
    const char* features_dir, uint32_t beam_width, uint32_t max_len,
    const char* report_path, attncap_bleu* bleu4, attncap_bleu* bleu1);

/* ---- grammar classifier ------------------------------------------------ */

typedef struct attncap_grammar attncap_grammar;

typedef void (*attncap_epoch_callback)(uint32_t epoch, double mean_loss,
                                       void* user);

/* Caption-file layout with a 0/1 label in the index column. The vocabulary
 * is built from the data itself. */
ATTNCAP_API attncap_status attncap_grammar_train(
    const char* data_path, const attncap_lexicon* lexicon,
    const attncap_train_config* cfg, uint32_t embed, uint32_t hidden,
    attncap_epoch_callback on_epoch, void* user, attncap_grammar** out,
    double* train_accuracy);
ATTNCAP_API attncap_status attncap_grammar_save(const attncap_grammar* grammar,
                                                const char* checkpoint_path,
                                                const char* vocab_path);
ATTNCAP_API attncap_status attncap_grammar_load(const char* checkpoint_path,
                                                const char* vocab_path,
                                                const attncap_lexicon* lexicon,
                                                attncap_grammar** out);
/* Probability that the sentence is grammatical. */
ATTNCAP_API attncap_status attncap_grammar_score(const attncap_grammar* grammar,
                                                 const char* sentence,
                                                 double* probability);
ATTNCAP_API void attncap_grammar_free(attncap_grammar* grammar);

#ifdef __cplusplus
}
#endif

#endif /* ATTNCAP_ATTNCAP_H_ */
