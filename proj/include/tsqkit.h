/* C interface to the tsqkit library.
 *
 * Every function that can fail returns a tsqk_status; TSQK_OK is zero. On
 * failure tsqk_last_error() holds a message for the calling thread until the
 * next failing call. Strings returned through out-parameters are heap copies
 * owned by the caller; release them with tsqk_free().
 */
#ifndef TSQKIT_H
#define TSQKIT_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define TSQK_API __declspec(dllexport)
#elif defined(__GNUC__)
#define TSQK_API __attribute__((visibility("default")))
#else
#define TSQK_API
#endif

typedef enum tsqk_status {
  TSQK_OK = 0,
  TSQK_INVALID_ARGUMENT = 1,
  TSQK_DECODE_ERROR = 2,
  TSQK_PARSE_ERROR = 3,
  TSQK_IO_ERROR = 4,
  TSQK_CONFIG_ERROR = 5,
  TSQK_SHAPE_ERROR = 6,
  TSQK_TRAIN_ERROR = 7,
  TSQK_INTERNAL_ERROR = 8
} tsqk_status;

/* Library version, e.g. "0.1.0". Static storage; do not free. */
TSQK_API const char* tsqk_version(void);

/* Message of the last failing call on this thread, or "" if none. Static
 * per-thread storage; do not free. */
TSQK_API const char* tsqk_last_error(void);

/* Release a string the library returned through an out-parameter. */
TSQK_API void tsqk_free(char* ptr);

/* ------------------------------------------------------------------ */
/* Lexicons and segmentation                                           */

typedef struct tsqk_lexicon tsqk_lexicon;

/* kind: "word" or "syllable". One entry per line; '#' lines are comments. */
TSQK_API tsqk_status tsqk_lexicon_open(const char* path, const char* kind, tsqk_lexicon** out);

/* Build from an in-memory array of UTF-8 entries. */
TSQK_API tsqk_status tsqk_lexicon_build(const char* const* entries, size_t n_entries,
                                        const char* kind, tsqk_lexicon** out);

TSQK_API size_t tsqk_lexicon_size(const tsqk_lexicon* lex);

TSQK_API void tsqk_lexicon_close(tsqk_lexicon* lex);

/* Maximal-matching segmentation. *out receives the tokens joined by the
 * single-byte separator sep (the input must not contain it); caller frees. */
TSQK_API tsqk_status tsqk_segment(const tsqk_lexicon* lex, const char* text_utf8, char sep,
                                  char** out);

/* Text cleaning. mode: "lm" or "classifier". Tokens come back joined by sep.
 * rep_run_threshold <= 0 means the default (3). */
TSQK_API tsqk_status tsqk_clean(const tsqk_lexicon* lex, const char* text_utf8, const char* mode,
                                int rep_run_threshold, char sep, char** out);

/* ------------------------------------------------------------------ */
/* Trained models                                                      */

typedef struct tsqk_model tsqk_model;

TSQK_API tsqk_status tsqk_model_open(const char* path, tsqk_model** out);

/* "nbsvm", "crf", "subword" or "vectorizer". Static storage; do not free. */
TSQK_API const char* tsqk_model_kind(const tsqk_model* model);

TSQK_API void tsqk_model_close(tsqk_model* model);

/* Classify one raw text with an nbsvm model. *out receives a JSON object
 * {"label" or "labels", "proba"}; caller frees. */
TSQK_API tsqk_status tsqk_nbsvm_predict(const tsqk_model* model, const char* text_utf8,
                                        char** out);

/* Tag a pre-tokenized sequence with a crf model. *out receives the tags
 * joined by sep; caller frees. */
TSQK_API tsqk_status tsqk_crf_tag(const tsqk_model* model, const char* const* tokens,
                                  size_t n_tokens, char sep, char** out);

/* Encode one text with a subword model. *out receives the pieces joined by
 * sep; caller frees. */
TSQK_API tsqk_status tsqk_subword_encode(const tsqk_model* model, const char* text_utf8, char sep,
                                         char** out);

/* ------------------------------------------------------------------ */
/* Batch commands                                                      */
/*                                                                     */
/* Each takes a JSON object (UTF-8) with the same keys the tsq CLI     */
/* accepts and returns a JSON summary through *out (caller frees).     */
/* Unknown keys are rejected. out may be NULL to discard the summary.  */

TSQK_API tsqk_status tsqk_cmd_preprocess(const char* config_json, char** out);
TSQK_API tsqk_status tsqk_cmd_train_nbsvm(const char* config_json, char** out);
TSQK_API tsqk_status tsqk_cmd_train_crf(const char* config_json, char** out);
TSQK_API tsqk_status tsqk_cmd_predict(const char* config_json, char** out);
TSQK_API tsqk_status tsqk_cmd_evaluate(const char* config_json, char** out);
TSQK_API tsqk_status tsqk_cmd_subword_train(const char* config_json, char** out);
TSQK_API tsqk_status tsqk_cmd_subword_encode(const char* config_json, char** out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* TSQKIT_H */
