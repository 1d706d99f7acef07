/* C interface to the multitask semantic dependency parser.
 *
 * All objects are opaque handles created by a function of this header and
 * released with the matching *_free function (NULL is accepted there).
 * Functions that can fail return an mtsdp_status; on failure the calling
 * thread's message is available from mtsdp_last_error(). Strings returned
 * through char** out-parameters are heap allocated and must be released with
 * mtsdp_string_free().
 *
 * Handles are not synchronized. A model may be used by several threads for
 * parsing at once, but must not be freed or modified meanwhile.
 */
#ifndef MTSDP_MTSDP_H
#define MTSDP_MTSDP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define MTSDP_API __declspec(dllexport)
#else
#define MTSDP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mtsdp_status {
  MTSDP_OK = 0,
  MTSDP_ERR_ARGUMENT = 1, /* null handle, out-of-range index, bad option */
  MTSDP_ERR_DATA = 2,     /* malformed corpus, embeddings or checkpoint; I/O failure */
  MTSDP_ERR_CONFIG = 3,   /* invalid configuration value */
  MTSDP_ERR_INTERNAL = 4  /* bug or resource exhaustion */
} mtsdp_status;

typedef struct mtsdp_config mtsdp_config;
typedef struct mtsdp_corpus mtsdp_corpus;
typedef struct mtsdp_embeddings mtsdp_embeddings;
typedef struct mtsdp_model mtsdp_model;

MTSDP_API const char* mtsdp_version(void);

/* Message of the last failed call on this thread; "" if none. */
MTSDP_API const char* mtsdp_last_error(void);

MTSDP_API void mtsdp_string_free(char* s);

/* One of trace, debug, info, warn, error, critical, off. */
MTSDP_API mtsdp_status mtsdp_set_log_level(const char* level);

/* ---- configuration ---- */

MTSDP_API mtsdp_status mtsdp_config_new(mtsdp_config** out);
/* Reads a JSON object; absent keys keep their defaults, unknown keys fail. */
MTSDP_API mtsdp_status mtsdp_config_load(const char* path, mtsdp_config** out);
/* Sets one key from a JSON value, e.g. ("epochs", "5") or ("variant", "\"FREDA3\""). */
MTSDP_API mtsdp_status mtsdp_config_set(mtsdp_config* config, const char* key, const char* json_value);
/* The JSON value of one key. */
MTSDP_API mtsdp_status mtsdp_config_get(const mtsdp_config* config, const char* key, char** json_value);
MTSDP_API mtsdp_status mtsdp_config_to_json(const mtsdp_config* config, char** out);
MTSDP_API void mtsdp_config_free(mtsdp_config* config);

/* ---- corpora ---- */

/* Parallel corpora in SDP 2015 format, one file per task, with identical
 * sentences. Task names are the file names up to their first dot.
 * Sentences whose gold graph has a cycle are skipped with a warning. */
MTSDP_API mtsdp_status mtsdp_corpus_read(const char* const* paths, size_t num_paths, mtsdp_corpus** out);
/* Rule-generated corpus over 1 to 3 tasks, for demos and tests. */
MTSDP_API mtsdp_status mtsdp_corpus_synthetic(int tasks, int sentences, uint64_t seed, mtsdp_corpus** out);
MTSDP_API size_t mtsdp_corpus_num_tasks(const mtsdp_corpus* corpus);
MTSDP_API size_t mtsdp_corpus_num_sentences(const mtsdp_corpus* corpus);
/* Name of a task, or NULL when out of range. Owned by the corpus. */
MTSDP_API const char* mtsdp_corpus_task_name(const mtsdp_corpus* corpus, size_t task);
MTSDP_API mtsdp_status mtsdp_corpus_write(const mtsdp_corpus* corpus, size_t task, const char* path);
MTSDP_API void mtsdp_corpus_free(mtsdp_corpus* corpus);

/* ---- embeddings ---- */

/* "word v1 ... vd" lines; fails unless every vector has `dimension` values. */
MTSDP_API mtsdp_status mtsdp_embeddings_load(const char* path, int dimension, mtsdp_embeddings** out);
MTSDP_API void mtsdp_embeddings_free(mtsdp_embeddings* embeddings);

/* ---- models ---- */

/* Builds a model from the training corpus and trains it. `dev`,
 * `embeddings` and `log_path` may be NULL. With a dev corpus the parameters
 * of the best dev epoch are kept. The log gets one JSON object per epoch. */
MTSDP_API mtsdp_status mtsdp_train(const mtsdp_config* config, const mtsdp_corpus* train,
                                   const mtsdp_corpus* dev, const mtsdp_embeddings* embeddings,
                                   const char* log_path, int threads, mtsdp_model** out);
MTSDP_API mtsdp_status mtsdp_model_save(const mtsdp_model* model, const char* path);
MTSDP_API mtsdp_status mtsdp_model_load(const char* path, mtsdp_model** out);
MTSDP_API size_t mtsdp_model_num_tasks(const mtsdp_model* model);
MTSDP_API size_t mtsdp_model_num_parameters(const mtsdp_model* model);
/* Sets every network parameter to zero; all part scores become 0. */
MTSDP_API mtsdp_status mtsdp_model_zero(mtsdp_model* model);
MTSDP_API void mtsdp_model_free(mtsdp_model* model);

/* Parses the sentences of the input's first task. The result has one task
 * per model task, with tops and frames copied from the input. */
MTSDP_API mtsdp_status mtsdp_parse(const mtsdp_model* model, const mtsdp_corpus* input, int threads,
                                   mtsdp_corpus** out);

/* ---- evaluation ---- */

/* JSON report of labeled and unlabeled P/R/F per task and micro-averaged.
 * Both corpora need the same number of tasks and the same sentences. */
MTSDP_API mtsdp_status mtsdp_evaluate(const mtsdp_corpus* gold, const mtsdp_corpus* predicted,
                                      int include_tops, char** json_out);

/* JSON matrices of pairwise directed and undirected unlabeled F1 between
 * the tasks of a parallel corpus. */
MTSDP_API mtsdp_status mtsdp_similarity(const mtsdp_corpus* corpus, char** json_out);

/* Trains the arc pruner on `train` and reports, per task, the fraction of
 * candidate arcs kept at the configured threshold and the gold recall on
 * `eval` (the training corpus when NULL), plus label filter sizes. */
MTSDP_API mtsdp_status mtsdp_prune_stats(const mtsdp_config* config, const mtsdp_corpus* train,
                                         const mtsdp_corpus* eval, char** json_out);

/* Finite-difference check of the full training loss on a tiny random
 * FREDA3 model (BiLSTM 8, representations 8, rank 4, 3 tokens, 2 tasks,
 * exact decoding). `json_out` may be NULL. */
MTSDP_API mtsdp_status mtsdp_gradcheck(uint64_t seed, double* max_rel_error, char** json_out);

#ifdef __cplusplus
}
#endif

#endif /* MTSDP_MTSDP_H */
