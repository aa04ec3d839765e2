/* Probabilistic concept-based retrieval engine: C API.
 *
 * Every function that can fail returns pcir_status; PCIR_OK means success.
 * On failure, pcir_last_error() returns a message for the calling thread.
 * Out-parameters are written only on success. Handles are freed with the
 * matching *_free function; all getters return memory owned by the handle.
 */
#ifndef PCIR_H
#define PCIR_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define PCIR_API __declspec(dllexport)
#else
#define PCIR_API __attribute__((visibility("default")))
#endif

typedef enum pcir_status {
  PCIR_OK = 0,
  PCIR_ERR_ARGUMENT = 1, /* bad call: null pointer, unknown name, bad parameter */
  PCIR_ERR_DOMAIN = 2,   /* valid call, impossible request: zero-probability evidence, ... */
  PCIR_ERR_PARSE = 3,    /* malformed file content */
  PCIR_ERR_IO = 4        /* file not readable/writable */
} pcir_status;

typedef struct pcir_network pcir_network;
typedef struct pcir_lexicon pcir_lexicon;
typedef struct pcir_dataset pcir_dataset;
typedef struct pcir_corpus pcir_corpus;
typedef struct pcir_scores pcir_scores;
typedef struct pcir_curve pcir_curve;
typedef struct pcir_strings pcir_strings;

/* Message for the most recent failure on this thread; never NULL. */
PCIR_API const char* pcir_last_error(void);

/* --- string lists ------------------------------------------------------- */

PCIR_API size_t pcir_strings_count(const pcir_strings* list);
PCIR_API const char* pcir_strings_get(const pcir_strings* list, size_t index);
PCIR_API void pcir_strings_free(pcir_strings* list);

/* Frees a char* returned through an out-parameter. */
PCIR_API void pcir_string_free(char* text);

/* --- networks ----------------------------------------------------------- */

PCIR_API pcir_status pcir_network_parse(const char* json_text, pcir_network** out);
PCIR_API pcir_status pcir_network_load(const char* path, pcir_network** out);
PCIR_API pcir_status pcir_network_serialize(const pcir_network* net, char** out_json);
PCIR_API pcir_status pcir_network_save(const pcir_network* net, const char* path);
/* Always succeeds on a live handle; parse/load reject invalid networks, so
 * the list is empty unless the handle was built by other means. */
PCIR_API pcir_status pcir_network_validate(const pcir_network* net, pcir_strings** out_violations);
PCIR_API size_t pcir_network_variable_count(const pcir_network* net);
PCIR_API size_t pcir_network_edge_count(const pcir_network* net);
PCIR_API void pcir_network_free(pcir_network* net);

/* --- learning ----------------------------------------------------------- */

typedef struct pcir_learn_params {
  double alpha;              /* chi-square significance level, in (0,1) */
  size_t max_condition_size; /* cap on conditioning set size */
  size_t cv_folds;           /* cross-validation folds, >= 2 */
  size_t cv_agreement;       /* folds that must agree on an edge, <= cv_folds */
  double min_expected_count; /* chi-square expected-cell floor */
  double smoothing;          /* Laplace pseudo-count, >= 0 */
  int use_or_rule;           /* 0 = AND symmetry rule, nonzero = OR */
} pcir_learn_params;

PCIR_API void pcir_learn_params_init(pcir_learn_params* params);

PCIR_API pcir_status pcir_dataset_load(const char* csv_path, const char* manifest_path_or_null,
                                       pcir_dataset** out);
PCIR_API size_t pcir_dataset_rows(const pcir_dataset* data);
PCIR_API size_t pcir_dataset_columns(const pcir_dataset* data);
PCIR_API void pcir_dataset_free(pcir_dataset* data);

/* Learns structure, potentials and word links. out_links and out_diagnostics
 * may be NULL when the caller does not need them. Diagnostics come back as
 * "event subject" pairs separated by one space. */
PCIR_API pcir_status pcir_learn(const pcir_dataset* data, const pcir_learn_params* params_or_null,
                                pcir_network** out_net, pcir_lexicon** out_links,
                                pcir_strings** out_diagnostics);

/* --- lexicons ----------------------------------------------------------- */

PCIR_API pcir_status pcir_lexicon_parse(const char* json_text, pcir_lexicon** out);
PCIR_API pcir_status pcir_lexicon_load(const char* path, pcir_lexicon** out);
PCIR_API pcir_status pcir_lexicon_save(const pcir_lexicon* lexicon, const char* path);
PCIR_API size_t pcir_lexicon_size(const pcir_lexicon* lexicon);
PCIR_API void pcir_lexicon_free(pcir_lexicon* lexicon);

/* --- corpora ------------------------------------------------------------ */

/* Accepts a directory of text files (id = filename stem) or a JSON-lines
 * file of {"id", "text"} objects. */
PCIR_API pcir_status pcir_corpus_load(const char* path, pcir_corpus** out);
PCIR_API size_t pcir_corpus_size(const pcir_corpus* corpus);
PCIR_API void pcir_corpus_free(pcir_corpus* corpus);

/* --- inference ---------------------------------------------------------- */

/* Posterior of `concept_name` given one document text. out_unknown_words (may be
 * NULL) counts tokens matched to no lexicon entry. */
PCIR_API pcir_status pcir_infer_text(const pcir_network* net, const pcir_lexicon* lexicon,
                                     const char* text, const char* concept_name,
                                     double* out_p_present, double* out_p_absent,
                                     size_t* out_unknown_words);

/* --- corpus scoring ------------------------------------------------------ */

/* jobs = 0 picks the hardware thread count; results do not depend on jobs. */
PCIR_API pcir_status pcir_score_corpus(const pcir_network* net, const pcir_lexicon* lexicon,
                                       const pcir_corpus* corpus, const char* concept_name,
                                       size_t jobs, pcir_scores** out);
PCIR_API size_t pcir_scores_count(const pcir_scores* scores);
PCIR_API size_t pcir_scores_error_count(const pcir_scores* scores);
PCIR_API pcir_status pcir_scores_get(const pcir_scores* scores, size_t index,
                                     const char** out_id, double* out_score,
                                     int* out_error_flag);
/* Empty string when the document scored cleanly. */
PCIR_API const char* pcir_scores_error_message(const pcir_scores* scores, size_t index);
PCIR_API pcir_status pcir_scores_save_csv(const pcir_scores* scores, const char* path);
PCIR_API pcir_status pcir_scores_load_csv(const char* path, pcir_scores** out);
PCIR_API void pcir_scores_free(pcir_scores* scores);

/* --- evaluation ---------------------------------------------------------- */

/* Precision/recall over the default threshold sweep (101 evenly spaced
 * values plus every observed score) against a labels CSV (id,relevant). */
PCIR_API pcir_status pcir_evaluate(const pcir_scores* scores, const char* labels_csv_path,
                                   pcir_curve** out);
PCIR_API size_t pcir_curve_point_count(const pcir_curve* curve);
PCIR_API pcir_status pcir_curve_save_csv(const pcir_curve* curve, const char* path);
PCIR_API pcir_status pcir_curve_stats_json(const pcir_curve* curve, char** out_json);
PCIR_API void pcir_curve_free(pcir_curve* curve);

/* --- synthesis ----------------------------------------------------------- */

/* Forward-samples n documents from a directed network and writes
 * dataset.csv, manifest.json, labels.csv and corpus.jsonl into out_dir.
 * Labels carry the sampled state of `concept_name`. */
PCIR_API pcir_status pcir_synthesize(const pcir_network* net, const pcir_lexicon* lexicon,
                                     size_t n, uint64_t seed, const char* concept_name,
                                     const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* PCIR_H */
