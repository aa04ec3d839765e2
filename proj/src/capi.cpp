#include "pcir.h"

#include <cstring>
#include <exception>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "error.hpp"
#include "fsio.hpp"
#include "infer.hpp"
#include "learn.hpp"
#include "model.hpp"
#include "retrieve.hpp"

struct pcir_network {
  pcir::Network net;
};
struct pcir_lexicon {
  pcir::Lexicon lex;
};
struct pcir_dataset {
  pcir::Dataset data;
};
struct pcir_corpus {
  std::vector<pcir::Document> docs;
};
struct pcir_scores {
  pcir::RankedScores scores;
};
struct pcir_curve {
  pcir::PRCurve curve;
};
struct pcir_strings {
  std::vector<std::string> items;
};

namespace {

thread_local std::string g_last_error;

pcir_status status_of(pcir::ErrorCode code) {
  switch (code) {
    case pcir::ErrorCode::Argument: return PCIR_ERR_ARGUMENT;
    case pcir::ErrorCode::Domain: return PCIR_ERR_DOMAIN;
    case pcir::ErrorCode::Parse: return PCIR_ERR_PARSE;
    case pcir::ErrorCode::Io: return PCIR_ERR_IO;
  }
  return PCIR_ERR_DOMAIN;
}

template <typename F>
pcir_status guarded(F&& body) {
  try {
    g_last_error.clear();
    return body();
  } catch (const pcir::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PCIR_ERR_DOMAIN;
  } catch (...) {
    g_last_error = "unknown failure";
    return PCIR_ERR_DOMAIN;
  }
}

pcir_status fail_argument(const char* message) {
  g_last_error = message;
  return PCIR_ERR_ARGUMENT;
}

char* copy_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* pcir_last_error(void) { return g_last_error.c_str(); }

/* --- string lists ------------------------------------------------------- */

size_t pcir_strings_count(const pcir_strings* list) { return list ? list->items.size() : 0; }

const char* pcir_strings_get(const pcir_strings* list, size_t index) {
  if (!list || index >= list->items.size()) return nullptr;
  return list->items[index].c_str();
}

void pcir_strings_free(pcir_strings* list) { delete list; }

void pcir_string_free(char* text) { delete[] text; }

/* --- networks ----------------------------------------------------------- */

pcir_status pcir_network_parse(const char* json_text, pcir_network** out) {
  if (!json_text || !out) return fail_argument("pcir_network_parse: null argument");
  return guarded([&] {
    pcir::ParseResult result = pcir::parse_network(json_text);
    if (!result.ok()) {
      std::string joined;
      for (const auto& e : result.errors) {
        if (!joined.empty()) joined += '\n';
        joined += e;
      }
      g_last_error = joined;
      return PCIR_ERR_PARSE;
    }
    *out = new pcir_network{std::move(*result.network)};
    return PCIR_OK;
  });
}

pcir_status pcir_network_load(const char* path, pcir_network** out) {
  if (!path || !out) return fail_argument("pcir_network_load: null argument");
  return guarded([&] {
    const std::string text = pcir::read_file(path);
    return pcir_network_parse(text.c_str(), out);
  });
}

pcir_status pcir_network_serialize(const pcir_network* net, char** out_json) {
  if (!net || !out_json) return fail_argument("pcir_network_serialize: null argument");
  return guarded([&] {
    *out_json = copy_string(pcir::serialize_network(net->net));
    return PCIR_OK;
  });
}

pcir_status pcir_network_save(const pcir_network* net, const char* path) {
  if (!net || !path) return fail_argument("pcir_network_save: null argument");
  return guarded([&] {
    pcir::write_file(path, pcir::serialize_network(net->net));
    return PCIR_OK;
  });
}

pcir_status pcir_network_validate(const pcir_network* net, pcir_strings** out_violations) {
  if (!net || !out_violations) return fail_argument("pcir_network_validate: null argument");
  return guarded([&] {
    *out_violations = new pcir_strings{pcir::validate(net->net)};
    return PCIR_OK;
  });
}

size_t pcir_network_variable_count(const pcir_network* net) {
  return net ? net->net.variables.size() : 0;
}

size_t pcir_network_edge_count(const pcir_network* net) {
  if (!net) return 0;
  return net->net.kind == pcir::NetworkKind::Directed ? net->net.arcs.size()
                                                      : net->net.edges.size();
}

void pcir_network_free(pcir_network* net) { delete net; }

/* --- learning ----------------------------------------------------------- */

void pcir_learn_params_init(pcir_learn_params* params) {
  if (!params) return;
  const pcir::LearnParams defaults;
  params->alpha = defaults.alpha;
  params->max_condition_size = defaults.max_condition_size;
  params->cv_folds = defaults.cv_folds;
  params->cv_agreement = defaults.cv_agreement;
  params->min_expected_count = defaults.min_expected_count;
  params->smoothing = defaults.smoothing;
  params->use_or_rule = 0;
}

pcir_status pcir_dataset_load(const char* csv_path, const char* manifest_path_or_null,
                              pcir_dataset** out) {
  if (!csv_path || !out) return fail_argument("pcir_dataset_load: null argument");
  return guarded([&] {
    *out = new pcir_dataset{
        pcir::load_dataset(csv_path, manifest_path_or_null ? manifest_path_or_null : "")};
    return PCIR_OK;
  });
}

size_t pcir_dataset_rows(const pcir_dataset* data) { return data ? data->data.row_count() : 0; }

size_t pcir_dataset_columns(const pcir_dataset* data) {
  return data ? data->data.column_count() : 0;
}

void pcir_dataset_free(pcir_dataset* data) { delete data; }

pcir_status pcir_learn(const pcir_dataset* data, const pcir_learn_params* params_or_null,
                       pcir_network** out_net, pcir_lexicon** out_links,
                       pcir_strings** out_diagnostics) {
  if (!data || !out_net) return fail_argument("pcir_learn: null argument");
  return guarded([&] {
    pcir::LearnParams params;
    if (params_or_null) {
      params.alpha = params_or_null->alpha;
      params.max_condition_size = params_or_null->max_condition_size;
      params.cv_folds = params_or_null->cv_folds;
      params.cv_agreement = params_or_null->cv_agreement;
      params.min_expected_count = params_or_null->min_expected_count;
      params.smoothing = params_or_null->smoothing;
      params.symmetry_rule = params_or_null->use_or_rule
                                 ? pcir::LearnParams::SymmetryRule::Or
                                 : pcir::LearnParams::SymmetryRule::And;
    }
    pcir::LearnOutput result = pcir::learn_network(data->data, params);
    if (out_links) *out_links = new pcir_lexicon{pcir::Lexicon::from_links(result.links)};
    if (out_diagnostics) {
      auto* list = new pcir_strings;
      for (const auto& d : result.diagnostics) list->items.push_back(d.event + " " + d.subject);
      *out_diagnostics = list;
    }
    *out_net = new pcir_network{std::move(result.network)};
    return PCIR_OK;
  });
}

/* --- lexicons ----------------------------------------------------------- */

pcir_status pcir_lexicon_parse(const char* json_text, pcir_lexicon** out) {
  if (!json_text || !out) return fail_argument("pcir_lexicon_parse: null argument");
  return guarded([&] {
    *out = new pcir_lexicon{pcir::parse_lexicon(json_text)};
    return PCIR_OK;
  });
}

pcir_status pcir_lexicon_load(const char* path, pcir_lexicon** out) {
  if (!path || !out) return fail_argument("pcir_lexicon_load: null argument");
  return guarded([&] {
    *out = new pcir_lexicon{pcir::load_lexicon(path)};
    return PCIR_OK;
  });
}

pcir_status pcir_lexicon_save(const pcir_lexicon* lexicon, const char* path) {
  if (!lexicon || !path) return fail_argument("pcir_lexicon_save: null argument");
  return guarded([&] {
    pcir::save_lexicon(lexicon->lex, path);
    return PCIR_OK;
  });
}

size_t pcir_lexicon_size(const pcir_lexicon* lexicon) {
  return lexicon ? lexicon->lex.size() : 0;
}

void pcir_lexicon_free(pcir_lexicon* lexicon) { delete lexicon; }

/* --- corpora ------------------------------------------------------------ */

pcir_status pcir_corpus_load(const char* path, pcir_corpus** out) {
  if (!path || !out) return fail_argument("pcir_corpus_load: null argument");
  return guarded([&] {
    *out = new pcir_corpus{pcir::load_corpus(path)};
    return PCIR_OK;
  });
}

size_t pcir_corpus_size(const pcir_corpus* corpus) { return corpus ? corpus->docs.size() : 0; }

void pcir_corpus_free(pcir_corpus* corpus) { delete corpus; }

/* --- inference ---------------------------------------------------------- */

pcir_status pcir_infer_text(const pcir_network* net, const pcir_lexicon* lexicon,
                            const char* text, const char* concept_name, double* out_p_present,
                            double* out_p_absent, size_t* out_unknown_words) {
  if (!net || !lexicon || !text || !concept_name || !out_p_present || !out_p_absent)
    return fail_argument("pcir_infer_text: null argument");
  return guarded([&] {
    const pcir::Document doc{"doc", text};
    const pcir::FeatureVector fv = pcir::extract_features(doc, lexicon->lex);
    const pcir::AttachedEvidence att = pcir::attach_evidence(fv, lexicon->lex.entries());
    const pcir::Posterior post = pcir::posterior(net->net, att.evidence, concept_name);
    *out_p_present = post.p_present;
    *out_p_absent = post.p_absent;
    if (out_unknown_words) {
      // extract_features only covers lexicon words; unmatched tokens are
      // counted from the raw text instead.
      size_t unknown = 0;
      for (const auto& token : pcir::tokenize(text))
        if (!lexicon->lex.find(token)) ++unknown;
      *out_unknown_words = unknown;
    }
    return PCIR_OK;
  });
}

/* --- corpus scoring ------------------------------------------------------ */

pcir_status pcir_score_corpus(const pcir_network* net, const pcir_lexicon* lexicon,
                              const pcir_corpus* corpus, const char* concept_name, size_t jobs,
                              pcir_scores** out) {
  if (!net || !lexicon || !corpus || !concept_name || !out)
    return fail_argument("pcir_score_corpus: null argument");
  return guarded([&] {
    *out = new pcir_scores{
        pcir::score_corpus(net->net, lexicon->lex, corpus->docs, concept_name, jobs)};
    return PCIR_OK;
  });
}

size_t pcir_scores_count(const pcir_scores* scores) {
  return scores ? scores->scores.docs.size() : 0;
}

size_t pcir_scores_error_count(const pcir_scores* scores) {
  return scores ? scores->scores.error_count() : 0;
}

pcir_status pcir_scores_get(const pcir_scores* scores, size_t index, const char** out_id,
                            double* out_score, int* out_error_flag) {
  if (!scores) return fail_argument("pcir_scores_get: null scores");
  if (index >= scores->scores.docs.size())
    return fail_argument("pcir_scores_get: index out of range");
  const pcir::ScoredDoc& doc = scores->scores.docs[index];
  if (out_id) *out_id = doc.id.c_str();
  if (out_score) *out_score = doc.score;
  if (out_error_flag) *out_error_flag = doc.error ? 1 : 0;
  return PCIR_OK;
}

const char* pcir_scores_error_message(const pcir_scores* scores, size_t index) {
  if (!scores || index >= scores->scores.docs.size()) return "";
  return scores->scores.docs[index].error_message.c_str();
}

pcir_status pcir_scores_save_csv(const pcir_scores* scores, const char* path) {
  if (!scores || !path) return fail_argument("pcir_scores_save_csv: null argument");
  return guarded([&] {
    pcir::write_file(path, pcir::scores_to_csv(scores->scores));
    return PCIR_OK;
  });
}

pcir_status pcir_scores_load_csv(const char* path, pcir_scores** out) {
  if (!path || !out) return fail_argument("pcir_scores_load_csv: null argument");
  return guarded([&] {
    *out = new pcir_scores{pcir::scores_from_csv(pcir::read_file(path))};
    return PCIR_OK;
  });
}

void pcir_scores_free(pcir_scores* scores) { delete scores; }

/* --- evaluation ---------------------------------------------------------- */

pcir_status pcir_evaluate(const pcir_scores* scores, const char* labels_csv_path,
                          pcir_curve** out) {
  if (!scores || !labels_csv_path || !out) return fail_argument("pcir_evaluate: null argument");
  return guarded([&] {
    const auto labels = pcir::labels_from_csv(pcir::read_file(labels_csv_path));
    const auto relevant = pcir::relevant_ids(labels);
    const auto thresholds = pcir::default_thresholds(scores->scores);
    *out = new pcir_curve{pcir::evaluate(scores->scores, relevant, thresholds)};
    return PCIR_OK;
  });
}

size_t pcir_curve_point_count(const pcir_curve* curve) {
  return curve ? curve->curve.points.size() : 0;
}

pcir_status pcir_curve_save_csv(const pcir_curve* curve, const char* path) {
  if (!curve || !path) return fail_argument("pcir_curve_save_csv: null argument");
  return guarded([&] {
    pcir::write_file(path, pcir::curve_to_csv(curve->curve));
    return PCIR_OK;
  });
}

pcir_status pcir_curve_stats_json(const pcir_curve* curve, char** out_json) {
  if (!curve || !out_json) return fail_argument("pcir_curve_stats_json: null argument");
  return guarded([&] {
    *out_json = copy_string(pcir::curve_stats_json(curve->curve));
    return PCIR_OK;
  });
}

void pcir_curve_free(pcir_curve* curve) { delete curve; }

/* --- synthesis ----------------------------------------------------------- */

pcir_status pcir_synthesize(const pcir_network* net, const pcir_lexicon* lexicon, size_t n,
                            uint64_t seed, const char* concept_name, const char* out_dir) {
  if (!net || !lexicon || !concept_name || !out_dir)
    return fail_argument("pcir_synthesize: null argument");
  return guarded([&] {
    const pcir::SynthCorpus corpus =
        pcir::sample_corpus(net->net, lexicon->lex, n, seed, concept_name);
    pcir::write_synth_bundle(corpus, out_dir);
    return PCIR_OK;
  });
}

}  // extern "C"
