// Command-line front end. Links only the shared C API.

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pcir.h"

namespace {

std::string json_str(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
  return out;
}

void diag_kv(const std::string& event, const std::string& key, const std::string& value) {
  std::cerr << "{\"event\": " << json_str(event) << ", " << json_str(key) << ": "
            << json_str(value) << "}\n";
}

void diag_count(const std::string& event, std::size_t value) {
  std::cerr << "{\"event\": " << json_str(event) << ", \"value\": " << value << "}\n";
}

const char* status_name(pcir_status status) {
  switch (status) {
    case PCIR_OK: return "ok";
    case PCIR_ERR_ARGUMENT: return "argument";
    case PCIR_ERR_DOMAIN: return "domain";
    case PCIR_ERR_PARSE: return "parse";
    case PCIR_ERR_IO: return "io";
  }
  return "unknown";
}

int fail(pcir_status status) {
  std::cerr << "{\"event\": \"error\", \"status\": " << json_str(status_name(status))
            << ", \"message\": " << json_str(pcir_last_error()) << "}\n";
  return 1;
}

int usage_error(const std::string& message) {
  diag_kv("usage_error", "message", message);
  return 2;
}

// Emits library diagnostics ("event subject" pairs) as JSON lines.
void emit_diagnostics(const pcir_strings* list) {
  for (std::size_t i = 0; i < pcir_strings_count(list); ++i) {
    const std::string entry = pcir_strings_get(list, i);
    const auto space = entry.find(' ');
    if (space == std::string::npos)
      diag_kv("diagnostic", "message", entry);
    else
      diag_kv(entry.substr(0, space), "subject", entry.substr(space + 1));
  }
}

struct LearnConfig {
  std::string dataset, manifest, out, links;
  double alpha = 0.05;
  std::size_t max_cond = 3, folds = 5, agreement = 3;
  double min_expected = 5.0, smoothing = 1.0;
  std::string rule = "AND";
};

int run_learn(const LearnConfig& cfg) {
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) return usage_error("--alpha must lie in (0,1)");
  if (cfg.folds < 2) return usage_error("--folds must be at least 2");
  if (cfg.agreement > cfg.folds) return usage_error("--agreement cannot exceed --folds");
  if (!(cfg.smoothing >= 0.0)) return usage_error("--smoothing must be nonnegative");
  if (!(cfg.min_expected >= 0.0)) return usage_error("--min-expected must be nonnegative");

  pcir_dataset* data = nullptr;
  pcir_status st = pcir_dataset_load(cfg.dataset.c_str(), cfg.manifest.c_str(), &data);
  if (st != PCIR_OK) return fail(st);

  pcir_learn_params params;
  pcir_learn_params_init(&params);
  params.alpha = cfg.alpha;
  params.max_condition_size = cfg.max_cond;
  params.cv_folds = cfg.folds;
  params.cv_agreement = cfg.agreement;
  params.min_expected_count = cfg.min_expected;
  params.smoothing = cfg.smoothing;
  params.use_or_rule = cfg.rule == "OR" ? 1 : 0;

  pcir_network* net = nullptr;
  pcir_lexicon* links = nullptr;
  pcir_strings* diags = nullptr;
  st = pcir_learn(data, &params, &net, &links, &diags);
  pcir_dataset_free(data);
  if (st != PCIR_OK) return fail(st);

  emit_diagnostics(diags);
  diag_count("edge_count", pcir_network_edge_count(net));
  pcir_strings_free(diags);

  std::string links_path = cfg.links;
  if (links_path.empty()) {
    links_path = cfg.out;
    const auto dot = links_path.rfind('.');
    const auto slash = links_path.find_last_of("/\\");
    if (dot != std::string::npos && (slash == std::string::npos || dot > slash))
      links_path.resize(dot);
    links_path += ".links.json";
  }

  st = pcir_network_save(net, cfg.out.c_str());
  if (st == PCIR_OK) st = pcir_lexicon_save(links, links_path.c_str());
  pcir_network_free(net);
  pcir_lexicon_free(links);
  return st == PCIR_OK ? 0 : fail(st);
}

struct RankConfig {
  std::string net, lexicon, corpus, concept_name, out;
  std::size_t jobs = 0;
};

int run_rank(const RankConfig& cfg) {
  pcir_network* net = nullptr;
  pcir_status st = pcir_network_load(cfg.net.c_str(), &net);
  if (st != PCIR_OK) return fail(st);
  pcir_lexicon* lex = nullptr;
  st = pcir_lexicon_load(cfg.lexicon.c_str(), &lex);
  if (st != PCIR_OK) {
    pcir_network_free(net);
    return fail(st);
  }
  pcir_corpus* corpus = nullptr;
  st = pcir_corpus_load(cfg.corpus.c_str(), &corpus);
  if (st != PCIR_OK) {
    pcir_lexicon_free(lex);
    pcir_network_free(net);
    return fail(st);
  }

  pcir_scores* scores = nullptr;
  st = pcir_score_corpus(net, lex, corpus, cfg.concept_name.c_str(), cfg.jobs, &scores);
  pcir_corpus_free(corpus);
  pcir_lexicon_free(lex);
  pcir_network_free(net);
  if (st != PCIR_OK) return fail(st);

  for (std::size_t i = 0; i < pcir_scores_count(scores); ++i) {
    const char* id = nullptr;
    double score = 0.0;
    int error_flag = 0;
    pcir_scores_get(scores, i, &id, &score, &error_flag);
    if (error_flag) {
      std::cerr << "{\"event\": \"document_error\", \"id\": " << json_str(id)
                << ", \"message\": " << json_str(pcir_scores_error_message(scores, i))
                << "}\n";
    }
  }
  diag_count("error_count", pcir_scores_error_count(scores));

  st = pcir_scores_save_csv(scores, cfg.out.c_str());
  pcir_scores_free(scores);
  return st == PCIR_OK ? 0 : fail(st);
}

struct InferConfig {
  std::string net, lexicon, doc, concept_name;
};

int run_infer(const InferConfig& cfg) {
  std::ifstream in(cfg.doc, std::ios::binary);
  if (!in) {
    std::cerr << "{\"event\": \"error\", \"status\": \"io\", \"message\": "
              << json_str("cannot open '" + cfg.doc + "' for reading") << "}\n";
    return 1;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = std::move(buf).str();

  pcir_network* net = nullptr;
  pcir_status st = pcir_network_load(cfg.net.c_str(), &net);
  if (st != PCIR_OK) return fail(st);
  pcir_lexicon* lex = nullptr;
  st = pcir_lexicon_load(cfg.lexicon.c_str(), &lex);
  if (st != PCIR_OK) {
    pcir_network_free(net);
    return fail(st);
  }

  double p_present = 0.0, p_absent = 0.0;
  std::size_t unknown_words = 0;
  st = pcir_infer_text(net, lex, text.c_str(), cfg.concept_name.c_str(), &p_present, &p_absent,
                       &unknown_words);
  pcir_lexicon_free(lex);
  pcir_network_free(net);
  if (st != PCIR_OK) return fail(st);

  diag_count("unknown_words", unknown_words);
  std::printf("{\"concept\": %s, \"p_present\": %.17g, \"p_absent\": %.17g}\n",
              json_str(cfg.concept_name).c_str(), p_present, p_absent);
  return 0;
}

struct EvalConfig {
  std::string scores, labels, out, stats;
};

int run_eval(const EvalConfig& cfg) {
  pcir_scores* scores = nullptr;
  pcir_status st = pcir_scores_load_csv(cfg.scores.c_str(), &scores);
  if (st != PCIR_OK) return fail(st);
  pcir_curve* curve = nullptr;
  st = pcir_evaluate(scores, cfg.labels.c_str(), &curve);
  pcir_scores_free(scores);
  if (st != PCIR_OK) return fail(st);

  st = pcir_curve_save_csv(curve, cfg.out.c_str());
  if (st == PCIR_OK && !cfg.stats.empty()) {
    char* json = nullptr;
    st = pcir_curve_stats_json(curve, &json);
    if (st == PCIR_OK) {
      std::ofstream out(cfg.stats, std::ios::binary | std::ios::trunc);
      if (out) {
        out << json;
      } else {
        pcir_string_free(json);
        pcir_curve_free(curve);
        std::cerr << "{\"event\": \"error\", \"status\": \"io\", \"message\": "
                  << json_str("cannot open '" + cfg.stats + "' for writing") << "}\n";
        return 1;
      }
      pcir_string_free(json);
    }
  }
  pcir_curve_free(curve);
  return st == PCIR_OK ? 0 : fail(st);
}

struct SynthConfig {
  std::string net, lexicon, concept_name, out;
  std::size_t count = 0;
  std::uint64_t seed = 0;
};

int run_synth(const SynthConfig& cfg) {
  pcir_network* net = nullptr;
  pcir_status st = pcir_network_load(cfg.net.c_str(), &net);
  if (st != PCIR_OK) return fail(st);
  pcir_lexicon* lex = nullptr;
  st = pcir_lexicon_load(cfg.lexicon.c_str(), &lex);
  if (st != PCIR_OK) {
    pcir_network_free(net);
    return fail(st);
  }
  st = pcir_synthesize(net, lex, cfg.count, cfg.seed, cfg.concept_name.c_str(), cfg.out.c_str());
  pcir_lexicon_free(lex);
  pcir_network_free(net);
  return st == PCIR_OK ? 0 : fail(st);
}

int run_validate(const std::string& path) {
  pcir_network* net = nullptr;
  const pcir_status st = pcir_network_load(path.c_str(), &net);
  if (st != PCIR_OK) {
    // The loader rejects invalid networks with one message per violation.
    const std::string message = pcir_last_error();
    std::size_t count = 0;
    std::istringstream lines(message);
    std::string line;
    while (std::getline(lines, line)) {
      if (line.empty()) continue;
      diag_kv("violation", "message", line);
      ++count;
    }
    if (count == 0) {
      diag_kv("violation", "message", message);
      count = 1;
    }
    std::printf("%zu violation%s\n", count, count == 1 ? "" : "s");
    return 1;
  }
  pcir_strings* violations = nullptr;
  pcir_network_validate(net, &violations);
  const std::size_t count = pcir_strings_count(violations);
  for (std::size_t i = 0; i < count; ++i)
    diag_kv("violation", "message", pcir_strings_get(violations, i));
  pcir_strings_free(violations);
  pcir_network_free(net);
  std::printf("%zu violation%s\n", count, count == 1 ? "" : "s");
  return count == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"probabilistic concept-based retrieval engine"};
  app.require_subcommand(1);

  LearnConfig learn_cfg;
  CLI::App* learn = app.add_subcommand("learn", "learn a concept network from a tagged dataset");
  learn->add_option("dataset", learn_cfg.dataset, "binary dataset CSV")->required();
  learn->add_option("manifest", learn_cfg.manifest, "roles manifest JSON")->required();
  learn->add_option("-o,--out", learn_cfg.out, "output network JSON path")->required();
  learn->add_option("--links", learn_cfg.links,
                    "output links JSON path (default: --out with its extension replaced by .links.json)");
  learn->add_option("--alpha", learn_cfg.alpha, "chi-square significance level");
  learn->add_option("--max-cond", learn_cfg.max_cond, "max conditioning set size");
  learn->add_option("--folds", learn_cfg.folds, "cross-validation folds");
  learn->add_option("--agreement", learn_cfg.agreement, "folds that must agree on an edge");
  learn->add_option("--min-expected", learn_cfg.min_expected, "chi-square expected-cell floor");
  learn->add_option("--smoothing", learn_cfg.smoothing, "Laplace pseudo-count");
  learn->add_option("--rule", learn_cfg.rule, "boundary symmetry rule")
      ->check(CLI::IsMember({"AND", "OR"}));

  RankConfig rank_cfg;
  CLI::App* rank = app.add_subcommand("rank", "score a corpus against a query concept");
  rank->add_option("net", rank_cfg.net, "network JSON")->required();
  rank->add_option("lexicon", rank_cfg.lexicon, "lexicon JSON")->required();
  rank->add_option("corpus", rank_cfg.corpus, "corpus directory or JSON-lines file")->required();
  rank->add_option("--concept", rank_cfg.concept_name, "query concept")->required();
  rank->add_option("-o,--out", rank_cfg.out, "output scores CSV path")->required();
  rank->add_option("--jobs", rank_cfg.jobs, "worker threads (0 = all processors)");

  InferConfig infer_cfg;
  CLI::App* infer = app.add_subcommand("infer", "posterior of a concept for one document");
  infer->add_option("net", infer_cfg.net, "network JSON")->required();
  infer->add_option("lexicon", infer_cfg.lexicon, "lexicon JSON")->required();
  infer->add_option("--doc", infer_cfg.doc, "document text file")->required();
  infer->add_option("--concept", infer_cfg.concept_name, "query concept")->required();

  EvalConfig eval_cfg;
  CLI::App* eval = app.add_subcommand("eval", "precision/recall curve from scores and labels");
  eval->add_option("scores", eval_cfg.scores, "scores CSV")->required();
  eval->add_option("labels", eval_cfg.labels, "labels CSV")->required();
  eval->add_option("-o,--out", eval_cfg.out, "output curve CSV path")->required();
  eval->add_option("--stats", eval_cfg.stats, "output class-stats JSON path");

  SynthConfig synth_cfg;
  CLI::App* synth = app.add_subcommand("synth", "sample a synthetic tagged corpus");
  synth->add_option("net", synth_cfg.net, "network JSON (directed)")->required();
  synth->add_option("lexicon", synth_cfg.lexicon, "lexicon JSON")->required();
  synth->add_option("-n,--count", synth_cfg.count, "number of documents")->required();
  synth->add_option("--seed", synth_cfg.seed, "sampling seed")->envname("PCIR_SEED");
  synth->add_option("--concept", synth_cfg.concept_name, "query concept for labels")->required();
  synth->add_option("-o,--out", synth_cfg.out, "output directory")->required();

  std::string validate_path;
  CLI::App* validate = app.add_subcommand("validate", "check a network file");
  validate->add_option("net", validate_path, "network JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    diag_kv("usage_error", "message", e.what());
    std::cerr << app.help();
    return 2;
  }

  if (learn->parsed()) return run_learn(learn_cfg);
  if (rank->parsed()) return run_rank(rank_cfg);
  if (infer->parsed()) return run_infer(infer_cfg);
  if (eval->parsed()) return run_eval(eval_cfg);
  if (synth->parsed()) return run_synth(synth_cfg);
  if (validate->parsed()) return run_validate(validate_path);
  return 2;
}
