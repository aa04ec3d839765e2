#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "infer.hpp"
#include "model.hpp"

namespace pcir {

struct DecisionRule {
  enum class Kind { Threshold, BestN } kind = Kind::Threshold;
  double tau = 0.5;     // threshold rule, in [0,1]
  std::size_t n = 10;   // best-n rule

  static DecisionRule threshold(double tau);
  static DecisionRule best_n(std::size_t n);
};

struct ScoredDoc {
  std::string id;
  double score = 0.0;
  bool error = false;        // zero-probability evidence for this document
  std::string error_message;
};

// Scored docs sorted by (score desc, id asc); error-flagged docs follow,
// sorted by id, and carry no usable score.
struct RankedScores {
  std::vector<ScoredDoc> docs;

  std::size_t error_count() const;
};

struct ClassStats {
  double mean = 0.0;
  double std_dev = 0.0;  // population standard deviation
  std::size_t count = 0;
};

struct PRPoint {
  double threshold = 0.0;
  double precision = 1.0;
  double recall = 1.0;
};

struct PRCurve {
  std::vector<PRPoint> points;
  ClassStats relevant;
  ClassStats irrelevant;
  std::size_t errors_excluded = 0;
};

// extract_features -> attach_evidence -> posterior for each document, in
// parallel across documents (jobs = 0 picks the hardware thread count).
// Output is independent of jobs. Zero-probability evidence flags the
// document instead of aborting the run.
RankedScores score_corpus(const Network& net, const Lexicon& lexicon,
                          const std::vector<Document>& docs, const std::string& query_concept,
                          std::size_t jobs = 0);

// threshold(tau): ids scoring >= tau. best_n(n): first n of the ranked list.
// Error-flagged docs are never retrieved.
std::set<std::string> apply_decision(const RankedScores& scores, const DecisionRule& rule);

// Precision/recall at each threshold plus per-class score statistics.
// Precision over an empty retrieved set is 1.0; recall with no relevant
// documents is 1.0. Error-flagged docs are excluded and counted.
PRCurve evaluate(const RankedScores& scores, const std::set<std::string>& relevant,
                 const std::vector<double>& thresholds);

// 101 evenly spaced thresholds over [0,1] plus every distinct observed
// score, ascending and deduplicated.
std::vector<double> default_thresholds(const RankedScores& scores);

// --- file formats ---

// Scores CSV: id,score,rank,error_flag.
std::string scores_to_csv(const RankedScores& scores);
RankedScores scores_from_csv(const std::string& text);

// Curve CSV: threshold,precision,recall after a comment line stating the
// empty-retrieval convention.
std::string curve_to_csv(const PRCurve& curve);
// Stats JSON: {"relevant": {mean,std,count}, "irrelevant": {...}, "errors_excluded": n}.
std::string curve_stats_json(const PRCurve& curve);

}  // namespace pcir
