#include "retrieve.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <sstream>
#include <thread>

#include "error.hpp"

namespace pcir {

DecisionRule DecisionRule::threshold(double tau) {
  if (!(tau >= 0.0 && tau <= 1.0))
    throw Error(ErrorCode::Argument, "decision threshold must lie in [0,1]");
  DecisionRule rule;
  rule.kind = Kind::Threshold;
  rule.tau = tau;
  return rule;
}

DecisionRule DecisionRule::best_n(std::size_t n) {
  DecisionRule rule;
  rule.kind = Kind::BestN;
  rule.n = n;
  return rule;
}

std::size_t RankedScores::error_count() const {
  std::size_t n = 0;
  for (const auto& d : docs)
    if (d.error) ++n;
  return n;
}

namespace {

void sort_ranked(std::vector<ScoredDoc>& docs) {
  std::sort(docs.begin(), docs.end(), [](const ScoredDoc& a, const ScoredDoc& b) {
    if (a.error != b.error) return !a.error;
    if (!a.error && a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  });
}

}  // namespace

RankedScores score_corpus(const Network& net, const Lexicon& lexicon,
                          const std::vector<Document>& docs, const std::string& query_concept,
                          std::size_t jobs) {
  std::set<std::string> var_names;
  for (const auto& v : net.variables) var_names.insert(v.name);
  if (!var_names.count(query_concept))
    throw Error(ErrorCode::Argument, "query concept '" + query_concept + "' not in network");
  for (const auto& entry : lexicon.entries())
    if (!var_names.count(entry.concept_name))
      throw Error(ErrorCode::Argument,
                  "lexicon concept '" + entry.concept_name + "' not in network");
  {
    std::set<std::string> ids;
    for (const auto& d : docs)
      if (!ids.insert(d.id).second)
        throw Error(ErrorCode::Argument, "duplicate document id '" + d.id + "'");
  }

  std::vector<ScoredDoc> scored(docs.size());
  std::vector<std::exception_ptr> failures(docs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= docs.size()) return;
      ScoredDoc& out = scored[i];
      out.id = docs[i].id;
      try {
        const FeatureVector fv = extract_features(docs[i], lexicon);
        const AttachedEvidence att = attach_evidence(fv, lexicon.entries());
        out.score = posterior(net, att.evidence, query_concept).p_present;
      } catch (const Error& e) {
        if (e.code() == ErrorCode::Domain) {
          out.error = true;
          out.error_message = e.what();
          out.score = 0.0;
        } else {
          failures[i] = std::current_exception();
        }
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };

  std::size_t threads = jobs == 0 ? std::thread::hardware_concurrency() : jobs;
  threads = std::max<std::size_t>(1, std::min(threads, docs.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);

  RankedScores result;
  result.docs = std::move(scored);
  sort_ranked(result.docs);
  return result;
}

std::set<std::string> apply_decision(const RankedScores& scores, const DecisionRule& rule) {
  std::set<std::string> retrieved;
  if (rule.kind == DecisionRule::Kind::Threshold) {
    if (!(rule.tau >= 0.0 && rule.tau <= 1.0))
      throw Error(ErrorCode::Argument, "decision threshold must lie in [0,1]");
    for (const auto& d : scores.docs)
      if (!d.error && d.score >= rule.tau) retrieved.insert(d.id);
  } else {
    std::size_t taken = 0;
    for (const auto& d : scores.docs) {
      if (d.error) continue;
      if (taken == rule.n) break;
      retrieved.insert(d.id);
      ++taken;
    }
  }
  return retrieved;
}

namespace {

ClassStats stats_of(const std::vector<double>& values) {
  ClassStats s;
  s.count = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - s.mean) * (v - s.mean);
  s.std_dev = std::sqrt(sq / static_cast<double>(values.size()));
  return s;
}

}  // namespace

PRCurve evaluate(const RankedScores& scores, const std::set<std::string>& relevant,
                 const std::vector<double>& thresholds) {
  std::set<std::string> ids;
  for (const auto& d : scores.docs) ids.insert(d.id);
  for (const auto& r : relevant)
    if (!ids.count(r))
      throw Error(ErrorCode::Argument, "relevant id '" + r + "' is not among the scores");

  // Usable docs in rank order; error-flagged ones only counted.
  std::vector<double> ordered_scores;
  std::vector<double> rel_scores, irr_scores;
  std::vector<std::size_t> rel_prefix{0};
  PRCurve curve;
  for (const auto& d : scores.docs) {
    if (d.error) {
      ++curve.errors_excluded;
      continue;
    }
    const bool is_rel = relevant.count(d.id) != 0;
    ordered_scores.push_back(d.score);
    rel_prefix.push_back(rel_prefix.back() + (is_rel ? 1 : 0));
    (is_rel ? rel_scores : irr_scores).push_back(d.score);
  }
  curve.relevant = stats_of(rel_scores);
  curve.irrelevant = stats_of(irr_scores);

  const std::size_t total_relevant = rel_scores.size();
  for (double tau : thresholds) {
    // ordered_scores is descending: retrieved = the prefix with score >= tau.
    const auto it = std::partition_point(ordered_scores.begin(), ordered_scores.end(),
                                         [tau](double s) { return s >= tau; });
    const std::size_t cnt = static_cast<std::size_t>(it - ordered_scores.begin());
    const std::size_t tp = rel_prefix[cnt];
    PRPoint point;
    point.threshold = tau;
    point.precision = cnt == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(cnt);
    point.recall = total_relevant == 0
                       ? 1.0
                       : static_cast<double>(tp) / static_cast<double>(total_relevant);
    curve.points.push_back(point);
  }
  return curve;
}

std::vector<double> default_thresholds(const RankedScores& scores) {
  std::vector<double> taus;
  taus.reserve(101 + scores.docs.size());
  for (int i = 0; i <= 100; ++i) taus.push_back(static_cast<double>(i) / 100.0);
  for (const auto& d : scores.docs)
    if (!d.error) taus.push_back(d.score);
  std::sort(taus.begin(), taus.end());
  taus.erase(std::unique(taus.begin(), taus.end()), taus.end());
  return taus;
}

// ---------------------------------------------------------------------------
// File formats

namespace {

void check_csv_id(const std::string& id) {
  if (id.empty() || id.find('\n') != std::string::npos || id.find('\r') != std::string::npos)
    throw Error(ErrorCode::Argument, "document id unsafe for CSV output");
}

}  // namespace

std::string scores_to_csv(const RankedScores& scores) {
  std::string out = "id,score,rank,error_flag\n";
  std::size_t rank = 0;
  for (const auto& d : scores.docs) {
    check_csv_id(d.id);
    ++rank;
    out += d.id;
    out += ',';
    out += format_double(d.error ? 0.0 : d.score);
    out += ',';
    out += std::to_string(rank);
    out += d.error ? ",1\n" : ",0\n";
  }
  return out;
}

RankedScores scores_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  RankedScores scores;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != "id,score,rank,error_flag")
        throw Error(ErrorCode::Parse, "scores CSV must start with header id,score,rank,error_flag");
      continue;
    }
    // Ids may contain commas; the last three fields never do.
    const auto c3 = line.rfind(',');
    std::size_t c2 = std::string::npos, c1 = std::string::npos;
    if (c3 != std::string::npos && c3 > 0) c2 = line.rfind(',', c3 - 1);
    if (c2 != std::string::npos && c2 > 0) c1 = line.rfind(',', c2 - 1);
    if (c1 == std::string::npos)
      throw Error(ErrorCode::Parse, "scores CSV line " + std::to_string(line_no) +
                                        " needs id,score,rank,error_flag");
    ScoredDoc doc;
    doc.id = line.substr(0, c1);
    const std::string score_s = line.substr(c1 + 1, c2 - c1 - 1);
    const std::string flag_s = line.substr(c3 + 1);
    errno = 0;
    char* end = nullptr;
    doc.score = std::strtod(score_s.c_str(), &end);
    if (score_s.empty() || end != score_s.c_str() + score_s.size() || errno != 0 ||
        !(doc.score >= 0.0 && doc.score <= 1.0))
      throw Error(ErrorCode::Parse, "scores CSV line " + std::to_string(line_no) +
                                        " has a bad score '" + score_s + "'");
    if (flag_s == "1") {
      doc.error = true;
      doc.score = 0.0;
    } else if (flag_s != "0") {
      throw Error(ErrorCode::Parse, "scores CSV line " + std::to_string(line_no) +
                                        " has a bad error flag '" + flag_s + "'");
    }
    if (doc.id.empty())
      throw Error(ErrorCode::Parse, "scores CSV line " + std::to_string(line_no) +
                                        " has an empty id");
    scores.docs.push_back(std::move(doc));
  }
  if (line_no == 0) throw Error(ErrorCode::Parse, "scores CSV is empty");
  sort_ranked(scores.docs);
  for (std::size_t i = 1; i < scores.docs.size(); ++i)
    if (scores.docs[i - 1].id == scores.docs[i].id)
      throw Error(ErrorCode::Parse, "duplicate document id '" + scores.docs[i].id + "'");
  return scores;
}

std::string curve_to_csv(const PRCurve& curve) {
  std::string out =
      "# precision over an empty retrieved set is 1.0; error-flagged documents are excluded\n"
      "threshold,precision,recall\n";
  for (const auto& p : curve.points) {
    out += format_double(p.threshold);
    out += ',';
    out += format_double(p.precision);
    out += ',';
    out += format_double(p.recall);
    out += '\n';
  }
  return out;
}

std::string curve_stats_json(const PRCurve& curve) {
  auto block = [](const ClassStats& s) {
    std::string out = "{\"mean\": ";
    out += format_double(s.mean);
    out += ", \"std\": ";
    out += format_double(s.std_dev);
    out += ", \"count\": ";
    out += std::to_string(s.count);
    out += "}";
    return out;
  };
  std::string out = "{\n  \"relevant\": ";
  out += block(curve.relevant);
  out += ",\n  \"irrelevant\": ";
  out += block(curve.irrelevant);
  out += ",\n  \"errors_excluded\": ";
  out += std::to_string(curve.errors_excluded);
  out += "\n}\n";
  return out;
}

}  // namespace pcir
