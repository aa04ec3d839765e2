#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "model.hpp"

namespace pcir {

// Binary document-by-variable matrix. Columns are bit-packed so contingency
// counting reduces to masked popcounts.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<std::string> columns);

  const std::vector<std::string>& columns() const { return columns_; }
  std::size_t row_count() const { return rows_; }
  std::size_t column_count() const { return columns_.size(); }

  std::optional<std::size_t> column_index(const std::string& name) const;
  int at(std::size_t row, std::size_t col) const;
  void append_row(std::span<const int> bits);

  const std::vector<std::uint64_t>& column_bits(std::size_t col) const { return bits_[col]; }
  std::size_t word_count() const { return (rows_ + 63) / 64; }
  bool column_constant(std::size_t col) const;

  // Roles from the sidecar manifest; empty when no manifest was given.
  std::map<std::string, VarKind> roles;

 private:
  std::vector<std::string> columns_;
  std::size_t rows_ = 0;
  std::vector<std::vector<std::uint64_t>> bits_;
};

struct LearnParams {
  double alpha = 0.05;                 // chi-square significance level
  std::size_t max_condition_size = 3;  // cap on |Z| in conditional independence tests
  std::size_t cv_folds = 5;
  std::size_t cv_agreement = 3;        // folds that must agree to keep an edge
  double min_expected_count = 5.0;     // chi-square validity floor per expected cell
  double smoothing = 1.0;              // Laplace pseudo-count
  enum class SymmetryRule { And, Or } symmetry_rule = SymmetryRule::And;
};

// Throws Error(Argument) when a parameter is out of bounds.
void check_params(const LearnParams& params);

// Optional row subset, bit-packed like a dataset column.
using RowMask = std::vector<std::uint64_t>;

// Joint counts of (x, y) within every joint state of the conditioning set z.
// Strata are indexed with the last z column varying fastest; within a stratum
// cells are [x=0 y=0, x=0 y=1, x=1 y=0, x=1 y=1].
struct ContingencyTable {
  std::vector<std::string> z;
  std::vector<std::array<std::int64_t, 4>> cells;

  std::int64_t total() const;
};

ContingencyTable contingency_counts(const Dataset& data, const std::string& x,
                                    const std::string& y, const std::vector<std::string>& z,
                                    const RowMask* mask = nullptr);

struct Chi2Result {
  bool dependent = false;
  double statistic = 0.0;
  std::size_t df = 0;
  double critical = 0.0;  // chi-square quantile at (df, 1 - alpha); 0 when df = 0
};

// Pearson chi-square summed across z-strata. A stratum is skipped (and
// contributes no degree of freedom) when it is empty, has a zero margin, or
// any expected cell falls below min_expected_count. With no usable strata the
// verdict is independent.
Chi2Result chi2_independence(const Dataset& data, const std::string& x, const std::string& y,
                             const std::vector<std::string>& z, const LearnParams& params,
                             const RowMask* mask = nullptr);

// Upper quantile of the chi-square distribution: P(X > value) = alpha.
double chi2_critical_value(std::size_t df, double alpha);

// Grow-shrink Markov boundary search around x. Growth adds the candidate with
// the largest chi-square statistic among those still dependent on x given the
// most recently added boundary members (capped at max_condition_size); the
// shrink pass removes members that test independent given the rest. Returns a
// sorted name set. `universe` restricts the candidate columns (empty = all).
std::vector<std::string> markov_boundary(const Dataset& data, const std::string& x,
                                         const LearnParams& params,
                                         const std::vector<std::string>& universe = {},
                                         const RowMask* mask = nullptr);

struct Skeleton {
  std::vector<std::string> variables;
  std::vector<UndirectedEdge> edges;
};

struct Diagnostic {
  std::string event;    // "skipped_column", "unassigned_word", ...
  std::string subject;
};

struct SkeletonResult {
  Skeleton skeleton;
  std::vector<Diagnostic> diagnostics;
};

// Markov boundaries per variable per cross-validation training fold (rows
// with index % cv_folds == f form held-out fold f); per-fold edges combine
// boundaries under the AND/OR symmetry rule, and an edge survives when it
// appears in at least cv_agreement folds. Constant columns are excluded and
// reported.
SkeletonResult build_skeleton(const Dataset& data, const std::vector<std::string>& variables,
                              const LearnParams& params);

// Parameterizes a skeleton: maximal cliques get Laplace-smoothed empirical
// joint tables, and along a maximum-spanning junction forest every non-root
// clique is divided by its own table marginalized onto the separator with its
// parent, so the potential product reproduces the smoothed clique marginals
// on decomposable skeletons. Cliques above 12 variables are refused.
Network fit_potentials(const Skeleton& skeleton, const Dataset& data, const LearnParams& params);

// Laplace-smoothed p(word | concept present/absent) for every word column,
// clamped inside (kLinkEpsilon, 1 - kLinkEpsilon). The concept column must
// not be constant.
std::vector<ConceptEvidenceLink> fit_concept_evidence(const Dataset& data,
                                                      const std::string& concept_name,
                                                      const std::vector<std::string>& words,
                                                      const LearnParams& params);

struct LearnOutput {
  Network network;
  std::vector<ConceptEvidenceLink> links;
  std::vector<Diagnostic> diagnostics;
};

// Full structure-learning pass over a role-tagged dataset: learns the concept
// skeleton and potentials over the concept columns, then derives
// concept-evidence links for every feature column against the concept it is
// most strongly dependent on (marginal chi-square, ties broken by name).
LearnOutput learn_network(const Dataset& data, const LearnParams& params);

// --- file formats ---

// Strict CSV: first row column names, every cell "0" or "1".
Dataset dataset_from_csv(const std::string& text);
std::string dataset_to_csv(const Dataset& data);
// Manifest JSON {"roles": {"column": "concept"|"feature", ...}}.
void apply_manifest(Dataset& data, const std::string& manifest_text);
std::string manifest_to_json(const Dataset& data);

Dataset load_dataset(const std::string& csv_path, const std::string& manifest_path);

}  // namespace pcir
