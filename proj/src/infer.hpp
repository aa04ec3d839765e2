#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "corpus.hpp"
#include "model.hpp"

namespace pcir {

// Hard evidence fixes a variable's state. Virtual evidence scales the two
// states by a likelihood pair (lambda_present, lambda_absent); only the ratio
// matters, both components must be finite and strictly positive.
struct EvidenceSet {
  std::map<std::string, int> hard;
  std::map<std::string, std::pair<double, double>> virt;
};

struct Posterior {
  std::string variable;
  double p_present = 0.0;
  double p_absent = 0.0;
};

struct AttachedEvidence {
  EvidenceSet evidence;
  std::size_t unknown_words = 0;  // feature words with no lexicon entry
};

// Folds a document's feature bits into per-concept virtual evidence: a
// present word contributes (p_present, p_absent), an absent word the
// complements; contributions for the same concept multiply componentwise.
AttachedEvidence attach_evidence(const FeatureVector& features,
                                 const std::vector<ConceptEvidenceLink>& links);

// Exact posterior of `query` by variable elimination (greedy min-fill order,
// ties to the lexicographically smallest name). Works on directed and
// undirected networks. Throws Error(Domain, "zero-probability evidence") when
// the evidence has probability zero, Error(Argument) for unknown variables or
// malformed evidence.
Posterior posterior(const Network& net, const EvidenceSet& evidence, const std::string& query);

// Brute-force reference: sums the full joint. Refuses networks above 20
// variables.
Posterior enumerate_posterior(const Network& net, const EvidenceSet& evidence,
                              const std::string& query);

}  // namespace pcir
