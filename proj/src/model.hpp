#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pcir {

enum class VarKind { Concept, Feature };

// Every variable is binary: state 0 = absent, state 1 = present.
struct Variable {
  std::string name;
  VarKind kind = VarKind::Concept;

  friend bool operator==(const Variable&, const Variable&) = default;
};

// Nonnegative table over a small ordered variable set. Joint states are
// enumerated with the last scope variable varying fastest, so for scope
// [a, b] the values are [f(a=0,b=0), f(a=0,b=1), f(a=1,b=0), f(a=1,b=1)].
struct FactorTable {
  std::vector<std::string> scope;
  std::vector<double> values;  // 2^scope.size() entries

  std::size_t state_count() const { return std::size_t{1} << scope.size(); }

  // states[i] is the 0/1 state of scope[i]
  static std::size_t index_of(std::span<const int> states) {
    std::size_t idx = 0;
    for (int s : states) idx = idx * 2 + static_cast<std::size_t>(s);
    return idx;
  }
};

struct Arc {
  std::string parent;
  std::string child;

  friend auto operator<=>(const Arc&, const Arc&) = default;
};

// Stored with a < b.
struct UndirectedEdge {
  std::string a;
  std::string b;

  friend auto operator<=>(const UndirectedEdge&, const UndirectedEdge&) = default;
};

// Likelihood pair tying one keyword to one concept variable:
// p_present = p(word occurs | concept present), p_absent = p(word occurs | concept absent).
// Both are kept strictly inside (0, 1) so likelihood ratios stay finite.
struct ConceptEvidenceLink {
  std::string word;
  std::string concept_name;
  double p_present = 0.5;
  double p_absent = 0.5;
};

enum class NetworkKind { Directed, Undirected };

// A probabilistic network over binary variables. Directed networks carry one
// CPT per variable (scope = parents + the variable itself, variable last);
// undirected networks carry clique potentials. Immutable by convention after
// construction or parse; share freely across threads.
struct Network {
  NetworkKind kind = NetworkKind::Directed;
  std::string notes;  // optional free text carried through the file format
  std::vector<Variable> variables;
  std::vector<Arc> arcs;                 // directed only
  std::vector<UndirectedEdge> edges;     // undirected only
  std::vector<FactorTable> tables;       // CPTs or clique potentials
  std::vector<ConceptEvidenceLink> evidence_links;

  const Variable* find_variable(const std::string& name) const;
  std::vector<std::string> parents_of(const std::string& child) const;
  // CPT lookup by owned variable; requires a canonicalized directed network.
  const FactorTable* cpt_of(const std::string& name) const;

  // Sorts variables/arcs/edges/links and rewrites table scopes into canonical
  // order (directed: sorted parents then child; undirected: sorted scope),
  // permuting values to match. Called by parse; call it after building a
  // network by hand if deterministic serialization matters.
  void canonicalize();
};

// Row-sum tolerance for CPT rows.
inline constexpr double kRowSumTolerance = 1e-12;
// Open-interval clamp applied to evidence-link probabilities at parse time.
inline constexpr double kLinkEpsilon = 1e-6;

using Violations = std::vector<std::string>;

// Reports every violated invariant; empty means the network is valid.
Violations validate(const Network& net);

struct ParseResult {
  std::optional<Network> network;  // set iff errors is empty
  std::vector<std::string> errors;

  bool ok() const { return errors.empty(); }
};

// Total parse of the JSON network format: any malformed input (syntax, shape,
// or invariant violation) yields errors and no network. Successful parses are
// canonical and valid.
ParseResult parse_network(const std::string& text);

// Deterministic serialization (canonical ordering, floats with 17 significant
// digits). Requires a valid network; round-trips through parse_network.
std::string serialize_network(const Network& net);

// Structural equality with numeric tolerance on table values and link
// probabilities. Both networks are compared in canonical form.
bool network_equals(const Network& lhs, const Network& rhs, double tol = 1e-15);

// Shared float formatting: shortest form of %.17g, stable across runs.
std::string format_double(double v);

// Appends s as a quoted, escaped JSON string.
void append_json_string(std::string& out, const std::string& s);

}  // namespace pcir
