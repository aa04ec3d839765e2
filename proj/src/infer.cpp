#include "infer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include "error.hpp"

namespace pcir {
namespace {

// Factor over variable ids, scope ascending, last id varying fastest.
struct Factor {
  std::vector<int> scope;
  std::vector<double> values;
};

std::size_t state_count(std::size_t vars) { return std::size_t{1} << vars; }

Factor multiply(const Factor& a, const Factor& b) {
  Factor out;
  out.scope.reserve(a.scope.size() + b.scope.size());
  std::set_union(a.scope.begin(), a.scope.end(), b.scope.begin(), b.scope.end(),
                 std::back_inserter(out.scope));
  const std::size_t k = out.scope.size();
  std::vector<int> pos_a(a.scope.size()), pos_b(b.scope.size());
  for (std::size_t i = 0; i < a.scope.size(); ++i)
    pos_a[i] = static_cast<int>(std::lower_bound(out.scope.begin(), out.scope.end(), a.scope[i]) -
                                out.scope.begin());
  for (std::size_t i = 0; i < b.scope.size(); ++i)
    pos_b[i] = static_cast<int>(std::lower_bound(out.scope.begin(), out.scope.end(), b.scope[i]) -
                                out.scope.begin());
  out.values.assign(state_count(k), 0.0);
  for (std::size_t idx = 0; idx < out.values.size(); ++idx) {
    std::size_t ia = 0, ib = 0;
    for (std::size_t i = 0; i < pos_a.size(); ++i)
      ia = ia * 2 + ((idx >> (k - 1 - pos_a[i])) & 1u);
    for (std::size_t i = 0; i < pos_b.size(); ++i)
      ib = ib * 2 + ((idx >> (k - 1 - pos_b[i])) & 1u);
    out.values[idx] = a.values[ia] * b.values[ib];
  }
  return out;
}

Factor sum_out(const Factor& f, int var) {
  auto it = std::lower_bound(f.scope.begin(), f.scope.end(), var);
  if (it == f.scope.end() || *it != var) return f;
  const std::size_t pos = static_cast<std::size_t>(it - f.scope.begin());
  const std::size_t k = f.scope.size();
  Factor out;
  out.scope = f.scope;
  out.scope.erase(out.scope.begin() + pos);
  out.values.assign(state_count(k - 1), 0.0);
  const std::size_t low_bits = k - 1 - pos;          // vars after `var` in scope
  const std::size_t low_mask = state_count(low_bits) - 1;
  for (std::size_t j = 0; j < out.values.size(); ++j) {
    const std::size_t high = j >> low_bits, low = j & low_mask;
    const std::size_t base = (high << (low_bits + 1)) | low;
    out.values[j] = f.values[base] + f.values[base | (std::size_t{1} << low_bits)];
  }
  return out;
}

// Scale invariance of normalized posteriors lets likelihood pairs be
// renormalized by their larger component, which keeps long products of
// evidence factors inside double range.
std::pair<double, double> scaled_pair(const std::string& var, std::pair<double, double> lambda) {
  auto [lp, la] = lambda;
  if (!(lp > 0.0) || !(la > 0.0) || !std::isfinite(lp) || !std::isfinite(la))
    throw Error(ErrorCode::Argument, "virtual evidence pair for '" + var +
                                         "' must be strictly positive and finite");
  const double m = std::max(lp, la);
  return {lp / m, la / m};
}

// Reindexes a named table onto id space with the scope sorted ascending.
Factor factor_from_table(const FactorTable& table, const std::map<std::string, int>& id_of) {
  const std::size_t k = table.scope.size();
  std::vector<std::size_t> order(k);
  for (std::size_t i = 0; i < k; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return id_of.at(table.scope[a]) < id_of.at(table.scope[b]);
  });
  std::vector<std::size_t> sorted_pos(k);  // original position -> sorted position
  for (std::size_t j = 0; j < k; ++j) sorted_pos[order[j]] = j;
  Factor f;
  f.scope.reserve(k);
  for (std::size_t j : order) f.scope.push_back(id_of.at(table.scope[j]));
  f.values.assign(table.values.size(), 0.0);
  for (std::size_t idx = 0; idx < f.values.size(); ++idx) {
    std::size_t src = 0;
    for (std::size_t i = 0; i < k; ++i)
      src = src * 2 + ((idx >> (k - 1 - sorted_pos[i])) & 1u);
    f.values[idx] = table.values[src];
  }
  return f;
}

struct Prepared {
  std::map<std::string, int> id_of;
  std::vector<Factor> factors;
};

Prepared prepare(const Network& net, const EvidenceSet& ev, const std::string& query) {
  Prepared prep;
  for (std::size_t i = 0; i < net.variables.size(); ++i)
    prep.id_of.emplace(net.variables[i].name, static_cast<int>(i));
  if (!prep.id_of.count(query))
    throw Error(ErrorCode::Argument, "unknown query variable '" + query + "'");

  if (net.kind == NetworkKind::Directed) {
    for (const auto& v : net.variables) {
      const FactorTable* cpt = net.cpt_of(v.name);
      if (!cpt) throw Error(ErrorCode::Argument, "no CPT for variable '" + v.name + "'");
      prep.factors.push_back(factor_from_table(*cpt, prep.id_of));
    }
  } else {
    for (const auto& t : net.tables) prep.factors.push_back(factor_from_table(t, prep.id_of));
  }

  for (const auto& [name, state] : ev.hard) {
    auto it = prep.id_of.find(name);
    if (it == prep.id_of.end())
      throw Error(ErrorCode::Argument, "unknown evidence variable '" + name + "'");
    if (ev.virt.count(name))
      throw Error(ErrorCode::Argument,
                  "variable '" + name + "' has both hard and virtual evidence");
    if (state != 0 && state != 1)
      throw Error(ErrorCode::Argument, "hard evidence state for '" + name + "' must be 0 or 1");
    Factor f;
    f.scope = {it->second};
    f.values = {state == 0 ? 1.0 : 0.0, state == 1 ? 1.0 : 0.0};
    prep.factors.push_back(std::move(f));
  }
  for (const auto& [name, lambda] : ev.virt) {
    auto it = prep.id_of.find(name);
    if (it == prep.id_of.end())
      throw Error(ErrorCode::Argument, "unknown evidence variable '" + name + "'");
    auto [lp, la] = scaled_pair(name, lambda);
    Factor f;
    f.scope = {it->second};
    f.values = {la, lp};
    prep.factors.push_back(std::move(f));
  }
  return prep;
}

Posterior normalize(const std::string& query, double w_absent, double w_present) {
  const double total = w_absent + w_present;
  if (!std::isfinite(total))
    throw Error(ErrorCode::Domain, "non-finite normalizer during inference");
  if (!(total > 0.0)) throw Error(ErrorCode::Domain, "zero-probability evidence");
  return Posterior{query, w_present / total, w_absent / total};
}

// Min-fill elimination order over the factor graph, keeping the query.
std::vector<int> elimination_order(const Prepared& prep, const Network& net, int query_id) {
  const int n = static_cast<int>(net.variables.size());
  std::vector<std::set<int>> adj(n);
  for (const auto& f : prep.factors)
    for (std::size_t i = 0; i < f.scope.size(); ++i)
      for (std::size_t j = i + 1; j < f.scope.size(); ++j) {
        adj[f.scope[i]].insert(f.scope[j]);
        adj[f.scope[j]].insert(f.scope[i]);
      }
  std::set<int> remaining;
  for (int v = 0; v < n; ++v)
    if (v != query_id) remaining.insert(v);
  std::vector<int> order;
  order.reserve(remaining.size());
  while (!remaining.empty()) {
    int best = -1;
    std::size_t best_fill = std::numeric_limits<std::size_t>::max();
    for (int v : remaining) {
      std::vector<int> nb;
      for (int u : adj[v])
        if (u != v && (remaining.count(u) || u == query_id)) nb.push_back(u);
      std::size_t fill = 0;
      for (std::size_t i = 0; i < nb.size(); ++i)
        for (std::size_t j = i + 1; j < nb.size(); ++j)
          if (!adj[nb[i]].count(nb[j])) ++fill;
      const bool better =
          fill < best_fill ||
          (fill == best_fill && best >= 0 &&
           net.variables[v].name < net.variables[best].name);
      if (best < 0 || better) {
        best = v;
        best_fill = fill;
      }
    }
    std::vector<int> nb;
    for (int u : adj[best])
      if (u != best && (remaining.count(u) || u == query_id)) nb.push_back(u);
    for (std::size_t i = 0; i < nb.size(); ++i)
      for (std::size_t j = i + 1; j < nb.size(); ++j) {
        adj[nb[i]].insert(nb[j]);
        adj[nb[j]].insert(nb[i]);
      }
    for (int u : nb) adj[u].erase(best);
    adj[best].clear();
    remaining.erase(best);
    order.push_back(best);
  }
  return order;
}

}  // namespace

AttachedEvidence attach_evidence(const FeatureVector& features,
                                 const std::vector<ConceptEvidenceLink>& links) {
  std::map<std::string, std::vector<const ConceptEvidenceLink*>> by_word;
  for (const auto& link : links) by_word[link.word].push_back(&link);
  AttachedEvidence out;
  for (const auto& [word, bit] : features.bits) {
    auto it = by_word.find(word);
    if (it == by_word.end()) {
      ++out.unknown_words;
      continue;
    }
    for (const ConceptEvidenceLink* link : it->second) {
      auto [pos, inserted] =
          out.evidence.virt.emplace(link->concept_name, std::make_pair(1.0, 1.0));
      const double lp = bit ? link->p_present : 1.0 - link->p_present;
      const double la = bit ? link->p_absent : 1.0 - link->p_absent;
      pos->second.first *= lp;
      pos->second.second *= la;
      (void)inserted;
    }
  }
  return out;
}

Posterior posterior(const Network& net, const EvidenceSet& evidence, const std::string& query) {
  Prepared prep = prepare(net, evidence, query);
  const int query_id = prep.id_of.at(query);
  const std::vector<int> order = elimination_order(prep, net, query_id);

  std::vector<Factor> pool = std::move(prep.factors);
  for (int v : order) {
    Factor merged;
    bool have = false;
    std::vector<Factor> rest;
    rest.reserve(pool.size());
    for (auto& f : pool) {
      if (std::binary_search(f.scope.begin(), f.scope.end(), v)) {
        merged = have ? multiply(merged, f) : std::move(f);
        have = true;
      } else {
        rest.push_back(std::move(f));
      }
    }
    if (have) rest.push_back(sum_out(merged, v));
    pool = std::move(rest);
  }
  Factor result;
  result.scope = {query_id};
  result.values = {1.0, 1.0};
  for (const auto& f : pool) result = multiply(result, f);
  if (result.scope.size() != 1)
    throw Error(ErrorCode::Domain, "elimination left an unexpected scope");
  return normalize(query, result.values[0], result.values[1]);
}

Posterior enumerate_posterior(const Network& net, const EvidenceSet& evidence,
                              const std::string& query) {
  if (net.variables.size() > 20)
    throw Error(ErrorCode::Domain, "enumeration capped at 20 variables");
  Prepared prep = prepare(net, evidence, query);
  const int query_id = prep.id_of.at(query);
  const std::size_t n = net.variables.size();
  double totals[2] = {0.0, 0.0};
  for (std::size_t joint = 0; joint < state_count(n); ++joint) {
    double w = 1.0;
    for (const auto& f : prep.factors) {
      std::size_t idx = 0;
      for (int var : f.scope) idx = idx * 2 + ((joint >> (n - 1 - var)) & 1u);
      w *= f.values[idx];
    }
    totals[(joint >> (n - 1 - query_id)) & 1u] += w;
  }
  return normalize(query, totals[0], totals[1]);
}

}  // namespace pcir
