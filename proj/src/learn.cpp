#include "learn.hpp"

#include <algorithm>
#include <bit>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <map>
#include <nlohmann/json.hpp>
#include <numeric>
#include <set>
#include <sstream>

#include "error.hpp"
#include "fsio.hpp"

namespace pcir {

// ---------------------------------------------------------------------------
// Dataset

Dataset::Dataset(std::vector<std::string> columns) : columns_(std::move(columns)) {
  std::set<std::string> seen;
  for (const auto& c : columns_) {
    if (c.empty()) throw Error(ErrorCode::Argument, "empty column name");
    if (!seen.insert(c).second)
      throw Error(ErrorCode::Argument, "duplicate column name '" + c + "'");
  }
  bits_.resize(columns_.size());
}

std::optional<std::size_t> Dataset::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i)
    if (columns_[i] == name) return i;
  return std::nullopt;
}

int Dataset::at(std::size_t row, std::size_t col) const {
  return static_cast<int>((bits_[col][row / 64] >> (row % 64)) & 1u);
}

void Dataset::append_row(std::span<const int> bits) {
  if (bits.size() != columns_.size())
    throw Error(ErrorCode::Argument, "row width does not match column count");
  const std::size_t row = rows_++;
  const std::size_t word = row / 64;
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    if (bits_[c].size() <= word) bits_[c].resize(word + 1, 0);
    if (bits[c] == 1)
      bits_[c][word] |= std::uint64_t{1} << (row % 64);
    else if (bits[c] != 0)
      throw Error(ErrorCode::Argument, "dataset cells must be 0 or 1");
  }
}

bool Dataset::column_constant(std::size_t col) const {
  std::size_t ones = 0;
  for (std::uint64_t w : bits_[col]) ones += std::popcount(w);
  return ones == 0 || ones == rows_;
}

namespace {

RowMask full_mask(const Dataset& data) {
  RowMask m(data.word_count(), ~std::uint64_t{0});
  const std::size_t rem = data.row_count() % 64;
  if (rem != 0 && !m.empty()) m.back() = (std::uint64_t{1} << rem) - 1;
  return m;
}

std::size_t popcount_mask(const RowMask& m) {
  std::size_t n = 0;
  for (std::uint64_t w : m) n += std::popcount(w);
  return n;
}

std::size_t popcount_and(const RowMask& a, const std::vector<std::uint64_t>& b) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) n += std::popcount(a[i] & b[i]);
  return n;
}

std::size_t resolve_column(const Dataset& data, const std::string& name) {
  auto idx = data.column_index(name);
  if (!idx) throw Error(ErrorCode::Argument, "unknown column '" + name + "'");
  return *idx;
}

}  // namespace

// ---------------------------------------------------------------------------
// Independence testing

void check_params(const LearnParams& params) {
  if (!(params.alpha > 0.0 && params.alpha < 1.0))
    throw Error(ErrorCode::Argument, "alpha must lie in (0,1)");
  if (params.cv_folds < 2) throw Error(ErrorCode::Argument, "cv_folds must be at least 2");
  if (params.cv_agreement > params.cv_folds)
    throw Error(ErrorCode::Argument, "cv_agreement cannot exceed cv_folds");
  if (!(params.smoothing >= 0.0))
    throw Error(ErrorCode::Argument, "smoothing must be nonnegative");
  if (!(params.min_expected_count >= 0.0))
    throw Error(ErrorCode::Argument, "min_expected_count must be nonnegative");
}

std::int64_t ContingencyTable::total() const {
  std::int64_t n = 0;
  for (const auto& cell : cells) n += cell[0] + cell[1] + cell[2] + cell[3];
  return n;
}

ContingencyTable contingency_counts(const Dataset& data, const std::string& x,
                                    const std::string& y, const std::vector<std::string>& z,
                                    const RowMask* mask) {
  const std::size_t xi = resolve_column(data, x);
  const std::size_t yi = resolve_column(data, y);
  std::vector<std::size_t> zi;
  zi.reserve(z.size());
  std::set<std::string> distinct{x, y};
  for (const auto& name : z) {
    if (!distinct.insert(name).second)
      throw Error(ErrorCode::Argument, "conditioning columns must be distinct from x and y");
    zi.push_back(resolve_column(data, name));
  }

  ContingencyTable table;
  table.z = z;
  const RowMask base = mask ? *mask : full_mask(data);
  const std::size_t strata = std::size_t{1} << z.size();
  table.cells.resize(strata);
  RowMask m;
  for (std::size_t s = 0; s < strata; ++s) {
    m = base;
    for (std::size_t j = 0; j < zi.size(); ++j) {
      const bool present = ((s >> (zi.size() - 1 - j)) & 1u) != 0;
      const auto& col = data.column_bits(zi[j]);
      for (std::size_t w = 0; w < m.size(); ++w) m[w] &= present ? col[w] : ~col[w];
    }
    const std::int64_t total = static_cast<std::int64_t>(popcount_mask(m));
    const std::int64_t nx = static_cast<std::int64_t>(popcount_and(m, data.column_bits(xi)));
    const std::int64_t ny = static_cast<std::int64_t>(popcount_and(m, data.column_bits(yi)));
    RowMask mx(m.size());
    for (std::size_t w = 0; w < m.size(); ++w) mx[w] = m[w] & data.column_bits(xi)[w];
    const std::int64_t nxy = static_cast<std::int64_t>(popcount_and(mx, data.column_bits(yi)));
    table.cells[s] = {total - nx - ny + nxy, ny - nxy, nx - nxy, nxy};
  }
  return table;
}

double chi2_critical_value(std::size_t df, double alpha) {
  if (df == 0) throw Error(ErrorCode::Argument, "degrees of freedom must be positive");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw Error(ErrorCode::Argument, "alpha must lie in (0,1)");
  boost::math::chi_squared dist(static_cast<double>(df));
  return boost::math::quantile(dist, 1.0 - alpha);
}

Chi2Result chi2_independence(const Dataset& data, const std::string& x, const std::string& y,
                             const std::vector<std::string>& z, const LearnParams& params,
                             const RowMask* mask) {
  check_params(params);
  const ContingencyTable table = contingency_counts(data, x, y, z, mask);
  Chi2Result result;
  for (const auto& cell : table.cells) {
    const double n00 = static_cast<double>(cell[0]), n01 = static_cast<double>(cell[1]);
    const double n10 = static_cast<double>(cell[2]), n11 = static_cast<double>(cell[3]);
    const double n = n00 + n01 + n10 + n11;
    if (n == 0.0) continue;
    const double r0 = n00 + n01, r1 = n10 + n11;
    const double c0 = n00 + n10, c1 = n01 + n11;
    if (r0 == 0.0 || r1 == 0.0 || c0 == 0.0 || c1 == 0.0) continue;
    const double e00 = r0 * c0 / n, e01 = r0 * c1 / n;
    const double e10 = r1 * c0 / n, e11 = r1 * c1 / n;
    const double floor = params.min_expected_count;
    if (e00 < floor || e01 < floor || e10 < floor || e11 < floor) continue;
    // closed form of Pearson for a 2x2 table; symmetric in x and y down to
    // the last bit because every product commutes
    const double det = n00 * n11 - n01 * n10;
    result.statistic += n * (det * det) / ((r0 * r1) * (c0 * c1));
    result.df += 1;
  }
  if (result.df > 0) {
    result.critical = chi2_critical_value(result.df, params.alpha);
    result.dependent = result.statistic > result.critical;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Boundary search and skeleton

namespace {

// The most recently added members, newest last, at most `cap` of them.
std::vector<std::string> recent_members(const std::vector<std::string>& boundary,
                                        std::size_t cap) {
  const std::size_t take = std::min(boundary.size(), cap);
  return {boundary.end() - static_cast<std::ptrdiff_t>(take), boundary.end()};
}

}  // namespace

std::vector<std::string> markov_boundary(const Dataset& data, const std::string& x,
                                         const LearnParams& params,
                                         const std::vector<std::string>& universe,
                                         const RowMask* mask) {
  check_params(params);
  resolve_column(data, x);
  std::vector<std::string> candidates = universe.empty() ? data.columns() : universe;
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  for (const auto& name : candidates) resolve_column(data, name);
  std::erase(candidates, x);

  std::vector<std::string> boundary;  // insertion order
  auto in_boundary = [&](const std::string& name) {
    return std::find(boundary.begin(), boundary.end(), name) != boundary.end();
  };

  // grow
  for (;;) {
    const std::vector<std::string> cond = recent_members(boundary, params.max_condition_size);
    std::string best;
    double best_stat = 0.0;
    for (const auto& y : candidates) {
      if (in_boundary(y)) continue;
      const Chi2Result r = chi2_independence(data, x, y, cond, params, mask);
      if (r.dependent && (best.empty() || r.statistic > best_stat)) {
        best = y;
        best_stat = r.statistic;
      }
    }
    if (best.empty()) break;
    boundary.push_back(best);
  }

  // shrink
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < boundary.size(); ++i) {
      std::vector<std::string> rest = boundary;
      rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(i));
      const std::vector<std::string> cond = recent_members(rest, params.max_condition_size);
      if (!chi2_independence(data, x, boundary[i], cond, params, mask).dependent) {
        boundary.erase(boundary.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
        break;
      }
    }
  }

  std::sort(boundary.begin(), boundary.end());
  return boundary;
}

SkeletonResult build_skeleton(const Dataset& data, const std::vector<std::string>& variables,
                              const LearnParams& params) {
  check_params(params);
  SkeletonResult result;
  std::vector<std::string> vars = variables;
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  for (const auto& v : vars) resolve_column(data, v);
  result.skeleton.variables = vars;

  std::vector<std::string> active;
  for (const auto& v : vars) {
    if (data.column_constant(*data.column_index(v)))
      result.diagnostics.push_back({"skipped_column", v});
    else
      active.push_back(v);
  }

  std::map<std::pair<std::string, std::string>, std::size_t> votes;
  for (std::size_t fold = 0; fold < params.cv_folds; ++fold) {
    RowMask mask(data.word_count(), 0);
    for (std::size_t row = 0; row < data.row_count(); ++row)
      if (row % params.cv_folds != fold) mask[row / 64] |= std::uint64_t{1} << (row % 64);

    std::map<std::string, std::set<std::string>> bd;
    for (const auto& v : active) {
      auto members = markov_boundary(data, v, params, active, &mask);
      bd.emplace(v, std::set<std::string>(members.begin(), members.end()));
    }
    std::set<std::pair<std::string, std::string>> fold_edges;
    for (const auto& u : active)
      for (const auto& v : bd.at(u)) {
        const bool back = bd.at(v).count(u) != 0;
        const bool keep = params.symmetry_rule == LearnParams::SymmetryRule::And ? back : true;
        if (keep) fold_edges.insert({std::min(u, v), std::max(u, v)});
      }
    for (const auto& e : fold_edges) ++votes[e];
  }

  for (const auto& [edge, n] : votes)
    if (n >= params.cv_agreement)
      result.skeleton.edges.push_back(UndirectedEdge{edge.first, edge.second});
  std::sort(result.skeleton.edges.begin(), result.skeleton.edges.end(),
            [](const UndirectedEdge& a, const UndirectedEdge& b) {
              return std::tie(a.a, a.b) < std::tie(b.a, b.b);
            });
  return result;
}

// ---------------------------------------------------------------------------
// Potential fitting

namespace {

void bron_kerbosch(std::vector<int>& r, std::set<int> p, std::set<int> x,
                   const std::vector<std::set<int>>& adj,
                   std::vector<std::vector<int>>& out) {
  if (p.empty() && x.empty()) {
    out.push_back(r);
    return;
  }
  int pivot = -1;
  std::size_t best = 0;
  auto consider = [&](int u) {
    std::size_t overlap = 0;
    for (int w : p)
      if (adj[u].count(w)) ++overlap;
    if (pivot < 0 || overlap > best) {
      pivot = u;
      best = overlap;
    }
  };
  for (int u : p) consider(u);
  for (int u : x) consider(u);
  std::vector<int> ext;
  for (int v : p)
    if (!adj[pivot].count(v)) ext.push_back(v);
  for (int v : ext) {
    std::set<int> p2, x2;
    for (int w : p)
      if (adj[v].count(w)) p2.insert(w);
    for (int w : x)
      if (adj[v].count(w)) x2.insert(w);
    r.push_back(v);
    bron_kerbosch(r, std::move(p2), std::move(x2), adj, out);
    r.pop_back();
    p.erase(v);
    x.insert(v);
  }
}

struct Dsu {
  std::vector<int> parent;
  explicit Dsu(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int v) { return parent[v] == v ? v : parent[v] = find(parent[v]); }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[b] = a;
    return true;
  }
};

// Joint counts over a set of columns; joint states indexed last column
// fastest, matching FactorTable.
std::vector<std::int64_t> joint_counts(const Dataset& data, const std::vector<std::size_t>& cols) {
  const std::size_t k = cols.size();
  std::vector<std::int64_t> counts(std::size_t{1} << k, 0);
  const RowMask base = full_mask(data);
  RowMask m;
  for (std::size_t s = 0; s < counts.size(); ++s) {
    m = base;
    for (std::size_t j = 0; j < k; ++j) {
      const bool present = ((s >> (k - 1 - j)) & 1u) != 0;
      const auto& col = data.column_bits(cols[j]);
      for (std::size_t w = 0; w < m.size(); ++w) m[w] &= present ? col[w] : ~col[w];
    }
    std::size_t n = 0;
    for (std::uint64_t w : m) n += std::popcount(w);
    counts[s] = static_cast<std::int64_t>(n);
  }
  return counts;
}

}  // namespace

Network fit_potentials(const Skeleton& skeleton, const Dataset& data, const LearnParams& params) {
  check_params(params);
  std::vector<std::string> vars = skeleton.variables;
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  for (const auto& v : vars) resolve_column(data, v);
  std::map<std::string, int> id_of;
  for (std::size_t i = 0; i < vars.size(); ++i) id_of.emplace(vars[i], static_cast<int>(i));

  std::vector<std::set<int>> adj(vars.size());
  for (const auto& e : skeleton.edges) {
    auto ia = id_of.find(e.a), ib = id_of.find(e.b);
    if (ia == id_of.end() || ib == id_of.end())
      throw Error(ErrorCode::Argument, "edge endpoint outside skeleton variables");
    if (ia->second == ib->second) throw Error(ErrorCode::Argument, "self edge in skeleton");
    adj[ia->second].insert(ib->second);
    adj[ib->second].insert(ia->second);
  }

  std::set<int> p;
  for (std::size_t i = 0; i < vars.size(); ++i) p.insert(static_cast<int>(i));
  std::vector<int> r;
  std::vector<std::vector<int>> cliques;
  if (!vars.empty()) bron_kerbosch(r, std::move(p), {}, adj, cliques);
  for (auto& c : cliques) std::sort(c.begin(), c.end());
  std::sort(cliques.begin(), cliques.end());
  for (const auto& c : cliques)
    if (c.size() > 12)
      throw Error(ErrorCode::Domain, "clique larger than 12 variables");

  // Maximum-weight spanning forest over clique overlaps.
  struct CliqueEdge {
    std::size_t weight, i, j;
  };
  std::vector<CliqueEdge> cedges;
  for (std::size_t i = 0; i < cliques.size(); ++i)
    for (std::size_t j = i + 1; j < cliques.size(); ++j) {
      std::vector<int> shared;
      std::set_intersection(cliques[i].begin(), cliques[i].end(), cliques[j].begin(),
                            cliques[j].end(), std::back_inserter(shared));
      if (!shared.empty()) cedges.push_back({shared.size(), i, j});
    }
  std::sort(cedges.begin(), cedges.end(), [](const CliqueEdge& a, const CliqueEdge& b) {
    return std::tie(b.weight, a.i, a.j) < std::tie(a.weight, b.i, b.j);
  });
  Dsu dsu(cliques.size());
  std::vector<std::vector<std::size_t>> tree(cliques.size());
  for (const auto& e : cedges)
    if (dsu.unite(static_cast<int>(e.i), static_cast<int>(e.j))) {
      tree[e.i].push_back(e.j);
      tree[e.j].push_back(e.i);
    }

  // Root each component at its lowest clique index.
  std::vector<std::ptrdiff_t> parent(cliques.size(), -2);
  for (std::size_t root = 0; root < cliques.size(); ++root) {
    if (parent[root] != -2) continue;
    parent[root] = -1;
    std::vector<std::size_t> queue{root};
    while (!queue.empty()) {
      const std::size_t cur = queue.front();
      queue.erase(queue.begin());
      auto kids = tree[cur];
      std::sort(kids.begin(), kids.end());
      for (std::size_t next : kids)
        if (parent[next] == -2) {
          parent[next] = static_cast<std::ptrdiff_t>(cur);
          queue.push_back(next);
        }
    }
  }

  const double n = static_cast<double>(data.row_count());
  const double s = params.smoothing;
  Network net;
  net.kind = NetworkKind::Undirected;
  for (const auto& v : vars) {
    VarKind kind = VarKind::Concept;
    if (auto it = data.roles.find(v); it != data.roles.end()) kind = it->second;
    net.variables.push_back(Variable{v, kind});
  }
  net.edges = skeleton.edges;

  for (std::size_t ci = 0; ci < cliques.size(); ++ci) {
    const auto& clique = cliques[ci];
    std::vector<std::size_t> cols;
    std::vector<std::string> names;
    for (int v : clique) {
      names.push_back(vars[static_cast<std::size_t>(v)]);
      cols.push_back(*data.column_index(names.back()));
    }
    const auto counts = joint_counts(data, cols);
    const double denom = n + s * static_cast<double>(counts.size());
    std::vector<double> q(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i)
      q[i] = (static_cast<double>(counts[i]) + s) / denom;

    FactorTable table;
    table.scope = names;
    if (parent[ci] < 0) {
      table.values = std::move(q);
    } else {
      // Divide by this clique's own marginal on the separator so the clique
      // product telescopes.
      const auto& par = cliques[static_cast<std::size_t>(parent[ci])];
      std::vector<std::size_t> sep_pos;  // positions within this clique
      for (std::size_t i = 0; i < clique.size(); ++i)
        if (std::binary_search(par.begin(), par.end(), clique[i])) sep_pos.push_back(i);
      const std::size_t k = clique.size();
      std::vector<double> sep(std::size_t{1} << sep_pos.size(), 0.0);
      auto sep_index = [&](std::size_t joint) {
        std::size_t idx = 0;
        for (std::size_t pos : sep_pos) idx = idx * 2 + ((joint >> (k - 1 - pos)) & 1u);
        return idx;
      };
      for (std::size_t joint = 0; joint < q.size(); ++joint) sep[sep_index(joint)] += q[joint];
      table.values.resize(q.size());
      for (std::size_t joint = 0; joint < q.size(); ++joint) {
        const double m = sep[sep_index(joint)];
        table.values[joint] = m > 0.0 ? q[joint] / m : 0.0;
      }
    }
    net.tables.push_back(std::move(table));
  }
  net.canonicalize();
  return net;
}

std::vector<ConceptEvidenceLink> fit_concept_evidence(const Dataset& data,
                                                      const std::string& concept_name,
                                                      const std::vector<std::string>& words,
                                                      const LearnParams& params) {
  check_params(params);
  const std::size_t ci = resolve_column(data, concept_name);
  if (data.column_constant(ci))
    throw Error(ErrorCode::Domain, "degenerate concept column '" + concept_name + "'");

  const RowMask base = full_mask(data);
  RowMask present(base.size()), absent(base.size());
  for (std::size_t w = 0; w < base.size(); ++w) {
    present[w] = base[w] & data.column_bits(ci)[w];
    absent[w] = base[w] & ~data.column_bits(ci)[w];
  }
  const double n1 = static_cast<double>(popcount_mask(present));
  const double n0 = static_cast<double>(data.row_count()) - n1;
  const double s = params.smoothing;

  std::vector<std::string> sorted_words = words;
  std::sort(sorted_words.begin(), sorted_words.end());
  sorted_words.erase(std::unique(sorted_words.begin(), sorted_words.end()), sorted_words.end());

  std::vector<ConceptEvidenceLink> links;
  links.reserve(sorted_words.size());
  for (const auto& word : sorted_words) {
    if (word == concept_name)
      throw Error(ErrorCode::Argument, "word column equals concept column");
    const std::size_t wi = resolve_column(data, word);
    const double k1 = static_cast<double>(popcount_and(present, data.column_bits(wi)));
    const double k0 = static_cast<double>(popcount_and(absent, data.column_bits(wi)));
    ConceptEvidenceLink link;
    link.word = word;
    link.concept_name = concept_name;
    link.p_present = std::clamp((k1 + s) / (n1 + 2.0 * s), kLinkEpsilon, 1.0 - kLinkEpsilon);
    link.p_absent = std::clamp((k0 + s) / (n0 + 2.0 * s), kLinkEpsilon, 1.0 - kLinkEpsilon);
    links.push_back(std::move(link));
  }
  return links;
}

// ---------------------------------------------------------------------------
// Full pass

LearnOutput learn_network(const Dataset& data, const LearnParams& params) {
  check_params(params);
  std::vector<std::string> concepts, features;
  for (const auto& col : data.columns()) {
    auto it = data.roles.find(col);
    if (it == data.roles.end()) continue;
    (it->second == VarKind::Concept ? concepts : features).push_back(col);
  }
  if (concepts.empty())
    throw Error(ErrorCode::Argument, "dataset manifest marks no concept columns");
  std::sort(concepts.begin(), concepts.end());
  std::sort(features.begin(), features.end());

  LearnOutput out;
  for (const auto& col : data.columns())
    if (!data.roles.count(col)) out.diagnostics.push_back({"unlisted_column", col});

  SkeletonResult sk = build_skeleton(data, concepts, params);
  for (auto& d : sk.diagnostics) out.diagnostics.push_back(std::move(d));
  out.network = fit_potentials(sk.skeleton, data, params);

  std::vector<std::string> usable_concepts;
  for (const auto& c : concepts)
    if (!data.column_constant(*data.column_index(c))) usable_concepts.push_back(c);

  std::map<std::string, std::vector<std::string>> assigned;  // concept -> words
  for (const auto& word : features) {
    if (data.column_constant(*data.column_index(word))) {
      out.diagnostics.push_back({"skipped_column", word});
      continue;
    }
    std::string best;
    double best_stat = 0.0;
    for (const auto& c : usable_concepts) {
      const Chi2Result r = chi2_independence(data, word, c, {}, params);
      if (r.dependent && (best.empty() || r.statistic > best_stat)) {
        best = c;
        best_stat = r.statistic;
      }
    }
    if (best.empty())
      out.diagnostics.push_back({"unassigned_word", word});
    else
      assigned[best].push_back(word);
  }
  for (const auto& [concept_col, words] : assigned) {
    auto links = fit_concept_evidence(data, concept_col, words, params);
    out.links.insert(out.links.end(), links.begin(), links.end());
  }
  std::sort(out.links.begin(), out.links.end(),
            [](const ConceptEvidenceLink& a, const ConceptEvidenceLink& b) {
              return std::tie(a.word, a.concept_name) < std::tie(b.word, b.concept_name);
            });
  out.network.evidence_links = out.links;
  out.network.canonicalize();
  return out;
}

// ---------------------------------------------------------------------------
// File formats

Dataset dataset_from_csv(const std::string& text) {
  std::vector<std::string> lines;
  std::string line;
  std::istringstream in(text);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw Error(ErrorCode::Parse, "dataset CSV is empty");

  auto split = [](const std::string& row) {
    std::vector<std::string> cells;
    std::string cell;
    for (char c : row) {
      if (c == ',') {
        cells.push_back(cell);
        cell.clear();
      } else {
        cell += c;
      }
    }
    cells.push_back(cell);
    return cells;
  };

  Dataset data;
  try {
    data = Dataset(split(lines[0]));
  } catch (const Error& e) {
    throw Error(ErrorCode::Parse, std::string("dataset CSV header: ") + e.what());
  }
  std::vector<int> row(data.column_count());
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split(lines[i]);
    if (cells.size() != data.column_count())
      throw Error(ErrorCode::Parse, "dataset CSV row " + std::to_string(i + 1) +
                                        " has " + std::to_string(cells.size()) +
                                        " cells, expected " + std::to_string(data.column_count()));
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (cells[c] == "0")
        row[c] = 0;
      else if (cells[c] == "1")
        row[c] = 1;
      else
        throw Error(ErrorCode::Parse, "dataset CSV cell at row " + std::to_string(i + 1) +
                                          " column '" + data.columns()[c] +
                                          "' must be 0 or 1");
    }
    data.append_row(row);
  }
  return data;
}

std::string dataset_to_csv(const Dataset& data) {
  std::string out;
  for (std::size_t c = 0; c < data.column_count(); ++c) {
    if (c) out += ',';
    out += data.columns()[c];
  }
  out += '\n';
  for (std::size_t r = 0; r < data.row_count(); ++r) {
    for (std::size_t c = 0; c < data.column_count(); ++c) {
      if (c) out += ',';
      out += data.at(r, c) ? '1' : '0';
    }
    out += '\n';
  }
  return out;
}

void apply_manifest(Dataset& data, const std::string& manifest_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(manifest_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::Parse, std::string("manifest: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("roles") || !doc["roles"].is_object())
    throw Error(ErrorCode::Parse, "manifest must be an object with a \"roles\" object");
  std::map<std::string, VarKind> roles;
  for (const auto& [col, value] : doc["roles"].items()) {
    if (!data.column_index(col))
      throw Error(ErrorCode::Parse, "manifest names unknown column '" + col + "'");
    if (!value.is_string())
      throw Error(ErrorCode::Parse, "manifest role for '" + col + "' must be a string");
    const std::string role = value.get<std::string>();
    if (role == "concept")
      roles[col] = VarKind::Concept;
    else if (role == "feature")
      roles[col] = VarKind::Feature;
    else
      throw Error(ErrorCode::Parse,
                  "manifest role for '" + col + "' must be \"concept\" or \"feature\"");
  }
  data.roles = std::move(roles);
}

std::string manifest_to_json(const Dataset& data) {
  std::string out = "{\n  \"roles\": {";
  bool first = true;
  for (const auto& [col, kind] : data.roles) {
    out += first ? "\n" : ",\n";
    first = false;
    out += "    ";
    append_json_string(out, col);
    out += kind == VarKind::Concept ? ": \"concept\"" : ": \"feature\"";
  }
  out += first ? "}\n}\n" : "\n  }\n}\n";
  return out;
}

Dataset load_dataset(const std::string& csv_path, const std::string& manifest_path) {
  Dataset data = dataset_from_csv(read_file(csv_path));
  if (!manifest_path.empty()) apply_manifest(data, read_file(manifest_path));
  return data;
}

}  // namespace pcir
