#include "model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace pcir {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

const Variable* Network::find_variable(const std::string& name) const {
  for (const auto& v : variables)
    if (v.name == name) return &v;
  return nullptr;
}

std::vector<std::string> Network::parents_of(const std::string& child) const {
  std::vector<std::string> out;
  for (const auto& a : arcs)
    if (a.child == child) out.push_back(a.parent);
  std::sort(out.begin(), out.end());
  return out;
}

const FactorTable* Network::cpt_of(const std::string& name) const {
  for (const auto& t : tables)
    if (!t.scope.empty() && t.scope.back() == name) return &t;
  return nullptr;
}

namespace {

// Rewrites a table onto a new scope ordering (same variable set), permuting
// the values so every joint state keeps its entry.
FactorTable reorder_scope(const FactorTable& t, const std::vector<std::string>& new_scope) {
  if (new_scope == t.scope) return t;
  const std::size_t k = t.scope.size();
  if (new_scope.size() != k || t.values.size() != (std::size_t{1} << k)) return t;

  std::vector<std::size_t> pos(k);  // position of new_scope[i] in old scope
  for (std::size_t i = 0; i < k; ++i) {
    auto it = std::find(t.scope.begin(), t.scope.end(), new_scope[i]);
    if (it == t.scope.end()) return t;  // not a permutation; leave untouched
    pos[i] = static_cast<std::size_t>(it - t.scope.begin());
  }

  FactorTable out;
  out.scope = new_scope;
  out.values.resize(t.values.size());
  for (std::size_t idx = 0; idx < out.values.size(); ++idx) {
    std::size_t old_idx = 0;
    for (std::size_t i = 0; i < k; ++i) {
      const int state = static_cast<int>((idx >> (k - 1 - i)) & 1u);
      if (state) old_idx |= std::size_t{1} << (k - 1 - pos[i]);
    }
    out.values[idx] = t.values[old_idx];
  }
  return out;
}

bool scope_matches_family(const FactorTable& t, const std::string& child,
                          const std::vector<std::string>& parents) {
  if (t.scope.size() != parents.size() + 1) return false;
  std::vector<std::string> scope_sorted = t.scope;
  std::sort(scope_sorted.begin(), scope_sorted.end());
  std::vector<std::string> family = parents;
  family.push_back(child);
  std::sort(family.begin(), family.end());
  return scope_sorted == family;
}

}  // namespace

void Network::canonicalize() {
  std::sort(variables.begin(), variables.end(),
            [](const Variable& a, const Variable& b) { return a.name < b.name; });
  std::sort(arcs.begin(), arcs.end());
  for (auto& e : edges)
    if (e.b < e.a) std::swap(e.a, e.b);
  std::sort(edges.begin(), edges.end());
  std::sort(evidence_links.begin(), evidence_links.end(),
            [](const ConceptEvidenceLink& a, const ConceptEvidenceLink& b) {
              return std::tie(a.word, a.concept_name) < std::tie(b.word, b.concept_name);
            });

  for (auto& t : tables) {
    std::vector<std::string> target;
    if (kind == NetworkKind::Directed) {
      // Canonical CPT scope: sorted parents, then the owned variable.
      const Variable* owner = nullptr;
      for (const auto& v : variables) {
        if (std::find(t.scope.begin(), t.scope.end(), v.name) == t.scope.end()) continue;
        if (scope_matches_family(t, v.name, parents_of(v.name))) {
          owner = &v;
          break;
        }
      }
      if (owner) {
        target = parents_of(owner->name);
        target.push_back(owner->name);
      } else {
        target = t.scope;
        std::sort(target.begin(), target.end());
      }
    } else {
      target = t.scope;
      std::sort(target.begin(), target.end());
    }
    t = reorder_scope(t, target);
  }
  std::sort(tables.begin(), tables.end(),
            [](const FactorTable& a, const FactorTable& b) { return a.scope < b.scope; });
}

Violations validate(const Network& net) {
  Violations out;
  std::set<std::string> names;
  for (const auto& v : net.variables) {
    if (v.name.empty()) out.push_back("variable with empty name");
    if (!names.insert(v.name).second)
      out.push_back("duplicate variable name '" + v.name + "'");
  }
  auto known = [&](const std::string& n) { return names.count(n) != 0; };

  if (net.kind == NetworkKind::Directed && !net.edges.empty())
    out.push_back("directed network carries undirected edges");
  if (net.kind == NetworkKind::Undirected && !net.arcs.empty())
    out.push_back("undirected network carries directed arcs");

  // Structure.
  std::set<std::pair<std::string, std::string>> seen_pairs;
  if (net.kind == NetworkKind::Directed) {
    for (const auto& a : net.arcs) {
      if (!known(a.parent)) out.push_back("unknown variable " + a.parent);
      if (!known(a.child)) out.push_back("unknown variable " + a.child);
      if (a.parent == a.child) out.push_back("self arc on '" + a.parent + "'");
      if (!seen_pairs.insert({a.parent, a.child}).second)
        out.push_back("duplicate arc " + a.parent + " -> " + a.child);
    }
    // Kahn's algorithm over the declared variables.
    std::map<std::string, int> indeg;
    std::map<std::string, std::vector<std::string>> children;
    for (const auto& n : names) indeg[n] = 0;
    for (const auto& a : net.arcs) {
      if (!known(a.parent) || !known(a.child) || a.parent == a.child) continue;
      ++indeg[a.child];
      children[a.parent].push_back(a.child);
    }
    std::vector<std::string> queue;
    for (const auto& [n, d] : indeg)
      if (d == 0) queue.push_back(n);
    std::size_t removed = 0;
    while (!queue.empty()) {
      const std::string n = queue.back();
      queue.pop_back();
      ++removed;
      for (const auto& c : children[n])
        if (--indeg[c] == 0) queue.push_back(c);
    }
    if (removed != names.size()) out.push_back("cycle in arc graph");
  } else {
    for (const auto& e : net.edges) {
      if (!known(e.a)) out.push_back("unknown variable " + e.a);
      if (!known(e.b)) out.push_back("unknown variable " + e.b);
      if (e.a == e.b) out.push_back("self edge on '" + e.a + "'");
      auto key = std::minmax(e.a, e.b);
      if (!seen_pairs.insert({key.first, key.second}).second)
        out.push_back("duplicate edge " + key.first + " -- " + key.second);
    }
  }

  // Tables.
  for (const auto& t : net.tables) {
    std::ostringstream label;
    label << "table [";
    for (std::size_t i = 0; i < t.scope.size(); ++i)
      label << (i ? " " : "") << t.scope[i];
    label << "]";
    if (t.scope.empty()) out.push_back("table with empty scope");
    std::set<std::string> in_scope;
    bool scope_ok = !t.scope.empty();
    for (const auto& s : t.scope) {
      if (!known(s)) {
        out.push_back("unknown variable " + s);
        scope_ok = false;
      }
      if (!in_scope.insert(s).second) {
        out.push_back(label.str() + " repeats variable '" + s + "'");
        scope_ok = false;
      }
    }
    if (t.values.size() != t.state_count()) {
      out.push_back(label.str() + " has " + std::to_string(t.values.size()) +
                    " values, expected " + std::to_string(t.state_count()));
      scope_ok = false;
    }
    for (double v : t.values) {
      if (!std::isfinite(v) || v < 0.0) {
        out.push_back(label.str() + " contains a negative or non-finite value");
        break;
      }
    }
    (void)scope_ok;
  }

  if (net.kind == NetworkKind::Directed) {
    // Every variable owns exactly one CPT whose scope is its family; check
    // row normalization over each parent configuration.
    std::vector<bool> used(net.tables.size(), false);
    for (const auto& v : net.variables) {
      const auto parents = net.parents_of(v.name);
      bool any_unknown_parent = false;
      for (const auto& p : parents)
        if (!known(p)) any_unknown_parent = true;
      if (any_unknown_parent) continue;

      std::vector<std::size_t> matches;
      for (std::size_t i = 0; i < net.tables.size(); ++i)
        if (scope_matches_family(net.tables[i], v.name, parents)) matches.push_back(i);
      if (matches.empty()) {
        out.push_back("missing CPT for variable '" + v.name + "'");
        continue;
      }
      if (matches.size() > 1)
        out.push_back("multiple CPTs for variable '" + v.name + "'");
      for (std::size_t mi : matches) used[mi] = true;

      const FactorTable& t = net.tables[matches.front()];
      if (t.values.size() != t.state_count()) continue;
      const std::size_t k = t.scope.size();
      const std::size_t child_pos =
          static_cast<std::size_t>(std::find(t.scope.begin(), t.scope.end(), v.name) - t.scope.begin());
      const std::size_t child_bit = std::size_t{1} << (k - 1 - child_pos);
      for (std::size_t idx = 0; idx < t.values.size(); ++idx) {
        if (idx & child_bit) continue;
        const double sum = t.values[idx] + t.values[idx | child_bit];
        if (std::abs(sum - 1.0) > kRowSumTolerance) {
          out.push_back("CPT for '" + v.name + "' row sum " + format_double(sum) + " != 1");
          break;
        }
      }
    }
    for (std::size_t i = 0; i < net.tables.size(); ++i)
      if (!used[i] && !net.tables[i].scope.empty())
        out.push_back("table does not match any variable's parent set");
  } else {
    std::set<std::pair<std::string, std::string>> edge_set;
    for (const auto& e : net.edges) {
      auto key = std::minmax(e.a, e.b);
      edge_set.insert({key.first, key.second});
    }
    std::set<std::pair<std::string, std::string>> covered;
    for (const auto& t : net.tables) {
      for (std::size_t i = 0; i < t.scope.size(); ++i) {
        for (std::size_t j = i + 1; j < t.scope.size(); ++j) {
          auto key = std::minmax(t.scope[i], t.scope[j]);
          if (!edge_set.count({key.first, key.second}))
            out.push_back("potential scope pair " + key.first + " -- " + key.second +
                          " is not an edge");
          else
            covered.insert({key.first, key.second});
        }
      }
    }
    for (const auto& e : edge_set)
      if (!covered.count(e))
        out.push_back("edge " + e.first + " -- " + e.second + " not covered by any potential");
  }

  // Concept-evidence links.
  std::set<std::string> words;
  for (const auto& l : net.evidence_links) {
    if (l.word.empty()) out.push_back("evidence link with empty word");
    if (!words.insert(l.word).second)
      out.push_back("word '" + l.word + "' linked to more than one concept");
    if (!known(l.concept_name)) out.push_back("unknown variable " + l.concept_name);
    for (double p : {l.p_present, l.p_absent})
      if (!std::isfinite(p) || p <= 0.0 || p >= 1.0) {
        out.push_back("evidence link '" + l.word + "' probability outside (0, 1)");
        break;
      }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

struct Builder {
  std::vector<std::string> errors;

  void fail(const std::string& msg) { errors.push_back(msg); }

  bool expect_keys(const json& obj, const char* where,
                   const std::vector<std::string>& allowed,
                   const std::vector<std::string>& required) {
    bool ok = true;
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
        fail(std::string(where) + ": unknown key '" + it.key() + "'");
        ok = false;
      }
    }
    for (const auto& r : required) {
      if (!obj.contains(r)) {
        fail(std::string(where) + ": missing key '" + r + "'");
        ok = false;
      }
    }
    return ok;
  }

  std::optional<std::string> get_string(const json& obj, const char* where, const std::string& key) {
    if (!obj.contains(key)) return std::nullopt;
    if (!obj[key].is_string()) {
      fail(std::string(where) + ": '" + key + "' must be a string");
      return std::nullopt;
    }
    return obj[key].get<std::string>();
  }

  std::optional<double> get_number(const json& obj, const char* where, const std::string& key) {
    if (!obj.contains(key) || !obj[key].is_number()) {
      fail(std::string(where) + ": '" + key + "' must be a number");
      return std::nullopt;
    }
    return obj[key].get<double>();
  }

  // Probabilities are forced strictly inside (0, 1); exact 0 and 1 are legal
  // in the file but clamped so likelihood ratios stay finite.
  std::optional<double> link_probability(const json& obj, const char* where, const std::string& key) {
    auto v = get_number(obj, where, key);
    if (!v) return std::nullopt;
    if (*v < 0.0 || *v > 1.0) {
      fail(std::string(where) + ": '" + key + "' out of range [0, 1]");
      return std::nullopt;
    }
    return std::clamp(*v, kLinkEpsilon, 1.0 - kLinkEpsilon);
  }
};

}  // namespace

ParseResult parse_network(const std::string& text) {
  ParseResult result;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    result.errors.push_back("syntax error at byte " + std::to_string(e.byte) + ": " + e.what());
    return result;
  }

  Builder b;
  if (!doc.is_object()) {
    result.errors.push_back("top-level value must be an object");
    return result;
  }

  Network net;
  b.expect_keys(doc, "network",
                {"kind", "notes", "variables", "arcs", "edges", "tables", "evidence_links"},
                {"kind", "variables"});

  if (auto kind = b.get_string(doc, "network", "kind")) {
    if (*kind == "directed") {
      net.kind = NetworkKind::Directed;
    } else if (*kind == "undirected") {
      net.kind = NetworkKind::Undirected;
    } else {
      b.fail("network: kind must be \"directed\" or \"undirected\"");
    }
  }
  if (doc.contains("notes")) {
    if (auto notes = b.get_string(doc, "network", "notes")) net.notes = *notes;
  }
  if (net.kind == NetworkKind::Directed && doc.contains("edges"))
    b.fail("network: directed network must use \"arcs\", not \"edges\"");
  if (net.kind == NetworkKind::Undirected && doc.contains("arcs"))
    b.fail("network: undirected network must use \"edges\", not \"arcs\"");

  if (doc.contains("variables") && doc["variables"].is_array()) {
    for (const auto& jv : doc["variables"]) {
      if (!jv.is_object()) {
        b.fail("variables: entry must be an object");
        continue;
      }
      b.expect_keys(jv, "variables", {"name", "kind"}, {"name", "kind"});
      Variable v;
      if (auto name = b.get_string(jv, "variables", "name")) v.name = *name;
      if (auto kind = b.get_string(jv, "variables", "kind")) {
        if (*kind == "concept")
          v.kind = VarKind::Concept;
        else if (*kind == "feature")
          v.kind = VarKind::Feature;
        else
          b.fail("variables: kind must be \"concept\" or \"feature\"");
      }
      net.variables.push_back(std::move(v));
    }
  } else if (doc.contains("variables")) {
    b.fail("network: 'variables' must be an array");
  }

  const char* pair_key = net.kind == NetworkKind::Directed ? "arcs" : "edges";
  if (doc.contains(pair_key)) {
    if (!doc[pair_key].is_array()) {
      b.fail(std::string(pair_key) + ": must be an array");
    } else {
      for (const auto& jp : doc[pair_key]) {
        if (!jp.is_array() || jp.size() != 2 || !jp[0].is_string() || !jp[1].is_string()) {
          b.fail(std::string(pair_key) + ": entry must be a pair of variable names");
          continue;
        }
        if (net.kind == NetworkKind::Directed)
          net.arcs.push_back({jp[0].get<std::string>(), jp[1].get<std::string>()});
        else
          net.edges.push_back({jp[0].get<std::string>(), jp[1].get<std::string>()});
      }
    }
  }

  if (doc.contains("tables")) {
    if (!doc["tables"].is_array()) {
      b.fail("tables: must be an array");
    } else {
      for (const auto& jt : doc["tables"]) {
        if (!jt.is_object()) {
          b.fail("tables: entry must be an object");
          continue;
        }
        b.expect_keys(jt, "tables", {"scope", "values"}, {"scope", "values"});
        FactorTable t;
        if (jt.contains("scope") && jt["scope"].is_array()) {
          for (const auto& s : jt["scope"]) {
            if (s.is_string())
              t.scope.push_back(s.get<std::string>());
            else
              b.fail("tables: scope entries must be strings");
          }
        } else if (jt.contains("scope")) {
          b.fail("tables: 'scope' must be an array");
        }
        if (jt.contains("values") && jt["values"].is_array()) {
          for (const auto& v : jt["values"]) {
            if (v.is_number())
              t.values.push_back(v.get<double>());
            else
              b.fail("tables: values must be numbers");
          }
        } else if (jt.contains("values")) {
          b.fail("tables: 'values' must be an array");
        }
        net.tables.push_back(std::move(t));
      }
    }
  }

  if (doc.contains("evidence_links")) {
    if (!doc["evidence_links"].is_array()) {
      b.fail("evidence_links: must be an array");
    } else {
      for (const auto& jl : doc["evidence_links"]) {
        if (!jl.is_object()) {
          b.fail("evidence_links: entry must be an object");
          continue;
        }
        b.expect_keys(jl, "evidence_links", {"word", "concept", "p_present", "p_absent"},
                      {"word", "concept", "p_present", "p_absent"});
        ConceptEvidenceLink l;
        if (auto w = b.get_string(jl, "evidence_links", "word")) l.word = *w;
        if (auto c = b.get_string(jl, "evidence_links", "concept")) l.concept_name = *c;
        if (auto p = b.link_probability(jl, "evidence_links", "p_present")) l.p_present = *p;
        if (auto p = b.link_probability(jl, "evidence_links", "p_absent")) l.p_absent = *p;
        net.evidence_links.push_back(std::move(l));
      }
    }
  }

  if (!b.errors.empty()) {
    result.errors = std::move(b.errors);
    return result;
  }

  net.canonicalize();
  Violations violations = validate(net);
  if (!violations.empty()) {
    result.errors = std::move(violations);
    return result;
  }
  result.network = std::move(net);
  return result;
}

// ---------------------------------------------------------------------------
// Serialization

void append_json_string(std::string& out, const std::string& s) {
  out += '"';
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
}

std::string serialize_network(const Network& input) {
  Network net = input;
  net.canonicalize();

  std::string out;
  out += "{\n";
  out += "  \"kind\": ";
  out += net.kind == NetworkKind::Directed ? "\"directed\"" : "\"undirected\"";
  out += ",\n";
  if (!net.notes.empty()) {
    out += "  \"notes\": ";
    append_json_string(out, net.notes);
    out += ",\n";
  }

  out += "  \"variables\": [\n";
  for (std::size_t i = 0; i < net.variables.size(); ++i) {
    const auto& v = net.variables[i];
    out += "    {\"name\": ";
    append_json_string(out, v.name);
    out += ", \"kind\": ";
    out += v.kind == VarKind::Concept ? "\"concept\"" : "\"feature\"";
    out += "}";
    if (i + 1 < net.variables.size()) out += ",";
    out += "\n";
  }
  out += "  ],\n";

  const bool directed = net.kind == NetworkKind::Directed;
  out += directed ? "  \"arcs\": [\n" : "  \"edges\": [\n";
  const std::size_t pair_count = directed ? net.arcs.size() : net.edges.size();
  for (std::size_t i = 0; i < pair_count; ++i) {
    const std::string& first = directed ? net.arcs[i].parent : net.edges[i].a;
    const std::string& second = directed ? net.arcs[i].child : net.edges[i].b;
    out += "    [";
    append_json_string(out, first);
    out += ", ";
    append_json_string(out, second);
    out += "]";
    if (i + 1 < pair_count) out += ",";
    out += "\n";
  }
  out += "  ],\n";

  out += "  \"tables\": [\n";
  for (std::size_t i = 0; i < net.tables.size(); ++i) {
    const auto& t = net.tables[i];
    out += "    {\"scope\": [";
    for (std::size_t j = 0; j < t.scope.size(); ++j) {
      if (j) out += ", ";
      append_json_string(out, t.scope[j]);
    }
    out += "], \"values\": [";
    for (std::size_t j = 0; j < t.values.size(); ++j) {
      if (j) out += ", ";
      out += format_double(t.values[j]);
    }
    out += "]}";
    if (i + 1 < net.tables.size()) out += ",";
    out += "\n";
  }
  out += "  ],\n";

  out += "  \"evidence_links\": [\n";
  for (std::size_t i = 0; i < net.evidence_links.size(); ++i) {
    const auto& l = net.evidence_links[i];
    out += "    {\"word\": ";
    append_json_string(out, l.word);
    out += ", \"concept\": ";
    append_json_string(out, l.concept_name);
    out += ", \"p_present\": ";
    out += format_double(l.p_present);
    out += ", \"p_absent\": ";
    out += format_double(l.p_absent);
    out += "}";
    if (i + 1 < net.evidence_links.size()) out += ",";
    out += "\n";
  }
  out += "  ]\n";
  out += "}\n";
  return out;
}

bool network_equals(const Network& lhs, const Network& rhs, double tol) {
  Network a = lhs;
  Network b = rhs;
  a.canonicalize();
  b.canonicalize();
  if (a.kind != b.kind || a.notes != b.notes) return false;
  if (a.variables != b.variables || a.arcs != b.arcs || a.edges != b.edges) return false;
  if (a.tables.size() != b.tables.size()) return false;
  for (std::size_t i = 0; i < a.tables.size(); ++i) {
    if (a.tables[i].scope != b.tables[i].scope) return false;
    if (a.tables[i].values.size() != b.tables[i].values.size()) return false;
    for (std::size_t j = 0; j < a.tables[i].values.size(); ++j)
      if (std::abs(a.tables[i].values[j] - b.tables[i].values[j]) > tol) return false;
  }
  if (a.evidence_links.size() != b.evidence_links.size()) return false;
  for (std::size_t i = 0; i < a.evidence_links.size(); ++i) {
    const auto& x = a.evidence_links[i];
    const auto& y = b.evidence_links[i];
    if (x.word != y.word || x.concept_name != y.concept_name) return false;
    if (std::abs(x.p_present - y.p_present) > tol) return false;
    if (std::abs(x.p_absent - y.p_absent) > tol) return false;
  }
  return true;
}

}  // namespace pcir
