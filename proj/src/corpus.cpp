#include "corpus.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <random>
#include <set>
#include <sstream>

#include "error.hpp"
#include "fsio.hpp"

namespace pcir {

// ---------------------------------------------------------------------------
// Tokenizing and features

std::set<std::string> tokenize(std::string_view text) {
  std::set<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      tokens.insert(current);
      current.clear();
    }
  };
  for (unsigned char c : text) {
    if (c < 0x80 && std::isalnum(c))
      current.push_back(static_cast<char>(std::tolower(c)));
    else
      flush();
  }
  flush();
  return tokens;
}

FeatureVector extract_features(const Document& doc, const Lexicon& lexicon) {
  const std::set<std::string> tokens = tokenize(doc.text);
  FeatureVector fv;
  fv.doc_id = doc.id;
  for (const auto& entry : lexicon.entries())
    fv.bits[entry.word] = tokens.count(entry.word) ? 1 : 0;
  return fv;
}

// ---------------------------------------------------------------------------
// Lexicon

Lexicon Lexicon::from_links(std::vector<ConceptEvidenceLink> links) {
  std::sort(links.begin(), links.end(),
            [](const ConceptEvidenceLink& a, const ConceptEvidenceLink& b) {
              return a.word < b.word;
            });
  for (std::size_t i = 0; i < links.size(); ++i) {
    const auto& l = links[i];
    if (l.word.empty()) throw Error(ErrorCode::Argument, "lexicon word must be nonempty");
    if (l.concept_name.empty()) throw Error(ErrorCode::Argument, "lexicon concept must be nonempty");
    if (i > 0 && links[i - 1].word == l.word)
      throw Error(ErrorCode::Argument, "duplicate lexicon word '" + l.word + "'");
    for (double v : {l.p_present, l.p_absent})
      if (!(v > 0.0) || !(v < 1.0))
        throw Error(ErrorCode::Argument,
                    "lexicon probabilities for '" + l.word + "' must lie strictly in (0,1)");
  }
  Lexicon lex;
  lex.entries_ = std::move(links);
  return lex;
}

const ConceptEvidenceLink* Lexicon::find(const std::string& word) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), word,
                             [](const ConceptEvidenceLink& l, const std::string& w) {
                               return l.word < w;
                             });
  if (it == entries_.end() || it->word != word) return nullptr;
  return &*it;
}

Lexicon parse_lexicon(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::Parse, std::string("lexicon: ") + e.what());
  }
  if (!doc.is_array()) throw Error(ErrorCode::Parse, "lexicon must be a JSON array");
  std::vector<ConceptEvidenceLink> links;
  links.reserve(doc.size());
  for (const auto& item : doc) {
    if (!item.is_object())
      throw Error(ErrorCode::Parse, "lexicon entries must be objects");
    for (const auto& [key, value] : item.items()) {
      (void)value;
      if (key != "word" && key != "concept" && key != "p_present" && key != "p_absent")
        throw Error(ErrorCode::Parse, "lexicon entry has unknown key '" + key + "'");
    }
    ConceptEvidenceLink link;
    if (!item.contains("word") || !item["word"].is_string())
      throw Error(ErrorCode::Parse, "lexicon entry needs a string \"word\"");
    if (!item.contains("concept") || !item["concept"].is_string())
      throw Error(ErrorCode::Parse, "lexicon entry needs a string \"concept\"");
    link.word = item["word"].get<std::string>();
    link.concept_name = item["concept"].get<std::string>();
    for (const char* key : {"p_present", "p_absent"}) {
      if (!item.contains(key) || !item[key].is_number())
        throw Error(ErrorCode::Parse,
                    "lexicon entry for '" + link.word + "' needs numeric \"" + key + "\"");
      const double v = item[key].get<double>();
      if (!(v >= 0.0 && v <= 1.0))
        throw Error(ErrorCode::Parse, "lexicon probability for '" + link.word +
                                          "' must lie in [0,1]");
    }
    link.p_present = std::clamp(item["p_present"].get<double>(), kLinkEpsilon, 1.0 - kLinkEpsilon);
    link.p_absent = std::clamp(item["p_absent"].get<double>(), kLinkEpsilon, 1.0 - kLinkEpsilon);
    links.push_back(std::move(link));
  }
  try {
    return Lexicon::from_links(std::move(links));
  } catch (const Error& e) {
    throw Error(ErrorCode::Parse, e.what());
  }
}

std::string serialize_lexicon(const Lexicon& lexicon) {
  std::string out = "[";
  bool first = true;
  for (const auto& l : lexicon.entries()) {
    out += first ? "\n" : ",\n";
    first = false;
    out += "  {\"word\": ";
    append_json_string(out, l.word);
    out += ", \"concept\": ";
    append_json_string(out, l.concept_name);
    out += ", \"p_present\": ";
    out += format_double(l.p_present);
    out += ", \"p_absent\": ";
    out += format_double(l.p_absent);
    out += "}";
  }
  out += first ? "]\n" : "\n]\n";
  return out;
}

Lexicon load_lexicon(const std::string& path) { return parse_lexicon(read_file(path)); }

void save_lexicon(const Lexicon& lexicon, const std::string& path) {
  write_file(path, serialize_lexicon(lexicon));
}

// ---------------------------------------------------------------------------
// Forward sampling

namespace {

double next_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<std::string> topological_order(const Network& net) {
  std::map<std::string, std::size_t> indegree;
  std::map<std::string, std::vector<std::string>> out;
  for (const auto& v : net.variables) indegree[v.name] = 0;
  for (const auto& arc : net.arcs) {
    ++indegree[arc.child];
    out[arc.parent].push_back(arc.child);
  }
  std::set<std::string> ready;
  for (const auto& [name, deg] : indegree)
    if (deg == 0) ready.insert(name);
  std::vector<std::string> order;
  order.reserve(net.variables.size());
  while (!ready.empty()) {
    const std::string name = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(name);
    for (const auto& child : out[name])
      if (--indegree[child] == 0) ready.insert(child);
  }
  if (order.size() != net.variables.size())
    throw Error(ErrorCode::Argument, "cycle in arc graph");
  return order;
}

}  // namespace

SynthCorpus sample_corpus(const Network& input, const Lexicon& lexicon, std::size_t n,
                          std::uint64_t seed, const std::string& query_concept) {
  if (input.kind != NetworkKind::Directed)
    throw Error(ErrorCode::Argument, "sampling requires a directed network");
  {
    const Violations v = validate(input);
    if (!v.empty()) throw Error(ErrorCode::Argument, "invalid network: " + v.front());
  }
  Network net = input;
  net.canonicalize();

  std::set<std::string> var_names;
  for (const auto& v : net.variables) var_names.insert(v.name);
  if (!var_names.count(query_concept))
    throw Error(ErrorCode::Argument, "query concept '" + query_concept + "' not in network");
  for (const auto& entry : lexicon.entries()) {
    if (!var_names.count(entry.concept_name))
      throw Error(ErrorCode::Argument,
                  "lexicon concept '" + entry.concept_name + "' not in network");
    if (var_names.count(entry.word))
      throw Error(ErrorCode::Argument,
                  "lexicon word '" + entry.word + "' collides with a variable name");
  }

  const std::vector<std::string> order = topological_order(net);
  struct VarPlan {
    std::string name;
    const FactorTable* cpt;
    std::vector<std::size_t> parent_slots;  // indices into `order` states
  };
  std::map<std::string, std::size_t> slot;
  for (std::size_t i = 0; i < order.size(); ++i) slot[order[i]] = i;
  std::vector<VarPlan> plan;
  plan.reserve(order.size());
  for (const auto& name : order) {
    VarPlan p;
    p.name = name;
    p.cpt = net.cpt_of(name);
    if (!p.cpt) throw Error(ErrorCode::Argument, "no CPT for variable '" + name + "'");
    for (std::size_t i = 0; i + 1 < p.cpt->scope.size(); ++i)
      p.parent_slots.push_back(slot.at(p.cpt->scope[i]));
    plan.push_back(std::move(p));
  }

  std::vector<std::string> columns;
  for (const auto& v : net.variables) columns.push_back(v.name);
  std::vector<std::string> word_cols;
  for (const auto& entry : lexicon.entries()) word_cols.push_back(entry.word);
  columns.insert(columns.end(), word_cols.begin(), word_cols.end());

  SynthCorpus out;
  out.dataset = Dataset(columns);
  for (const auto& v : net.variables) out.dataset.roles[v.name] = v.kind;
  for (const auto& w : word_cols) out.dataset.roles[w] = VarKind::Feature;

  std::map<std::string, std::size_t> column_slot;
  for (std::size_t i = 0; i < columns.size(); ++i) column_slot[columns[i]] = i;
  const std::size_t query_slot = slot.at(query_concept);

  std::mt19937_64 rng(seed);
  std::vector<int> states(order.size());
  std::vector<int> row(columns.size());
  char id_buf[32];
  for (std::size_t d = 0; d < n; ++d) {
    for (std::size_t i = 0; i < plan.size(); ++i) {
      const VarPlan& p = plan[i];
      std::size_t idx = 0;
      for (std::size_t ps : p.parent_slots) idx = idx * 2 + static_cast<std::size_t>(states[ps]);
      const double p_present = p.cpt->values[idx * 2 + 1];
      states[i] = next_uniform(rng) < p_present ? 1 : 0;
    }
    std::string text;
    for (const auto& entry : lexicon.entries()) {
      const int concept_state = states[slot.at(entry.concept_name)];
      const double p = concept_state ? entry.p_present : entry.p_absent;
      const int bit = next_uniform(rng) < p ? 1 : 0;
      row[column_slot.at(entry.word)] = bit;
      if (bit) {
        if (!text.empty()) text += ' ';
        text += entry.word;
      }
    }
    for (std::size_t i = 0; i < order.size(); ++i) row[column_slot.at(order[i])] = states[i];
    out.dataset.append_row(row);

    std::snprintf(id_buf, sizeof(id_buf), "doc%06zu", d);
    out.documents.push_back(Document{id_buf, std::move(text)});
    out.labels.emplace_back(id_buf, states[query_slot]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Corpus and label files

std::vector<Document> load_corpus(const std::string& path) {
  namespace fs = std::filesystem;
  std::vector<Document> docs;
  std::error_code ec;
  if (fs::is_directory(path, ec)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path))
      if (entry.is_regular_file()) files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& file : files)
      docs.push_back(Document{file.stem().string(), read_file(file.string())});
  } else if (fs::is_regular_file(path, ec)) {
    std::istringstream in(read_file(path));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      nlohmann::json obj;
      try {
        obj = nlohmann::json::parse(line);
      } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::Parse,
                    "corpus line " + std::to_string(line_no) + ": " + e.what());
      }
      if (!obj.is_object() || !obj.contains("id") || !obj["id"].is_string() ||
          !obj.contains("text") || !obj["text"].is_string())
        throw Error(ErrorCode::Parse, "corpus line " + std::to_string(line_no) +
                                          " must be {\"id\": string, \"text\": string}");
      docs.push_back(Document{obj["id"].get<std::string>(), obj["text"].get<std::string>()});
    }
  } else {
    throw Error(ErrorCode::Io, "corpus path '" + path + "' is neither file nor directory");
  }
  std::sort(docs.begin(), docs.end(),
            [](const Document& a, const Document& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < docs.size(); ++i)
    if (docs[i - 1].id == docs[i].id)
      throw Error(ErrorCode::Parse, "duplicate document id '" + docs[i].id + "'");
  return docs;
}

std::vector<std::pair<std::string, int>> labels_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::pair<std::string, int>> labels;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != "id,relevant")
        throw Error(ErrorCode::Parse, "labels CSV must start with header id,relevant");
      continue;
    }
    const auto comma = line.rfind(',');
    if (comma == std::string::npos)
      throw Error(ErrorCode::Parse, "labels CSV line " + std::to_string(line_no) +
                                        " is missing a comma");
    const std::string id = line.substr(0, comma);
    const std::string flag = line.substr(comma + 1);
    if (id.empty() || (flag != "0" && flag != "1"))
      throw Error(ErrorCode::Parse,
                  "labels CSV line " + std::to_string(line_no) + " must be id,0|1");
    labels.emplace_back(id, flag == "1" ? 1 : 0);
  }
  if (line_no == 0) throw Error(ErrorCode::Parse, "labels CSV is empty");
  std::sort(labels.begin(), labels.end());
  for (std::size_t i = 1; i < labels.size(); ++i)
    if (labels[i - 1].first == labels[i].first)
      throw Error(ErrorCode::Parse, "duplicate label id '" + labels[i].first + "'");
  return labels;
}

std::string labels_to_csv(const std::vector<std::pair<std::string, int>>& labels) {
  std::string out = "id,relevant\n";
  for (const auto& [id, flag] : labels) {
    out += id;
    out += flag ? ",1\n" : ",0\n";
  }
  return out;
}

std::set<std::string> relevant_ids(const std::vector<std::pair<std::string, int>>& labels) {
  std::set<std::string> ids;
  for (const auto& [id, flag] : labels)
    if (flag) ids.insert(id);
  return ids;
}

void write_synth_bundle(const SynthCorpus& corpus, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create directory '" + out_dir + "'");
  const fs::path dir(out_dir);
  write_file((dir / "dataset.csv").string(), dataset_to_csv(corpus.dataset));
  write_file((dir / "manifest.json").string(), manifest_to_json(corpus.dataset));
  write_file((dir / "labels.csv").string(), labels_to_csv(corpus.labels));
  std::string jsonl;
  for (const auto& doc : corpus.documents) {
    jsonl += "{\"id\": ";
    append_json_string(jsonl, doc.id);
    jsonl += ", \"text\": ";
    append_json_string(jsonl, doc.text);
    jsonl += "}\n";
  }
  write_file((dir / "corpus.jsonl").string(), jsonl);
}

}  // namespace pcir
