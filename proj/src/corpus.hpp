#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "learn.hpp"
#include "model.hpp"

namespace pcir {

struct Document {
  std::string id;
  std::string text;
};

// Word -> concept evidence table. Entries are kept sorted by word and words
// are unique.
class Lexicon {
 public:
  Lexicon() = default;
  static Lexicon from_links(std::vector<ConceptEvidenceLink> links);

  const std::vector<ConceptEvidenceLink>& entries() const { return entries_; }
  const ConceptEvidenceLink* find(const std::string& word) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<ConceptEvidenceLink> entries_;
};

// Binary presence bits for exactly the lexicon words.
struct FeatureVector {
  std::string doc_id;
  std::map<std::string, int> bits;
};

// ASCII alphanumeric runs, lowercased; everything else separates. Set
// semantics: repeats collapse.
std::set<std::string> tokenize(std::string_view text);

FeatureVector extract_features(const Document& doc, const Lexicon& lexicon);

struct SynthCorpus {
  Dataset dataset;                                  // concept + word columns
  std::vector<std::pair<std::string, int>> labels;  // (doc id, query concept state)
  std::vector<Document> documents;
};

// Forward-samples n documents from a directed network plus a lexicon. Draw
// order is fixed (topological concepts, then words sorted by name) so a seed
// pins the corpus bit for bit. Document text is the present words joined by
// single spaces. Lexicon words must not collide with variable names.
SynthCorpus sample_corpus(const Network& net, const Lexicon& lexicon, std::size_t n,
                          std::uint64_t seed, const std::string& query_concept);

// --- file formats ---

// Lexicon file: JSON array of {word, concept, p_present, p_absent}.
Lexicon parse_lexicon(const std::string& text);
std::string serialize_lexicon(const Lexicon& lexicon);
Lexicon load_lexicon(const std::string& path);
void save_lexicon(const Lexicon& lexicon, const std::string& path);

// A corpus path is either a directory of plain-text files (document id =
// filename without extension) or a JSON-lines file of {id, text} objects.
// Documents come back sorted by id; duplicate ids are an error.
std::vector<Document> load_corpus(const std::string& path);

// Labels CSV: header id,relevant then 0/1 labels.
std::vector<std::pair<std::string, int>> labels_from_csv(const std::string& text);
std::string labels_to_csv(const std::vector<std::pair<std::string, int>>& labels);
std::set<std::string> relevant_ids(const std::vector<std::pair<std::string, int>>& labels);

// Writes dataset.csv, manifest.json, labels.csv and corpus.jsonl.
void write_synth_bundle(const SynthCorpus& corpus, const std::string& out_dir);

}  // namespace pcir
