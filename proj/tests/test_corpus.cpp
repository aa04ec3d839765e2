#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "corpus.hpp"
#include "error.hpp"
#include "fsio.hpp"
#include "helpers.hpp"
#include "infer.hpp"

using namespace pcir;

namespace {

Lexicon tiny_lexicon() {
  return Lexicon::from_links({
      {"explosion", "boom", 0.4, 0.1},
      {"blast", "boom", 0.3, 0.1},
  });
}

std::filesystem::path temp_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() / ("pcir_test_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("tokenize lowercases and splits on non-alphanumerics") {
  CHECK(tokenize("Bombing, explosion!") == std::set<std::string>{"bombing", "explosion"});
  CHECK(tokenize("") == std::set<std::string>{});
  CHECK(tokenize("bomb-blast U.S.") == std::set<std::string>{"bomb", "blast", "u", "s"});
  CHECK(tokenize("a a A a") == std::set<std::string>{"a"});
  CHECK(tokenize("route66 to nowhere") == std::set<std::string>{"route66", "to", "nowhere"});
}

TEST_CASE("tokenize is idempotent on its own output") {
  const auto tokens = tokenize("Gunmen KILLED 12 hostages; blast followed.");
  std::string joined;
  for (const auto& t : tokens) {
    if (!joined.empty()) joined += ' ';
    joined += t;
  }
  CHECK(tokenize(joined) == tokens);
}

TEST_CASE("extract_features covers exactly the lexicon words") {
  const Lexicon lex = tiny_lexicon();
  const auto fv = extract_features({"d1", "an explosion occurred"}, lex);
  CHECK(fv.doc_id == "d1");
  REQUIRE(fv.bits.size() == 2);
  CHECK(fv.bits.at("explosion") == 1);
  CHECK(fv.bits.at("blast") == 0);
}

TEST_CASE("an empty document extracts all zeros") {
  const auto fv = extract_features({"d2", ""}, tiny_lexicon());
  for (const auto& [word, bit] : fv.bits) {
    CAPTURE(word);
    CHECK(bit == 0);
  }
}

TEST_CASE("repetition does not change presence bits") {
  const auto fv = extract_features(
      {"d3", "blast blast blast blast blast"}, tiny_lexicon());
  CHECK(fv.bits.at("blast") == 1);
}

TEST_CASE("the same seed reproduces the corpus bit for bit") {
  const Network net = testutil::load_fixture("analog_net.json");
  const Lexicon lex = parse_lexicon(read_file(testutil::fixture_path("analog_lexicon.json")));

  const SynthCorpus a = sample_corpus(net, lex, 200, 99, "terrorism");
  const SynthCorpus b = sample_corpus(net, lex, 200, 99, "terrorism");
  CHECK(dataset_to_csv(a.dataset) == dataset_to_csv(b.dataset));
  CHECK(labels_to_csv(a.labels) == labels_to_csv(b.labels));
  REQUIRE(a.documents.size() == b.documents.size());
  for (std::size_t i = 0; i < a.documents.size(); ++i) {
    CHECK(a.documents[i].id == b.documents[i].id);
    CHECK(a.documents[i].text == b.documents[i].text);
  }

  const SynthCorpus c = sample_corpus(net, lex, 200, 100, "terrorism");
  CHECK(dataset_to_csv(a.dataset) != dataset_to_csv(c.dataset));
}

TEST_CASE("a deterministic network yields identical samples") {
  Network net;
  net.kind = NetworkKind::Directed;
  net.variables = {{"a", VarKind::Concept}, {"b", VarKind::Concept}};
  net.arcs = {{"a", "b"}};
  net.tables = {{{"a"}, {0.0, 1.0}}, {{"a", "b"}, {1.0, 0.0, 0.0, 1.0}}};
  net.canonicalize();

  const SynthCorpus corpus = sample_corpus(net, Lexicon{}, 50, 1, "a");
  for (std::size_t r = 0; r < corpus.dataset.row_count(); ++r) {
    CHECK(corpus.dataset.at(r, 0) == 1);
    CHECK(corpus.dataset.at(r, 1) == 1);
  }
  for (const auto& [id, label] : corpus.labels) CHECK(label == 1);
}

TEST_CASE("the query concept hits its prior frequency") {
  const Network net = testutil::load_fixture("analog_net.json");
  const SynthCorpus corpus = sample_corpus(net, Lexicon{}, 10000, 4, "terrorism");
  std::size_t relevant = 0;
  for (const auto& [id, label] : corpus.labels) relevant += static_cast<std::size_t>(label);
  const double fraction = static_cast<double>(relevant) / 10000.0;
  CHECK(std::abs(fraction - 0.0685) <= 0.02);
}

TEST_CASE("sampled marginals converge to the analytic ones") {
  const Network net = testutil::load_fixture("analog_net.json");
  const std::size_t n = 10000;
  const SynthCorpus corpus = sample_corpus(net, Lexicon{}, n, 8, "terrorism");
  for (const auto& v : net.variables) {
    const double analytic = enumerate_posterior(net, {}, v.name).p_present;
    const auto col = corpus.dataset.column_index(v.name);
    REQUIRE(col.has_value());
    std::size_t ones = 0;
    for (std::size_t r = 0; r < n; ++r) {
      ones += static_cast<std::size_t>(corpus.dataset.at(r, *col));
    }
    const double sampled = static_cast<double>(ones) / static_cast<double>(n);
    const double sigma = std::sqrt(analytic * (1.0 - analytic) / static_cast<double>(n));
    CAPTURE(v.name);
    CHECK(std::abs(sampled - analytic) <= 4.0 * sigma);
  }
}

TEST_CASE("rendered text round-trips through feature extraction") {
  const Network net = testutil::load_fixture("analog_net.json");
  const Lexicon lex = parse_lexicon(read_file(testutil::fixture_path("analog_lexicon.json")));
  const SynthCorpus corpus = sample_corpus(net, lex, 200, 12, "terrorism");

  for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
    const auto fv = extract_features(corpus.documents[d], lex);
    for (const auto& [word, bit] : fv.bits) {
      const auto col = corpus.dataset.column_index(word);
      REQUIRE(col.has_value());
      CAPTURE(d);
      CAPTURE(word);
      CHECK(bit == corpus.dataset.at(d, *col));
    }
  }
}

TEST_CASE("sample_corpus rejects inconsistent inputs") {
  const Network net = testutil::load_fixture("analog_net.json");

  SUBCASE("query concept missing") {
    CHECK_THROWS_AS(sample_corpus(net, Lexicon{}, 10, 1, "ghost"), Error);
  }
  SUBCASE("lexicon concept missing") {
    const Lexicon lex = Lexicon::from_links({{"w", "ghost", 0.4, 0.1}});
    CHECK_THROWS_AS(sample_corpus(net, lex, 10, 1, "terrorism"), Error);
  }
  SUBCASE("word colliding with a variable") {
    const Lexicon lex = Lexicon::from_links({{"terrorism", "killing", 0.4, 0.1}});
    CHECK_THROWS_AS(sample_corpus(net, lex, 10, 1, "terrorism"), Error);
  }
  SUBCASE("undirected networks cannot be forward-sampled") {
    Network undirected;
    undirected.kind = NetworkKind::Undirected;
    undirected.variables = {{"a", VarKind::Concept}, {"b", VarKind::Concept}};
    undirected.edges = {{"a", "b"}};
    undirected.tables = {{{"a", "b"}, {4, 1, 1, 4}}};
    CHECK_THROWS_AS(sample_corpus(undirected, Lexicon{}, 10, 1, "a"), Error);
  }
}

TEST_CASE("lexicon files round-trip") {
  const Lexicon lex = tiny_lexicon();
  const Lexicon back = parse_lexicon(serialize_lexicon(lex));
  REQUIRE(back.size() == lex.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back.entries()[i].word == lex.entries()[i].word);
    CHECK(back.entries()[i].concept_name == lex.entries()[i].concept_name);
    CHECK(back.entries()[i].p_present == lex.entries()[i].p_present);
    CHECK(back.entries()[i].p_absent == lex.entries()[i].p_absent);
  }
}

TEST_CASE("lexicon parsing rejects bad entries") {
  CHECK_THROWS_AS(parse_lexicon("{"), Error);
  CHECK_THROWS_AS(parse_lexicon("{}"), Error);
  CHECK_THROWS_AS(parse_lexicon(R"([{"word": "w"}])"), Error);
  CHECK_THROWS_AS(
      parse_lexicon(R"([{"word": "w", "concept": "c", "p_present": 1.5, "p_absent": 0.1}])"),
      Error);
  // duplicate words collapse to one link at most
  CHECK_THROWS_AS(
      parse_lexicon(R"([{"word": "w", "concept": "c", "p_present": 0.4, "p_absent": 0.1},
                        {"word": "w", "concept": "d", "p_present": 0.3, "p_absent": 0.1}])"),
      Error);
}

TEST_CASE("boundary probabilities clamp to the open interval") {
  const Lexicon lex = parse_lexicon(
      R"([{"word": "w", "concept": "c", "p_present": 1.0, "p_absent": 0.0}])");
  REQUIRE(lex.size() == 1);
  CHECK(lex.entries()[0].p_present == 1.0 - kLinkEpsilon);
  CHECK(lex.entries()[0].p_absent == kLinkEpsilon);
}

TEST_CASE("a corpus directory loads sorted by id") {
  const auto dir = temp_dir("corpus_dir");
  std::ofstream(dir / "b.txt") << "second document";
  std::ofstream(dir / "a.txt") << "first document";
  std::ofstream(dir / "c.txt") << "third document";

  const auto docs = load_corpus(dir.string());
  REQUIRE(docs.size() == 3);
  CHECK(docs[0].id == "a");
  CHECK(docs[0].text == "first document");
  CHECK(docs[2].id == "c");
  std::filesystem::remove_all(dir);
}

TEST_CASE("a JSON-lines corpus loads and rejects duplicates") {
  const auto dir = temp_dir("corpus_jsonl");
  const auto path = dir / "docs.jsonl";
  {
    std::ofstream out(path);
    out << R"({"id": "z9", "text": "last"})" << '\n';
    out << R"({"id": "a1", "text": "first"})" << '\n';
  }
  const auto docs = load_corpus(path.string());
  REQUIRE(docs.size() == 2);
  CHECK(docs[0].id == "a1");
  CHECK(docs[1].text == "last");

  {
    std::ofstream out(path);
    out << R"({"id": "a1", "text": "x"})" << '\n';
    out << R"({"id": "a1", "text": "y"})" << '\n';
  }
  CHECK_THROWS_AS(load_corpus(path.string()), Error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("labels round-trip through CSV") {
  const std::vector<std::pair<std::string, int>> labels = {
      {"doc000000", 0}, {"doc000001", 1}, {"doc000002", 1}};
  const auto back = labels_from_csv(labels_to_csv(labels));
  CHECK(back == labels);
  CHECK(relevant_ids(labels) == std::set<std::string>{"doc000001", "doc000002"});
  CHECK_THROWS_AS(labels_from_csv("id,relevant\nd1,2\n"), Error);
  CHECK_THROWS_AS(labels_from_csv("wrong,header\nd1,1\n"), Error);
}

TEST_CASE("the synth bundle is a loadable pipeline input") {
  const Network net = testutil::load_fixture("analog_net.json");
  const Lexicon lex = parse_lexicon(read_file(testutil::fixture_path("analog_lexicon.json")));
  const SynthCorpus corpus = sample_corpus(net, lex, 50, 3, "terrorism");

  const auto dir = temp_dir("bundle");
  write_synth_bundle(corpus, dir.string());

  const Dataset data =
      load_dataset((dir / "dataset.csv").string(), (dir / "manifest.json").string());
  CHECK(data.row_count() == 50);
  CHECK(data.roles.at("terrorism") == VarKind::Concept);
  CHECK(data.roles.at("bomb") == VarKind::Feature);

  const auto docs = load_corpus((dir / "corpus.jsonl").string());
  CHECK(docs.size() == 50);
  const auto labels = labels_from_csv(read_file((dir / "labels.csv").string()));
  CHECK(labels.size() == 50);
  std::filesystem::remove_all(dir);
}
