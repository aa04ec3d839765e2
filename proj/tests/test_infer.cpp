#include "doctest.h"

#include <cmath>
#include <random>

#include "error.hpp"
#include "helpers.hpp"
#include "infer.hpp"
#include "model.hpp"

using namespace pcir;

namespace {

Network kill_shoot_net() {
  Network net;
  net.kind = NetworkKind::Directed;
  net.variables = {{"kill", VarKind::Concept}, {"shoot", VarKind::Concept}};
  net.arcs = {{"kill", "shoot"}};
  net.tables = {
      {{"kill"}, {0.5, 0.5}},
      {{"kill", "shoot"}, {0.9, 0.1, 0.1, 0.9}},
  };
  net.canonicalize();
  return net;
}

FeatureVector features_of(std::initializer_list<std::pair<std::string, int>> bits) {
  FeatureVector fv;
  fv.doc_id = "doc";
  for (const auto& [w, b] : bits) fv.bits[w] = b;
  return fv;
}

}  // namespace

TEST_CASE("attach_evidence passes a single present word's pair through") {
  std::vector<ConceptEvidenceLink> links = {{"explosion", "explosion_c", 0.4, 0.1}};
  auto attached = attach_evidence(features_of({{"explosion", 1}}), links);
  REQUIRE(attached.evidence.virt.count("explosion_c") == 1);
  auto [lp, la] = attached.evidence.virt.at("explosion_c");
  CHECK(lp == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(la == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(attached.unknown_words == 0);
}

TEST_CASE("a ratio-1 pair leaves the posterior at the prior") {
  std::vector<ConceptEvidenceLink> links = {{"w", "c", 0.2, 0.2}};
  auto attached = attach_evidence(features_of({{"w", 1}}), links);
  auto [lp, la] = attached.evidence.virt.at("c");
  CHECK(lp == la);

  Network net;
  net.variables = {{"c", VarKind::Concept}};
  net.tables = {{{"c"}, {0.7, 0.3}}};
  auto post = posterior(net, attached.evidence, "c");
  CHECK(post.p_present == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("two present words on one concept multiply componentwise") {
  std::vector<ConceptEvidenceLink> links = {
      {"a", "c", 0.4, 0.1},
      {"b", "c", 0.3, 0.1},
  };
  auto attached = attach_evidence(features_of({{"a", 1}, {"b", 1}}), links);
  auto [lp, la] = attached.evidence.virt.at("c");
  CHECK(lp == doctest::Approx(0.12).epsilon(1e-15));
  CHECK(la == doctest::Approx(0.01).epsilon(1e-15));
}

TEST_CASE("an absent word contributes the complement pair") {
  std::vector<ConceptEvidenceLink> links = {{"w", "c", 0.4, 0.1}};
  auto attached = attach_evidence(features_of({{"w", 0}}), links);
  auto [lp, la] = attached.evidence.virt.at("c");
  CHECK(lp == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(la == doctest::Approx(0.9).epsilon(1e-15));
}

TEST_CASE("words missing from the link table are counted, not fatal") {
  std::vector<ConceptEvidenceLink> links = {{"known", "c", 0.4, 0.1}};
  auto attached = attach_evidence(features_of({{"known", 1}, {"stray", 1}}), links);
  CHECK(attached.unknown_words == 1);
  CHECK(attached.evidence.virt.size() == 1);
}

TEST_CASE("observing shoot raises kill to 0.9") {
  const Network net = kill_shoot_net();
  EvidenceSet ev;
  ev.hard["shoot"] = 1;
  auto post = posterior(net, ev, "kill");
  CHECK(std::abs(post.p_present - 0.9) <= 1e-12);
  CHECK(std::abs(post.p_present + post.p_absent - 1.0) <= 1e-12);

  auto oracle = enumerate_posterior(net, ev, "kill");
  CHECK(std::abs(post.p_present - oracle.p_present) <= 1e-12);
}

TEST_CASE("the four-parent family reproduces its conditional row") {
  const Network net = testutil::load_fixture("terrorism_parents.json");
  EvidenceSet ev;
  ev.hard["bombing"] = 1;
  ev.hard["kidnap"] = 1;
  ev.hard["killing"] = 0;
  ev.hard["terrorist"] = 0;
  auto post = posterior(net, ev, "terrorism");
  CHECK(std::abs(post.p_present - 0.98) <= 1e-12);

  ev.hard["kidnap"] = 0;
  post = posterior(net, ev, "terrorism");
  CHECK(std::abs(post.p_present - 0.32) <= 1e-12);
}

TEST_CASE("no evidence returns the prior marginal") {
  Network net;
  net.variables = {{"terrorism", VarKind::Concept}};
  net.tables = {{{"terrorism"}, {0.9315, 0.0685}}};
  auto post = posterior(net, {}, "terrorism");
  CHECK(post.p_present == doctest::Approx(0.0685).epsilon(1e-12));
  CHECK(post.p_absent == doctest::Approx(0.9315).epsilon(1e-12));
}

TEST_CASE("enumerate_posterior handles the trivial cases") {
  Network net;
  net.variables = {{"a", VarKind::Concept}, {"b", VarKind::Concept}};
  net.tables = {{{"a"}, {0.7, 0.3}}, {{"b"}, {0.4, 0.6}}};

  auto post = enumerate_posterior(net, {}, "a");
  CHECK(post.p_present == doctest::Approx(0.3).epsilon(1e-12));

  // evidence on an independent node changes nothing
  EvidenceSet ev;
  ev.hard["b"] = 1;
  post = enumerate_posterior(net, ev, "a");
  CHECK(post.p_present == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("variable elimination matches enumeration on random networks") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const Network net = testutil::random_directed_net(rng, 2 + trial % 11, 3);
    const std::string query =
        net.variables[trial % net.variables.size()].name;
    const EvidenceSet ev = testutil::random_evidence(rng, net, query);
    CAPTURE(trial);
    auto fast = posterior(net, ev, query);
    auto slow = enumerate_posterior(net, ev, query);
    CHECK(std::abs(fast.p_present - slow.p_present) <= 1e-9);
    CHECK(std::abs(fast.p_present + fast.p_absent - 1.0) <= 1e-12);
  }
}

TEST_CASE("scaling a virtual pair never moves a posterior") {
  std::mt19937_64 rng(5);
  const Network net = testutil::random_directed_net(rng, 8, 3);
  EvidenceSet base = testutil::random_evidence(rng, net, "v00");
  base.virt["v03"] = {0.4, 0.1};

  const auto reference = posterior(net, base, "v00");
  for (double k : {1e-3, 10.0, 1e6}) {
    EvidenceSet scaled = base;
    for (auto& [name, pair] : scaled.virt) {
      pair.first *= k;
      pair.second *= k;
    }
    auto post = posterior(net, scaled, "v00");
    CHECK(std::abs(post.p_present - reference.p_present) <= 1e-12);
  }
}

TEST_CASE("hard evidence is the limit of a lopsided virtual pair") {
  const Network net = kill_shoot_net();
  EvidenceSet hard;
  hard.hard["shoot"] = 1;
  EvidenceSet virt;
  virt.virt["shoot"] = {1.0, 1e-9};
  auto a = posterior(net, hard, "kill");
  auto b = posterior(net, virt, "kill");
  CHECK(std::abs(a.p_present - b.p_present) <= 1e-6);
}

TEST_CASE("supporting evidence on the child never lowers the parent") {
  const Network net = kill_shoot_net();
  const double prior = posterior(net, {}, "kill").p_present;

  EvidenceSet one;
  one.virt["shoot"] = {0.4, 0.1};
  const double with_one = posterior(net, one, "kill").p_present;
  CHECK(with_one >= prior - 1e-15);

  EvidenceSet two = one;
  two.virt["shoot"] = {0.4 * 0.3, 0.1 * 0.1};
  CHECK(posterior(net, two, "kill").p_present >= with_one - 1e-15);
}

TEST_CASE("an observed middle node separates the chain") {
  // terrorism -> kill -> shoot; with kill observed, terrorism-side evidence
  // is irrelevant to shoot
  Network net;
  net.kind = NetworkKind::Directed;
  net.variables = {{"kill", VarKind::Concept},
                   {"shoot", VarKind::Concept},
                   {"terrorism", VarKind::Concept}};
  net.arcs = {{"terrorism", "kill"}, {"kill", "shoot"}};
  net.tables = {
      {{"terrorism"}, {0.9315, 0.0685}},
      {{"terrorism", "kill"}, {0.95, 0.05, 0.3, 0.7}},
      {{"kill", "shoot"}, {0.9, 0.1, 0.1, 0.9}},
  };
  net.canonicalize();
  REQUIRE(validate(net).empty());

  EvidenceSet kill_only;
  kill_only.hard["kill"] = 1;
  const double separated = posterior(net, kill_only, "shoot").p_present;

  EvidenceSet with_terrorism = kill_only;
  with_terrorism.hard["terrorism"] = 1;
  CHECK(std::abs(posterior(net, with_terrorism, "shoot").p_present - separated) <= 1e-12);

  with_terrorism.hard["terrorism"] = 0;
  CHECK(std::abs(posterior(net, with_terrorism, "shoot").p_present - separated) <= 1e-12);

  // sanity: without the separator observed, terrorism evidence does move shoot
  EvidenceSet unseparated;
  unseparated.hard["terrorism"] = 1;
  CHECK(std::abs(posterior(net, unseparated, "shoot").p_present -
                 posterior(net, {}, "shoot").p_present) > 1e-3);
}

TEST_CASE("impossible evidence raises a domain error") {
  Network net;
  net.variables = {{"a", VarKind::Concept}};
  net.tables = {{{"a"}, {1.0, 0.0}}};
  EvidenceSet ev;
  ev.hard["a"] = 1;
  try {
    posterior(net, ev, "a");
    FAIL("expected a zero-probability evidence error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Domain);
    CHECK(std::string(e.what()).find("zero-probability evidence") != std::string::npos);
  }
}

TEST_CASE("argument errors are distinguished from domain errors") {
  const Network net = kill_shoot_net();
  EvidenceSet ev;

  SUBCASE("unknown query") {
    CHECK_THROWS_AS(posterior(net, ev, "ghost"), Error);
  }
  SUBCASE("unknown evidence variable") {
    ev.hard["ghost"] = 1;
    CHECK_THROWS_AS(posterior(net, ev, "kill"), Error);
  }
  SUBCASE("hard and virtual on the same variable") {
    ev.hard["shoot"] = 1;
    ev.virt["shoot"] = {0.4, 0.1};
    CHECK_THROWS_AS(posterior(net, ev, "kill"), Error);
  }
  SUBCASE("nonpositive virtual component") {
    ev.virt["shoot"] = {0.0, 0.1};
    CHECK_THROWS_AS(posterior(net, ev, "kill"), Error);
  }
  SUBCASE("hard state outside {0,1}") {
    ev.hard["shoot"] = 2;
    CHECK_THROWS_AS(posterior(net, ev, "kill"), Error);
  }
}

TEST_CASE("undirected potentials drive the same elimination path") {
  Network net;
  net.kind = NetworkKind::Undirected;
  net.variables = {{"a", VarKind::Concept}, {"b", VarKind::Concept}};
  net.edges = {{"a", "b"}};
  net.tables = {{{"a", "b"}, {4, 1, 1, 4}}};
  REQUIRE(validate(net).empty());

  CHECK(posterior(net, {}, "a").p_present == doctest::Approx(0.5).epsilon(1e-12));

  EvidenceSet ev;
  ev.virt["b"] = {2.0, 1.0};
  auto post = posterior(net, ev, "a");
  // joint weights: a0: 4*1 + 1*2 = 6, a1: 1*1 + 4*2 = 9
  CHECK(post.p_present == doctest::Approx(0.6).epsilon(1e-12));
  auto oracle = enumerate_posterior(net, ev, "a");
  CHECK(std::abs(post.p_present - oracle.p_present) <= 1e-12);
}

TEST_CASE("undirected chains match enumeration") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> weight(0.1, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Network net;
    net.kind = NetworkKind::Undirected;
    const std::size_t n = 3 + trial % 5;
    for (std::size_t i = 0; i < n; ++i) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "u%zu", i);
      net.variables.push_back({buf, VarKind::Concept});
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
      net.edges.push_back({net.variables[i].name, net.variables[i + 1].name});
      net.tables.push_back({{net.variables[i].name, net.variables[i + 1].name},
                            {weight(rng), weight(rng), weight(rng), weight(rng)}});
    }
    net.canonicalize();
    REQUIRE(validate(net).empty());

    const std::string query = net.variables[trial % n].name;
    const EvidenceSet ev = testutil::random_evidence(rng, net, query);
    auto fast = posterior(net, ev, query);
    auto slow = enumerate_posterior(net, ev, query);
    CHECK(std::abs(fast.p_present - slow.p_present) <= 1e-9);
  }
}

TEST_CASE("enumeration refuses oversized networks") {
  std::mt19937_64 rng(1);
  const Network net = testutil::random_directed_net(rng, 21, 2);
  CHECK_THROWS_AS(enumerate_posterior(net, {}, "v00"), Error);
}
