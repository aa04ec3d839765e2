#pragma once

#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "error.hpp"
#include "fsio.hpp"
#include "infer.hpp"
#include "model.hpp"

namespace testutil {

inline std::string fixture_path(const std::string& name) {
  return std::string(PCIR_FIXTURE_DIR) + "/" + name;
}

inline pcir::Network load_fixture(const std::string& name) {
  auto result = pcir::parse_network(pcir::read_file(fixture_path(name)));
  if (!result.ok())
    throw pcir::Error(pcir::ErrorCode::Parse,
                      "fixture '" + name + "': " + result.errors.front());
  return *result.network;
}

// Random valid directed network: node i may take parents among nodes < i,
// CPT rows have p(present) uniform in [0.05, 0.95].
inline pcir::Network random_directed_net(std::mt19937_64& rng, std::size_t n,
                                         std::size_t max_parents) {
  pcir::Network net;
  net.kind = pcir::NetworkKind::Directed;
  std::uniform_real_distribution<double> unit(0.05, 0.95);

  for (std::size_t i = 0; i < n; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "v%02zu", i);
    net.variables.push_back({buf, pcir::VarKind::Concept});
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::string> parents;
    if (i > 0) {
      std::size_t want = std::uniform_int_distribution<std::size_t>(
          0, std::min(max_parents, i))(rng);
      std::vector<std::size_t> pool(i);
      for (std::size_t j = 0; j < i; ++j) pool[j] = j;
      for (std::size_t k = 0; k < want; ++k) {
        std::size_t pick = std::uniform_int_distribution<std::size_t>(k, i - 1)(rng);
        std::swap(pool[k], pool[pick]);
        parents.push_back(net.variables[pool[k]].name);
        net.arcs.push_back({parents.back(), net.variables[i].name});
      }
    }
    pcir::FactorTable cpt;
    cpt.scope = parents;
    cpt.scope.push_back(net.variables[i].name);
    const std::size_t rows = std::size_t{1} << parents.size();
    cpt.values.resize(rows * 2);
    for (std::size_t r = 0; r < rows; ++r) {
      const double p = unit(rng);
      cpt.values[r * 2] = 1.0 - p;
      cpt.values[r * 2 + 1] = p;
    }
    net.tables.push_back(std::move(cpt));
  }
  net.canonicalize();
  return net;
}

// Random evidence over a subset of non-query variables, mixing hard states
// and virtual likelihood pairs.
inline pcir::EvidenceSet random_evidence(std::mt19937_64& rng, const pcir::Network& net,
                                         const std::string& query) {
  pcir::EvidenceSet ev;
  std::uniform_real_distribution<double> lambda(0.1, 5.0);
  for (const auto& v : net.variables) {
    if (v.name == query) continue;
    switch (std::uniform_int_distribution<int>(0, 3)(rng)) {
      case 0:
        ev.hard[v.name] = std::uniform_int_distribution<int>(0, 1)(rng);
        break;
      case 1:
        ev.virt[v.name] = {lambda(rng), lambda(rng)};
        break;
      default:
        break;  // leave unobserved
    }
  }
  return ev;
}

}  // namespace testutil
