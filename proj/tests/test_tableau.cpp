#include <catch2/catch_amalgamated.hpp>

#include <map>

#include "fiveq/dense.hpp"
#include "fiveq/tableau.hpp"

using namespace fiveq;

TEST_CASE("prep |0>, sqrtY, measure X is deterministic +1") {
  Circuit c;
  c.n_qubits = 1;
  auto& l0 = c.append_layer();
  l0.gates.push_back({GateKind::PrepZ, 0});
  auto& l1 = c.append_layer();
  l1.gates.push_back({GateKind::SqrtY, 0});
  auto& l2 = c.append_layer();
  l2.gates.push_back({GateKind::MeasX, 0});
  for (uint64_t seed = 0; seed < 8; seed++) {
    auto r = tableau_run(c, seed);
    REQUIRE(r.measurements.size() == 1);
    REQUIRE(r.measurements[0] == 0);  // +1 outcome
  }
}

TEST_CASE("same seed gives identical measurement record") {
  Circuit c;
  c.n_qubits = 3;
  auto& l0 = c.append_layer();
  for (uint32_t q = 0; q < 3; q++) l0.gates.push_back({GateKind::PrepZ, q});
  auto& l1 = c.append_layer();
  l1.gates.push_back({GateKind::H, 0});
  l1.gates.push_back({GateKind::SqrtX, 1});
  auto& l2 = c.append_layer();
  l2.gates.push_back({GateKind::CNot, 0, 1});
  auto& l3 = c.append_layer();
  for (uint32_t q = 0; q < 3; q++) l3.gates.push_back({GateKind::MeasZ, q});
  auto a = tableau_run(c, 42), b = tableau_run(c, 42);
  REQUIRE(a.measurements == b.measurements);
}

TEST_CASE("non-Clifford gate rejected") {
  Circuit c;
  c.n_qubits = 1;
  auto& l = c.append_layer();
  l.gates.push_back({Gate{GateKind::Rz, 0, kNoQubit, 0.3}});
  REQUIRE_THROWS_AS(tableau_run(c, 0), std::invalid_argument);
}

namespace {

Circuit random_clifford_circuit(Rng& rng, uint32_t n, int depth, bool with_measure) {
  Circuit c;
  c.n_qubits = n;
  auto& prep = c.append_layer();
  for (uint32_t q = 0; q < n; q++) prep.gates.push_back({GateKind::PrepZ, q});
  std::vector<GateKind> g1 = {GateKind::H, GateKind::S, GateKind::SDag, GateKind::SqrtX,
                              GateKind::SqrtY, GateKind::X, GateKind::Z};
  for (int d = 0; d < depth; d++) {
    auto& l = c.append_layer();
    if (rng.next_bool() && n >= 2) {
      uint32_t a = (uint32_t)rng.next_below(n), b = (uint32_t)rng.next_below(n);
      if (a == b) b = (b + 1) % n;
      l.gates.push_back({rng.next_bool() ? GateKind::CZ : GateKind::CNot, a, b});
    } else {
      l.gates.push_back({g1[rng.next_below(g1.size())], (uint32_t)rng.next_below(n)});
    }
  }
  if (with_measure) {
    auto& m = c.append_layer();
    for (uint32_t q = 0; q < n; q++) m.gates.push_back({GateKind::MeasZ, q});
  }
  return c;
}

}  // namespace

TEST_CASE("tableau vs dense: deterministic outcomes agree, random agree within 3 sigma") {
  Rng meta(2024);
  for (int trial = 0; trial < 25; trial++) {
    uint32_t n = 2 + (uint32_t)meta.next_below(5);  // up to 6 qubits
    Circuit c = random_clifford_circuit(meta, n, 12, true);

    // dense branch probabilities for each qubit, measured in circuit order,
    // via repeated sampling of the dense simulator
    std::map<std::vector<uint8_t>, int> dense_counts, tab_counts;
    const int shots = 1200;
    for (int s = 0; s < shots; s++) {
      auto dr = dense_run(c, DenseState(n), 1000 + s);
      dense_counts[dr.measurements]++;
      auto tr = tableau_run(c, 5000 + s);
      tab_counts[tr.measurements]++;
    }
    // compare per-outcome frequencies within 3 sigma binomial
    std::map<std::vector<uint8_t>, std::pair<int, int>> joint;
    for (auto& [k, v] : dense_counts) joint[k].first = v;
    for (auto& [k, v] : tab_counts) joint[k].second = v;
    for (auto& [k, v] : joint) {
      double p1 = v.first / (double)shots, p2 = v.second / (double)shots;
      double p = (v.first + v.second) / (2.0 * shots);
      double sigma = std::sqrt(std::max(p * (1 - p) * 2.0 / shots, 1e-9));
      INFO("trial " << trial << " outcome freq " << p1 << " vs " << p2);
      REQUIRE(std::abs(p1 - p2) <= 4.5 * sigma + 1e-9);  // family-wise over ~125 comparisons
    }
  }
}

TEST_CASE("expectation reads stabilizers without collapse") {
  // Bell pair: XX and ZZ are +1, XI is random
  Circuit c;
  c.n_qubits = 2;
  auto& l0 = c.append_layer();
  l0.gates.push_back({GateKind::PrepZ, 0});
  l0.gates.push_back({GateKind::PrepZ, 1});
  auto& l1 = c.append_layer();
  l1.gates.push_back({GateKind::H, 0});
  auto& l2 = c.append_layer();
  l2.gates.push_back({GateKind::CNot, 0, 1});
  auto r = tableau_run(c, 0);
  auto mk = [&](const char* s) {
    PauliString p(2);
    p.set_letter(0, s[0]);
    p.set_letter(1, s[1]);
    return p;
  };
  REQUIRE(r.tableau.expectation(mk("XX")) == +1);
  REQUIRE(r.tableau.expectation(mk("ZZ")) == +1);
  REQUIRE(r.tableau.expectation(mk("YY")) == -1);
  REQUIRE(r.tableau.expectation(mk("XI")) == 0);
}
