#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "fiveq/dense.hpp"

using namespace fiveq;

TEST_CASE("magic preparation points along (1,1,1)/sqrt3") {
  DenseState st(1);
  st.apply_1q(DenseState::gate_matrix(GateKind::MagicPrep), 0);
  auto v = st.bloch(0);
  const double r = 1.0 / std::numbers::sqrt3;
  REQUIRE(std::abs(v.x - r) < 1e-9);
  REQUIRE(std::abs(v.y - r) < 1e-9);
  REQUIRE(std::abs(v.z - r) < 1e-9);
  REQUIRE(std::abs(magic_fidelity(v) - 1.0) < 1e-9);
}

TEST_CASE("identity circuit leaves the input unchanged") {
  Circuit c;
  c.n_qubits = 2;
  c.append_layer();
  DenseState in(2);
  in.apply_1q(DenseState::gate_matrix(GateKind::MagicPrep), 0);
  in.apply_1q(DenseState::gate_matrix(GateKind::H), 1);
  auto before = in.amplitudes();
  auto out = dense_run(c, std::move(in), 0);
  for (size_t i = 0; i < before.size(); i++)
    REQUIRE(std::abs(before[i] - out.state.amplitudes()[i]) < 1e-12);
}

TEST_CASE("Rz after magic prep rotates the Bloch vector analytically") {
  const double theta = 0.32 * std::numbers::pi;
  DenseState st(1);
  st.apply_1q(DenseState::gate_matrix(GateKind::MagicPrep), 0);
  st.apply_1q(DenseState::gate_matrix(GateKind::Rz, theta), 0);
  auto v = st.bloch(0);
  const double r = 1.0 / std::numbers::sqrt3;
  double xw = (std::cos(theta) - std::sin(theta)) * r;
  double yw = (std::cos(theta) + std::sin(theta)) * r;
  REQUIRE(std::abs(v.x - xw) < 1e-9);
  REQUIRE(std::abs(v.y - yw) < 1e-9);
  REQUIRE(std::abs(v.z - r) < 1e-9);
  // input fidelity formula F_in = 1/2 + (2cos(theta)+1)/6
  double fin = 0.5 + (2 * std::cos(theta) + 1) / 6.0;
  REQUIRE(std::abs(magic_fidelity(v) - fin) < 1e-9);
}

TEST_CASE("bloch of |0>, Bell-pair marginal, norm preservation") {
  DenseState st(1);
  auto v = st.bloch(0);
  REQUIRE(std::abs(v.z - 1.0) < 1e-12);
  REQUIRE(std::abs(v.x) < 1e-12);
  REQUIRE(std::abs(v.y) < 1e-12);

  DenseState bell(2);
  bell.apply_1q(DenseState::gate_matrix(GateKind::H), 0);
  bell.apply_cnot(0, 1);
  auto m = bell.bloch(0);
  REQUIRE(std::abs(m.x) < 1e-12);
  REQUIRE(std::abs(m.y) < 1e-12);
  REQUIRE(std::abs(m.z) < 1e-12);
  REQUIRE(std::abs(bell.norm_sq() - 1.0) < 1e-12);
}

TEST_CASE("dense size cap") {
  REQUIRE_THROWS_AS(DenseState(13), std::invalid_argument);
}

TEST_CASE("pauli_expectation agrees with bloch components") {
  DenseState st(2);
  st.apply_1q(DenseState::gate_matrix(GateKind::MagicPrep), 1);
  auto v = st.bloch(1);
  for (auto [letter, want] : {std::pair<char, double>{'X', v.x}, {'Y', v.y}, {'Z', v.z}}) {
    auto e = pauli_expectation(st, PauliString::single(2, 1, letter));
    REQUIRE(std::abs(e.real() - want) < 1e-12);
    REQUIRE(std::abs(e.imag()) < 1e-12);
  }
}
