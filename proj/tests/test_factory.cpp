#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "fiveq/distill.hpp"
#include "fiveq/tableau.hpp"

using namespace fiveq;

TEST_CASE("injection blocks: qubit counts and CZ layer structure") {
  for (auto [d, n, layers] : {std::tuple<uint32_t, uint32_t, size_t>{3, 7, 3}, {5, 17, 5}}) {
    CssCode code = color_code(d);
    Circuit c = build_injection_block(code, {InputSpec::Kind::Magic, 0.0, '0'});
    REQUIRE(c.n_qubits == n);
    REQUIRE(c.entangling_layer_count() == layers);
    REQUIRE(c.injected_qubits.size() == 1);
  }
}

TEST_CASE("magic injection block carries the extra Rz layer") {
  CssCode code = color_code(3);
  Circuit base = build_injection_block(code, {InputSpec::Kind::Magic, 0.0, '0'});
  Circuit rot = build_injection_block(code, {InputSpec::Kind::Magic, 0.32 * 3.14159, '0'});
  REQUIRE(base.layers.size() == rot.layers.size());
  REQUIRE(rot.gate_count(GateKind::Rz) == 1);
  REQUIRE(rot.gate_count(GateKind::MagicPrep) == 1);
}

TEST_CASE("factory totals: 35 qubits at d=3, 85 at d=5") {
  std::array<double, 5> zero{};
  Circuit c3 = build_factory_circuit(color_code(3), zero, 'Z');
  REQUIRE(c3.n_qubits == 35);
  Circuit c5 = build_factory_circuit(color_code(5), zero, 'Z');
  REQUIRE(c5.n_qubits == 85);
}

TEST_CASE("distillation segment has exactly 3 transversal entangling layers") {
  std::array<double, 5> zero{};
  for (uint32_t d : {3u, 5u}) {
    CssCode code = color_code(d);
    Circuit c = build_factory_circuit(code, zero, 'Z');
    size_t cross_block_layers = 0;
    for (const auto& layer : c.layers) {
      bool cross = false;
      for (const auto& g : layer.gates)
        if (g.two_qubit() && c.block_of[g.q0] != c.block_of[g.q1]) cross = true;
      cross_block_layers += cross;
    }
    REQUIRE(cross_block_layers == 3);
  }
}

TEST_CASE("reference factory circuit is Clifford and deterministic") {
  for (char basis : {'X', 'Y', 'Z'}) {
    CssCode code = color_code(3);
    Circuit c = build_reference_factory_circuit(code, basis);
    ReadoutPlan plan = factory_readout_plan(code, basis);
    // individual physical outcomes are random; every detector and logical
    // parity must be deterministic
    auto pa = detail::logical_bits_of_run(c, plan, 2);
    auto pb = detail::logical_bits_of_run(c, plan, 999);
    REQUIRE(pa == pb);
    // all logical parities read 0 after self-calibration
    auto off = reference_offsets(code, basis);
    for (int i = 0; i < 5; i++) REQUIRE(off[i] == 0);
  }
}

TEST_CASE("reference fragment is entirely Clifford") {
  Circuit c = build_reference_factory_circuit(color_code(3), 'Z');
  for (const auto& layer : c.layers)
    for (const auto& g : layer.gates) {
      bool ok = gate_is_clifford_unitary(g.kind) || g.kind == GateKind::PrepZ ||
                g.kind == GateKind::MeasZ || g.kind == GateKind::MeasX ||
                g.kind == GateKind::MeasY;
      REQUIRE(ok);
    }
}

TEST_CASE("d=1 factory wires five bare qubits through the distillation circuit") {
  CssCode code = trivial_code();
  std::array<double, 5> zero{};
  Circuit c = build_factory_circuit(code, zero, 'Z');
  REQUIRE(c.n_qubits == 5);
  ReadoutPlan plan = factory_readout_plan(code, 'Z');
  REQUIRE(plan.detector_supports.empty());
  REQUIRE(plan.logical_supports.size() == 5);
  auto off = reference_offsets(code, 'Z');
  for (int i = 0; i < 5; i++) REQUIRE(off[i] == 0);
}

TEST_CASE("circuit interchange format round-trips the factory circuit") {
  Circuit c = build_reference_factory_circuit(color_code(3), 'Y');
  std::string text = circuit_to_string(c);
  std::istringstream is(text);
  Circuit back = read_circuit(is);
  REQUIRE(circuit_to_string(back) == text);
  REQUIRE(back.n_qubits == c.n_qubits);
  REQUIRE(back.layers.size() == c.layers.size());
}
