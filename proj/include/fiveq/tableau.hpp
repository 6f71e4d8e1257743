#pragma once

#include <optional>
#include <vector>

#include "fiveq/circuit.hpp"
#include "fiveq/pauli.hpp"
#include "fiveq/rng.hpp"

namespace fiveq {

// Stabilizer state in the destabilizer/stabilizer tableau form.  Rows are
// PauliStrings with Hermitian signs; row phases stay in {+1, -1}.
class StabilizerTableau {
 public:
  explicit StabilizerTableau(size_t n) : n_(n) {
    destab_.reserve(n);
    stab_.reserve(n);
    for (size_t q = 0; q < n; q++) {
      destab_.push_back(PauliString::single(n, q, 'X'));
      stab_.push_back(PauliString::single(n, q, 'Z'));
    }
  }

  size_t n_qubits() const { return n_; }
  const PauliString& stabilizer(size_t i) const { return stab_[i]; }
  const PauliString& destabilizer(size_t i) const { return destab_[i]; }

  void apply_1q(GateKind g, size_t q) {
    for (auto& r : destab_) conjugate_1q(r, g, q);
    for (auto& r : stab_) conjugate_1q(r, g, q);
  }

  void apply_2q(GateKind g, size_t a, size_t b) {
    for (auto& r : destab_) conjugate_2q(r, g, a, b);
    for (auto& r : stab_) conjugate_2q(r, g, a, b);
  }

  // Measures Hermitian Pauli P, collapsing the state.  Returns the outcome
  // bit (0 for +1).  Randomness from rng when the outcome is not determined.
  bool measure_pauli(const PauliString& p, Rng& rng) {
    int pivot = -1;
    for (size_t i = 0; i < n_; i++)
      if (!stab_[i].commutes(p)) { pivot = (int)i; break; }
    if (pivot >= 0) {
      bool out = rng.next_bool();
      PauliString old = stab_[pivot];
      for (size_t i = 0; i < n_; i++) {
        if ((int)i != pivot && !stab_[i].commutes(p)) stab_[i] = pauli_mul(old, stab_[i]);
        if (!destab_[i].commutes(p)) destab_[i] = pauli_mul(old, destab_[i]);
      }
      destab_[pivot] = old;
      stab_[pivot] = p;
      if (out) stab_[pivot].phase = (uint8_t)((stab_[pivot].phase + 2) & 3);
      return out;
    }
    int s = deterministic_sign(p);
    return s < 0;
  }

  // Expectation of Hermitian Pauli P without collapse: +1/-1 when the state
  // is an eigenstate, 0 when the outcome would be random.
  int expectation(const PauliString& p) const {
    for (size_t i = 0; i < n_; i++)
      if (!stab_[i].commutes(p)) return 0;
    return deterministic_sign(p);
  }

  bool measure_z(size_t q, Rng& rng) {
    return measure_pauli(PauliString::single(n_, q, 'Z'), rng);
  }

  void prep_z(size_t q, Rng& rng) {
    if (measure_z(q, rng)) apply_1q(GateKind::X, q);
  }

 private:
  // Sign of P as a product of stabilizer generators; P must commute with all.
  int deterministic_sign(const PauliString& p) const {
    PauliString acc = PauliString::identity(n_);
    for (size_t i = 0; i < n_; i++)
      if (!destab_[i].commutes(p)) acc = pauli_mul(acc, stab_[i]);
    if (!acc.same_bits(p))
      throw std::logic_error("measured operator not in stabilizer span");
    int sp = p.herm_sign(), sa = acc.herm_sign();
    return sp == sa ? +1 : -1;
  }

  size_t n_;
  std::vector<PauliString> destab_, stab_;
};

struct TableauRunResult {
  StabilizerTableau tableau;
  std::vector<uint8_t> measurements;
};

// Clifford-only circuit execution.  Non-Clifford gates throw.
inline TableauRunResult tableau_run(const Circuit& c, uint64_t seed) {
  Rng rng(seed);
  TableauRunResult r{StabilizerTableau(c.n_qubits), {}};
  for (const auto& layer : c.layers) {
    for (const auto& g : layer.gates) {
      switch (g.kind) {
        case GateKind::PrepZ: r.tableau.prep_z(g.q0, rng); break;
        case GateKind::MeasZ:
          r.measurements.push_back(r.tableau.measure_z(g.q0, rng));
          break;
        case GateKind::MeasX:
          r.measurements.push_back(
              r.tableau.measure_pauli(PauliString::single(c.n_qubits, g.q0, 'X'), rng));
          break;
        case GateKind::MeasY:
          r.measurements.push_back(
              r.tableau.measure_pauli(PauliString::single(c.n_qubits, g.q0, 'Y'), rng));
          break;
        case GateKind::CZ:
        case GateKind::CNot:
          r.tableau.apply_2q(g.kind, g.q0, g.q1);
          break;
        case GateKind::Rz:
        case GateKind::MagicPrep:
          throw std::invalid_argument("tableau_run: non-Clifford gate");
        default:
          r.tableau.apply_1q(g.kind, g.q0);
      }
    }
  }
  return r;
}

}  // namespace fiveq
