#pragma once

#include <cassert>
#include <stdexcept>
#include <string>

#include "fiveq/bits.hpp"

namespace fiveq {

// n-qubit Pauli operator, stored as P = i^phase * prod_q X^x_q Z^z_q.
// The phase exponent is tracked mod 4.  In this representation Y = i*X*Z,
// so the letter string "Y" corresponds to (x=1, z=1, phase=1).
struct PauliString {
  size_t n = 0;
  BitVec x, z;
  uint8_t phase = 0;  // exponent of i, mod 4

  PauliString() = default;
  explicit PauliString(size_t n_) : n(n_), x(n_), z(n_) {}

  static PauliString identity(size_t n) { return PauliString(n); }

  // Single-qubit letter constructors.
  static PauliString single(size_t n, size_t q, char letter) {
    PauliString p(n);
    p.set_letter(q, letter);
    return p;
  }

  // letter in {'I','X','Y','Z'}; Y sets both bits and bumps the phase so the
  // operator equals the Hermitian Pauli Y on that qubit.
  void set_letter(size_t q, char letter) {
    bool hx = x.get(q), hz = z.get(q);
    if (hx && hz) phase = (phase + 3) & 3;  // remove old Y's i
    switch (letter) {
      case 'I': x.set(q, false); z.set(q, false); break;
      case 'X': x.set(q, true);  z.set(q, false); break;
      case 'Z': x.set(q, false); z.set(q, true);  break;
      case 'Y': x.set(q, true);  z.set(q, true);  phase = (phase + 1) & 3; break;
      default: throw std::invalid_argument("bad pauli letter");
    }
  }

  char letter(size_t q) const {
    bool hx = x.get(q), hz = z.get(q);
    if (hx && hz) return 'Y';
    if (hx) return 'X';
    if (hz) return 'Z';
    return 'I';
  }

  size_t weight() const {
    size_t c = 0;
    for (size_t i = 0; i < x.words(); i++)
      c += std::popcount(x.word(i) | z.word(i));
    return c;
  }

  bool is_identity_support() const { return !x.any() && !z.any(); }

  // i^k with k = phase - (#Y sites); Hermitian Paulis have k in {0,2}.
  int herm_sign() const {
    unsigned y = (unsigned)BitVec::and_popcount(x, z);
    unsigned k = (phase + 4u * y - y) & 3;  // (phase - y) mod 4
    if (k == 0) return +1;
    if (k == 2) return -1;
    throw std::logic_error("pauli is not Hermitian");
  }

  bool commutes(const PauliString& o) const {
    assert(n == o.n);
    return ((BitVec::and_popcount(x, o.z) + BitVec::and_popcount(z, o.x)) & 1) == 0;
  }

  bool same_bits(const PauliString& o) const { return x == o.x && z == o.z; }

  bool operator==(const PauliString& o) const {
    return n == o.n && x == o.x && z == o.z && phase == o.phase;
  }

  std::string str() const {
    static const char* pre[4] = {"+", "+i", "-", "-i"};
    unsigned y = (unsigned)BitVec::and_popcount(x, z);
    unsigned k = (phase + 4u * y - y) & 3;
    std::string s = pre[k];
    for (size_t q = 0; q < n; q++) s += letter(q);
    return s;
  }
};

// Group product a*b with exact phase tracking.
inline PauliString pauli_mul(const PauliString& a, const PauliString& b) {
  if (a.n != b.n) throw std::invalid_argument("pauli_mul: length mismatch");
  PauliString r(a.n);
  r.x = a.x ^ b.x;
  r.z = a.z ^ b.z;
  // reordering Z^az past X^bx contributes (-1)^{az.bx}
  unsigned swaps = (unsigned)BitVec::and_popcount(a.z, b.x);
  r.phase = (uint8_t)((a.phase + b.phase + 2 * swaps) & 3);
  return r;
}

enum class GateKind : uint8_t {
  PrepZ,
  H, S, SDag, SqrtX, SqrtXDag, SqrtY, SqrtYDag,
  X, Y, Z,
  CZ, CNot,
  Rz,         // arbitrary-angle Z rotation; inputs only, non-Clifford
  MagicPrep,  // rotation arccos(1/sqrt 3) about (-1,1,0); inputs only
  MeasX, MeasY, MeasZ,
};

inline bool gate_is_clifford_unitary(GateKind k) {
  switch (k) {
    case GateKind::H: case GateKind::S: case GateKind::SDag:
    case GateKind::SqrtX: case GateKind::SqrtXDag:
    case GateKind::SqrtY: case GateKind::SqrtYDag:
    case GateKind::X: case GateKind::Y: case GateKind::Z:
    case GateKind::CZ: case GateKind::CNot:
      return true;
    default:
      return false;
  }
}

inline bool gate_is_two_qubit(GateKind k) {
  return k == GateKind::CZ || k == GateKind::CNot;
}

// In-place conjugation P -> U P U^dag for single-qubit Clifford U on qubit q.
inline void conjugate_1q(PauliString& p, GateKind g, size_t q) {
  bool hx = p.x.get(q), hz = p.z.get(q);
  auto bump = [&](unsigned d) { p.phase = (uint8_t)((p.phase + d) & 3); };
  switch (g) {
    case GateKind::X: if (hz) bump(2); break;
    case GateKind::Y: if (hx ^ hz) bump(2); break;
    case GateKind::Z: if (hx) bump(2); break;
    case GateKind::H:
      if (hx && hz) bump(2);
      p.x.set(q, hz); p.z.set(q, hx);
      break;
    case GateKind::S:
      if (hx) { bump(1); p.z.flip(q); }
      break;
    case GateKind::SDag:
      if (hx) { bump(3); p.z.flip(q); }
      break;
    case GateKind::SqrtX:
      if (hz) { bump(3); p.x.flip(q); }
      break;
    case GateKind::SqrtXDag:
      if (hz) { bump(1); p.x.flip(q); }
      break;
    case GateKind::SqrtY:
      if (hx && !hz) bump(2);
      p.x.set(q, hz); p.z.set(q, hx);
      break;
    case GateKind::SqrtYDag:
      if (hz && !hx) bump(2);
      p.x.set(q, hz); p.z.set(q, hx);
      break;
    default:
      throw std::invalid_argument("conjugate_1q: not a 1q Clifford gate");
  }
}

// In-place conjugation for CZ / CNOT on (a, b); for CNOT a is the control.
inline void conjugate_2q(PauliString& p, GateKind g, size_t a, size_t b) {
  bool xa = p.x.get(a), za = p.z.get(a);
  bool xb = p.x.get(b), zb = p.z.get(b);
  if (g == GateKind::CZ) {
    if (xa && xb) p.phase = (uint8_t)((p.phase + 2) & 3);
    p.z.set(a, za ^ xb);
    p.z.set(b, zb ^ xa);
  } else if (g == GateKind::CNot) {
    p.x.set(b, xb ^ xa);
    p.z.set(a, za ^ zb);
  } else {
    throw std::invalid_argument("conjugate_2q: bad gate");
  }
}

}  // namespace fiveq
