#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "fiveq/circuit.hpp"
#include "fiveq/rng.hpp"

namespace fiveq {

// Bloch vector of a single-qubit (possibly mixed) state.
struct BlochVector {
  double x = 0, y = 0, z = 0;

  double norm() const { return std::sqrt(x * x + y * y + z * z); }

  void check() const {
    if (x * x + y * y + z * z > 1.0 + 1e-9)
      throw std::invalid_argument("bloch vector outside unit ball");
  }
};

// Statevector simulator, capped at 12 qubits.  Used as the exactness oracle
// for the tableau simulator and as the engine for the ideal logical channel;
// the cap keeps memory trivial (the logical circuit itself needs only 5).
class DenseState {
 public:
  static constexpr size_t kMaxQubits = 12;
  using cplx = std::complex<double>;

  explicit DenseState(size_t n) : n_(n), amp_(size_t(1) << n) {
    if (n > kMaxQubits) throw std::invalid_argument("dense state too large");
    amp_[0] = 1.0;
  }

  size_t n_qubits() const { return n_; }
  const std::vector<cplx>& amplitudes() const { return amp_; }
  std::vector<cplx>& amplitudes() { return amp_; }

  double norm_sq() const {
    double s = 0;
    for (auto& a : amp_) s += std::norm(a);
    return s;
  }

  void apply_1q(const std::array<cplx, 4>& u, size_t q) {
    size_t stride = size_t(1) << q;
    for (size_t base = 0; base < amp_.size(); base += 2 * stride)
      for (size_t i = base; i < base + stride; i++) {
        cplx a0 = amp_[i], a1 = amp_[i + stride];
        amp_[i] = u[0] * a0 + u[1] * a1;
        amp_[i + stride] = u[2] * a0 + u[3] * a1;
      }
  }

  void apply_cz(size_t a, size_t b) {
    size_t ma = size_t(1) << a, mb = size_t(1) << b;
    for (size_t i = 0; i < amp_.size(); i++)
      if ((i & ma) && (i & mb)) amp_[i] = -amp_[i];
  }

  void apply_cnot(size_t c, size_t t) {
    size_t mc = size_t(1) << c, mt = size_t(1) << t;
    for (size_t i = 0; i < amp_.size(); i++)
      if ((i & mc) && !(i & mt)) std::swap(amp_[i], amp_[i | mt]);
  }

  void apply_gate(const Gate& g);

  // Probability that qubit q reads 1 in the Z basis.
  double prob_one(size_t q) const {
    size_t m = size_t(1) << q;
    double p = 0;
    for (size_t i = 0; i < amp_.size(); i++)
      if (i & m) p += std::norm(amp_[i]);
    return p;
  }

  // Projects qubit q onto outcome v and renormalizes; returns the branch
  // probability (state is left unnormalized-zero if probability is 0).
  double project(size_t q, bool v) {
    size_t m = size_t(1) << q;
    double p = 0;
    for (size_t i = 0; i < amp_.size(); i++) {
      bool bit = (i & m) != 0;
      if (bit == v) p += std::norm(amp_[i]); else amp_[i] = 0;
    }
    if (p > 0) {
      double s = 1.0 / std::sqrt(p);
      for (auto& a : amp_) a *= s;
    }
    return p;
  }

  // (<X>, <Y>, <Z>) of the reduced state of qubit q.
  BlochVector bloch(size_t q) const {
    size_t m = size_t(1) << q;
    std::complex<double> off = 0;  // <0|rho|1> accumulated over other qubits
    double z = 0;
    for (size_t i = 0; i < amp_.size(); i++) {
      if (i & m) {
        z -= std::norm(amp_[i]);
      } else {
        z += std::norm(amp_[i]);
        off += amp_[i] * std::conj(amp_[i | m]);
      }
    }
    // rho01 = off; <X> = 2 Re rho01, <Y> = -2 Im rho01 (rho01 = <0|rho|1>)
    return BlochVector{2 * off.real(), -2 * off.imag(), z};
  }

  static std::array<cplx, 4> gate_matrix(GateKind k, double angle = 0);

 private:
  size_t n_;
  std::vector<cplx> amp_;
};

inline std::array<DenseState::cplx, 4> DenseState::gate_matrix(GateKind k, double angle) {
  using namespace std::complex_literals;
  const double s = std::numbers::sqrt2 / 2.0;
  switch (k) {
    case GateKind::H: return {s, s, s, -s};
    case GateKind::S: return {1, 0, 0, 1i};
    case GateKind::SDag: return {1, 0, 0, -1i};
    case GateKind::X: return {0, 1, 1, 0};
    case GateKind::Y: return {0, -1i, 1i, 0};
    case GateKind::Z: return {1, 0, 0, -1};
    case GateKind::SqrtX: return {(1. + 1i) / 2., (1. - 1i) / 2., (1. - 1i) / 2., (1. + 1i) / 2.};
    case GateKind::SqrtXDag: return {(1. - 1i) / 2., (1. + 1i) / 2., (1. + 1i) / 2., (1. - 1i) / 2.};
    case GateKind::SqrtY: return {s, -s, s, s};
    case GateKind::SqrtYDag: return {s, s, -s, s};
    case GateKind::Rz: {
      cplx e = std::exp(-0.5i * angle), f = std::exp(0.5i * angle);
      return {e, 0, 0, f};
    }
    case GateKind::MagicPrep: {
      // rotation of angle arccos(1/sqrt3) about the (-1,1,0) axis; maps the
      // Bloch vector (0,0,1) to (1,1,1)/sqrt3
      double theta = std::acos(1.0 / std::numbers::sqrt3);
      double c = std::cos(theta / 2), sn = std::sin(theta / 2);
      double nx = -1.0 / std::numbers::sqrt2, ny = 1.0 / std::numbers::sqrt2;
      // U = c I - i sn (nx X + ny Y)
      return {c, -1i * sn * cplx(nx, -ny), -1i * sn * cplx(nx, ny), c};
    }
    default:
      throw std::invalid_argument("gate has no 1q matrix");
  }
}

inline void DenseState::apply_gate(const Gate& g) {
  switch (g.kind) {
    case GateKind::CZ: apply_cz(g.q0, g.q1); return;
    case GateKind::CNot: apply_cnot(g.q0, g.q1); return;
    case GateKind::PrepZ: {
      // project and reset; valid only on a qubit known to be unentangled,
      // used here for the initial preparation layer
      double p1 = prob_one(g.q0);
      if (p1 > 1e-12 && p1 < 1 - 1e-12)
        throw std::invalid_argument("dense PrepZ on entangled qubit");
      if (p1 > 0.5) apply_1q(gate_matrix(GateKind::X), g.q0);
      return;
    }
    case GateKind::MeasX: case GateKind::MeasY: case GateKind::MeasZ:
      throw std::invalid_argument("measurement handled by dense_run");
    default:
      apply_1q(gate_matrix(g.kind, g.angle), g.q0);
  }
}

struct DenseRunResult {
  DenseState state;
  std::vector<uint8_t> measurements;  // in circuit order
};

// Runs a circuit on an explicit input state; measurements are sampled with
// the supplied seed.  Norm is preserved to 1e-10 (checked).
inline DenseRunResult dense_run(const Circuit& c, DenseState input, uint64_t seed = 0) {
  if (c.n_qubits != input.n_qubits())
    throw std::invalid_argument("dense_run: qubit count mismatch");
  Rng rng(seed);
  DenseRunResult r{std::move(input), {}};
  for (const auto& layer : c.layers) {
    for (const auto& g : layer.gates) {
      switch (g.kind) {
        case GateKind::MeasX:
        case GateKind::MeasY: {
          // rotate into Z basis, measure, rotate back
          GateKind fwd = g.kind == GateKind::MeasX ? GateKind::H : GateKind::SqrtX;
          r.state.apply_1q(DenseState::gate_matrix(fwd), g.q0);
          double p1 = r.state.prob_one(g.q0);
          bool v = rng.next_double() < p1;
          r.state.project(g.q0, v);
          GateKind back = g.kind == GateKind::MeasX ? GateKind::H : GateKind::SqrtXDag;
          r.state.apply_1q(DenseState::gate_matrix(back), g.q0);
          r.measurements.push_back(v);
          break;
        }
        case GateKind::MeasZ: {
          double p1 = r.state.prob_one(g.q0);
          bool v = rng.next_double() < p1;
          r.state.project(g.q0, v);
          r.measurements.push_back(v);
          break;
        }
        default:
          r.state.apply_gate(g);
      }
    }
  }
  double ns = r.state.norm_sq();
  if (std::abs(ns - 1.0) > 1e-10)
    throw std::logic_error("dense_run: norm drift");
  return r;
}

// <psi|P|psi> for a Pauli P = i^phase X^x Z^z: the Z part contributes
// (-1)^(z.b) on basis state b, the X part maps b -> b^x.
inline std::complex<double> pauli_expectation(const DenseState& st, const PauliString& p) {
  if (p.n != st.n_qubits()) throw std::invalid_argument("pauli_expectation: size mismatch");
  uint64_t xm = 0, zm = 0;
  for (size_t q = 0; q < p.n; q++) {
    if (p.x.get(q)) xm |= 1ull << q;
    if (p.z.get(q)) zm |= 1ull << q;
  }
  std::complex<double> acc = 0;
  const auto& a = st.amplitudes();
  for (uint64_t b = 0; b < a.size(); b++) {
    double sgn = (std::popcount(b & zm) & 1) ? -1.0 : 1.0;
    acc += std::conj(a[b ^ xm]) * sgn * a[b];
  }
  static const std::complex<double> ph[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  return ph[p.phase & 3] * acc;
}

// F = 1/2 + (x+y+z)/(2 sqrt 3): fidelity of the mixed state v against the
// magic state pointing along (1,1,1).
inline double magic_fidelity(const BlochVector& v) {
  v.check();
  return 0.5 + (v.x + v.y + v.z) / (2.0 * std::numbers::sqrt3);
}

}  // namespace fiveq
