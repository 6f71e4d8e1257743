#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <complex>
#include <numbers>

#include "fiveq/pauli.hpp"
#include "fiveq/rng.hpp"

using namespace fiveq;
using cplx = std::complex<double>;

namespace {

// dense 2x2 oracle for single-qubit pauli algebra
using Mat2 = std::array<cplx, 4>;
const Mat2 kI{1, 0, 0, 1};
const Mat2 kX{0, 1, 1, 0};
const Mat2 kY{0, cplx(0, -1), cplx(0, 1), 0};
const Mat2 kZ{1, 0, 0, -1};

Mat2 mul(const Mat2& a, const Mat2& b) {
  return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
          a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}
Mat2 scale(cplx s, const Mat2& a) { return {s * a[0], s * a[1], s * a[2], s * a[3]}; }
bool approx(const Mat2& a, const Mat2& b) {
  for (int i = 0; i < 4; i++)
    if (std::abs(a[i] - b[i]) > 1e-12) return false;
  return true;
}

Mat2 letter_mat(char c) {
  switch (c) {
    case 'I': return kI;
    case 'X': return kX;
    case 'Y': return kY;
    case 'Z': return kZ;
  }
  throw std::logic_error("bad letter");
}

// dense matrix of a 1- or 2-qubit PauliString (qubit 0 = least significant)
std::vector<cplx> dense_of(const PauliString& p) {
  size_t dim = size_t(1) << p.n;
  std::vector<cplx> m(dim * dim, 0.0);
  static const cplx ph[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  // P|b> = i^phase (-1)^(z.b) |b^x>
  for (size_t b = 0; b < dim; b++) {
    size_t xb = 0, zb = 0;
    for (size_t q = 0; q < p.n; q++) {
      if (p.x.get(q)) xb |= size_t(1) << q;
      if (p.z.get(q)) zb |= size_t(1) << q;
    }
    double sgn = (std::popcount(b & zb) & 1) ? -1.0 : 1.0;
    m[(b ^ xb) * dim + b] += ph[p.phase & 3] * sgn;
  }
  return m;
}

PauliString from_letters(const std::string& s, int phase = 0) {
  PauliString p(s.size());
  for (size_t i = 0; i < s.size(); i++) p.set_letter(i, s[i]);
  p.phase = (uint8_t)((p.phase + phase) & 3);
  return p;
}

}  // namespace

TEST_CASE("single-qubit products match the algebra") {
  auto X = from_letters("X"), Y = from_letters("Y"), Z = from_letters("Z"), I = from_letters("I");

  // X * Z = -iY
  auto xz = pauli_mul(X, Z);
  REQUIRE(xz.letter(0) == 'Y');
  REQUIRE(xz.str() == "-iY");

  // I * P = P
  for (const auto& p : {X, Y, Z, I}) {
    REQUIRE(pauli_mul(I, p) == p);
    REQUIRE(pauli_mul(p, I) == p);
  }
}

TEST_CASE("two-qubit product (XX)*(ZZ) = -YY via dense oracle") {
  auto xx = from_letters("XX"), zz = from_letters("ZZ");
  auto prod = pauli_mul(xx, zz);
  // oracle: kron products
  auto kron = [](const Mat2& a, const Mat2& b) {
    std::vector<cplx> m(16);
    for (int i = 0; i < 2; i++)
      for (int j = 0; j < 2; j++)
        for (int k = 0; k < 2; k++)
          for (int l = 0; l < 2; l++)
            m[(i * 2 + k) * 4 + (j * 2 + l)] = a[i * 2 + j] * b[k * 2 + l];
    return m;
  };
  // qubit 0 is the least-significant factor
  auto mxx = kron(kX, kX), mzz = kron(kZ, kZ);
  std::vector<cplx> oracle(16, 0.0);
  for (int i = 0; i < 4; i++)
    for (int j = 0; j < 4; j++)
      for (int k = 0; k < 4; k++) oracle[i * 4 + j] += mxx[i * 4 + k] * mzz[k * 4 + j];
  auto got = dense_of(prod);
  for (int i = 0; i < 16; i++) REQUIRE(std::abs(got[i] - oracle[i]) < 1e-12);
  // and indeed it is -YY
  auto minus_yy = from_letters("YY", 2);
  REQUIRE(prod == minus_yy);
}

TEST_CASE("pauli_mul length mismatch throws") {
  REQUIRE_THROWS_AS(pauli_mul(from_letters("X"), from_letters("XX")), std::invalid_argument);
}

TEST_CASE("1q conjugation matches dense conjugation for every gate and letter") {
  struct G { GateKind k; Mat2 u; };
  const double s = std::numbers::sqrt2 / 2;
  std::vector<G> gates = {
      {GateKind::H, {s, s, s, -s}},
      {GateKind::S, {1, 0, 0, cplx(0, 1)}},
      {GateKind::SDag, {1, 0, 0, cplx(0, -1)}},
      {GateKind::SqrtX, {cplx(.5, .5), cplx(.5, -.5), cplx(.5, -.5), cplx(.5, .5)}},
      {GateKind::SqrtXDag, {cplx(.5, -.5), cplx(.5, .5), cplx(.5, .5), cplx(.5, -.5)}},
      {GateKind::SqrtY, {s, -s, s, s}},
      {GateKind::SqrtYDag, {s, s, -s, s}},
      {GateKind::X, kX}, {GateKind::Y, kY}, {GateKind::Z, kZ}};
  for (const auto& g : gates) {
    for (char l : {'X', 'Y', 'Z'}) {
      PauliString p = from_letters(std::string(1, l));
      conjugate_1q(p, g.k, 0);
      // oracle: U P U^dag
      Mat2 udag{std::conj(g.u[0]), std::conj(g.u[2]), std::conj(g.u[1]), std::conj(g.u[3])};
      Mat2 want = mul(mul(g.u, letter_mat(l)), udag);
      auto got = dense_of(p);
      INFO("gate " << (int)g.k << " letter " << l);
      for (int i = 0; i < 4; i++) REQUIRE(std::abs(got[i] - want[i]) < 1e-12);
    }
  }
}

TEST_CASE("CZ conjugation identities") {
  // CZ on X(x)I -> X(x)Z
  PauliString p = from_letters("XI");
  conjugate_2q(p, GateKind::CZ, 0, 1);
  REQUIRE(p == from_letters("XZ"));

  // CZ on XX -> YY
  p = from_letters("XX");
  conjugate_2q(p, GateKind::CZ, 0, 1);
  REQUIRE(p == from_letters("YY"));

  // CNOT: X on control spreads, Z on target spreads
  p = from_letters("XI");
  conjugate_2q(p, GateKind::CNot, 0, 1);
  REQUIRE(p == from_letters("XX"));
  p = from_letters("IZ");
  conjugate_2q(p, GateKind::CNot, 0, 1);
  REQUIRE(p == from_letters("ZZ"));
}

TEST_CASE("H on Z gives X") {
  PauliString p = from_letters("Z");
  conjugate_1q(p, GateKind::H, 0);
  REQUIRE(p == from_letters("X"));
}

TEST_CASE("sqrtY on Z matches dense 2x2 conjugation") {
  PauliString p = from_letters("Z");
  conjugate_1q(p, GateKind::SqrtY, 0);
  const double s = std::numbers::sqrt2 / 2;
  Mat2 u{s, -s, s, s}, udag{s, s, -s, s};
  Mat2 want = mul(mul(u, kZ), udag);
  auto got = dense_of(p);
  for (int i = 0; i < 4; i++) REQUIRE(std::abs(got[i] - want[i]) < 1e-12);
}

TEST_CASE("random products: associativity and commutation sign") {
  Rng rng(12345);
  for (int trial = 0; trial < 200; trial++) {
    size_t n = 1 + rng.next_below(5);
    auto rand_pauli = [&]() {
      PauliString p(n);
      for (size_t q = 0; q < n; q++) p.set_letter(q, "IXYZ"[rng.next_below(4)]);
      p.phase = (uint8_t)rng.next_below(4);
      return p;
    };
    auto a = rand_pauli(), b = rand_pauli(), c = rand_pauli();
    REQUIRE(pauli_mul(pauli_mul(a, b), c) == pauli_mul(a, pauli_mul(b, c)));
    // ab = +/- ba per the symplectic inner product
    auto ab = pauli_mul(a, b), ba = pauli_mul(b, a);
    bool comm = a.commutes(b);
    REQUIRE(ab.x == ba.x);
    REQUIRE(ab.z == ba.z);
    if (comm) REQUIRE(ab.phase == ba.phase);
    else REQUIRE(((ab.phase + 2) & 3) == ba.phase);
  }
}

TEST_CASE("conjugation is a group action") {
  Rng rng(777);
  std::vector<GateKind> g1q = {GateKind::H, GateKind::S, GateKind::SDag, GateKind::SqrtX,
                               GateKind::SqrtXDag, GateKind::SqrtY, GateKind::SqrtYDag,
                               GateKind::X, GateKind::Y, GateKind::Z};
  for (int trial = 0; trial < 100; trial++) {
    size_t n = 2 + rng.next_below(3);
    PauliString p(n);
    for (size_t q = 0; q < n; q++) p.set_letter(q, "IXYZ"[rng.next_below(4)]);
    // apply a random gate word two ways: sequentially, and as one pass
    std::vector<std::pair<GateKind, std::pair<size_t, size_t>>> word;
    for (int i = 0; i < 6; i++) {
      if (rng.next_bool()) {
        word.push_back({g1q[rng.next_below(g1q.size())], {rng.next_below(n), 0}});
      } else {
        size_t a = rng.next_below(n), b = rng.next_below(n);
        if (a == b) b = (b + 1) % n;
        word.push_back({rng.next_bool() ? GateKind::CZ : GateKind::CNot, {a, b}});
      }
    }
    PauliString q1 = p;
    for (auto& [k, qs] : word) {
      if (gate_is_two_qubit(k)) conjugate_2q(q1, k, qs.first, qs.second);
      else conjugate_1q(q1, k, qs.first);
    }
    // group action: conjugating twice by inverse word returns p
    auto inverse_of = [](GateKind k) {
      switch (k) {
        case GateKind::S: return GateKind::SDag;
        case GateKind::SDag: return GateKind::S;
        case GateKind::SqrtX: return GateKind::SqrtXDag;
        case GateKind::SqrtXDag: return GateKind::SqrtX;
        case GateKind::SqrtY: return GateKind::SqrtYDag;
        case GateKind::SqrtYDag: return GateKind::SqrtY;
        default: return k;
      }
    };
    PauliString q2 = q1;
    for (auto it = word.rbegin(); it != word.rend(); ++it) {
      auto [k, qs] = *it;
      if (gate_is_two_qubit(k)) conjugate_2q(q2, k, qs.first, qs.second);
      else conjugate_1q(q2, inverse_of(k), qs.first);
    }
    REQUIRE(q2 == p);
  }
}
