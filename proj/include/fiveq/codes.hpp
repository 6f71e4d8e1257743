#pragma once

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "fiveq/bits.hpp"
#include "fiveq/pauli.hpp"

namespace fiveq {

// CSS code given by check matrices (rows = checks) plus logical operators.
// The color codes used here are self-dual: X and Z checks share supports.
struct CssCode {
  uint32_t n = 0, k = 0, d = 0;
  std::vector<BitVec> x_checks, z_checks;
  std::vector<BitVec> logical_x, logical_z;
  std::string label;

  bool self_dual() const {
    if (x_checks.size() != z_checks.size()) return false;
    for (size_t i = 0; i < x_checks.size(); i++)
      if (!(x_checks[i] == z_checks[i])) return false;
    for (size_t i = 0; i < logical_x.size(); i++)
      if (!(logical_x[i] == logical_z[i])) return false;
    return true;
  }
};

namespace detail {
inline BitVec support(uint32_t n, std::initializer_list<uint32_t> qs) {
  BitVec v(n);
  for (auto q : qs) v.set(q, true);
  return v;
}
}  // namespace detail

// Trivial [[1,1,1]] "code": a bare physical qubit.  Used for the d=1
// (unencoded) pipeline variants.
inline CssCode trivial_code() {
  CssCode c;
  c.n = 1; c.k = 1; c.d = 1;
  c.logical_x = {detail::support(1, {0})};
  c.logical_z = {detail::support(1, {0})};
  c.label = "[[1,1,1]] bare qubit";
  return c;
}

// 2D color codes.  d=3 is the [[7,1,3]] code with the standard plaquette
// assignment; d=5 is the [[17,1,5]] code with qubit indexing chosen so that
// the published 24-op row-reduction sequence is a valid reduction (the
// synthesizer golden tests pin this down).
inline CssCode color_code(uint32_t distance) {
  using detail::support;
  CssCode c;
  if (distance == 3) {
    c.n = 7; c.k = 1; c.d = 3;
    std::vector<BitVec> s = {
        support(7, {0, 1, 2, 3}),
        support(7, {1, 2, 4, 5}),
        support(7, {2, 3, 4, 6}),
    };
    c.x_checks = s;
    c.z_checks = s;
    c.logical_x = {support(7, {0, 1, 5})};
    c.logical_z = {support(7, {0, 1, 5})};
    c.label = "[[7,1,3]] color code";
  } else if (distance == 5) {
    c.n = 17; c.k = 1; c.d = 5;
    std::vector<BitVec> s = {
        support(17, {0, 1, 2, 3}),
        support(17, {0, 2, 4, 5}),
        support(17, {2, 3, 5, 6, 8, 10, 11, 13}),
        support(17, {4, 5, 6, 7}),
        support(17, {6, 7, 8, 9}),
        support(17, {10, 11, 12, 14}),
        support(17, {11, 13, 14, 16}),
        support(17, {12, 14, 15, 16}),
    };
    c.x_checks = s;
    c.z_checks = s;
    c.logical_x = {support(17, {6, 7, 10, 11, 13})};
    c.logical_z = {support(17, {6, 7, 10, 11, 13})};
    c.label = "[[17,1,5]] color code";
  } else {
    throw std::invalid_argument("color_code: unsupported distance");
  }
  return c;
}

// The [[5,1,3]] perfect code, as a plain stabilizer descriptor.  Used for
// reference-state preparation and property checks only.
struct StabilizerCode {
  uint32_t n = 5;
  std::vector<PauliString> generators;
  PauliString logical_x, logical_z;
};

inline StabilizerCode perfect_code_513() {
  StabilizerCode c;
  auto mk = [&](const char* s) {
    PauliString p(5);
    for (size_t q = 0; q < 5; q++) p.set_letter(q, s[q]);
    return p;
  };
  c.generators = {mk("XZZXI"), mk("IXZZX"), mk("XIXZZ"), mk("ZXIXZ")};
  c.logical_x = mk("XXXXX");
  c.logical_z = mk("ZZZZZ");
  return c;
}

struct CodeReport {
  bool valid = true;
  std::string first_violation;
  uint32_t measured_distance = 0;

  void fail(const std::string& what) {
    if (valid) { valid = false; first_violation = what; }
  }
};

namespace detail {

// Minimum weight of a Z-type logical: v with even overlap against every
// X check and outside the Z-check row span.  Exhaustive over weights < limit.
inline uint32_t css_distance_z(const CssCode& c, uint32_t limit) {
  std::vector<uint32_t> idx(c.n);
  for (uint32_t w = 1; w <= limit; w++) {
    std::vector<uint32_t> comb(w);
    for (uint32_t i = 0; i < w; i++) comb[i] = i;
    while (true) {
      BitVec v(c.n);
      for (auto q : comb) v.set(q, true);
      bool commutes = true;
      for (const auto& xc : c.x_checks)
        if (BitVec::and_popcount(v, xc) & 1) { commutes = false; break; }
      if (commutes && !gf2_in_span(c.z_checks, v)) return w;
      // next combination
      int i = (int)w - 1;
      while (i >= 0 && comb[i] == c.n - w + i) i--;
      if (i < 0) break;
      comb[i]++;
      for (uint32_t j = i + 1; j < w; j++) comb[j] = comb[j - 1] + 1;
    }
  }
  return limit + 1;
}

}  // namespace detail

// Asserts the CssCode invariants; for d <= 5 verifies the distance by brute
// force enumeration.
inline CodeReport validate_code(const CssCode& c) {
  CodeReport r;
  for (size_t i = 0; i < c.x_checks.size() && r.valid; i++)
    for (size_t j = 0; j < c.z_checks.size() && r.valid; j++)
      if (BitVec::and_popcount(c.x_checks[i], c.z_checks[j]) & 1)
        r.fail("CSS commutation violated: X check " + std::to_string(i) +
               " vs Z check " + std::to_string(j));
  if (r.valid) {
    size_t rx = gf2_rank(c.x_checks), rz = gf2_rank(c.z_checks);
    if (c.n - rx - rz != c.k) r.fail("rank condition: k != n - rank_x - rank_z");
  }
  for (size_t l = 0; l < c.logical_x.size() && r.valid; l++) {
    if (!(BitVec::and_popcount(c.logical_x[l], c.logical_z[l]) & 1))
      r.fail("logical X/Z pair " + std::to_string(l) + " commutes");
    for (const auto& zc : c.z_checks)
      if (BitVec::and_popcount(c.logical_x[l], zc) & 1)
        r.fail("logical X anticommutes with a Z check");
    for (const auto& xc : c.x_checks)
      if (BitVec::and_popcount(c.logical_z[l], xc) & 1)
        r.fail("logical Z anticommutes with an X check");
  }
  if (r.valid && c.d > 1 && c.d <= 5) {
    uint32_t dz = detail::css_distance_z(c, c.d);
    uint32_t dx = dz;
    if (!c.self_dual()) {
      CssCode t = c;
      std::swap(t.x_checks, t.z_checks);
      std::swap(t.logical_x, t.logical_z);
      dx = detail::css_distance_z(t, c.d);
    }
    r.measured_distance = std::min(dx, dz);
    if (r.measured_distance != c.d)
      r.fail("distance mismatch: measured " + std::to_string(r.measured_distance));
  }
  return r;
}

// Transversal readout plan for one basis.  Detectors and the logical outcome
// are parities of per-qubit measurement bits over the listed supports.  For
// the Y basis on self-dual codes the detectors are the paired X*Z check
// products; logical_op carries the exact phase for verification.
struct MeasurementSpec {
  char basis = 'Z';
  std::vector<BitVec> detector_supports;
  BitVec logical_support;
  PauliString logical_op;
};

inline MeasurementSpec measurement_spec(const CssCode& c, char basis, uint32_t logical = 0) {
  MeasurementSpec m;
  m.basis = basis;
  auto op_from = [&](const BitVec& sup, char letter) {
    PauliString p(c.n);
    for (auto q : sup.ones()) p.set_letter(q, letter);
    return p;
  };
  switch (basis) {
    case 'Z':
      m.detector_supports = c.z_checks;
      m.logical_support = c.logical_z[logical];
      m.logical_op = op_from(c.logical_z[logical], 'Z');
      break;
    case 'X':
      m.detector_supports = c.x_checks;
      m.logical_support = c.logical_x[logical];
      m.logical_op = op_from(c.logical_x[logical], 'X');
      break;
    case 'Y': {
      if (!c.self_dual())
        throw std::invalid_argument("Y-basis spec requires a self-dual code");
      m.detector_supports = c.z_checks;  // same supports; read as Y parities
      // logical Y = i * X_L * Z_L (same support on self-dual codes)
      m.logical_support = c.logical_z[logical];
      PauliString ly = pauli_mul(op_from(c.logical_x[logical], 'X'),
                                 op_from(c.logical_z[logical], 'Z'));
      ly.phase = (uint8_t)((ly.phase + 1) & 3);
      m.logical_op = ly;
      break;
    }
    default:
      throw std::invalid_argument("measurement_spec: bad basis");
  }
  return m;
}

// --- text check-matrix format: one check per line, qubit indices listed ---

inline void write_code(std::ostream& os, const CssCode& c) {
  os << "# " << c.label << "\n";
  os << "n " << c.n << " k " << c.k << " d " << c.d << "\n";
  auto dump = [&](const char* tag, const std::vector<BitVec>& rows) {
    for (const auto& row : rows) {
      os << tag;
      for (auto q : row.ones()) os << " " << q;
      os << "\n";
    }
  };
  dump("X", c.x_checks);
  dump("Z", c.z_checks);
  dump("LX", c.logical_x);
  dump("LZ", c.logical_z);
}

inline CssCode read_code(std::istream& is) {
  CssCode c;
  std::string line;
  while (std::getline(is, line)) {
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag) || tag == "#") continue;
    if (tag == "n") {
      std::string kw;
      ss >> c.n >> kw >> c.k >> kw >> c.d;
      continue;
    }
    BitVec v(c.n);
    uint32_t q;
    while (ss >> q) v.set(q, true);
    if (tag == "X") c.x_checks.push_back(v);
    else if (tag == "Z") c.z_checks.push_back(v);
    else if (tag == "LX") c.logical_x.push_back(v);
    else if (tag == "LZ") c.logical_z.push_back(v);
    else throw std::invalid_argument("code parse: bad tag " + tag);
  }
  return c;
}

}  // namespace fiveq
