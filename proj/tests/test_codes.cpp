#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "fiveq/codes.hpp"

using namespace fiveq;

TEST_CASE("d=3 color code matches the standard check assignment") {
  CssCode c = color_code(3);
  REQUIRE(c.n == 7);
  REQUIRE(c.k == 1);
  REQUIRE(c.d == 3);
  // S0 = Z0Z1Z2Z3, S1 = Z1Z2Z4Z5, S2 = Z2Z3Z4Z6, L_Z0 = Z0Z1Z5
  REQUIRE(c.z_checks[0].ones() == std::vector<uint32_t>{0, 1, 2, 3});
  REQUIRE(c.z_checks[1].ones() == std::vector<uint32_t>{1, 2, 4, 5});
  REQUIRE(c.z_checks[2].ones() == std::vector<uint32_t>{2, 3, 4, 6});
  REQUIRE(c.logical_z[0].ones() == std::vector<uint32_t>{0, 1, 5});
  REQUIRE(c.self_dual());

  auto rep = validate_code(c);
  INFO(rep.first_violation);
  REQUIRE(rep.valid);
  REQUIRE(rep.measured_distance == 3);
}

TEST_CASE("d=5 color code: n=17, 8 checks per type, k=1, distance 5") {
  CssCode c = color_code(5);
  REQUIRE(c.n == 17);
  REQUIRE(c.x_checks.size() == 8);
  REQUIRE(c.z_checks.size() == 8);
  REQUIRE(c.k == 1);
  auto rep = validate_code(c);
  INFO(rep.first_violation);
  REQUIRE(rep.valid);
  REQUIRE(rep.measured_distance == 5);
}

TEST_CASE("unsupported distance rejected") {
  REQUIRE_THROWS_AS(color_code(7), std::invalid_argument);
}

TEST_CASE("flipping one check bit breaks CSS commutation") {
  CssCode c = color_code(3);
  c.x_checks[0].flip(4);  // S3 now overlaps S1' oddly
  auto rep = validate_code(c);
  REQUIRE_FALSE(rep.valid);
  REQUIRE(rep.first_violation.find("CSS commutation") != std::string::npos);
}

TEST_CASE("perfect code: commuting weight-4 generators, distance 3 by enumeration") {
  StabilizerCode pc = perfect_code_513();
  for (size_t i = 0; i < pc.generators.size(); i++) {
    REQUIRE(pc.generators[i].weight() == 4);
    for (size_t j = i + 1; j < pc.generators.size(); j++)
      REQUIRE(pc.generators[i].commutes(pc.generators[j]));
  }
  REQUIRE_FALSE(pc.logical_x.commutes(pc.logical_z));
  for (const auto& g : pc.generators) {
    REQUIRE(pc.logical_x.commutes(g));
    REQUIRE(pc.logical_z.commutes(g));
  }

  // brute-force distance oracle over all 4^5 paulis
  auto bits_of = [](const PauliString& p) {
    uint32_t b = 0;
    for (size_t q = 0; q < 5; q++)
      b |= ((uint32_t)p.x.get(q) << q) | ((uint32_t)p.z.get(q) << (q + 5));
    return b;
  };
  std::vector<uint32_t> group_bits;
  for (int mask = 0; mask < 16; mask++) {
    PauliString acc = PauliString::identity(5);
    for (int i = 0; i < 4; i++)
      if (mask >> i & 1) acc = pauli_mul(acc, pc.generators[i]);
    group_bits.push_back(bits_of(acc));
  }
  uint32_t min_logical = 99;
  for (uint32_t code = 1; code < 1024; code++) {
    PauliString p(5);
    uint32_t w = 0;
    for (size_t q = 0; q < 5; q++) {
      int l = (code >> (2 * q)) & 3;
      p.set_letter(q, "IXZY"[l]);
      if (l) w++;
    }
    bool commutes = true;
    for (const auto& g : pc.generators) commutes &= p.commutes(g);
    if (!commutes) continue;
    bool in_group = false;
    for (auto gb : group_bits) in_group |= (gb == bits_of(p));
    if (!in_group) min_logical = std::min(min_logical, w);
  }
  REQUIRE(min_logical == 3);
}

TEST_CASE("measurement specs per basis") {
  CssCode c = color_code(3);
  auto mz = measurement_spec(c, 'Z');
  REQUIRE(mz.detector_supports.size() == 3);
  REQUIRE(mz.logical_support.ones() == std::vector<uint32_t>{0, 1, 5});

  auto mx = measurement_spec(c, 'X');
  REQUIRE(mx.detector_supports.size() == 3);
  REQUIRE(mx.logical_op.letter(0) == 'X');

  auto my = measurement_spec(c, 'Y');
  REQUIRE(my.detector_supports.size() == 3);
  // logical Y is Hermitian with well-defined sign
  REQUIRE_NOTHROW(my.logical_op.herm_sign());

  // 3 checks x 5 blocks = 15 detectors for the d=3 factory readout
  REQUIRE(mz.detector_supports.size() * 5 == 15);
}

TEST_CASE("code text round-trip") {
  CssCode c = color_code(5);
  std::stringstream ss;
  write_code(ss, c);
  CssCode back = read_code(ss);
  REQUIRE(back.n == c.n);
  REQUIRE(back.z_checks.size() == c.z_checks.size());
  for (size_t i = 0; i < c.z_checks.size(); i++)
    REQUIRE(back.z_checks[i] == c.z_checks[i]);
  REQUIRE(back.logical_z[0] == c.logical_z[0]);
  auto rep = validate_code(back);
  REQUIRE(rep.valid);
}
