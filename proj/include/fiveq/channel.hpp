#pragma once

#include <array>
#include <map>
#include <numbers>

#include "fiveq/decode.hpp"
#include "fiveq/dense.hpp"
#include "fiveq/factory.hpp"

namespace fiveq {

// --- ideal logical channel ----------------------------------------------------

// The ideal distillation circuit as a classical channel: joint distribution
// over (4-bit syndrome outcome, output bit in `basis`), plus the exact
// accepted-output state.  Bit order: syndrome bits 0..3 (in syndrome-qubit
// order), output bit 4; all in the ideal (offset-free) convention.
struct IdealChannel {
  char basis = 'Z';
  std::array<double, 5> angles{};
  std::array<double, 32> outcome_probs{};
  double acceptance = 0;
  BlochVector accepted_bloch;
  double accepted_fidelity = 0;

  void check() const {
    double s = 0;
    for (double p : outcome_probs) s += p;
    if (std::abs(s - 1.0) > 1e-9) throw std::logic_error("ideal channel not normalized");
  }
};

// Exact 5-qubit dense simulation of the canonical distillation circuit with
// magic inputs rotated by the given Z angles.
inline IdealChannel ideal_channel(const std::array<double, 5>& angles, char basis) {
  const DistillationSpec& dist = canonical_distillation();
  IdealChannel ch;
  ch.basis = basis;
  ch.angles = angles;

  DenseState st(5);
  for (uint32_t q = 0; q < 5; q++) {
    st.apply_1q(DenseState::gate_matrix(GateKind::MagicPrep), q);
    if (angles[q] != 0.0) st.apply_1q(DenseState::gate_matrix(GateKind::Rz, angles[q]), q);
  }
  for (const auto& layer : dist.logical.layers)
    for (const auto& g : layer.gates) st.apply_gate(g);

  // accepted output state: project syndrome qubits onto the acceptance bits
  {
    DenseState acc = st;
    double p = 1.0;
    for (int i = 0; i < 4 && p > 0; i++)
      p *= acc.project(dist.syndrome_qubits[i], dist.acceptance[i]);
    ch.acceptance = p;
    if (p > 0) {
      ch.accepted_bloch = acc.bloch(dist.output_qubit);
      ch.accepted_fidelity = magic_fidelity(ch.accepted_bloch);
    }
  }

  // full outcome distribution with the output read in `basis`
  if (basis == 'X') st.apply_1q(DenseState::gate_matrix(GateKind::SqrtYDag), dist.output_qubit);
  else if (basis == 'Y') st.apply_1q(DenseState::gate_matrix(GateKind::SqrtX), dist.output_qubit);
  else if (basis != 'Z') throw std::invalid_argument("bad basis");
  const auto& amps = st.amplitudes();
  for (size_t idx = 0; idx < amps.size(); idx++) {
    double pr = std::norm(amps[idx]);
    if (pr == 0) continue;
    uint32_t bits = 0;
    for (int i = 0; i < 4; i++)
      bits |= ((idx >> dist.syndrome_qubits[i]) & 1) << i;
    bits |= ((idx >> dist.output_qubit) & 1) << 4;
    ch.outcome_probs[bits] += pr;
  }
  ch.check();
  return ch;
}

// --- learned logical error channel ---------------------------------------------

// Classical channel of residual logical flips after decoding, learned from
// reference-input sampling.  Conditioned on the postselection stratum.
struct LogicalChannel {
  char basis = 'Z';
  std::array<double, 32> probs{};
  double stratum_fraction = 1.0;   // fraction of shots inside the stratum
  uint64_t samples = 0;
  uint64_t kept = 0;
  std::array<uint8_t, 5> offsets{};  // noiseless reference outcome bits

  void check() const {
    double s = 0;
    for (double p : probs) s += p;
    if (kept > 0 && std::abs(s - 1.0) > 1e-9)
      throw std::logic_error("learned channel not normalized");
  }

  double output_flip_mass() const {
    double s = 0;
    for (int l = 0; l < 32; l++)
      if (l >> 4 & 1) s += probs[l];
    return s;
  }

  double non_identity_mass() const { return 1.0 - probs[0]; }
};

struct StratumRule {
  enum class Kind { None, PerfectStabilizer, GapThreshold };
  Kind kind = Kind::None;
  double threshold = 0;
};

enum class DecoderKind { Mle, Mld };

// Everything needed to sample and decode one factory configuration.
struct FactoryContext {
  CssCode code;
  char basis;
  Circuit circuit;          // reference-input circuit (fully Clifford)
  ReadoutPlan plan;
  DetectorModel model;
  uint32_t syndrome_detectors;

  static FactoryContext make(const CssCode& code, const NoiseModel& noise, char basis) {
    FactoryContext ctx{code, basis, build_reference_factory_circuit(code, basis), {}, {}, 0};
    ctx.plan = factory_readout_plan(code, basis);
    ctx.model = instrument(ctx.circuit, noise, ctx.plan);
    ctx.syndrome_detectors = (uint32_t)(4 * code.z_checks.size());
    return ctx;
  }
};

// Samples the reference circuit, decodes per stratum rules (factory stage for
// postselection, tomography stage for the flips), and tallies the 5-bit
// residual flip channel.
template <typename D>
inline LogicalChannel learn_channel(const FactoryContext& ctx, D& decoder, size_t shots,
                                    const StratumRule& stratum, uint64_t seed) {
  LogicalChannel ch;
  ch.basis = ctx.basis;
  ch.offsets = reference_offsets(ctx.code, ctx.basis);
  ch.samples = shots;

  // unique detector patterns decode once
  std::map<std::pair<uint64_t, uint64_t>, uint64_t> uniq;
  {
    const size_t shard = 1 << 20;
    size_t done = 0;
    uint64_t stream = 0;
    while (done < shots) {
      size_t now = std::min(shard, shots - done);
      for (const auto& r : sample(ctx.model, now, seed, stream++))
        uniq[{r.detectors, r.logicals}]++;
      done += now;
    }
  }
  std::array<uint64_t, 32> tally{};
  uint64_t kept = 0;
  uint64_t syndrome_mask = ctx.syndrome_detectors >= 64
                               ? ~0ull : ((1ull << ctx.syndrome_detectors) - 1);
  for (const auto& [key, count] : uniq) {
    auto [det, raw] = key;
    bool in_stratum = true;
    switch (stratum.kind) {
      case StratumRule::Kind::None: break;
      case StratumRule::Kind::PerfectStabilizer:
        in_stratum = (det & syndrome_mask) == 0;
        break;
      case StratumRule::Kind::GapThreshold: {
        DecodeResult f = decoder.decode_factory(det);
        in_stratum = f.gap.value_or(kGapInfinity) >= stratum.threshold;
        break;
      }
    }
    if (!in_stratum) continue;
    DecodeResult t = decoder.decode_tomography(det);
    uint64_t residual = (raw ^ t.logical_flips) & 31;
    tally[residual] += count;
    kept += count;
  }
  ch.kept = kept;
  ch.stratum_fraction = shots ? (double)kept / shots : 0.0;
  if (kept)
    for (int l = 0; l < 32; l++) ch.probs[l] = (double)tally[l] / kept;
  ch.check();
  return ch;
}

// --- composition ---------------------------------------------------------------

struct ComposedStats {
  double acceptance = 0;        // P(composite syndrome == acceptance pattern)
  double output_expectation = 0;  // <basis> of the composite output bit, accepted shots
  double output_bit_one = 0;
};

// Applies the learned classical flips on top of the ideal outcomes; the
// reference offsets cancel between the two conventions, so composition works
// in the ideal-outcome frame directly.
inline ComposedStats compose(const LogicalChannel& E, const IdealChannel& C) {
  if (E.basis != C.basis) throw std::invalid_argument("compose: basis mismatch");
  const DistillationSpec& dist = canonical_distillation();
  uint32_t accept_bits = 0;
  for (int i = 0; i < 4; i++) accept_bits |= (uint32_t)dist.acceptance[i] << i;

  double p_acc = 0, p_one = 0;
  for (uint32_t o = 0; o < 32; o++) {
    if (C.outcome_probs[o] == 0) continue;
    for (uint32_t l = 0; l < 32; l++) {
      if (E.probs[l] == 0) continue;
      uint32_t composite = o ^ l;
      if ((composite & 0xF) != accept_bits) continue;
      double pr = C.outcome_probs[o] * E.probs[l];
      p_acc += pr;
      if (composite >> 4 & 1) p_one += pr;
    }
  }
  ComposedStats s;
  s.acceptance = p_acc;
  s.output_bit_one = p_acc > 0 ? p_one / p_acc : 0;
  s.output_expectation = 1.0 - 2.0 * s.output_bit_one;
  return s;
}

// --- fidelity statistics ---------------------------------------------------------

struct BasisCounts {
  uint64_t n = 0;  // shots
  uint64_t m = 0;  // outcomes aligned with the +1 reference
};

// v_b = 2 m_b / n_b - 1 per basis, from decoded records.
inline BlochVector tomography_estimate(const std::array<BasisCounts, 3>& counts) {
  auto comp = [](const BasisCounts& c) {
    if (c.n == 0) throw std::invalid_argument("tomography_estimate: empty basis");
    return 2.0 * (double)c.m / (double)c.n - 1.0;
  };
  return BlochVector{comp(counts[0]), comp(counts[1]), comp(counts[2])};
}

struct FidelityInterval {
  double median = 0, lo = 0, hi = 0;  // central 68% (16th/84th percentiles)
};

// Bayesian credible interval for the magic fidelity under the uniform-ball
// prior: Monte Carlo over the Bloch ball, binomial likelihood per basis.
inline FidelityInterval bayes_interval(const std::array<BasisCounts, 3>& counts,
                                       size_t n_samples, uint64_t seed) {
  Rng rng(seed);
  std::vector<std::pair<double, double>> fw;  // (fidelity, log weight)
  fw.reserve(n_samples);
  double max_lw = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < n_samples; i++) {
    double x, y, z;
    do {
      x = 2 * rng.next_double() - 1;
      y = 2 * rng.next_double() - 1;
      z = 2 * rng.next_double() - 1;
    } while (x * x + y * y + z * z > 1.0);
    double v[3] = {x, y, z};
    double lw = 0;
    for (int b = 0; b < 3; b++) {
      double p = (1.0 + v[b]) / 2.0;
      p = std::min(1.0 - 1e-300, std::max(1e-300, p));
      lw += (double)counts[b].m * std::log(p) +
            (double)(counts[b].n - counts[b].m) * std::log1p(-p);
    }
    double f = 0.5 + (x + y + z) / (2.0 * std::numbers::sqrt3);
    fw.push_back({f, lw});
    max_lw = std::max(max_lw, lw);
  }
  if (max_lw == -std::numeric_limits<double>::infinity())
    throw std::runtime_error("bayes_interval: all posterior weights vanished");

  std::sort(fw.begin(), fw.end());
  double total = 0;
  for (auto& [f, lw] : fw) total += std::exp(lw - max_lw);
  auto quantile = [&](double q) {
    double target = q * total, run = 0;
    for (auto& [f, lw] : fw) {
      run += std::exp(lw - max_lw);
      if (run >= target) return f;
    }
    return fw.back().first;
  };
  FidelityInterval iv;
  iv.lo = quantile(0.16);
  iv.median = quantile(0.5);
  iv.hi = quantile(0.84);
  return iv;
}

}  // namespace fiveq
