#pragma once

#include <array>
#include <optional>

#include "fiveq/codes.hpp"
#include "fiveq/noise.hpp"
#include "fiveq/synth.hpp"
#include "fiveq/tableau.hpp"

namespace fiveq {

// Published row-op sequences for the color-code injection circuits; the
// synthesizer golden tests check these reduce their initial matrices.
inline const std::vector<RowOp>& injection_rops(uint32_t distance) {
  static const std::vector<RowOp> d3 = {{0, 1}, {3, 2}, {5, 4}, {0, 3}, {2, 5},
                                        {4, 6}, {2, 1}, {4, 3}, {6, 5}};
  static const std::vector<RowOp> d5 = {
      {1, 0},  {3, 2},  {4, 5},  {7, 6},   {9, 8},   {15, 12}, {2, 0},  {6, 3},
      {8, 5},  {12, 10}, {13, 11}, {2, 4},  {8, 6},   {9, 7},   {10, 13}, {16, 14},
      {4, 7},  {8, 10}, {14, 11}, {15, 16}, {3, 1},   {7, 10},  {14, 12}, {16, 13}};
  if (distance == 3) return d3;
  if (distance == 5) return d5;
  throw std::invalid_argument("no published injection sequence for this distance");
}

// Input preparation for one injected physical qubit.
struct InputSpec {
  enum class Kind { Magic, XYPlane, BasisState };
  Kind kind = Kind::Magic;
  double rz = 0.0;          // extra Z rotation (coherent error probe / phase sweep)
  char basis_state = '0';   // for Kind::BasisState

  // One gate per layer; the Rz layer is always present for Magic/XYPlane so
  // parallel blocks with different angles stay layer-aligned.
  std::vector<Gate> program(uint32_t q) const {
    std::vector<Gate> gates;
    switch (kind) {
      case Kind::Magic:
        gates.push_back({GateKind::MagicPrep, q});
        gates.push_back({Gate{GateKind::Rz, q, kNoQubit, rz}});
        break;
      case Kind::XYPlane:
        gates.push_back({GateKind::SqrtY, q});
        gates.push_back({Gate{GateKind::Rz, q, kNoQubit, rz}});
        break;
      case Kind::BasisState:
        for (GateKind g : injected_prep_program(basis_state)) gates.push_back({g, q});
        break;
    }
    return gates;
  }
};

// Single-block injection circuit: synthesized encoder with the physical input
// prepared per spec.  d=1 (trivial code) is the bare physical qubit.
inline Circuit build_injection_block(const CssCode& code, const InputSpec& input) {
  if (code.n == 1) {
    Circuit c;
    c.n_qubits = 1;
    c.injected_qubits = {0};
    c.block_of = {0};
    Layer& prep = c.append_layer();
    prep.input_prologue = true;
    prep.gates.push_back({GateKind::PrepZ, 0});
    for (const auto& g : input.program(0)) {
      Layer& in = c.append_layer();
      in.input_prologue = true;
      in.gates.push_back(g);
    }
    return c;
  }
  auto r = replay_reduction(code, injection_rops(code.d));
  if (!r.success) throw std::logic_error("published injection sequence failed to reduce");
  Circuit c = circuit_from_rops(r.seq, r.final, {});
  // splice the input program (one layer per gate) after the prep layer
  uint32_t inj = c.injected_qubits.at(0);
  auto prog = input.program(inj);
  size_t at = 1;
  for (const auto& g : prog) {
    Layer in;
    in.input_prologue = true;
    in.gates.push_back(g);
    c.layers.insert(c.layers.begin() + at++, in);
  }
  c.validate();
  return c;
}

// --- canonical 5-to-1 distillation circuit ---------------------------------

// Logical-level distillation data: a Clifford circuit on 5 logical qubits
// with three CZ rounds, the measured-qubit set, and the acceptance pattern.
struct DistillationSpec {
  Circuit logical;                       // 5-qubit Clifford circuit, no prep/meas
  std::array<uint32_t, 4> syndrome_qubits;
  uint32_t output_qubit;
  std::array<uint8_t, 4> acceptance;     // accepted Z-outcome bits, syndrome order
};

// Defined in distill.hpp (frozen circuit constants).
const DistillationSpec& canonical_distillation();

// --- transversal expansion ---------------------------------------------------

namespace detail {

// Physical implementation of a logical single-qubit gate on a self-dual CSS
// block is the same gate transversally; the residual logical Pauli is
// absorbed by the operational reference conventions.
inline void expand_1q(Layer& out, GateKind g, uint32_t block, uint32_t n) {
  for (uint32_t i = 0; i < n; i++) out.gates.push_back({g, block * n + i});
}

}  // namespace detail

// Five injection blocks stacked, the distillation circuit applied
// transversally, distillation syndromes measured in Z and the output block
// in `basis`.  Input specs are per logical qubit.
inline Circuit build_factory_circuit(const CssCode& code,
                                     const std::array<InputSpec, 5>& inputs,
                                     char basis) {
  if (basis != 'X' && basis != 'Y' && basis != 'Z')
    throw std::invalid_argument("bad output basis");
  const DistillationSpec& dist = canonical_distillation();
  const uint32_t n = code.n;
  Circuit c;
  c.n_qubits = 5 * n;
  c.block_of.resize(c.n_qubits);
  for (uint32_t b = 0; b < 5; b++)
    for (uint32_t i = 0; i < n; i++) c.block_of[b * n + i] = b;

  // five parallel injection blocks, layers merged across blocks
  std::array<Circuit, 5> blocks;
  size_t max_layers = 0;
  for (uint32_t b = 0; b < 5; b++) {
    blocks[b] = build_injection_block(code, inputs[b]);
    max_layers = std::max(max_layers, blocks[b].layers.size());
    c.injected_qubits.push_back(b * n + blocks[b].injected_qubits.at(0));
  }
  for (size_t li = 0; li < max_layers; li++) {
    Layer merged;
    for (uint32_t b = 0; b < 5; b++) {
      if (li >= blocks[b].layers.size()) continue;
      const Layer& src = blocks[b].layers[li];
      merged.global |= src.global;
      merged.input_prologue |= src.input_prologue;
      for (const auto& g : src.gates) {
        Gate gg = g;
        gg.q0 += b * n;
        if (gg.two_qubit()) gg.q1 += b * n;
        merged.gates.push_back(gg);
      }
      for (auto q : src.moved) merged.moved.push_back(q + b * n);
    }
    c.layers.push_back(std::move(merged));
  }

  // transversal distillation segment
  for (const auto& llayer : dist.logical.layers) {
    Layer phys;
    for (const auto& g : llayer.gates) {
      if (g.kind == GateKind::CZ) {
        for (uint32_t i = 0; i < n; i++) {
          phys.gates.push_back({GateKind::CZ, g.q0 * n + i, g.q1 * n + i});
          phys.moved.push_back(g.q0 * n + i);
        }
      } else if (gate_is_two_qubit(g.kind)) {
        throw std::invalid_argument("distillation segment: only CZ entanglers");
      } else {
        detail::expand_1q(phys, g.kind, g.q0, n);
      }
    }
    if (!phys.gates.empty()) c.layers.push_back(std::move(phys));
  }

  // readout: syndrome blocks in Z; output block rotated into `basis`
  if (basis != 'Z') {
    Layer rot;
    rot.global = true;
    GateKind g = basis == 'X' ? GateKind::SqrtYDag : GateKind::SqrtX;
    detail::expand_1q(rot, g, dist.output_qubit, n);
    c.layers.push_back(std::move(rot));
  }
  Layer meas;
  for (uint32_t q = 0; q < c.n_qubits; q++) meas.gates.push_back({GateKind::MeasZ, q});
  c.layers.push_back(std::move(meas));
  c.validate();
  return c;
}

inline Circuit build_factory_circuit(const CssCode& code, const std::array<double, 5>& angles,
                                     char basis) {
  std::array<InputSpec, 5> in;
  for (int i = 0; i < 5; i++) in[i] = InputSpec{InputSpec::Kind::Magic, angles[i], '0'};
  return build_factory_circuit(code, in, basis);
}

// Clifford fragment preparing the 5-qubit reference state on the injected
// physical qubits: the output slot in the +1 eigenstate of `basis`, then the
// inverse of the logical circuit, making all logical outcomes deterministic.
inline std::vector<Layer> reference_state_prep(char basis, const std::vector<uint32_t>& qubits) {
  const DistillationSpec& dist = canonical_distillation();
  std::vector<Layer> out;
  auto local = [&](std::vector<Gate> gs) {
    Layer l;
    l.input_prologue = true;
    l.gates = std::move(gs);
    out.push_back(std::move(l));
  };
  uint32_t oq = qubits.at(dist.output_qubit);
  if (basis == 'X') local({{GateKind::SqrtY, oq}});
  else if (basis == 'Y') local({{GateKind::SqrtY, oq}});
  if (basis == 'Y') local({{GateKind::S, oq}});  // |+i> = S|+>
  else if (basis != 'X' && basis != 'Z') throw std::invalid_argument("bad basis");

  auto dagger = [](GateKind k) {
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
  for (auto it = dist.logical.layers.rbegin(); it != dist.logical.layers.rend(); ++it) {
    Layer l;
    l.input_prologue = true;
    for (auto git = it->gates.rbegin(); git != it->gates.rend(); ++git) {
      Gate g = *git;
      g.kind = dagger(g.kind);
      g.q0 = qubits.at(g.q0);
      if (g.two_qubit()) g.q1 = qubits.at(g.q1);
      l.gates.push_back(g);
    }
    out.push_back(std::move(l));
  }
  return out;
}

inline ReadoutPlan factory_readout_plan(const CssCode& code, char basis);

namespace detail {

inline std::array<uint8_t, 5> logical_bits_of_run(const Circuit& c, const ReadoutPlan& plan,
                                                  uint64_t seed) {
  auto run = tableau_run(c, seed);
  BitVec bits(c.n_qubits);
  size_t mi = 0;
  for (const auto& layer : c.layers)
    for (const auto& g : layer.gates)
      if (g.kind == GateKind::MeasZ) bits.set(g.q0, run.measurements.at(mi++));
  std::array<uint8_t, 5> out{};
  for (size_t i = 0; i < plan.logical_supports.size() && i < 5; i++)
    out[i] = (uint8_t)(BitVec::and_popcount(bits, plan.logical_supports[i]) & 1);
  for (const auto& d : plan.detector_supports)
    if (BitVec::and_popcount(bits, d) & 1)
      throw std::logic_error("noiseless reference has a nonzero detector");
  return out;
}

}  // namespace detail

// Factory circuit with the entangled reference input replacing the five magic
// states; fully Clifford, used for noise-channel learning.  The fragment is
// self-calibrated: residual logical Paulis from the transversal gate
// expansions are cancelled so all noiseless logical outcomes read 0.
inline Circuit build_reference_factory_circuit(const CssCode& code, char basis) {
  const DistillationSpec& dist = canonical_distillation();
  std::array<InputSpec, 5> in;
  for (int i = 0; i < 5; i++) in[i] = InputSpec{InputSpec::Kind::BasisState, 0.0, '0'};
  Circuit c = build_factory_circuit(code, in, basis);
  // splice the reference fragment right after the global prep layer, before
  // the injection bodies; injected qubits are listed per block
  auto frag = reference_state_prep(basis, c.injected_qubits);
  c.layers.insert(c.layers.begin() + 1, frag.begin(), frag.end());
  c.validate();

  // self-calibration: any logical bit reading 1 in the noiseless run is
  // cancelled by a Pauli on the input qubits.  The flip needed at readout is
  // pulled back through the logical circuit so it can sit in the prologue.
  ReadoutPlan plan = factory_readout_plan(code, basis);
  auto bits = detail::logical_bits_of_run(c, plan, 1);
  PauliString post(5);
  for (int i = 0; i < 4; i++)
    if (bits[i]) post.set_letter(dist.syndrome_qubits[i], 'X');  // flips a Z readout
  if (bits[4]) post.set_letter(dist.output_qubit, basis == 'X' ? 'Z' : 'X');
  if (!post.is_identity_support()) {
    // P_pre = U_log^dag P_post U_log: conjugate through the inverted circuit
    auto dagger = [](GateKind k) {
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
    PauliString pre = post;
    for (auto it = dist.logical.layers.rbegin(); it != dist.logical.layers.rend(); ++it)
      for (auto git = it->gates.rbegin(); git != it->gates.rend(); ++git) {
        if (gate_is_two_qubit(git->kind)) conjugate_2q(pre, git->kind, git->q0, git->q1);
        else conjugate_1q(pre, dagger(git->kind), git->q0);
      }
    Layer fix;
    fix.input_prologue = true;
    for (uint32_t b = 0; b < 5; b++) {
      char l = pre.letter(b);
      if (l == 'I') continue;
      GateKind g = l == 'X' ? GateKind::X : (l == 'Y' ? GateKind::Y : GateKind::Z);
      fix.gates.push_back({g, c.injected_qubits.at(b)});
    }
    c.layers.insert(c.layers.begin() + 1 + frag.size(), fix);
    c.validate();
    auto check = detail::logical_bits_of_run(c, plan, 1);
    for (int i = 0; i < 5; i++)
      if (check[i]) throw std::logic_error("reference self-calibration failed");
  }
  return c;
}

// --- readout plan -------------------------------------------------------------

// Detector and logical parities over the physical measurement bits for the
// factory readout.  Detector order: the four syndrome blocks' checks (in
// logical-qubit order), then the output block's checks.  Logical order: the
// four syndrome Z-logicals, then the output logical (L4).
inline ReadoutPlan factory_readout_plan(const CssCode& code, char basis) {
  const DistillationSpec& dist = canonical_distillation();
  const uint32_t n = code.n;
  ReadoutPlan plan;
  auto shifted = [&](const BitVec& s, uint32_t block) {
    BitVec v(5 * n);
    for (auto q : s.ones()) v.set(block * n + q, true);
    return v;
  };
  MeasurementSpec mz = measurement_spec(code, 'Z');
  for (uint32_t sq : dist.syndrome_qubits) {
    for (const auto& d : mz.detector_supports) plan.detector_supports.push_back(shifted(d, sq));
  }
  MeasurementSpec mb = measurement_spec(code, basis);
  for (const auto& d : mb.detector_supports)
    plan.detector_supports.push_back(shifted(d, dist.output_qubit));
  for (uint32_t sq : dist.syndrome_qubits)
    plan.logical_supports.push_back(shifted(mz.logical_support, sq));
  plan.logical_supports.push_back(shifted(mb.logical_support, dist.output_qubit));
  return plan;
}

// Injection-only readout (single block) for tomography runs.
inline ReadoutPlan injection_readout_plan(const CssCode& code, char basis) {
  ReadoutPlan plan;
  MeasurementSpec m = measurement_spec(code, basis);
  plan.detector_supports = m.detector_supports;
  plan.logical_supports = {m.logical_support};
  return plan;
}

inline Circuit build_injection_tomography(const CssCode& code, const InputSpec& input,
                                          char basis) {
  Circuit c = build_injection_block(code, input);
  if (basis != 'Z') {
    Layer rot;
    rot.global = true;
    GateKind g = basis == 'X' ? GateKind::SqrtYDag : GateKind::SqrtX;
    for (uint32_t q = 0; q < c.n_qubits; q++) rot.gates.push_back({g, q});
    c.layers.push_back(std::move(rot));
  }
  Layer meas;
  for (uint32_t q = 0; q < c.n_qubits; q++) meas.gates.push_back({GateKind::MeasZ, q});
  c.layers.push_back(std::move(meas));
  return c;
}

// Deterministic logical outcome bits of the noiseless reference circuit; the
// operational baseline that pins all sign conventions.  Order matches the
// readout plan (four syndrome logicals, then the output logical).
inline std::array<uint8_t, 5> reference_offsets(const CssCode& code, char basis) {
  Circuit c = build_reference_factory_circuit(code, basis);
  ReadoutPlan plan = factory_readout_plan(code, basis);
  auto run = tableau_run(c, 1);
  // measurement record is in qubit order (single terminal MeasZ layer)
  BitVec bits(c.n_qubits);
  size_t mi = 0;
  for (const auto& layer : c.layers)
    for (const auto& g : layer.gates)
      if (g.kind == GateKind::MeasZ) bits.set(g.q0, run.measurements.at(mi++));
  std::array<uint8_t, 5> out{};
  for (size_t i = 0; i < 5; i++)
    out[i] = (uint8_t)(BitVec::and_popcount(bits, plan.logical_supports[i]) & 1);
  // detectors of the noiseless reference must all read 0
  for (const auto& d : plan.detector_supports)
    if (BitVec::and_popcount(bits, d) & 1)
      throw std::logic_error("noiseless reference has a nonzero detector");
  return out;
}

}  // namespace fiveq
