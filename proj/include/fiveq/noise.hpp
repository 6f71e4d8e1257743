#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "fiveq/circuit.hpp"
#include "fiveq/pauli.hpp"
#include "fiveq/rng.hpp"

namespace fiveq {

// Depolarizing Pauli error model, biased on the two-qubit channel towards
// Z/ZZ dephasing.  Rates are per operation; `rescale` multiplies everything.
struct NoiseModel {
  double p_cz = 0.0058;        // total two-qubit gate error
  double bias_zz = 0.6;        // fraction of p_cz on {ZI, IZ, ZZ}
  double p_1q_global = 2.2e-4;
  double p_1q_local = 1.9e-3;
  double p_prep = 0.005;       // X flip after preparation
  double p_meas = 0.005;       // measurement bit flip
  double p_move_z = 2e-4;      // Z on moved qubits, per move window
  double p_idle = 1e-4;        // Z on all qubits, per move window
  double rescale = 1.0;

  void check() const {
    for (double p : {p_cz, p_1q_global, p_1q_local, p_prep, p_meas, p_move_z, p_idle}) {
      if (p < 0 || p * rescale >= 0.5)
        throw std::invalid_argument("noise probability out of [0, 0.5)");
    }
    if (rescale <= 0) throw std::invalid_argument("rescale must be positive");
  }

  static NoiseModel zero() {
    NoiseModel n;
    n.p_cz = n.p_1q_global = n.p_1q_local = n.p_prep = n.p_meas = 0;
    n.p_move_z = n.p_idle = 0;
    return n;
  }
};

// Where a mechanism came from, for diagnostics and the recomputation oracle.
struct MechanismTag {
  uint32_t layer = 0;
  uint32_t q0 = 0, q1 = kNoQubit;  // q1 = kNoQubit for 1q
  char p0 = 'I', p1 = 'I';         // pauli letters ('M' marks a readout flip)
};

// Sparse detector error model: column j flips detectors ~ column of D and
// logical observables ~ column of L, firing independently with prob p[j].
struct DetectorModel {
  uint32_t n_detectors = 0;
  uint32_t n_logicals = 0;
  std::vector<uint64_t> det_cols;   // bit i = detector i flip (n_detectors <= 64)
  std::vector<uint64_t> log_cols;   // bit i = logical i flip
  std::vector<double> p;
  std::vector<std::vector<MechanismTag>> tags;  // provenance per merged column

  size_t n_mechanisms() const { return p.size(); }

  void check() const {
    if (n_detectors > 64 || n_logicals > 64)
      throw std::invalid_argument("detector model exceeds 64-bit packing");
    for (size_t j = 0; j < p.size(); j++) {
      if (p[j] <= 0 || p[j] >= 0.5)
        throw std::invalid_argument("mechanism probability must be in (0, 0.5)");
      if (!det_cols[j] && !log_cols[j])
        throw std::invalid_argument("benign mechanism survived instrumentation");
    }
  }

  // Restriction to a detector subset (indices into current detectors) and a
  // logical subset; mechanisms with identical restricted columns are merged.
  DetectorModel restrict(const std::vector<uint32_t>& det_idx,
                         const std::vector<uint32_t>& log_idx) const;
};

// One sampled shot: detector bits and raw logical-flip bits (ground truth;
// hidden from decoders except in oracle tests).
struct ShotRecord {
  uint64_t detectors = 0;
  uint64_t logicals = 0;
};

// The readout plan the instrumentation maps physical flips through: each
// detector/logical is a parity of per-qubit measurement flip bits.
struct ReadoutPlan {
  std::vector<BitVec> detector_supports;  // over physical qubits
  std::vector<BitVec> logical_supports;
};

namespace detail {

inline void xor_merge(std::map<std::pair<uint64_t, uint64_t>, std::pair<double, std::vector<MechanismTag>>>& acc,
                      uint64_t det, uint64_t log, double p, const MechanismTag& tag) {
  if (!det && !log) return;  // benign
  if (p <= 0) return;
  auto& slot = acc[{det, log}];
  // independent OR of firings: combined flip probability
  slot.first = slot.first + p - 2 * slot.first * p;
  slot.second.push_back(tag);
}

// Propagates a Pauli inserted after `layer` to the end, returning the
// per-qubit measurement flip mask (flip iff the propagated Pauli
// anticommutes with the measured single-qubit operator).
inline BitVec propagate_to_flips(const Circuit& c, PauliString err, size_t from_layer) {
  BitVec flips(c.n_qubits);
  for (size_t li = from_layer; li < c.layers.size(); li++) {
    for (const auto& g : c.layers[li].gates) {
      switch (g.kind) {
        case GateKind::CZ:
        case GateKind::CNot:
          conjugate_2q(err, g.kind, g.q0, g.q1);
          break;
        case GateKind::MeasX:
          if (err.z.get(g.q0)) flips.flip(g.q0);
          break;
        case GateKind::MeasY:
          if (err.z.get(g.q0) ^ err.x.get(g.q0)) flips.flip(g.q0);
          break;
        case GateKind::MeasZ:
          if (err.x.get(g.q0)) flips.flip(g.q0);
          break;
        case GateKind::PrepZ:
          err.x.set(g.q0, false);
          err.z.set(g.q0, false);
          break;
        case GateKind::Rz:
        case GateKind::MagicPrep:
          if (err.x.get(g.q0) || err.z.get(g.q0))
            throw std::invalid_argument("error propagated into a non-Clifford gate");
          break;
        default:
          conjugate_1q(err, g.kind, g.q0);
      }
    }
  }
  return flips;
}

inline uint64_t parity_bits(const BitVec& flips, const std::vector<BitVec>& supports) {
  uint64_t out = 0;
  for (size_t i = 0; i < supports.size(); i++)
    if (BitVec::and_popcount(flips, supports[i]) & 1) out |= 1ull << i;
  return out;
}

}  // namespace detail

// Enumerates elementary Pauli errors at every noisy location, propagates each
// to the terminal measurement, and assembles the merged detector model.
// Input-prologue layers are error-free locations by construction.
inline DetectorModel instrument(const Circuit& c, const NoiseModel& noise,
                                const ReadoutPlan& plan) {
  noise.check();
  c.validate();
  const double r = noise.rescale;
  std::map<std::pair<uint64_t, uint64_t>, std::pair<double, std::vector<MechanismTag>>> acc;

  auto emit_1q = [&](size_t layer, uint32_t q, char letter, double p) {
    if (p <= 0) return;
    PauliString e(c.n_qubits);
    e.set_letter(q, letter);
    BitVec flips = detail::propagate_to_flips(c, e, layer + 1);
    detail::xor_merge(acc, detail::parity_bits(flips, plan.detector_supports),
                      detail::parity_bits(flips, plan.logical_supports), p,
                      {(uint32_t)layer, q, kNoQubit, letter, 'I'});
  };

  static const char* two_q_paulis[15] = {"IX", "IY", "IZ", "XI", "XX", "XY", "XZ",
                                         "YI", "YX", "YY", "YZ", "ZI", "ZX", "ZY", "ZZ"};

  for (size_t li = 0; li < c.layers.size(); li++) {
    const Layer& layer = c.layers[li];
    if (layer.input_prologue) continue;  // inputs are error-free locations

    for (const auto& g : layer.gates) {
      switch (g.kind) {
        case GateKind::CZ:
        case GateKind::CNot: {
          double p = noise.p_cz * r;
          if (p <= 0) break;
          double p_biased = p * noise.bias_zz / 3.0;
          double p_rest = p * (1.0 - noise.bias_zz) / 12.0;
          for (const char* tp : two_q_paulis) {
            bool z_type = (tp[0] == 'I' || tp[0] == 'Z') && (tp[1] == 'I' || tp[1] == 'Z');
            double pe = z_type ? p_biased : p_rest;
            if (pe <= 0) continue;
            PauliString e(c.n_qubits);
            e.set_letter(g.q0, tp[0]);
            e.set_letter(g.q1, tp[1]);
            BitVec flips = detail::propagate_to_flips(c, e, li + 1);
            detail::xor_merge(acc, detail::parity_bits(flips, plan.detector_supports),
                              detail::parity_bits(flips, plan.logical_supports), pe,
                              {(uint32_t)li, g.q0, g.q1, tp[0], tp[1]});
          }
          break;
        }
        case GateKind::PrepZ:
          emit_1q(li, g.q0, 'X', noise.p_prep * r);
          break;
        case GateKind::MeasX:
        case GateKind::MeasY:
        case GateKind::MeasZ: {
          // measurement flip: flips exactly this qubit's readout bit
          double p = noise.p_meas * r;
          if (p <= 0) break;
          BitVec flips(c.n_qubits);
          flips.set(g.q0, true);
          detail::xor_merge(acc, detail::parity_bits(flips, plan.detector_supports),
                            detail::parity_bits(flips, plan.logical_supports), p,
                            {(uint32_t)li, g.q0, kNoQubit, 'M', 'I'});
          break;
        }
        case GateKind::Rz:
        case GateKind::MagicPrep:
          throw std::invalid_argument("non-Clifford gate outside the input prologue");
        default: {
          double p = (layer.global ? noise.p_1q_global : noise.p_1q_local) * r;
          if (p <= 0) break;
          for (char l : {'X', 'Y', 'Z'}) emit_1q(li, g.q0, l, p / 3.0);
          break;
        }
      }
    }

    // move window attached to this layer
    if (!layer.moved.empty()) {
      double pm = noise.p_move_z * r, pi = noise.p_idle * r;
      for (uint32_t q : layer.moved)
        if (pm > 0) emit_1q(li, q, 'Z', pm);
      if (pi > 0)
        for (uint32_t q = 0; q < c.n_qubits; q++) emit_1q(li, q, 'Z', pi);
    }
  }

  DetectorModel m;
  m.n_detectors = (uint32_t)plan.detector_supports.size();
  m.n_logicals = (uint32_t)plan.logical_supports.size();
  for (auto& [key, val] : acc) {
    m.det_cols.push_back(key.first);
    m.log_cols.push_back(key.second);
    m.p.push_back(val.first);
    m.tags.push_back(std::move(val.second));
  }
  m.check();
  return m;
}

inline DetectorModel DetectorModel::restrict(const std::vector<uint32_t>& det_idx,
                                             const std::vector<uint32_t>& log_idx) const {
  std::map<std::pair<uint64_t, uint64_t>, std::pair<double, std::vector<MechanismTag>>> acc;
  for (size_t j = 0; j < p.size(); j++) {
    uint64_t d = 0, l = 0;
    for (size_t i = 0; i < det_idx.size(); i++)
      if (det_cols[j] >> det_idx[i] & 1) d |= 1ull << i;
    for (size_t i = 0; i < log_idx.size(); i++)
      if (log_cols[j] >> log_idx[i] & 1) l |= 1ull << i;
    detail::xor_merge(acc, d, l, p[j], tags[j].empty() ? MechanismTag{} : tags[j][0]);
  }
  DetectorModel m;
  m.n_detectors = (uint32_t)det_idx.size();
  m.n_logicals = (uint32_t)log_idx.size();
  for (auto& [key, val] : acc) {
    m.det_cols.push_back(key.first);
    m.log_cols.push_back(key.second);
    m.p.push_back(val.first);
    m.tags.push_back(std::move(val.second));
  }
  return m;
}

namespace detail {

// Geometric-skip Bernoulli stream: visits exactly the firing indices of an
// iid Bernoulli(p) sequence in O(#firings).
template <typename F>
inline void for_each_firing(Rng& rng, size_t count, double p, F&& fn) {
  if (p <= 0) return;
  double log1mp = std::log1p(-p);
  size_t i = 0;
  while (true) {
    double u = rng.next_double();
    if (u <= 0) u = 1e-300;
    double skip = std::floor(std::log(u) / log1mp);
    if (skip > (double)count) return;
    i += (size_t)skip;
    if (i >= count) return;
    fn(i);
    i++;
  }
}

}  // namespace detail

// Samples shot records from the detector model; each mechanism fires
// independently per shot with probability p[j].
inline std::vector<ShotRecord> sample(const DetectorModel& m, size_t shots, uint64_t seed,
                                      uint64_t stream = 0) {
  std::vector<ShotRecord> out(shots);
  Rng rng(seed, stream);
  for (size_t j = 0; j < m.n_mechanisms(); j++) {
    detail::for_each_firing(rng, shots, m.p[j], [&](size_t s) {
      out[s].detectors ^= m.det_cols[j];
      out[s].logicals ^= m.log_cols[j];
    });
  }
  return out;
}

// --- direct Pauli-frame simulation ----------------------------------------
// Independent of instrument(): errors are drawn per location per shot and the
// frame is pushed through the compiled circuit.  Used as the distribution
// oracle against sample(), and for single-error column recomputation.

namespace detail {

// Sign-free Pauli frame on up to 128 qubits; parities never need phases.
struct Frame {
  uint64_t x[2] = {0, 0}, z[2] = {0, 0};

  void clear() { x[0] = x[1] = z[0] = z[1] = 0; }
  static uint64_t bit(uint32_t q) { return 1ull << (q & 63); }
  bool get_x(uint32_t q) const { return x[q >> 6] & bit(q); }
  bool get_z(uint32_t q) const { return z[q >> 6] & bit(q); }
  void flip_x(uint32_t q) { x[q >> 6] ^= bit(q); }
  void flip_z(uint32_t q) { z[q >> 6] ^= bit(q); }
  void clear_q(uint32_t q) { x[q >> 6] &= ~bit(q); z[q >> 6] &= ~bit(q); }
};

struct FrameCircuit {
  struct Op {
    GateKind kind;
    uint32_t q0, q1;
    uint32_t meas_slot;  // for measurement gates
  };
  struct ErrLoc {
    enum Kind : uint8_t { OneQ, TwoQ, PrepX, MeasFlip, MoveZ } kind;
    uint32_t q0, q1;
    double p;
  };
  uint32_t n_qubits = 0;
  std::vector<Op> ops;
  std::vector<size_t> layer_op_end;           // ops index after each layer
  std::vector<std::vector<ErrLoc>> layer_errs;  // errors injected after each layer
  uint32_t n_meas = 0;
  std::vector<uint32_t> meas_qubit;           // slot -> measured qubit
};

inline FrameCircuit compile_frame_circuit(const Circuit& c, const NoiseModel& noise) {
  if (c.n_qubits > 128) throw std::invalid_argument("frame sampler capped at 128 qubits");
  const double r = noise.rescale;
  FrameCircuit fc;
  fc.n_qubits = c.n_qubits;
  for (const auto& layer : c.layers) {
    std::vector<FrameCircuit::ErrLoc> errs;
    for (const auto& g : layer.gates) {
      FrameCircuit::Op op{g.kind, g.q0, g.q1, 0};
      if (g.kind == GateKind::MeasX || g.kind == GateKind::MeasY || g.kind == GateKind::MeasZ) {
        op.meas_slot = fc.n_meas++;
        fc.meas_qubit.push_back(g.q0);
      }
      if (g.kind == GateKind::Rz || g.kind == GateKind::MagicPrep) {
        if (!layer.input_prologue)
          throw std::invalid_argument("non-Clifford gate outside the input prologue");
        continue;  // identity on the frame; no error location
      }
      fc.ops.push_back(op);
      if (layer.input_prologue) continue;
      switch (g.kind) {
        case GateKind::CZ:
        case GateKind::CNot:
          if (noise.p_cz > 0) errs.push_back({FrameCircuit::ErrLoc::TwoQ, g.q0, g.q1, noise.p_cz * r});
          break;
        case GateKind::PrepZ:
          if (noise.p_prep > 0) errs.push_back({FrameCircuit::ErrLoc::PrepX, g.q0, 0, noise.p_prep * r});
          break;
        case GateKind::MeasX:
        case GateKind::MeasY:
        case GateKind::MeasZ:
          if (noise.p_meas > 0)
            errs.push_back({FrameCircuit::ErrLoc::MeasFlip, op.meas_slot, 0, noise.p_meas * r});
          break;
        default: {
          double p = (layer.global ? noise.p_1q_global : noise.p_1q_local) * r;
          if (p > 0) errs.push_back({FrameCircuit::ErrLoc::OneQ, g.q0, 0, p});
          break;
        }
      }
    }
    if (!layer.input_prologue && !layer.moved.empty()) {
      if (noise.p_move_z > 0)
        for (uint32_t q : layer.moved)
          errs.push_back({FrameCircuit::ErrLoc::MoveZ, q, 0, noise.p_move_z * r});
      if (noise.p_idle > 0)
        for (uint32_t q = 0; q < c.n_qubits; q++)
          errs.push_back({FrameCircuit::ErrLoc::MoveZ, q, 0, noise.p_idle * r});
    }
    fc.layer_op_end.push_back(fc.ops.size());
    fc.layer_errs.push_back(std::move(errs));
  }
  return fc;
}

inline void frame_apply(Frame& f, const FrameCircuit::Op& op, Frame& meas_flips) {
  switch (op.kind) {
    case GateKind::H: case GateKind::SqrtY: case GateKind::SqrtYDag: {
      bool hx = f.get_x(op.q0), hz = f.get_z(op.q0);
      if (hx != hz) { f.flip_x(op.q0); f.flip_z(op.q0); }
      break;
    }
    case GateKind::S: case GateKind::SDag:
      if (f.get_x(op.q0)) f.flip_z(op.q0);
      break;
    case GateKind::SqrtX: case GateKind::SqrtXDag:
      if (f.get_z(op.q0)) f.flip_x(op.q0);
      break;
    case GateKind::X: case GateKind::Y: case GateKind::Z:
      break;
    case GateKind::CZ:
      if (f.get_x(op.q1)) f.flip_z(op.q0);
      if (f.get_x(op.q0)) f.flip_z(op.q1);
      break;
    case GateKind::CNot:
      if (f.get_x(op.q0)) f.flip_x(op.q1);
      if (f.get_z(op.q1)) f.flip_z(op.q0);
      break;
    case GateKind::PrepZ:
      f.clear_q(op.q0);
      break;
    case GateKind::MeasX:
      if (f.get_z(op.q0)) meas_flips.flip_x(op.q0);
      break;
    case GateKind::MeasY:
      if (f.get_z(op.q0) ^ f.get_x(op.q0)) meas_flips.flip_x(op.q0);
      break;
    case GateKind::MeasZ:
      if (f.get_x(op.q0)) meas_flips.flip_x(op.q0);
      break;
    default:
      break;
  }
}

}  // namespace detail

inline std::vector<ShotRecord> frame_sample(const Circuit& c, const NoiseModel& noise,
                                            const ReadoutPlan& plan, size_t shots,
                                            uint64_t seed, uint64_t stream = 0) {
  noise.check();
  auto fc = detail::compile_frame_circuit(c, noise);

  // support masks packed into two words
  auto pack = [&](const BitVec& v) {
    std::array<uint64_t, 2> m{0, 0};
    for (auto q : v.ones()) m[q >> 6] |= 1ull << (q & 63);
    return m;
  };
  std::vector<std::array<uint64_t, 2>> det_masks, log_masks;
  for (const auto& s : plan.detector_supports) det_masks.push_back(pack(s));
  for (const auto& s : plan.logical_supports) log_masks.push_back(pack(s));

  // pre-draw firing events per location, bucketed by shot
  struct Event { uint32_t shot; uint32_t layer; uint32_t loc; };
  std::vector<Event> events;
  Rng erng(seed, stream * 2 + 1);
  for (uint32_t li = 0; li < fc.layer_errs.size(); li++)
    for (uint32_t ei = 0; ei < fc.layer_errs[li].size(); ei++)
      detail::for_each_firing(erng, shots, fc.layer_errs[li][ei].p,
                              [&](size_t s) { events.push_back({(uint32_t)s, li, ei}); });
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    return a.shot != b.shot ? a.shot < b.shot : a.layer < b.layer;
  });

  Rng lrng(seed, stream * 2 + 2);  // letters for fired locations
  std::vector<ShotRecord> out(shots);
  size_t ev = 0;
  for (size_t s = 0; s < shots; s++) {
    size_t ev_end = ev;
    while (ev_end < events.size() && events[ev_end].shot == s) ev_end++;
    if (ev_end == ev) { ev = ev_end; continue; }  // no errors: all-zero record

    detail::Frame frame, readout_flips;
    size_t op_at = 0;
    size_t evp = ev;
    for (uint32_t li = 0; li < fc.layer_op_end.size(); li++) {
      for (; op_at < fc.layer_op_end[li]; op_at++)
        detail::frame_apply(frame, fc.ops[op_at], readout_flips);
      for (; evp < ev_end && events[evp].layer == li; evp++) {
        const auto& loc = fc.layer_errs[li][events[evp].loc];
        switch (loc.kind) {
          case detail::FrameCircuit::ErrLoc::OneQ: {
            switch (lrng.next_below(3)) {
              case 0: frame.flip_x(loc.q0); break;                         // X
              case 1: frame.flip_x(loc.q0); frame.flip_z(loc.q0); break;   // Y
              default: frame.flip_z(loc.q0); break;                        // Z
            }
            break;
          }
          case detail::FrameCircuit::ErrLoc::TwoQ: {
            // biased two-qubit channel: bias_zz on {ZI, IZ, ZZ}, rest uniform
            double u = lrng.next_double();
            static const char* zset[3] = {"ZI", "IZ", "ZZ"};
            static const char* rest[12] = {"IX", "IY", "XI", "XX", "XY", "XZ",
                                           "YI", "YX", "YY", "YZ", "ZX", "ZY"};
            const char* pp = u < noise.bias_zz ? zset[lrng.next_below(3)]
                                               : rest[lrng.next_below(12)];
            auto put = [&](uint32_t q, char l) {
              if (l == 'X' || l == 'Y') frame.flip_x(q);
              if (l == 'Z' || l == 'Y') frame.flip_z(q);
            };
            put(loc.q0, pp[0]);
            put(loc.q1, pp[1]);
            break;
          }
          case detail::FrameCircuit::ErrLoc::PrepX:
            frame.flip_x(loc.q0);
            break;
          case detail::FrameCircuit::ErrLoc::MoveZ:
            frame.flip_z(loc.q0);
            break;
          case detail::FrameCircuit::ErrLoc::MeasFlip:
            readout_flips.flip_x(fc.meas_qubit[loc.q0]);
            break;
        }
      }
    }

    ShotRecord rec;
    auto parity = [&](const std::array<uint64_t, 2>& m) {
      return (std::popcount(readout_flips.x[0] & m[0]) +
              std::popcount(readout_flips.x[1] & m[1])) & 1;
    };
    for (size_t i = 0; i < det_masks.size(); i++)
      if (parity(det_masks[i])) rec.detectors |= 1ull << i;
    for (size_t i = 0; i < log_masks.size(); i++)
      if (parity(log_masks[i])) rec.logicals |= 1ull << i;
    out[s] = rec;
    ev = ev_end;
  }
  return out;
}

// --- text dump: one mechanism per line -----------------------------------

inline void write_detector_model(std::ostream& os, const DetectorModel& m) {
  os << "detectors " << m.n_detectors << " logicals " << m.n_logicals << "\n";
  for (size_t j = 0; j < m.n_mechanisms(); j++) {
    os << m.p[j];
    for (uint32_t i = 0; i < m.n_detectors; i++)
      if (m.det_cols[j] >> i & 1) os << " D" << i;
    for (uint32_t i = 0; i < m.n_logicals; i++)
      if (m.log_cols[j] >> i & 1) os << " L" << i;
    os << "\n";
  }
}

}  // namespace fiveq
