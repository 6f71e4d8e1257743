#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <unordered_map>
#include <vector>

#include "fiveq/noise.hpp"

namespace fiveq {

constexpr double kGapInfinity = std::numeric_limits<double>::infinity();

// Exact most-likely-error problem: minimize sum_j w_j e_j over GF(2) parity
// constraints rows.e = target, with w_j = log((1-p_j)/p_j) > 0.
struct MleProblem {
  std::vector<uint64_t> cols;   // constraint-row incidence per mechanism
  std::vector<double> w;
  std::vector<uint64_t> log_cols;  // full logical columns, for result assembly
  uint32_t n_rows = 0;

  static MleProblem from_model(const DetectorModel& m,
                               const std::vector<uint32_t>& logical_constraint_bits = {}) {
    MleProblem p;
    p.n_rows = m.n_detectors + (uint32_t)logical_constraint_bits.size();
    if (p.n_rows > 64) throw std::invalid_argument("too many constraint rows");
    for (size_t j = 0; j < m.n_mechanisms(); j++) {
      uint64_t col = m.det_cols[j];
      for (size_t i = 0; i < logical_constraint_bits.size(); i++)
        if (m.log_cols[j] >> logical_constraint_bits[i] & 1)
          col |= 1ull << (m.n_detectors + i);
      p.cols.push_back(col);
      p.w.push_back(std::log((1.0 - m.p[j]) / m.p[j]));
      p.log_cols.push_back(m.log_cols[j]);
    }
    return p;
  }
};

struct DecodeResult {
  uint64_t logical_flips = 0;
  double weight = 0;
  std::optional<double> gap;
  bool accepted = false;
  bool feasible = true;
  std::vector<uint32_t> mechanisms;  // fired set (indices), deterministic tie-break
};

namespace detail {

// Exact depth-first branch and bound over mechanisms covering violated rows.
// Prunes with an admissible fractional set-cover bound and propagates unit
// constraints; ties resolve to the lexicographically smallest fired set.
class MleSolver {
 public:
  explicit MleSolver(const MleProblem& p) : p_(p) {
    row_mechs_.resize(p.n_rows);
    for (uint32_t j = 0; j < p.cols.size(); j++) {
      uint64_t c = p.cols[j];
      while (c) {
        uint32_t r = (uint32_t)std::countr_zero(c);
        row_mechs_[r].push_back(j);
        c &= c - 1;
      }
    }
    share_.resize(p.cols.size());
    for (size_t j = 0; j < p.cols.size(); j++) {
      int d = std::popcount(p.cols[j]);
      share_[j] = d ? p.w[j] / d : 0.0;
    }
  }

  // returns (weight, fired set) or infeasible
  bool solve(uint64_t target, double& best_w, std::vector<uint32_t>& best_set,
             double cutoff = std::numeric_limits<double>::infinity()) {
    best_w_ = cutoff;
    found_ = false;
    avail_.assign(p_.cols.size(), 1);
    cur_.clear();
    dfs(target, 0.0);
    if (found_) { best_w = best_w_; best_set = best_set_; }
    return found_;
  }

 private:
  double lower_bound(uint64_t r) const {
    double lb = 0;
    uint64_t rr = r;
    while (rr) {
      uint32_t row = (uint32_t)std::countr_zero(rr);
      rr &= rr - 1;
      double m = std::numeric_limits<double>::infinity();
      for (uint32_t j : row_mechs_[row])
        if (avail_[j] && share_[j] < m) m = share_[j];
      if (m == std::numeric_limits<double>::infinity()) return m;  // uncoverable
      lb += m;
    }
    return lb;
  }

  void dfs(uint64_t residual, double cost) {
    if (cost > best_w_ + 1e-12) return;  // keep ties alive for the lex tie-break
    if (residual == 0) {
      // lexicographic tie-break on the fired set at equal weight
      if (!found_ || cost < best_w_ - 1e-12 ||
          (cost < best_w_ + 1e-12 && std::lexicographical_compare(cur_.begin(), cur_.end(),
                                                                  best_set_.begin(), best_set_.end()))) {
        best_w_ = std::min(best_w_, cost);
        best_set_ = cur_;
        found_ = true;
      }
      return;
    }
    double lb = lower_bound(residual);
    if (cost + lb > best_w_ + 1e-12) return;

    // unit propagation: a violated row with exactly one available mechanism
    uint64_t rr = residual;
    while (rr) {
      uint32_t row = (uint32_t)std::countr_zero(rr);
      rr &= rr - 1;
      uint32_t last = 0, cnt = 0;
      for (uint32_t j : row_mechs_[row])
        if (avail_[j]) { last = j; if (++cnt > 1) break; }
      if (cnt == 0) return;  // infeasible
      if (cnt == 1) {
        avail_[last] = 0;
        cur_.push_back(last);
        std::sort(cur_.begin(), cur_.end());
        dfs(residual ^ p_.cols[last], cost + p_.w[last]);
        cur_.erase(std::find(cur_.begin(), cur_.end(), last));
        avail_[last] = 1;
        return;
      }
    }

    // branch on the violated row with the fewest available mechanisms
    uint32_t brow = 64, bcnt = UINT32_MAX;
    rr = residual;
    while (rr) {
      uint32_t row = (uint32_t)std::countr_zero(rr);
      rr &= rr - 1;
      uint32_t cnt = 0;
      for (uint32_t j : row_mechs_[row]) cnt += avail_[j];
      if (cnt < bcnt) { bcnt = cnt; brow = row; }
    }
    // the lowest-index fired mechanism in this row is one of the candidates;
    // excluding earlier candidates keeps the enumeration exact and duplicate-free
    std::vector<uint32_t> excluded;
    for (uint32_t j : row_mechs_[brow]) {
      if (!avail_[j]) continue;
      avail_[j] = 0;
      cur_.push_back(j);
      std::sort(cur_.begin(), cur_.end());
      dfs(residual ^ p_.cols[j], cost + p_.w[j]);
      cur_.erase(std::find(cur_.begin(), cur_.end(), j));
      excluded.push_back(j);  // j stays unavailable: later branches fire a later first mech
    }
    for (uint32_t j : excluded) avail_[j] = 1;
  }

  const MleProblem& p_;
  std::vector<std::vector<uint32_t>> row_mechs_;
  std::vector<double> share_;
  std::vector<uint8_t> avail_;
  std::vector<uint32_t> cur_, best_set_;
  double best_w_ = 0;
  bool found_ = false;
};

}  // namespace detail

// Most-likely error for the given syndrome (probability-maximizing
// convention: minimizes sum of log((1-p)/p) over firing sets).
inline DecodeResult mle_solve(const MleProblem& p, uint64_t syndrome) {
  detail::MleSolver solver(p);
  DecodeResult r;
  double w = 0;
  std::vector<uint32_t> set;
  if (!solver.solve(syndrome, w, set)) {
    r.feasible = false;
    return r;
  }
  r.weight = w;
  r.mechanisms = set;
  for (uint32_t j : set) r.logical_flips ^= p.log_cols[j];
  return r;
}

// --- correlated decoder over the factory readout -----------------------------

// Stage selector: factory decoding uses only the four syndrome blocks'
// detectors (postselection must not consume the output block); tomography
// decoding uses everything.
enum class DecodeStage { Factory, Tomography };

struct StageModel {
  DetectorModel model;               // restricted + merged
  std::vector<uint32_t> det_index;   // global detector index per restricted bit
  std::vector<uint32_t> log_index;   // global logical index per restricted bit
  MleProblem problem;                // detector-only constraints
  MleProblem class_problem;          // detectors + all stage logical rows
};

// Splits the full factory detector model into the two decoding stages.
// det split: first 4*n_checks detectors belong to the syndrome blocks.
inline StageModel make_stage_model(const DetectorModel& full, DecodeStage stage,
                                   uint32_t syndrome_detectors) {
  StageModel sm;
  if (stage == DecodeStage::Factory) {
    for (uint32_t i = 0; i < syndrome_detectors; i++) sm.det_index.push_back(i);
    for (uint32_t i = 0; i + 1 < full.n_logicals; i++) sm.log_index.push_back(i);
  } else {
    for (uint32_t i = 0; i < full.n_detectors; i++) sm.det_index.push_back(i);
    for (uint32_t i = 0; i < full.n_logicals; i++) sm.log_index.push_back(i);
  }
  sm.model = full.restrict(sm.det_index, sm.log_index);
  sm.problem = MleProblem::from_model(sm.model);
  std::vector<uint32_t> bits(sm.log_index.size());
  for (uint32_t i = 0; i < bits.size(); i++) bits[i] = i;
  sm.class_problem = MleProblem::from_model(sm.model, bits);
  return sm;
}

inline uint64_t restrict_bits(uint64_t bits, const std::vector<uint32_t>& idx) {
  uint64_t out = 0;
  for (size_t i = 0; i < idx.size(); i++)
    if (bits >> idx[i] & 1) out |= 1ull << i;
  return out;
}

// Expands stage-restricted logical flips back to the global logical bits.
inline uint64_t expand_logicals(uint64_t flips, const std::vector<uint32_t>& idx) {
  uint64_t out = 0;
  for (size_t i = 0; i < idx.size(); i++)
    if (flips >> i & 1) out |= 1ull << idx[i];
  return out;
}

class MleDecoder {
 public:
  MleDecoder(const DetectorModel& full, uint32_t syndrome_detectors)
      : factory_(make_stage_model(full, DecodeStage::Factory, syndrome_detectors)),
        tomo_(make_stage_model(full, DecodeStage::Tomography, syndrome_detectors)) {}

  // Factory stage: decode + logical gap over all 2^4 syndrome-logical classes.
  DecodeResult decode_factory(uint64_t detectors) {
    uint64_t s = restrict_bits(detectors, factory_.det_index);
    auto it = factory_cache_.find(s);
    if (it != factory_cache_.end()) return it->second;

    DecodeResult best = smle_gap(factory_, s);
    best.accepted = best.feasible && (best.logical_flips & 0xF) == 0;
    factory_cache_[s] = best;
    return best;
  }

  DecodeResult decode_tomography(uint64_t detectors) {
    uint64_t s = restrict_bits(detectors, tomo_.det_index);
    auto it = tomo_cache_.find(s);
    if (it != tomo_cache_.end()) return it->second;
    DecodeResult r = mle_solve(tomo_.problem, s);
    r.logical_flips = expand_logicals(r.logical_flips, tomo_.log_index);
    tomo_cache_[s] = r;
    return r;
  }

  // Exposed for tests: class-resolved solve with the gap.  The unconstrained
  // optimum pins the best class; the remaining classes run under a cutoff at
  // the current second-best weight, which prunes them hard.
  static DecodeResult smle_gap(const StageModel& sm, uint64_t syndrome) {
    uint32_t nlog = (uint32_t)sm.log_index.size();
    uint32_t nclasses = 1u << nlog;
    DecodeResult best = mle_solve(sm.problem, syndrome);
    if (!best.feasible) return best;
    uint64_t best_cls = 0;
    for (uint32_t i = 0; i < nlog; i++)
      if (best.logical_flips >> i & 1) best_cls |= 1ull << i;

    detail::MleSolver solver(sm.class_problem);
    double second = kGapInfinity;
    for (uint32_t cls = 0; cls < nclasses; cls++) {
      if (cls == best_cls) continue;
      uint64_t target = syndrome | ((uint64_t)cls << sm.model.n_detectors);
      double w = 0;
      std::vector<uint32_t> set;
      if (solver.solve(target, w, set, second + 1e-9)) second = std::min(second, w);
    }
    best.gap = (second == kGapInfinity) ? kGapInfinity : second - best.weight;
    best.logical_flips = expand_logicals(best.logical_flips, sm.log_index);
    return best;
  }

  const StageModel& factory_stage() const { return factory_; }
  const StageModel& tomography_stage() const { return tomo_; }

 private:
  StageModel factory_, tomo_;
  std::unordered_map<uint64_t, DecodeResult> factory_cache_, tomo_cache_;
};

// --- sampled maximum-likelihood lookup decoder --------------------------------

struct MldTable {
  std::unordered_map<uint64_t, std::array<uint32_t, 32>> tally;  // full syndrome -> flip counts
  uint64_t total_samples = 0;
  uint32_t n_detectors = 0;

  void add(uint64_t syndrome, uint64_t flips) {
    tally[syndrome][flips & 31]++;
    total_samples++;
  }

  void merge(const MldTable& o) {
    for (const auto& [k, v] : o.tally) {
      auto& t = tally[k];
      for (int i = 0; i < 32; i++) t[i] += v[i];
    }
    total_samples += o.total_samples;
  }
};

// Builds the lookup table by streaming detector-model samples.
inline MldTable build_mld(const DetectorModel& m, size_t shots, uint64_t seed) {
  if (m.n_detectors > 24)
    throw std::invalid_argument("MLD table restricted to <= 24 detectors");
  MldTable t;
  t.n_detectors = m.n_detectors;
  const size_t shard = 1 << 20;
  size_t done = 0;
  uint64_t stream = 0;
  while (done < shots) {
    size_t now = std::min(shard, shots - done);
    auto recs = sample(m, now, seed, stream++);
    for (const auto& r : recs) t.add(r.detectors, r.logicals);
    done += now;
  }
  return t;
}

class MldDecoder {
 public:
  MldDecoder(MldTable table, const DetectorModel& full, uint32_t syndrome_detectors)
      : table_(std::move(table)), fallback_(full, syndrome_detectors),
        syndrome_detectors_(syndrome_detectors) {
    build_factory_marginal();
  }

  DecodeResult decode_factory(uint64_t detectors) {
    uint64_t s12 = detectors & ((1ull << syndrome_detectors_) - 1);
    auto it = factory_marginal_.find(s12);
    if (it == factory_marginal_.end()) {
      DecodeResult r = fallback_.decode_factory(detectors);
      r.gap = -kGapInfinity;  // unseen pattern ranks last for postselection
      return r;
    }
    const auto& [counts, score] = it->second;
    uint32_t best = 0;
    for (uint32_t l = 1; l < 16; l++)
      if (counts[l] > counts[best]) best = l;
    DecodeResult r;
    r.logical_flips = best;
    r.weight = 0;
    r.gap = score;  // per-pattern output-fidelity ranking drives postselection
    r.accepted = (best == 0);
    return r;
  }

  DecodeResult decode_tomography(uint64_t detectors) {
    auto it = table_.tally.find(detectors);
    if (it == table_.tally.end()) return fallback_.decode_tomography(detectors);
    const auto& counts = it->second;
    uint32_t best = 0;
    for (uint32_t l = 1; l < 32; l++)
      if (counts[l] > counts[best]) best = l;
    DecodeResult r;
    r.logical_flips = best;
    return r;
  }

  const MldTable& table() const { return table_; }
  MleDecoder& fallback() { return fallback_; }

 private:
  // 12-bit factory marginal: flip counts over the 4 syndrome logicals plus
  // the pattern's estimated output-correctness score used for ranking.
  void build_factory_marginal() {
    uint64_t mask = (1ull << syndrome_detectors_) - 1;
    std::unordered_map<uint64_t, std::pair<std::array<uint64_t, 16>, std::pair<double, double>>> acc;
    for (const auto& [syn, counts] : table_.tally) {
      uint64_t key = syn & mask;
      auto& slot = acc[key];
      // majority output flip for this full pattern
      uint64_t tot = 0;
      std::array<uint64_t, 2> outbit{0, 0};
      for (uint32_t l = 0; l < 32; l++) {
        slot.first[l & 15] += counts[l];
        outbit[(l >> 4) & 1] += counts[l];
        tot += counts[l];
      }
      slot.second.first += (double)std::max(outbit[0], outbit[1]);  // correct
      slot.second.second += (double)tot;
    }
    for (auto& [key, slot] : acc) {
      std::array<uint32_t, 16> c{};
      for (int i = 0; i < 16; i++) c[i] = (uint32_t)std::min<uint64_t>(slot.first[i], UINT32_MAX);
      double score = slot.second.second > 0 ? slot.second.first / slot.second.second : 0.0;
      factory_marginal_[key] = {c, score};
    }
  }

  MldTable table_;
  MleDecoder fallback_;
  uint32_t syndrome_detectors_;
  std::unordered_map<uint64_t, std::pair<std::array<uint32_t, 16>, double>> factory_marginal_;
};

// --- two-stage decoding and the sliding-scale sweep ---------------------------

// Decoder-polymorphic shot decode.  Factory stage sets `accepted` when the
// corrected syndrome-qubit outcome matches its noiseless value (equivalently,
// the decoded syndrome-logical flips vanish); composition with the ideal
// channel re-derives acceptance for magic inputs.
template <typename D>
inline DecodeResult decode_two_stage(const ShotRecord& shot, D& decoder, DecodeStage stage) {
  if (stage == DecodeStage::Factory) return decoder.decode_factory(shot.detectors);
  return decoder.decode_tomography(shot.detectors);
}

struct DecodedShot {
  double confidence = 0;      // MLE: logical gap; MLD: pattern fidelity rank
  uint64_t residual = 0;      // truth XOR decoded flips, 5 bits
  bool syndrome_clean = false;  // factory stage decoded flips == 0
};

template <typename D>
inline std::vector<DecodedShot> decode_records(const std::vector<ShotRecord>& records,
                                               D& decoder) {
  std::vector<DecodedShot> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    DecodeResult f = decode_two_stage(r, decoder, DecodeStage::Factory);
    DecodeResult t = decode_two_stage(r, decoder, DecodeStage::Tomography);
    DecodedShot d;
    d.confidence = f.gap.value_or(kGapInfinity);
    d.residual = r.logicals ^ t.logical_flips;
    d.syndrome_clean = f.accepted;
    out.push_back(d);
  }
  return out;
}

struct SlidingPoint {
  double threshold;
  double accepted_fraction;   // stabilizer cut AND clean factory syndrome
  double stab_fraction;       // stabilizer cut alone
  double output_error;        // residual output-bit flip rate among accepted
};

// Monotone sweep from no stabilizer postselection to the strictest cut the
// confidence values allow.  Shots are ranked by decoder confidence.
inline std::vector<SlidingPoint> sliding_scale(const std::vector<DecodedShot>& shots,
                                               size_t n_points = 25) {
  std::vector<size_t> order(shots.size());
  for (size_t i = 0; i < order.size(); i++) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return shots[a].confidence > shots[b].confidence;
  });
  std::vector<SlidingPoint> curve;
  for (size_t pi = 0; pi < n_points; pi++) {
    size_t keep = shots.size() - (pi * shots.size()) / n_points;  // fraction kept
    if (keep == 0) break;
    double thresh = shots[order[keep - 1]].confidence;
    size_t acc = 0, err = 0;
    for (size_t i = 0; i < keep; i++) {
      const auto& s = shots[order[i]];
      // corrected syndrome outcome equals its noiseless value
      if ((s.residual & 0xF) == 0) {
        acc++;
        err += (s.residual >> 4) & 1;
      }
    }
    SlidingPoint p;
    p.threshold = thresh;
    p.stab_fraction = (double)keep / shots.size();
    p.accepted_fraction = (double)acc / shots.size();
    p.output_error = acc ? (double)err / acc : 0.0;
    curve.push_back(p);
  }
  return curve;
}

}  // namespace fiveq
