#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "fiveq/circuit.hpp"
#include "fiveq/codes.hpp"
#include "fiveq/dense.hpp"
#include "fiveq/rng.hpp"
#include "fiveq/tableau.hpp"

namespace fiveq {

// Binary matrix driving injection synthesis: rows = data qubits, columns =
// checks of the self-dual code followed by logical operators.  Stored
// column-major (each column is a BitVec over the rows).
struct ReductionMatrix {
  uint32_t n_rows = 0;
  uint32_t n_checks = 0;
  std::vector<BitVec> cols;  // checks first, then logicals

  uint32_t n_cols() const { return (uint32_t)cols.size(); }
  bool is_logical_col(uint32_t c) const { return c >= n_checks; }

  void row_op(uint32_t src, uint32_t dst) {
    for (auto& col : cols)
      if (col.get(src)) col.flip(dst);
  }

  // column op: add check column src into column dst
  void col_op(uint32_t src, uint32_t dst) {
    cols[dst] ^= cols[src];
  }

  size_t total_ones() const {
    size_t c = 0;
    for (const auto& col : cols) c += col.popcount();
    return c;
  }

  // every column weight 1, all host rows distinct
  bool fully_reduced() const {
    BitVec hosts(n_rows);
    for (const auto& col : cols) {
      if (col.popcount() != 1) return false;
      uint32_t r = col.ones()[0];
      if (hosts.get(r)) return false;
      hosts.set(r, true);
    }
    return true;
  }
};

inline ReductionMatrix initial_matrix(const CssCode& code) {
  if (!code.self_dual())
    throw std::invalid_argument("synthesis requires a self-dual CSS code");
  ReductionMatrix m;
  m.n_rows = code.n;
  m.n_checks = (uint32_t)code.z_checks.size();
  for (const auto& ch : code.z_checks) m.cols.push_back(ch);
  for (const auto& lz : code.logical_z) m.cols.push_back(lz);
  return m;
}

struct RowOp {
  uint32_t src, dst;
  bool operator==(const RowOp& o) const { return src == o.src && dst == o.dst; }
};

struct RowOpSequence {
  std::vector<RowOp> ops;
  std::vector<uint32_t> layer_sizes;  // partition of ops, in order

  size_t n_layers() const { return layer_sizes.size(); }

  std::vector<std::vector<RowOp>> layers() const {
    std::vector<std::vector<RowOp>> out;
    size_t at = 0;
    for (auto sz : layer_sizes) {
      out.emplace_back(ops.begin() + at, ops.begin() + at + sz);
      at += sz;
    }
    return out;
  }
};

struct ColumnOp {
  uint32_t src, dst;  // src must be a check column
};

struct ReduceResult {
  bool success = false;
  RowOpSequence seq;
  std::vector<ColumnOp> col_ops;
  ReductionMatrix final;
};

// Greedily partitions a flat op list into layers (no row reused in a layer).
// The published op lists partition this way into their stated layer counts.
inline std::vector<uint32_t> greedy_layer_partition(const std::vector<RowOp>& ops, uint32_t n_rows) {
  std::vector<uint32_t> sizes;
  BitVec used(n_rows);
  uint32_t cur = 0;
  for (const auto& op : ops) {
    if (used.get(op.src) || used.get(op.dst)) {
      sizes.push_back(cur);
      cur = 0;
      used.clear();
    }
    used.set(op.src, true);
    used.set(op.dst, true);
    cur++;
  }
  if (cur) sizes.push_back(cur);
  return sizes;
}

// Applies ops (and then eager logical-column cleanup) to the code's initial
// matrix; used by the golden tests that replay published sequences.
inline ReduceResult replay_reduction(const CssCode& code, const std::vector<RowOp>& ops,
                                     const std::vector<ColumnOp>& col_ops = {}) {
  ReduceResult r;
  ReductionMatrix m = initial_matrix(code);
  for (const auto& op : ops) m.row_op(op.src, op.dst);
  for (const auto& c : col_ops) m.col_op(c.src, c.dst);
  r.col_ops = col_ops;
  // eager cleanup: add weight-1 check columns into logicals when it helps
  bool changed = true;
  while (changed) {
    changed = false;
    for (uint32_t c = 0; c < m.n_checks; c++) {
      for (uint32_t l = m.n_checks; l < m.n_cols(); l++) {
        BitVec sum = m.cols[l] ^ m.cols[c];
        if (sum.popcount() < m.cols[l].popcount()) {
          m.col_op(c, l);
          r.col_ops.push_back({c, l});
          changed = true;
        }
      }
    }
  }
  r.seq.ops = ops;
  r.seq.layer_sizes = greedy_layer_partition(ops, m.n_rows);
  r.final = m;
  r.success = m.fully_reduced();
  return r;
}

struct ReduceBudget {
  int alternatives = 3;         // branching at each decision
  size_t node_budget = 100000;  // search nodes
  uint64_t seed = 0;
  int restarts = 12;
};

namespace detail {

struct SynthState {
  ReductionMatrix m;
  std::vector<RowOp> ops;
  std::vector<uint32_t> layer_sizes;
  std::vector<ColumnOp> col_ops;
  BitVec layer_used;
  uint32_t cur_layer_ops = 0;

  explicit SynthState(const ReductionMatrix& m0)
      : m(m0), layer_used(m0.n_rows) {}

  void close_layer() {
    if (cur_layer_ops) {
      layer_sizes.push_back(cur_layer_ops);
      cur_layer_ops = 0;
      layer_used.clear();
    }
  }

  void eager_col_ops() {
    bool changed = true;
    while (changed) {
      changed = false;
      for (uint32_t c = 0; c < m.n_checks; c++)
        for (uint32_t l = m.n_checks; l < m.n_cols(); l++) {
          BitVec sum = m.cols[l] ^ m.cols[c];
          if (sum.popcount() < m.cols[l].popcount()) {
            m.col_op(c, l);
            col_ops.push_back({c, l});
            changed = true;
          }
        }
    }
  }
};

struct ScoredOp {
  RowOp op;
  long score;
  bool operator<(const ScoredOp& o) const {
    if (score != o.score) return score > o.score;
    if (op.src != o.op.src) return op.src < o.op.src;
    return op.dst < o.op.dst;
  }
};

// Heuristic score of a row op on the current matrix, higher = better:
// weight reduction dominates, removing ones from heavy columns and leaving
// the target row similar to some other row break ties.
inline std::optional<long> score_op(const ReductionMatrix& m, uint32_t s, uint32_t t) {
  long delta = 0, heavy = 0;
  for (uint32_t c = 0; c < m.n_cols(); c++) {
    const BitVec& col = m.cols[c];
    if (!col.get(s)) continue;
    long w = (long)col.popcount();
    if (col.get(t)) { delta -= 1; heavy += w; }
    else { delta += 1; heavy -= w; }
  }
  if (delta > 0) return std::nullopt;  // must reduce or maintain total ones
  // similarity of updated row t to other rows (small Hamming distance)
  long best_sim = 0;
  for (uint32_t r = 0; r < m.n_rows; r++) {
    if (r == t) continue;
    long ham = 0;
    for (uint32_t c = 0; c < m.n_cols(); c++) {
      bool nt = m.cols[c].get(t) ^ m.cols[c].get(s);
      if (nt != m.cols[c].get(r)) ham++;
    }
    best_sim = std::max(best_sim, (long)m.n_cols() - ham);
  }
  return -delta * 256 + heavy * 8 + best_sim;
}

inline std::vector<ScoredOp> candidates(const SynthState& st) {
  std::vector<ScoredOp> out;
  for (uint32_t s = 0; s < st.m.n_rows; s++) {
    if (st.layer_used.get(s)) continue;
    bool src_nonzero = false;
    for (uint32_t c = 0; c < st.m.n_cols() && !src_nonzero; c++)
      src_nonzero = st.m.cols[c].get(s);
    if (!src_nonzero) continue;
    for (uint32_t t = 0; t < st.m.n_rows; t++) {
      if (t == s || st.layer_used.get(t)) continue;
      if (auto sc = score_op(st.m, s, t)) out.push_back({{s, t}, *sc});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct SearchCtx {
  size_t nodes = 0;
  size_t node_budget;
  ReduceResult best;
  Rng* rng;
  bool randomize;

  bool better(const SynthState& st) const {
    if (!best.success) return true;
    size_t bl = best.seq.layer_sizes.size(), bo = best.seq.ops.size();
    size_t nl = st.layer_sizes.size(), no = st.ops.size();
    return nl < bl || (nl == bl && no < bo);
  }
};

inline void dfs(SynthState st, SearchCtx& ctx, int alternatives) {
  if (ctx.nodes++ > ctx.node_budget) return;
  st.eager_col_ops();
  if (st.m.fully_reduced()) {
    st.close_layer();
    if (ctx.better(st)) {
      ctx.best.success = true;
      ctx.best.seq.ops = st.ops;
      ctx.best.seq.layer_sizes = st.layer_sizes;
      ctx.best.col_ops = st.col_ops;
      ctx.best.final = st.m;
    }
    return;
  }
  // prune on layer count
  size_t committed = st.layer_sizes.size() + (st.cur_layer_ops ? 1 : 0);
  if (ctx.best.success && committed > ctx.best.seq.layer_sizes.size()) return;

  auto cands = candidates(st);
  if (cands.empty()) {
    if (st.cur_layer_ops == 0) return;  // stuck
    SynthState nx = st;
    nx.close_layer();
    dfs(std::move(nx), ctx, alternatives);
    return;
  }
  int take = std::min<int>(alternatives, (int)cands.size());
  if (ctx.randomize && cands.size() > 1) {
    // shuffle the window a little to vary restarts
    for (int i = 0; i < take; i++) {
      int j = (int)ctx.rng->next_below(std::min<size_t>(cands.size(), take + 2));
      std::swap(cands[i], cands[j]);
    }
  }
  for (int i = 0; i < take; i++) {
    SynthState nx = st;
    nx.m.row_op(cands[i].op.src, cands[i].op.dst);
    nx.ops.push_back(cands[i].op);
    nx.layer_used.set(cands[i].op.src, true);
    nx.layer_used.set(cands[i].op.dst, true);
    nx.cur_layer_ops++;
    dfs(std::move(nx), ctx, alternatives);
    if (ctx.nodes > ctx.node_budget) return;
  }
  // also consider closing the layer early when it already has ops
  if (st.cur_layer_ops) {
    SynthState nx = st;
    nx.close_layer();
    dfs(std::move(nx), ctx, alternatives);
  }
}

}  // namespace detail

// Row-reduction synthesis: scored greedy over layers with depth-limited
// backtracking, plus seeded randomized restarts.  Minimizes layer count,
// then op count.
inline ReduceResult reduce(const CssCode& code, const ReduceBudget& budget = {}) {
  ReductionMatrix m0 = initial_matrix(code);
  detail::SearchCtx ctx{0, budget.node_budget, {}, nullptr, false};
  Rng rng(budget.seed);
  ctx.rng = &rng;
  ctx.best.final = m0;

  detail::dfs(detail::SynthState(m0), ctx, budget.alternatives);
  for (int r = 0; r < budget.restarts; r++) {
    ctx.randomize = true;
    ctx.nodes = 0;
    detail::dfs(detail::SynthState(m0), ctx, budget.alternatives);
  }
  if (!ctx.best.success)
    throw std::runtime_error("reduce: budget exhausted without full reduction");
  return ctx.best;
}

// --- circuit emission -------------------------------------------------------

// Input preparation program for the injected qubit, applied after PrepZ.
inline std::vector<GateKind> injected_prep_program(char state) {
  switch (state) {
    case '0': return {};
    case '1': return {GateKind::X};
    case '+': return {GateKind::SqrtY};
    case 'i': return {GateKind::SqrtY, GateKind::S};  // |+i> = S|+>
    case 'm': return {GateKind::MagicPrep};
    default: throw std::invalid_argument("bad injected state tag");
  }
}

// Builds the hardware-form injection circuit: |+> on check-host rows, the
// injected state on the logical-host row, |0> elsewhere, CNOTs in reverse op
// order rewritten as sqrtY^dag . CZ . sqrtY with adjacent sqrtY cancellation.
inline Circuit circuit_from_rops(const RowOpSequence& seq, const ReductionMatrix& final,
                                 const std::vector<GateKind>& injected_prep,
                                 double rz_angle = 0.0) {
  for (const auto& col : final.cols)
    if (col.popcount() != 1)
      throw std::invalid_argument("circuit_from_rops: final matrix not weight-1");

  uint32_t n = final.n_rows;
  Circuit c;
  c.n_qubits = n;

  std::vector<uint32_t> check_hosts, logical_hosts;
  for (uint32_t i = 0; i < final.n_cols(); i++) {
    uint32_t host = final.cols[i].ones()[0];
    (final.is_logical_col(i) ? logical_hosts : check_hosts).push_back(host);
  }
  c.injected_qubits = logical_hosts;
  c.block_of.assign(n, 0);

  // prep layer
  Layer& prep = c.append_layer();
  prep.input_prologue = true;
  for (uint32_t q = 0; q < n; q++) prep.gates.push_back({GateKind::PrepZ, q});

  // injected-state program (non-Clifford allowed only here)
  for (GateKind g : injected_prep) {
    Layer& l = c.append_layer();
    l.input_prologue = true;
    for (uint32_t q : logical_hosts) l.gates.push_back({g, q});
  }
  if (rz_angle != 0.0) {
    Layer& l = c.append_layer();
    l.input_prologue = true;
    for (uint32_t q : logical_hosts) l.gates.push_back({Gate{GateKind::Rz, q, kNoQubit, rz_angle}});
  }

  // pending sqrtY power per qubit: +1 emits SqrtY, -1 emits SqrtYDag
  std::vector<int> pending(n, 0);
  for (uint32_t q : check_hosts) pending[q] += 1;  // |+> = sqrtY |0>

  auto layers = seq.layers();
  bool first_local = true;
  for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
    for (const auto& op : *it) pending[op.dst] -= 1;
    Layer loc;
    loc.global = first_local;  // first rotation layer is a global pulse
    for (uint32_t q = 0; q < n; q++) {
      if (pending[q] == 1) loc.gates.push_back({GateKind::SqrtY, q});
      else if (pending[q] == -1) loc.gates.push_back({GateKind::SqrtYDag, q});
      else if (pending[q] != 0) throw std::logic_error("sqrtY pending out of range");
      pending[q] = 0;
    }
    if (!loc.gates.empty()) {
      c.layers.push_back(std::move(loc));
      first_local = false;
    }
    Layer& cz = c.append_layer();
    for (const auto& op : *it) {
      cz.gates.push_back({GateKind::CZ, op.src, op.dst});
      cz.moved.push_back(op.src);
    }
    for (const auto& op : *it) pending[op.dst] += 1;
  }
  Layer tail;
  for (uint32_t q = 0; q < n; q++) {
    if (pending[q] == 1) tail.gates.push_back({GateKind::SqrtY, q});
    else if (pending[q] == -1) tail.gates.push_back({GateKind::SqrtYDag, q});
  }
  if (!tail.gates.empty()) c.layers.push_back(std::move(tail));

  c.validate();
  return c;
}

// --- verification -----------------------------------------------------------

struct InjectionReport {
  bool ok = true;
  std::string first_failure;

  void fail(const std::string& s) {
    if (ok) { ok = false; first_failure = s; }
  }
};

namespace detail {

inline PauliString op_from_support(uint32_t n, const BitVec& sup, char letter) {
  PauliString p(n);
  for (auto q : sup.ones()) p.set_letter(q, letter);
  return p;
}

}  // namespace detail

// Checks that the circuit prepares the logical code state: for injected
// |0>, |+>, |+i> all code stabilizers read +1 and the matching logical
// operator reads +1.  Tableau for all three; dense cross-check when n <= 12.
inline InjectionReport verify_injection(const Circuit& body, const CssCode& code) {
  InjectionReport rep;
  if (body.injected_qubits.size() != 1) {
    rep.fail("expected exactly one injected qubit");
    return rep;
  }
  uint32_t inj = body.injected_qubits[0];
  struct Case { char tag; char basis; };
  for (Case cs : {Case{'0', 'Z'}, Case{'+', 'X'}, Case{'i', 'Y'}}) {
    Circuit c = body;
    // splice the input program right after the prep layer
    std::vector<Layer> prog;
    for (GateKind g : injected_prep_program(cs.tag)) {
      Layer l; l.input_prologue = true;
      l.gates.push_back({g, inj});
      prog.push_back(l);
    }
    c.layers.insert(c.layers.begin() + 1, prog.begin(), prog.end());

    auto run = tableau_run(c, 7);
    for (size_t i = 0; i < code.z_checks.size(); i++) {
      auto zo = detail::op_from_support(code.n, code.z_checks[i], 'Z');
      auto xo = detail::op_from_support(code.n, code.x_checks[i], 'X');
      if (run.tableau.expectation(zo) != +1)
        rep.fail("Z check " + std::to_string(i) + " not +1 for input " + cs.tag);
      if (run.tableau.expectation(xo) != +1)
        rep.fail("X check " + std::to_string(i) + " not +1 for input " + cs.tag);
    }
    MeasurementSpec spec = measurement_spec(code, cs.basis);
    if (run.tableau.expectation(spec.logical_op) != +1)
      rep.fail(std::string("logical ") + cs.basis + " not +1 for input " + cs.tag);

    if (code.n <= DenseState::kMaxQubits) {
      DenseState in(code.n);
      auto dr = dense_run(c, std::move(in), 7);
      for (size_t i = 0; i < code.z_checks.size(); i++) {
        auto zo = detail::op_from_support(code.n, code.z_checks[i], 'Z');
        if (std::abs(pauli_expectation(dr.state, zo).real() - 1.0) > 1e-9)
          rep.fail("dense Z check " + std::to_string(i) + " off +1 for input " + cs.tag);
      }
      if (std::abs(pauli_expectation(dr.state, spec.logical_op).real() - 1.0) > 1e-9)
        rep.fail(std::string("dense logical ") + cs.basis + " off +1 for input " + cs.tag);
    }
  }
  return rep;
}

// --- atom order -------------------------------------------------------------

// Validity of a linear atom order for the given CZ layers: within each layer,
// gates sorted by their smaller endpoint must have strictly increasing larger
// endpoints (moves never reorder atoms).
inline bool check_order(const std::vector<std::vector<std::pair<uint32_t, uint32_t>>>& layers,
                        const std::vector<uint32_t>& order) {
  // order[q] = position of qubit q
  for (const auto& layer : layers) {
    std::vector<std::pair<uint32_t, uint32_t>> mapped;
    for (auto [a, b] : layer) {
      uint32_t i = order[a], j = order[b];
      mapped.push_back({std::min(i, j), std::max(i, j)});
    }
    std::sort(mapped.begin(), mapped.end());
    for (size_t g = 1; g < mapped.size(); g++)
      if (mapped[g].second <= mapped[g - 1].second) return false;
  }
  return true;
}

inline std::vector<std::vector<std::pair<uint32_t, uint32_t>>> cz_layers_of(const Circuit& c) {
  std::vector<std::vector<std::pair<uint32_t, uint32_t>>> out;
  for (const auto& l : c.layers) {
    std::vector<std::pair<uint32_t, uint32_t>> layer;
    for (const auto& g : l.gates)
      if (g.kind == GateKind::CZ || g.kind == GateKind::CNot)
        layer.push_back({g.q0, g.q1});
    if (!layer.empty()) out.push_back(std::move(layer));
  }
  return out;
}

namespace detail {
inline long order_displacement(const std::vector<std::vector<std::pair<uint32_t, uint32_t>>>& layers,
                               const std::vector<uint32_t>& order) {
  long d = 0;
  for (const auto& layer : layers)
    for (auto [a, b] : layer)
      d += std::abs((long)order[a] - (long)order[b]) - 1;
  return d;
}
}  // namespace detail

// Searches for a valid atom order: exhaustive for n <= 8, randomized local
// search (swap moves, restarts) above.  Returns the valid order of minimum
// total displacement found, or nullopt.
inline std::optional<std::vector<uint32_t>> search_order(
    const std::vector<std::vector<std::pair<uint32_t, uint32_t>>>& layers, uint32_t n,
    uint64_t seed = 0) {
  if (n > 20) throw std::invalid_argument("search_order: n too large");
  std::vector<uint32_t> order(n);
  for (uint32_t i = 0; i < n; i++) order[i] = i;

  if (n <= 8) {
    std::optional<std::vector<uint32_t>> best;
    long best_d = 0;
    std::vector<uint32_t> perm = order;
    do {
      if (check_order(layers, perm)) {
        long d = detail::order_displacement(layers, perm);
        if (!best || d < best_d) { best = perm; best_d = d; }
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
  }

  Rng rng(seed);
  std::optional<std::vector<uint32_t>> best;
  long best_d = 0;
  for (int restart = 0; restart < 200; restart++) {
    std::vector<uint32_t> perm = order;
    for (uint32_t i = n - 1; i > 0; i--)
      std::swap(perm[i], perm[rng.next_below(i + 1)]);
    if (restart == 0) perm = order;  // identity first: published labelings use it
    for (int step = 0; step < 4000; step++) {
      if (check_order(layers, perm)) {
        long d = detail::order_displacement(layers, perm);
        if (!best || d < best_d) { best = perm; best_d = d; }
        break;
      }
      uint32_t i = (uint32_t)rng.next_below(n), j = (uint32_t)rng.next_below(n);
      std::swap(perm[i], perm[j]);
    }
  }
  return best;
}

}  // namespace fiveq
