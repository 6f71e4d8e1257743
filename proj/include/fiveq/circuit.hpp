#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "fiveq/pauli.hpp"

namespace fiveq {

constexpr uint32_t kNoQubit = 0xffffffffu;

struct Gate {
  GateKind kind;
  uint32_t q0;
  uint32_t q1 = kNoQubit;
  double angle = 0.0;  // Rz only

  bool two_qubit() const { return q1 != kNoQubit; }
};

// One parallel slice of a circuit.  `moved` lists qubits transported in the
// rearrangement window attached to this layer (entangling layers); `global`
// marks layers implemented by a global pulse rather than local addressing.
struct Layer {
  std::vector<Gate> gates;
  std::vector<uint32_t> moved;
  bool global = false;
  bool input_prologue = false;  // state preparation segment, error-free
};

struct Circuit {
  uint32_t n_qubits = 0;
  std::vector<Layer> layers;

  // role annotations
  std::vector<uint32_t> block_of;        // logical block id per qubit
  std::vector<uint32_t> injected_qubits; // physical qubits carrying input states

  Layer& append_layer() {
    layers.emplace_back();
    return layers.back();
  }

  void validate() const {
    for (const auto& layer : layers) {
      std::unordered_set<uint32_t> used;
      for (const auto& g : layer.gates) {
        if (g.q0 >= n_qubits || (g.two_qubit() && g.q1 >= n_qubits))
          throw std::invalid_argument("circuit: qubit out of range");
        if (!used.insert(g.q0).second)
          throw std::invalid_argument("circuit: qubit reused within a layer");
        if (g.two_qubit() && !used.insert(g.q1).second)
          throw std::invalid_argument("circuit: qubit reused within a layer");
      }
    }
  }

  size_t gate_count(GateKind k) const {
    size_t c = 0;
    for (const auto& l : layers)
      for (const auto& g : l.gates)
        if (g.kind == k) c++;
    return c;
  }

  size_t entangling_layer_count() const {
    size_t c = 0;
    for (const auto& l : layers) {
      bool ent = false;
      for (const auto& g : l.gates) ent |= gate_is_two_qubit(g.kind);
      c += ent;
    }
    return c;
  }
};

namespace detail {
inline const char* gate_name(GateKind k) {
  switch (k) {
    case GateKind::PrepZ: return "PREPZ";
    case GateKind::H: return "H";
    case GateKind::S: return "S";
    case GateKind::SDag: return "SDAG";
    case GateKind::SqrtX: return "SQRTX";
    case GateKind::SqrtXDag: return "SQRTXDAG";
    case GateKind::SqrtY: return "SQRTY";
    case GateKind::SqrtYDag: return "SQRTYDAG";
    case GateKind::X: return "X";
    case GateKind::Y: return "Y";
    case GateKind::Z: return "Z";
    case GateKind::CZ: return "CZ";
    case GateKind::CNot: return "CNOT";
    case GateKind::Rz: return "RZ";
    case GateKind::MagicPrep: return "MAGICPREP";
    case GateKind::MeasX: return "MX";
    case GateKind::MeasY: return "MY";
    case GateKind::MeasZ: return "MZ";
  }
  return "?";
}

inline bool gate_from_name(const std::string& s, GateKind& out) {
  static const std::pair<const char*, GateKind> table[] = {
      {"PREPZ", GateKind::PrepZ}, {"H", GateKind::H}, {"S", GateKind::S},
      {"SDAG", GateKind::SDag}, {"SQRTX", GateKind::SqrtX},
      {"SQRTXDAG", GateKind::SqrtXDag}, {"SQRTY", GateKind::SqrtY},
      {"SQRTYDAG", GateKind::SqrtYDag}, {"X", GateKind::X},
      {"Y", GateKind::Y}, {"Z", GateKind::Z}, {"CZ", GateKind::CZ},
      {"CNOT", GateKind::CNot}, {"RZ", GateKind::Rz},
      {"MAGICPREP", GateKind::MagicPrep}, {"MX", GateKind::MeasX},
      {"MY", GateKind::MeasY}, {"MZ", GateKind::MeasZ}};
  for (auto& [name, kind] : table)
    if (s == name) { out = kind; return true; }
  return false;
}
}  // namespace detail

// Line-based interchange format: QUBITS header, LAYER k headers, one gate per
// line, `# role:` / `# move:` annotation lines.
inline void write_circuit(std::ostream& os, const Circuit& c) {
  os << "QUBITS " << c.n_qubits << "\n";
  if (!c.injected_qubits.empty()) {
    os << "# role: injected";
    for (auto q : c.injected_qubits) os << " " << q;
    os << "\n";
  }
  if (!c.block_of.empty()) {
    os << "# role: block";
    for (auto b : c.block_of) os << " " << b;
    os << "\n";
  }
  for (size_t i = 0; i < c.layers.size(); i++) {
    const Layer& l = c.layers[i];
    os << "LAYER " << i;
    if (l.global) os << " global";
    if (l.input_prologue) os << " input";
    os << "\n";
    if (!l.moved.empty()) {
      os << "# move:";
      for (auto q : l.moved) os << " " << q;
      os << "\n";
    }
    for (const auto& g : l.gates) {
      os << detail::gate_name(g.kind) << " " << g.q0;
      if (g.two_qubit()) os << " " << g.q1;
      if (g.kind == GateKind::Rz) os << " " << g.angle;
      os << "\n";
    }
  }
}

inline Circuit read_circuit(std::istream& is) {
  Circuit c;
  std::string line;
  Layer* cur = nullptr;
  while (std::getline(is, line)) {
    std::istringstream ss(line);
    std::string tok;
    if (!(ss >> tok)) continue;
    if (tok == "#") {
      std::string kind;
      ss >> kind;
      if (kind == "role:") {
        std::string what;
        ss >> what;
        uint32_t q;
        if (what == "injected")
          while (ss >> q) c.injected_qubits.push_back(q);
        else if (what == "block")
          while (ss >> q) c.block_of.push_back(q);
      } else if (kind == "move:" && cur) {
        uint32_t q;
        while (ss >> q) cur->moved.push_back(q);
      }
      continue;
    }
    if (tok == "QUBITS") {
      ss >> c.n_qubits;
      continue;
    }
    if (tok == "LAYER") {
      cur = &c.append_layer();
      std::string flag;
      ss >> flag;  // index, ignored
      while (ss >> flag) {
        if (flag == "global") cur->global = true;
        if (flag == "input") cur->input_prologue = true;
      }
      continue;
    }
    GateKind k;
    if (!detail::gate_from_name(tok, k))
      throw std::invalid_argument("circuit parse: unknown token " + tok);
    if (!cur) cur = &c.append_layer();
    Gate g{k, 0, kNoQubit, 0.0};
    ss >> g.q0;
    if (gate_is_two_qubit(k)) ss >> g.q1;
    if (k == GateKind::Rz) ss >> g.angle;
    cur->gates.push_back(g);
  }
  c.validate();
  return c;
}

inline std::string circuit_to_string(const Circuit& c) {
  std::ostringstream os;
  write_circuit(os, c);
  return os.str();
}

}  // namespace fiveq
