#pragma once

#include <bit>
#include <cstdint>
#include <vector>

namespace fiveq {

// Word-packed bit vector used for Pauli supports and GF(2) rows.
class BitVec {
 public:
  BitVec() = default;
  explicit BitVec(size_t n) : n_(n), w_((n + 63) / 64, 0) {}

  size_t size() const { return n_; }
  size_t words() const { return w_.size(); }
  uint64_t word(size_t i) const { return w_[i]; }
  uint64_t& word(size_t i) { return w_[i]; }

  bool get(size_t i) const { return (w_[i >> 6] >> (i & 63)) & 1; }
  void set(size_t i, bool v) {
    uint64_t m = 1ull << (i & 63);
    if (v) w_[i >> 6] |= m; else w_[i >> 6] &= ~m;
  }
  void flip(size_t i) { w_[i >> 6] ^= 1ull << (i & 63); }

  void clear() { for (auto& w : w_) w = 0; }

  BitVec& operator^=(const BitVec& o) {
    for (size_t i = 0; i < w_.size(); i++) w_[i] ^= o.w_[i];
    return *this;
  }
  BitVec& operator&=(const BitVec& o) {
    for (size_t i = 0; i < w_.size(); i++) w_[i] &= o.w_[i];
    return *this;
  }
  BitVec& operator|=(const BitVec& o) {
    for (size_t i = 0; i < w_.size(); i++) w_[i] |= o.w_[i];
    return *this;
  }

  friend BitVec operator^(BitVec a, const BitVec& b) { a ^= b; return a; }
  friend BitVec operator&(BitVec a, const BitVec& b) { a &= b; return a; }

  bool operator==(const BitVec& o) const { return n_ == o.n_ && w_ == o.w_; }

  size_t popcount() const {
    size_t c = 0;
    for (auto w : w_) c += std::popcount(w);
    return c;
  }

  bool any() const {
    for (auto w : w_) if (w) return true;
    return false;
  }

  static size_t and_popcount(const BitVec& a, const BitVec& b) {
    size_t c = 0;
    for (size_t i = 0; i < a.w_.size(); i++) c += std::popcount(a.w_[i] & b.w_[i]);
    return c;
  }

  std::vector<uint32_t> ones() const {
    std::vector<uint32_t> out;
    for (size_t i = 0; i < n_; i++) if (get(i)) out.push_back((uint32_t)i);
    return out;
  }

 private:
  size_t n_ = 0;
  std::vector<uint64_t> w_;
};

// Row-reduces a list of BitVec rows in place; returns the rank.
inline size_t gf2_rank(std::vector<BitVec> rows) {
  size_t rank = 0;
  size_t ncols = rows.empty() ? 0 : rows[0].size();
  for (size_t c = 0; c < ncols && rank < rows.size(); c++) {
    size_t piv = rank;
    while (piv < rows.size() && !rows[piv].get(c)) piv++;
    if (piv == rows.size()) continue;
    std::swap(rows[rank], rows[piv]);
    for (size_t i = 0; i < rows.size(); i++)
      if (i != rank && rows[i].get(c)) rows[i] ^= rows[rank];
    rank++;
  }
  return rank;
}

// Is v in the row span of basis?  basis need not be reduced.
inline bool gf2_in_span(const std::vector<BitVec>& basis, const BitVec& v) {
  std::vector<BitVec> rows = basis;
  rows.push_back(v);
  return gf2_rank(rows) == gf2_rank(basis);
}

}  // namespace fiveq
