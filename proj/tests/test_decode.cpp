#include <catch2/catch_amalgamated.hpp>

#include "fiveq/channel.hpp"
#include "fiveq/decode.hpp"
#include "fiveq/distill.hpp"

using namespace fiveq;

namespace {

DetectorModel tiny_model(std::vector<uint64_t> det, std::vector<uint64_t> log,
                         std::vector<double> p, uint32_t nd, uint32_t nl) {
  DetectorModel m;
  m.n_detectors = nd;
  m.n_logicals = nl;
  m.det_cols = std::move(det);
  m.log_cols = std::move(log);
  m.p = std::move(p);
  m.tags.resize(m.p.size());
  return m;
}

// exhaustive 2^m oracle
std::pair<double, uint64_t> brute_force(const MleProblem& p, uint64_t syndrome) {
  double best = std::numeric_limits<double>::infinity();
  uint64_t best_log = 0;
  for (uint64_t e = 0; e < (1ull << p.cols.size()); e++) {
    uint64_t s = 0, l = 0;
    double w = 0;
    for (size_t j = 0; j < p.cols.size(); j++)
      if (e >> j & 1) { s ^= p.cols[j]; l ^= p.log_cols[j]; w += p.w[j]; }
    if (s == syndrome && w < best - 1e-12) { best = w; best_log = l; }
  }
  return {best, best_log};
}

}  // namespace

TEST_CASE("higher-probability mechanism wins") {
  auto m = tiny_model({1, 1}, {0, 1}, {0.01, 0.001}, 1, 1);
  auto p = MleProblem::from_model(m);
  auto r = mle_solve(p, 1);
  REQUIRE(r.feasible);
  REQUIRE(r.mechanisms == std::vector<uint32_t>{0});
  REQUIRE(r.logical_flips == 0);
}

TEST_CASE("zero syndrome decodes to the empty set") {
  auto m = tiny_model({1, 2, 3}, {0, 1, 1}, {0.01, 0.02, 0.03}, 2, 1);
  auto p = MleProblem::from_model(m);
  auto r = mle_solve(p, 0);
  REQUIRE(r.feasible);
  REQUIRE(r.weight == 0.0);
  REQUIRE(r.mechanisms.empty());
}

TEST_CASE("infeasible syndrome reported as such") {
  auto m = tiny_model({1}, {0}, {0.01}, 2, 1);  // detector 1 untouchable
  auto p = MleProblem::from_model(m);
  auto r = mle_solve(p, 0b10);
  REQUIRE_FALSE(r.feasible);
}

TEST_CASE("exact solver equals exhaustive enumeration on random instances") {
  Rng rng(31337);
  for (int inst = 0; inst < 120; inst++) {
    uint32_t m_count = 4 + (uint32_t)rng.next_below(10);  // up to 13 mechanisms
    uint32_t nd = 2 + (uint32_t)rng.next_below(5);
    std::vector<uint64_t> det, log;
    std::vector<double> p;
    for (uint32_t j = 0; j < m_count; j++) {
      det.push_back(rng.next_below(1ull << nd));
      log.push_back(rng.next_below(4));
      p.push_back(0.001 + 0.3 * rng.next_double());
    }
    auto model = tiny_model(det, log, p, nd, 2);
    // drop benign all-zero columns
    for (size_t j = 0; j < model.p.size();) {
      if (!model.det_cols[j] && !model.log_cols[j]) {
        model.det_cols.erase(model.det_cols.begin() + j);
        model.log_cols.erase(model.log_cols.begin() + j);
        model.p.erase(model.p.begin() + j);
        model.tags.pop_back();
      } else j++;
    }
    auto prob = MleProblem::from_model(model);
    uint64_t syndrome = rng.next_below(1ull << nd);
    auto [bw, bl] = brute_force(prob, syndrome);
    auto r = mle_solve(prob, syndrome);
    if (bw == std::numeric_limits<double>::infinity()) {
      REQUIRE_FALSE(r.feasible);
    } else {
      REQUIRE(r.feasible);
      INFO("instance " << inst << " syndrome " << syndrome);
      REQUIRE(std::abs(r.weight - bw) < 1e-9);
    }
  }
}

TEST_CASE("logical gap: two-mechanism hand example") {
  // mechanisms both flip detector 0 but differ on the logical
  auto m = tiny_model({1, 1}, {0, 1}, {0.01, 0.001}, 1, 1);
  StageModel sm;
  sm.model = m;
  sm.det_index = {0};
  sm.log_index = {0};
  sm.problem = MleProblem::from_model(m);
  sm.class_problem = MleProblem::from_model(m, {0});
  auto r = MleDecoder::smle_gap(sm, 1);
  REQUIRE(r.feasible);
  double w1 = std::log(0.99 / 0.01), w2 = std::log(0.999 / 0.001);
  REQUIRE(r.gap.has_value());
  REQUIRE(std::abs(*r.gap - (w2 - w1)) < 1e-9);      // ~2.31 nats
  REQUIRE(std::abs(*r.gap - 2.3116) < 1e-3);
  REQUIRE(r.logical_flips == 0);
}

TEST_CASE("symmetric weights in different classes give zero gap") {
  auto m = tiny_model({1, 1}, {0, 1}, {0.01, 0.01}, 1, 1);
  StageModel sm;
  sm.model = m;
  sm.det_index = {0};
  sm.log_index = {0};
  sm.problem = MleProblem::from_model(m);
  sm.class_problem = MleProblem::from_model(m, {0});
  auto r = MleDecoder::smle_gap(sm, 1);
  REQUIRE(r.feasible);
  REQUIRE(std::abs(*r.gap) < 1e-12);
}

TEST_CASE("class-constrained re-solve with the MLE's own class returns the MLE") {
  Rng rng(5);
  auto m = tiny_model({1, 3, 2, 6, 4}, {1, 0, 1, 2, 3}, {0.01, 0.002, 0.03, 0.004, 0.05}, 3, 2);
  auto prob = MleProblem::from_model(m);
  for (uint64_t s = 0; s < 8; s++) {
    auto unconstrained = mle_solve(prob, s);
    if (!unconstrained.feasible) continue;
    MleProblem cp = MleProblem::from_model(m, {0, 1});
    uint64_t target = s | ((unconstrained.logical_flips & 3) << 3);
    auto constrained = mle_solve(cp, target);
    REQUIRE(constrained.feasible);
    REQUIRE(std::abs(constrained.weight - unconstrained.weight) < 1e-9);
    REQUIRE(constrained.logical_flips == unconstrained.logical_flips);
  }
}

TEST_CASE("MLD: zero-noise table has the single all-zero key") {
  DetectorModel m;
  m.n_detectors = 4;
  m.n_logicals = 5;
  auto t = build_mld(m, 5000, 3);
  REQUIRE(t.tally.size() == 1);
  REQUIRE(t.tally.count(0) == 1);
  REQUIRE(t.tally.at(0)[0] == 5000);
}

TEST_CASE("MLD table size bound and detector cap") {
  CssCode code = color_code(3);
  auto ctx = FactoryContext::make(code, NoiseModel{}, 'Z');
  auto t = build_mld(ctx.model, 200000, 11);
  REQUIRE(t.tally.size() <= (1u << 15));
  REQUIRE(t.n_detectors == 15);

  CssCode code5 = color_code(5);
  auto ctx5 = FactoryContext::make(code5, NoiseModel{}, 'Z');
  REQUIRE_THROWS_AS(build_mld(ctx5.model, 10, 1), std::invalid_argument);
}

TEST_CASE("MLD agrees with MLE on most probability-weighted syndromes") {
  CssCode code = color_code(3);
  auto ctx = FactoryContext::make(code, NoiseModel{}, 'Z');
  MleDecoder mle(ctx.model, ctx.syndrome_detectors);
  MldDecoder mld(build_mld(ctx.model, 1000000, 12), ctx.model, ctx.syndrome_detectors);
  auto recs = sample(ctx.model, 20000, 13);
  size_t agree = 0;
  for (const auto& r : recs) {
    auto a = mle.decode_tomography(r.detectors);
    auto b = mld.decode_tomography(r.detectors);
    agree += (a.logical_flips == b.logical_flips);
  }
  // entropy can flip rare keys; bulk agreement must hold
  REQUIRE((double)agree / recs.size() > 0.95);
}

TEST_CASE("noiseless shot decodes to acceptance at the factory stage") {
  CssCode code = color_code(3);
  auto ctx = FactoryContext::make(code, NoiseModel{}, 'Z');
  MleDecoder dec(ctx.model, ctx.syndrome_detectors);
  ShotRecord clean{};
  auto f = decode_two_stage(clean, dec, DecodeStage::Factory);
  REQUIRE(f.feasible);
  REQUIRE(f.logical_flips == 0);
  REQUIRE(f.accepted);
  auto t = decode_two_stage(clean, dec, DecodeStage::Tomography);
  REQUIRE(t.logical_flips == 0);
  // tomography stage consumes all 15 detectors
  REQUIRE(dec.tomography_stage().det_index.size() == 15);
  REQUIRE(dec.factory_stage().det_index.size() == 12);
}

TEST_CASE("every sampled syndrome is feasible for its own model") {
  CssCode code = color_code(3);
  auto ctx = FactoryContext::make(code, NoiseModel{}, 'Z');
  MleDecoder dec(ctx.model, ctx.syndrome_detectors);
  auto recs = sample(ctx.model, 3000, 21);
  for (const auto& r : recs) {
    auto t = dec.decode_tomography(r.detectors);
    REQUIRE(t.feasible);
  }
}

TEST_CASE("sliding scale: full curve endpoints and gap monotonicity") {
  CssCode code = color_code(3);
  NoiseModel nm;
  auto ctx = FactoryContext::make(code, nm, 'Z');
  MleDecoder dec(ctx.model, ctx.syndrome_detectors);
  auto recs = sample(ctx.model, 25000, 17);
  auto decs = decode_records(recs, dec);
  auto curve = sliding_scale(decs, 12);
  REQUIRE(curve.size() >= 10);
  // the loosest point keeps every shot: accepted fraction = clean-syndrome rate
  size_t clean = 0;
  for (const auto& d : decs) clean += ((d.residual & 0xF) == 0);
  REQUIRE(curve[0].stab_fraction == 1.0);
  REQUIRE(std::abs(curve[0].accepted_fraction - (double)clean / decs.size()) < 1e-12);
  // raising the cut never increases the output error beyond noise (3 sigma)
  for (size_t i = 1; i < curve.size(); i++) {
    double n0 = curve[0].accepted_fraction * decs.size();
    double sigma = std::sqrt(std::max(curve[0].output_error * (1 - curve[0].output_error), 1e-9) / n0);
    REQUIRE(curve[i].output_error <= curve[0].output_error + 3 * sigma + 1e-9);
  }
}
