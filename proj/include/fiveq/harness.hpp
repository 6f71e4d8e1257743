#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <numbers>
#include <sstream>
#include <thread>

#include "fiveq/channel.hpp"
#include "fiveq/distill.hpp"

namespace fiveq {

struct ExperimentConfig {
  uint32_t distance = 3;
  NoiseModel noise;
  std::array<double, 5> angles{};
  size_t shots = 1000000;            // total, split evenly into X,Y,Z
  size_t posterior_samples = 100000;
  DecoderKind decoder = DecoderKind::Mle;
  size_t mld_build_shots = 10000000;
  uint32_t sweep_points = 20;
  uint32_t phi_points = 12;          // injected-phase sweep resolution
  uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir = "out";
  std::string format = "json";

  size_t shots_per_basis() const { return shots / 3; }

  void validate() const {
    if (!seed_set) throw std::invalid_argument("config: seed is mandatory");
    if (distance != 1 && distance != 3 && distance != 5)
      throw std::invalid_argument("config: distance must be 1, 3 or 5");
    if (format != "json" && format != "csv")
      throw std::invalid_argument("config: format must be json or csv");
    if (shots < 3) throw std::invalid_argument("config: too few shots");
    noise.check();
  }

  CssCode code() const { return distance == 1 ? trivial_code() : color_code(distance); }
};

// --- nested key-value config text ------------------------------------------------

inline void config_set(ExperimentConfig& c, const std::string& key, const std::string& val) {
  auto d = [&] { return std::stod(val); };
  auto u = [&] { return (uint64_t)std::stoull(val); };
  if (key == "distance") c.distance = (uint32_t)u();
  else if (key == "shots") c.shots = u();
  else if (key == "posterior_samples") c.posterior_samples = u();
  else if (key == "mld_build_shots") c.mld_build_shots = u();
  else if (key == "sweep_points") c.sweep_points = (uint32_t)u();
  else if (key == "phi_points") c.phi_points = (uint32_t)u();
  else if (key == "seed") { c.seed = u(); c.seed_set = true; }
  else if (key == "decoder") c.decoder = val == "mld" ? DecoderKind::Mld : DecoderKind::Mle;
  else if (key == "out") c.out_dir = val;
  else if (key == "format") c.format = val;
  else if (key == "angles") {
    std::istringstream ss(val);
    std::string tok;
    for (int i = 0; i < 5 && std::getline(ss, tok, ','); i++) c.angles[i] = std::stod(tok);
  }
  else if (key == "noise.p_cz") c.noise.p_cz = d();
  else if (key == "noise.bias_zz") c.noise.bias_zz = d();
  else if (key == "noise.p_1q_global") c.noise.p_1q_global = d();
  else if (key == "noise.p_1q_local") c.noise.p_1q_local = d();
  else if (key == "noise.p_prep") c.noise.p_prep = d();
  else if (key == "noise.p_meas") c.noise.p_meas = d();
  else if (key == "noise.p_move_z") c.noise.p_move_z = d();
  else if (key == "noise.p_idle") c.noise.p_idle = d();
  else if (key == "noise.rescale") c.noise.rescale = d();
  else throw std::invalid_argument("config: unknown key " + key);
}

inline void load_config_file(ExperimentConfig& c, const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config file " + path);
  std::string line;
  while (std::getline(f, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      size_t a = s.find_first_not_of(" \t");
      size_t b = s.find_last_not_of(" \t");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
    if (!key.empty()) config_set(c, key, val);
  }
}

inline nlohmann::json config_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["distance"] = c.distance;
  j["shots"] = c.shots;
  j["posterior_samples"] = c.posterior_samples;
  j["mld_build_shots"] = c.mld_build_shots;
  j["sweep_points"] = c.sweep_points;
  j["phi_points"] = c.phi_points;
  j["seed"] = c.seed;
  j["decoder"] = c.decoder == DecoderKind::Mld ? "mld" : "mle";
  j["angles"] = c.angles;
  j["out"] = c.out_dir;
  j["format"] = c.format;
  j["noise"] = {{"p_cz", c.noise.p_cz}, {"bias_zz", c.noise.bias_zz},
                {"p_1q_global", c.noise.p_1q_global}, {"p_1q_local", c.noise.p_1q_local},
                {"p_prep", c.noise.p_prep}, {"p_meas", c.noise.p_meas},
                {"p_move_z", c.noise.p_move_z}, {"p_idle", c.noise.p_idle},
                {"rescale", c.noise.rescale}};
  return j;
}

inline uint64_t config_hash(const ExperimentConfig& c) {
  std::string s = config_json(c).dump();
  uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) { h ^= ch; h *= 1099511628211ull; }
  return h;
}

// --- report ---------------------------------------------------------------------

struct CurvePoint {
  double x = 0;        // accepted fraction (or phase for sweeps)
  double fidelity = 0;
  double lo = 0, hi = 0;
};

struct Report {
  nlohmann::json body;

  void set_provenance(const ExperimentConfig& c) {
    body["config"] = config_json(c);
    body["config_hash"] = config_hash(c);
    body["seed"] = c.seed;
    body["version"] = "fiveq 1.0";
  }
};

// --- injection pipeline -----------------------------------------------------------

struct InjectionStats {
  double fid_raw = 0, fid_ec = 0, fid_perfect = 0;
  FidelityInterval iv_raw, iv_ec, iv_perfect;
  double perfect_fraction = 0;  // stabilizer postselection survival
};

namespace detail {

struct InjectionBasisData {
  double q_raw = 0, q_ec = 0, q_perfect = 0;  // logical flip rates
  double clean_fraction = 0;
  size_t shots = 0;
};

// Per-basis single-block channel learning: raw, error-corrected and
// perfect-stabilizer logical flip rates for the reference input.
inline InjectionBasisData injection_flip_rates(const CssCode& code, const NoiseModel& noise,
                                               char basis, size_t shots, uint64_t seed) {
  InputSpec ref{InputSpec::Kind::BasisState, 0.0, basis == 'X' ? '+' : basis == 'Y' ? 'i' : '0'};
  Circuit c = build_injection_tomography(code, ref, basis);
  ReadoutPlan plan = injection_readout_plan(code, basis);
  DetectorModel model = instrument(c, noise, plan);
  MleProblem prob = MleProblem::from_model(model);
  detail::MleSolver solver(prob);

  std::map<uint64_t, std::array<uint64_t, 2>> uniq;  // detectors -> count per raw flip
  const size_t shard = 1 << 20;
  size_t done = 0;
  uint64_t stream = 0;
  while (done < shots) {
    size_t now = std::min(shard, shots - done);
    for (const auto& r : sample(model, now, seed, stream++))
      uniq[r.detectors][r.logicals & 1]++;
    done += now;
  }
  InjectionBasisData out;
  out.shots = shots;
  uint64_t raw_flips = 0, ec_flips = 0, clean = 0, clean_flips = 0;
  std::unordered_map<uint64_t, uint64_t> corr_cache;
  for (const auto& [det, counts] : uniq) {
    uint64_t corr;
    auto it = corr_cache.find(det);
    if (it != corr_cache.end()) corr = it->second;
    else {
      DecodeResult r = mle_solve(prob, det);
      corr = r.feasible ? (r.logical_flips & 1) : 0;
      corr_cache[det] = corr;
    }
    for (int f = 0; f < 2; f++) {
      uint64_t n = counts[f];
      if (!n) continue;
      raw_flips += f ? n : 0;
      ec_flips += (f ^ corr) ? n : 0;
      if (det == 0) {
        clean += n;
        clean_flips += (f ^ corr) ? n : 0;
      }
    }
  }
  out.q_raw = (double)raw_flips / shots;
  out.q_ec = (double)ec_flips / shots;
  out.q_perfect = clean ? (double)clean_flips / clean : 0.0;
  out.clean_fraction = (double)clean / shots;
  return out;
}

inline std::array<BasisCounts, 3> composed_counts(const std::array<double, 3>& v, size_t n) {
  std::array<BasisCounts, 3> c;
  for (int b = 0; b < 3; b++) {
    c[b].n = n;
    double p_aligned = (1.0 + v[b]) / 2.0;
    c[b].m = (uint64_t)std::llround(p_aligned * (double)n);
  }
  return c;
}

}  // namespace detail

// Injection-only study: raw / error-corrected / perfect-stabilizer magic
// fidelities with credible intervals, plus the injected-phase oscillation.
inline InjectionStats run_injection_stats(const ExperimentConfig& cfg, double rz,
                                          nlohmann::json* curves = nullptr) {
  CssCode code = cfg.code();
  size_t n = cfg.shots_per_basis();
  std::array<detail::InjectionBasisData, 3> per_basis;
  const char bases[3] = {'X', 'Y', 'Z'};
  for (int b = 0; b < 3; b++)
    per_basis[b] = detail::injection_flip_rates(code, cfg.noise, bases[b], n,
                                                cfg.seed + 11 * b);
  // ideal injected state: magic rotated by rz about Z
  const double r = 1.0 / std::numbers::sqrt3;
  std::array<double, 3> v_ideal = {(std::cos(rz) - std::sin(rz)) * r,
                                   (std::cos(rz) + std::sin(rz)) * r, r};
  InjectionStats st;
  auto fid = [&](auto rate_of) {
    std::array<double, 3> v;
    for (int b = 0; b < 3; b++) v[b] = v_ideal[b] * (1.0 - 2.0 * rate_of(per_basis[b]));
    return v;
  };
  auto vr = fid([](const detail::InjectionBasisData& d) { return d.q_raw; });
  auto ve = fid([](const detail::InjectionBasisData& d) { return d.q_ec; });
  auto vp = fid([](const detail::InjectionBasisData& d) { return d.q_perfect; });
  st.fid_raw = magic_fidelity({vr[0], vr[1], vr[2]});
  st.fid_ec = magic_fidelity({ve[0], ve[1], ve[2]});
  st.fid_perfect = magic_fidelity({vp[0], vp[1], vp[2]});
  st.iv_raw = bayes_interval(detail::composed_counts(vr, n), cfg.posterior_samples, cfg.seed + 101);
  st.iv_ec = bayes_interval(detail::composed_counts(ve, n), cfg.posterior_samples, cfg.seed + 102);
  size_t np = (size_t)((double)n * (per_basis[0].clean_fraction + per_basis[1].clean_fraction +
                                    per_basis[2].clean_fraction) / 3.0);
  st.iv_perfect = bayes_interval(detail::composed_counts(vp, std::max<size_t>(np, 1)),
                                 cfg.posterior_samples, cfg.seed + 103);
  st.perfect_fraction = (per_basis[0].clean_fraction + per_basis[1].clean_fraction +
                         per_basis[2].clean_fraction) / 3.0;

  if (curves) {
    // injected-phase sweep: |psi(phi)> on the XY plane, X/Y/Z readout
    nlohmann::json sweep = nlohmann::json::array();
    for (uint32_t i = 0; i < cfg.phi_points; i++) {
      double phi = 2.0 * std::numbers::pi * i / cfg.phi_points;
      std::array<double, 3> vid = {std::cos(phi), std::sin(phi), 0.0};
      nlohmann::json row;
      row["phi"] = phi;
      row["vx"] = vid[0] * (1 - 2 * per_basis[0].q_ec);
      row["vy"] = vid[1] * (1 - 2 * per_basis[1].q_ec);
      row["vz"] = vid[2] * (1 - 2 * per_basis[2].q_ec);
      sweep.push_back(row);
    }
    (*curves)["phase_sweep"] = sweep;
  }
  return st;
}

inline Report run_injection(const ExperimentConfig& cfg) {
  cfg.validate();
  Report rep;
  rep.set_provenance(cfg);
  nlohmann::json curves;
  InjectionStats st = run_injection_stats(cfg, cfg.angles[0], &curves);
  auto iv = [](const FidelityInterval& i) {
    return nlohmann::json{{"median", i.median}, {"lo", i.lo}, {"hi", i.hi}};
  };
  rep.body["injection"] = {
      {"fidelity_raw", st.fid_raw},       {"interval_raw", iv(st.iv_raw)},
      {"fidelity_ec", st.fid_ec},         {"interval_ec", iv(st.iv_ec)},
      {"fidelity_perfect", st.fid_perfect}, {"interval_perfect", iv(st.iv_perfect)},
      {"perfect_fraction", st.perfect_fraction}};
  rep.body["curves"] = curves;
  return rep;
}

// --- factory pipeline ---------------------------------------------------------------

struct FactoryRun {
  std::vector<CurvePoint> curve;           // fidelity vs total accepted fraction
  double acceptance_no_postselect = 0;
  double fid_no_postselect = 0;
  double fid_full_postselect = 0;
  double accepted_fraction_full = 0;
  InjectionStats injected;                 // reference comparison
};

namespace detail {

struct BasisChannels {
  FactoryContext ctx;
  std::vector<LogicalChannel> strata;   // one per sweep threshold
  LogicalChannel no_post, perfect;
  IdealChannel ideal;
};

}  // namespace detail

// Full pipeline: learn channels per stratum, compose with the ideal channel,
// sweep the sliding-scale postselection.
inline FactoryRun run_factory_pipeline(const ExperimentConfig& cfg) {
  CssCode code = cfg.code();
  size_t n = cfg.shots_per_basis();
  const char bases[3] = {'X', 'Y', 'Z'};

  // gap thresholds shared across bases: quantiles of the Z-basis gap sample
  std::vector<double> thresholds;
  std::array<detail::BasisChannels, 3> bc;
  for (int b = 0; b < 3; b++) {
    bc[b].ctx = FactoryContext::make(code, cfg.noise, bases[b]);
    bc[b].ideal = ideal_channel(cfg.angles, bases[b]);
  }
  {
    // threshold grid from decoded gap quantiles (Z basis)
    auto& ctx = bc[2].ctx;
    MleDecoder dec(ctx.model, ctx.syndrome_detectors);
    auto recs = sample(ctx.model, std::min<size_t>(n, 200000), cfg.seed + 7);
    std::vector<double> gaps;
    for (const auto& r : recs)
      gaps.push_back(dec.decode_factory(r.detectors).gap.value_or(kGapInfinity));
    std::sort(gaps.begin(), gaps.end());
    for (uint32_t i = 0; i < cfg.sweep_points; i++) {
      size_t at = (size_t)((double)i / cfg.sweep_points * gaps.size());
      thresholds.push_back(gaps[std::min(at, gaps.size() - 1)]);
    }
  }

  for (int b = 0; b < 3; b++) {
    auto& ctx = bc[b].ctx;
    MleDecoder mle(ctx.model, ctx.syndrome_detectors);
    std::optional<MldDecoder> mld;
    if (cfg.decoder == DecoderKind::Mld) {
      if (ctx.model.n_detectors > 24)
        throw std::invalid_argument("MLD decoder is limited to d=3");
      mld.emplace(build_mld(ctx.model, cfg.mld_build_shots, cfg.seed + 300 + b),
                  ctx.model, ctx.syndrome_detectors);
    }
    auto learn = [&](const StratumRule& rule) {
      if (mld) return learn_channel(ctx, *mld, n, rule, cfg.seed + 17 * b);
      return learn_channel(ctx, mle, n, rule, cfg.seed + 17 * b);
    };
    bc[b].no_post = learn({StratumRule::Kind::None, 0});
    bc[b].perfect = learn({StratumRule::Kind::PerfectStabilizer, 0});
    for (double t : thresholds)
      bc[b].strata.push_back(learn({StratumRule::Kind::GapThreshold, t}));
  }

  FactoryRun out;
  auto point = [&](const LogicalChannel& ex, const LogicalChannel& ey, const LogicalChannel& ez)
      -> std::tuple<double, double, FidelityInterval> {
    ComposedStats sx = compose(ex, bc[0].ideal);
    ComposedStats sy = compose(ey, bc[1].ideal);
    ComposedStats sz = compose(ez, bc[2].ideal);
    double frac = (ex.stratum_fraction * sx.acceptance + ey.stratum_fraction * sy.acceptance +
                   ez.stratum_fraction * sz.acceptance) / 3.0;
    BlochVector v{sx.output_expectation, sy.output_expectation, sz.output_expectation};
    double f = magic_fidelity(v);
    size_t n_acc = std::max<size_t>(1, (size_t)((double)n * frac));
    auto ivc = detail::composed_counts({v.x, v.y, v.z}, n_acc);
    FidelityInterval iv = bayes_interval(ivc, cfg.posterior_samples, cfg.seed + 500);
    return {frac, f, iv};
  };

  {
    auto [frac, f, iv] = point(bc[0].no_post, bc[1].no_post, bc[2].no_post);
    out.acceptance_no_postselect = frac;
    out.fid_no_postselect = f;
    out.curve.push_back({frac, f, iv.lo, iv.hi});
  }
  for (size_t i = 0; i < thresholds.size(); i++) {
    auto [frac, f, iv] = point(bc[0].strata[i], bc[1].strata[i], bc[2].strata[i]);
    out.curve.push_back({frac, f, iv.lo, iv.hi});
  }
  {
    auto [frac, f, iv] = point(bc[0].perfect, bc[1].perfect, bc[2].perfect);
    out.fid_full_postselect = f;
    out.accepted_fraction_full = frac;
    out.curve.push_back({frac, f, iv.lo, iv.hi});
  }
  std::sort(out.curve.begin(), out.curve.end(),
            [](const CurvePoint& a, const CurvePoint& b) { return a.x < b.x; });

  ExperimentConfig icfg = cfg;
  out.injected = run_injection_stats(icfg, cfg.angles[0]);
  return out;
}

inline Report run_factory(const ExperimentConfig& cfg) {
  cfg.validate();
  Report rep;
  rep.set_provenance(cfg);
  FactoryRun fr = run_factory_pipeline(cfg);
  nlohmann::json curve = nlohmann::json::array();
  for (const auto& p : fr.curve)
    curve.push_back({{"accepted_fraction", p.x}, {"fidelity", p.fidelity},
                     {"ci_lo", p.lo}, {"ci_hi", p.hi}});
  rep.body["factory"] = {
      {"curve", curve},
      {"acceptance_no_postselect", fr.acceptance_no_postselect},
      {"fidelity_no_postselect", fr.fid_no_postselect},
      {"fidelity_full_postselect", fr.fid_full_postselect},
      {"accepted_fraction_full_postselect", fr.accepted_fraction_full},
      {"injected_fidelity_ec", fr.injected.fid_ec},
      {"injected_fidelity_raw", fr.injected.fid_raw},
      {"injected_fidelity_perfect", fr.injected.fid_perfect}};
  return rep;
}

// --- emission ------------------------------------------------------------------------

// Deterministic byte output for a given report: JSON dump plus long-format
// CSV for every curve found in the body.
inline std::vector<std::string> emit(const Report& rep, const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  std::vector<std::string> written;
  if (cfg.format == "json") {
    fs::path p = fs::path(cfg.out_dir) / "report.json";
    std::ofstream f(p, std::ios::binary);
    f << rep.body.dump(2) << "\n";
    written.push_back(p.string());
  }
  if (rep.body.contains("factory")) {
    fs::path p = fs::path(cfg.out_dir) / "curve.csv";
    std::ofstream f(p, std::ios::binary);
    f << "accepted_fraction,fidelity,ci_lo,ci_hi\n";
    for (const auto& row : rep.body["factory"]["curve"]) {
      f << row["accepted_fraction"].dump() << "," << row["fidelity"].dump() << ","
        << row["ci_lo"].dump() << "," << row["ci_hi"].dump() << "\n";
    }
    written.push_back(p.string());
  }
  if (cfg.format == "csv" && rep.body.contains("injection")) {
    fs::path p = fs::path(cfg.out_dir) / "injection.csv";
    std::ofstream f(p, std::ios::binary);
    f << "quantity,fidelity,ci_lo,ci_hi\n";
    const auto& i = rep.body["injection"];
    auto row = [&](const char* name, const char* fkey, const char* ikey) {
      f << name << "," << i[fkey].dump() << "," << i[ikey]["lo"].dump() << ","
        << i[ikey]["hi"].dump() << "\n";
    };
    row("raw", "fidelity_raw", "interval_raw");
    row("error_corrected", "fidelity_ec", "interval_ec");
    row("perfect_stabilizer", "fidelity_perfect", "interval_perfect");
    written.push_back(p.string());
  }
  return written;
}

inline int worker_count() {
  if (const char* env = std::getenv("FIVEQ_WORKERS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc ? (int)hc : 1;
}

}  // namespace fiveq
