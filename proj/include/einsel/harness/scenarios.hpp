#pragma once

// Scenario kinds. Each `plan_*` reads and validates its parameter block (and any
// input files) and returns the job that does the computation, so that every
// precondition is checked before any numerics run.

#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <thread>

#include "einsel/core.hpp"
#include "einsel/harness/config.hpp"
#include "einsel/modes.hpp"
#include "einsel/photon.hpp"
#include "einsel/tomo.hpp"

namespace einsel::harness {

/// Every module operation a scenario can reach, by its library name.
inline const std::vector<std::string>& module_operations() {
  static const std::vector<std::string> ops{
      // quantum-core
      "coherent_state", "annihilation", "tensor", "partial_trace", "schmidt", "entropy", "fidelity",
      // coupled-modes
      "build_hamiltonian", "evolve", "amplitude_flow", "coherence_defect", "biorthogonal_leakage", "ein_scan",
      // photon-stats
      "simulate_clicks", "waiting_times", "counting_stats", "g2", "coincidences", "fit_decay",
      // tomography
      "scheme_mub", "scheme_sic", "born_probabilities", "simulate_tomography", "linear_inversion", "mle_reconstruct",
      "concurrence", "witness_value", "chsh", "chsh_optimize",
      // harness
      "ingest"};
  return ops;
}

struct Artifact {
  std::string name;
  std::string content;
};

/// Collects what a scenario produces. Nothing touches the disk from here.
class RunContext {
 public:
  explicit RunContext(const ScenarioConfig& cfg) : config(cfg) {}

  const ScenarioConfig& config;
  json summary = json::object();
  std::vector<Artifact> artifacts;
  std::set<std::string> operations;
  std::map<std::string, std::string> inputs;  // path as written in the config → sha256

  void use(const std::string& op) { operations.insert(op); }

  void file(std::string name, std::string content) { artifacts.push_back({std::move(name), std::move(content)}); }

  /// A numeric table, emitted as <stem>.csv and/or <stem>.json per the output formats.
  void table(const std::string& stem, const std::vector<std::string>& header, const std::vector<json>& rows) {
    if (config.csv) {
      std::ostringstream os;
      for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
      os << '\n';
      for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) {
          const auto& v = r[i];
          os << (i ? "," : "");
          if (v.is_number_float()) os << fmt(v.get<double>());
          else if (v.is_boolean()) os << (v.get<bool>() ? 1 : 0);
          else if (v.is_string()) os << v.get<std::string>();
          else os << v.dump();
        }
        os << '\n';
      }
      file(stem + ".csv", os.str());
    }
    if (config.json_tables) {
      json out = json::array();
      for (const auto& r : rows) {
        json obj = json::object();
        for (std::size_t i = 0; i < header.size(); ++i) obj[header[i]] = r[i];
        out.push_back(obj);
      }
      file(stem + ".json", out.dump(1) + "\n");
    }
  }

  std::string read_input(const std::string& path) {
    auto bytes = read_file(config.resolve(path).string());
    inputs[path] = sha256_hex(bytes);
    return bytes;
  }
};

using Job = std::function<void(RunContext&)>;

namespace detail {

inline double positive(const Params& p, const std::string& key, double fallback) {
  const double v = p.number(key, fallback);
  if (!(v > 0.0)) throw ValidationError(p.path() + "." + key + " must be > 0");
  return v;
}
inline double positive(const Params& p, const std::string& key) {
  const double v = p.number(key);
  if (!(v > 0.0)) throw ValidationError(p.path() + "." + key + " must be > 0");
  return v;
}

inline json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline double deg(double rad) { return rad * 180.0 / std::numbers::pi; }
inline double rad(double deg) { return deg * std::numbers::pi / 180.0; }

// ---------------------------------------------------------------- blocks

/// Frequencies and coupling are given in units of `frequency_scale` (rad/s); times in seconds.
inline modes::OscillatorConfig parse_oscillators(const Params& p) {
  const double scale = positive(p, "frequency_scale", 1.0);
  modes::OscillatorConfig c;
  c.omega_a = p.number("omega_a", 1.0) * scale;
  c.omega_b = p.number("omega_b", 1.0) * scale;
  c.lambda = p.number("lambda", 0.1) * scale;
  c.cutoff_a = p.integer("cutoff_a", 24);
  c.cutoff_b = p.integer("cutoff_b", 24);
  if (c.cutoff_a * c.cutoff_b > 10000) throw ValidationError(p.path() + ": cutoff_a·cutoff_b above 10000 is not supported");
  c.validate();
  return c;
}

/// Two-qubit state: singlet | werner {w} | product {bloch_a, bloch_b} | matrix {rho}.
inline DensityMatrix parse_state(const Params& p) {
  const std::string kind = p.string("kind");
  DensityMatrix rho = DensityMatrix::maximally_mixed({2, 2});
  if (kind == "singlet") {
    rho = tomo::singlet();
  } else if (kind == "werner") {
    const double w = p.number("w");
    if (w < 0.0 || w > 1.0) throw ValidationError(p.path() + ".w must lie in [0,1]");
    rho = tomo::werner(w);
  } else if (kind == "product") {
    const auto block = [&](const std::string& key) {
      const auto v = p.numbers(key);
      const double n = v.size() == 3 ? std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) : 2.0;
      if (v.size() != 3 || n > 1.0 + 1e-12) throw ValidationError(p.path() + "." + key + " must be a Bloch vector of length ≤ 1");
      return DensityMatrix(tomo::pauli::bloch_projector({v[0], v[1], v[2]}, 1.0), {2});
    };
    rho = tensor(block("bloch_a"), block("bloch_b"));
  } else if (kind == "matrix") {
    const CMatrix m = matrix_from_json(p.raw("rho"), p.path() + ".rho");
    if (m.rows() != 4) throw ValidationError(p.path() + ".rho must be 4x4");
    rho = DensityMatrix::flagged(m, {2, 2});
    if (!rho.is_physical()) throw ValidationError(p.path() + ".rho is not a physical density matrix");
    rho = DensityMatrix(m, {2, 2});
  } else {
    throw ValidationError(p.path() + ".kind must be singlet, werner, product or matrix");
  }
  return rho;
}

inline std::array<photon::DetectorModel, 2> parse_detectors(const Params& p, const std::string& key) {
  std::array<photon::DetectorModel, 2> det{};
  if (!p.has(key)) return det;
  const auto list = p.objects(key);
  if (list.size() != 2) throw ValidationError(p.path() + "." + key + " must list exactly two detectors");
  for (std::size_t i = 0; i < 2; ++i) {
    det[i].efficiency = list[i].number("efficiency", 1.0);
    det[i].dark_rate = list[i].number("dark_rate", 0.0);
    det[i].dead_time = list[i].number("dead_time", 0.0);
    det[i].validate();
  }
  return det;
}

inline photon::SourceModel parse_source(const Params& p) {
  photon::SourceModel s;
  s.kind = photon::source_kind_from_string(p.string("kind"));
  s.mean_rate = p.number("rate");
  if (s.kind == photon::SourceKind::kThermal) s.coherence_time = p.number("coherence_time");
  if (s.kind == photon::SourceKind::kSingleEmitter) s.emitter_lifetime = p.number("lifetime");
  if (s.kind == photon::SourceKind::kPairSource) s.pair_state = parse_state(p.object("state"));
  s.validate();
  return s;
}

inline constexpr double kMaxExpectedEvents = 2e8;

struct StreamPlan {
  std::optional<photon::SourceModel> source;
  std::array<photon::DetectorModel, 2> detectors{};
  double duration = 0.0;
  std::uint64_t seed = 0;
  std::optional<photon::ClickStream> loaded;
};

/// {"simulate": {source, detectors, duration}} or {"file": "<clickstream v1>"}.
inline StreamPlan parse_stream(const Params& parent, RunContext& ctx) {
  const auto p = parent.object("stream");
  if (p.has("simulate") == p.has("file")) throw ValidationError(p.path() + " needs exactly one of 'simulate' or 'file'");
  StreamPlan plan;
  if (p.has("file")) {
    const auto path = p.string("file");
    std::istringstream in(ctx.read_input(path));
    plan.loaded = photon::read_clickstream(in);
    return plan;
  }
  const auto sim = p.object("simulate");
  plan.source = parse_source(sim.object("source"));
  plan.detectors = parse_detectors(sim, "detectors");
  plan.duration = positive(sim, "duration");
  const double expected = plan.source->mean_rate * plan.duration * (plan.source->kind == photon::SourceKind::kPairSource ? 2.0 : 1.0) +
                          (plan.detectors[0].dark_rate + plan.detectors[1].dark_rate) * plan.duration;
  if (expected > kMaxExpectedEvents) throw ValidationError(p.path() + ": more than 2e8 expected events");
  if (plan.source->kind == photon::SourceKind::kThermal &&
      plan.duration / *plan.source->coherence_time * photon::detail::kThermalStepsPerCoherenceTime > photon::detail::kMaxThermalSteps)
    throw ValidationError(p.path() + ": duration/coherence_time too large for the thermal sampler");
  plan.seed = ctx.config.require_seed();
  return plan;
}

inline photon::ClickStream realize(const StreamPlan& plan, RunContext& ctx, std::uint64_t seed) {
  if (plan.loaded) {
    ctx.use("ingest");
    return *plan.loaded;
  }
  ctx.use("simulate_clicks");
  return photon::simulate_clicks(*plan.source, plan.detectors, plan.duration, seed);
}

inline json stream_summary(const photon::ClickStream& s) {
  json per = json::object();
  for (auto id : s.detector_ids()) {
    const auto n = s.count(id);
    per[std::to_string(id)] = {{"events", n}, {"rate", s.duration > 0.0 ? static_cast<double>(n) / s.duration : 0.0}};
  }
  return {{"events", s.events.size()}, {"duration_s", s.duration}, {"detectors", per}};
}

inline const char* g2_verdict(double g, double se) {
  if (g - 3.0 * se > 1.0) return "bunched";
  if (g + 3.0 * se < 1.0) return "anti-bunched";
  return "Poissonian";
}

inline const char* q_verdict(double q, double se) {
  if (q - 3.0 * se > 0.0) return "super-Poissonian";
  if (q + 3.0 * se < 0.0) return "sub-Poissonian";
  return "Poissonian";
}

struct TomoSimPlan {
  DensityMatrix truth = DensityMatrix::maximally_mixed({2, 2});
  tomo::SchemeKind scheme = tomo::SchemeKind::kMub;
  std::uint64_t shots = 0;
  std::optional<double> white_fraction;  // explicit
  std::optional<photon::SourceModel> pair_source;  // detection block: pair-source clicks drive the noise
  std::array<photon::DetectorModel, 2> detectors{};
  double pair_rate = 0.0, window = 0.0, duration = 0.0;
};

/// noise: {"white_fraction": f} or {"pair_rate", "window", "detectors", ["duration"]}.
/// With "duration" a pair-source click stream is simulated as well and its
/// coincidence count is reported next to the analytic accidental estimate.
inline TomoSimPlan parse_tomo_sim(const Params& p) {
  TomoSimPlan plan;
  plan.truth = parse_state(p.object("state"));
  plan.scheme = tomo::scheme_kind_from_string(p.string("scheme", "mub"));
  plan.shots = p.integer("shots");
  if (plan.shots < 1) throw ValidationError(p.path() + ".shots must be >= 1");
  if (auto n = p.optional_object("noise")) {
    if (n->has("white_fraction")) {
      plan.white_fraction = n->number("white_fraction");
      if (*plan.white_fraction < 0.0 || *plan.white_fraction > 1.0)
        throw ValidationError(n->path() + ".white_fraction must lie in [0,1]");
    } else {
      plan.pair_rate = positive(*n, "pair_rate");
      plan.window = positive(*n, "window");
      plan.detectors = parse_detectors(*n, "detectors");
      if (n->has("duration")) {
        plan.duration = positive(*n, "duration");
        plan.pair_source = photon::SourceModel::pair_source(plan.pair_rate, plan.truth);
        if (plan.pair_rate * plan.duration * 2.0 > kMaxExpectedEvents) throw ValidationError(n->path() + ": too many expected events");
      }
    }
  } else {
    plan.white_fraction = 0.0;
  }
  return plan;
}

/// Runs the tomography simulation; returns the table.
inline tomo::CountTable run_tomo_sim(const TomoSimPlan& plan, RunContext& ctx, std::uint64_t seed, json& out) {
  ctx.use(plan.scheme == tomo::SchemeKind::kMub ? "scheme_mub" : "scheme_sic");
  const auto& s = plan.scheme == tomo::SchemeKind::kMub ? tomo::scheme_mub() : tomo::scheme_sic();
  double f = plan.white_fraction.value_or(0.0);
  if (!plan.white_fraction) {
    const auto bridge = tomo::noise_from_detectors(plan.pair_rate, plan.detectors, plan.window);
    f = bridge.white_fraction;
    out["noise"] = {{"true_rate", bridge.true_rate}, {"accidental_rate", bridge.accidental_rate}, {"window_s", plan.window}};
    if (plan.pair_source) {
      const auto stream = realize({plan.pair_source, plan.detectors, plan.duration, 0, {}}, ctx, derive_seed(seed, 2));
      ctx.use("coincidences");
      const auto c = photon::coincidences(stream, plan.window);
      out["noise"]["clicks"] = stream_summary(stream);
      out["noise"]["coincidences"] = {{"raw", c.raw}, {"accidental", c.accidental}, {"corrected", c.corrected},
                                      {"floored", c.floored}, {"correction_dominates", c.correction_dominates},
                                      {"expected_true", bridge.true_rate * plan.duration}};
    }
  }
  out["noise"]["white_fraction"] = f;

  ctx.use("born_probabilities");
  const auto p = tomo::born_probabilities(plan.truth, s);
  std::vector<json> rows;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto& c = s.cells()[i];
    const double noisy = (1.0 - f) * p[i] + f / static_cast<double>(s.outcomes_per_setting());
    rows.push_back(json::array({s.setting_label(c.setting), s.outcome_label(c), p[i], noisy}));
  }
  ctx.table("probabilities", {"setting", "outcome", "probability", "noisy_probability"}, rows);

  ctx.use("simulate_tomography");
  return tomo::simulate_tomography(plan.truth, s, plan.shots, {f}, derive_seed(seed, 1));
}

struct FitPlan {
  tomo::Method method = tomo::Method::kMle;
  tomo::MleOptions mle;
  std::optional<DensityMatrix> truth;
  std::size_t repetitions = 0;
  unsigned threads = 0;
  int chsh_grid = 12;
};

inline FitPlan parse_fit(const Params& p) {
  FitPlan plan;
  const auto m = p.string("method", "mle");
  if (m == "mle") plan.method = tomo::Method::kMle;
  else if (m == "linear_inversion") plan.method = tomo::Method::kLinearInversion;
  else throw ValidationError(p.path() + ".method must be mle or linear_inversion");
  plan.mle.tolerance = positive(p, "tolerance", plan.mle.tolerance);
  plan.mle.max_iterations = p.integer("max_iterations", plan.mle.max_iterations);
  if (plan.mle.max_iterations < 1) throw ValidationError(p.path() + ".max_iterations must be >= 1");
  if (auto t = p.optional_object("truth")) plan.truth = parse_state(*t);
  if (auto b = p.optional_object("bootstrap")) {
    plan.repetitions = b->integer("repetitions");
    plan.threads = static_cast<unsigned>(b->integer("threads", 0));
  }
  plan.chsh_grid = static_cast<int>(p.integer("chsh_grid", 12));
  if (plan.chsh_grid < 2 || plan.chsh_grid > 64) throw ValidationError(p.path() + ".chsh_grid must lie in [2, 64]");
  return plan;
}

inline tomo::TomographyResult reconstruct(const tomo::CountTable& t, const FitPlan& plan, RunContext* ctx) {
  if (plan.method == tomo::Method::kLinearInversion) {
    if (ctx) ctx->use("linear_inversion");
    return tomo::linear_inversion(t);
  }
  if (ctx) ctx->use("mle_reconstruct");
  auto r = tomo::mle_reconstruct(t, plan.mle);
  if (!r.converged) throw NumericError("mle did not converge: " + r.diagnostics);
  return r;
}

struct Measures {
  double concurrence, witness, chsh;
};

inline Measures measures(const DensityMatrix& rho, int grid) {
  return {tomo::concurrence(rho), tomo::witness_value(rho), tomo::chsh_optimize(rho, grid).value};
}

/// Reconstruction plus entanglement measures; with repetitions > 0 a parametric
/// bootstrap (resample from the estimate, refit) supplies standard errors.
inline void run_fit(const tomo::CountTable& t, const FitPlan& plan, RunContext& ctx, std::uint64_t seed, json& out) {
  const auto r = reconstruct(t, plan, &ctx);
  ctx.file("result.json", result_to_json(r).dump(1) + "\n");
  out["method"] = tomo::to_string(r.method);
  out["physical"] = r.physical;
  out["converged"] = r.converged;
  out["iterations"] = r.iterations;
  out["log_likelihood"] = r.log_likelihood;
  out["residual"] = r.residual;
  out["min_eigenvalue"] = r.rho.min_eigenvalue();
  if (!r.physical) {
    out["note"] = "estimate is not positive; entanglement measures need a physical state (use method mle)";
    return;
  }

  ctx.use("concurrence");
  ctx.use("witness_value");
  ctx.use("chsh_optimize");
  ctx.use("chsh");
  ctx.use("partial_trace");
  ctx.use("entropy");
  const auto best = tomo::chsh_optimize(r.rho, plan.chsh_grid);
  const double c = tomo::concurrence(r.rho);
  const double w = tomo::witness_value(r.rho);
  out["concurrence"] = {{"value", c}};
  out["witness"] = {{"value", w}};
  out["chsh"] = {{"value", best.value},
                 {"signed_value", best.signed_value},
                 {"check", tomo::chsh(r.rho, best.angles)},
                 {"angles_deg", {deg(best.angles.a), deg(best.angles.a_prime), deg(best.angles.b), deg(best.angles.b_prime)}}};
  out["entropy_a"] = entropy(partial_trace(r.rho, Subsystem::A));
  out["entropy_b"] = entropy(partial_trace(r.rho, Subsystem::B));
  if (plan.truth) {
    ctx.use("fidelity");
    out["fidelity_to_truth"] = fidelity(r.rho, *plan.truth);
    out["trace_distance_to_truth"] = trace_distance(r.rho, *plan.truth);
  }

  if (plan.repetitions == 0) return;
  const auto& s = t.measurement();
  const auto shots = static_cast<std::uint64_t>(std::llround(t.shots_per_setting));
  std::vector<Measures> reps(plan.repetitions);
  std::vector<std::exception_ptr> errors(plan.repetitions);
  const unsigned n_threads = std::max(
      1u, std::min<unsigned>(plan.threads ? plan.threads : std::thread::hardware_concurrency(), static_cast<unsigned>(plan.repetitions)));
  std::vector<std::thread> pool;
  for (unsigned wkr = 0; wkr < n_threads; ++wkr)
    pool.emplace_back([&, wkr] {
      for (std::size_t i = wkr; i < plan.repetitions; i += n_threads) {
        try {
          const auto sample = tomo::simulate_tomography(r.rho, s, shots, {0.0}, derive_seed(seed, 1000 + i));
          const auto fit = reconstruct(sample, plan, nullptr);
          reps[i] = fit.physical ? measures(fit.rho, plan.chsh_grid) : Measures{NAN, NAN, NAN};
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  const auto sd = [&](double Measures::*field) {
    double m = 0.0, v = 0.0;
    for (const auto& x : reps) m += x.*field;
    m /= static_cast<double>(reps.size());
    for (const auto& x : reps) v += (x.*field - m) * (x.*field - m);
    return reps.size() > 1 ? std::sqrt(v / static_cast<double>(reps.size() - 1)) : 0.0;
  };
  out["bootstrap_repetitions"] = plan.repetitions;
  out["concurrence"]["standard_error"] = sd(&Measures::concurrence);
  out["witness"]["standard_error"] = sd(&Measures::witness);
  out["chsh"]["standard_error"] = sd(&Measures::chsh);
}

// ------------------------------------------------------------- scenarios

inline Job plan_evolve(const Params& p, RunContext&) {
  const auto cfg = parse_oscillators(p.object("oscillators"));
  const auto init = p.object("initial");
  const auto type = init.string("type");
  cplx mu_a, mu_b;
  std::size_t n_a = 0, n_b = 0;
  if (type == "coherent") {
    mu_a = init.complex("mu_a", 0.0);
    mu_b = init.complex("mu_b", 0.0);
  } else if (type == "fock") {
    n_a = init.integer("n_a");
    n_b = init.integer("n_b");
    if (n_a >= cfg.cutoff_a || n_b >= cfg.cutoff_b) throw ValidationError(init.path() + ": Fock level beyond cutoff");
  } else {
    throw ValidationError(init.path() + ".type must be coherent or fock");
  }
  const double period = cfg.lambda > 0.0 ? 2.0 * std::numbers::pi / cfg.lambda : 0.0;
  const double horizon = p.has("horizon") ? positive(p, "horizon") : period;
  if (!(horizon > 0.0)) throw ValidationError(p.path() + ".horizon is required when lambda = 0");
  const auto samples = p.integer("samples", 64);
  if (samples < 2 || samples > 100000) throw ValidationError(p.path() + ".samples must lie in [2, 100000]");

  return [=](RunContext& ctx) {
    PureState psi_a = fock_state(0, cfg.cutoff_a), psi_b = fock_state(0, cfg.cutoff_b);
    if (type == "coherent") {
      ctx.use("coherent_state");
      psi_a = coherent_state(mu_a, cfg.cutoff_a).state;
      psi_b = coherent_state(mu_b, cfg.cutoff_b).state;
    } else {
      psi_a = fock_state(n_a, cfg.cutoff_a);
      psi_b = fock_state(n_b, cfg.cutoff_b);
    }
    ctx.use("tensor");
    const auto psi0 = tensor(psi_a, psi_b);
    ctx.use("annihilation");
    const double mean_a = annihilation(cfg.cutoff_a).apply(psi_a).amplitudes().squaredNorm();
    const double mean_b = annihilation(cfg.cutoff_b).apply(psi_b).amplitudes().squaredNorm();
    ctx.use("biorthogonal_leakage");
    const double leakage = modes::biorthogonal_leakage(psi_a, psi_b, cfg);

    ctx.use("build_hamiltonian");
    const auto h = modes::build_hamiltonian(cfg);
    if (!h.full.is_hermitian()) throw NumericError("Hamiltonian is not Hermitian");
    const modes::CoupledModes model(cfg);
    const auto initial = modes::first_moments(psi0);
    for (const char* op : {"evolve", "partial_trace", "entropy", "schmidt", "coherence_defect", "amplitude_flow"}) ctx.use(op);

    std::vector<json> rows;
    double s_max = 0.0, s_min = std::numeric_limits<double>::infinity(), s_sum = 0.0, d_max = 0.0, flow_dev = 0.0;
    std::size_t rank_max = 0;
    for (double t : modes::uniform_times(horizon, samples)) {
      const auto psi = model.evolve(psi0, t);
      const double s = entropy(partial_trace(psi, Subsystem::A));
      const auto rank = schmidt(psi).rank(1e-12);
      const double d = modes::coherence_defect(psi);
      const auto m = modes::first_moments(psi, t);
      const auto f = modes::amplitude_flow(initial, cfg, t);
      const double dev = std::max(std::abs(m.mu_a - f.mu_a), std::abs(m.mu_b - f.mu_b));
      s_max = std::max(s_max, s);
      s_min = std::min(s_min, s);
      s_sum += s;
      d_max = std::max(d_max, d);
      flow_dev = std::max(flow_dev, dev);
      rank_max = std::max(rank_max, rank);
      rows.push_back(json::array({t, s, rank, d, modes::top_level_population(psi), m.mu_a.real(), m.mu_a.imag(),
                                  m.mu_b.real(), m.mu_b.imag(), f.mu_a.real(), f.mu_a.imag(), f.mu_b.real(), f.mu_b.imag()}));
    }
    ctx.table("trajectory",
              {"t", "entropy", "schmidt_rank", "coherence_defect", "top_level_population", "a_re", "a_im", "b_re", "b_im",
               "flow_a_re", "flow_a_im", "flow_b_re", "flow_b_im"},
              rows);
    ctx.summary = {{"horizon", horizon},
                   {"samples", samples},
                   {"hamiltonian_dimension", h.full.dim()},
                   {"mean_photons", {mean_a, mean_b}},
                   {"initial_leakage", leakage},
                   {"entropy", {{"max", s_max}, {"min", s_min}, {"mean", s_sum / static_cast<double>(samples)}}},
                   {"max_schmidt_rank", rank_max},
                   {"max_coherence_defect", d_max},
                   {"max_flow_deviation", flow_dev}};
  };
}

inline Job plan_ein_scan(const Params& p, RunContext& ctx) {
  const auto cfg = parse_oscillators(p.object("oscillators"));
  const auto fam = p.object("families");
  modes::CandidateFamilies families;
  if (auto c = fam.optional_object("coherent")) {
    modes::CoherentGrid g;
    if (c->has("moduli")) g.moduli = c->numbers("moduli");
    g.phases = c->integer("phases", g.phases);
    if (g.phases < 1) throw ValidationError(c->path() + ".phases must be >= 1");
    families.coherent = g;
  }
  if (auto f = fam.optional_object("fock")) families.fock = modes::FockPairs{f->integer("max_total", 3)};
  if (auto r = fam.optional_object("random")) families.random = modes::RandomProducts{r->integer("count", 8), ctx.config.require_seed()};
  if (!families.coherent && !families.fock && !families.random) throw ValidationError(fam.path() + ": select at least one family");
  std::optional<double> horizon;
  if (p.has("horizon")) horizon = positive(p, "horizon");
  if (!horizon && !(cfg.lambda > 0.0)) throw ValidationError(p.path() + ".horizon is required when lambda = 0");
  const auto samples = p.integer("samples", 64);
  if (samples < 2) throw ValidationError(p.path() + ".samples must be >= 2");
  const auto threads = static_cast<unsigned>(p.integer("threads", 0));

  return [=](RunContext& ctx) {
    ctx.use("ein_scan");
    const auto r = modes::ein_scan(cfg, families, horizon, samples, threads);
    std::vector<json> rows;
    double worst_coherent = -1.0, best_other = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < r.ranking.size(); ++i) {
      const auto& s = r.ranking[i];
      rows.push_back(json::array({i + 1, s.label, modes::to_string(s.family), s.coherent_product, s.mean_entropy, s.max_entropy}));
      if (s.coherent_product) worst_coherent = std::max(worst_coherent, s.mean_entropy);
      else best_other = std::min(best_other, s.mean_entropy);
    }
    ctx.table("ranking", {"rank", "label", "family", "coherent_product", "mean_entropy", "max_entropy"}, rows);
    ctx.summary = {{"horizon", r.horizon},
                   {"samples", r.samples},
                   {"candidates", r.ranking.size()},
                   {"coherent_products_minimal", r.coherent_products_minimal()},
                   {"lowest", {{"label", r.ranking.front().label}, {"mean_entropy", r.ranking.front().mean_entropy}}},
                   {"highest", {{"label", r.ranking.back().label}, {"mean_entropy", r.ranking.back().mean_entropy}}}};
    if (worst_coherent >= 0.0) ctx.summary["worst_coherent_mean_entropy"] = worst_coherent;
    if (std::isfinite(best_other)) ctx.summary["best_other_mean_entropy"] = best_other;
  };
}

inline Job plan_clicks(const Params& p, RunContext& ctx) {
  const auto stream = parse_stream(p, ctx);
  const auto bins = p.integer("waiting_time_bins", 50);
  if (bins < 1) throw ValidationError(p.path() + ".waiting_time_bins must be >= 1");
  std::optional<double> window;
  if (p.has("coincidence_window")) window = positive(p, "coincidence_window");

  return [=](RunContext& ctx) {
    const auto s = realize(stream, ctx, stream.seed);
    if (stream.source) ctx.file("clicks.txt", photon::to_clickstream_text(s));
    ctx.summary = stream_summary(s);
    std::vector<json> rows;
    ctx.use("waiting_times");
    for (auto id : s.detector_ids()) {
      auto& d = ctx.summary["detectors"][std::to_string(id)];
      if (s.count(id) < photon::kMinWaitingEvents) {
        d["waiting_times"] = "skipped: fewer than 100 events";
        continue;
      }
      const auto w = photon::waiting_times(s, id, bins);
      d["waiting_times"] = {{"rate", w.rate}, {"ks_distance", w.ks_distance}, {"ks_critical", w.ks_critical},
                            {"ks_p_value", w.ks_p_value}, {"exponential", w.exponential}};
      for (std::size_t b = 0; b < w.counts.size(); ++b)
        rows.push_back(json::array({id, w.bin_edges[b], w.bin_edges[b + 1], w.counts[b]}));
    }
    ctx.table("waiting_times", {"detector", "gap_low_s", "gap_high_s", "count"}, rows);
    if (window) {
      ctx.use("coincidences");
      const auto c = photon::coincidences(s, *window);
      ctx.summary["coincidences"] = {{"window_s", c.window}, {"raw", c.raw}, {"accidental", c.accidental},
                                     {"corrected", c.corrected}, {"floored", c.floored},
                                     {"correction_dominates", c.correction_dominates}};
    }
  };
}

inline Job plan_g2(const Params& p, RunContext& ctx) {
  const auto stream = parse_stream(p, ctx);
  photon::G2Options opt;
  opt.bin_width = positive(p, "bin_width");
  opt.max_lag = positive(p, "max_lag");
  opt.detector_a = static_cast<std::uint32_t>(p.integer("detector_a", 0));
  opt.detector_b = static_cast<std::uint32_t>(p.integer("detector_b", 1));
  if (opt.max_lag / opt.bin_width > 1e6) throw ValidationError(p.path() + ": more than 1e6 lag bins");
  const double duration = stream.loaded ? stream.loaded->duration : stream.duration;
  if (2.0 * (opt.max_lag + opt.bin_width) >= duration) throw ValidationError(p.path() + ": lag window exceeds the stream duration");

  return [=](RunContext& ctx) {
    const auto s = realize(stream, ctx, stream.seed);
    ctx.use("g2");
    const auto c = photon::g2(s, opt);
    std::vector<json> rows;
    for (std::size_t i = 0; i < c.lags.size(); ++i)
      rows.push_back(json::array({c.lags[i], c.g2[i], c.standard_error[i], c.coincidences[i]}));
    ctx.table("g2", {"lag_s", "g2", "standard_error", "coincidences"}, rows);
    ctx.summary = stream_summary(s);
    ctx.summary["g2"] = {{"bin_width_s", c.bin_width}, {"zero_lag", c.at_zero()}, {"zero_lag_standard_error", c.stderr_at_zero()},
                         {"far_lag", c.g2.front()}, {"rate_a", c.rate_a}, {"rate_b", c.rate_b},
                         {"verdict", g2_verdict(c.at_zero(), c.stderr_at_zero())}};
  };
}

inline Job plan_counting(const Params& p, RunContext& ctx) {
  const auto stream = parse_stream(p, ctx);
  const double window = positive(p, "window");
  std::optional<std::uint32_t> detector;
  if (p.has("detector")) detector = static_cast<std::uint32_t>(p.integer("detector"));
  const double duration = stream.loaded ? stream.loaded->duration : stream.duration;
  if (duration / window < static_cast<double>(photon::kMinCountingWindows))
    throw ValidationError(p.path() + ".window larger than duration/50");

  return [=](RunContext& ctx) {
    const auto s = realize(stream, ctx, stream.seed);
    ctx.use("counting_stats");
    const auto c = photon::counting_stats(s, window, detector);
    std::vector<json> rows;
    const double total = static_cast<double>(c.windows);
    for (std::size_t k = 0; k < c.histogram.size(); ++k) {
      const double expected = c.mean > 0.0 ? total * std::exp(static_cast<double>(k) * std::log(c.mean) - c.mean - std::lgamma(k + 1.0))
                                           : (k == 0 ? total : 0.0);
      rows.push_back(json::array({k, c.histogram[k], expected}));
    }
    ctx.table("counts", {"k", "windows", "poisson_expected"}, rows);
    ctx.summary = stream_summary(s);
    ctx.summary["counting"] = {{"window_s", c.window},          {"windows", c.windows},
                               {"mean", c.mean},                {"variance", c.variance},
                               {"fano", c.fano},                {"mandel_q", c.mandel_q},
                               {"mandel_q_standard_error", c.mandel_q_stderr},
                               {"poisson_chi2", {{"statistic", c.poisson_chi2.statistic}, {"dof", c.poisson_chi2.dof},
                                                 {"p_value", c.poisson_chi2.p_value}}},
                               {"verdict", q_verdict(c.mandel_q, c.mandel_q_stderr)}};
  };
}

/// Two-column CSV "t,counts" with a header line.
inline photon::DecaySeries read_decay_csv(const std::string& text) {
  photon::DecaySeries s;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (lineno == 1 && line.find_first_not_of("0123456789+-.eE, \t") != std::string::npos) continue;  // header
    const auto comma = line.find(',');
    double t = 0.0, c = 0.0;
    if (comma == std::string::npos || !photon::detail::parse_number(std::string_view(line).substr(0, comma), t) ||
        !photon::detail::parse_number(std::string_view(line).substr(comma + 1), c))
      throw FormatError("expected '<t>,<counts>'", lineno);
    s.t.push_back(t);
    s.counts.push_back(c);
  }
  return s;
}

inline Job plan_decay_fit(const Params& p, RunContext& ctx) {
  const auto src = p.object("series");
  if (src.has("file") == src.has("synthetic")) throw ValidationError(src.path() + " needs exactly one of 'file' or 'synthetic'");
  photon::DecaySeries series;
  json origin;
  if (src.has("file")) {
    const auto path = src.string("file");
    series = read_decay_csv(ctx.read_input(path));
    origin = {{"file", path}};
  } else {
    const auto g = src.object("synthetic");
    const auto model_name = g.string("model");
    photon::DecayModel model{};
    bool found = false;
    for (auto m : {photon::DecayModel::kExponential, photon::DecayModel::kHyperbolic, photon::DecayModel::kExponentialModulated,
                   photon::DecayModel::kHyperbolicModulated})
      if (model_name == photon::to_string(m)) model = m, found = true;
    if (!found) throw ValidationError(g.path() + ".model is not a known decay law");
    photon::DecayParams q;
    q.i0 = positive(g, "i0");
    q.tau = positive(g, "tau");
    q.p = positive(g, "p", 1.0);
    q.m = g.number("m", 0.0);
    q.omega = g.number("omega", 0.0);
    q.phi = g.number("phi", 0.0);
    if (q.m < 0.0 || q.m > 1.0) throw ValidationError(g.path() + ".m must lie in [0,1]");
    const double t0 = g.number("t_start", 0.0), dt = positive(g, "t_step", 1.0);
    const auto n = g.integer("points", 100);
    if (n > 1000000) throw ValidationError(g.path() + ".points above 1e6");
    std::vector<double> times;
    for (std::uint64_t i = 0; i < n; ++i) times.push_back(t0 + dt * static_cast<double>(i));
    series = photon::synthetic_decay(model, q, times, ctx.config.require_seed());
    origin = {{"synthetic", model_name}};
  }
  if (series.t.size() < 10) throw ValidationError("decay fit needs at least 10 points");
  for (double c : series.counts)
    if (!(c >= 0.0)) throw ValidationError("decay counts must be >= 0");
  photon::DecayFitOptions opt;
  opt.include_modulated = p.boolean("include_modulated", false);
  opt.flat_tolerance = positive(p, "flat_tolerance", opt.flat_tolerance);

  return [=](RunContext& ctx) {
    ctx.use("fit_decay");
    const auto r = photon::fit_decay(series, opt);
    std::vector<json> fits;
    json ranked = json::array();
    for (std::size_t i = 0; i < r.fits.size(); ++i) {
      const auto& f = r.fits[i];
      fits.push_back(json::array({i + 1, photon::to_string(f.model), f.params.i0, f.params.tau, f.params.p, f.params.m,
                                  f.params.omega, f.params.phi, f.sse, f.aic, f.converged}));
      json entry = {{"model", photon::to_string(f.model)}, {"aic", f.aic}, {"converged", f.converged},
                    {"i0", f.params.i0}, {"tau", f.params.tau}};
      if (photon::is_hyperbolic(f.model)) entry["p"] = f.params.p;
      if (photon::is_modulated(f.model)) {
        entry["m"] = f.params.m;
        entry["omega"] = f.params.omega;
        entry["phi"] = f.params.phi;
      }
      ranked.push_back(entry);
    }
    ctx.table("fits", {"rank", "model", "i0", "tau", "p", "m", "omega", "phi", "sse", "aic", "converged"}, fits);
    std::vector<json> rows;
    const auto& b = r.best();
    for (std::size_t i = 0; i < series.t.size(); ++i)
      rows.push_back(json::array({series.t[i], series.counts[i], photon::decay_value(b.model, b.params, series.t[i]), b.residuals[i]}));
    ctx.table("series", {"t", "counts", "best_fit", "residual"}, rows);
    ctx.summary = {{"series", origin},
                   {"points", series.t.size()},
                   {"best", photon::to_string(b.model)},
                   {"delta_aic", r.fits.size() > 1 ? r.fits[1].aic - b.aic : 0.0},
                   {"indeterminate", r.indeterminate},
                   {"ranking", ranked}};
  };
}

inline Job plan_tomo_sim(const Params& p, RunContext& ctx) {
  const auto plan = parse_tomo_sim(p);
  const auto seed = ctx.config.require_seed();
  return [=](RunContext& ctx) {
    json out = json::object();
    const auto table = run_tomo_sim(plan, ctx, seed, out);
    ctx.file("counts.json", count_table_to_json(table).dump(1) + "\n");
    ctx.summary = {{"scheme", tomo::to_string(plan.scheme)}, {"shots_per_setting", plan.shots}, {"cells", table.counts.size()}};
    ctx.summary["noise"] = out["noise"];
  };
}

inline Job plan_tomo_fit(const Params& p, RunContext& ctx) {
  const auto path = p.string("table");
  const auto text = ctx.read_input(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError("count table '" + path + "' is not valid JSON: " + e.what(), 0);
  }
  const auto table = count_table_from_json(doc);
  const auto plan = parse_fit(p);
  const std::uint64_t seed = plan.repetitions > 0 ? ctx.config.require_seed() : ctx.config.seed.value_or(0);
  return [=](RunContext& ctx) {
    json out = {{"scheme", tomo::to_string(table.scheme)}, {"shots_per_setting", table.shots_per_setting}};
    run_fit(table, plan, ctx, seed, out);
    ctx.summary = out;
  };
}

inline Job plan_bell(const Params& p, RunContext&) {
  const auto rho = parse_state(p.object("state"));
  std::optional<tomo::ChshAngles> angles;
  if (auto a = p.optional_object("angles_deg"))
    angles = tomo::ChshAngles{rad(a->number("a")), rad(a->number("a_prime")), rad(a->number("b")), rad(a->number("b_prime"))};
  const bool optimize = p.boolean("optimize", true);
  const int grid = static_cast<int>(p.integer("grid", 12));
  if (grid < 2 || grid > 64) throw ValidationError(p.path() + ".grid must lie in [2, 64]");
  if (!angles && !optimize) throw ValidationError(p.path() + ": give angles_deg or enable optimize");

  return [=](RunContext& ctx) {
    std::vector<json> rows;
    ctx.summary = json::object();
    const auto record = [&](const std::string& label, const tomo::ChshAngles& g) {
      ctx.use("chsh");
      const double s = tomo::chsh(rho, g);
      const std::array<std::pair<double, double>, 4> pairs{{{g.a, g.b}, {g.a, g.b_prime}, {g.a_prime, g.b}, {g.a_prime, g.b_prime}}};
      for (const auto& [t1, t2] : pairs) rows.push_back(json::array({label, deg(t1), deg(t2), tomo::correlator(rho, t1, t2)}));
      return s;
    };
    if (angles) {
      const double s = record("given", *angles);
      ctx.summary["given"] = {{"value", s}, {"angles_deg", {deg(angles->a), deg(angles->a_prime), deg(angles->b), deg(angles->b_prime)}}};
    }
    if (optimize) {
      ctx.use("chsh_optimize");
      const auto best = tomo::chsh_optimize(rho, grid);
      record("optimized", best.angles);
      ctx.summary["optimized"] = {{"value", best.value},
                                  {"signed_value", best.signed_value},
                                  {"angles_deg", {deg(best.angles.a), deg(best.angles.a_prime), deg(best.angles.b), deg(best.angles.b_prime)}}};
    }
    ctx.use("concurrence");
    ctx.summary["concurrence"] = tomo::concurrence(rho);
    ctx.table("correlators", {"angles", "theta_a_deg", "theta_b_deg", "correlator"}, rows);
  };
}

/// tomo_sim → reconstruction → entanglement report on the estimate, in one run.
inline Job plan_full_pipeline(const Params& p, RunContext& ctx) {
  const auto sim = parse_tomo_sim(p);
  auto fit = parse_fit(p);
  if (!fit.truth) fit.truth = sim.truth;
  const auto seed = ctx.config.require_seed();
  return [=](RunContext& ctx) {
    json out = json::object();
    const auto table = run_tomo_sim(sim, ctx, seed, out);
    ctx.file("counts.json", count_table_to_json(table).dump(1) + "\n");
    json fit_out = {{"scheme", tomo::to_string(table.scheme)}, {"shots_per_setting", table.shots_per_setting}};
    run_fit(table, fit, ctx, derive_seed(seed, 3), fit_out);
    fit_out["noise"] = out["noise"];
    ctx.summary = fit_out;
  };
}

}  // namespace detail

/// Reads and validates the parameter block of `cfg` (including input files);
/// unknown keys are rejected. The returned job does the computation.
inline Job plan(const ScenarioConfig& cfg, RunContext& ctx) {
  auto seen = std::make_shared<std::set<std::string>>();
  const Params p(cfg.parameters, "parameters", seen);
  Job job;
  switch (cfg.kind) {
    case ScenarioKind::kEvolve: job = detail::plan_evolve(p, ctx); break;
    case ScenarioKind::kEinScan: job = detail::plan_ein_scan(p, ctx); break;
    case ScenarioKind::kClicks: job = detail::plan_clicks(p, ctx); break;
    case ScenarioKind::kG2: job = detail::plan_g2(p, ctx); break;
    case ScenarioKind::kCounting: job = detail::plan_counting(p, ctx); break;
    case ScenarioKind::kDecayFit: job = detail::plan_decay_fit(p, ctx); break;
    case ScenarioKind::kTomoSim: job = detail::plan_tomo_sim(p, ctx); break;
    case ScenarioKind::kTomoFit: job = detail::plan_tomo_fit(p, ctx); break;
    case ScenarioKind::kBell: job = detail::plan_bell(p, ctx); break;
    case ScenarioKind::kFullPipeline: job = detail::plan_full_pipeline(p, ctx); break;
  }
  detail::reject_unknown(cfg.parameters, "parameters", *seen);
  return job;
}

}  // namespace einsel::harness
