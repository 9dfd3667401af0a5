#pragma once

// The comparative study: a grid of (algorithm, K, C) cells, each cell holding
// instances x runs independent experiments on shared NKCS landscapes.
//
// Seed discipline gives exact pairing and reproducibility:
//   * the landscape seed depends on (master, K, C, instance) only, so every
//     algorithm sees the same 10 landscapes per cell;
//   * the init stream depends on (master, K, C, instance, run) but NOT the
//     algorithm, so paired runs start from identical populations;
//   * the evo stream additionally hashes the algorithm id.
// Experiments are dealt to a small thread pool; results land in preallocated
// slots indexed by (cell, experiment), so means and exports are byte-identical
// for any worker count.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "coev/config.hpp"
#include "coev/evolution.hpp"
#include "coev/nkcs.hpp"
#include "coev/stats.hpp"
#include "coev/surrogate.hpp"
#include "coev/trace.hpp"

namespace coev {

enum class Algorithm {
  CgaB,
  CgaBr,
  CgaRe,
  CgaO,
  ScgaB,
  ScgaA,
  ScgaP,
  ScgaBw,
};

inline constexpr Algorithm kAllAlgorithms[] = {
    Algorithm::CgaB, Algorithm::CgaBr, Algorithm::CgaRe, Algorithm::CgaO,
    Algorithm::ScgaB, Algorithm::ScgaA, Algorithm::ScgaP, Algorithm::ScgaBw,
};

inline const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::CgaB: return "cga-b";
    case Algorithm::CgaBr: return "cga-br";
    case Algorithm::CgaRe: return "cga-re";
    case Algorithm::CgaO: return "cga-o";
    case Algorithm::ScgaB: return "scga-b";
    case Algorithm::ScgaA: return "scga-a";
    case Algorithm::ScgaP: return "scga-p";
    case Algorithm::ScgaBw: return "scga-bw";
  }
  throw std::logic_error("unknown algorithm");
}

inline Algorithm algorithm_from_name(const std::string& name) {
  for (const Algorithm a : kAllAlgorithms) {
    if (name == algorithm_name(a)) return a;
  }
  throw std::invalid_argument("unknown algorithm '" + name + "'");
}

inline bool is_surrogate(Algorithm a) {
  switch (a) {
    case Algorithm::ScgaB:
    case Algorithm::ScgaA:
    case Algorithm::ScgaP:
    case Algorithm::ScgaBw:
      return true;
    default:
      return false;
  }
}

inline Scheme scheme_of(Algorithm a) {
  switch (a) {
    case Algorithm::CgaBr: return Scheme::BestPlusRandom;
    case Algorithm::CgaRe: return Scheme::Reevaluate;
    case Algorithm::CgaO: return Scheme::AllOffspring;
    default: return Scheme::Best;  // all surrogate variants ride on Best
  }
}

inline SurrogateVariant surrogate_variant_of(Algorithm a) {
  switch (a) {
    case Algorithm::ScgaB: return SurrogateVariant::OwnGenome;
    case Algorithm::ScgaA: return SurrogateVariant::WholeTeam;
    case Algorithm::ScgaP: return SurrogateVariant::ManyParents;
    case Algorithm::ScgaBw: return SurrogateVariant::Window;
    default: throw std::invalid_argument("not a surrogate algorithm");
  }
}

inline std::uint64_t algorithm_id(Algorithm a) { return static_cast<std::uint64_t>(a); }

namespace exp_tag {
inline constexpr std::uint64_t kInstance = 0xE001;
inline constexpr std::uint64_t kInit = 0xE002;
inline constexpr std::uint64_t kEvo = 0xE003;
}  // namespace exp_tag

struct SuiteConfig {
  std::vector<Algorithm> algorithms{Algorithm::CgaB, Algorithm::CgaBr, Algorithm::CgaRe,
                                    Algorithm::CgaO};
  std::vector<int> k_values{2, 6};
  std::vector<int> c_values{2, 8};
  int instances = 10;
  int runs = 10;
  std::uint64_t budget = 3600;
  std::vector<std::uint64_t> checkpoints{480, 3600};
  std::uint64_t master_seed = 1;
  int n = 20;
  int species = 6;
  EaParams ea{};                 // scheme is overridden per algorithm
  SurrogateParams surrogate{};   // variant is overridden per algorithm
  std::uint64_t warmup = 0;      // 0: surrogate turns start right after init
  int workers = 1;

  void validate() const {
    if (algorithms.empty()) throw std::invalid_argument("suite: no algorithms");
    if (k_values.empty() || c_values.empty()) throw std::invalid_argument("suite: empty k/c grid");
    if (instances < 1 || runs < 1) throw std::invalid_argument("suite: instances and runs must be >= 1");
    ea.validate();
    surrogate.validate();
    if (checkpoints.empty()) throw std::invalid_argument("suite: no checkpoints");
    for (std::size_t i = 0; i < checkpoints.size(); ++i) {
      if (checkpoints[i] == 0 || checkpoints[i] > budget) {
        throw std::invalid_argument("suite: checkpoints must lie in [1, budget]");
      }
      if (i > 0 && checkpoints[i] <= checkpoints[i - 1]) {
        throw std::invalid_argument("suite: checkpoints must be strictly increasing");
      }
    }
    if (budget < static_cast<std::uint64_t>(species) * static_cast<std::uint64_t>(ea.pop_size)) {
      throw std::invalid_argument("suite: budget below the initial S*P evaluations");
    }
  }

  KeyValues to_keyvalues() const {
    KeyValues kv;
    std::string algs;
    for (const Algorithm a : algorithms) {
      if (!algs.empty()) algs += ',';
      algs += algorithm_name(a);
    }
    kv.set("algorithms", algs);
    kv.set("k_values", join_ints(k_values));
    kv.set("c_values", join_ints(c_values));
    kv.set_i64("instances", instances);
    kv.set_i64("runs", runs);
    kv.set_u64("budget", budget);
    std::string cps;
    for (const auto cp : checkpoints) {
      if (!cps.empty()) cps += ',';
      cps += std::to_string(cp);
    }
    kv.set("checkpoints", cps);
    kv.set_u64("seed", master_seed);
    kv.set_i64("n", n);
    kv.set_i64("species", species);
    kv.set_i64("pop", ea.pop_size);
    kv.set_i64("tournament", ea.tournament);
    kv.set_double("mutation", ea.mutation);
    kv.set_double("crossover", ea.crossover);
    kv.set_i64("lambda_m", surrogate.lambda);
    kv.set_i64("epochs", surrogate.epochs);
    kv.set_double("beta", surrogate.rate);
    kv.set_i64("hidden", surrogate.hidden);
    kv.set_i64("window", surrogate.window);
    kv.set_u64("warmup", warmup);
    kv.set_i64("workers", workers);
    return kv;
  }

  static SuiteConfig from_keyvalues(const KeyValues& kv) {
    SuiteConfig cfg;
    if (kv.has("algorithms")) {
      cfg.algorithms.clear();
      for (const std::string& item : split_list(kv.get_string("algorithms"))) {
        cfg.algorithms.push_back(algorithm_from_name(item));
      }
    }
    if (kv.has("k_values")) cfg.k_values = parse_int_list(kv, "k_values");
    if (kv.has("c_values")) cfg.c_values = parse_int_list(kv, "c_values");
    cfg.instances = kv.get_int("instances", cfg.instances);
    cfg.runs = kv.get_int("runs", cfg.runs);
    cfg.budget = kv.get_u64("budget", cfg.budget);
    cfg.checkpoints = kv.get_u64_list("checkpoints", cfg.checkpoints);
    cfg.master_seed = kv.get_u64("seed", cfg.master_seed);
    cfg.n = kv.get_int("n", cfg.n);
    cfg.species = kv.get_int("species", cfg.species);
    cfg.ea.pop_size = kv.get_int("pop", cfg.ea.pop_size);
    cfg.ea.tournament = kv.get_int("tournament", cfg.ea.tournament);
    cfg.ea.mutation = kv.get_double("mutation", cfg.ea.mutation);
    cfg.ea.crossover = kv.get_double("crossover", cfg.ea.crossover);
    cfg.surrogate.lambda = kv.get_int("lambda_m", cfg.surrogate.lambda);
    cfg.surrogate.epochs = kv.get_int("epochs", cfg.surrogate.epochs);
    cfg.surrogate.rate = kv.get_double("beta", cfg.surrogate.rate);
    cfg.surrogate.hidden = kv.get_int("hidden", cfg.surrogate.hidden);
    cfg.surrogate.window = kv.get_int("window", cfg.surrogate.window);
    cfg.warmup = kv.get_u64("warmup", cfg.warmup);
    cfg.workers = kv.get_int("workers", cfg.workers);
    cfg.validate();
    return cfg;
  }

 private:
  static std::string join_ints(const std::vector<int>& xs) {
    std::string out;
    for (const int x : xs) {
      if (!out.empty()) out += ',';
      out += std::to_string(x);
    }
    return out;
  }

  static std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (const char ch : s) {
      if (ch == ',') {
        if (!detail::trim(cur).empty()) out.push_back(detail::trim(cur));
        cur.clear();
      } else {
        cur += ch;
      }
    }
    if (!detail::trim(cur).empty()) out.push_back(detail::trim(cur));
    return out;
  }

  static std::vector<int> parse_int_list(const KeyValues& kv, const std::string& key) {
    std::vector<int> out;
    for (const auto v : kv.get_u64_list(key)) out.push_back(static_cast<int>(v));
    return out;
  }
};

// One complete run of one algorithm on one landscape. Returns the full trace.
inline RunTrace run_single(Algorithm alg, const NkcsModel& model, const SuiteConfig& cfg,
                           std::uint64_t init_seed, std::uint64_t evo_seed) {
  EaParams ea = cfg.ea;
  ea.scheme = scheme_of(alg);
  BinaryDomain domain{cfg.n, std::nullopt};
  Engine<BinaryDomain> engine(
      domain, ea, cfg.species,
      [&model](const std::vector<BinaryGenome>& team) { return model.team_fitness(team); },
      init_seed, evo_seed);
  if (is_surrogate(alg)) {
    SurrogateParams sp = cfg.surrogate;
    sp.variant = surrogate_variant_of(alg);
    sp.target_scale = TargetScale::BySpeciesCount;
    sp.window_uses_population = false;
    const std::uint64_t min_warm = static_cast<std::uint64_t>(cfg.species) *
                                   static_cast<std::uint64_t>(cfg.ea.pop_size);
    run_scga(engine, sp, cfg.budget, std::max(cfg.warmup, min_warm));
  } else {
    engine.run(cfg.budget);
  }
  return engine.trace();
}

struct CellResult {
  Algorithm algorithm{};
  int k = 0;
  int c = 0;
  // best-so-far per evaluation ordinal, one row per experiment; experiment
  // index = instance * runs + run (the canonical order)
  std::vector<std::vector<double>> curves;

  std::vector<double> checkpoint_samples(std::uint64_t checkpoint) const {
    std::vector<double> out;
    out.reserve(curves.size());
    for (const auto& curve : curves) {
      if (checkpoint == 0 || checkpoint > curve.size()) {
        throw std::out_of_range("cell: checkpoint beyond curve length");
      }
      out.push_back(curve[static_cast<std::size_t>(checkpoint - 1)]);
    }
    return out;
  }

  std::vector<double> mean_curve() const {
    std::vector<double> out;
    if (curves.empty()) return out;
    out.assign(curves.front().size(), 0.0);
    for (const auto& curve : curves) {
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += curve[i];
    }
    for (auto& v : out) v /= static_cast<double>(curves.size());
    return out;
  }

  std::vector<double> sd_curve() const {
    std::vector<double> out;
    if (curves.empty()) return out;
    const std::vector<double> m = mean_curve();
    out.assign(m.size(), 0.0);
    if (curves.size() < 2) return out;
    for (const auto& curve : curves) {
      for (std::size_t i = 0; i < out.size(); ++i) {
        const double d = curve[i] - m[i];
        out[i] += d * d;
      }
    }
    for (auto& v : out) v = std::sqrt(v / static_cast<double>(curves.size() - 1));
    return out;
  }
};

struct SuiteResult {
  SuiteConfig config;
  std::vector<CellResult> cells;  // algorithm-major, then k, then c (list order)

  const CellResult& cell(Algorithm alg, int k, int c) const {
    for (const auto& cr : cells) {
      if (cr.algorithm == alg && cr.k == k && cr.c == c) return cr;
    }
    throw std::out_of_range("suite: no such cell");
  }
};

// Best-so-far curve of one experiment, padded to `budget` entries in case a
// scheme's turn cost cannot exactly finish the budget.
inline std::vector<double> run_experiment_curve(const SuiteConfig& cfg, Algorithm alg, int k,
                                                int c, int instance, int run) {
  NkcsConfig mc;
  mc.n = cfg.n;
  mc.k = k;
  mc.c = c;
  mc.s = cfg.species;
  mc.topology = "chain";
  mc.seed = derive_seed(cfg.master_seed, exp_tag::kInstance, static_cast<std::uint64_t>(k),
                        static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(instance));
  const NkcsModel model = generate_nkcs(mc);
  const std::uint64_t init_seed =
      derive_seed(cfg.master_seed, exp_tag::kInit, static_cast<std::uint64_t>(k),
                  static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(instance),
                  static_cast<std::uint64_t>(run));
  const std::uint64_t evo_seed =
      derive_seed(cfg.master_seed, exp_tag::kEvo, algorithm_id(alg),
                  static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(c),
                  static_cast<std::uint64_t>(instance), static_cast<std::uint64_t>(run));
  const RunTrace trace = run_single(alg, model, cfg, init_seed, evo_seed);
  std::vector<double> curve;
  curve.reserve(static_cast<std::size_t>(cfg.budget));
  for (const auto& rec : trace.records()) curve.push_back(rec.best_so_far);
  while (curve.size() < cfg.budget) curve.push_back(curve.back());
  return curve;
}

inline SuiteResult run_suite(const SuiteConfig& cfg) {
  cfg.validate();
  SuiteResult result;
  result.config = cfg;
  struct Job {
    std::size_t cell;
    std::size_t slot;
    Algorithm alg;
    int k, c, instance, run;
  };
  std::vector<Job> jobs;
  for (const Algorithm alg : cfg.algorithms) {
    for (const int k : cfg.k_values) {
      for (const int c : cfg.c_values) {
        CellResult cell;
        cell.algorithm = alg;
        cell.k = k;
        cell.c = c;
        cell.curves.resize(static_cast<std::size_t>(cfg.instances) *
                           static_cast<std::size_t>(cfg.runs));
        const std::size_t cell_index = result.cells.size();
        for (int instance = 0; instance < cfg.instances; ++instance) {
          for (int run = 0; run < cfg.runs; ++run) {
            jobs.push_back({cell_index,
                            static_cast<std::size_t>(instance) * static_cast<std::size_t>(cfg.runs) +
                                static_cast<std::size_t>(run),
                            alg, k, c, instance, run});
          }
        }
        result.cells.push_back(std::move(cell));
      }
    }
  }

  std::atomic<std::size_t> cursor{0};
  std::atomic<bool> failed{false};
  std::string error_message;
  std::mutex error_mutex;
  auto worker = [&]() {
    while (true) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= jobs.size() || failed.load()) break;
      const Job& job = jobs[i];
      try {
        result.cells[job.cell].curves[job.slot] =
            run_experiment_curve(cfg, job.alg, job.k, job.c, job.instance, job.run);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!failed.exchange(true)) error_message = e.what();
      }
    }
  };

  const int workers = std::max(1, cfg.workers);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failed.load()) throw std::runtime_error("suite: experiment failed: " + error_message);
  return result;
}

// -- single runs --------------------------------------------------------------

// One run from a config file. With default model/init/evo derivations this is
// exactly the suite's (k, c, instance 0, run 0) experiment for the same master
// seed, so single runs can reproduce any suite curve.
struct RunConfig {
  Algorithm algorithm = Algorithm::CgaB;
  int n = 20;
  int k = 2;
  int c = 2;
  int species = 6;
  std::string topology = "chain";
  std::uint64_t seed = 1;                    // master seed (init/evo streams)
  std::optional<std::uint64_t> model_seed{};  // landscape seed; derived if absent
  EaParams ea{};
  SurrogateParams surrogate{};
  std::uint64_t budget = 3600;
  std::uint64_t warmup = 0;

  std::uint64_t effective_model_seed() const {
    return model_seed ? *model_seed
                      : derive_seed(seed, exp_tag::kInstance, static_cast<std::uint64_t>(k),
                                    static_cast<std::uint64_t>(c), std::uint64_t{0});
  }

  KeyValues to_keyvalues() const {
    KeyValues kv;
    kv.set("algorithm", algorithm_name(algorithm));
    kv.set_i64("n", n);
    kv.set_i64("k", k);
    kv.set_i64("c", c);
    kv.set_i64("species", species);
    kv.set("topology", topology);
    kv.set_u64("seed", seed);
    kv.set_u64("model_seed", effective_model_seed());
    kv.set_i64("pop", ea.pop_size);
    kv.set_i64("tournament", ea.tournament);
    kv.set_double("mutation", ea.mutation);
    kv.set_double("crossover", ea.crossover);
    kv.set_i64("lambda_m", surrogate.lambda);
    kv.set_i64("epochs", surrogate.epochs);
    kv.set_double("beta", surrogate.rate);
    kv.set_i64("hidden", surrogate.hidden);
    kv.set_i64("window", surrogate.window);
    kv.set_u64("budget", budget);
    kv.set_u64("warmup", warmup);
    return kv;
  }

  static RunConfig from_keyvalues(const KeyValues& kv) {
    RunConfig rc;
    rc.algorithm = algorithm_from_name(kv.get_string("algorithm", algorithm_name(rc.algorithm)));
    rc.n = kv.get_int("n", rc.n);
    rc.k = kv.get_int("k", rc.k);
    rc.c = kv.get_int("c", rc.c);
    rc.species = kv.get_int("species", rc.species);
    rc.topology = kv.get_string("topology", rc.topology);
    rc.seed = kv.get_u64("seed", rc.seed);
    if (kv.has("model_seed")) rc.model_seed = kv.get_u64("model_seed");
    rc.ea.pop_size = kv.get_int("pop", rc.ea.pop_size);
    rc.ea.tournament = kv.get_int("tournament", rc.ea.tournament);
    rc.ea.mutation = kv.get_double("mutation", rc.ea.mutation);
    rc.ea.crossover = kv.get_double("crossover", rc.ea.crossover);
    rc.surrogate.lambda = kv.get_int("lambda_m", rc.surrogate.lambda);
    rc.surrogate.epochs = kv.get_int("epochs", rc.surrogate.epochs);
    rc.surrogate.rate = kv.get_double("beta", rc.surrogate.rate);
    rc.surrogate.hidden = kv.get_int("hidden", rc.surrogate.hidden);
    rc.surrogate.window = kv.get_int("window", rc.surrogate.window);
    rc.budget = kv.get_u64("budget", rc.budget);
    rc.warmup = kv.get_u64("warmup", rc.warmup);
    rc.ea.validate();
    rc.surrogate.validate();
    return rc;
  }
};

inline RunTrace run_from_config(const RunConfig& rc) {
  NkcsConfig mc;
  mc.n = rc.n;
  mc.k = rc.k;
  mc.c = rc.c;
  mc.s = rc.species;
  mc.topology = rc.topology;
  mc.seed = rc.effective_model_seed();
  const NkcsModel model = generate_nkcs(mc);
  SuiteConfig cfg;
  cfg.n = rc.n;
  cfg.species = rc.species;
  cfg.ea = rc.ea;
  cfg.surrogate = rc.surrogate;
  cfg.budget = rc.budget;
  cfg.warmup = rc.warmup;
  const std::uint64_t init_seed =
      derive_seed(rc.seed, exp_tag::kInit, static_cast<std::uint64_t>(rc.k),
                  static_cast<std::uint64_t>(rc.c), std::uint64_t{0}, std::uint64_t{0});
  const std::uint64_t evo_seed =
      derive_seed(rc.seed, exp_tag::kEvo, algorithm_id(rc.algorithm),
                  static_cast<std::uint64_t>(rc.k), static_cast<std::uint64_t>(rc.c),
                  std::uint64_t{0}, std::uint64_t{0});
  return run_single(rc.algorithm, model, cfg, init_seed, evo_seed);
}

// -- exports ----------------------------------------------------------------

inline std::string curve_csv(const CellResult& cell) {
  const auto mean = cell.mean_curve();
  const auto sd = cell.sd_curve();
  std::string out = "eval_ordinal,mean_best,sd_best\n";
  for (std::size_t i = 0; i < mean.size(); ++i) {
    out += std::to_string(i + 1);
    out += ',';
    append_double(out, mean[i]);
    out += ',';
    append_double(out, sd[i]);
    out += '\n';
  }
  return out;
}

inline std::string summary_csv(const SuiteResult& res) {
  std::string out = "algorithm,k,c,checkpoint,mean,sd\n";
  for (const auto& cell : res.cells) {
    for (const auto cp : res.config.checkpoints) {
      const auto samples = cell.checkpoint_samples(cp);
      out += algorithm_name(cell.algorithm);
      out += ',';
      out += std::to_string(cell.k);
      out += ',';
      out += std::to_string(cell.c);
      out += ',';
      out += std::to_string(cp);
      out += ',';
      append_double(out, mean_of(samples));
      out += ',';
      append_double(out, sample_sd(samples));
      out += '\n';
    }
  }
  return out;
}

// Two-sided Mann-Whitney U of every algorithm against `baseline`, per cell and
// checkpoint. Baseline rows keep their mean but leave u/p/significant blank.
inline std::string significance_csv(const SuiteResult& res, Algorithm baseline,
                                    double alpha = 0.05) {
  std::string out = "algorithm,k,c,checkpoint,mean,u,p,significant\n";
  for (const auto& cell : res.cells) {
    for (const auto cp : res.config.checkpoints) {
      const auto samples = cell.checkpoint_samples(cp);
      out += algorithm_name(cell.algorithm);
      out += ',';
      out += std::to_string(cell.k);
      out += ',';
      out += std::to_string(cell.c);
      out += ',';
      out += std::to_string(cp);
      out += ',';
      append_double(out, mean_of(samples));
      if (cell.algorithm == baseline) {
        out += ",,,\n";
        continue;
      }
      const auto& base = res.cell(baseline, cell.k, cell.c);
      const auto base_samples = base.checkpoint_samples(cp);
      const MannWhitneyResult mw = mann_whitney_u(samples, base_samples);
      out += ',';
      append_double(out, mw.u);
      out += ',';
      append_double(out, mw.p);
      out += ',';
      out += (mw.p < alpha) ? '1' : '0';
      out += '\n';
    }
  }
  return out;
}

}  // namespace coev
