#pragma once

// The file-based evaluation protocol and the physical-design evolution loop.
//
// Each evaluation round gets its own directory under the workspace:
//   round_NNNNNN/genomes.csv   - one row per species, the 17 named genes
//   round_NNNNNN/batch.csv     - species,individual,stl (stl blank when the
//                                genome cannot be compiled to geometry)
//   round_NNNNNN/sK.stl        - binary mesh for species K
// The loop then blocks until round_NNNNNN/measurements.csv appears
// (species,individual,rpm,mass_g,radius_mm; blank radius defaults to the
// plate radius), validates it, converts to SI, and scores the round as the
// summed kinetic energy. A mock evaluator with the same shape serves tests
// and dry runs.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "coev/config.hpp"
#include "coev/evolution.hpp"
#include "coev/surrogate.hpp"
#include "coev/trace.hpp"
#include "coev/turbine.hpp"
#include "coev/vawt.hpp"

namespace coev {

class MeasurementError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MeasurementTimeout : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kMeasurementHeader = "species,individual,rpm,mass_g,radius_mm";

// Parses a measurement CSV: validates the header, field count, numeric ranges
// (rpm >= 0, mass > 0), fills blank radii with the plate radius, converts to
// SI, and requires exactly one row per species 1..species_count. Errors name
// the line and field.
inline std::vector<Measurement> parse_measurements_csv(std::istream& in, int species_count,
                                                       const std::string& origin = "measurements.csv") {
  std::string line;
  if (!std::getline(in, line)) throw MeasurementError(origin + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kMeasurementHeader) {
    throw MeasurementError(origin + ":1: bad header, expected '" + std::string(kMeasurementHeader) +
                           "', got '" + line + "'");
  }
  std::vector<Measurement> rows;
  std::vector<bool> seen(static_cast<std::size_t>(species_count), false);
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    std::vector<std::string> fields;
    std::string field;
    std::istringstream row(line);
    while (std::getline(row, field, ',')) fields.push_back(detail::trim(field));
    if (!line.empty() && line.back() == ',') fields.push_back("");  // trailing blank radius
    const std::string where = origin + ":" + std::to_string(line_no);
    if (fields.size() != 5) {
      throw MeasurementError(where + ": expected 5 fields, got " + std::to_string(fields.size()));
    }
    const auto parse_num = [&](const std::string& text, const char* name) {
      try {
        std::size_t pos = 0;
        const double v = std::stod(text, &pos);
        if (pos != text.size()) throw std::invalid_argument("trailing");
        return v;
      } catch (const std::exception&) {
        throw MeasurementError(where + ": field '" + name + "' is not a number: '" + text + "'");
      }
    };
    Measurement m;
    const double sp = parse_num(fields[0], "species");
    if (sp != std::floor(sp) || sp < 1 || sp > species_count) {
      throw MeasurementError(where + ": field 'species' must be an integer in 1.." +
                             std::to_string(species_count));
    }
    m.species = static_cast<int>(sp);
    if (seen[static_cast<std::size_t>(m.species - 1)]) {
      throw MeasurementError(where + ": duplicate row for species " + std::to_string(m.species));
    }
    seen[static_cast<std::size_t>(m.species - 1)] = true;
    m.individual = static_cast<long long>(parse_num(fields[1], "individual"));
    m.rpm = parse_num(fields[2], "rpm");
    if (!std::isfinite(m.rpm) || m.rpm < 0.0) {
      throw MeasurementError(where + ": field 'rpm' must be finite and >= 0");
    }
    const double mass_g = parse_num(fields[3], "mass_g");
    if (!std::isfinite(mass_g) || mass_g <= 0.0) {
      throw MeasurementError(where + ": field 'mass_g' must be > 0");
    }
    m.mass_kg = mass_g / 1000.0;
    if (fields[4].empty()) {
      m.radius_m = kPlateRadius / 1000.0;
    } else {
      const double radius_mm = parse_num(fields[4], "radius_mm");
      if (!std::isfinite(radius_mm) || radius_mm <= 0.0) {
        throw MeasurementError(where + ": field 'radius_mm' must be > 0 (or blank for default)");
      }
      m.radius_m = radius_mm / 1000.0;
    }
    rows.push_back(m);
  }
  for (int s = 0; s < species_count; ++s) {
    if (!seen[static_cast<std::size_t>(s)]) {
      throw MeasurementError(origin + ": missing measurement for species " + std::to_string(s + 1));
    }
  }
  return rows;
}

inline std::string measurements_csv(std::span<const Measurement> ms) {
  std::string out = kMeasurementHeader;
  out += '\n';
  char buf[40];
  for (const auto& m : ms) {
    out += std::to_string(m.species);
    out += ',';
    out += std::to_string(m.individual);
    out += ',';
    std::snprintf(buf, sizeof(buf), "%.17g", m.rpm);
    out += buf;
    out += ',';
    std::snprintf(buf, sizeof(buf), "%.17g", m.mass_kg * 1000.0);
    out += buf;
    out += ',';
    std::snprintf(buf, sizeof(buf), "%.17g", m.radius_m * 1000.0);
    out += buf;
    out += '\n';
  }
  return out;
}

// -- mock measurement ---------------------------------------------------------

// Deterministic stand-in for the wind tunnel: rpm is a smooth bump over the
// bounds-normalised genome, peaking at a fixed offset from the seed design;
// mass comes from the compiled shell volume at PLA-like density. Genomes that
// fail to compile score zero rpm with a placeholder mass.
struct MockVawtEvaluator {
  MeshResolution resolution = MeshResolution::from_scalar(8);
  int species_count = 6;

  static void target_point(std::span<double> out) {
    VawtGenome seed = seed_genome();
    std::vector<double> enc(static_cast<std::size_t>(kVawtGeneCount));
    encode_vawt(seed, enc);
    for (int i = 0; i < kVawtGeneCount; ++i) {
      const double shifted =
          enc[static_cast<std::size_t>(i)] + 0.18 * std::sin(2.39996322972865332 * (i + 1));
      out[static_cast<std::size_t>(i)] = std::min(1.0, std::max(0.0, shifted));
    }
  }

  Measurement measure(const VawtGenome& g, int species) const {
    Measurement m;
    m.species = species;
    m.individual = 0;
    m.radius_m = kPlateRadius / 1000.0;
    double volume_mm3 = 0.0;
    try {
      const Turbine t = build_turbine(g, resolution);
      volume_mm3 = turbine_volume_mm3(t);
    } catch (const std::invalid_argument&) {
      m.rpm = 0.0;
      m.mass_kg = 1e-3;  // placeholder; keeps the mass invariant satisfied
      return m;
    }
    std::vector<double> enc(static_cast<std::size_t>(kVawtGeneCount));
    std::vector<double> target(static_cast<std::size_t>(kVawtGeneCount));
    encode_vawt(g, enc);
    target_point(target);
    double d2 = 0.0;
    for (int i = 0; i < kVawtGeneCount; ++i) {
      const double d = enc[static_cast<std::size_t>(i)] - target[static_cast<std::size_t>(i)];
      d2 += d * d;
    }
    m.rpm = 3800.0 * std::exp(-d2 / (2.0 * 0.35 * 0.35));
    m.mass_kg = volume_mm3 * 1.25e-3 / 1000.0;  // 1.25 g/cm^3
    return m;
  }

  double operator()(const std::vector<VawtGenome>& team) const {
    std::vector<Measurement> ms;
    ms.reserve(team.size());
    for (std::size_t s = 0; s < team.size(); ++s) {
      ms.push_back(measure(team[s], static_cast<int>(s) + 1));
    }
    return array_fitness(ms, species_count);
  }
};

// -- file-based rounds ----------------------------------------------------------

struct RoundOptions {
  std::string workspace;
  MeshResolution resolution{};
  double timeout_seconds = 600.0;
  double poll_seconds = 0.05;
};

inline std::string round_dir_name(std::uint64_t round_index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "round_%06llu", static_cast<unsigned long long>(round_index));
  return buf;
}

// Publishes one evaluation round and blocks until measurements arrive.
// Returns the array fitness; optionally hands back the parsed measurements.
inline double external_evaluation_round(const std::vector<VawtGenome>& team,
                                        std::uint64_t round_index, const RoundOptions& opts,
                                        std::vector<Measurement>* out_measurements = nullptr) {
  namespace fs = std::filesystem;
  const int S = static_cast<int>(team.size());
  const fs::path dir = fs::path(opts.workspace) / round_dir_name(round_index);
  fs::create_directories(dir);

  {
    std::ofstream gfile(dir / "genomes.csv", std::ios::binary);
    gfile << genomes_csv(std::span<const VawtGenome>(team.data(), team.size()));
  }
  std::string batch = "species,individual,stl\n";
  for (int s = 0; s < S; ++s) {
    std::string stl_name = "s" + std::to_string(s + 1) + ".stl";
    try {
      const Turbine t = build_turbine(team[static_cast<std::size_t>(s)], opts.resolution);
      write_stl((dir / stl_name).string(), t.shells, stl_name);
    } catch (const std::invalid_argument&) {
      stl_name.clear();  // unprintable design: listed with a blank filename
    }
    batch += std::to_string(s + 1);
    batch += ',';
    batch += std::to_string(round_index);
    batch += ',';
    batch += stl_name;
    batch += '\n';
  }
  {
    std::ofstream bfile(dir / "batch.csv", std::ios::binary);
    bfile << batch;
  }

  // Wait for measurements.csv; require a stable non-empty size across two
  // polls so a half-written file is not parsed.
  const fs::path mpath = dir / "measurements.csv";
  const auto t0 = std::chrono::steady_clock::now();
  std::uintmax_t last_size = 0;
  bool have_size = false;
  while (true) {
    if (fs::exists(mpath)) {
      std::error_code ec;
      const std::uintmax_t size = fs::file_size(mpath, ec);
      if (!ec && size > 0) {
        if (have_size && size == last_size) break;
        have_size = true;
        last_size = size;
      }
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (elapsed > opts.timeout_seconds) {
      throw MeasurementTimeout("timed out after " + std::to_string(opts.timeout_seconds) +
                               "s waiting for " + mpath.string());
    }
    std::this_thread::sleep_for(std::chrono::duration<double>(opts.poll_seconds));
  }

  std::ifstream in(mpath);
  if (!in) throw MeasurementError("cannot open " + mpath.string());
  std::vector<Measurement> ms = parse_measurements_csv(in, S, mpath.string());
  const double fitness = array_fitness(ms, S);
  if (out_measurements) *out_measurements = std::move(ms);
  return fitness;
}

// -- the full physical loop -------------------------------------------------------

struct VawtLoopConfig {
  int species = 6;
  EaParams ea{20, 3, 0.25, 0.0, Scheme::Best};
  SurrogateVariant variant = SurrogateVariant::OwnGenome;
  int lambda = 1000;
  int epochs = 1000;
  double rate = 0.1;
  int hidden = 10;
  int window = 20;
  double sigma_coord = 3.6;
  double sigma_twist = 18.0;
  std::uint64_t budget = 480;
  std::uint64_t warmup = 360;
  std::uint64_t seed = 1;
  int resolution = 24;
  std::string evaluator = "mock";  // "mock" or "file"
  std::string workspace;
  double timeout_seconds = 600.0;
  double poll_seconds = 0.05;

  void validate() const {
    ea.validate();
    if (species < 1) throw std::invalid_argument("vawt loop: species must be >= 1");
    if (evaluator != "mock" && evaluator != "file") {
      throw std::invalid_argument("vawt loop: evaluator must be 'mock' or 'file'");
    }
    if (evaluator == "file" && workspace.empty()) {
      throw std::invalid_argument("vawt loop: file evaluator needs a workspace directory");
    }
    if (warmup < static_cast<std::uint64_t>(species) * static_cast<std::uint64_t>(ea.pop_size)) {
      throw std::invalid_argument("vawt loop: warmup must cover the initial evaluations");
    }
    if (budget < warmup) throw std::invalid_argument("vawt loop: budget must cover the warmup");
  }

  KeyValues to_keyvalues() const {
    KeyValues kv;
    kv.set_i64("species", species);
    kv.set_i64("pop", ea.pop_size);
    kv.set_i64("tournament", ea.tournament);
    kv.set_double("mutation", ea.mutation);
    kv.set_double("crossover", ea.crossover);
    kv.set("variant", surrogate_variant_name(variant));
    kv.set_i64("lambda_m", lambda);
    kv.set_i64("epochs", epochs);
    kv.set_double("beta", rate);
    kv.set_i64("hidden", hidden);
    kv.set_i64("window", window);
    kv.set_double("sigma1", sigma_coord);
    kv.set_double("sigma2", sigma_twist);
    kv.set_u64("budget", budget);
    kv.set_u64("warmup", warmup);
    kv.set_u64("seed", seed);
    kv.set_i64("resolution", resolution);
    kv.set("evaluator", evaluator);
    kv.set("workspace", workspace);
    kv.set_double("timeout", timeout_seconds);
    kv.set_double("poll", poll_seconds);
    return kv;
  }

  static VawtLoopConfig from_keyvalues(const KeyValues& kv) {
    VawtLoopConfig cfg;
    cfg.species = kv.get_int("species", cfg.species);
    cfg.ea.pop_size = kv.get_int("pop", cfg.ea.pop_size);
    cfg.ea.tournament = kv.get_int("tournament", cfg.ea.tournament);
    cfg.ea.mutation = kv.get_double("mutation", cfg.ea.mutation);
    cfg.ea.crossover = kv.get_double("crossover", cfg.ea.crossover);
    cfg.variant = surrogate_variant_from_name(kv.get_string("variant", "b"));
    cfg.lambda = kv.get_int("lambda_m", cfg.lambda);
    cfg.epochs = kv.get_int("epochs", cfg.epochs);
    cfg.rate = kv.get_double("beta", cfg.rate);
    cfg.hidden = kv.get_int("hidden", cfg.hidden);
    cfg.window = kv.get_int("window", cfg.window);
    cfg.sigma_coord = kv.get_double("sigma1", cfg.sigma_coord);
    cfg.sigma_twist = kv.get_double("sigma2", cfg.sigma_twist);
    cfg.budget = kv.get_u64("budget", cfg.budget);
    cfg.warmup = kv.get_u64("warmup", cfg.warmup);
    cfg.seed = kv.get_u64("seed", cfg.seed);
    cfg.resolution = kv.get_int("resolution", cfg.resolution);
    cfg.evaluator = kv.get_string("evaluator", cfg.evaluator);
    cfg.workspace = kv.get_string("workspace", cfg.workspace);
    cfg.timeout_seconds = kv.get_double("timeout", cfg.timeout_seconds);
    cfg.poll_seconds = kv.get_double("poll", cfg.poll_seconds);
    cfg.validate();
    return cfg;
  }
};

struct VawtLoopResult {
  RunTrace trace;
  std::vector<VawtGenome> best_team;  // species elites at the end
  double best_fitness = 0.0;
  std::uint64_t rounds = 0;
};

namespace vawt_tag {
inline constexpr std::uint64_t kInit = 0xA201;
inline constexpr std::uint64_t kEvo = 0xA202;
}  // namespace vawt_tag

// Runs the seeded, surrogate-assisted design loop against the mock or the
// file-based evaluator.
inline VawtLoopResult run_vawt_loop(const VawtLoopConfig& cfg) {
  cfg.validate();
  VawtDomain domain;
  domain.sigma_coord = cfg.sigma_coord;
  domain.sigma_twist = cfg.sigma_twist;
  domain.seed = seed_genome();

  SurrogateParams sp;
  sp.variant = cfg.variant;
  sp.hidden = cfg.hidden;
  sp.lambda = cfg.lambda;
  sp.epochs = cfg.epochs;
  sp.rate = cfg.rate;
  sp.window = cfg.window;
  sp.window_uses_population = (cfg.variant == SurrogateVariant::Window);
  sp.target_scale = TargetScale::ByRunningMax;

  EaParams ea = cfg.ea;
  ea.scheme = Scheme::Best;

  const MeshResolution res = MeshResolution::from_scalar(cfg.resolution);
  std::uint64_t round_counter = 0;
  Engine<VawtDomain>::Evaluator evaluate;
  if (cfg.evaluator == "mock") {
    MockVawtEvaluator mock;
    mock.resolution = res;
    mock.species_count = cfg.species;
    evaluate = [mock, &round_counter](const std::vector<VawtGenome>& team) {
      ++round_counter;
      return mock(team);
    };
  } else {
    RoundOptions opts;
    opts.workspace = cfg.workspace;
    opts.resolution = res;
    opts.timeout_seconds = cfg.timeout_seconds;
    opts.poll_seconds = cfg.poll_seconds;
    evaluate = [opts, &round_counter](const std::vector<VawtGenome>& team) {
      ++round_counter;
      return external_evaluation_round(team, round_counter, opts);
    };
  }

  Engine<VawtDomain> engine(domain, ea, cfg.species, std::move(evaluate),
                            derive_seed(cfg.seed, vawt_tag::kInit),
                            derive_seed(cfg.seed, vawt_tag::kEvo));
  run_scga(engine, sp, cfg.budget, cfg.warmup);

  VawtLoopResult result;
  result.trace = engine.trace();
  result.best_fitness = engine.trace().best();
  result.rounds = round_counter;
  for (int s = 0; s < cfg.species; ++s) result.best_team.push_back(engine.elite_genome(s));
  return result;
}

}  // namespace coev
