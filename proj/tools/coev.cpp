// coev: command-line front end for the coevolution laboratory.
//
//   coev suite        comparative study over an (algorithm, K, C) grid
//   coev run          one NKCS run, full evaluation trace
//   coev dump-tables  materialise small NKCS payoff tables to CSV
//   coev vawt-compile genome CSV -> STL meshes + geometry report
//   coev vawt-loop    seeded turbine design loop (mock or file evaluator)
//   coev stats        Mann-Whitney U between two sample files
//
// Every producing subcommand writes a manifest.txt of resolved settings into
// the output directory; feeding that manifest back as the config reproduces
// the outputs byte for byte.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "coev/experiments.hpp"
#include "coev/protocol.hpp"

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

coev::KeyValues load_config(const std::string& path) {
  if (path.empty()) return {};
  return coev::KeyValues::parse_file(path);
}

// Sample files for `stats`: one value per line, or CSV whose final column is
// the value; non-numeric lines (headers) are skipped.
std::vector<double> load_samples(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open sample file: " + path);
  std::vector<double> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto comma = line.find_last_of(',');
    std::string field = comma == std::string::npos ? line : line.substr(comma + 1);
    field = coev::detail::trim(field);
    if (field.empty()) continue;
    try {
      std::size_t pos = 0;
      const double v = std::stod(field, &pos);
      if (pos == field.size()) out.push_back(v);
    } catch (const std::exception&) {
      // header or label line
    }
  }
  if (out.empty()) throw std::runtime_error("no numeric samples in " + path);
  return out;
}

int cmd_suite(const std::string& config_path, const std::string& out_dir,
              std::uint64_t* seed_override, int* workers_override) {
  coev::KeyValues kv = load_config(config_path);
  coev::SuiteConfig cfg = coev::SuiteConfig::from_keyvalues(kv);
  if (seed_override) cfg.master_seed = *seed_override;
  if (workers_override) cfg.workers = *workers_override;
  cfg.validate();
  fs::create_directories(out_dir);
  const coev::SuiteResult result = coev::run_suite(cfg);
  for (const auto& cell : result.cells) {
    const std::string name = std::string("curve_") + coev::algorithm_name(cell.algorithm) + "_k" +
                             std::to_string(cell.k) + "_c" + std::to_string(cell.c) + ".csv";
    write_text(fs::path(out_dir) / name, coev::curve_csv(cell));
  }
  write_text(fs::path(out_dir) / "summary.csv", coev::summary_csv(result));
  coev::Algorithm baseline = cfg.algorithms.front();
  for (const auto a : cfg.algorithms) {
    if (a == coev::Algorithm::CgaB) baseline = a;
  }
  write_text(fs::path(out_dir) / "significance.csv", coev::significance_csv(result, baseline));
  write_text(fs::path(out_dir) / "manifest.txt", cfg.to_keyvalues().to_string());
  std::cout << "suite: " << result.cells.size() << " cells, "
            << cfg.instances * cfg.runs << " experiments each, budget " << cfg.budget
            << "; outputs in " << out_dir << "\n";
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& out_dir,
            std::uint64_t* seed_override) {
  coev::KeyValues kv = load_config(config_path);
  coev::RunConfig rc = coev::RunConfig::from_keyvalues(kv);
  if (seed_override) rc.seed = *seed_override;
  fs::create_directories(out_dir);
  const coev::RunTrace trace = coev::run_from_config(rc);
  write_text(fs::path(out_dir) / "trace.csv", trace.to_csv());
  write_text(fs::path(out_dir) / "manifest.txt", rc.to_keyvalues().to_string());
  std::printf("run: %s consumed %llu evaluations, best team fitness %.6f\n",
              coev::algorithm_name(rc.algorithm),
              static_cast<unsigned long long>(trace.size()), trace.best());
  return 0;
}

int cmd_dump_tables(const std::string& config_path, const std::string& out_path,
                    std::uint64_t* seed_override) {
  coev::KeyValues kv = load_config(config_path);
  coev::NkcsConfig cfg = coev::NkcsConfig::from_keyvalues(kv);
  if (seed_override) cfg.seed = *seed_override;
  const coev::NkcsModel model = coev::generate_nkcs(cfg);
  std::string out = "species,gene,context,value\n";
  char buf[40];
  for (int s = 0; s < cfg.s; ++s) {
    for (int g = 0; g < cfg.n; ++g) {
      const std::vector<double> table = coev::materialize_table(model, s, g);
      for (std::size_t ctx = 0; ctx < table.size(); ++ctx) {
        out += std::to_string(s + 1);
        out += ',';
        out += std::to_string(g);
        out += ',';
        out += std::to_string(ctx);
        out += ',';
        std::snprintf(buf, sizeof(buf), "%.17g", table[ctx]);
        out += buf;
        out += '\n';
      }
    }
  }
  write_text(out_path, out);
  std::cout << "dump-tables: wrote " << out_path << "\n";
  return 0;
}

int cmd_vawt_compile(const std::string& genome_path, const std::string& out_dir, int resolution) {
  std::vector<coev::VawtGenome> genomes;
  if (genome_path.empty()) {
    genomes.push_back(coev::seed_genome());
  } else {
    std::ifstream in(genome_path);
    if (!in) throw std::runtime_error("cannot open genome file: " + genome_path);
    genomes = coev::parse_genomes_csv(in);
    if (genomes.empty()) throw std::runtime_error("no genomes in " + genome_path);
  }
  fs::create_directories(out_dir);
  const coev::MeshResolution res = coev::MeshResolution::from_scalar(resolution);
  std::string report = "genome,shells,triangles,watertight,volume_mm3,max_radius_mm,z_min,z_max\n";
  for (std::size_t i = 0; i < genomes.size(); ++i) {
    const coev::Turbine t = coev::build_turbine(genomes[i], res);
    const std::string stl_name = "turbine_" + std::to_string(i + 1) + ".stl";
    coev::write_stl((fs::path(out_dir) / stl_name).string(), t.shells, stl_name);
    std::size_t tris = 0;
    double max_r = 0.0;
    double z_lo = 0.0, z_hi = 0.0;
    bool first = true;
    for (const auto& s : t.shells) {
      tris += s.faces.size();
      max_r = std::max(max_r, coev::max_planar_radius(s));
      const auto [lo, hi] = coev::z_extent(s);
      if (first) {
        z_lo = lo;
        z_hi = hi;
        first = false;
      } else {
        z_lo = std::min(z_lo, lo);
        z_hi = std::max(z_hi, hi);
      }
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%zu,%zu,%zu,%d,%.6f,%.6f,%.6f,%.6f\n", i + 1,
                  t.shells.size(), tris, coev::turbine_watertight(t) ? 1 : 0,
                  coev::turbine_volume_mm3(t), max_r, z_lo, z_hi);
    report += buf;
  }
  write_text(fs::path(out_dir) / "report.csv", report);
  std::cout << "vawt-compile: " << genomes.size() << " turbine(s) written to " << out_dir << "\n";
  return 0;
}

int cmd_vawt_loop(const std::string& config_path, const std::string& out_dir,
                  std::uint64_t* seed_override) {
  coev::KeyValues kv = load_config(config_path);
  coev::VawtLoopConfig cfg = coev::VawtLoopConfig::from_keyvalues(kv);
  if (seed_override) cfg.seed = *seed_override;
  cfg.validate();
  fs::create_directories(out_dir);
  const coev::VawtLoopResult result = coev::run_vawt_loop(cfg);
  write_text(fs::path(out_dir) / "trace.csv", result.trace.to_csv());
  write_text(fs::path(out_dir) / "best_genomes.csv",
             coev::genomes_csv({result.best_team.data(), result.best_team.size()}));
  write_text(fs::path(out_dir) / "manifest.txt", cfg.to_keyvalues().to_string());
  std::printf("vawt-loop: %llu evaluations, best array fitness %.6g J\n",
              static_cast<unsigned long long>(result.trace.size()), result.best_fitness);
  return 0;
}

int cmd_stats(const std::string& a_path, const std::string& b_path) {
  const std::vector<double> a = load_samples(a_path);
  const std::vector<double> b = load_samples(b_path);
  const coev::MannWhitneyResult r = coev::mann_whitney_u(a, b);
  std::printf("n1=%zu n2=%zu U=%.1f p=%.6g method=%s significant=%s\n", a.size(), b.size(), r.u,
              r.p, r.exact ? "exact" : "normal", r.p < 0.05 ? "yes" : "no");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic coevolution laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::string out_file = "tables.csv";
  std::string genome_path;
  std::string sample_a, sample_b;
  std::uint64_t seed_value = 0;
  int workers_value = 0;
  int resolution = 24;
  bool seed_given = false;
  bool workers_given = false;

  auto* suite = app.add_subcommand("suite", "run the comparative study grid");
  suite->add_option("--config", config_path, "suite config file (key=value)");
  suite->add_option("--out", out_dir, "output directory")->capture_default_str();
  suite->add_option("--seed", seed_value, "override the master seed")
      ->each([&](const std::string&) { seed_given = true; });
  suite->add_option("--workers", workers_value, "worker threads")
      ->each([&](const std::string&) { workers_given = true; });

  auto* run = app.add_subcommand("run", "run one configuration, write the trace");
  run->add_option("--config", config_path, "run config file (key=value)");
  run->add_option("--out", out_dir, "output directory")->capture_default_str();
  run->add_option("--seed", seed_value, "override the master seed")
      ->each([&](const std::string&) { seed_given = true; });

  auto* dump = app.add_subcommand("dump-tables", "materialise payoff tables to CSV");
  dump->add_option("--config", config_path, "landscape config file (key=value)");
  dump->add_option("--out", out_file, "output CSV file")->capture_default_str();
  dump->add_option("--seed", seed_value, "override the landscape seed")
      ->each([&](const std::string&) { seed_given = true; });

  auto* compile = app.add_subcommand("vawt-compile", "compile turbine genomes to STL");
  compile->add_option("--genomes", genome_path, "genome CSV (defaults to the seed design)");
  compile->add_option("--out", out_dir, "output directory")->capture_default_str();
  compile->add_option("--resolution", resolution, "mesh resolution scalar")->capture_default_str();

  auto* loop = app.add_subcommand("vawt-loop", "run the turbine design loop");
  loop->add_option("--config", config_path, "loop config file (key=value)");
  loop->add_option("--out", out_dir, "output directory")->capture_default_str();
  loop->add_option("--seed", seed_value, "override the loop seed")
      ->each([&](const std::string&) { seed_given = true; });

  auto* stats = app.add_subcommand("stats", "Mann-Whitney U between two sample files");
  stats->add_option("a", sample_a, "first sample file")->required();
  stats->add_option("b", sample_b, "second sample file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (suite->parsed()) {
      return cmd_suite(config_path, out_dir, seed_given ? &seed_value : nullptr,
                       workers_given ? &workers_value : nullptr);
    }
    if (run->parsed()) return cmd_run(config_path, out_dir, seed_given ? &seed_value : nullptr);
    if (dump->parsed()) {
      return cmd_dump_tables(config_path, out_file, seed_given ? &seed_value : nullptr);
    }
    if (compile->parsed()) return cmd_vawt_compile(genome_path, out_dir, resolution);
    if (loop->parsed()) return cmd_vawt_loop(config_path, out_dir, seed_given ? &seed_value : nullptr);
    if (stats->parsed()) return cmd_stats(sample_a, sample_b);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
