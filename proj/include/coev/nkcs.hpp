#pragma once

// NKCS fitness landscapes: S coupled species, each an N-bit genome whose genes
// depend on K intra-genome alleles and C alleles from each neighbouring
// species. Gene payoff tables are lazy: each entry is a stable hash of
// (model seed, species, gene, context bits) mapped to [0,1), so a model of any
// width costs O(1) memory and two models built from the same seed agree
// everywhere. Small tables can also be materialised for inspection.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "coev/config.hpp"
#include "coev/genome.hpp"
#include "coev/rng.hpp"

namespace coev {

struct NkcsConfig {
  int n = 20;       // genes per species
  int k = 2;        // intra-genome links per gene
  int c = 2;        // links per neighbouring species per gene
  int s = 6;        // number of species
  std::string topology = "chain";
  std::uint64_t seed = 1;

  void validate() const {
    if (n < 1) throw std::invalid_argument("nkcs: n must be >= 1");
    if (s < 1) throw std::invalid_argument("nkcs: s must be >= 1");
    if (k < 0 || k > n - 1) throw std::invalid_argument("nkcs: k must be in [0, n-1]");
    if (c < 0 || c > n) throw std::invalid_argument("nkcs: c must be in [0, n]");
    if (topology != "chain") throw std::invalid_argument("nkcs: unknown topology '" + topology + "'");
    // widest context: own allele + k intra + 2 neighbours * c alleles
    const int width = 1 + k + 2 * c;
    if (width > 64) throw std::invalid_argument("nkcs: context width exceeds 64 bits");
  }

  KeyValues to_keyvalues() const {
    KeyValues kv;
    kv.set_i64("n", n);
    kv.set_i64("k", k);
    kv.set_i64("c", c);
    kv.set_i64("s", s);
    kv.set("topology", topology);
    kv.set_u64("seed", seed);
    return kv;
  }

  static NkcsConfig from_keyvalues(const KeyValues& kv) {
    NkcsConfig cfg;
    cfg.n = kv.get_int("n", cfg.n);
    cfg.k = kv.get_int("k", cfg.k);
    cfg.c = kv.get_int("c", cfg.c);
    cfg.s = kv.get_int("s", cfg.s);
    cfg.topology = kv.get_string("topology", cfg.topology);
    cfg.seed = kv.get_u64("seed", cfg.seed);
    cfg.validate();
    return cfg;
  }
};

// Chain topology: species i touches i-1 and i+1 (0-based, ascending order).
inline std::vector<int> chain_neighbors(int species, int species_count) {
  std::vector<int> out;
  if (species > 0) out.push_back(species - 1);
  if (species + 1 < species_count) out.push_back(species + 1);
  return out;
}

namespace nkcs_tag {
inline constexpr std::uint64_t kIntra = 0x6C01;
inline constexpr std::uint64_t kInter = 0x6C02;
inline constexpr std::uint64_t kTable = 0x6C03;
}  // namespace nkcs_tag

// Payoff table entry for a gene's context, derived purely from the seed.
inline double nkcs_table_value(std::uint64_t model_seed, int species, int gene, std::uint64_t context) {
  return unit_from_bits(derive_seed(model_seed, nkcs_tag::kTable,
                                    static_cast<std::uint64_t>(species),
                                    static_cast<std::uint64_t>(gene), context));
}

struct NkcsModel {
  using Oracle = std::function<double(int species, int gene, std::uint64_t context)>;

  NkcsConfig config;
  std::vector<std::vector<int>> neighbors;                       // [species] ascending
  std::vector<std::vector<std::vector<int>>> intra_links;       // [species][gene] sorted gene indices
  std::vector<std::vector<std::vector<std::vector<int>>>> inter_links;  // [species][gene][neighbor] sorted
  Oracle oracle;  // injectable; defaults to the hash table

  int context_width(int species) const {
    return 1 + config.k + static_cast<int>(neighbors[static_cast<std::size_t>(species)].size()) * config.c;
  }

  // Packs the context bits for one gene, most-significant bit first, in the
  // order: own allele, intra-linked alleles (ascending gene index), then for
  // each neighbour in ascending species order its C linked alleles (ascending
  // gene index).
  std::uint64_t context_of(int species, int gene, const std::vector<BinaryGenome>& team) const {
    check_team(team);
    const auto& own = team[static_cast<std::size_t>(species)];
    std::uint64_t ctx = own[static_cast<std::size_t>(gene)] & 1u;
    for (const int g : intra_links[static_cast<std::size_t>(species)][static_cast<std::size_t>(gene)]) {
      ctx = (ctx << 1) | (own[static_cast<std::size_t>(g)] & 1u);
    }
    const auto& nbrs = neighbors[static_cast<std::size_t>(species)];
    for (std::size_t j = 0; j < nbrs.size(); ++j) {
      const auto& other = team[static_cast<std::size_t>(nbrs[j])];
      for (const int g : inter_links[static_cast<std::size_t>(species)][static_cast<std::size_t>(gene)][j]) {
        ctx = (ctx << 1) | (other[static_cast<std::size_t>(g)] & 1u);
      }
    }
    return ctx;
  }

  // Mean gene payoff for one species within a team.
  double species_fitness(int species, const std::vector<BinaryGenome>& team) const {
    check_team(team);
    if (species < 0 || species >= config.s) throw std::invalid_argument("nkcs: species out of range");
    double sum = 0.0;
    for (int g = 0; g < config.n; ++g) {
      sum += oracle(species, g, context_of(species, g, team));
    }
    return sum / static_cast<double>(config.n);
  }

  // Sum of species fitnesses; the quantity the coevolutionary runs maximise.
  double team_fitness(const std::vector<BinaryGenome>& team) const {
    double sum = 0.0;
    for (int s = 0; s < config.s; ++s) sum += species_fitness(s, team);
    return sum;
  }

  void check_team(const std::vector<BinaryGenome>& team) const {
    if (static_cast<int>(team.size()) != config.s) {
      throw std::invalid_argument("nkcs: team must contain exactly one genome per species");
    }
    for (const auto& g : team) {
      if (static_cast<int>(g.size()) != config.n) {
        throw std::invalid_argument("nkcs: genome length mismatch");
      }
    }
  }
};

// Builds a model: samples the link structure from the seed and installs the
// lazy hash oracle. Intra links are drawn without replacement from the other
// N-1 genes; inter links are drawn without replacement from all N genes of the
// neighbour (a gene may be both intra- and inter-linked to the same index in
// different species; the samples are independent).
inline NkcsModel generate_nkcs(const NkcsConfig& cfg) {
  cfg.validate();
  NkcsModel m;
  m.config = cfg;
  m.neighbors.resize(static_cast<std::size_t>(cfg.s));
  m.intra_links.resize(static_cast<std::size_t>(cfg.s));
  m.inter_links.resize(static_cast<std::size_t>(cfg.s));
  std::vector<int> sample;
  for (int s = 0; s < cfg.s; ++s) {
    m.neighbors[static_cast<std::size_t>(s)] = chain_neighbors(s, cfg.s);
    m.intra_links[static_cast<std::size_t>(s)].resize(static_cast<std::size_t>(cfg.n));
    m.inter_links[static_cast<std::size_t>(s)].resize(static_cast<std::size_t>(cfg.n));
    for (int g = 0; g < cfg.n; ++g) {
      {
        Rng rng(derive_seed(cfg.seed, nkcs_tag::kIntra, static_cast<std::uint64_t>(s),
                            static_cast<std::uint64_t>(g)));
        rng.sample_distinct(cfg.k, cfg.n, sample, /*exclude=*/g);
        std::sort(sample.begin(), sample.end());
        m.intra_links[static_cast<std::size_t>(s)][static_cast<std::size_t>(g)] = sample;
      }
      auto& per_neighbor = m.inter_links[static_cast<std::size_t>(s)][static_cast<std::size_t>(g)];
      per_neighbor.resize(m.neighbors[static_cast<std::size_t>(s)].size());
      for (std::size_t j = 0; j < m.neighbors[static_cast<std::size_t>(s)].size(); ++j) {
        const int nbr = m.neighbors[static_cast<std::size_t>(s)][j];
        Rng rng(derive_seed(cfg.seed, nkcs_tag::kInter, static_cast<std::uint64_t>(s),
                            static_cast<std::uint64_t>(g), static_cast<std::uint64_t>(nbr)));
        rng.sample_distinct(cfg.c, cfg.n, sample);
        std::sort(sample.begin(), sample.end());
        per_neighbor[j] = sample;
      }
    }
  }
  const std::uint64_t seed = cfg.seed;
  m.oracle = [seed](int species, int gene, std::uint64_t context) {
    return nkcs_table_value(seed, species, gene, context);
  };
  return m;
}

// Materialises one gene's payoff table (2^width rows, indexed by context).
// Refused above 16 bits of context to keep memory bounded.
inline std::vector<double> materialize_table(const NkcsModel& m, int species, int gene) {
  const int width = m.context_width(species);
  if (width > 16) {
    throw std::invalid_argument("nkcs: refusing to materialise a table wider than 16 bits (got " +
                                std::to_string(width) + ")");
  }
  const std::uint64_t rows = 1ull << width;
  std::vector<double> table(static_cast<std::size_t>(rows));
  for (std::uint64_t ctx = 0; ctx < rows; ++ctx) {
    table[static_cast<std::size_t>(ctx)] = m.oracle(species, gene, ctx);
  }
  return table;
}

}  // namespace coev
