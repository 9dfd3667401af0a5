#pragma once

// Steady-state cooperative coevolution over S species populations.
//
// Each species holds P individuals. Turns proceed round-robin: the focal
// species breeds one offspring (tournament parent selection, optional uniform
// crossover, mutation), the offspring is evaluated inside a team built from
// the other species' elites, and then replaces the loser of a replacement
// tournament drawn from the non-elite members. An individual's fitness is the
// maximum team fitness over every team it has participated in, and that credit
// goes to *all* team members, elites included.
//
// Collaboration schemes:
//   Best           - elites as partners, 1 evaluation per turn
//   BestPlusRandom - an extra team with uniformly drawn partners, 2 per turn
//   Reevaluate     - Best, plus a sweep re-evaluating every member of the
//                    other populations with current elites whenever a new
//                    global best team fitness appears (sweep evaluations are
//                    counted against the budget and truncated at exhaustion)
//   AllOffspring   - one offspring per species evaluated together, 1 total
//
// All stochastic choices draw from two streams: the init stream (population
// construction and initial representatives) and the evo stream (everything
// after), so different schemes can share identical initial populations.

#include <concepts>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "coev/genome.hpp"
#include "coev/rng.hpp"
#include "coev/trace.hpp"

namespace coev {

enum class Scheme { Best, BestPlusRandom, Reevaluate, AllOffspring };

inline const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::Best: return "b";
    case Scheme::BestPlusRandom: return "br";
    case Scheme::Reevaluate: return "re";
    case Scheme::AllOffspring: return "o";
  }
  throw std::logic_error("unknown scheme");
}

inline Scheme scheme_from_name(const std::string& name) {
  if (name == "b") return Scheme::Best;
  if (name == "br") return Scheme::BestPlusRandom;
  if (name == "re") return Scheme::Reevaluate;
  if (name == "o") return Scheme::AllOffspring;
  throw std::invalid_argument("unknown collaboration scheme '" + name + "'");
}

struct EaParams {
  int pop_size = 20;
  int tournament = 3;    // size for both selection and replacement
  double mutation = 0.05;
  double crossover = 0.0;
  Scheme scheme = Scheme::Best;

  void validate() const {
    if (pop_size < 2) throw std::invalid_argument("ea: pop_size must be >= 2");
    if (tournament < 1) throw std::invalid_argument("ea: tournament must be >= 1");
    if (tournament > pop_size - 1) {
      throw std::invalid_argument("ea: tournament must leave the elite out of replacement");
    }
    if (mutation < 0.0 || mutation > 1.0) throw std::invalid_argument("ea: mutation rate in [0,1]");
    if (crossover < 0.0 || crossover > 1.0) throw std::invalid_argument("ea: crossover rate in [0,1]");
  }
};

template <typename G>
struct Individual {
  G genome{};
  double fitness = -std::numeric_limits<double>::infinity();  // max team fitness seen
  std::uint64_t evaluations = 0;  // teams this individual has appeared in
};

template <typename G>
struct ArchiveEntry {
  G genome;            // the focal genome this entry is filed under
  std::vector<G> team;  // the full team it was evaluated in
  double team_fitness;
  std::uint64_t ordinal;  // global evaluation ordinal
};

template <typename G>
struct SpeciesPopulation {
  std::vector<Individual<G>> members;
  int elite = 0;
  std::vector<ArchiveEntry<G>> archive;

  void recompute_elite() {
    int best = 0;
    for (int i = 1; i < static_cast<int>(members.size()); ++i) {
      if (members[static_cast<std::size_t>(i)].fitness >
          members[static_cast<std::size_t>(best)].fitness) {
        best = i;  // ties keep the lowest index
      }
    }
    elite = best;
  }
};

// Winner of a size-`size` tournament: highest fitness among `size` distinct
// members sampled uniformly; ties go to the lowest member index.
template <typename G>
int tournament_select(const SpeciesPopulation<G>& pop, int size, Rng& rng) {
  thread_local std::vector<int> picks;
  rng.sample_distinct(size, static_cast<int>(pop.members.size()), picks);
  int best = -1;
  for (const int i : picks) {
    if (best < 0 ||
        pop.members[static_cast<std::size_t>(i)].fitness >
            pop.members[static_cast<std::size_t>(best)].fitness ||
        (pop.members[static_cast<std::size_t>(i)].fitness ==
             pop.members[static_cast<std::size_t>(best)].fitness &&
         i < best)) {
      best = i;
    }
  }
  return best;
}

// Replacement tournament: samples `size` distinct members excluding the elite
// and overwrites the lowest-fitness one (ties: highest member index).
// Returns the replaced slot.
template <typename G>
int replace_into(SpeciesPopulation<G>& pop, Individual<G> offspring, int size, Rng& rng) {
  thread_local std::vector<int> picks;
  rng.sample_distinct(size, static_cast<int>(pop.members.size()), picks, pop.elite);
  int victim = -1;
  for (const int i : picks) {
    if (victim < 0 ||
        pop.members[static_cast<std::size_t>(i)].fitness <
            pop.members[static_cast<std::size_t>(victim)].fitness ||
        (pop.members[static_cast<std::size_t>(i)].fitness ==
             pop.members[static_cast<std::size_t>(victim)].fitness &&
         i > victim)) {
      victim = i;
    }
  }
  pop.members[static_cast<std::size_t>(victim)] = std::move(offspring);
  pop.recompute_elite();
  return victim;
}

// The Domain concept: Genome type plus random/mutate/crossover/encode and an
// optional seed genome (seeded domains start every population from it).
template <typename D>
concept EvolutionDomain = requires(const D d, typename D::Genome g, Rng& rng) {
  { d.random(rng) } -> std::same_as<typename D::Genome>;
  { d.crossover(g, g, rng) } -> std::same_as<typename D::Genome>;
  { d.width() } -> std::convertible_to<int>;
  d.mutate(g, 1.0, rng);
  { d.seed } -> std::convertible_to<std::optional<typename D::Genome>>;
};

template <EvolutionDomain Domain>
class Engine {
 public:
  using Genome = typename Domain::Genome;
  using Team = std::vector<Genome>;
  using Evaluator = std::function<double(const Team&)>;

  Engine(Domain domain, EaParams params, int species_count, Evaluator evaluate,
         std::uint64_t init_seed, std::uint64_t evo_seed)
      : domain_(std::move(domain)),
        params_(params),
        species_count_(species_count),
        evaluate_(std::move(evaluate)),
        init_rng_(init_seed),
        evo_rng_(evo_seed),
        evo_seed_(evo_seed) {
    params_.validate();
    if (species_count_ < 1) throw std::invalid_argument("engine: need at least one species");
    if (!evaluate_) throw std::invalid_argument("engine: evaluator required");
  }

  // Builds all populations and evaluates every member once against fixed
  // random representatives (the seed individuals in seeded mode). Consumes
  // exactly S*P evaluations; throws if the budget cannot cover them.
  void initialize(std::uint64_t budget) {
    const int S = species_count_;
    const int P = params_.pop_size;
    if (budget < static_cast<std::uint64_t>(S) * static_cast<std::uint64_t>(P)) {
      throw std::invalid_argument("engine: budget smaller than the S*P initial evaluations");
    }
    pops_.assign(static_cast<std::size_t>(S), {});
    for (int s = 0; s < S; ++s) {
      auto& members = pops_[static_cast<std::size_t>(s)].members;
      members.resize(static_cast<std::size_t>(P));
      for (int m = 0; m < P; ++m) {
        if (domain_.seed.has_value()) {
          Genome g = *domain_.seed;
          if (m > 0) domain_.mutate(g, 1.0, init_rng_);  // full-strength variants
          members[static_cast<std::size_t>(m)].genome = std::move(g);
        } else {
          members[static_cast<std::size_t>(m)].genome = domain_.random(init_rng_);
        }
      }
    }
    Team team(static_cast<std::size_t>(S));
    std::vector<int> rep(static_cast<std::size_t>(S));
    for (int s = 0; s < S; ++s) {
      // one representative per other species, fixed for this species' round
      for (int t = 0; t < S; ++t) {
        if (t == s) continue;
        rep[static_cast<std::size_t>(t)] =
            domain_.seed.has_value() ? 0 : init_rng_.below_int(P);
        team[static_cast<std::size_t>(t)] =
            pops_[static_cast<std::size_t>(t)].members[static_cast<std::size_t>(rep[static_cast<std::size_t>(t)])].genome;
      }
      for (int m = 0; m < P; ++m) {
        team[static_cast<std::size_t>(s)] =
            pops_[static_cast<std::size_t>(s)].members[static_cast<std::size_t>(m)].genome;
        const double f = do_eval(team, s + 1);
        credit(pops_[static_cast<std::size_t>(s)].members[static_cast<std::size_t>(m)], f);
        for (int t = 0; t < S; ++t) {
          if (t == s) continue;
          credit(pops_[static_cast<std::size_t>(t)]
                     .members[static_cast<std::size_t>(rep[static_cast<std::size_t>(t)])],
                 f);
        }
        file_archive(s, team, f);
      }
      for (int t = 0; t < S; ++t) pops_[static_cast<std::size_t>(t)].recompute_elite();
    }
    cursor_ = 0;
    turn_index_ = 0;
    recognized_best_ = trace_.best();
    initialized_ = true;
  }

  // One breeding turn of the configured scheme. Returns false (consuming
  // nothing) if the turn's base cost no longer fits in the budget.
  bool step(std::uint64_t budget) {
    require_initialized();
    switch (params_.scheme) {
      case Scheme::Best: {
        if (!fits(1, budget)) return false;
        Individual<Genome> off = make_offspring(cursor_);
        return step_with_offspring(cursor_, std::move(off), budget);
      }
      case Scheme::BestPlusRandom:
        return step_best_random(budget);
      case Scheme::Reevaluate:
        return step_reevaluate(budget);
      case Scheme::AllOffspring:
        return step_all_offspring(budget);
    }
    return false;
  }

  // Runs initialize + turns until the budget is exhausted.
  const RunTrace& run(std::uint64_t budget) {
    initialize(budget);
    while (step(budget)) {
    }
    return trace_;
  }

  // Breeds one offspring for `species` from the evo stream (tournament parent,
  // optional crossover, mutation). Does not evaluate or insert it.
  Individual<Genome> make_offspring(int species) {
    require_initialized();
    auto& pop = pops_[static_cast<std::size_t>(species)];
    const int p1 = tournament_select(pop, params_.tournament, evo_rng_);
    Individual<Genome> off;
    if (params_.crossover > 0.0 && evo_rng_.bernoulli(params_.crossover)) {
      const int p2 = tournament_select(pop, params_.tournament, evo_rng_);
      off.genome = domain_.crossover(pop.members[static_cast<std::size_t>(p1)].genome,
                                     pop.members[static_cast<std::size_t>(p2)].genome, evo_rng_);
    } else {
      off.genome = pop.members[static_cast<std::size_t>(p1)].genome;
    }
    domain_.mutate(off.genome, params_.mutation, evo_rng_);
    return off;
  }

  // Evaluates a caller-supplied offspring with elite partners, applies max-
  // rule credit, archives it under `species`, and inserts it via the
  // replacement tournament. This is the Best-scheme turn body; surrogate
  // drivers use it with model-chosen offspring.
  bool step_with_offspring(int species, Individual<Genome> offspring, std::uint64_t budget) {
    require_initialized();
    if (!fits(1, budget)) return false;
    eval_with_elites(species, offspring);
    replace_into(pops_[static_cast<std::size_t>(species)], std::move(offspring),
                 params_.tournament, evo_rng_);
    advance_turn();
    return true;
  }

  // -- accessors ------------------------------------------------------------

  const RunTrace& trace() const { return trace_; }
  std::uint64_t consumed() const { return trace_.size(); }
  int species_count() const { return species_count_; }
  const EaParams& params() const { return params_; }
  const Domain& domain() const { return domain_; }
  int cursor() const { return cursor_; }
  std::uint64_t turn_index() const { return turn_index_; }
  std::uint64_t evo_seed() const { return evo_seed_; }
  Rng& evo_rng() { return evo_rng_; }
  bool initialized() const { return initialized_; }

  const std::vector<SpeciesPopulation<Genome>>& populations() const { return pops_; }
  std::vector<SpeciesPopulation<Genome>>& populations() { return pops_; }

  const SpeciesPopulation<Genome>& population(int species) const {
    return pops_.at(static_cast<std::size_t>(species));
  }

  // Current elite genome of a species.
  const Genome& elite_genome(int species) const {
    const auto& pop = pops_.at(static_cast<std::size_t>(species));
    return pop.members[static_cast<std::size_t>(pop.elite)].genome;
  }

 private:
  void require_initialized() const {
    if (!initialized_) throw std::logic_error("engine: initialize() must run first");
  }

  bool fits(std::uint64_t cost, std::uint64_t budget) const {
    return consumed() + cost <= budget;
  }

  double do_eval(const Team& team, int trace_species) {
    double f;
    try {
      f = evaluate_(team);
    } catch (const std::exception& e) {
      throw std::runtime_error("evaluation " + std::to_string(trace_.size() + 1) +
                               " failed: " + e.what());
    }
    trace_.append(trace_species, f);
    return f;
  }

  static void credit(Individual<Genome>& ind, double team_fitness) {
    if (team_fitness > ind.fitness) ind.fitness = team_fitness;
    ++ind.evaluations;
  }

  void file_archive(int species, const Team& team, double f) {
    auto& pop = pops_[static_cast<std::size_t>(species)];
    pop.archive.push_back(
        {team[static_cast<std::size_t>(species)], team, f, trace_.size()});
  }

  // Team = offspring at `species`, current elites elsewhere.
  void eval_with_elites(int species, Individual<Genome>& offspring) {
    const int S = species_count_;
    Team team(static_cast<std::size_t>(S));
    for (int t = 0; t < S; ++t) {
      team[static_cast<std::size_t>(t)] =
          (t == species) ? offspring.genome : elite_genome(t);
    }
    const double f = do_eval(team, species + 1);
    credit(offspring, f);
    for (int t = 0; t < S; ++t) {
      if (t == species) continue;
      auto& pop = pops_[static_cast<std::size_t>(t)];
      credit(pop.members[static_cast<std::size_t>(pop.elite)], f);
      pop.recompute_elite();
    }
    file_archive(species, team, f);
  }

  bool step_best_random(std::uint64_t budget) {
    if (!fits(2, budget)) return false;
    const int s = cursor_;
    const int S = species_count_;
    Individual<Genome> off = make_offspring(s);
    eval_with_elites(s, off);
    // second team: uniformly random partners (elite included as a candidate)
    Team team(static_cast<std::size_t>(S));
    thread_local std::vector<int> partner;
    partner.assign(static_cast<std::size_t>(S), 0);
    for (int t = 0; t < S; ++t) {
      if (t == s) continue;
      partner[static_cast<std::size_t>(t)] = evo_rng_.below_int(params_.pop_size);
      team[static_cast<std::size_t>(t)] =
          pops_[static_cast<std::size_t>(t)]
              .members[static_cast<std::size_t>(partner[static_cast<std::size_t>(t)])].genome;
    }
    team[static_cast<std::size_t>(s)] = off.genome;
    const double f = do_eval(team, s + 1);
    credit(off, f);
    for (int t = 0; t < S; ++t) {
      if (t == s) continue;
      auto& pop = pops_[static_cast<std::size_t>(t)];
      credit(pop.members[static_cast<std::size_t>(partner[static_cast<std::size_t>(t)])], f);
      pop.recompute_elite();
    }
    file_archive(s, team, f);
    replace_into(pops_[static_cast<std::size_t>(s)], std::move(off), params_.tournament, evo_rng_);
    advance_turn();
    return true;
  }

  bool step_reevaluate(std::uint64_t budget) {
    if (!fits(1, budget)) return false;
    const int s = cursor_;
    Individual<Genome> off = make_offspring(s);
    eval_with_elites(s, off);
    replace_into(pops_[static_cast<std::size_t>(s)], std::move(off), params_.tournament, evo_rng_);
    if (trace_.best() > recognized_best_) {
      // New global best: re-evaluate every member of the other populations
      // against current elites. Counted against the budget; a sweep truncates
      // (rather than overruns) when the budget runs out, and improvements
      // found inside the sweep do not trigger nested sweeps.
      const int S = species_count_;
      Team team(static_cast<std::size_t>(S));
      for (int t = 0; t < S && fits(1, budget); ++t) {
        if (t == s) continue;
        for (int m = 0; m < params_.pop_size; ++m) {
          if (!fits(1, budget)) break;
          for (int u = 0; u < S; ++u) {
            team[static_cast<std::size_t>(u)] =
                (u == t) ? pops_[static_cast<std::size_t>(t)]
                               .members[static_cast<std::size_t>(m)].genome
                         : elite_genome(u);
          }
          const double f = do_eval(team, t + 1);
          credit(pops_[static_cast<std::size_t>(t)].members[static_cast<std::size_t>(m)], f);
          for (int u = 0; u < S; ++u) {
            if (u == t) continue;
            auto& pop = pops_[static_cast<std::size_t>(u)];
            credit(pop.members[static_cast<std::size_t>(pop.elite)], f);
            pop.recompute_elite();
          }
          pops_[static_cast<std::size_t>(t)].recompute_elite();
          file_archive(t, team, f);
        }
      }
    }
    recognized_best_ = trace_.best();
    advance_turn();
    return true;
  }

  bool step_all_offspring(std::uint64_t budget) {
    if (!fits(1, budget)) return false;
    const int S = species_count_;
    std::vector<Individual<Genome>> offs;
    offs.reserve(static_cast<std::size_t>(S));
    for (int s = 0; s < S; ++s) offs.push_back(make_offspring(s));
    Team team(static_cast<std::size_t>(S));
    for (int s = 0; s < S; ++s) team[static_cast<std::size_t>(s)] = offs[static_cast<std::size_t>(s)].genome;
    const double f = do_eval(team, 0);
    for (int s = 0; s < S; ++s) {
      credit(offs[static_cast<std::size_t>(s)], f);
      file_archive(s, team, f);
    }
    for (int s = 0; s < S; ++s) {
      replace_into(pops_[static_cast<std::size_t>(s)], std::move(offs[static_cast<std::size_t>(s)]),
                   params_.tournament, evo_rng_);
    }
    ++turn_index_;  // cursor is meaningless for this scheme
    return true;
  }

  void advance_turn() {
    cursor_ = (cursor_ + 1) % species_count_;
    ++turn_index_;
  }

  Domain domain_;
  EaParams params_;
  int species_count_;
  Evaluator evaluate_;
  Rng init_rng_;
  Rng evo_rng_;
  std::uint64_t evo_seed_;
  std::vector<SpeciesPopulation<Genome>> pops_;
  RunTrace trace_;
  int cursor_ = 0;
  std::uint64_t turn_index_ = 0;
  double recognized_best_ = -std::numeric_limits<double>::infinity();
  bool initialized_ = false;
};

// Binary-genome domain used by the NKCS experiments.
struct BinaryDomain {
  using Genome = BinaryGenome;

  int n = 20;
  std::optional<Genome> seed{};

  Genome random(Rng& rng) const { return random_binary_genome(n, rng); }
  void mutate(Genome& g, double mu, Rng& rng) const {
    for (auto& bit : g) {
      if (rng.bernoulli(mu)) bit = static_cast<std::uint8_t>(1 - bit);
    }
  }
  Genome crossover(const Genome& a, const Genome& b, Rng& rng) const {
    return uniform_crossover(a, b, rng);
  }
  void encode(const Genome& g, std::span<double> out) const { encode_binary(g, out); }
  int width() const { return n; }
};

}  // namespace coev
