#pragma once

// Surrogate-assisted turns: instead of evaluating the single bred offspring,
// each turn retrains a fresh network on the focal species' evaluation archive,
// screens lambda_m candidate offspring through it, and spends the one real
// evaluation on the predicted best.
//
// Variants differ in what the model sees:
//   OwnGenome  (b)  - inputs are the focal genome only
//   WholeTeam  (a)  - inputs are the entire team, candidates padded with elites
//   ManyParents(p)  - like b, but each candidate gets its own tournament parent
//   Window     (bw) - like b, trained on the most recent `window` archive
//                     entries (or, in seeded physical mode, on the current
//                     population members with their max-rule fitnesses)

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "coev/evolution.hpp"
#include "coev/mlp.hpp"
#include "coev/rng.hpp"

namespace coev {

enum class SurrogateVariant { OwnGenome, WholeTeam, ManyParents, Window };

inline const char* surrogate_variant_name(SurrogateVariant v) {
  switch (v) {
    case SurrogateVariant::OwnGenome: return "b";
    case SurrogateVariant::WholeTeam: return "a";
    case SurrogateVariant::ManyParents: return "p";
    case SurrogateVariant::Window: return "bw";
  }
  throw std::logic_error("unknown surrogate variant");
}

inline SurrogateVariant surrogate_variant_from_name(const std::string& name) {
  if (name == "b") return SurrogateVariant::OwnGenome;
  if (name == "a") return SurrogateVariant::WholeTeam;
  if (name == "p") return SurrogateVariant::ManyParents;
  if (name == "bw") return SurrogateVariant::Window;
  throw std::invalid_argument("unknown surrogate variant '" + name + "'");
}

// How archived team fitnesses are squashed into the network's (0,1) range.
// Both maps are strictly monotone, so the argmax over candidates is the same
// as for raw fitness.
enum class TargetScale {
  BySpeciesCount,  // divide by S (team fitness of S species lies in [0, S])
  ByRunningMax     // divide by the largest magnitude seen (unbounded scores)
};

struct SurrogateParams {
  SurrogateVariant variant = SurrogateVariant::OwnGenome;
  int hidden = 10;
  int lambda = 1000;  // candidates screened per turn
  int epochs = 50;    // training passes over the archive
  double rate = 0.1;  // backprop learning rate
  int window = 20;    // archive suffix length for the Window variant
  bool window_uses_population = false;  // Window trains on current members instead
  TargetScale target_scale = TargetScale::BySpeciesCount;

  void validate() const {
    if (hidden < 1) throw std::invalid_argument("surrogate: hidden must be >= 1");
    if (lambda < 1) throw std::invalid_argument("surrogate: lambda must be >= 1");
    if (epochs < 0) throw std::invalid_argument("surrogate: epochs must be >= 0");
    if (rate <= 0.0) throw std::invalid_argument("surrogate: learning rate must be > 0");
    if (window < 1) throw std::invalid_argument("surrogate: window must be >= 1");
  }
};

template <typename Domain>
int surrogate_input_width(const Domain& domain, const SurrogateParams& p, int species_count) {
  return p.variant == SurrogateVariant::WholeTeam ? species_count * domain.width()
                                                  : domain.width();
}

namespace scga_tag {
inline constexpr std::uint64_t kMlp = 0x5C9A;
}

// Assembles the focal species' training set into `out` (cleared first).
// Inputs are bound-normalised encodings; targets are scaled per
// params.target_scale so they sit in the network's output range.
template <EvolutionDomain Domain>
void build_training_set(const Engine<Domain>& eng, int species, const SurrogateParams& p,
                        TrainingSet& out) {
  const Domain& domain = eng.domain();
  const int S = eng.species_count();
  const int width = surrogate_input_width(domain, p, S);
  out.clear();
  out.width = static_cast<std::size_t>(width);
  thread_local std::vector<double> x;
  x.assign(static_cast<std::size_t>(width), 0.0);
  const auto& pop = eng.population(species);

  auto add_genome_row = [&](const typename Domain::Genome& g, double target) {
    domain.encode(g, std::span<double>(x));
    out.add(x, target);
  };

  switch (p.variant) {
    case SurrogateVariant::OwnGenome:
    case SurrogateVariant::ManyParents:
      for (const auto& e : pop.archive) add_genome_row(e.genome, e.team_fitness);
      break;
    case SurrogateVariant::WholeTeam: {
      const int n = domain.width();
      for (const auto& e : pop.archive) {
        for (int t = 0; t < S; ++t) {
          domain.encode(e.team[static_cast<std::size_t>(t)],
                        std::span<double>(x).subspan(static_cast<std::size_t>(t * n),
                                                     static_cast<std::size_t>(n)));
        }
        out.add(x, e.team_fitness);
      }
      break;
    }
    case SurrogateVariant::Window: {
      if (p.window_uses_population) {
        for (const auto& m : pop.members) {
          if (m.fitness == -std::numeric_limits<double>::infinity()) continue;
          add_genome_row(m.genome, m.fitness);
        }
      } else {
        const std::size_t take =
            std::min<std::size_t>(static_cast<std::size_t>(p.window), pop.archive.size());
        for (std::size_t i = pop.archive.size() - take; i < pop.archive.size(); ++i) {
          add_genome_row(pop.archive[i].genome, pop.archive[i].team_fitness);
        }
      }
      break;
    }
  }

  if (p.target_scale == TargetScale::BySpeciesCount) {
    const double inv = 1.0 / static_cast<double>(S);
    for (auto& t : out.targets) t *= inv;
  } else {
    double max_abs = 0.0;
    for (const double t : out.targets) max_abs = std::max(max_abs, std::abs(t));
    if (max_abs > 0.0) {
      for (auto& t : out.targets) t /= max_abs;
    }
  }
}

// Screens lambda candidates through `predict` and returns the best one as an
// unevaluated individual. Candidates come from the usual variation pipeline;
// strict comparison keeps the first of any tied predictions. Consumes only
// evo-stream randomness.
template <EvolutionDomain Domain, typename Predict>
Individual<typename Domain::Genome> propose_offspring(Engine<Domain>& eng, int species,
                                                      Predict&& predict,
                                                      const SurrogateParams& p) {
  using Genome = typename Domain::Genome;
  const Domain& domain = eng.domain();
  Rng& rng = eng.evo_rng();
  const auto& pop = eng.population(species);
  const EaParams& ea = eng.params();
  const int S = eng.species_count();
  const int n = domain.width();
  const int width = surrogate_input_width(domain, p, S);

  thread_local std::vector<double> x;
  x.assign(static_cast<std::size_t>(width), 0.0);
  std::span<double> cand_slot(x);
  if (p.variant == SurrogateVariant::WholeTeam) {
    // partners are the current elites, fixed for the whole screen
    for (int t = 0; t < S; ++t) {
      domain.encode(eng.elite_genome(t),
                    std::span<double>(x).subspan(static_cast<std::size_t>(t * n),
                                                 static_cast<std::size_t>(n)));
    }
    cand_slot = std::span<double>(x).subspan(static_cast<std::size_t>(species * n),
                                             static_cast<std::size_t>(n));
  }

  int shared_parent = -1;
  if (p.variant != SurrogateVariant::ManyParents) {
    shared_parent = tournament_select(pop, ea.tournament, rng);
  }

  Genome candidate;
  Individual<Genome> best;
  double best_pred = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < p.lambda; ++i) {
    const int parent = p.variant == SurrogateVariant::ManyParents
                           ? tournament_select(pop, ea.tournament, rng)
                           : shared_parent;
    if (ea.crossover > 0.0 && rng.bernoulli(ea.crossover)) {
      const int other = tournament_select(pop, ea.tournament, rng);
      candidate = domain.crossover(pop.members[static_cast<std::size_t>(parent)].genome,
                                   pop.members[static_cast<std::size_t>(other)].genome, rng);
    } else {
      candidate = pop.members[static_cast<std::size_t>(parent)].genome;
    }
    domain.mutate(candidate, ea.mutation, rng);
    domain.encode(candidate, cand_slot);
    const double pred = predict(std::span<const double>(x));
    if (pred > best_pred) {
      best_pred = pred;
      best.genome = candidate;
    }
  }
  return best;
}

// Full surrogate-assisted run: initialise, plain Best-scheme warmup until
// `warmup` evaluations are consumed, then model-guided turns to the budget.
// Every turn rebuilds the network from scratch with a seed derived from the
// run's evo seed and the turn index, so a turn's proposal depends only on
// (archive, turn seed) and not on any earlier network state.
template <EvolutionDomain Domain>
const RunTrace& run_scga(Engine<Domain>& eng, const SurrogateParams& p, std::uint64_t budget,
                         std::uint64_t warmup) {
  p.validate();
  if (eng.params().scheme != Scheme::Best) {
    throw std::invalid_argument("scga: the surrogate drives the Best collaboration scheme");
  }
  eng.initialize(budget);
  while (eng.consumed() < warmup && eng.step(budget)) {
  }
  const int width = surrogate_input_width(eng.domain(), p, eng.species_count());
  Mlp net(width, p.hidden);
  TrainingSet ts;
  while (eng.consumed() < budget) {
    const int s = eng.cursor();
    build_training_set(eng, s, p, ts);
    Rng mlp_rng(derive_seed(eng.evo_seed(), scga_tag::kMlp, eng.turn_index()));
    net.init_weights(mlp_rng);
    net.train(ts, p.epochs, p.rate, mlp_rng);
    auto offspring =
        propose_offspring(eng, s, [&net](std::span<const double> in) { return net.predict(in); }, p);
    if (!eng.step_with_offspring(s, std::move(offspring), budget)) break;
  }
  return eng.trace();
}

}  // namespace coev
