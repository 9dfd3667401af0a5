#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <map>
#include <vector>

#include <coev/evolution.hpp>

using namespace coev;

namespace {

using BinEngine = Engine<BinaryDomain>;
using Team = std::vector<BinaryGenome>;

SpeciesPopulation<BinaryGenome> make_pop(const std::vector<double>& fitness) {
  SpeciesPopulation<BinaryGenome> pop;
  for (std::size_t i = 0; i < fitness.size(); ++i) {
    Individual<BinaryGenome> ind;
    ind.genome = {static_cast<std::uint8_t>(i & 1)};
    ind.fitness = fitness[i];
    pop.members.push_back(std::move(ind));
  }
  pop.recompute_elite();
  return pop;
}

// evaluator returning the (1-based) ordinal of the call
struct CountingEval {
  std::uint64_t calls = 0;
  double operator()(const Team&) { return static_cast<double>(++calls); }
};

}  // namespace

TEST_CASE("scheme names round-trip") {
  for (Scheme s : {Scheme::Best, Scheme::BestPlusRandom, Scheme::Reevaluate, Scheme::AllOffspring}) {
    CHECK(scheme_from_name(scheme_name(s)) == s);
  }
  CHECK_THROWS_AS(scheme_from_name("x"), std::invalid_argument);
}

TEST_CASE("ea parameter validation") {
  EaParams p;
  p.pop_size = 1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.pop_size = 5;
  p.tournament = 5;  // must leave the elite replaceable-free: at most pop-1
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.tournament = 4;
  CHECK_NOTHROW(p.validate());
  p.mutation = 1.5;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("a full-size selection tournament finds the global best") {
  auto pop = make_pop({0.3, 0.9, 0.1, 0.9, 0.5});
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    // ties go to the lowest index: member 1 beats member 3
    REQUIRE(tournament_select(pop, 5, rng) == 1);
  }
}

TEST_CASE("selection with equal fitness everywhere picks the lowest sampled index") {
  auto pop = make_pop({0.5, 0.5, 0.5, 0.5});
  Rng rng(3);
  CHECK(tournament_select(pop, 4, rng) == 0);
  // smaller tournaments: winner is always the smallest index of the sample,
  // so over many draws every index except none is possible but the result
  // must never exceed the largest index
  for (int trial = 0; trial < 200; ++trial) {
    const int w = tournament_select(pop, 2, rng);
    REQUIRE(w >= 0);
    REQUIRE(w < 4);
  }
}

TEST_CASE("a full-size replacement tournament evicts the worst non-elite") {
  auto pop = make_pop({0.3, 0.9, 0.1, 0.1, 0.5});
  REQUIRE(pop.elite == 1);
  Individual<BinaryGenome> off;
  off.genome = {1};
  off.fitness = 0.2;
  Rng rng(5);
  // worst fitness 0.1 is shared by 2 and 3; ties evict the higher index
  const int slot = replace_into(pop, std::move(off), 4, rng);
  CHECK(slot == 3);
  CHECK(pop.members[3].fitness == 0.2);
}

TEST_CASE("the elite survives ten thousand replacement tournaments") {
  auto pop = make_pop({0.1, 0.2, 0.95, 0.4, 0.3});
  const int elite = pop.elite;
  REQUIRE(elite == 2);
  Rng rng(11);
  for (int trial = 0; trial < 10000; ++trial) {
    Individual<BinaryGenome> off;
    off.genome = {0};
    off.fitness = rng.uniform01() * 0.9;  // always weaker than the elite
    replace_into(pop, std::move(off), 2, rng);
    REQUIRE(pop.elite == elite);
    REQUIRE(pop.members[static_cast<std::size_t>(elite)].fitness == 0.95);
  }
}

TEST_CASE("initialization consumes exactly S*P evaluations in species blocks") {
  const int S = 3, P = 4;
  EaParams ea;
  ea.pop_size = P;
  ea.tournament = 2;
  CountingEval eval;
  BinEngine eng(BinaryDomain{5, std::nullopt}, ea, S,
                [&eval](const Team& t) { return eval(t); }, 101, 202);
  CHECK_THROWS_AS(eng.initialize(static_cast<std::uint64_t>(S * P - 1)), std::invalid_argument);
  eng.initialize(1000);
  CHECK(eng.consumed() == static_cast<std::uint64_t>(S * P));
  CHECK(eng.initialized());
  const auto& recs = eng.trace().records();
  for (int s = 0; s < S; ++s) {
    for (int m = 0; m < P; ++m) {
      REQUIRE(recs[static_cast<std::size_t>(s * P + m)].species == s + 1);
    }
  }
  // every member was credited at least its own evaluation
  for (int s = 0; s < S; ++s) {
    for (const auto& ind : eng.population(s).members) {
      REQUIRE(ind.evaluations >= 1);
      REQUIRE(ind.fitness > 0.0);
    }
  }
  // each species archived its own P initial evaluations
  for (int s = 0; s < S; ++s) REQUIRE(eng.population(s).archive.size() == P);
}

TEST_CASE("max-rule credit during initialization, driven by a scripted evaluator") {
  // With two species of two members and an evaluator returning the call
  // ordinal, species 0's members earn 1 and 2 from their own round; species
  // 1's representative in that round additionally sees max(1,2)=2. Species
  // 1's own round hands out 3 and 4, and species 0's representative is
  // credited max(3,4)=4, making it the elite.
  const int S = 2, P = 2;
  EaParams ea;
  ea.pop_size = P;
  ea.tournament = 1;
  CountingEval eval;
  BinEngine eng(BinaryDomain{3, std::nullopt}, ea, S,
                [&eval](const Team& t) { return eval(t); }, 55, 66);
  eng.initialize(100);
  const auto& s0 = eng.population(0);
  const auto& s1 = eng.population(1);

  // species 1: member m's own eval came last, so fitness = P + 1 + m
  CHECK(s1.members[0].fitness == 3.0);
  CHECK(s1.members[1].fitness == 4.0);
  CHECK(s1.elite == 1);

  // species 0: the representative used in species 1's round carries 4.0
  CHECK(s0.members[static_cast<std::size_t>(s0.elite)].fitness == 4.0);
  const int other = 1 - s0.elite;
  CHECK(s0.members[static_cast<std::size_t>(other)].fitness == other + 1.0);

  // every evaluation credited exactly S individuals
  std::uint64_t credits = 0;
  for (int s = 0; s < S; ++s) {
    for (const auto& ind : eng.population(s).members) credits += ind.evaluations;
  }
  CHECK(credits == static_cast<std::uint64_t>(S) * eng.consumed());
}

TEST_CASE("identically seeded initial populations are scheme-independent") {
  EaParams ea;
  ea.pop_size = 6;
  const std::uint64_t init_seed = 31415;
  auto eval = [](const Team& t) {
    double acc = 0.0;
    for (const auto& g : t)
      for (const auto b : g) acc += b;
    return acc;
  };
  EaParams ea_o = ea;
  ea_o.scheme = Scheme::AllOffspring;
  BinEngine a(BinaryDomain{7, std::nullopt}, ea, 3, eval, init_seed, 1);
  BinEngine b(BinaryDomain{7, std::nullopt}, ea_o, 3, eval, init_seed, 2);
  a.initialize(100);
  b.initialize(100);
  for (int s = 0; s < 3; ++s) {
    for (int m = 0; m < 6; ++m) {
      REQUIRE(a.population(s).members[static_cast<std::size_t>(m)].genome ==
              b.population(s).members[static_cast<std::size_t>(m)].genome);
    }
  }
  CHECK(a.trace().to_csv() == b.trace().to_csv());
}

TEST_CASE("best-scheme turns cost one evaluation and walk the species round-robin") {
  const int S = 3, P = 4;
  EaParams ea;
  ea.pop_size = P;
  CountingEval eval;
  BinEngine eng(BinaryDomain{5, std::nullopt}, ea, S,
                [&eval](const Team& t) { return eval(t); }, 1, 2);
  eng.initialize(18);
  REQUIRE(eng.cursor() == 0);
  for (int turn = 0; turn < 6; ++turn) {
    REQUIRE(eng.step(18));
    REQUIRE(eng.consumed() == static_cast<std::uint64_t>(S * P + turn + 1));
    REQUIRE(eng.trace().records().back().species == turn % S + 1);
  }
  CHECK(eng.turn_index() == 6);
  CHECK_FALSE(eng.step(18));   // budget exhausted: consumes nothing
  CHECK(eng.consumed() == 18);
}

TEST_CASE("best-plus-random turns cost two evaluations, both filed under the focal species") {
  const int S = 3, P = 4;
  EaParams ea;
  ea.pop_size = P;
  ea.scheme = Scheme::BestPlusRandom;
  CountingEval eval;
  BinEngine eng(BinaryDomain{5, std::nullopt}, ea, S,
                [&eval](const Team& t) { return eval(t); }, 1, 2);
  eng.initialize(17);
  const std::size_t archived0 = eng.population(0).archive.size();
  REQUIRE(eng.step(17));
  CHECK(eng.consumed() == 14);
  const auto& recs = eng.trace().records();
  CHECK(recs[12].species == 1);
  CHECK(recs[13].species == 1);
  CHECK(eng.population(0).archive.size() == archived0 + 2);
  REQUIRE(eng.step(17));
  CHECK(eng.consumed() == 16);
  CHECK(recs[14].species == 2);
  // one more evaluation left: a two-evaluation turn no longer fits
  CHECK_FALSE(eng.step(17));
  CHECK(eng.consumed() == 16);
}

TEST_CASE("all-offspring turns evaluate one joint team traced as species 0") {
  const int S = 3, P = 4;
  EaParams ea;
  ea.pop_size = P;
  ea.scheme = Scheme::AllOffspring;
  CountingEval eval;
  BinEngine eng(BinaryDomain{5, std::nullopt}, ea, S,
                [&eval](const Team& t) { return eval(t); }, 1, 2);
  eng.initialize(15);
  for (int turn = 0; turn < 3; ++turn) {
    const std::vector<std::size_t> before{eng.population(0).archive.size(),
                                          eng.population(1).archive.size(),
                                          eng.population(2).archive.size()};
    REQUIRE(eng.step(15));
    REQUIRE(eng.consumed() == static_cast<std::uint64_t>(12 + turn + 1));
    REQUIRE(eng.trace().records().back().species == 0);
    // the same joint evaluation lands in all three archives
    for (int s = 0; s < S; ++s) {
      REQUIRE(eng.population(s).archive.size() == before[static_cast<std::size_t>(s)] + 1);
      REQUIRE(eng.population(s).archive.back().ordinal == eng.consumed());
    }
  }
  CHECK_FALSE(eng.step(15));
}

TEST_CASE("re-evaluation sweeps fire on improvement and honour the budget") {
  const int S = 2, P = 3;
  EaParams ea;
  ea.pop_size = P;
  ea.tournament = 2;
  ea.scheme = Scheme::Reevaluate;

  SECTION("an ever-improving evaluator triggers a full sweep") {
    CountingEval eval;
    BinEngine eng(BinaryDomain{4, std::nullopt}, ea, S,
                  [&eval](const Team& t) { return eval(t); }, 5, 6);
    eng.initialize(10);
    CHECK(eng.consumed() == 6);
    // turn for species 0: one breeding eval (7, a new best) + P re-evals of
    // species 1 = 4 evaluations in total
    REQUIRE(eng.step(10));
    CHECK(eng.consumed() == 10);
    const auto& recs = eng.trace().records();
    CHECK(recs[6].species == 1);
    CHECK(recs[7].species == 2);
    CHECK(recs[8].species == 2);
    CHECK(recs[9].species == 2);
    // swept evaluations are archived under the re-evaluated species; the
    // breeding evaluation itself files under the focal species 0
    CHECK(eng.population(1).archive.size() == 3 + 3);
    CHECK(eng.population(0).archive.size() == 3 + 1);
  }

  SECTION("the sweep truncates at the budget instead of overrunning") {
    CountingEval eval;
    BinEngine eng(BinaryDomain{4, std::nullopt}, ea, S,
                  [&eval](const Team& t) { return eval(t); }, 5, 6);
    eng.initialize(9);
    REQUIRE(eng.step(9));
    CHECK(eng.consumed() == 9);  // breeding eval + only 2 of the 3 sweep evals
    CHECK_FALSE(eng.step(9));
  }

  SECTION("no improvement, no sweep") {
    BinEngine eng(BinaryDomain{4, std::nullopt}, ea, S,
                  [](const Team&) { return 0.5; }, 5, 6);
    eng.initialize(20);
    for (int turn = 0; turn < 5; ++turn) {
      REQUIRE(eng.step(20));
      REQUIRE(eng.consumed() == static_cast<std::uint64_t>(6 + turn + 1));
    }
  }
}

TEST_CASE("re-evaluation recognizes the post-sweep best (no nested sweeps)") {
  // The sweep itself produces ever-better teams; the next turn must compare
  // against the best seen after the sweep, not re-trigger on stale data.
  const int S = 2, P = 3;
  EaParams ea;
  ea.pop_size = P;
  ea.tournament = 2;
  ea.scheme = Scheme::Reevaluate;
  CountingEval eval;
  BinEngine eng(BinaryDomain{4, std::nullopt}, ea, S,
                [&eval](const Team& t) { return eval(t); }, 5, 6);
  eng.initialize(100);
  REQUIRE(eng.step(100));  // 7..10: breeding + sweep
  CHECK(eng.consumed() == 10);
  REQUIRE(eng.step(100));  // species 1 turn: eval 11 beats 10 -> sweep of species 0
  CHECK(eng.consumed() == 14);
}

TEST_CASE("step_with_offspring inserts a caller-built offspring and archives the team") {
  const int S = 2, P = 3;
  EaParams ea;
  ea.pop_size = P;
  ea.tournament = 2;
  BinEngine eng(BinaryDomain{4, std::nullopt}, ea, S,
                [](const Team&) { return 1.0; }, 5, 6);
  eng.initialize(10);
  Individual<BinaryGenome> off;
  off.genome = {1, 1, 1, 1};
  REQUIRE(eng.step_with_offspring(0, off, 10));
  CHECK(eng.consumed() == 7);
  const auto& arch = eng.population(0).archive;
  REQUIRE(arch.size() == 4);
  CHECK(arch.back().genome == BinaryGenome{1, 1, 1, 1});
  CHECK(arch.back().ordinal == 7);
  CHECK(arch.back().team.size() == 2);
  bool inserted = false;
  for (const auto& m : eng.population(0).members) {
    inserted = inserted || (m.genome == BinaryGenome{1, 1, 1, 1});
  }
  CHECK(inserted);
  // full budget: returns false without consuming
  Individual<BinaryGenome> off2;
  off2.genome = {0, 0, 0, 0};
  CHECK_FALSE(eng.step_with_offspring(1, off2, 7));
  CHECK(eng.consumed() == 7);
}

TEST_CASE("budget arithmetic: 480 evaluations = 120 init + 60 turns per species") {
  EaParams ea;  // defaults: pop 20, tournament 3
  CountingEval eval;
  BinEngine eng(BinaryDomain{8, std::nullopt}, ea, 6,
                [&eval](const Team& t) { return eval(t); }, 42, 43);
  eng.run(480);
  CHECK(eng.consumed() == 480);
  CHECK(eng.turn_index() == 360);
  std::map<int, int> counts;
  for (const auto& r : eng.trace().records()) ++counts[r.species];
  for (int s = 1; s <= 6; ++s) REQUIRE(counts[s] == 20 + 60);
}

TEST_CASE("identical seeds give identical runs; different evo seeds diverge") {
  EaParams ea;
  ea.pop_size = 5;
  ea.tournament = 2;
  auto eval = [](const Team& t) {
    double acc = 0.0;
    for (const auto& g : t)
      for (const auto b : g) acc += b ? 0.618 : 0.382;
    return acc;
  };
  BinEngine a(BinaryDomain{6, std::nullopt}, ea, 3, eval, 9, 17);
  BinEngine b(BinaryDomain{6, std::nullopt}, ea, 3, eval, 9, 17);
  BinEngine c(BinaryDomain{6, std::nullopt}, ea, 3, eval, 9, 18);
  a.run(60);
  b.run(60);
  c.run(60);
  CHECK(a.trace().to_csv() == b.trace().to_csv());
  CHECK(a.trace().to_csv() != c.trace().to_csv());
}

TEST_CASE("the trace reports ordinals, running best, and a fixed csv header") {
  RunTrace tr;
  CHECK(tr.append(1, 0.5) == 1);
  CHECK(tr.append(2, 0.3) == 2);
  CHECK(tr.append(0, 0.9) == 3);
  CHECK(tr.best() == 0.9);
  CHECK(tr.best_at(1) == 0.5);
  CHECK(tr.best_at(2) == 0.5);
  CHECK(tr.best_at(3) == 0.9);
  CHECK_THROWS_AS(tr.best_at(0), std::out_of_range);
  CHECK_THROWS_AS(tr.best_at(4), std::out_of_range);
  const std::string csv = tr.to_csv();
  CHECK(csv.rfind("eval_ordinal,species,team_fitness,best_so_far\n", 0) == 0);
  CHECK(csv.find("1,1,0.5,0.5\n") != std::string::npos);
  CHECK(csv.find("3,0,0.9") != std::string::npos);
}

TEST_CASE("evaluator failures carry the evaluation ordinal") {
  EaParams ea;
  ea.pop_size = 2;
  ea.tournament = 1;
  int calls = 0;
  BinEngine eng(BinaryDomain{3, std::nullopt}, ea, 2,
                [&calls](const Team&) -> double {
                  if (++calls == 3) throw std::domain_error("bad geometry");
                  return 1.0;
                },
                1, 2);
  CHECK_THROWS_MATCHES(
      eng.initialize(10), std::runtime_error,
      Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("evaluation 3")));
}

TEST_CASE("stepping before initialization is an error") {
  EaParams ea;
  ea.pop_size = 2;
  ea.tournament = 1;
  BinEngine eng(BinaryDomain{3, std::nullopt}, ea, 2, [](const Team&) { return 0.0; }, 1, 2);
  CHECK_THROWS_AS(eng.step(100), std::logic_error);
  CHECK_THROWS_AS(eng.elite_genome(0), std::out_of_range);
}
