#pragma once

// Fixed-length binary genomes and their variation operators.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "coev/rng.hpp"

namespace coev {

using BinaryGenome = std::vector<std::uint8_t>;  // each element 0 or 1

inline BinaryGenome random_binary_genome(int n, Rng& rng) {
  BinaryGenome g(static_cast<std::size_t>(n));
  for (auto& bit : g) bit = static_cast<std::uint8_t>(rng.below(2));
  return g;
}

// Per-allele flip with probability mu. Input is untouched.
inline BinaryGenome mutate_binary(const BinaryGenome& genome, double mu, Rng& rng) {
  BinaryGenome out = genome;
  for (auto& bit : out) {
    if (rng.bernoulli(mu)) bit = static_cast<std::uint8_t>(1 - bit);
  }
  return out;
}

// Uniform crossover: each allele taken from parent a or b with equal chance.
inline BinaryGenome uniform_crossover(const BinaryGenome& a, const BinaryGenome& b, Rng& rng) {
  if (a.size() != b.size()) throw std::invalid_argument("crossover: parent length mismatch");
  BinaryGenome child(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    child[i] = rng.bernoulli(0.5) ? a[i] : b[i];
  }
  return child;
}

inline void encode_binary(const BinaryGenome& g, std::span<double> out) {
  if (out.size() < g.size()) throw std::invalid_argument("encode_binary: output too small");
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = static_cast<double>(g[i]);
}

}  // namespace coev
