#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

#include "stochmatch/model.hpp"

namespace stochmatch {

struct GenParams {
  std::size_t left = 3;
  std::size_t right = 3;
  std::size_t edges = 5;
  /// Probabilities are k / denominator with 1 <= k < denominator.
  long denominator = 10;
  long max_weight = 10;
  /// random-qc: this many edges (the first ones) get probability 1.
  std::size_t certain = 0;
  /// random-poi: support sizes are drawn from [1, support].
  std::size_t support = 2;
  long max_value = 10;
  /// random-poi: cost is E[X] * j / 20 with j drawn from [0, max_cost_twentieths].
  long max_cost_twentieths = 10;
};

/// Families: "random-qc", "random-poi", "figure1", "k22". The result depends
/// only on (family, params, seed).
Instance generate_instance(std::string_view family, const GenParams& params, std::uint64_t seed);

/// Vertex u with edges to b2 (p = 1/2, w = 1) and b3 (p = 1/3, w = 2), and a
/// second left vertex a1 whose edge (a1, b3) has p = 1/3, w = 3. The LP optimum
/// restricted to u is (4/9, 2/9).
QCInstance figure1_instance();
/// K_{2,2} with every p = 1/2 and w = 1.
QCInstance k22_instance();
QCInstance random_qc_instance(const GenParams& params, std::uint64_t seed);
PoIInstance random_poi_instance(const GenParams& params, std::uint64_t seed);

}  // namespace stochmatch
