#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "stochmatch/rational.hpp"

namespace stochmatch {

/// maximize c^T x  subject to  A x <= b, x >= 0, with b >= 0 so the origin is
/// a feasible starting basis. Rows are sparse (column, coefficient) lists.
struct LinearProgram {
  std::size_t columns = 0;
  std::vector<Rational> objective;
  std::vector<std::vector<std::pair<std::size_t, Rational>>> rows;
  std::vector<Rational> rhs;
};

struct SimplexResult {
  std::vector<Rational> x;
  Rational objective;
  std::vector<Rational> slack;  // b - A x per row, exact
  std::size_t pivots = 0;
};

/// Exact primal simplex in dictionary form with Bland's rule, which cannot
/// cycle under exact arithmetic. Throws InvalidInput for a negative right-hand
/// side and InternalError if the program is unbounded.
SimplexResult solve_simplex(const LinearProgram& lp);

}  // namespace stochmatch
