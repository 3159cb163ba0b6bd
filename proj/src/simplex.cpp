#include "stochmatch/simplex.hpp"

#include "stochmatch/error.hpp"

namespace stochmatch {

namespace {

// Dictionary rows 0..m-1 hold x_B[i] + sum_j D[i][j] x_N[j] = D[i][n];
// row m holds z + sum_j D[m][j] x_N[j] = D[m][n].
class Dictionary {
 public:
  explicit Dictionary(const LinearProgram& lp)
      : m_(lp.rows.size()), n_(lp.columns), d_(m_ + 1, std::vector<Rational>(n_ + 1)), basic_(m_), nonbasic_(n_) {
    for (std::size_t i = 0; i < m_; ++i) {
      if (lp.rhs[i].is_negative()) throw InvalidInput("simplex requires a non-negative right-hand side");
      for (const auto& [col, coef] : lp.rows[i]) d_[i][col] += coef;
      d_[i][n_] = lp.rhs[i];
      basic_[i] = n_ + i;
    }
    for (std::size_t j = 0; j < n_; ++j) {
      d_[m_][j] = -lp.objective[j];
      nonbasic_[j] = j;
    }
  }

  std::size_t solve() {
    std::size_t pivots = 0;
    for (;;) {
      // Bland: entering variable is the lowest-indexed improving one.
      std::size_t s = n_;
      for (std::size_t j = 0; j < n_; ++j) {
        if (d_[m_][j].is_negative() && (s == n_ || nonbasic_[j] < nonbasic_[s])) s = j;
      }
      if (s == n_) return pivots;

      std::size_t r = m_;
      Rational best;
      for (std::size_t i = 0; i < m_; ++i) {
        if (!d_[i][s].is_positive()) continue;
        Rational ratio = d_[i][n_] / d_[i][s];
        if (r == m_ || ratio < best || (ratio == best && basic_[i] < basic_[r])) {
          r = i;
          best = std::move(ratio);
        }
      }
      if (r == m_) throw InternalError("linear program is unbounded");
      pivot(r, s);
      ++pivots;
    }
  }

  SimplexResult result(std::size_t pivots) const {
    SimplexResult out;
    out.x.assign(n_, Rational());
    out.slack.assign(m_, Rational());
    for (std::size_t i = 0; i < m_; ++i) {
      if (basic_[i] < n_) {
        out.x[basic_[i]] = d_[i][n_];
      } else {
        out.slack[basic_[i] - n_] = d_[i][n_];
      }
    }
    out.objective = d_[m_][n_];
    out.pivots = pivots;
    return out;
  }

 private:
  void pivot(std::size_t r, std::size_t s) {
    const Rational inv = Rational(1) / d_[r][s];
    for (std::size_t j = 0; j <= n_; ++j) {
      if (j != s && !d_[r][j].is_zero()) d_[r][j] *= inv;
    }
    for (std::size_t i = 0; i <= m_; ++i) {
      if (i == r || d_[i][s].is_zero()) continue;
      const Rational factor = d_[i][s];
      for (std::size_t j = 0; j <= n_; ++j) {
        if (j != s && !d_[r][j].is_zero()) d_[i][j] -= factor * d_[r][j];
      }
      d_[i][s] = -factor * inv;
    }
    d_[r][s] = inv;
    std::swap(basic_[r], nonbasic_[s]);
  }

  std::size_t m_;
  std::size_t n_;
  std::vector<std::vector<Rational>> d_;
  std::vector<std::size_t> basic_;
  std::vector<std::size_t> nonbasic_;
};

}  // namespace

SimplexResult solve_simplex(const LinearProgram& lp) {
  if (lp.objective.size() != lp.columns || lp.rhs.size() != lp.rows.size()) {
    throw InvalidInput("inconsistent linear program dimensions");
  }
  Dictionary dict(lp);
  const std::size_t pivots = dict.solve();
  return dict.result(pivots);
}

}  // namespace stochmatch
