#pragma once

#include <cmath>
#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

#include "deasel/error.hpp"

namespace deasel {

enum class Relation { LessEq, Equal, GreaterEq };
enum class Sense { Maximize, Minimize };
enum class LpStatus { Optimal, Infeasible, Unbounded };

/// Dense LP: optimize c*x subject to row-wise A x (<=,=,>=) b, with each
/// variable either non-negative (default) or free.
struct LinearProgram {
  Sense sense = Sense::Maximize;
  std::vector<double> objective;
  std::vector<std::vector<double>> rows;
  std::vector<Relation> relations;
  std::vector<double> rhs;
  std::vector<bool> free_vars;  // may be shorter than objective; missing = false

  std::size_t num_vars() const { return objective.size(); }
  std::size_t num_rows() const { return rows.size(); }

  void add_row(std::vector<double> coeffs, Relation rel, double b) {
    rows.push_back(std::move(coeffs));
    relations.push_back(rel);
    rhs.push_back(b);
  }

  bool is_free(std::size_t var) const {
    return var < free_vars.size() && free_vars[var];
  }

  void validate() const {
    if (objective.empty()) fail(ErrorKind::Usage, "LP has no variables");
    if (rows.size() != rhs.size() || rows.size() != relations.size())
      fail(ErrorKind::Usage, "LP row arrays have inconsistent lengths");
    for (double c : objective)
      if (!std::isfinite(c)) fail(ErrorKind::Usage, "non-finite objective coefficient");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != objective.size())
        fail(ErrorKind::Usage, "LP row " + std::to_string(i) + " has wrong width");
      for (double a : rows[i])
        if (!std::isfinite(a)) fail(ErrorKind::Usage, "non-finite constraint coefficient");
      if (!std::isfinite(rhs[i])) fail(ErrorKind::Usage, "non-finite right-hand side");
    }
  }
};

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  double objective = 0;
  std::vector<double> values;
};

struct SimplexOptions {
  double pivot_tol = 1e-9;
  double feas_tol = 1e-8;
  double opt_tol = 1e-9;
  long long max_iterations = 0;  // 0 = 10*(rows+cols)^2
  std::ostream* log = nullptr;   // per-iteration tableau dump when set
};

namespace detail {

// Two-phase primal simplex on a dense tableau. Free variables are split
// into positive parts. Entering rule is most-negative reduced cost with
// smallest-index ties; after 2*(rows+cols) consecutive degenerate pivots
// it falls back to Bland's rule, which cannot cycle.
class SimplexSolver {
 public:
  SimplexSolver(const LinearProgram& lp, const SimplexOptions& opts)
      : lp_(lp), opts_(opts) {}

  LpSolution run() {
    lp_.validate();
    build_tableau();
    max_iter_ = opts_.max_iterations > 0
                    ? opts_.max_iterations
                    : 10LL * static_cast<long long>(lp_.num_rows() + lp_.num_vars()) *
                          static_cast<long long>(lp_.num_rows() + lp_.num_vars());
    bland_after_ = 2 * static_cast<long long>(lp_.num_rows() + lp_.num_vars());

    phase_ = 1;
    if (!iterate()) fail(ErrorKind::Internal, "phase-1 objective unbounded");
    if (cost_rhs_[0] > opts_.feas_tol) return {LpStatus::Infeasible, 0.0, {}};
    expel_artificials();

    phase_ = 2;
    bool bounded = iterate();
    if (!bounded) return {LpStatus::Unbounded, 0.0, {}};
    return extract();
  }

 private:
  const LinearProgram& lp_;
  SimplexOptions opts_;

  std::size_t ncols_ = 0;        // total tableau columns
  std::size_t nstruct_ = 0;      // structural columns (after free-var split)
  std::size_t first_artificial_ = 0;
  std::vector<std::vector<double>> tab_;  // m x ncols
  std::vector<double> b_;
  std::vector<int> basis_;
  std::vector<bool> row_active_;
  // cost rows [0]=phase 1, [1]=phase 2 as minimization reduced costs;
  // cost_rhs_[0] tracks the running sum of artificial values
  std::vector<std::vector<double>> cost_;
  std::vector<double> cost_rhs_;
  // structural column -> (original var, sign): free vars get two columns
  std::vector<std::pair<std::size_t, double>> col_var_;

  int phase_ = 1;
  long long iterations_ = 0;
  long long max_iter_ = 0;
  long long degenerate_streak_ = 0;
  long long bland_after_ = 0;
  bool bland_ = false;

  void build_tableau() {
    const std::size_t m = lp_.num_rows();

    for (std::size_t v = 0; v < lp_.num_vars(); ++v) {
      col_var_.emplace_back(v, 1.0);
      if (lp_.is_free(v)) col_var_.emplace_back(v, -1.0);
    }
    nstruct_ = col_var_.size();

    std::size_t nslack = 0;
    for (auto rel : lp_.relations)
      if (rel != Relation::Equal) ++nslack;
    first_artificial_ = nstruct_ + nslack;
    ncols_ = first_artificial_;  // artificials appended on demand

    tab_.assign(m, std::vector<double>(nstruct_ + nslack, 0.0));
    b_.assign(m, 0.0);
    basis_.assign(m, -1);
    row_active_.assign(m, true);

    double sign_phase2 = lp_.sense == Sense::Maximize ? -1.0 : 1.0;

    std::size_t slack_at = nstruct_;
    std::vector<std::size_t> artificial_rows;
    for (std::size_t i = 0; i < m; ++i) {
      double flip = lp_.rhs[i] < 0 ? -1.0 : 1.0;
      Relation rel = lp_.relations[i];
      if (flip < 0 && rel == Relation::LessEq) rel = Relation::GreaterEq;
      else if (flip < 0 && rel == Relation::GreaterEq) rel = Relation::LessEq;

      for (std::size_t c = 0; c < nstruct_; ++c) {
        auto [v, sgn] = col_var_[c];
        tab_[i][c] = flip * sgn * lp_.rows[i][v];
      }
      b_[i] = flip * lp_.rhs[i];

      if (rel == Relation::LessEq) {
        tab_[i][slack_at] = 1.0;
        basis_[i] = static_cast<int>(slack_at);
        ++slack_at;
      } else if (rel == Relation::GreaterEq) {
        tab_[i][slack_at] = -1.0;
        ++slack_at;
        artificial_rows.push_back(i);
      } else {
        artificial_rows.push_back(i);
      }
    }

    for (std::size_t i : artificial_rows) {
      for (auto& row : tab_) row.push_back(0.0);
      tab_[i][ncols_] = 1.0;
      basis_[i] = static_cast<int>(ncols_);
      ++ncols_;
    }

    // phase-2 reduced costs: minimize (-c for maximize)
    cost_.assign(2, std::vector<double>(ncols_, 0.0));
    cost_rhs_.assign(2, 0.0);
    for (std::size_t c = 0; c < nstruct_; ++c) {
      auto [v, sgn] = col_var_[c];
      cost_[1][c] = sign_phase2 * sgn * lp_.objective[v];
    }
    // phase-1 reduced costs: minimize sum of artificials, basis-reduced
    for (std::size_t i : artificial_rows) {
      for (std::size_t c = 0; c < ncols_; ++c) cost_[0][c] -= tab_[i][c];
      cost_rhs_[0] -= b_[i];
    }
    for (std::size_t a = first_artificial_; a < ncols_; ++a) cost_[0][a] = 0.0;
    cost_rhs_[0] = -cost_rhs_[0];  // stored as current phase-1 objective value
  }

  bool column_allowed(std::size_t c) const {
    if (phase_ == 2 && c >= first_artificial_) return false;
    return true;
  }

  int pick_entering() const {
    const auto& r = cost_[phase_ - 1];
    if (bland_) {
      for (std::size_t c = 0; c < ncols_; ++c)
        if (column_allowed(c) && r[c] < -opts_.opt_tol) return static_cast<int>(c);
      return -1;
    }
    int best = -1;
    double best_val = -opts_.opt_tol;
    for (std::size_t c = 0; c < ncols_; ++c)
      if (column_allowed(c) && r[c] < best_val) {
        best_val = r[c];
        best = static_cast<int>(c);
      }
    return best;
  }

  int pick_leaving(int s) const {
    int best = -1;
    double best_ratio = 0;
    for (std::size_t i = 0; i < tab_.size(); ++i) {
      if (!row_active_[i]) continue;
      double a = tab_[i][s];
      if (a <= opts_.pivot_tol) continue;
      double ratio = b_[i] / a;
      if (best < 0 || ratio < best_ratio - 1e-12 ||
          (std::abs(ratio - best_ratio) <= 1e-12 && basis_[i] < basis_[best])) {
        best = static_cast<int>(i);
        best_ratio = ratio;
      }
    }
    return best;
  }

  void pivot(std::size_t r, std::size_t s) {
    double inv = 1.0 / tab_[r][s];
    for (std::size_t c = 0; c < ncols_; ++c) tab_[r][c] *= inv;
    b_[r] *= inv;
    tab_[r][s] = 1.0;
    for (std::size_t i = 0; i < tab_.size(); ++i) {
      if (i == r || !row_active_[i]) continue;
      double f = tab_[i][s];
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < ncols_; ++c) tab_[i][c] -= f * tab_[r][c];
      tab_[i][s] = 0.0;
      b_[i] -= f * b_[r];
      if (std::abs(b_[i]) < 1e-12) b_[i] = 0.0;
    }
    for (int p = 0; p < 2; ++p) {
      double f = cost_[p][s];
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < ncols_; ++c) cost_[p][c] -= f * tab_[r][c];
      cost_[p][s] = 0.0;
      cost_rhs_[p] += f * b_[r];
    }
    basis_[r] = static_cast<int>(s);
  }

  bool iterate() {
    for (;;) {
      int s = pick_entering();
      if (s < 0) return true;  // optimal for this phase
      int r = pick_leaving(s);
      if (r < 0) return false;  // unbounded
      if (++iterations_ > max_iter_)
        fail(ErrorKind::Solver, "simplex iteration limit exceeded (" +
                                    std::to_string(max_iter_) + ")");
      bool degenerate = b_[r] <= 1e-12;
      pivot(static_cast<std::size_t>(r), static_cast<std::size_t>(s));
      degenerate_streak_ = degenerate ? degenerate_streak_ + 1 : 0;
      if (!bland_ && degenerate_streak_ > bland_after_) bland_ = true;
      if (opts_.log) dump(*opts_.log, s, r);
    }
  }

  // Pivot basic artificials out after phase 1; rows where no structural
  // or slack column can host the pivot are redundant and deactivated.
  void expel_artificials() {
    for (std::size_t i = 0; i < tab_.size(); ++i) {
      if (!row_active_[i] || basis_[i] < static_cast<int>(first_artificial_)) continue;
      int s = -1;
      for (std::size_t c = 0; c < first_artificial_; ++c)
        if (std::abs(tab_[i][c]) > opts_.pivot_tol) {
          s = static_cast<int>(c);
          break;
        }
      if (s >= 0) {
        pivot(i, static_cast<std::size_t>(s));
      } else {
        row_active_[i] = false;
      }
    }
  }

  LpSolution extract() {
    LpSolution sol;
    sol.status = LpStatus::Optimal;
    sol.values.assign(lp_.num_vars(), 0.0);
    for (std::size_t i = 0; i < tab_.size(); ++i) {
      if (!row_active_[i]) continue;
      int c = basis_[i];
      if (c >= 0 && c < static_cast<int>(nstruct_)) {
        auto [v, sgn] = col_var_[c];
        sol.values[v] += sgn * b_[i];
      }
    }
    double obj = 0;
    for (std::size_t v = 0; v < lp_.num_vars(); ++v)
      obj += lp_.objective[v] * sol.values[v];
    sol.objective = obj;
    verify(sol);
    return sol;
  }

  void verify(const LpSolution& sol) const {
    for (std::size_t i = 0; i < lp_.num_rows(); ++i) {
      double lhs = 0;
      for (std::size_t v = 0; v < lp_.num_vars(); ++v)
        lhs += lp_.rows[i][v] * sol.values[v];
      double slack = lp_.rhs[i] - lhs;
      double tol = opts_.feas_tol * std::max(1.0, std::abs(lp_.rhs[i]));
      bool ok = lp_.relations[i] == Relation::LessEq   ? slack >= -tol
                : lp_.relations[i] == Relation::Equal  ? std::abs(slack) <= tol
                                                       : slack <= tol;
      if (!ok)
        fail(ErrorKind::Internal,
             "optimal solution violates constraint " + std::to_string(i));
    }
  }

  void dump(std::ostream& os, int entering, int leaving) const {
    os << "iter " << iterations_ << " phase " << phase_ << " enter x" << entering
       << " leave row " << leaving << " obj " << cost_rhs_[phase_ - 1] << "\n";
    for (std::size_t i = 0; i < tab_.size(); ++i) {
      if (!row_active_[i]) continue;
      os << "  [" << basis_[i] << "]";
      for (double v : tab_[i]) os << ' ' << v;
      os << " | " << b_[i] << "\n";
    }
  }
};

}  // namespace detail

/// Solve with two-phase primal simplex. Infeasible and unbounded results
/// come back via status; the iteration cap throws a Solver error.
inline LpSolution solve(const LinearProgram& lp, const SimplexOptions& opts = {}) {
  detail::SimplexSolver solver(lp, opts);
  return solver.run();
}

}  // namespace deasel
