#include "mechsim/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mechsim {

namespace {

// Dense tableau simplex. Columns: [vars | surpluses | artificials | rhs].
// Two reduced-cost rows are maintained jointly so phase transitions are free.
class Tableau {
 public:
  Tableau(const LpProblem& p, double tol)
      : tol_(tol),
        n_(p.num_vars),
        me_(static_cast<int>(p.eq_rows.size())),
        mg_(static_cast<int>(p.ge_rows.size())),
        m_(me_ + mg_),
        surplus0_(n_),
        art0_(n_ + mg_),
        rhs_(n_ + mg_ + m_),
        width_(n_ + mg_ + m_ + 1) {
    rows_.assign(static_cast<size_t>(m_) * width_, 0.0);
    row_sign_.assign(m_, 1.0);
    basis_.assign(m_, -1);
    cost1_.assign(width_, 0.0);
    cost2_.assign(width_, 0.0);

    for (int r = 0; r < m_; ++r) {
      const bool is_eq = r < me_;
      const auto& src = is_eq ? p.eq_rows[r] : p.ge_rows[r - me_];
      const double b = is_eq ? p.eq_rhs[r] : p.ge_rhs[r - me_];
      double* row = row_ptr(r);
      for (int j = 0; j < n_; ++j) row[j] = src[j];
      if (!is_eq) row[surplus0_ + (r - me_)] = -1.0;
      row[rhs_] = b;
      if (b < 0.0 || (!is_eq && b == 0.0)) {
        // flipping a ge-row with b <= 0 turns its surplus coefficient positive,
        // so the surplus can start basic and no artificial is needed
        row_sign_[r] = -1.0;
        for (int j = 0; j < width_; ++j) row[j] = -row[j];
      }
      row[art0_ + r] = 1.0;
      if (!is_eq && row[surplus0_ + (r - me_)] > 0.0) {
        basis_[r] = surplus0_ + (r - me_);
      }
    }
    for (int j = 0; j < n_; ++j) cost2_[j] = p.objective[j];
  }

  double* row_ptr(int r) { return rows_.data() + static_cast<size_t>(r) * width_; }
  const double* row_ptr(int r) const { return rows_.data() + static_cast<size_t>(r) * width_; }

  // Phase 1 maximizes minus the sum of the artificials that are actually needed
  // (rows whose surplus could not start basic). cost2 stays the plain objective:
  // every initially basic column has zero cost in both phases.
  void init_phase1_costs() {
    for (int r = 0; r < m_; ++r) {
      if (basis_[r] < 0) basis_[r] = art0_ + r;
    }
    for (int j = 0; j < width_; ++j) {
      double s = (j >= art0_ && j < art0_ + m_) ? -1.0 : 0.0;
      for (int r = 0; r < m_; ++r) {
        if (basis_[r] >= art0_) s += row_ptr(r)[j];
      }
      cost1_[j] = s;
    }
  }

  void pivot(int r, int j) {
    double* prow = row_ptr(r);
    const double piv = prow[j];
    const double inv = 1.0 / piv;
    for (int k = 0; k < width_; ++k) prow[k] *= inv;
    prow[j] = 1.0;
    for (int rr = 0; rr < m_; ++rr) {
      if (rr == r) continue;
      double* row = row_ptr(rr);
      const double f = row[j];
      if (f == 0.0) continue;
      for (int k = 0; k < width_; ++k) row[k] -= f * prow[k];
      row[j] = 0.0;
    }
    for (double* cost : {cost1_.data(), cost2_.data()}) {
      const double f = cost[j];
      if (f == 0.0) continue;
      for (int k = 0; k < width_; ++k) cost[k] -= f * prow[k];
      cost[j] = 0.0;
    }
    basis_[r] = j;
  }

  // One simplex phase over the given reduced-cost row. Columns >= col_limit
  // never enter. Returns kOptimal when no improving column remains.
  //
  // The leaving row follows the lexicographic rule over [rhs | current basis
  // columns]: the basic columns form an identity block at phase start, every
  // row is lexicographically positive and stays so, which rules out cycling on
  // the heavily degenerate equilibrium polytopes this solver exists for.
  LpStatus run(std::vector<double>& cost, int col_limit, long max_iters, long& iters) {
    const std::vector<int> ref_cols = basis_;
    const double enter_tol = 1e-7;
    while (true) {
      int enter = -1;
      double best = enter_tol;
      for (int j = 0; j < col_limit; ++j) {
        if (cost[j] > best) {
          best = cost[j];
          enter = j;
        }
      }
      if (enter < 0) return LpStatus::kOptimal;

      // prefer well-sized pivot elements; fall back to the bare tolerance only
      // when nothing better exists
      int leave = pick_leaving(enter, 1e-7, ref_cols);
      if (leave < 0) leave = pick_leaving(enter, tol_, ref_cols);
      if (leave < 0) return LpStatus::kUnbounded;

      pivot(leave, enter);
      if (++iters > max_iters) return LpStatus::kIterationLimit;
    }
  }

  int pick_leaving(int enter, double pivot_tol, const std::vector<int>& ref_cols) {
    int leave = -1;
    for (int r = 0; r < m_; ++r) {
      const double a = row_ptr(r)[enter];
      if (a <= pivot_tol) continue;
      if (leave < 0) {
        leave = r;
        continue;
      }
      // lexicographic comparison of rows r and leave, scaled by their pivots
      const double al = row_ptr(leave)[enter];
      const double qr0 = row_ptr(r)[rhs_] / a;
      const double ql0 = row_ptr(leave)[rhs_] / al;
      double eps = 1e-9 * (1.0 + std::abs(qr0) + std::abs(ql0));
      if (qr0 < ql0 - eps) {
        leave = r;
        continue;
      }
      if (qr0 > ql0 + eps) continue;
      for (int ref : ref_cols) {
        const double qr = row_ptr(r)[ref] / a;
        const double ql = row_ptr(leave)[ref] / al;
        eps = 1e-9 * (1.0 + std::abs(qr) + std::abs(ql));
        if (qr < ql - eps) {
          leave = r;
          break;
        }
        if (qr > ql + eps) break;
      }
    }
    return leave;
  }

  double tol_;
  int n_, me_, mg_, m_;
  int surplus0_, art0_, rhs_, width_;
  std::vector<double> rows_;
  std::vector<double> row_sign_;
  std::vector<int> basis_;
  std::vector<double> cost1_, cost2_;
};

}  // namespace

LpResult lp_solve(const LpProblem& p, const LpOptions& options) {
  if (static_cast<int>(p.objective.size()) != p.num_vars) {
    throw std::invalid_argument("lp_solve: objective length != num_vars");
  }
  if (p.eq_rows.size() != p.eq_rhs.size() || p.ge_rows.size() != p.ge_rhs.size()) {
    throw std::invalid_argument("lp_solve: row/rhs length mismatch");
  }

  const double tol = options.tol;
  Tableau t(p, tol);
  LpResult res;
  const long max_iters =
      options.max_iterations > 0 ? options.max_iterations : 2000L + 200L * (t.m_ + 10L);

  bool warm_ok = false;
  if (!options.warm_pivots.empty()) {
    warm_ok = true;
    // cost rows must be valid before pivoting so they stay consistent
    for (int j = 0; j < t.width_; ++j) t.cost1_[j] = 0.0;
    for (const auto& [r, j] : options.warm_pivots) {
      if (r < 0 || r >= t.m_ || j < 0 || j >= t.art0_ || std::abs(t.row_ptr(r)[j]) <= 1e-7) {
        warm_ok = false;
        break;
      }
      t.pivot(r, j);
    }
    if (warm_ok) {
      for (int r = 0; r < t.m_ && warm_ok; ++r) {
        if (t.basis_[r] < 0 || t.basis_[r] >= t.art0_ || t.row_ptr(r)[t.rhs_] < -1e-7) {
          warm_ok = false;
        }
      }
    }
    if (warm_ok) {
      // clamp tiny negative basic values introduced by roundoff
      for (int r = 0; r < t.m_; ++r) {
        if (t.row_ptr(r)[t.rhs_] < 0.0) t.row_ptr(r)[t.rhs_] = 0.0;
      }
    }
  }

  if (!warm_ok) {
    // rebuild in case a failed warm start half-pivoted the tableau
    t = Tableau(p, tol);
    t.init_phase1_costs();
    const LpStatus s1 = t.run(t.cost1_, t.art0_, max_iters, res.iterations);
    if (s1 == LpStatus::kIterationLimit) {
      res.status = s1;
      return res;
    }
    if (t.cost1_[t.rhs_] > 1e-7) {
      res.status = LpStatus::kInfeasible;
      return res;
    }
    // drive leftover artificials out of the basis where possible
    for (int r = 0; r < t.m_; ++r) {
      if (t.basis_[r] < t.art0_) continue;
      int j = 0;
      for (; j < t.art0_; ++j) {
        if (std::abs(t.row_ptr(r)[j]) > 1e-7) break;
      }
      if (j < t.art0_) t.pivot(r, j);
      // else: redundant row; the artificial stays basic at zero
    }
  }

  const LpStatus s2 = t.run(t.cost2_, t.art0_, max_iters, res.iterations);
  if (s2 != LpStatus::kOptimal) {
    res.status = s2;
    return res;
  }

  res.x.assign(p.num_vars, 0.0);
  for (int r = 0; r < t.m_; ++r) {
    if (t.basis_[r] < p.num_vars) res.x[t.basis_[r]] = t.row_ptr(r)[t.rhs_];
  }
  res.objective = 0.0;
  for (int j = 0; j < p.num_vars; ++j) res.objective += p.objective[j] * res.x[j];

  // duals: for the artificial column of row r, the reduced cost is -y_r
  res.dual_eq.assign(t.me_, 0.0);
  res.dual_ge.assign(t.mg_, 0.0);
  for (int r = 0; r < t.m_; ++r) {
    const double y = -t.cost2_[t.art0_ + r] * t.row_sign_[r];
    if (r < t.me_) {
      res.dual_eq[r] = y;
    } else {
      res.dual_ge[r - t.me_] = y;
    }
  }

  // certificate against the original data
  double resid = 0.0;
  for (int r = 0; r < t.me_; ++r) {
    double v = -p.eq_rhs[r];
    for (int j = 0; j < p.num_vars; ++j) v += p.eq_rows[r][j] * res.x[j];
    resid = std::max(resid, std::abs(v));
  }
  for (int r = 0; r < t.mg_; ++r) {
    double v = -p.ge_rhs[r];
    for (int j = 0; j < p.num_vars; ++j) v += p.ge_rows[r][j] * res.x[j];
    resid = std::max(resid, std::max(0.0, -v));
  }
  for (double v : res.x) resid = std::max(resid, std::max(0.0, -v));
  res.max_primal_residual = resid;

  double dual_violation = 0.0;
  for (int r = 0; r < t.mg_; ++r) {
    dual_violation = std::max(dual_violation, res.dual_ge[r]);  // must be <= 0
  }
  double dual_obj = 0.0;
  for (int r = 0; r < t.me_; ++r) dual_obj += res.dual_eq[r] * p.eq_rhs[r];
  for (int r = 0; r < t.mg_; ++r) dual_obj += res.dual_ge[r] * p.ge_rhs[r];
  for (int j = 0; j < p.num_vars; ++j) {
    double reduced = p.objective[j];
    for (int r = 0; r < t.me_; ++r) reduced -= res.dual_eq[r] * p.eq_rows[r][j];
    for (int r = 0; r < t.mg_; ++r) reduced -= res.dual_ge[r] * p.ge_rows[r][j];
    dual_violation = std::max(dual_violation, reduced);  // c - A'y <= 0
  }
  res.max_dual_violation = dual_violation;
  res.duality_gap = std::abs(res.objective - dual_obj);
  res.status = LpStatus::kOptimal;
  return res;
}

}  // namespace mechsim
