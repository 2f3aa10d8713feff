// Dense bounded-variable primal simplex with an explicit basis inverse.
//
// Columns 0..n-1 are the structural variables, n..n+m-1 the logical
// variable of each row (row activity + logical = rhs). Logical bounds encode
// the row sense, so the all-logical basis is a valid starting point and row
// duals fall out as the simplex multipliers of the final basis.
//
// Pivot rule: most-improving reduced cost, ties broken by lowest column
// index. A stall counter switches to Bland's rule (lowest improving index)
// permanently, which guarantees termination on degenerate models.

#include "simplex.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

namespace lmegrid::detail {
namespace {

enum class NbState { AtLower, AtUpper, Free };

struct Workspace {
  int m = 0;
  int n = 0;  // structural count; total columns = n + m
  Eigen::MatrixXd astruct;       // m x n
  Eigen::VectorXd b;             // m
  std::vector<double> cost;      // n + m (logicals 0)
  std::vector<double> lower, upper;

  std::vector<int> basis;        // m -> column
  std::vector<int> pos;          // column -> basis row or -1
  std::vector<NbState> nb;       // column -> nonbasic state
  std::vector<double> xval;      // column -> current value
  Eigen::MatrixXd binv;          // m x m

  double ftol = 1e-8;
  double dtol = 1e-9;
  bool bland = false;
  int stall = 0;
  int pivots_since_refactor = 0;

  Eigen::VectorXd column(int j) const {
    if (j < n) return astruct.col(j);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
    e[j - n] = 1.0;
    return e;
  }
};

constexpr double kPivotSkip = 1e-9;
constexpr int kRefactorEvery = 100;
constexpr int kStallLimit = 60;

void build(const LinearProgram& lp, Workspace& w) {
  w.m = lp.num_rows();
  w.n = lp.num_variables();
  const int total = w.n + w.m;
  w.astruct = Eigen::MatrixXd::Zero(w.m, w.n);
  w.b = Eigen::VectorXd::Zero(w.m);
  w.cost.assign(total, 0.0);
  w.lower.assign(total, -kInf);
  w.upper.assign(total, kInf);

  for (int j = 0; j < w.n; ++j) {
    const auto& v = lp.variable(j);
    w.cost[j] = v.objective;
    w.lower[j] = v.lower;
    w.upper[j] = v.upper;
  }
  for (int r = 0; r < w.m; ++r) {
    const auto& row = lp.row(r);
    for (const auto& t : row.terms) w.astruct(r, t.var) += t.coef;
    w.b[r] = row.rhs;
    const int lj = w.n + r;
    switch (row.sense) {
      case RowSense::LessEqual:
        w.lower[lj] = 0.0;
        break;
      case RowSense::GreaterEqual:
        w.upper[lj] = 0.0;
        break;
      case RowSense::Equal:
        w.lower[lj] = 0.0;
        w.upper[lj] = 0.0;
        break;
    }
  }
}

void start_basis(Workspace& w) {
  const int total = w.n + w.m;
  w.basis.resize(w.m);
  w.pos.assign(total, -1);
  w.nb.assign(total, NbState::Free);
  w.xval.assign(total, 0.0);

  for (int j = 0; j < w.n; ++j) {
    if (w.lower[j] > -kInf) {
      w.nb[j] = NbState::AtLower;
      w.xval[j] = w.lower[j];
    } else if (w.upper[j] < kInf) {
      w.nb[j] = NbState::AtUpper;
      w.xval[j] = w.upper[j];
    } else {
      w.nb[j] = NbState::Free;
      w.xval[j] = 0.0;
    }
  }
  for (int r = 0; r < w.m; ++r) {
    w.basis[r] = w.n + r;
    w.pos[w.n + r] = r;
  }
  w.binv = Eigen::MatrixXd::Identity(w.m, w.m);
}

// Basic values from scratch: xB = B^-1 (b - A_N x_N).
void recompute_basics(Workspace& w) {
  Eigen::VectorXd rhs = w.b;
  for (int j = 0; j < w.n + w.m; ++j) {
    if (w.pos[j] >= 0 || w.xval[j] == 0.0) continue;
    if (j < w.n)
      rhs -= w.astruct.col(j) * w.xval[j];
    else
      rhs[j - w.n] -= w.xval[j];
  }
  Eigen::VectorXd xb = w.binv * rhs;
  for (int r = 0; r < w.m; ++r) w.xval[w.basis[r]] = xb[r];
}

void refactorize(Workspace& w) {
  Eigen::MatrixXd bmat(w.m, w.m);
  for (int r = 0; r < w.m; ++r) bmat.col(r) = w.column(w.basis[r]);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(bmat);
  if (!lu.isInvertible())
    throw SolverError("simplex: singular basis during refactorization");
  w.binv = lu.inverse();
  w.pivots_since_refactor = 0;
  recompute_basics(w);
}

bool is_fixed(const Workspace& w, int j) {
  return w.lower[j] == w.upper[j] && w.lower[j] > -kInf;
}

double infeasibility(const Workspace& w) {
  double worst = 0.0;
  for (int r = 0; r < w.m; ++r) {
    const int j = w.basis[r];
    const double v = w.xval[j];
    if (v < w.lower[j]) worst = std::max(worst, w.lower[j] - v);
    if (v > w.upper[j]) worst = std::max(worst, v - w.upper[j]);
  }
  return worst;
}

// Phase-appropriate basic costs. Phase 1 minimizes total bound violation of
// basic variables, whose gradient is -1 below lower and +1 above upper.
Eigen::VectorXd basic_costs(const Workspace& w, bool phase1) {
  Eigen::VectorXd cb(w.m);
  for (int r = 0; r < w.m; ++r) {
    const int j = w.basis[r];
    if (phase1) {
      const double v = w.xval[j];
      if (v < w.lower[j] - w.ftol)
        cb[r] = -1.0;
      else if (v > w.upper[j] + w.ftol)
        cb[r] = 1.0;
      else
        cb[r] = 0.0;
    } else {
      cb[r] = w.cost[j];
    }
  }
  return cb;
}

struct Entering {
  int col = -1;
  int dir = 0;  // +1 increase, -1 decrease
};

Entering pick_entering(const Workspace& w, const Eigen::VectorXd& y,
                       bool phase1) {
  Entering best;
  double best_score = w.dtol;
  for (int j = 0; j < w.n + w.m; ++j) {
    if (w.pos[j] >= 0 || is_fixed(w, j)) continue;
    double cj = phase1 ? 0.0 : w.cost[j];
    double d = cj;
    if (j < w.n)
      d -= y.dot(w.astruct.col(j));
    else
      d -= y[j - w.n];

    int dir = 0;
    double score = 0.0;
    const NbState s = w.nb[j];
    if ((s == NbState::AtLower || s == NbState::Free) && d < -w.dtol) {
      dir = +1;
      score = -d;
    } else if ((s == NbState::AtUpper || s == NbState::Free) && d > w.dtol) {
      dir = -1;
      score = d;
    }
    if (dir == 0) continue;
    if (w.bland) return {j, dir};
    if (score > best_score) {
      best_score = score;
      best = {j, dir};
    }
  }
  return best;
}

struct Ratio {
  double t = kInf;
  int row = -1;        // blocking basis row, -1 = entering's own bound
  double hit_bound = 0.0;
  bool at_upper = false;
};

Ratio ratio_test(const Workspace& w, int q, int dir,
                 const Eigen::VectorXd& wcol, bool phase1) {
  struct Cand {
    double t;
    int row;
    double bound;
    bool at_upper;
    double rate;
  };
  std::vector<Cand> cands;
  cands.reserve(16);

  for (int r = 0; r < w.m; ++r) {
    const double rate = -dir * wcol[r];
    if (std::abs(rate) <= kPivotSkip) continue;
    const int j = w.basis[r];
    const double v = w.xval[j];
    const double lo = w.lower[j];
    const double hi = w.upper[j];
    const bool below = phase1 && v < lo - w.ftol;
    const bool above = phase1 && v > hi + w.ftol;
    double bound = 0.0;
    bool at_upper = false;
    if (below) {
      if (rate <= 0) continue;  // violation grows or shrinks toward -inf: no block
      bound = lo;
    } else if (above) {
      if (rate >= 0) continue;
      bound = hi;
      at_upper = true;
    } else if (rate > 0) {
      if (hi >= kInf) continue;
      bound = hi;
      at_upper = true;
    } else {
      if (lo <= -kInf) continue;
      bound = lo;
    }
    double t = (bound - v) / rate;
    if (t < 0) t = 0;
    cands.push_back({t, r, bound, at_upper, rate});
  }

  // The entering variable's own opposite bound (bound flip).
  double self_t = kInf;
  if (w.nb[q] == NbState::AtLower && w.upper[q] < kInf)
    self_t = w.upper[q] - w.lower[q];
  else if (w.nb[q] == NbState::AtUpper && w.lower[q] > -kInf)
    self_t = w.upper[q] - w.lower[q];

  Ratio out;
  double tmin = self_t;
  for (const auto& c : cands) tmin = std::min(tmin, c.t);
  if (tmin >= kInf) return out;  // unblocked

  // Among near-ties prefer the largest pivot magnitude for stability; in
  // Bland mode the lowest column index to guarantee termination.
  const double slack = 1e-9 * (1.0 + tmin);
  int pick = -1;
  double best_rate = 0.0;
  int best_col = -1;
  for (size_t k = 0; k < cands.size(); ++k) {
    const auto& c = cands[k];
    if (c.t > tmin + slack) continue;
    const int col = w.basis[c.row];
    if (w.bland) {
      if (pick < 0 || col < best_col) {
        pick = static_cast<int>(k);
        best_col = col;
      }
    } else {
      const double m = std::abs(c.rate);
      if (pick < 0 || m > best_rate + 1e-12 ||
          (std::abs(m - best_rate) <= 1e-12 && col < best_col)) {
        pick = static_cast<int>(k);
        best_rate = m;
        best_col = col;
      }
    }
  }

  if (pick >= 0 && cands[pick].t <= self_t) {
    const auto& c = cands[pick];
    out.t = c.t;
    out.row = c.row;
    out.hit_bound = c.bound;
    out.at_upper = c.at_upper;
  } else if (self_t < kInf) {
    out.t = self_t;
    out.row = -1;
  }
  return out;
}

void apply_step(Workspace& w, int q, int dir, const Eigen::VectorXd& wcol,
                const Ratio& r) {
  // Move basics along the edge.
  for (int i = 0; i < w.m; ++i) {
    const double rate = -dir * wcol[i];
    if (rate != 0.0) w.xval[w.basis[i]] += r.t * rate;
  }
  if (r.row < 0) {
    // Bound flip.
    w.xval[q] += dir * r.t;
    w.nb[q] = (w.nb[q] == NbState::AtLower) ? NbState::AtUpper : NbState::AtLower;
    w.xval[q] = (w.nb[q] == NbState::AtLower) ? w.lower[q] : w.upper[q];
    return;
  }
  const int leaving = w.basis[r.row];
  w.xval[leaving] = r.hit_bound;  // snap exactly to the bound it hit
  w.nb[leaving] = r.at_upper ? NbState::AtUpper : NbState::AtLower;
  if (is_fixed(w, leaving)) w.nb[leaving] = NbState::AtLower;
  w.pos[leaving] = -1;

  double start = w.xval[q];
  w.xval[q] = start + dir * r.t;
  w.basis[r.row] = q;
  w.pos[q] = r.row;

  // Product-form update of the inverse.
  const double piv = wcol[r.row];
  Eigen::RowVectorXd pivot_row = w.binv.row(r.row) / piv;
  for (int i = 0; i < w.m; ++i) {
    if (i == r.row) continue;
    const double f = wcol[i];
    if (f != 0.0) w.binv.row(i) -= f * pivot_row;
  }
  w.binv.row(r.row) = pivot_row;
  ++w.pivots_since_refactor;
}

LpSolution package(const Workspace& w, SolveStatus status, int iterations) {
  LpSolution sol;
  sol.status = status;
  sol.iterations = iterations;
  sol.primal.assign(w.xval.begin(), w.xval.begin() + w.n);
  sol.row_dual.assign(w.m, 0.0);
  sol.reduced_cost.assign(w.n, 0.0);
  if (status != SolveStatus::Optimal) return sol;

  Eigen::VectorXd cb(w.m);
  for (int r = 0; r < w.m; ++r) cb[r] = w.cost[w.basis[r]];
  Eigen::VectorXd y = w.binv.transpose() * cb;
  for (int r = 0; r < w.m; ++r) sol.row_dual[r] = y[r];
  for (int j = 0; j < w.n; ++j) {
    if (w.pos[j] >= 0) {
      sol.reduced_cost[j] = 0.0;
    } else {
      sol.reduced_cost[j] = w.cost[j] - y.dot(w.astruct.col(j));
    }
  }
  double obj = 0.0;
  for (int j = 0; j < w.n; ++j) obj += w.cost[j] * w.xval[j];
  sol.objective = obj;
  return sol;
}

}  // namespace

LpSolution simplex_solve(const LinearProgram& lp, const SolveOptions& options) {
  lp.validate();
  Workspace w;
  build(lp, w);
  w.ftol = options.tol > 0 ? options.tol : 1e-8;
  w.dtol = std::max(1e-11, w.ftol * 0.1);
  start_basis(w);
  recompute_basics(w);

  const int max_iter = options.max_iterations > 0
                           ? options.max_iterations
                           : 5000 + 400 * (w.m + w.n);
  int iter = 0;
  int confirms = 0;

  while (true) {
    if (++iter > max_iter)
      throw SolverError("simplex: iteration limit reached (" +
                        std::to_string(max_iter) + ")");

    const bool phase1 = infeasibility(w) > w.ftol;
    Eigen::VectorXd cb = basic_costs(w, phase1);
    Eigen::VectorXd y = w.binv.transpose() * cb;
    Entering e = pick_entering(w, y, phase1);

    if (e.col < 0) {
      // Candidate terminal state: confirm against a fresh factorization to
      // rule out drift in binv.
      if (w.pivots_since_refactor > 0 && confirms < 8) {
        ++confirms;
        refactorize(w);
        --iter;
        continue;
      }
      if (phase1) return package(w, SolveStatus::Infeasible, iter);
      return package(w, SolveStatus::Optimal, iter);
    }
    confirms = 0;

    Eigen::VectorXd wcol = w.binv * w.column(e.col);
    Ratio r = ratio_test(w, e.col, e.dir, wcol, phase1);
    if (r.t >= kInf) {
      if (phase1)
        throw SolverError("simplex: unblocked direction in phase 1");
      if (w.pivots_since_refactor > 0 && confirms < 8) {
        ++confirms;
        refactorize(w);
        --iter;
        continue;
      }
      return package(w, SolveStatus::Unbounded, iter);
    }

    if (r.t <= 1e-10) {
      if (++w.stall > kStallLimit && !w.bland) w.bland = true;
    } else {
      w.stall = 0;
    }

    apply_step(w, e.col, e.dir, wcol, r);

    if (w.pivots_since_refactor >= kRefactorEvery) refactorize(w);
  }
}

}  // namespace lmegrid::detail
