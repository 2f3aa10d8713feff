#include "lmegrid/lp.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "simplex.hpp"

namespace lmegrid {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
  }
  return "?";
}

const char* to_string(RowSense s) {
  switch (s) {
    case RowSense::Equal: return "=";
    case RowSense::LessEqual: return "<=";
    case RowSense::GreaterEqual: return ">=";
  }
  return "?";
}

int LinearProgram::add_variable(std::string id, double lower, double upper,
                                double objective) {
  vars_.push_back({std::move(id), lower, upper, objective});
  return static_cast<int>(vars_.size()) - 1;
}

int LinearProgram::add_row(std::string id, std::vector<LpTerm> terms,
                           RowSense sense, double rhs) {
  rows_.push_back({std::move(id), std::move(terms), sense, rhs});
  return static_cast<int>(rows_.size()) - 1;
}

void LinearProgram::set_objective(int var, double coef) {
  vars_.at(var).objective = coef;
}

void LinearProgram::set_rhs(int row, double rhs) { rows_.at(row).rhs = rhs; }

std::vector<double> LinearProgram::objective_vector() const {
  std::vector<double> c(vars_.size());
  for (size_t j = 0; j < vars_.size(); ++j) c[j] = vars_[j].objective;
  return c;
}

void LinearProgram::validate() const {
  for (size_t j = 0; j < vars_.size(); ++j) {
    const auto& v = vars_[j];
    if (std::isnan(v.lower) || std::isnan(v.upper) || !std::isfinite(v.objective))
      throw LpError("variable '" + v.id + "': non-finite bound or objective");
    if (v.lower > v.upper)
      throw LpError("variable '" + v.id + "': lower bound exceeds upper bound");
  }
  for (const auto& r : rows_) {
    if (!std::isfinite(r.rhs)) throw LpError("row '" + r.id + "': non-finite rhs");
    for (const auto& t : r.terms) {
      if (t.var < 0 || t.var >= static_cast<int>(vars_.size()))
        throw LpError("row '" + r.id + "': references undeclared variable");
      if (!std::isfinite(t.coef))
        throw LpError("row '" + r.id + "': non-finite coefficient");
    }
  }
}

LpSolution solve_lp(const LinearProgram& lp, const SolveOptions& options) {
  return detail::simplex_solve(lp, options);
}

LpSolution solve_lp(const LinearProgram& lp, double tol) {
  SolveOptions o;
  o.tol = tol;
  return solve_lp(lp, o);
}

LexicographicResult lexicographic_solve(const LinearProgram& lp,
                                        const std::vector<double>& primary_obj,
                                        const std::vector<double>& secondary_obj,
                                        const SolveOptions& options,
                                        double delta) {
  const int n = lp.num_variables();
  if (static_cast<int>(primary_obj.size()) != n ||
      static_cast<int>(secondary_obj.size()) != n)
    throw LpError("lexicographic_solve: objective size mismatch");

  LinearProgram stage1 = lp;
  for (int j = 0; j < n; ++j) stage1.set_objective(j, primary_obj[j]);
  LexicographicResult out;
  out.first_stage = solve_lp(stage1, options);
  if (out.first_stage.status != SolveStatus::Optimal) {
    out.solution = out.first_stage;
    out.primary_value = out.first_stage.objective;
    return out;
  }
  out.primary_value = out.first_stage.objective;

  LinearProgram stage2 = stage1;
  for (int j = 0; j < n; ++j) stage2.set_objective(j, secondary_obj[j]);
  std::vector<LpTerm> terms;
  for (int j = 0; j < n; ++j)
    if (primary_obj[j] != 0.0) terms.push_back({j, primary_obj[j]});
  stage2.add_row("lex:primary_optimal", std::move(terms), RowSense::LessEqual,
                 out.primary_value + delta);
  out.solution = solve_lp(stage2, options);
  if (out.solution.status != SolveStatus::Optimal)
    throw SolverError(
        "lexicographic_solve: second stage not optimal over the primary "
        "optimal face (status " +
        std::string(to_string(out.solution.status)) + ")");
  // The second stage solution keeps the extra row's dual at the back of
  // row_dual; callers indexing by original rows are unaffected.
  return out;
}

double SolutionCheck::max_residual() const {
  double m = primal_residual;
  m = std::max(m, bound_residual);
  m = std::max(m, complementary_slackness);
  m = std::max(m, dual_feasibility);
  m = std::max(m, duality_gap);
  return m;
}

SolutionCheck check_solution(const LinearProgram& lp, const LpSolution& sol) {
  SolutionCheck out;
  if (sol.status != SolveStatus::Optimal) return out;
  const int n = lp.num_variables();
  const int m = lp.num_rows();

  for (int j = 0; j < n; ++j) {
    const auto& v = lp.variable(j);
    const double x = sol.primal[j];
    if (v.lower > -kInf) out.bound_residual = std::max(out.bound_residual, v.lower - x);
    if (v.upper < kInf) out.bound_residual = std::max(out.bound_residual, x - v.upper);
  }

  double dual_obj = 0.0;
  for (int r = 0; r < m; ++r) {
    const auto& row = lp.row(r);
    double act = 0.0;
    for (const auto& t : row.terms) act += t.coef * sol.primal[t.var];
    const double rel = 1.0 + std::abs(row.rhs);
    const double y = sol.row_dual[r];
    dual_obj += y * row.rhs;
    switch (row.sense) {
      case RowSense::Equal:
        out.primal_residual =
            std::max(out.primal_residual, std::abs(act - row.rhs) / rel);
        break;
      case RowSense::LessEqual:
        out.primal_residual = std::max(out.primal_residual, (act - row.rhs) / rel);
        out.dual_feasibility = std::max(out.dual_feasibility, y);
        out.complementary_slackness =
            std::max(out.complementary_slackness, std::abs(y * (row.rhs - act)));
        break;
      case RowSense::GreaterEqual:
        out.primal_residual = std::max(out.primal_residual, (row.rhs - act) / rel);
        out.dual_feasibility = std::max(out.dual_feasibility, -y);
        out.complementary_slackness =
            std::max(out.complementary_slackness, std::abs(y * (act - row.rhs)));
        break;
    }
  }

  // Bound duals are the reduced costs; they complete the dual objective.
  for (int j = 0; j < n; ++j) {
    const auto& v = lp.variable(j);
    const double d = sol.reduced_cost[j];
    const double x = sol.primal[j];
    if (v.lower == v.upper) {
      dual_obj += d * x;
      continue;
    }
    const bool at_lower = v.lower > -kInf && std::abs(x - v.lower) < 1e-7 * (1 + std::abs(v.lower));
    const bool at_upper = v.upper < kInf && std::abs(x - v.upper) < 1e-7 * (1 + std::abs(v.upper));
    if (at_lower && d > 0) {
      dual_obj += d * v.lower;
    } else if (at_upper && d < 0) {
      dual_obj += d * v.upper;
    } else if (std::abs(d) > 0) {
      // Interior or wrong-signed: any nonzero reduced cost off a bound is a
      // dual violation.
      out.dual_feasibility = std::max(out.dual_feasibility, std::abs(d));
    }
  }
  out.duality_gap =
      std::abs(sol.objective - dual_obj) / (1.0 + std::abs(sol.objective));
  return out;
}

namespace {
std::string num(double v) {
  char buf[40];
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
double parse_num(const std::string& s) {
  if (s == "inf") return kInf;
  if (s == "-inf") return -kInf;
  return std::stod(s);
}
}  // namespace

void write_lp_text(const LinearProgram& lp, std::ostream& out) {
  out << "lp 1\n";
  out << "vars " << lp.num_variables() << "\n";
  for (int j = 0; j < lp.num_variables(); ++j) {
    const auto& v = lp.variable(j);
    out << v.id << " " << num(v.lower) << " " << num(v.upper) << " "
        << num(v.objective) << "\n";
  }
  out << "rows " << lp.num_rows() << "\n";
  for (int r = 0; r < lp.num_rows(); ++r) {
    const auto& row = lp.row(r);
    out << row.id << " " << to_string(row.sense) << " " << num(row.rhs) << " "
        << row.terms.size();
    for (const auto& t : row.terms) out << " " << t.var << " " << num(t.coef);
    out << "\n";
  }
}

LinearProgram read_lp_text(std::istream& in) {
  std::string tag;
  int version = 0;
  in >> tag >> version;
  if (tag != "lp" || version != 1) throw LpError("lp dump: bad header");
  int nvars = 0;
  in >> tag >> nvars;
  if (tag != "vars") throw LpError("lp dump: expected vars section");
  LinearProgram lp;
  for (int j = 0; j < nvars; ++j) {
    std::string id, lo, hi, obj;
    in >> id >> lo >> hi >> obj;
    lp.add_variable(id, parse_num(lo), parse_num(hi), parse_num(obj));
  }
  int nrows = 0;
  in >> tag >> nrows;
  if (tag != "rows") throw LpError("lp dump: expected rows section");
  for (int r = 0; r < nrows; ++r) {
    std::string id, sense, rhs;
    size_t nterms = 0;
    in >> id >> sense >> rhs >> nterms;
    RowSense s;
    if (sense == "=") s = RowSense::Equal;
    else if (sense == "<=") s = RowSense::LessEqual;
    else if (sense == ">=") s = RowSense::GreaterEqual;
    else throw LpError("lp dump: bad row sense '" + sense + "'");
    std::vector<LpTerm> terms(nterms);
    for (auto& t : terms) {
      std::string coef;
      in >> t.var >> coef;
      t.coef = parse_num(coef);
    }
    lp.add_row(id, std::move(terms), s, parse_num(rhs));
  }
  if (!in) throw LpError("lp dump: truncated input");
  return lp;
}

}  // namespace lmegrid
