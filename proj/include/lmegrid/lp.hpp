// Solver-agnostic linear program container and solve contract.
//
// Duals follow the convention of a minimization problem: duals of <= rows
// are nonpositive, duals of >= rows are nonnegative, duals of = rows are
// free. Reduced costs are c_j - y^T A_j.
#pragma once

#include <iosfwd>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace lmegrid {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

class LpError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when the simplex loses numerical control. Distinct from an
// infeasible model, which is a status, not an error.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class RowSense { Equal, LessEqual, GreaterEqual };
enum class SolveStatus { Optimal, Infeasible, Unbounded };

const char* to_string(SolveStatus s);
const char* to_string(RowSense s);

struct LpTerm {
  int var = -1;
  double coef = 0.0;
};

struct LpVariableDef {
  std::string id;
  double lower = -kInf;
  double upper = kInf;
  double objective = 0.0;
};

struct LpRowDef {
  std::string id;
  std::vector<LpTerm> terms;
  RowSense sense = RowSense::Equal;
  double rhs = 0.0;
};

class LinearProgram {
 public:
  int add_variable(std::string id, double lower = -kInf, double upper = kInf,
                   double objective = 0.0);
  int add_row(std::string id, std::vector<LpTerm> terms, RowSense sense,
              double rhs);

  void set_objective(int var, double coef);
  void set_rhs(int row, double rhs);

  int num_variables() const { return static_cast<int>(vars_.size()); }
  int num_rows() const { return static_cast<int>(rows_.size()); }
  const LpVariableDef& variable(int j) const { return vars_[j]; }
  const LpRowDef& row(int r) const { return rows_[r]; }

  std::vector<double> objective_vector() const;

  // Throws LpError if a row references an undeclared variable, a bound pair
  // is inverted, or any coefficient is non-finite.
  void validate() const;

 private:
  std::vector<LpVariableDef> vars_;
  std::vector<LpRowDef> rows_;
};

struct LpSolution {
  SolveStatus status = SolveStatus::Infeasible;
  double objective = 0.0;
  std::vector<double> primal;        // per variable
  std::vector<double> row_dual;      // per row
  std::vector<double> reduced_cost;  // per variable
  int iterations = 0;
};

struct SolveOptions {
  double tol = 1e-8;        // feasibility / optimality tolerance
  int max_iterations = 0;   // 0 = automatic from problem size
};

LpSolution solve_lp(const LinearProgram& lp, const SolveOptions& options = {});
LpSolution solve_lp(const LinearProgram& lp, double tol);

struct LexicographicResult {
  LpSolution first_stage;   // optimum of the primary objective
  LpSolution solution;      // secondary optimum within the primary-optimal set
  double primary_value = 0.0;
};

// Minimizes primary_obj, then minimizes secondary_obj subject to
// primary expression <= primary optimum + delta.
LexicographicResult lexicographic_solve(const LinearProgram& lp,
                                        const std::vector<double>& primary_obj,
                                        const std::vector<double>& secondary_obj,
                                        const SolveOptions& options = {},
                                        double delta = 0.0);

// Residuals of an optimal solution against its model; all zero-ish when the
// solver behaved. `scale`-relative bounds are applied by callers.
struct SolutionCheck {
  double primal_residual = 0.0;        // max row violation
  double bound_residual = 0.0;         // max variable bound violation
  double complementary_slackness = 0.0;  // max |dual_r * slack_r| over inequality rows
  double dual_feasibility = 0.0;       // max wrong-signed dual / reduced cost
  double duality_gap = 0.0;            // |primal obj - dual obj|
  double max_residual() const;
};
SolutionCheck check_solution(const LinearProgram& lp, const LpSolution& sol);

// Plain-text dump that round-trips the model exactly (%.17g values).
void write_lp_text(const LinearProgram& lp, std::ostream& out);
LinearProgram read_lp_text(std::istream& in);

}  // namespace lmegrid
