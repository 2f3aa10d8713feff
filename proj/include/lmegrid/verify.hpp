// Independent oracles for the theory: one-sided finite-difference slopes of
// the emissions function, the PTDF-based marginal-response route, piecewise
// linearity sweeps, and the decentralized generator equilibrium.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lmegrid/combined.hpp"
#include "lmegrid/dispatch.hpp"

namespace lmegrid {

enum class SlopeStatus { Ok, Infeasible, PieceBoundary };

struct DirectionalSlope {
  int node = -1;
  double left_slope = 0.0;   // (E(0) - E(-eps)) / eps
  double right_slope = 0.0;  // (E(+eps) - E(0)) / eps
  SlopeStatus left_status = SlopeStatus::Infeasible;
  SlopeStatus right_status = SlopeStatus::Infeasible;
  bool smooth = false;  // both sides Ok and slopes agree
};

struct FdOptions {
  double epsilon = 0.0;       // 0 = 1e-4 * max(1, total demand)
  double slope_tol = 1e-5;    // smoothness comparison, relative
  double piece_tol = 1e-6;    // eps vs eps/2 agreement, relative
  SolveOptions solve;
};

// Slopes of f_i(alpha) = E(P^D + alpha e_i) at alpha = 0. Each side is
// evaluated at eps and eps/2 and rejected as a piece boundary when the two
// disagree.
DirectionalSlope fd_lme(const Network& network, int node, const FdOptions& options = {});

enum class PtdfStatus { Ok, CountMismatch, Singular, DualDegenerate };

struct PtdfResult {
  PtdfStatus status = PtdfStatus::CountMismatch;
  double value = 0.0;
  std::string diagnosis;
  bool accepted() const { return status == PtdfStatus::Ok; }
};

// Marginal-response formula on the reduced PTDF system, restricted to
// strictly interior generators and tight lines. Refuses degenerate or
// non-square instances with a diagnosis instead of a number.
PtdfResult ptdf_lme(const Network& network, const DispatchResult& dispatch, int node,
                    double tol = 1e-6);

// PTDF matrix (lines x nodes); the reference-bus column is zero.
std::vector<std::vector<double>> ptdf_matrix(const Network& network);

struct SweepCurve {
  int node = -1;
  std::vector<double> alpha;      // feasible sample positions
  std::vector<double> emissions;  // E at each sample
  int truncated_low = 0;          // infeasible samples below the domain
  int truncated_high = 0;
  std::vector<double> breakpoints;     // alpha of slope changes
  std::vector<double> segment_slopes;  // one per recovered segment
  double max_adjacent_jump = 0.0;      // max |E_{k+1} - E_k|
};

SweepCurve sweep_emissions(const Network& network, int node, double alpha_lo,
                           double alpha_hi, int samples,
                           const SolveOptions& options = {});

struct GenEquilibriumReport {
  struct Violation {
    std::string generator;
    int tier = 0;  // 1 = economic best response, 2 = carbon best response
    double amount = 0.0;
  };
  std::vector<Violation> violations;
  int tied_generators = 0;
  int selections_checked = 0;
  int selections_infeasible = 0;    // induced flows exceed a line limit
  int selections_inconsistent = 0;  // flows clash with a nonzero congestion rent
  bool enumeration_skipped = false;  // more than 3 double-tied generators
  struct Mismatch {
    std::string description;
    double amount = 0.0;
  };
  std::vector<Mismatch> selection_mismatches;  // cost/emission inequality
  bool clean() const { return violations.empty() && selection_mismatches.empty(); }
};

// Equilibrium check: (a) every central generation level lies
// in the two-tier decentralized best-response set; (b) alternative
// best-response selections whose induced flows clear the market attain the
// central cost and emissions. Market clearing requires the flows to respect
// line limits and to saturate every line carrying a nonzero congestion
// rent (the transmission side of the competitive equilibrium; without it,
// equal-cost support fails on tied instances). Selections that cannot be
// induced that way are counted, not judged.
GenEquilibriumReport check_generator_equilibrium(const Network& network,
                                                 const CombinedResult& combined,
                                                 double tol = 1e-6);

// Flows and angles induced by a generation vector through flow balance and
// the flow law (reference angle pinned). Empty when total generation does
// not match total demand.
struct InducedFlows {
  std::vector<double> flow_mw;
  std::vector<double> angle_rad;
  bool within_limits = false;
};
std::optional<InducedFlows> induce_flows(const Network& network,
                                         const std::vector<double>& generation_mw,
                                         double tol = 1e-6);

// Footprint identity residual, relative to 1 + total emissions.
double footprint_residual(const Network& network, const CombinedResult& combined);

}  // namespace lmegrid
