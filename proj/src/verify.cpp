#include "lmegrid/verify.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "lmegrid/accounting.hpp"

namespace lmegrid {

namespace {

std::vector<double> base_demand(const Network& network) {
  std::vector<double> d;
  for (const auto& n : network.nodes()) d.push_back(n.demand_mw);
  return d;
}

struct SideSample {
  SlopeStatus status = SlopeStatus::Infeasible;
  double slope = 0.0;
};

SideSample side_slope(const Network& network, int node, double e0, double eps,
                      double piece_tol, const SolveOptions& solve) {
  auto at = [&](double delta) {
    std::vector<double> d = base_demand(network);
    d[node] += delta;
    return try_emissions_at(network, d, solve);
  };
  auto full = at(eps);
  auto half = at(eps / 2.0);
  SideSample out;
  if (!full || !half) return out;  // Infeasible
  const double s_full = (*full - e0) / eps;
  const double s_half = (*half - e0) / (eps / 2.0);
  if (std::abs(s_full - s_half) > piece_tol * (1.0 + std::abs(s_full))) {
    out.status = SlopeStatus::PieceBoundary;
    return out;
  }
  out.status = SlopeStatus::Ok;
  out.slope = s_full;
  return out;
}

}  // namespace

DirectionalSlope fd_lme(const Network& network, int node, const FdOptions& options) {
  DirectionalSlope out;
  out.node = node;
  const double eps = options.epsilon > 0
                         ? options.epsilon
                         : 1e-4 * std::max(1.0, network.total_demand_mw());
  const double e0 = emissions_at(network, options.solve);

  SideSample right = side_slope(network, node, e0, eps, options.piece_tol, options.solve);
  SideSample left = side_slope(network, node, e0, -eps, options.piece_tol, options.solve);
  out.right_status = right.status;
  out.left_status = left.status;
  out.right_slope = right.slope;
  // side_slope along -eps reports (E(-eps) - E(0)) / (-eps) which is
  // already the left slope (E(0) - E(-eps)) / eps.
  out.left_slope = left.slope;
  out.smooth = right.status == SlopeStatus::Ok && left.status == SlopeStatus::Ok &&
               std::abs(out.left_slope - out.right_slope) <=
                   options.slope_tol * (1.0 + std::abs(out.right_slope));
  return out;
}

std::vector<std::vector<double>> ptdf_matrix(const Network& network) {
  const int N = network.num_nodes();
  const int L = network.num_lines();
  const int ref = network.reference_index();

  // Reduced incidence system: Psi = B_line A^T (A B_line A^T)^-1 with the
  // reference bus removed; its column is identically zero.
  std::vector<int> red(N, -1);
  int k = 0;
  for (int n = 0; n < N; ++n)
    if (n != ref) red[n] = k++;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(N - 1 > 0 ? N - 1 : 0, L);
  for (int l = 0; l < L; ++l) {
    const int u = network.line_from(l);
    const int v = network.line_to(l);
    if (red[u] >= 0) a(red[u], l) = 1.0;
    if (red[v] >= 0) a(red[v], l) = -1.0;
  }
  std::vector<std::vector<double>> psi(L, std::vector<double>(N, 0.0));
  if (N <= 1 || L == 0) return psi;

  Eigen::VectorXd bline(L);
  for (int l = 0; l < L; ++l) bline[l] = network.lines()[l].susceptance;
  Eigen::MatrixXd bbus = a * bline.asDiagonal() * a.transpose();
  Eigen::MatrixXd rhs = bline.asDiagonal() * a.transpose();  // L x (N-1) transposed later
  Eigen::MatrixXd full = rhs * bbus.inverse();               // L x (N-1)
  for (int l = 0; l < L; ++l)
    for (int n = 0; n < N; ++n)
      if (red[n] >= 0) psi[l][n] = full(l, red[n]);
  return psi;
}

PtdfResult ptdf_lme(const Network& network, const DispatchResult& dispatch, int node,
                    double tol) {
  PtdfResult out;
  if (dispatch.status != SolveStatus::Optimal) {
    out.status = PtdfStatus::CountMismatch;
    out.diagnosis = "dispatch not optimal";
    return out;
  }
  const int G = network.num_generators();
  const int L = network.num_lines();

  std::vector<int> marginal;
  for (int g = 0; g < G; ++g) {
    const auto& gen = network.generators()[g];
    const double p = dispatch.generation_mw[g];
    const double span = std::max(1.0, gen.p_max_mw - gen.p_min_mw);
    const bool at_min = p - gen.p_min_mw <= tol * span;
    const bool at_max = gen.p_max_mw - p <= tol * span;
    if (!at_min && !at_max) marginal.push_back(g);
    // A bound generator with vanished multipliers signals dual degeneracy:
    // the marginal set is not identified by the primal alone.
    if ((at_min || at_max) &&
        std::abs(dispatch.gamma_plus[g]) + std::abs(dispatch.gamma_minus[g]) < tol &&
        std::abs(gen.cost_per_mwh - dispatch.lmp[network.generator_node(g)]) < tol) {
      out.status = PtdfStatus::DualDegenerate;
      out.diagnosis = "generator '" + gen.id + "' at a bound with zero multiplier";
      return out;
    }
  }
  std::vector<int> tight;
  for (int l = 0; l < L; ++l) {
    const auto& ln = network.lines()[l];
    if (ln.f_max_mw - std::abs(dispatch.flow_mw[l]) <= tol * std::max(1.0, ln.f_max_mw)) {
      tight.push_back(l);
      if (std::abs(dispatch.rho_plus[l]) + std::abs(dispatch.rho_minus[l]) < tol) {
        out.status = PtdfStatus::DualDegenerate;
        out.diagnosis = "line '" + ln.id + "' tight with zero congestion rent";
        return out;
      }
    }
  }

  const int k = static_cast<int>(marginal.size());
  const int t = static_cast<int>(tight.size());
  if (k != 1 + t) {
    out.status = PtdfStatus::CountMismatch;
    out.diagnosis = "interior generators (" + std::to_string(k) +
                    ") != 1 + tight lines (" + std::to_string(t) + ")";
    return out;
  }

  auto psi = ptdf_matrix(network);
  // Square response system: total response 1, zero flow change on tight lines.
  Eigen::MatrixXd m(k, k);
  Eigen::VectorXd rhs(k);
  for (int c = 0; c < k; ++c) m(0, c) = 1.0;
  rhs[0] = 1.0;
  for (int r = 0; r < t; ++r) {
    for (int c = 0; c < k; ++c)
      m(r + 1, c) = psi[tight[r]][network.generator_node(marginal[c])];
    rhs[r + 1] = psi[tight[r]][node];
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  if (!lu.isInvertible()) {
    out.status = PtdfStatus::Singular;
    out.diagnosis = "reduced response system is singular (degenerate instance)";
    return out;
  }
  Eigen::VectorXd response = lu.solve(rhs);
  double value = 0.0;
  for (int c = 0; c < k; ++c)
    value += network.generators()[marginal[c]].emission_rate * response[c];
  out.status = PtdfStatus::Ok;
  out.value = value;
  return out;
}

SweepCurve sweep_emissions(const Network& network, int node, double alpha_lo,
                           double alpha_hi, int samples, const SolveOptions& options) {
  if (samples < 2) throw InternalError("sweep_emissions: need at least 2 samples");
  SweepCurve out;
  out.node = node;
  const std::vector<double> d0 = base_demand(network);
  const double step = (alpha_hi - alpha_lo) / (samples - 1);
  for (int k = 0; k < samples; ++k) {
    const double alpha = alpha_lo + step * k;
    std::vector<double> d = d0;
    d[node] += alpha;
    auto e = try_emissions_at(network, d, options);
    if (!e) {
      if (out.alpha.empty())
        ++out.truncated_low;
      else
        ++out.truncated_high;
      continue;
    }
    out.alpha.push_back(alpha);
    out.emissions.push_back(*e);
  }
  const int K = static_cast<int>(out.alpha.size());
  if (K < 2) return out;

  for (int i = 0; i + 1 < K; ++i)
    out.max_adjacent_jump = std::max(out.max_adjacent_jump,
                                     std::abs(out.emissions[i + 1] - out.emissions[i]));

  // Group cells of equal slope into runs; transition cells that straddle a
  // kink show an intermediate slope and collapse into the breakpoint
  // computed as the intersection of the neighboring segment lines.
  std::vector<double> slope(K - 1);
  for (int i = 0; i + 1 < K; ++i)
    slope[i] = (out.emissions[i + 1] - out.emissions[i]) /
               (out.alpha[i + 1] - out.alpha[i]);
  const double slope_tol = 1e-6 * (1.0 + std::abs(slope[0])) + 1e-7;

  struct Run {
    int first_cell, last_cell;
    double slope;
  };
  std::vector<Run> runs;
  for (int i = 0; i < K - 1; ++i) {
    if (!runs.empty() && std::abs(slope[i] - runs.back().slope) <=
                             slope_tol * (1.0 + std::abs(runs.back().slope))) {
      runs.back().last_cell = i;
    } else {
      runs.push_back({i, i, slope[i]});
    }
  }
  // Drop single-cell transition runs sandwiched between longer neighbors.
  std::vector<Run> segments;
  for (size_t i = 0; i < runs.size(); ++i) {
    const bool single = runs[i].first_cell == runs[i].last_cell;
    const bool sandwiched = single && i > 0 && i + 1 < runs.size();
    if (sandwiched) {
      const double lo = std::min(runs[i - 1].slope, runs[i + 1].slope);
      const double hi = std::max(runs[i - 1].slope, runs[i + 1].slope);
      if (runs[i].slope >= lo - slope_tol && runs[i].slope <= hi + slope_tol) continue;
    }
    segments.push_back(runs[i]);
  }

  auto line_at = [&](const Run& r, double x) {
    const double x0 = out.alpha[r.first_cell];
    const double y0 = out.emissions[r.first_cell];
    return y0 + r.slope * (x - x0);
  };
  for (const auto& seg : segments) out.segment_slopes.push_back(seg.slope);
  for (size_t i = 0; i + 1 < segments.size(); ++i) {
    const Run& a = segments[i];
    const Run& b = segments[i + 1];
    const double ds = b.slope - a.slope;
    if (std::abs(ds) < 1e-12) continue;
    // Intersection of the two segment lines recovers the kink exactly.
    const double x = (line_at(a, 0.0) - line_at(b, 0.0)) / ds;
    out.breakpoints.push_back(x);
  }
  return out;
}

std::optional<InducedFlows> induce_flows(const Network& network,
                                         const std::vector<double>& generation_mw,
                                         double tol) {
  const int N = network.num_nodes();
  const int L = network.num_lines();
  const int ref = network.reference_index();

  std::vector<double> injection(N, 0.0);
  for (int g = 0; g < network.num_generators(); ++g)
    injection[network.generator_node(g)] += generation_mw[g];
  for (int n = 0; n < N; ++n) injection[n] -= network.nodes()[n].demand_mw;
  double total = 0.0;
  for (double v : injection) total += v;
  if (std::abs(total) > tol * (1.0 + network.total_demand_mw())) return std::nullopt;

  std::vector<int> red(N, -1);
  int k = 0;
  for (int n = 0; n < N; ++n)
    if (n != ref) red[n] = k++;
  Eigen::MatrixXd bbus = Eigen::MatrixXd::Zero(std::max(N - 1, 0), std::max(N - 1, 0));
  for (int l = 0; l < L; ++l) {
    const int u = network.line_from(l);
    const int v = network.line_to(l);
    const double b = network.lines()[l].susceptance;
    if (red[u] >= 0) bbus(red[u], red[u]) += b;
    if (red[v] >= 0) bbus(red[v], red[v]) += b;
    if (red[u] >= 0 && red[v] >= 0) {
      bbus(red[u], red[v]) -= b;
      bbus(red[v], red[u]) -= b;
    }
  }
  InducedFlows out;
  out.angle_rad.assign(N, 0.0);
  if (N > 1) {
    Eigen::VectorXd p(N - 1);
    for (int n = 0; n < N; ++n)
      if (red[n] >= 0) p[red[n]] = injection[n] / kPowerBaseMw;
    Eigen::VectorXd theta = bbus.ldlt().solve(p);
    for (int n = 0; n < N; ++n)
      if (red[n] >= 0) out.angle_rad[n] = theta[red[n]];
  }
  out.flow_mw.assign(L, 0.0);
  out.within_limits = true;
  for (int l = 0; l < L; ++l) {
    const double f = network.lines()[l].susceptance *
                     (out.angle_rad[network.line_from(l)] -
                      out.angle_rad[network.line_to(l)]) *
                     kPowerBaseMw;
    out.flow_mw[l] = f;
    if (std::abs(f) > network.lines()[l].f_max_mw +
                          tol * (1.0 + network.lines()[l].f_max_mw))
      out.within_limits = false;
  }
  return out;
}

namespace {

struct BestResponse {
  double lo = 0.0, hi = 0.0;  // interval after both tiers
  bool tied = false;          // interval with positive width (double tie)
};

BestResponse best_response(const Generator& gen, double lmp, double lme, double tol) {
  BestResponse br;
  const double price_gap = gen.cost_per_mwh - lmp;
  const double carbon_gap = gen.emission_rate - lme;
  const double ptol = tol * (1.0 + std::abs(gen.cost_per_mwh));
  const double ctol = tol * (1.0 + std::abs(gen.emission_rate));
  if (price_gap > ptol) {
    br.lo = br.hi = gen.p_min_mw;
  } else if (price_gap < -ptol) {
    br.lo = br.hi = gen.p_max_mw;
  } else if (carbon_gap > ctol) {
    br.lo = br.hi = gen.p_min_mw;
  } else if (carbon_gap < -ctol) {
    br.lo = br.hi = gen.p_max_mw;
  } else {
    br.lo = gen.p_min_mw;
    br.hi = gen.p_max_mw;
    br.tied = br.hi - br.lo > 0;
  }
  return br;
}

}  // namespace

GenEquilibriumReport check_generator_equilibrium(const Network& network,
                                                 const CombinedResult& combined,
                                                 double tol) {
  GenEquilibriumReport report;
  const int G = network.num_generators();
  const NodalLme lmes = lme(combined, network);

  std::vector<BestResponse> responses(G);
  std::vector<int> tied;
  for (int g = 0; g < G; ++g) {
    const auto& gen = network.generators()[g];
    const int node = network.generator_node(g);
    responses[g] = best_response(gen, combined.pi[node], lmes.value[node], tol);
    if (responses[g].tied) tied.push_back(g);

    const double span = std::max(1.0, gen.p_max_mw - gen.p_min_mw);
    const double p = combined.generation_mw[g];
    if (p < responses[g].lo - tol * span || p > responses[g].hi + tol * span) {
      const int tier =
          std::abs(gen.cost_per_mwh - combined.pi[node]) >
                  tol * (1.0 + std::abs(gen.cost_per_mwh))
              ? 1
              : 2;
      const double miss = std::max(responses[g].lo - p, p - responses[g].hi);
      report.violations.push_back({gen.id, tier, miss});
    }
  }
  report.tied_generators = static_cast<int>(tied.size());
  if (tied.size() > 3) {
    report.enumeration_skipped = true;
    return report;
  }

  // Enumerate alternative selections: every non-tied generator is pinned to
  // its singleton response; tied generators take bound values except one
  // residual unit that absorbs the balance.
  const double total_demand = network.total_demand_mw();
  double pinned_total = 0.0;
  for (int g = 0; g < G; ++g)
    if (!responses[g].tied) pinned_total += combined.generation_mw[g];

  std::vector<std::vector<double>> selections;
  const int D = static_cast<int>(tied.size());
  for (int residual = 0; residual < D; ++residual) {
    const int others = D - 1;
    for (int mask = 0; mask < (1 << others); ++mask) {
      std::vector<double> pick(G);
      for (int g = 0; g < G; ++g)
        if (!responses[g].tied) pick[g] = combined.generation_mw[g];
      double chosen = 0.0;
      int bit = 0;
      for (int d = 0; d < D; ++d) {
        if (d == residual) continue;
        const int g = tied[d];
        pick[g] = (mask >> bit & 1) ? responses[g].hi : responses[g].lo;
        chosen += pick[g];
        ++bit;
      }
      const int gres = tied[residual];
      const double need = total_demand - pinned_total - chosen;
      if (need < responses[gres].lo - 1e-7 || need > responses[gres].hi + 1e-7)
        continue;
      pick[gres] = need;
      bool dup = false;
      for (const auto& other : selections) {
        double diff = 0.0;
        for (int g = 0; g < G; ++g) diff = std::max(diff, std::abs(other[g] - pick[g]));
        if (diff < 1e-7) dup = true;
      }
      if (!dup) selections.push_back(std::move(pick));
    }
  }

  for (const auto& pick : selections) {
    auto induced = induce_flows(network, pick, tol);
    if (!induced) continue;
    ++report.selections_checked;
    if (!induced->within_limits) {
      ++report.selections_infeasible;
      continue;  // reported, not judged
    }
    // Transmission side of the equilibrium: a line with a nonzero
    // congestion rent must run at the corresponding limit.
    bool rent_consistent = true;
    for (int l = 0; l < network.num_lines(); ++l) {
      const double cap = network.lines()[l].f_max_mw;
      const double slack_tol = tol * (1.0 + cap);
      if (combined.rho_plus[l] < -tol && induced->flow_mw[l] < cap - slack_tol)
        rent_consistent = false;
      if (combined.rho_minus[l] > tol && induced->flow_mw[l] > -cap + slack_tol)
        rent_consistent = false;
    }
    if (!rent_consistent) {
      ++report.selections_inconsistent;
      continue;  // reported, not judged
    }
    double cost = 0.0, emis = 0.0;
    for (int g = 0; g < G; ++g) {
      cost += network.generators()[g].cost_per_mwh * pick[g];
      emis += network.generators()[g].emission_rate * pick[g];
    }
    if (std::abs(cost - combined.dispatch_cost) >
        tol * (1.0 + std::abs(combined.dispatch_cost)))
      report.selection_mismatches.push_back(
          {"selection cost deviates from central dispatch",
           cost - combined.dispatch_cost});
    if (std::abs(emis - combined.total_emissions) >
        tol * (1.0 + std::abs(combined.total_emissions)))
      report.selection_mismatches.push_back(
          {"selection emissions deviate from central dispatch",
           emis - combined.total_emissions});
  }
  return report;
}

double footprint_residual(const Network& network, const CombinedResult& combined) {
  CarbonLedger led = build_ledger(network, combined);
  return led.footprint_residual / (1.0 + std::abs(led.total_emissions));
}

}  // namespace lmegrid
