#pragma once

#include "icd/engine.hpp"
#include "icd/oracle.hpp"

#include <optional>
#include <vector>

namespace icd {

struct NotScrambling : ConfigError {
    using ConfigError::ConfigError;
};

struct ModeMismatch : ConfigError {
    using ConfigError::ConfigError;
};

// Per-boundary derived quantities (boundary k = state {0,k}).
struct CycleMetrics {
    Vec xbar;
    std::vector<Vec> delta;  // per-server offset from the average
    double max_delta = 0.0;
    double eta_sq = 0.0;     // sum_J ||x^J - y||^2
    double f_gap = 0.0;      // f(xbar) - f*
    double max_pairwise = 0.0;
};

// Constants entering the per-cycle inequalities. Window-convention
// aggregates; M-bar is the largest realized window absolute column sum.
struct BoundConstants {
    double M_window = 0.0;
    double Mbar_window = 0.0;
    double Lbar = 0.0;
    double Nbar = 0.0;
    double nu = 1.0;
    double initial_max_pairwise = 0.0;
    double c2sq = 0.0;  // 4 (M-bar L-bar)^2
    double c3sq = 0.0;  // 2 M-bar^2 N-bar L-bar
    double c4 = 0.0;    // M-bar (2 L-bar + N-bar)
};

// Everything the evaluators need alongside a trace. `objectives` is the
// engine's client view (virtual clients in partition mode) and drives the
// inequality constants; `base_objectives` is the configured client set and
// drives f and the oracle.
struct AnalysisContext {
    Problem problem;
    OracleSolution oracle;
    BoundConstants constants;

    const ObjectiveSet& objectives() const { return problem.objectives; }
    const ObjectiveSet& base_objectives() const { return problem.base_objectives; }
};

AnalysisContext make_analysis_context(const ExperimentTrace& trace);

CycleMetrics compute_cycle_metrics(const ExperimentTrace& trace, const AnalysisContext& ctx,
                                   long k, const Vec& y);

// Consensus-contraction bound on the next boundary's worst disagreement:
//   (S-1)/S * ( nu^(k+1) * initial_max_pairwise
//               + 4 Mbar Lbar * sum_{i=1..k} alpha_i nu^(k-i+1) ).
// Requires nu < 1.
double disagreement_bound(const ExperimentTrace& trace, const AnalysisContext& ctx, long k);

// The same bound for every k = 0..nsteps-1 in one pass (the geometric sum
// satisfies G_k = nu (G_{k-1} + alpha_k)).
std::vector<double> disagreement_bounds(const ExperimentTrace& trace, const AnalysisContext& ctx);

// Consensus non-expansiveness residual for cycle c:
//   sum_J ||x^J_{pre} - y||^2 - sum_J ||x^J_{post} - y||^2, asserted >= -1e-9.
double consensus_nonexpansive_residual(const ExperimentTrace& trace, long c, const Vec& y);

// General-mode per-cycle inequality residual (RHS - LHS) for cycle c:
//   eta_next^2 <= (1+gamma) eta_prev^2 - 2 alpha M (f(xbar_prev) - f(y))
//                 + alpha^2 (C1^2 + C2^2 + C3^2) + alpha C4 max_delta_prev.
double cycle_inequality_residual(const ExperimentTrace& trace, const AnalysisContext& ctx, long c,
                                 const Vec& y);

// Complete-graph per-cycle inequality residual (RHS - LHS) for cycle c, in
// the trace's own mode (nonnegative-weights or signed-weights variant).
// Throws ModeMismatch for general-mode traces.
double complete_graph_residual(const ExperimentTrace& trace, const AnalysisContext& ctx, long c,
                               const Vec& y);

struct ConvergenceSummary {
    std::optional<long> cycles_to_tol;
    double tol = 0.0;
    double final_gap = 0.0;           // ||xbar_N - x*||
    double final_max_pairwise = 0.0;
    double final_eta_sq = 0.0;        // y = x*
    double final_f_gap = 0.0;
};

ConvergenceSummary convergence_summary(const ExperimentTrace& trace, const AnalysisContext& ctx,
                                       double tol);

// One inequality family's outcome over a whole trace.
struct CheckOutcome {
    bool enabled = false;
    long cycles_checked = 0;
    long violations = 0;
    double worst_margin = 0.0;  // most negative residual (or bound - observed)

    bool passed() const { return !enabled || violations == 0; }
};

struct BoundCheckReport {
    CheckOutcome consensus_nonexpansive;  // tolerance -1e-9
    CheckOutcome cycle_inequality;        // tolerance -1e-6, y = x*
    CheckOutcome disagreement;            // tolerance 1e-9, k >= 1, scrambling only
    CheckOutcome complete_graph;          // tolerance -1e-6, appendix modes

    bool all_passed() const {
        return consensus_nonexpansive.passed() && cycle_inequality.passed() &&
               disagreement.passed() && complete_graph.passed();
    }
};

BoundCheckReport check_all_bounds(const ExperimentTrace& trace, const AnalysisContext& ctx);

}  // namespace icd
