#include "icd/analysis.hpp"

#include <algorithm>
#include <cmath>

namespace icd {

AnalysisContext make_analysis_context(const ExperimentTrace& trace) {
    Problem problem = Problem::realize(trace.config());
    OracleSolution oracle = solve_closed_form(problem.base_objectives, problem.set);

    BoundConstants c;
    c.Lbar = problem.objectives.grad_bound_sum();
    c.Nbar = problem.objectives.lipschitz_sum();
    c.nu = trace.nu();
    c.initial_max_pairwise = trace.initial_max_pairwise();
    c.M_window = trace.cycles().empty() ? 0.0 : trace.cycles().front().slc_window;
    c.Mbar_window = 0.0;
    for (const auto& agg : trace.cycles()) c.Mbar_window = std::max(c.Mbar_window, agg.buc_window);
    const double ml = c.Mbar_window * c.Lbar;
    c.c2sq = 4.0 * ml * ml;
    c.c3sq = 2.0 * c.Mbar_window * c.Mbar_window * c.Nbar * c.Lbar;
    c.c4 = c.Mbar_window * (2.0 * c.Lbar + c.Nbar);
    return AnalysisContext{std::move(problem), std::move(oracle), c};
}

CycleMetrics compute_cycle_metrics(const ExperimentTrace& trace, const AnalysisContext& ctx,
                                   long k, const Vec& y) {
    CycleMetrics m;
    m.xbar = trace.boundary_average(k);
    m.delta.reserve(static_cast<std::size_t>(trace.servers()));
    for (int J = 0; J < trace.servers(); ++J) {
        Vec d = trace.boundary(k, J) - m.xbar;
        m.max_delta = std::max(m.max_delta, d.norm());
        m.eta_sq += (trace.boundary(k, J) - y).squaredNorm();
        m.delta.push_back(std::move(d));
    }
    m.max_pairwise = trace.max_pairwise(k);
    m.f_gap = ctx.base_objectives().evaluate_sum(m.xbar) - ctx.oracle.fstar;
    return m;
}

namespace {

double bound_from_sum(const AnalysisContext& ctx, long k, double geometric_sum) {
    const auto& c = ctx.constants;
    const double S = static_cast<double>(ctx.problem.consensus.front().B.rows());
    return (S - 1.0) / S *
           (std::pow(c.nu, static_cast<double>(k + 1)) * c.initial_max_pairwise +
            4.0 * c.Mbar_window * c.Lbar * geometric_sum);
}

}  // namespace

double disagreement_bound(const ExperimentTrace& trace, const AnalysisContext& ctx, long k) {
    if (!(ctx.constants.nu < 1.0))
        throw NotScrambling("disagreement bound requires a scrambling consensus matrix (nu < 1)");
    double g = 0.0;  // sum_{i=1..k} alpha_i nu^(k-i+1)
    for (long i = 1; i <= k; ++i)
        g = ctx.constants.nu * (g + trace.cycles()[static_cast<std::size_t>(i - 1)].alpha);
    return bound_from_sum(ctx, k, g);
}

std::vector<double> disagreement_bounds(const ExperimentTrace& trace, const AnalysisContext& ctx) {
    if (!(ctx.constants.nu < 1.0))
        throw NotScrambling("disagreement bound requires a scrambling consensus matrix (nu < 1)");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(trace.nsteps()));
    double g = 0.0;
    for (long k = 0; k < trace.nsteps(); ++k) {
        out.push_back(bound_from_sum(ctx, k, g));
        g = ctx.constants.nu * (g + trace.cycles()[static_cast<std::size_t>(k)].alpha);
    }
    return out;
}

double consensus_nonexpansive_residual(const ExperimentTrace& trace, long c, const Vec& y) {
    double pre = 0.0, post = 0.0;
    for (int J = 0; J < trace.servers(); ++J) {
        pre += (trace.pre_consensus(c, J) - y).squaredNorm();
        post += (trace.boundary(c, J) - y).squaredNorm();
    }
    return pre - post;
}

double cycle_inequality_residual(const ExperimentTrace& trace, const AnalysisContext& ctx, long c,
                                 const Vec& y) {
    const auto& agg = trace.cycles()[static_cast<std::size_t>(c - 1)];
    const double S = static_cast<double>(trace.servers());
    const double alpha = agg.alpha;
    const double Lbar = ctx.constants.Lbar;
    const double Nbar = ctx.constants.Nbar;
    // Realized window aggregates of the cycle that was actually applied.
    const double M = agg.slc_window;
    const double Mbar = agg.buc_window;

    double eta_prev = 0.0, eta_next = 0.0, max_delta = 0.0;
    const Vec xbar_prev = trace.boundary_average(c - 1);
    for (int J = 0; J < trace.servers(); ++J) {
        eta_prev += (trace.boundary(c - 1, J) - y).squaredNorm();
        eta_next += (trace.boundary(c, J) - y).squaredNorm();
        max_delta = std::max(max_delta, (trace.boundary(c - 1, J) - xbar_prev).norm());
    }

    const double gamma =
        (2.0 * alpha * alpha * Mbar * Mbar * Nbar * Lbar + alpha * Mbar * Nbar * max_delta) / S;
    const double ml = Mbar * Lbar;
    const double c2sq = 4.0 * ml * ml;
    const double c3sq = 2.0 * Mbar * Mbar * Nbar * Lbar;
    const double c4 = Mbar * (2.0 * Lbar + Nbar);
    const double f_term = ctx.base_objectives().evaluate_sum(xbar_prev) -
                          ctx.base_objectives().evaluate_sum(y);

    const double rhs = (1.0 + gamma) * eta_prev - 2.0 * alpha * M * f_term +
                       alpha * alpha * (agg.c1sq_abs + c2sq + c3sq) + alpha * c4 * max_delta;
    return rhs - eta_next;
}

double complete_graph_residual(const ExperimentTrace& trace, const AnalysisContext& ctx, long c,
                               const Vec& y) {
    const RunMode mode = trace.config().mode;
    if (mode == RunMode::General)
        throw ModeMismatch("complete-graph residuals require a complete-graph mode trace");

    const auto& agg = trace.cycles()[static_cast<std::size_t>(c - 1)];
    const double S = static_cast<double>(trace.servers());
    const double alpha = agg.alpha;
    const double M = agg.slc_window;
    const Vec x_prev = trace.boundary(c - 1, 0);
    const Vec x_next = trace.boundary(c, 0);
    const double f_term =
        ctx.base_objectives().evaluate_sum(x_prev) - ctx.base_objectives().evaluate_sum(y);
    const double prev_sq = (x_prev - y).squaredNorm();
    const double next_sq = (x_next - y).squaredNorm();

    double rhs;
    if (mode == RunMode::CompleteGraphNonnegW) {
        rhs = prev_sq - 2.0 * (M / S) * alpha * f_term + alpha * alpha * agg.c0sq_nonneg / S;
    } else {
        const double Mbar = agg.buc_window;
        const double Lbar = ctx.constants.Lbar;
        const double Nbar = ctx.constants.Nbar;
        const double C = static_cast<double>(ctx.problem.engine_clients);
        const double delta = static_cast<double>(trace.delta());
        const double F = Nbar + 4.0 * C * delta * Lbar;
        const double ml = Mbar * Lbar;
        const double c0sq = agg.c1sq_abs + 8.0 * delta * ml * ml +
                            2.0 * alpha * (Mbar * Nbar + C * delta * (4.0 * ml) * (4.0 * ml)) +
                            Mbar * F;
        rhs = (1.0 + alpha * alpha * Mbar * F / S) * prev_sq - 2.0 * (alpha * M / S) * f_term +
              alpha * alpha * c0sq / S;
    }
    return rhs - next_sq;
}

ConvergenceSummary convergence_summary(const ExperimentTrace& trace, const AnalysisContext& ctx,
                                       double tol) {
    ConvergenceSummary s;
    s.tol = tol;
    for (long k = 0; k <= trace.nsteps(); ++k) {
        if ((trace.boundary_average(k) - ctx.oracle.xstar).norm() <= tol) {
            s.cycles_to_tol = k;
            break;
        }
    }
    const long N = trace.nsteps();
    const Vec xbar = trace.boundary_average(N);
    s.final_gap = (xbar - ctx.oracle.xstar).norm();
    s.final_max_pairwise = trace.max_pairwise(N);
    for (int J = 0; J < trace.servers(); ++J)
        s.final_eta_sq += (trace.boundary(N, J) - ctx.oracle.xstar).squaredNorm();
    s.final_f_gap = ctx.base_objectives().evaluate_sum(xbar) - ctx.oracle.fstar;
    return s;
}

BoundCheckReport check_all_bounds(const ExperimentTrace& trace, const AnalysisContext& ctx) {
    BoundCheckReport report;
    const Vec& y = ctx.oracle.xstar;
    const long N = trace.nsteps();
    const RunMode mode = trace.config().mode;
    const bool coordinate_wise =
        trace.config().weights.mode == WeightMode::CoordinateWiseConstant;

    report.consensus_nonexpansive.enabled = true;
    for (long c = 1; c <= N; ++c) {
        const double r = consensus_nonexpansive_residual(trace, c, y);
        ++report.consensus_nonexpansive.cycles_checked;
        report.consensus_nonexpansive.worst_margin =
            std::min(report.consensus_nonexpansive.worst_margin, r);
        if (r < -1e-9) ++report.consensus_nonexpansive.violations;
    }

    // The general inequality's constants assume one weight per gradient
    // vector; coordinate-wise runs are excluded.
    if (!coordinate_wise) {
        report.cycle_inequality.enabled = true;
        for (long c = 1; c <= N; ++c) {
            const double r = cycle_inequality_residual(trace, ctx, c, y);
            ++report.cycle_inequality.cycles_checked;
            report.cycle_inequality.worst_margin =
                std::min(report.cycle_inequality.worst_margin, r);
            if (r < -1e-6) ++report.cycle_inequality.violations;
        }
    }

    // Disagreement bound: scrambling consensus only; the k = 0 instance has
    // an empty step-size sum and cannot cover the first cycle's divergence,
    // so checking starts at k = 1.
    if (mode == RunMode::General && ctx.constants.nu < 1.0) {
        report.disagreement.enabled = true;
        const auto bounds = disagreement_bounds(trace, ctx);
        for (long k = 1; k < N; ++k) {
            const Vec xbar = trace.boundary_average(k + 1);
            double observed = 0.0;
            for (int J = 0; J < trace.servers(); ++J)
                observed = std::max(observed, (trace.boundary(k + 1, J) - xbar).norm());
            const double margin = bounds[static_cast<std::size_t>(k)] - observed;
            ++report.disagreement.cycles_checked;
            report.disagreement.worst_margin = std::min(report.disagreement.worst_margin, margin);
            if (margin < -1e-9) ++report.disagreement.violations;
        }
    }

    if (mode != RunMode::General) {
        report.complete_graph.enabled = true;
        for (long c = 1; c <= N; ++c) {
            const double r = complete_graph_residual(trace, ctx, c, y);
            ++report.complete_graph.cycles_checked;
            report.complete_graph.worst_margin = std::min(report.complete_graph.worst_margin, r);
            if (r < -1e-6) ++report.complete_graph.violations;
        }
    }

    return report;
}

}  // namespace icd
