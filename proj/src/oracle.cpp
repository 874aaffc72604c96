#include "icd/oracle.hpp"

namespace icd {

OracleSolution solve_closed_form(const ObjectiveSet& objectives, const BoxSet& set) {
    double total = 0.0;
    Vec weighted = Vec::Zero(set.dim());
    for (const auto& f : objectives.all()) {
        total += f.scale();
        weighted += f.scale() * f.center();
    }
    Vec xstar = project(weighted / total, set);
    return OracleSolution{xstar, objectives.evaluate_sum(xstar), OracleSolution::Method::ClosedForm};
}

std::vector<Vec> centralized_pgd_trajectory(const ObjectiveSet& objectives, const BoxSet& set,
                                            long steps, const StepSizeSpec& schedule,
                                            const Vec& start) {
    schedule.validate(steps);
    std::vector<Vec> out;
    out.reserve(static_cast<std::size_t>(steps));
    Vec x = project(start, set);
    for (long t = 1; t <= steps; ++t) {
        x = project(x - schedule.alpha(t) * objectives.gradient_sum(x), set);
        out.push_back(x);
    }
    return out;
}

OracleSolution solve_centralized_pgd(const ObjectiveSet& objectives, const BoxSet& set,
                                     long steps, const StepSizeSpec& schedule) {
    const auto traj = centralized_pgd_trajectory(objectives, set, steps, schedule,
                                                 Vec::Zero(set.dim()));
    const Vec& xstar = traj.back();
    return OracleSolution{xstar, objectives.evaluate_sum(xstar),
                          OracleSolution::Method::CentralizedPgd};
}

OracleSolution solve_grid(const ObjectiveSet& objectives, const BoxSet& set, int points_per_dim) {
    if (points_per_dim < 2) throw ConfigError("solve_grid: at least two points per dimension");
    const int D = set.dim();
    Vec best;
    double best_val = 0.0;
    std::vector<int> idx(static_cast<std::size_t>(D), 0);
    Vec x(D);
    bool first = true;
    while (true) {
        for (int p = 0; p < D; ++p) {
            const double t = static_cast<double>(idx[static_cast<std::size_t>(p)]) /
                             static_cast<double>(points_per_dim - 1);
            x[p] = set.lower()[p] + t * (set.upper()[p] - set.lower()[p]);
        }
        const double v = objectives.evaluate_sum(x);
        if (first || v < best_val) {
            best = x;
            best_val = v;
            first = false;
        }
        int p = 0;
        while (p < D && ++idx[static_cast<std::size_t>(p)] == points_per_dim) {
            idx[static_cast<std::size_t>(p)] = 0;
            ++p;
        }
        if (p == D) break;
    }
    return OracleSolution{best, best_val, OracleSolution::Method::Grid};
}

}  // namespace icd
