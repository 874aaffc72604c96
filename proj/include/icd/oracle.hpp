#pragma once

#include "icd/engine.hpp"
#include "icd/objectives.hpp"

#include <vector>

namespace icd {

// Independent ground truth for the summed problem, used by acceptance tests.
struct OracleSolution {
    enum class Method { ClosedForm, CentralizedPgd, Grid };
    Vec xstar;
    double fstar = 0.0;
    Method method = Method::ClosedForm;
};

// Sum of isotropic quadratics: the unconstrained minimizer is the
// scale-weighted centroid of the centers; the box projection of it is the
// constrained minimizer (the sum is separable per coordinate).
OracleSolution solve_closed_form(const ObjectiveSet& objectives, const BoxSet& set);

// Plain projected gradient descent on the sum, x <- P[x - alpha_t * g(x)],
// one schedule step per iteration.
OracleSolution solve_centralized_pgd(const ObjectiveSet& objectives, const BoxSet& set,
                                     long steps, const StepSizeSpec& schedule);

// The full iterate sequence of the same recursion (x_1 .. x_steps).
std::vector<Vec> centralized_pgd_trajectory(const ObjectiveSet& objectives, const BoxSet& set,
                                            long steps, const StepSizeSpec& schedule,
                                            const Vec& start);

// Brute-force scan over a uniform grid (test oracle; exponential in D).
OracleSolution solve_grid(const ObjectiveSet& objectives, const BoxSet& set, int points_per_dim);

}  // namespace icd
