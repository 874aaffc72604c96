#pragma once

#include "icd/domain.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace icd {

// Client cost f(x) = scale * ||x - center||^2. Convex for scale > 0; the
// gradient 2*scale*(x - center) is Lipschitz with constant 2*scale.
class QuadraticObjective {
public:
    QuadraticObjective(double scale, Vec center);

    double value(const Vec& x) const;
    Vec gradient(const Vec& x) const;

    double scale() const { return scale_; }
    const Vec& center() const { return center_; }
    int dim() const { return static_cast<int>(center_.size()); }
    double lipschitz() const { return 2.0 * scale_; }

private:
    double scale_;
    Vec center_;
};

// Gradient-norm bound over a box and the gradient Lipschitz constant,
// with aggregates over a client set.
struct ObjectiveBounds {
    double grad_bound = 0.0;  // L_h: sup of ||g|| over the box (exact for quadratics)
    double lipschitz = 0.0;   // N_h
};

// Exact sup of ||2a(x-c)|| over the box: attained at the corner farthest
// from the center, coordinate by coordinate.
ObjectiveBounds compute_bounds(const QuadraticObjective& f, const BoxSet& set);

class ObjectiveSet {
public:
    ObjectiveSet(std::vector<QuadraticObjective> objectives, const BoxSet& set,
                 const std::vector<std::optional<double>>& grad_bound_overrides = {});

    int count() const { return static_cast<int>(objectives_.size()); }
    int dim() const { return objectives_.front().dim(); }
    const QuadraticObjective& at(int h) const { return objectives_[h]; }
    const std::vector<QuadraticObjective>& all() const { return objectives_; }

    double grad_bound(int h) const { return bounds_[h].grad_bound; }
    double lipschitz(int h) const { return bounds_[h].lipschitz; }
    double grad_bound_sum() const { return grad_bound_sum_; }  // L-bar
    double lipschitz_sum() const { return lipschitz_sum_; }    // N-bar

    double evaluate_sum(const Vec& x) const;
    Vec gradient_sum(const Vec& x) const;

private:
    std::vector<QuadraticObjective> objectives_;
    std::vector<ObjectiveBounds> bounds_;
    double grad_bound_sum_ = 0.0;
    double lipschitz_sum_ = 0.0;
};

}  // namespace icd
