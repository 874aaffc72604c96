#include "icd/objectives.hpp"

#include <cmath>

namespace icd {

QuadraticObjective::QuadraticObjective(double scale, Vec center)
    : scale_(scale), center_(std::move(center)) {
    if (!(scale_ > 0.0)) throw ConfigError("QuadraticObjective: scale must be positive");
    if (!all_finite(center_)) throw ConfigError("QuadraticObjective: center must be finite");
    if (center_.size() < 1) throw ConfigError("QuadraticObjective: dimension must be >= 1");
}

double QuadraticObjective::value(const Vec& x) const {
    if (x.size() != center_.size())
        throw ConfigError("QuadraticObjective::value: dimension mismatch");
    return scale_ * (x - center_).squaredNorm();
}

Vec QuadraticObjective::gradient(const Vec& x) const {
    if (x.size() != center_.size())
        throw ConfigError("QuadraticObjective::gradient: dimension mismatch");
    return 2.0 * scale_ * (x - center_);
}

ObjectiveBounds compute_bounds(const QuadraticObjective& f, const BoxSet& set) {
    if (set.dim() != f.dim()) throw ConfigError("compute_bounds: dimension mismatch");
    double sq = 0.0;
    for (int p = 0; p < set.dim(); ++p) {
        const double d = std::max(std::abs(set.lower()[p] - f.center()[p]),
                                  std::abs(set.upper()[p] - f.center()[p]));
        sq += d * d;
    }
    return ObjectiveBounds{2.0 * f.scale() * std::sqrt(sq), f.lipschitz()};
}

ObjectiveSet::ObjectiveSet(std::vector<QuadraticObjective> objectives, const BoxSet& set,
                           const std::vector<std::optional<double>>& grad_bound_overrides)
    : objectives_(std::move(objectives)) {
    if (objectives_.empty()) throw ConfigError("ObjectiveSet: objective list must not be empty");
    const int d = objectives_.front().dim();
    if (set.dim() != d) throw ConfigError("ObjectiveSet: decision set dimension mismatch");
    bounds_.reserve(objectives_.size());
    for (std::size_t h = 0; h < objectives_.size(); ++h) {
        if (objectives_[h].dim() != d)
            throw ConfigError("ObjectiveSet: objectives disagree on dimension");
        ObjectiveBounds b = compute_bounds(objectives_[h], set);
        if (h < grad_bound_overrides.size() && grad_bound_overrides[h].has_value()) {
            const double given = *grad_bound_overrides[h];
            // A configured bound below the computed sup is not a bound at all.
            if (given < b.grad_bound - 1e-12)
                throw ConfigError("ObjectiveSet: configured gradient bound " +
                                  std::to_string(given) + " for client " + std::to_string(h) +
                                  " is below the computed supremum " +
                                  std::to_string(b.grad_bound));
            b.grad_bound = given;
        }
        grad_bound_sum_ += b.grad_bound;
        lipschitz_sum_ += b.lipschitz;
        bounds_.push_back(b);
    }
}

double ObjectiveSet::evaluate_sum(const Vec& x) const {
    double s = 0.0;
    for (const auto& f : objectives_) s += f.value(x);
    return s;
}

Vec ObjectiveSet::gradient_sum(const Vec& x) const {
    Vec g = Vec::Zero(x.size());
    for (const auto& f : objectives_) g += f.gradient(x);
    return g;
}

}  // namespace icd
