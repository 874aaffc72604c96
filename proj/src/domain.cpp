#include "icd/domain.hpp"

namespace icd {

bool all_finite(const Vec& v) { return v.allFinite(); }
bool all_finite(const Mat& m) { return m.allFinite(); }

BoxSet::BoxSet(Vec lower, Vec upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.size() != upper_.size())
        throw ConfigError("BoxSet: lower/upper dimension mismatch");
    if (lower_.size() < 1) throw ConfigError("BoxSet: dimension must be >= 1");
    if (!all_finite(lower_) || !all_finite(upper_))
        throw ConfigError("BoxSet: bounds must be finite");
    for (int p = 0; p < lower_.size(); ++p) {
        if (!(lower_[p] < upper_[p]))
            throw ConfigError("BoxSet: lower[" + std::to_string(p) +
                              "] must be strictly below upper[" + std::to_string(p) + "]");
    }
}

BoxSet BoxSet::uniform(int dim, double lo, double hi) {
    return BoxSet(Vec::Constant(dim, lo), Vec::Constant(dim, hi));
}

bool BoxSet::contains(const Vec& v, double tol) const {
    if (v.size() != lower_.size()) return false;
    for (int p = 0; p < v.size(); ++p) {
        if (v[p] < lower_[p] - tol || v[p] > upper_[p] + tol) return false;
    }
    return true;
}

Vec project(const Vec& v, const BoxSet& set) {
    if (v.size() != set.dim())
        throw ConfigError("project: vector dimension " + std::to_string(v.size()) +
                          " does not match set dimension " + std::to_string(set.dim()));
    return v.cwiseMax(set.lower()).cwiseMin(set.upper());
}

double norm2(const Vec& v) { return v.norm(); }

}  // namespace icd
