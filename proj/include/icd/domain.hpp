#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace icd {

// Decision vectors and per-server state collections. Dimension D is fixed
// per experiment; all coordinates must stay finite.
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericFault : std::runtime_error {
    using std::runtime_error::runtime_error;
};

bool all_finite(const Vec& v);
bool all_finite(const Mat& m);

// Axis-aligned box decision set with nonempty interior.
class BoxSet {
public:
    BoxSet(Vec lower, Vec upper);

    // Uniform scalar box [lo, hi]^dim.
    static BoxSet uniform(int dim, double lo, double hi);

    const Vec& lower() const { return lower_; }
    const Vec& upper() const { return upper_; }
    int dim() const { return static_cast<int>(lower_.size()); }

    bool contains(const Vec& v, double tol = 0.0) const;

private:
    Vec lower_;
    Vec upper_;
};

// Euclidean projection onto the box (coordinate-wise clamp).
Vec project(const Vec& v, const BoxSet& set);

double norm2(const Vec& v);

}  // namespace icd
