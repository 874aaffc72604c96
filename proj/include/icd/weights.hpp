#pragma once

#include "icd/domain.hpp"
#include "icd/rng.hpp"

#include <utility>
#include <vector>

namespace icd {

// One cycle's gradient weights. `steps[i]` is the S x C matrix applied at
// descent step i+1; in coordinate-wise form `coord_steps[i][p]` holds the
// matrix for coordinate p and `steps` is left empty.
struct CycleWeights {
    std::vector<Mat> steps;
    std::vector<std::vector<Mat>> coord_steps;

    bool coordinate_wise() const { return !coord_steps.empty(); }
    int delta() const {
        return static_cast<int>(coordinate_wise() ? coord_steps.size() : steps.size());
    }
    int servers() const;
    int clients() const;
};

struct UnequalColumnSums : ConfigError {
    explicit UnequalColumnSums(std::string msg, std::vector<int> clients)
        : ConfigError(std::move(msg)), offending_clients(std::move(clients)) {}
    std::vector<int> offending_clients;
};

struct NonPositiveM : ConfigError {
    using ConfigError::ConfigError;
};

struct InfeasibleBudget : ConfigError {
    using ConfigError::ConfigError;
};

struct EmptyAssignment : ConfigError {
    using ConfigError::ConfigError;
};

// Column-sum aggregates over one cycle. `window` is the sum over the whole
// Δ-window (the symmetric-learning / bounded-update definitions); `per_step`
// is window / Δ, which matches the constants quoted for constant per-step
// schedules.
struct WindowAggregate {
    double window = 0.0;
    double per_step = 0.0;
};

// Symmetric learning condition: every client's weights, summed over servers
// and over the Δ-window, must equal the same constant M > 0. Coordinate-wise
// schedules must satisfy this for every coordinate with one common M.
// Throws UnequalColumnSums / NonPositiveM.
WindowAggregate validate_slc(const CycleWeights& cycle, double tol = 1e-9);

// Bounded update condition measurement: the largest per-client column sum of
// absolute weights over the Δ-window (max over coordinates when
// coordinate-wise). Pure measurement; callers compare against their budget.
WindowAggregate validate_buc(const CycleWeights& cycle);

// Random signed schedule: entries ~ U[-Γ, Γ] with Γ = M̄/(2ΔS); the final
// entry of each column closes the window sum to exactly M, and columns whose
// absolute sum exceeds M̄ are redrawn. M and M̄ are window-convention values.
CycleWeights generate_random_signed(int servers, int clients, int delta, double M, double Mbar,
                                    Rng& rng);

// Coordinate-wise variant: independent draws per coordinate, common M.
CycleWeights generate_random_signed_coordinate_wise(int servers, int clients, int delta, int dim,
                                                    double M, double Mbar, Rng& rng);

// Function-partitioning schedule over virtual clients. `assignment[h]` lists
// the servers that receive a partition of client h; each partition becomes a
// virtual client whose column carries a single 1 on its server, constant
// across steps. Window SLC then holds with M = Δ.
struct PartitionPlan {
    CycleWeights schedule;                    // S x (number of partitions)
    std::vector<std::pair<int, int>> parts;   // virtual column -> (client, server)
    std::vector<double> fraction;             // share of the client objective (equal split)
};

PartitionPlan generate_partition(int servers, int clients, int delta,
                                 const std::vector<std::vector<int>>& assignment);

// Replacement uploads for a client whose true gradient is the zero vector:
// nonzero per-server vectors with norms <= bound whose left-fold sum is
// exactly zero (pairs (r, -r); odd server counts add one (a, a, -2a) group).
// A single server degenerates to the zero vector.
std::vector<Vec> mask_zero_gradient(int servers, int dim, double bound, Rng& rng);

}  // namespace icd
