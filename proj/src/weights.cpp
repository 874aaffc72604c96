#include "icd/weights.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace icd {

namespace {

const Mat& first_matrix(const CycleWeights& cycle) {
    return cycle.coordinate_wise() ? cycle.coord_steps.front().front() : cycle.steps.front();
}

void check_shape(const CycleWeights& cycle) {
    if (cycle.delta() < 1) throw ConfigError("weight schedule: at least one step required");
    const auto rows = first_matrix(cycle).rows();
    const auto cols = first_matrix(cycle).cols();
    auto check = [&](const Mat& m) {
        if (m.rows() != rows || m.cols() != cols)
            throw ConfigError("weight schedule: inconsistent matrix shapes");
        if (!all_finite(m)) throw ConfigError("weight schedule: entries must be finite");
    };
    if (cycle.coordinate_wise()) {
        const std::size_t dim = cycle.coord_steps.front().size();
        for (const auto& step : cycle.coord_steps) {
            if (step.size() != dim)
                throw ConfigError("weight schedule: inconsistent coordinate counts");
            for (const auto& m : step) check(m);
        }
    } else {
        for (const auto& m : cycle.steps) check(m);
    }
}

// Window column sums for one coordinate slice; `absolute` switches between
// the signed (SLC) and absolute (BUC) aggregates.
Vec window_column_sums(const CycleWeights& cycle, int coord, bool absolute) {
    const int C = cycle.clients();
    Vec sums = Vec::Zero(C);
    const int delta = cycle.delta();
    for (int i = 0; i < delta; ++i) {
        const Mat& m = cycle.coordinate_wise() ? cycle.coord_steps[i][coord] : cycle.steps[i];
        for (int h = 0; h < C; ++h)
            sums[h] += absolute ? m.col(h).cwiseAbs().sum() : m.col(h).sum();
    }
    return sums;
}

}  // namespace

int CycleWeights::servers() const { return static_cast<int>(first_matrix(*this).rows()); }
int CycleWeights::clients() const { return static_cast<int>(first_matrix(*this).cols()); }

WindowAggregate validate_slc(const CycleWeights& cycle, double tol) {
    check_shape(cycle);
    const int coords = cycle.coordinate_wise() ? static_cast<int>(cycle.coord_steps.front().size()) : 1;
    const int C = cycle.clients();

    double M = 0.0;
    bool have_reference = false;
    std::vector<int> offenders;
    for (int p = 0; p < coords; ++p) {
        const Vec sums = window_column_sums(cycle, p, /*absolute=*/false);
        for (int h = 0; h < C; ++h) {
            if (!have_reference) {
                M = sums[h];
                have_reference = true;
            } else if (std::abs(sums[h] - M) > tol) {
                offenders.push_back(h);
            }
        }
    }
    if (!offenders.empty()) {
        std::sort(offenders.begin(), offenders.end());
        offenders.erase(std::unique(offenders.begin(), offenders.end()), offenders.end());
        std::string msg = "symmetric learning condition violated: unequal window column sums for clients";
        for (int h : offenders) msg += " " + std::to_string(h);
        throw UnequalColumnSums(msg, offenders);
    }
    if (!(M > tol))
        throw NonPositiveM("symmetric learning condition violated: window column sum M = " +
                           std::to_string(M) + " must be positive");
    return WindowAggregate{M, M / cycle.delta()};
}

WindowAggregate validate_buc(const CycleWeights& cycle) {
    check_shape(cycle);
    const int coords = cycle.coordinate_wise() ? static_cast<int>(cycle.coord_steps.front().size()) : 1;
    double worst = 0.0;
    for (int p = 0; p < coords; ++p) {
        const Vec sums = window_column_sums(cycle, p, /*absolute=*/true);
        worst = std::max(worst, sums.maxCoeff());
    }
    return WindowAggregate{worst, worst / cycle.delta()};
}

namespace {

// Fills column h of a Δ-stack of S x C matrices: ΔS - 1 free draws plus a
// closing entry, redrawn until the absolute column sum fits the budget.
void draw_column(std::vector<Mat>& steps, int h, int servers, int delta, double M, double Mbar,
                 double gamma, Rng& rng) {
    constexpr int kMaxAttempts = 100000;
    const int n = delta * servers;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        double sum = 0.0, abs_sum = 0.0;
        for (int idx = 0; idx < n - 1; ++idx) {
            const double w = rng.uniform(-gamma, gamma);
            steps[idx / servers](idx % servers, h) = w;
            sum += w;
            abs_sum += std::abs(w);
        }
        const double closer = M - sum;
        steps[(n - 1) / servers]((n - 1) % servers, h) = closer;
        if (abs_sum + std::abs(closer) <= Mbar) return;
    }
    throw InfeasibleBudget(
        "bounded update condition budget " + std::to_string(Mbar) +
        " could not be met while closing column sums to " + std::to_string(M));
}

}  // namespace

CycleWeights generate_random_signed(int servers, int clients, int delta, double M, double Mbar,
                                    Rng& rng) {
    if (servers < 1 || clients < 1 || delta < 1)
        throw ConfigError("generate_random_signed: servers, clients and delta must be >= 1");
    if (!(M > 0.0)) throw NonPositiveM("generate_random_signed: M must be positive");
    if (Mbar < M)
        throw InfeasibleBudget("generate_random_signed: absolute sums can never be below the net "
                               "sum (Mbar < M)");
    CycleWeights cycle;
    cycle.steps.assign(delta, Mat::Zero(servers, clients));
    const double gamma = Mbar / (2.0 * delta * servers);
    for (int h = 0; h < clients; ++h) draw_column(cycle.steps, h, servers, delta, M, Mbar, gamma, rng);
    return cycle;
}

CycleWeights generate_random_signed_coordinate_wise(int servers, int clients, int delta, int dim,
                                                    double M, double Mbar, Rng& rng) {
    if (dim < 1) throw ConfigError("generate_random_signed_coordinate_wise: dim must be >= 1");
    CycleWeights cycle;
    cycle.coord_steps.assign(delta, std::vector<Mat>(dim, Mat::Zero(servers, clients)));
    for (int p = 0; p < dim; ++p) {
        CycleWeights slice = generate_random_signed(servers, clients, delta, M, Mbar, rng);
        for (int i = 0; i < delta; ++i) cycle.coord_steps[i][p] = std::move(slice.steps[i]);
    }
    return cycle;
}

PartitionPlan generate_partition(int servers, int clients, int delta,
                                 const std::vector<std::vector<int>>& assignment) {
    if (servers < 1 || clients < 1 || delta < 1)
        throw ConfigError("generate_partition: servers, clients and delta must be >= 1");
    if (static_cast<int>(assignment.size()) != clients)
        throw ConfigError("generate_partition: one assignment entry per client required");

    PartitionPlan plan;
    std::vector<bool> server_used(servers, false);
    for (int h = 0; h < clients; ++h) {
        if (assignment[h].empty())
            throw EmptyAssignment("generate_partition: client " + std::to_string(h) +
                                  " is assigned to no server");
        for (int J : assignment[h]) {
            if (J < 0 || J >= servers)
                throw ConfigError("generate_partition: server index " + std::to_string(J) +
                                  " out of range for client " + std::to_string(h));
            plan.parts.emplace_back(h, J);
            plan.fraction.push_back(1.0 / static_cast<double>(assignment[h].size()));
            server_used[J] = true;
        }
    }
    for (int J = 0; J < servers; ++J) {
        if (!server_used[J])
            throw EmptyAssignment("generate_partition: server " + std::to_string(J) +
                                  " receives no partition");
    }

    const int virtual_clients = static_cast<int>(plan.parts.size());
    Mat step = Mat::Zero(servers, virtual_clients);
    for (int v = 0; v < virtual_clients; ++v) step(plan.parts[v].second, v) = 1.0;
    plan.schedule.steps.assign(delta, step);
    return plan;
}

std::vector<Vec> mask_zero_gradient(int servers, int dim, double bound, Rng& rng) {
    if (servers < 1) throw ConfigError("mask_zero_gradient: servers must be >= 1");
    if (!(bound > 0.0)) throw ConfigError("mask_zero_gradient: bound must be positive");
    std::vector<Vec> uploads(servers, Vec::Zero(dim));
    if (servers == 1) return uploads;  // no nonzero decomposition sums to zero over one server

    auto draw_nonzero = [&](double radius) {
        Vec v(dim);
        do {
            for (int p = 0; p < dim; ++p) v[p] = rng.uniform(-1.0, 1.0);
        } while (v.norm() == 0.0);
        v *= radius / std::max(1.0, v.norm());
        return v;
    };

    int J = 0;
    if (servers % 2 == 1) {
        // (a, a, -2a): a + a doubles exactly, so the group folds to zero.
        const Vec a = draw_nonzero(bound / 2.0);
        uploads[0] = a;
        uploads[1] = a;
        uploads[2] = -2.0 * a;
        J = 3;
    }
    for (; J < servers; J += 2) {
        const Vec r = draw_nonzero(bound);
        uploads[J] = r;
        uploads[J + 1] = -r;
    }
    return uploads;
}

}  // namespace icd
