#pragma once

#include "icd/domain.hpp"
#include "icd/objectives.hpp"
#include "icd/topology.hpp"
#include "icd/weights.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace icd {

enum class RunMode { General, CompleteGraph, CompleteGraphNonnegW };

enum class WeightMode { Constant, RandomSigned, CoordinateWiseConstant, Partition, Explicit };

struct StepSizeSpec {
    enum class Kind { Harmonic, Custom };
    Kind kind = Kind::Harmonic;
    double offset = 1e-4;         // alpha_k = 1/(k + offset), k = 1, 2, ...
    std::vector<double> custom;   // custom[k-1] = alpha_k

    double alpha(long k) const;
    // Positivity and monotonicity; harmonic kinds additionally carry the
    // divergent-sum / finite-square-sum guarantees by construction.
    void validate(long nsteps) const;
};

struct WeightSpec {
    WeightMode mode = WeightMode::Constant;
    Mat constant;                              // Constant: per-step S x C matrix
    std::vector<Mat> constant_per_coord;       // CoordinateWiseConstant: D matrices
    double slc_window = 0.0;                   // RandomSigned: window M
    double buc_window = 0.0;                   // RandomSigned: window M-bar
    bool regenerate_each_cycle = false;        // RandomSigned: fresh draw per cycle
    std::vector<std::vector<int>> assignment;  // Partition: client -> servers
    std::vector<std::vector<Mat>> explicit_cycles;  // Explicit: [cycle][step], round-robin
};

struct TopologySpec {
    enum class Kind { Path, Cycle, Star, Complete, Custom, Explicit, TimeVarying };
    Kind kind = Kind::Path;
    double kappa = 0.2;
    int hub = 0;
    std::vector<std::pair<int, int>> edges;  // Custom
    Mat matrix;                              // Explicit
    std::vector<TopologySpec> sequence;      // TimeVarying, applied round-robin per cycle
};

struct LinkSpec {
    enum class Kind { All, Periodic };
    Kind kind = Kind::All;
    int period = 1;
    std::vector<std::vector<std::pair<int, int>>> links;  // per phase
};

struct ObjectiveSpec {
    double scale = 1.0;
    std::vector<double> center;
    std::optional<double> grad_bound;  // optional override; must dominate the computed sup
};

struct ExperimentConfig {
    std::string name = "experiment";
    int dimension = 1;
    int servers = 1;
    int clients = 1;
    int delta = 1;
    long nsteps = 1;
    std::uint64_t seed = 0;

    RunMode mode = RunMode::General;
    bool zero_grad_masking = false;
    double masking_bound = 1.0;

    std::vector<double> lower, upper;  // decision set box
    std::vector<ObjectiveSpec> objectives;
    StepSizeSpec step_size;
    WeightSpec weights;
    TopologySpec topology;
    LinkSpec links;

    std::vector<std::vector<double>> initial;  // per-server, empty -> zeros

    int record_steps = -1;   // -1 auto, 0 off, 1 on
    long emit_stride = 1;    // CSV row stride for metrics/bounds emission

    bool operator==(const ExperimentConfig&) const = default;
};

// Everything realized and validated from a config: objective set (with the
// partition-mode virtual expansion applied), decision set, consensus
// matrices, link schedule, and the weight provider.
struct Problem;

struct CycleAggregates {
    double alpha = 0.0;
    // sum_i sum_J (sum_h |W_i[J,h]| L_h)^2 over the cycle's applied weights
    double c1sq_abs = 0.0;
    // the nonnegative-schedule nested sum:
    // sum_J sum_i [ (sum_h W L)^2 + 2 (sum_h W L) * prefix_J(i-1) ]
    double c0sq_nonneg = 0.0;
    double slc_window = 0.0;  // realized window column sum
    double buc_window = 0.0;  // realized max absolute column sum
    int topology_index = 0;   // which consensus matrix this cycle applied
};

class ExperimentTrace {
public:
    ExperimentTrace(int servers, int dimension, int delta, long nsteps, bool record_steps);

    int servers() const { return servers_; }
    int dimension() const { return dimension_; }
    int delta() const { return delta_; }
    long nsteps() const { return nsteps_; }
    bool steps_recorded() const { return record_steps_; }

    // x^J at cycle boundary k, k = 0..nsteps (0 = initial)
    Eigen::Map<const Vec> boundary(long k, int server) const;
    // x^J after the cycle's descent steps, before consensus; k = 1..nsteps
    Eigen::Map<const Vec> pre_consensus(long k, int server) const;
    // x^J at step i (1..delta) of cycle k; requires steps_recorded()
    Eigen::Map<const Vec> step_state(long k, int i, int server) const;

    Vec boundary_average(long k) const;
    double max_pairwise(long k) const;

    const std::vector<CycleAggregates>& cycles() const { return cycles_; }
    const std::vector<ConsensusMatrix>& consensus_matrices() const { return consensus_; }
    const Mat& applied_consensus(long k) const;  // cycle k's matrix
    double nu() const { return nu_; }            // max Dobrushin over applied matrices
    double initial_max_pairwise() const { return initial_max_pairwise_; }

    // total recorded iterate snapshots: NSteps * delta descent states plus
    // NSteps consensus results (when step recording is on)
    long length() const;

    const ExperimentConfig& config() const { return config_; }

private:
    friend ExperimentTrace run(const ExperimentConfig& cfg);

    ExperimentConfig config_;

    int servers_;
    int dimension_;
    int delta_;
    long nsteps_;
    bool record_steps_;

    std::vector<double> boundaries_;      // (nsteps+1) * S * D
    std::vector<double> pre_consensus_;   // nsteps * S * D
    std::vector<double> steps_;           // nsteps * delta * S * D when recorded
    std::vector<CycleAggregates> cycles_;
    std::vector<ConsensusMatrix> consensus_;
    double nu_ = 0.0;
    double initial_max_pairwise_ = 0.0;
};

// One projected weighted-gradient step for all servers; gradients are
// evaluated at each server's own pre-step state.
std::vector<Vec> descent_step(const std::vector<Vec>& states, const Mat& weights, double alpha,
                              const ObjectiveSet& objectives, const BoxSet& set);

// Coordinate-wise variant: weights_per_coord[p] applies to coordinate p.
std::vector<Vec> descent_step_coordinate_wise(const std::vector<Vec>& states,
                                              const std::vector<Mat>& weights_per_coord,
                                              double alpha, const ObjectiveSet& objectives,
                                              const BoxSet& set);

// x^I <- sum_J B[I,J] x^J, applied per coordinate.
std::vector<Vec> consensus_step(const std::vector<Vec>& states, const Mat& B);

// Validates the config (all module validators) and runs the synchronous
// interleaved loop. Deterministic for a fixed config.
ExperimentTrace run(const ExperimentConfig& cfg);

// Realized problem pieces shared by run(), the validators and analysis.
struct Problem {
    BoxSet set;
    ObjectiveSet objectives;        // partition mode: the virtual expansion
    ObjectiveSet base_objectives;   // as configured
    std::vector<ConsensusMatrix> consensus;  // round-robin per cycle
    ClientLinkSchedule links;
    int engine_clients;             // columns of the applied weight matrices
    double nu_max;

    static Problem realize(const ExperimentConfig& cfg);
};

// Runs every validator without simulating; throws ConfigError on failure.
void validate_config(const ExperimentConfig& cfg);

}  // namespace icd
