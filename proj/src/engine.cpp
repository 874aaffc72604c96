#include "icd/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace icd {

double StepSizeSpec::alpha(long k) const {
    if (kind == Kind::Harmonic) return 1.0 / (static_cast<double>(k) + offset);
    return custom.at(static_cast<std::size_t>(k - 1));
}

void StepSizeSpec::validate(long nsteps) const {
    if (kind == Kind::Harmonic) {
        if (!(offset > -1.0))
            throw ConfigError("step size: harmonic offset must exceed -1 so alpha_1 > 0");
        return;
    }
    if (static_cast<long>(custom.size()) < nsteps)
        throw ConfigError("step size: custom schedule shorter than the cycle count");
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < custom.size(); ++i) {
        if (!(custom[i] > 0.0))
            throw ConfigError("step size: alpha_" + std::to_string(i + 1) + " must be positive");
        if (custom[i] > prev)
            throw ConfigError("step size: schedule must be monotonically non-increasing");
        prev = custom[i];
    }
}

// ---------------------------------------------------------------------------
// Trace

ExperimentTrace::ExperimentTrace(int servers, int dimension, int delta, long nsteps,
                                 bool record_steps)
    : servers_(servers),
      dimension_(dimension),
      delta_(delta),
      nsteps_(nsteps),
      record_steps_(record_steps) {
    boundaries_.assign(static_cast<std::size_t>(nsteps + 1) * servers * dimension, 0.0);
    pre_consensus_.assign(static_cast<std::size_t>(nsteps) * servers * dimension, 0.0);
    if (record_steps_)
        steps_.assign(static_cast<std::size_t>(nsteps) * delta * servers * dimension, 0.0);
    cycles_.resize(static_cast<std::size_t>(nsteps));
}

Eigen::Map<const Vec> ExperimentTrace::boundary(long k, int server) const {
    const std::size_t off = (static_cast<std::size_t>(k) * servers_ + server) * dimension_;
    return Eigen::Map<const Vec>(boundaries_.data() + off, dimension_);
}

Eigen::Map<const Vec> ExperimentTrace::pre_consensus(long k, int server) const {
    const std::size_t off = (static_cast<std::size_t>(k - 1) * servers_ + server) * dimension_;
    return Eigen::Map<const Vec>(pre_consensus_.data() + off, dimension_);
}

Eigen::Map<const Vec> ExperimentTrace::step_state(long k, int i, int server) const {
    if (!record_steps_) throw ConfigError("trace: per-step states were not recorded");
    const std::size_t off =
        ((static_cast<std::size_t>(k - 1) * delta_ + (i - 1)) * servers_ + server) * dimension_;
    return Eigen::Map<const Vec>(steps_.data() + off, dimension_);
}

Vec ExperimentTrace::boundary_average(long k) const {
    Vec avg = Vec::Zero(dimension_);
    for (int J = 0; J < servers_; ++J) avg += boundary(k, J);
    return avg / static_cast<double>(servers_);
}

double ExperimentTrace::max_pairwise(long k) const {
    double worst = 0.0;
    for (int a = 0; a < servers_; ++a)
        for (int b = a + 1; b < servers_; ++b)
            worst = std::max(worst, (boundary(k, a) - boundary(k, b)).norm());
    return worst;
}

const Mat& ExperimentTrace::applied_consensus(long k) const {
    return consensus_[static_cast<std::size_t>(cycles_[static_cast<std::size_t>(k - 1)].topology_index)].B;
}

long ExperimentTrace::length() const {
    return record_steps_ ? nsteps_ * delta_ + nsteps_ : 2 * nsteps_;
}

// ---------------------------------------------------------------------------
// Problem realization

namespace {

std::vector<ConsensusMatrix> realize_topology(const TopologySpec& spec, int servers) {
    using Kind = TopologySpec::Kind;
    if (spec.kind == Kind::TimeVarying) {
        if (spec.sequence.empty())
            throw ConfigError("topology: time-varying sequence must not be empty");
        std::vector<ConsensusMatrix> out;
        for (const auto& sub : spec.sequence) {
            if (sub.kind == Kind::TimeVarying)
                throw ConfigError("topology: nested time-varying sequences are not supported");
            auto ms = realize_topology(sub, servers);
            out.insert(out.end(), ms.begin(), ms.end());
        }
        return out;
    }
    if (spec.kind == Kind::Explicit) {
        if (spec.matrix.rows() != servers)
            throw ConfigError("topology: explicit matrix size does not match the server count");
        return {make_consensus_matrix(spec.matrix)};
    }
    ServerGraph g = [&] {
        switch (spec.kind) {
            case Kind::Path: return ServerGraph::path(servers);
            case Kind::Cycle: return ServerGraph::cycle(servers);
            case Kind::Star: return ServerGraph::star(servers, spec.hub);
            case Kind::Complete: return ServerGraph::complete(servers);
            case Kind::Custom: return ServerGraph::custom(servers, spec.edges);
            default: throw ConfigError("topology: unknown kind");
        }
    }();
    return {build_doubly_stochastic(g, spec.kappa)};
}

ClientLinkSchedule realize_links(const LinkSpec& spec, int servers, int clients) {
    if (spec.kind == LinkSpec::Kind::All) return ClientLinkSchedule::all(servers, clients);
    return ClientLinkSchedule::periodic(servers, clients, spec.period, spec.links);
}

std::vector<QuadraticObjective> build_objectives(const ExperimentConfig& cfg) {
    std::vector<QuadraticObjective> out;
    out.reserve(cfg.objectives.size());
    for (const auto& spec : cfg.objectives) {
        if (static_cast<int>(spec.center.size()) != cfg.dimension)
            throw ConfigError("objectives: center dimension does not match the experiment dimension");
        out.emplace_back(spec.scale, Eigen::Map<const Vec>(spec.center.data(), cfg.dimension));
    }
    return out;
}

}  // namespace

Problem Problem::realize(const ExperimentConfig& cfg) {
    if (cfg.dimension < 1 || cfg.servers < 1 || cfg.clients < 1 || cfg.delta < 1 ||
        cfg.nsteps < 1)
        throw ConfigError("config: dimension, servers, clients, delta and nsteps must be >= 1");
    if (static_cast<int>(cfg.lower.size()) != cfg.dimension ||
        static_cast<int>(cfg.upper.size()) != cfg.dimension)
        throw ConfigError("config: decision set bounds must match the experiment dimension");
    if (static_cast<int>(cfg.objectives.size()) != cfg.clients)
        throw ConfigError("config: one objective per client required");

    BoxSet set(Eigen::Map<const Vec>(cfg.lower.data(), cfg.dimension),
               Eigen::Map<const Vec>(cfg.upper.data(), cfg.dimension));

    std::vector<std::optional<double>> overrides;
    for (const auto& o : cfg.objectives) overrides.push_back(o.grad_bound);
    ObjectiveSet base(build_objectives(cfg), set, overrides);

    // Partition mode swaps in the virtual per-partition objectives.
    int engine_clients = cfg.clients;
    std::optional<ObjectiveSet> virtualized;
    if (cfg.weights.mode == WeightMode::Partition) {
        PartitionPlan plan = generate_partition(cfg.servers, cfg.clients, cfg.delta,
                                                cfg.weights.assignment);
        std::vector<QuadraticObjective> parts;
        parts.reserve(plan.parts.size());
        for (std::size_t v = 0; v < plan.parts.size(); ++v) {
            const auto& f = base.at(plan.parts[v].first);
            parts.emplace_back(f.scale() * plan.fraction[v], f.center());
        }
        engine_clients = static_cast<int>(parts.size());
        virtualized.emplace(std::move(parts), set);
    }

    auto consensus = realize_topology(cfg.topology, cfg.servers);
    double nu_max = 0.0;
    for (const auto& c : consensus) nu_max = std::max(nu_max, c.nu);

    ClientLinkSchedule links = realize_links(cfg.links, cfg.servers, engine_clients);
    if (!check_delta_connectivity(links, cfg.delta))
        throw ConfigError("client links: some client has no upload link within a window of " +
                          std::to_string(cfg.delta) + " iterations");

    return Problem{std::move(set),
                   virtualized ? std::move(*virtualized) : base,
                   std::move(base),
                   std::move(consensus),
                   std::move(links),
                   engine_clients,
                   nu_max};
}

// ---------------------------------------------------------------------------
// Weight provider

namespace {

struct CycleWeightsData {
    CycleWeights weights;
    double c1sq_abs = 0.0;
    double c0sq_nonneg = 0.0;
    double slc_window = 0.0;
    double buc_window = 0.0;
    bool nonneg = true;
};

void compute_aggregates(CycleWeightsData& data, const ObjectiveSet& obj) {
    const CycleWeights& w = data.weights;
    const int S = w.servers();
    const int C = w.clients();
    const int delta = w.delta();

    auto abs_row_load = [&](const Mat& m, int J) {
        double s = 0.0;
        for (int h = 0; h < C; ++h) s += std::abs(m(J, h)) * obj.grad_bound(h);
        return s;
    };
    auto signed_row_load = [&](const Mat& m, int J) {
        double s = 0.0;
        for (int h = 0; h < C; ++h) s += m(J, h) * obj.grad_bound(h);
        return s;
    };

    data.c1sq_abs = 0.0;
    data.c0sq_nonneg = 0.0;
    data.nonneg = true;
    std::vector<double> prefix(static_cast<std::size_t>(S), 0.0);
    for (int i = 0; i < delta; ++i) {
        // Coordinate-wise schedules use the per-entry worst coordinate.
        Mat step;
        if (w.coordinate_wise()) {
            step = w.coord_steps[i][0].cwiseAbs();
            for (std::size_t p = 1; p < w.coord_steps[i].size(); ++p)
                step = step.cwiseMax(w.coord_steps[i][p].cwiseAbs());
            for (const auto& m : w.coord_steps[i])
                if ((m.array() < 0.0).any()) data.nonneg = false;
        } else {
            step = w.steps[i];
            if ((step.array() < 0.0).any()) data.nonneg = false;
        }
        for (int J = 0; J < S; ++J) {
            const double abs_load = abs_row_load(step, J);
            data.c1sq_abs += abs_load * abs_load;
            const double signed_load = w.coordinate_wise() ? abs_load : signed_row_load(step, J);
            data.c0sq_nonneg += signed_load * signed_load + 2.0 * signed_load * prefix[J];
            prefix[J] += signed_load;
        }
    }
    const WindowAggregate slc = validate_slc(w);
    data.slc_window = slc.window;
    data.buc_window = validate_buc(w).window;
}

class WeightProvider {
public:
    WeightProvider(const ExperimentConfig& cfg, const Problem& problem)
        : cfg_(cfg), problem_(problem) {
        const auto& ws = cfg.weights;
        switch (ws.mode) {
            case WeightMode::Constant: {
                if (ws.constant.rows() != cfg.servers || ws.constant.cols() != cfg.clients)
                    throw ConfigError("weights: constant matrix must be servers x clients");
                fixed_.weights.steps.assign(static_cast<std::size_t>(cfg.delta), ws.constant);
                break;
            }
            case WeightMode::CoordinateWiseConstant: {
                if (static_cast<int>(ws.constant_per_coord.size()) != cfg.dimension)
                    throw ConfigError("weights: one matrix per coordinate required");
                for (const auto& m : ws.constant_per_coord)
                    if (m.rows() != cfg.servers || m.cols() != cfg.clients)
                        throw ConfigError("weights: coordinate matrix must be servers x clients");
                fixed_.weights.coord_steps.assign(static_cast<std::size_t>(cfg.delta),
                                                  ws.constant_per_coord);
                break;
            }
            case WeightMode::Partition: {
                PartitionPlan plan = generate_partition(cfg.servers, cfg.clients, cfg.delta,
                                                        ws.assignment);
                fixed_.weights = std::move(plan.schedule);
                break;
            }
            case WeightMode::Explicit: {
                if (ws.explicit_cycles.empty())
                    throw ConfigError("weights: explicit schedule must not be empty");
                for (const auto& cycle : ws.explicit_cycles) {
                    if (static_cast<int>(cycle.size()) != cfg.delta)
                        throw ConfigError("weights: explicit schedule needs delta matrices per cycle");
                    CycleWeightsData d;
                    d.weights.steps = cycle;
                    compute_aggregates(d, problem_.objectives);
                    explicit_.push_back(std::move(d));
                }
                return;
            }
            case WeightMode::RandomSigned: {
                if (!(ws.slc_window > 0.0))
                    throw NonPositiveM("weights: random schedules need a positive window M");
                random_ = true;
                return;
            }
        }
        compute_aggregates(fixed_, problem_.objectives);
    }

    // Weights applied during cycle k (1-based). Random schedules consume the
    // run's generator stream.
    const CycleWeightsData& for_cycle(long k, Rng& rng) {
        if (random_) {
            if (cfg_.weights.regenerate_each_cycle || !drawn_) {
                scratch_.weights = generate_random_signed(cfg_.servers, problem_.engine_clients,
                                                          cfg_.delta, cfg_.weights.slc_window,
                                                          cfg_.weights.buc_window, rng);
                compute_aggregates(scratch_, problem_.objectives);
                drawn_ = true;
            }
            return scratch_;
        }
        if (!explicit_.empty())
            return explicit_[static_cast<std::size_t>((k - 1) % static_cast<long>(explicit_.size()))];
        return fixed_;
    }

    bool constant() const { return !random_ && explicit_.empty(); }
    const CycleWeightsData& fixed() const { return fixed_; }

private:
    const ExperimentConfig& cfg_;
    const Problem& problem_;
    CycleWeightsData fixed_;
    std::vector<CycleWeightsData> explicit_;
    CycleWeightsData scratch_;
    bool random_ = false;
    bool drawn_ = false;
};

}  // namespace

// ---------------------------------------------------------------------------
// Step kernels

namespace {

// One descent step over all servers, in place. `states` is D x S (one column
// per server); gradients are taken at each server's own pre-step column.
// `link_mask` (S x C, 0/1) limits which uploads reach a server; masking
// replaces an all-servers-zero gradient with a zero-sum nonzero pattern.
void kernel_descent(Mat& states, const CycleWeights& w, int step_index, double alpha,
                    const ObjectiveSet& obj, const BoxSet& set, const Mat* link_mask,
                    bool masking, double masking_bound, Rng* rng, Mat& kicks) {
    const int S = static_cast<int>(states.cols());
    const int D = static_cast<int>(states.rows());
    const int C = obj.count();
    kicks.setZero();

    const Mat* Wstep = w.coordinate_wise() ? nullptr : &w.steps[static_cast<std::size_t>(step_index)];
    const std::vector<Mat>* Wcoord =
        w.coordinate_wise() ? &w.coord_steps[static_cast<std::size_t>(step_index)] : nullptr;

    for (int h = 0; h < C; ++h) {
        const auto& f = obj.at(h);
        const double two_a = 2.0 * f.scale();
        const Vec& c = f.center();

        bool zero_everywhere = masking;
        if (masking) {
            for (int J = 0; J < S && zero_everywhere; ++J)
                for (int p = 0; p < D && zero_everywhere; ++p)
                    if (states(p, J) != c[p]) zero_everywhere = false;
        }
        if (zero_everywhere) {
            // True gradient is zero at every server: upload a zero-sum
            // disguise instead of the telltale zero vector.
            std::vector<int> linked;
            for (int J = 0; J < S; ++J)
                if (link_mask == nullptr || (*link_mask)(J, h) != 0.0) linked.push_back(J);
            if (!linked.empty()) {
                const auto uploads =
                    mask_zero_gradient(static_cast<int>(linked.size()), D, masking_bound, *rng);
                for (std::size_t idx = 0; idx < linked.size(); ++idx)
                    kicks.col(linked[idx]) += uploads[idx];
            }
            continue;
        }

        for (int J = 0; J < S; ++J) {
            if (link_mask != nullptr && (*link_mask)(J, h) == 0.0) continue;
            if (Wstep != nullptr) {
                const double wjh = (*Wstep)(J, h);
                if (wjh == 0.0) continue;
                for (int p = 0; p < D; ++p)
                    kicks(p, J) += wjh * (two_a * (states(p, J) - c[p]));
            } else {
                for (int p = 0; p < D; ++p)
                    kicks(p, J) += (*Wcoord)[p](J, h) * (two_a * (states(p, J) - c[p]));
            }
        }
    }

    for (int J = 0; J < S; ++J) {
        for (int p = 0; p < D; ++p) {
            const double moved = states(p, J) - alpha * kicks(p, J);
            states(p, J) = std::min(set.upper()[p], std::max(set.lower()[p], moved));
        }
    }
}

void kernel_consensus(Mat& states, const Mat& B, Mat& scratch) {
    scratch.noalias() = states * B.transpose();
    states.swap(scratch);
}

Mat states_from_vector(const std::vector<Vec>& states) {
    const int S = static_cast<int>(states.size());
    const int D = static_cast<int>(states.front().size());
    Mat m(D, S);
    for (int J = 0; J < S; ++J) m.col(J) = states[J];
    return m;
}

std::vector<Vec> states_to_vector(const Mat& m) {
    std::vector<Vec> out;
    out.reserve(static_cast<std::size_t>(m.cols()));
    for (int J = 0; J < m.cols(); ++J) out.push_back(m.col(J));
    return out;
}

}  // namespace

std::vector<Vec> descent_step(const std::vector<Vec>& states, const Mat& weights, double alpha,
                              const ObjectiveSet& objectives, const BoxSet& set) {
    if (weights.rows() != static_cast<long>(states.size()) || weights.cols() != objectives.count())
        throw ConfigError("descent_step: weight matrix must be servers x clients");
    if (!(alpha > 0.0)) throw ConfigError("descent_step: alpha must be positive");
    Mat m = states_from_vector(states);
    CycleWeights w;
    w.steps.push_back(weights);
    Mat kicks(m.rows(), m.cols());
    kernel_descent(m, w, 0, alpha, objectives, set, nullptr, false, 0.0, nullptr, kicks);
    if (!all_finite(m)) throw NumericFault("descent_step: non-finite state produced");
    return states_to_vector(m);
}

std::vector<Vec> descent_step_coordinate_wise(const std::vector<Vec>& states,
                                              const std::vector<Mat>& weights_per_coord,
                                              double alpha, const ObjectiveSet& objectives,
                                              const BoxSet& set) {
    if (static_cast<int>(weights_per_coord.size()) != set.dim())
        throw ConfigError("descent_step_coordinate_wise: one weight matrix per coordinate");
    Mat m = states_from_vector(states);
    CycleWeights w;
    w.coord_steps.push_back(weights_per_coord);
    Mat kicks(m.rows(), m.cols());
    kernel_descent(m, w, 0, alpha, objectives, set, nullptr, false, 0.0, nullptr, kicks);
    if (!all_finite(m)) throw NumericFault("descent_step_coordinate_wise: non-finite state");
    return states_to_vector(m);
}

std::vector<Vec> consensus_step(const std::vector<Vec>& states, const Mat& B) {
    if (B.rows() != static_cast<long>(states.size()))
        throw ConfigError("consensus_step: matrix dimension must match the server count");
    validate_doubly_stochastic(B);
    Mat m = states_from_vector(states);
    Mat scratch(m.rows(), m.cols());
    kernel_consensus(m, B, scratch);
    return states_to_vector(m);
}

// ---------------------------------------------------------------------------
// Validation & run

namespace {

Mat initial_states(const ExperimentConfig& cfg, const Problem& problem) {
    Mat states = Mat::Zero(cfg.dimension, cfg.servers);
    if (!cfg.initial.empty()) {
        if (static_cast<int>(cfg.initial.size()) != cfg.servers)
            throw ConfigError("config: one initial iterate per server required");
        for (int J = 0; J < cfg.servers; ++J) {
            if (static_cast<int>(cfg.initial[J].size()) != cfg.dimension)
                throw ConfigError("config: initial iterate dimension mismatch");
            for (int p = 0; p < cfg.dimension; ++p) states(p, J) = cfg.initial[J][p];
        }
    }
    for (int J = 0; J < cfg.servers; ++J) {
        if (!problem.set.contains(states.col(J)))
            throw ConfigError("config: initial iterate of server " + std::to_string(J) +
                              " lies outside the decision set");
    }
    return states;
}

void check_mode_requirements(const ExperimentConfig& cfg, const Problem& problem,
                             WeightProvider& provider) {
    if (cfg.mode == RunMode::General) return;
    const double uniform = 1.0 / static_cast<double>(cfg.servers);
    for (const auto& c : problem.consensus) {
        if (((c.B.array() - uniform).abs() > 1e-9).any())
            throw ConfigError("complete-graph modes require uniform averaging consensus "
                              "(all entries 1/S)");
    }
    if (cfg.mode == RunMode::CompleteGraphNonnegW) {
        if (cfg.weights.mode == WeightMode::RandomSigned)
            throw ConfigError("nonnegative-weights mode cannot use signed random schedules");
        if (provider.constant() && !provider.fixed().nonneg)
            throw ConfigError("nonnegative-weights mode requires all schedule entries >= 0");
    }
}

// Link-masked copy of one cycle's weights; the symmetric learning condition
// is re-validated on what is actually applied.
CycleWeights apply_link_mask(const CycleWeights& w, const ClientLinkSchedule& links,
                             long cycle_base_iteration) {
    CycleWeights masked = w;
    const int S = w.servers();
    const int C = w.clients();
    for (int i = 0; i < masked.delta(); ++i) {
        const long t = cycle_base_iteration + i;
        for (int J = 0; J < S; ++J)
            for (int h = 0; h < C; ++h)
                if (!links.linked(t, J, h)) {
                    if (masked.coordinate_wise())
                        for (auto& m : masked.coord_steps[i]) m(J, h) = 0.0;
                    else
                        masked.steps[i](J, h) = 0.0;
                }
    }
    return masked;
}

}  // namespace

void validate_config(const ExperimentConfig& cfg) {
    Problem problem = Problem::realize(cfg);
    cfg.step_size.validate(cfg.nsteps);
    WeightProvider provider(cfg, problem);
    check_mode_requirements(cfg, problem, provider);
    {
        // Probe one cycle so generator-level failures (infeasible budgets,
        // masked-schedule SLC breaks) surface before any simulation.
        Rng probe(cfg.seed);
        const auto& d = provider.for_cycle(1, probe);
        if (!problem.links.always_all()) {
            CycleWeightsData masked;
            masked.weights = apply_link_mask(d.weights, problem.links, 0);
            compute_aggregates(masked, problem.objectives);
        }
    }
    initial_states(cfg, problem);
    if (cfg.zero_grad_masking && !(cfg.masking_bound > 0.0))
        throw ConfigError("config: masking bound must be positive");
}

ExperimentTrace run(const ExperimentConfig& cfg) {
    Problem problem = Problem::realize(cfg);
    cfg.step_size.validate(cfg.nsteps);
    WeightProvider provider(cfg, problem);
    check_mode_requirements(cfg, problem, provider);

    const int S = cfg.servers;
    const int D = cfg.dimension;
    const bool record_steps =
        cfg.record_steps == 1 ||
        (cfg.record_steps == -1 &&
         cfg.nsteps * cfg.delta * static_cast<long>(S) * D <= 2'000'000L);

    ExperimentTrace trace(S, D, cfg.delta, cfg.nsteps, record_steps);
    trace.config_ = cfg;
    trace.consensus_ = problem.consensus;
    trace.nu_ = problem.nu_max;

    Mat states = initial_states(cfg, problem);
    Rng rng(cfg.seed);

    // Initial boundary.
    std::copy(states.data(), states.data() + S * D, trace.boundaries_.begin());
    {
        double worst = 0.0;
        for (int a = 0; a < S; ++a)
            for (int b = a + 1; b < S; ++b)
                worst = std::max(worst, (states.col(a) - states.col(b)).norm());
        trace.initial_max_pairwise_ = worst;
    }

    Mat kicks(D, S), scratch(D, S);
    const bool all_linked = problem.links.always_all();
    const std::size_t n_topologies = problem.consensus.size();

    // Per-step link masks (periodic schedules only).
    std::vector<Mat> step_masks;
    if (!all_linked) {
        step_masks.assign(static_cast<std::size_t>(cfg.delta),
                          Mat::Zero(S, problem.engine_clients));
    }

    for (long k = 1; k <= cfg.nsteps; ++k) {
        const double alpha = cfg.step_size.alpha(k);
        const CycleWeightsData* data = &provider.for_cycle(k, rng);

        CycleWeightsData masked_data;
        if (!all_linked) {
            masked_data.weights =
                apply_link_mask(data->weights, problem.links, (k - 1) * cfg.delta);
            // The symmetric learning condition must hold on what is applied.
            compute_aggregates(masked_data, problem.objectives);
            data = &masked_data;
            for (int i = 0; i < cfg.delta; ++i) {
                const long t = (k - 1) * cfg.delta + i;
                for (int J = 0; J < S; ++J)
                    for (int h = 0; h < problem.engine_clients; ++h)
                        step_masks[static_cast<std::size_t>(i)](J, h) =
                            problem.links.linked(t, J, h) ? 1.0 : 0.0;
            }
        }
        if (cfg.mode == RunMode::CompleteGraphNonnegW && !data->nonneg)
            throw ConfigError("nonnegative-weights mode: cycle " + std::to_string(k) +
                              " applies a negative weight");
        if (cfg.weights.mode == WeightMode::RandomSigned &&
            data->buc_window > cfg.weights.buc_window + 1e-9)
            throw ConfigError("bounded update condition exceeded at cycle " + std::to_string(k));

        for (int i = 1; i <= cfg.delta; ++i) {
            kernel_descent(states, data->weights, i - 1, alpha, problem.objectives, problem.set,
                           all_linked ? nullptr : &step_masks[static_cast<std::size_t>(i - 1)],
                           cfg.zero_grad_masking, cfg.masking_bound, &rng, kicks);
            if (!all_finite(states))
                throw NumericFault("non-finite state at cycle " + std::to_string(k) + " step " +
                                   std::to_string(i));
            if (record_steps) {
                const std::size_t off =
                    (static_cast<std::size_t>(k - 1) * cfg.delta + (i - 1)) * S * D;
                std::copy(states.data(), states.data() + S * D, trace.steps_.begin() + off);
            }
        }

        std::copy(states.data(), states.data() + S * D,
                  trace.pre_consensus_.begin() + static_cast<std::size_t>(k - 1) * S * D);

        const int topo_index = static_cast<int>((k - 1) % n_topologies);
        kernel_consensus(states, problem.consensus[static_cast<std::size_t>(topo_index)].B,
                         scratch);

        std::copy(states.data(), states.data() + S * D,
                  trace.boundaries_.begin() + static_cast<std::size_t>(k) * S * D);

        if (cfg.mode != RunMode::General) {
            // Uniform averaging must leave all servers in exact agreement.
            for (int J = 1; J < S; ++J)
                if ((states.col(J) - states.col(0)).norm() > 1e-12)
                    throw NumericFault("complete-graph mode: servers disagree after cycle " +
                                       std::to_string(k));
        }

        auto& agg = trace.cycles_[static_cast<std::size_t>(k - 1)];
        agg.alpha = alpha;
        agg.c1sq_abs = data->c1sq_abs;
        agg.c0sq_nonneg = data->c0sq_nonneg;
        agg.slc_window = data->slc_window;
        agg.buc_window = data->buc_window;
        agg.topology_index = topo_index;
    }

    return trace;
}

}  // namespace icd
