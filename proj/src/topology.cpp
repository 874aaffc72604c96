#include "icd/topology.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace icd {

ServerGraph::ServerGraph(int servers, GraphKind kind, std::vector<std::pair<int, int>> edges)
    : servers_(servers), kind_(kind), degree_(servers, 0) {
    if (servers_ < 1) throw ConfigError("ServerGraph: at least one server required");
    for (auto [a, b] : edges) {
        if (a == b) throw ConfigError("ServerGraph: self-loops are implicit, not edges");
        if (a < 0 || b < 0 || a >= servers_ || b >= servers_)
            throw ConfigError("ServerGraph: edge endpoint out of range");
        edges_.insert({std::min(a, b), std::max(a, b)});
    }
    for (auto [a, b] : edges_) {
        ++degree_[a];
        ++degree_[b];
    }
    // Connectivity by traversal.
    std::vector<bool> seen(servers_, false);
    std::vector<int> stack{0};
    seen[0] = true;
    int reached = 1;
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (int u = 0; u < servers_; ++u) {
            if (!seen[u] && adjacent(v, u)) {
                seen[u] = true;
                ++reached;
                stack.push_back(u);
            }
        }
    }
    if (reached != servers_)
        throw DisconnectedGraph("ServerGraph: server graph must form a connected component");
}

ServerGraph ServerGraph::path(int servers) {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i + 1 < servers; ++i) e.emplace_back(i, i + 1);
    return ServerGraph(servers, GraphKind::Path, std::move(e));
}

ServerGraph ServerGraph::cycle(int servers) {
    if (servers < 3) throw ConfigError("ServerGraph::cycle: needs at least 3 servers");
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i < servers; ++i) e.emplace_back(i, (i + 1) % servers);
    return ServerGraph(servers, GraphKind::Cycle, std::move(e));
}

ServerGraph ServerGraph::star(int servers, int hub) {
    if (hub < 0 || hub >= servers) throw ConfigError("ServerGraph::star: hub out of range");
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i < servers; ++i)
        if (i != hub) e.emplace_back(hub, i);
    return ServerGraph(servers, GraphKind::Star, std::move(e));
}

ServerGraph ServerGraph::complete(int servers) {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i < servers; ++i)
        for (int j = i + 1; j < servers; ++j) e.emplace_back(i, j);
    return ServerGraph(servers, GraphKind::Complete, std::move(e));
}

ServerGraph ServerGraph::custom(int servers, std::vector<std::pair<int, int>> edges) {
    return ServerGraph(servers, GraphKind::Custom, std::move(edges));
}

int ServerGraph::max_degree() const {
    return degree_.empty() ? 0 : *std::max_element(degree_.begin(), degree_.end());
}

bool ServerGraph::adjacent(int a, int b) const {
    return edges_.count({std::min(a, b), std::max(a, b)}) > 0;
}

void validate_doubly_stochastic(const Mat& B, double tol) {
    if (B.rows() != B.cols()) throw ConfigError("consensus matrix must be square");
    if (!all_finite(B)) throw ConfigError("consensus matrix entries must be finite");
    for (int i = 0; i < B.rows(); ++i)
        for (int j = 0; j < B.cols(); ++j)
            if (B(i, j) < 0.0)
                throw ConfigError("consensus matrix entries must be nonnegative (entry " +
                                  std::to_string(i) + "," + std::to_string(j) + ")");
    for (int i = 0; i < B.rows(); ++i) {
        const double rs = B.row(i).sum();
        if (std::abs(rs - 1.0) > tol)
            throw ConfigError("consensus matrix row " + std::to_string(i) +
                              " sums to " + std::to_string(rs) + ", rows must sum to 1");
    }
    for (int j = 0; j < B.cols(); ++j) {
        const double cs = B.col(j).sum();
        if (std::abs(cs - 1.0) > tol)
            throw ConfigError("consensus matrix column " + std::to_string(j) +
                              " sums to " + std::to_string(cs) + ", columns must sum to 1");
    }
}

ConsensusMatrix build_doubly_stochastic(const ServerGraph& graph, double kappa) {
    const int S = graph.size();
    if (!(kappa > 0.0))
        throw ConfigError("build_doubly_stochastic: kappa must be positive");
    if (S > 1 && kappa * graph.max_degree() > 1.0)
        throw KappaTooLarge("build_doubly_stochastic: kappa " + std::to_string(kappa) +
                            " would make a diagonal entry negative (max degree " +
                            std::to_string(graph.max_degree()) + ")");
    Mat B = Mat::Zero(S, S);
    for (auto [a, b] : graph.edges()) {
        B(a, b) = kappa;
        B(b, a) = kappa;
    }
    for (int i = 0; i < S; ++i) B(i, i) = 1.0 - B.row(i).sum();
    validate_doubly_stochastic(B);
    const double nu = scrambling_coefficient(B);
    return ConsensusMatrix{std::move(B), kappa, nu};
}

ConsensusMatrix make_consensus_matrix(Mat B, double kappa_floor) {
    validate_doubly_stochastic(B);
    const double nu = scrambling_coefficient(B);
    return ConsensusMatrix{std::move(B), kappa_floor, nu};
}

double scrambling_coefficient(const Mat& B) {
    const int S = static_cast<int>(B.rows());
    if (S == 1) return 0.0;
    double min_overlap = 1.0;
    for (int i = 0; i < S; ++i) {
        for (int g = i + 1; g < S; ++g) {
            double overlap = 0.0;
            for (int j = 0; j < S; ++j) overlap += std::min(B(i, j), B(g, j));
            min_overlap = std::min(min_overlap, overlap);
        }
    }
    return 1.0 - min_overlap;
}

bool check_scrambling(const Mat& B) {
    const int S = static_cast<int>(B.rows());
    for (int i = 0; i < S; ++i) {
        for (int g = i + 1; g < S; ++g) {
            bool share = false;
            for (int j = 0; j < S && !share; ++j) share = B(i, j) > 0.0 && B(g, j) > 0.0;
            if (!share) return false;
        }
    }
    return true;
}

ClientLinkSchedule ClientLinkSchedule::all(int servers, int clients) {
    ClientLinkSchedule s;
    s.always_all_ = true;
    s.servers_ = servers;
    s.clients_ = clients;
    return s;
}

ClientLinkSchedule ClientLinkSchedule::periodic(int servers, int clients, int period,
                                                std::vector<std::vector<std::pair<int, int>>> links) {
    if (period < 1 || static_cast<int>(links.size()) != period)
        throw ConfigError("ClientLinkSchedule: one link set per phase required");
    ClientLinkSchedule s;
    s.always_all_ = false;
    s.servers_ = servers;
    s.clients_ = clients;
    s.period_ = period;
    s.mask_.assign(period, Mat::Zero(servers, clients));
    for (int t = 0; t < period; ++t) {
        for (auto [J, h] : links[t]) {
            if (J < 0 || J >= servers || h < 0 || h >= clients)
                throw ConfigError("ClientLinkSchedule: link endpoint out of range");
            s.mask_[t](J, h) = 1.0;
        }
    }
    return s;
}

bool ClientLinkSchedule::linked(long iteration, int server, int client) const {
    if (always_all_) return true;
    return mask_[static_cast<std::size_t>(iteration % period_)](server, client) != 0.0;
}

bool check_delta_connectivity(const ClientLinkSchedule& sched, int delta) {
    if (delta < 1) return false;
    if (sched.always_all()) return true;
    const long horizon = sched.period() + delta;  // covers all window alignments
    for (int h = 0; h < sched.clients(); ++h) {
        for (long start = 0; start < horizon; ++start) {
            bool seen = false;
            for (long t = start; t < start + delta && !seen; ++t)
                for (int J = 0; J < sched.servers() && !seen; ++J) seen = sched.linked(t, J, h);
            if (!seen) return false;
        }
    }
    return true;
}

}  // namespace icd
