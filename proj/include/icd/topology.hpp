#pragma once

#include "icd/domain.hpp"

#include <set>
#include <string>
#include <utility>
#include <vector>

namespace icd {

struct DisconnectedGraph : ConfigError {
    using ConfigError::ConfigError;
};

struct KappaTooLarge : ConfigError {
    using ConfigError::ConfigError;
};

enum class GraphKind { Path, Cycle, Star, Complete, Custom };

// Undirected server-server graph; connectivity is checked at construction.
class ServerGraph {
public:
    static ServerGraph path(int servers);
    static ServerGraph cycle(int servers);
    static ServerGraph star(int servers, int hub = 0);
    static ServerGraph complete(int servers);
    static ServerGraph custom(int servers, std::vector<std::pair<int, int>> edges);

    int size() const { return servers_; }
    GraphKind kind() const { return kind_; }
    const std::set<std::pair<int, int>>& edges() const { return edges_; }
    int degree(int v) const { return degree_[v]; }
    int max_degree() const;
    bool adjacent(int a, int b) const;

private:
    ServerGraph(int servers, GraphKind kind, std::vector<std::pair<int, int>> edges);

    int servers_;
    GraphKind kind_;
    std::set<std::pair<int, int>> edges_;  // normalized (a < b)
    std::vector<int> degree_;
};

// Doubly stochastic consensus matrix with its edge floor and Dobrushin
// coefficient.
struct ConsensusMatrix {
    Mat B;
    double kappa = 0.0;
    double nu = 1.0;
};

// Uniform edge weight kappa with the diagonal absorbing the remainder.
// Rejects kappa outside (0, 1/max_degree].
ConsensusMatrix build_doubly_stochastic(const ServerGraph& graph, double kappa);

// Wraps an explicit matrix; validates stochasticity rules.
ConsensusMatrix make_consensus_matrix(Mat B, double kappa_floor = 0.0);

// Checks nonnegativity and row/column sums within tol; throws ConfigError
// naming the violated rule.
void validate_doubly_stochastic(const Mat& B, double tol = 1e-12);

// Dobrushin coefficient: 1 - min over row pairs of the summed row overlap.
// 0 for rank-one averaging, 1 when two rows have disjoint support; the matrix
// is scrambling iff this is < 1.
double scrambling_coefficient(const Mat& B);

bool check_scrambling(const Mat& B);

// Bipartite server-client connectivity per iteration. Iterations are global
// (cycle k, step i) -> (k-1)*delta + i - 1 for 1-based k, i.
class ClientLinkSchedule {
public:
    // Every client linked to every server at every iteration.
    static ClientLinkSchedule all(int servers, int clients);

    // links[t % period] gives the active (server, client) pairs at iteration t.
    static ClientLinkSchedule periodic(int servers, int clients, int period,
                                       std::vector<std::vector<std::pair<int, int>>> links);

    bool always_all() const { return always_all_; }
    int servers() const { return servers_; }
    int clients() const { return clients_; }
    int period() const { return period_; }
    bool linked(long iteration, int server, int client) const;

private:
    ClientLinkSchedule() = default;

    bool always_all_ = true;
    int servers_ = 0;
    int clients_ = 0;
    int period_ = 1;
    // mask_[phase](server, client) != 0 when linked
    std::vector<Mat> mask_;
};

// True iff every client has at least one link in every window of `delta`
// consecutive iterations (windows are scanned over one full period plus the
// window length, which covers all alignments of a periodic schedule).
bool check_delta_connectivity(const ClientLinkSchedule& sched, int delta);

}  // namespace icd
