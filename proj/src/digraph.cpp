#include "ooc/digraph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ooc/errors.hpp"

namespace ooc {

Digraph::Digraph(std::size_t n, const std::vector<Edge>& edges) : weights_(Eigen::MatrixXd::Zero(n, n)) {
    for (const auto& e : edges) {
        if (e.from >= n || e.to >= n) {
            throw InvalidGraph("edge (" + std::to_string(e.from) + " -> " + std::to_string(e.to) +
                               ") references a node outside [0, " + std::to_string(n) + ")");
        }
        if (e.from == e.to) {
            throw InvalidGraph("self-loop at node " + std::to_string(e.from));
        }
        if (!(e.weight >= 0.0) || !std::isfinite(e.weight)) {
            throw InvalidGraph("edge (" + std::to_string(e.from) + " -> " + std::to_string(e.to) +
                               ") has invalid weight " + std::to_string(e.weight));
        }
        weights_(e.to, e.from) += e.weight;
    }
    validate_and_index();
}

Digraph::Digraph(Eigen::MatrixXd adjacency) : weights_(std::move(adjacency)) {
    if (weights_.rows() != weights_.cols()) {
        throw InvalidGraph("adjacency matrix must be square");
    }
    validate_and_index();
}

void Digraph::validate_and_index() {
    const auto n = size();
    if (n < 1) {
        throw InvalidGraph("graph needs at least one node");
    }
    in_neighbors_.assign(n, {});
    for (std::size_t i = 0; i < n; ++i) {
        if (weights_(i, i) != 0.0) {
            throw InvalidGraph("self-loop at node " + std::to_string(i));
        }
        for (std::size_t j = 0; j < n; ++j) {
            const double a = weights_(i, j);
            if (!(a >= 0.0) || !std::isfinite(a)) {
                throw InvalidGraph("negative or non-finite weight a(" + std::to_string(i) + ", " +
                                   std::to_string(j) + ")");
            }
            if (a > 0.0) {
                in_neighbors_[i].push_back(j);
            }
        }
    }
}

Eigen::MatrixXd laplacian(const Digraph& g) {
    Eigen::MatrixXd L = -g.weights();
    for (Eigen::Index i = 0; i < L.rows(); ++i) {
        L(i, i) = g.weights().row(i).sum();
    }
    return L;
}

namespace {

// Iterative Tarjan; returns the number of strongly connected components.
std::size_t count_sccs(const Digraph& g) {
    const std::size_t n = g.size();
    // Successors along information flow j -> i. Connectivity is symmetric in
    // direction choice, so either orientation gives the same SCCs.
    std::vector<std::vector<std::size_t>> succ(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (auto j : g.in_neighbors(i)) {
            succ[j].push_back(i);
        }
    }

    constexpr std::size_t unvisited = static_cast<std::size_t>(-1);
    std::vector<std::size_t> index(n, unvisited), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<std::size_t> stack;
    std::size_t counter = 0, components = 0;

    struct Frame {
        std::size_t node;
        std::size_t next_child;
    };
    for (std::size_t root = 0; root < n; ++root) {
        if (index[root] != unvisited) continue;
        std::vector<Frame> call{{root, 0}};
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!call.empty()) {
            auto& f = call.back();
            if (f.next_child < succ[f.node].size()) {
                const auto w = succ[f.node][f.next_child++];
                if (index[w] == unvisited) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    call.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[f.node] = std::min(low[f.node], index[w]);
                }
                continue;
            }
            const auto v = f.node;
            if (low[v] == index[v]) {
                std::size_t w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                } while (w != v);
                ++components;
            }
            call.pop_back();
            if (!call.empty()) {
                low[call.back().node] = std::min(low[call.back().node], low[v]);
            }
        }
    }
    return components;
}

}  // namespace

bool is_strongly_connected(const Digraph& g) { return count_sccs(g) == 1; }

Eigen::VectorXd left_eigenvector(const Digraph& g) {
    if (!is_strongly_connected(g)) {
        throw NotStronglyConnected("left eigenvector requires a strongly connected graph");
    }
    const auto n = static_cast<Eigen::Index>(g.size());
    const Eigen::MatrixXd L = laplacian(g);

    Eigen::MatrixXd A(n + 1, n);
    A.topRows(n) = L.transpose();
    A.row(n).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
    rhs(n) = 1.0;

    // The augmented system is consistent with full column rank, so the QR
    // least-squares solution is the exact solution.
    Eigen::VectorXd rho = A.colPivHouseholderQr().solve(rhs);
    rho /= rho.sum();
    if ((rho.array() <= 0.0).any()) {
        throw NotStronglyConnected("left null vector is not strictly positive");
    }
    return rho;
}

double lambda2(const Digraph& g, const Eigen::VectorXd& rho) {
    if (!is_strongly_connected(g)) {
        throw NotStronglyConnected("lambda2 requires a strongly connected graph");
    }
    if (g.size() < 2) {
        throw InvalidSpectrum("lambda2 needs at least two nodes");
    }
    const Eigen::MatrixXd L = laplacian(g);
    const Eigen::MatrixXd RL = rho.asDiagonal() * L;
    const Eigen::MatrixXd Lbar = 0.5 * (RL + RL.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Lbar, Eigen::EigenvaluesOnly);
    const double l2 = es.eigenvalues()(1);
    if (!(l2 > 0.0)) {
        throw NotStronglyConnected("symmetrized Laplacian has a repeated zero eigenvalue");
    }
    return l2;
}

SpectralData spectral_data(const Digraph& g) {
    SpectralData s;
    s.laplacian = laplacian(g);
    s.rho = left_eigenvector(g);
    s.rho_min = s.rho.minCoeff();
    s.lambda2 = lambda2(g, s.rho);
    return s;
}

Digraph example_network(double weight) {
    // 1-based pairs (from, to) as drawn in the reference topology.
    const std::pair<int, int> pairs[] = {{3, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {2, 5}, {5, 1}};
    std::vector<Edge> edges;
    for (auto [f, t] : pairs) {
        edges.push_back({static_cast<std::size_t>(f - 1), static_cast<std::size_t>(t - 1), weight});
    }
    return Digraph(5, edges);
}

}  // namespace ooc
