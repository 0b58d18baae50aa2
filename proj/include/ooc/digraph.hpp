#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace ooc {

struct Edge {
    std::size_t from;  // 0-based sender
    std::size_t to;    // 0-based receiver
    double weight = 1.0;
};

// Weighted directed network. weights(i, j) = a_ij > 0 means agent i
// receives information from agent j.
class Digraph {
public:
    Digraph(std::size_t n, const std::vector<Edge>& edges);
    explicit Digraph(Eigen::MatrixXd adjacency);

    std::size_t size() const noexcept { return static_cast<std::size_t>(weights_.rows()); }
    const Eigen::MatrixXd& weights() const noexcept { return weights_; }
    double weight(std::size_t i, std::size_t j) const { return weights_(i, j); }

    // In-neighbours of agent i (j with a_ij > 0).
    const std::vector<std::size_t>& in_neighbors(std::size_t i) const { return in_neighbors_[i]; }

private:
    void validate_and_index();

    Eigen::MatrixXd weights_;
    std::vector<std::vector<std::size_t>> in_neighbors_;
};

struct SpectralData {
    Eigen::MatrixXd laplacian;
    Eigen::VectorXd rho;  // positive left null vector, sums to one
    double rho_min = 0.0;
    double lambda2 = 0.0;
};

Eigen::MatrixXd laplacian(const Digraph& g);

bool is_strongly_connected(const Digraph& g);

// Solves {L^T rho = 0, 1^T rho = 1} densely. Throws NotStronglyConnected.
Eigen::VectorXd left_eigenvector(const Digraph& g);

// Second-smallest eigenvalue of (R L + L^T R) / 2 with R = diag(rho).
double lambda2(const Digraph& g, const Eigen::VectorXd& rho);

SpectralData spectral_data(const Digraph& g);

// Unit-weight five-node network used by both reference examples:
// 3->1, 1->2, 2->3, 3->4, 4->5, 2->5, 5->1.
Digraph example_network(double weight = 1.0);

}  // namespace ooc
