#include <doctest.h>

#include <random>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "ooc/digraph.hpp"
#include "ooc/errors.hpp"

using namespace ooc;

namespace {

Digraph cycle(std::size_t n) {
    std::vector<Edge> e;
    for (std::size_t i = 0; i < n; ++i) e.push_back({i, (i + 1) % n, 1.0});
    return Digraph(n, e);
}

// Null vector of L^T from a full eigendecomposition, normalized to sum one.
Eigen::VectorXd null_vector_oracle(const Eigen::MatrixXd& L) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(L.transpose());
    Eigen::Index k = 0;
    es.eigenvalues().cwiseAbs().minCoeff(&k);
    Eigen::VectorXd v = es.eigenvectors().col(k).real();
    return v / v.sum();
}

// Ring plus random chords with random weights; always strongly connected.
Digraph random_connected(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> w(0.1, 3.0), coin(0.0, 1.0);
    std::vector<Edge> e;
    for (std::size_t i = 0; i < n; ++i) e.push_back({i, (i + 1) % n, w(rng)});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && j != (i + 1) % n && coin(rng) < 0.3) e.push_back({i, j, w(rng)});
    return Digraph(n, e);
}

}  // namespace

TEST_CASE("laplacian of small graphs") {
    Eigen::MatrixXd expected(3, 3);
    expected << 1, 0, -1, -1, 1, 0, 0, -1, 1;
    CHECK(laplacian(cycle(3)).isApprox(expected));

    Eigen::MatrixXd single(2, 2);
    single << 0, 0, -1, 1;
    CHECK(laplacian(Digraph(2, {{0, 1, 1.0}})).isApprox(single));

    const auto L = laplacian(example_network());
    CHECK(L.rowwise().sum().cwiseAbs().maxCoeff() == doctest::Approx(0.0));
    CHECK(L(0, 0) == doctest::Approx(2.0));
    CHECK(L(0, 2) == doctest::Approx(-1.0));
    CHECK(L(0, 4) == doctest::Approx(-1.0));
    CHECK(L(4, 4) == doctest::Approx(2.0));  // receives from 4 and 2
}

TEST_CASE("strong connectivity") {
    CHECK(is_strongly_connected(cycle(3)));
    CHECK_FALSE(is_strongly_connected(Digraph(2, {{0, 1, 1.0}})));
    CHECK(is_strongly_connected(example_network()));
    CHECK(is_strongly_connected(Digraph(1, {})));
}

TEST_CASE("left eigenvector") {
    CHECK(left_eigenvector(cycle(3)).isApprox(Eigen::Vector3d::Constant(1.0 / 3.0)));
    CHECK(left_eigenvector(cycle(4)).isApprox(Eigen::Vector4d::Constant(0.25)));

    const auto g = example_network();
    const auto L = laplacian(g);
    const auto rho = left_eigenvector(g);
    CHECK(rho.minCoeff() > 0.0);
    CHECK((rho.transpose() * L).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((rho - null_vector_oracle(L)).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::VectorXd hand(5);
    hand << 2, 4, 3, 1, 1;
    CHECK((rho - hand / 11.0).cwiseAbs().maxCoeff() < 1e-14);

    CHECK_THROWS_AS(left_eigenvector(Digraph(2, {{0, 1, 1.0}})), NotStronglyConnected);
}

TEST_CASE("lambda2") {
    Eigen::MatrixXd k3 = Eigen::MatrixXd::Ones(3, 3) - Eigen::MatrixXd::Identity(3, 3);
    const Digraph complete(k3);
    CHECK(lambda2(complete, left_eigenvector(complete)) == doctest::Approx(1.0).epsilon(1e-12));

    // rho = (1/2, 1/2), so the symmetrized matrix is L / 2 with spectrum {0, 1}
    const Digraph two(2, {{0, 1, 1.0}, {1, 0, 1.0}});
    CHECK(lambda2(two, left_eigenvector(two)) == doctest::Approx(1.0).epsilon(1e-12));

    const auto sd = spectral_data(example_network());
    CHECK(sd.lambda2 > 0.0);
    CHECK(sd.rho_min == doctest::Approx(1.0 / 11.0));

    CHECK_THROWS_AS(spectral_data(Digraph(2, {{0, 1, 1.0}})), NotStronglyConnected);
}

TEST_CASE("construction errors") {
    CHECK_THROWS_AS(Digraph(2, {{0, 0, 1.0}}), InvalidGraph);
    CHECK_THROWS_AS(Digraph(2, {{0, 1, -1.0}}), InvalidGraph);
    CHECK_THROWS_AS(Digraph(2, {{0, 5, 1.0}}), InvalidGraph);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, 2);
    a(0, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(Digraph{a}, InvalidGraph);
}

TEST_CASE("left eigenvector properties on random strongly connected graphs") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const auto g = random_connected(rng, 2 + trial % 8);
        REQUIRE(is_strongly_connected(g));
        const auto L = laplacian(g);
        const auto rho = left_eigenvector(g);
        CHECK(rho.minCoeff() > 0.0);
        CHECK(rho.sum() == doctest::Approx(1.0).epsilon(1e-14));
        CHECK((rho.transpose() * L).cwiseAbs().maxCoeff() < 1e-10);
        CHECK((rho - null_vector_oracle(L)).cwiseAbs().maxCoeff() < 1e-9);
        CHECK(lambda2(g, rho) > 0.0);
    }
}

TEST_CASE("consensus flow converges to one rho transpose") {
    const auto g = example_network();
    const Eigen::MatrixXd flow = (-50.0 * laplacian(g)).exp();
    const Eigen::MatrixXd limit = Eigen::VectorXd::Ones(5) * left_eigenvector(g).transpose();
    CHECK((flow - limit).cwiseAbs().maxCoeff() < 1e-12);
}
