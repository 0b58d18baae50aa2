#include "ooc/costs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ooc/errors.hpp"

namespace ooc {

namespace {

double composite_value(int k, double s) {
    const double s2 = s * s;
    switch (k) {
        case 1: return 0.25 * std::exp(-0.2 * s) + 0.5 * std::exp(0.5 * s);
        case 2: return 0.5 * (s - 2.0) * (s - 2.0) + std::exp(0.1 * s);
        case 3: return 0.2 * s * std::log1p(s2) + s2;
        case 4: return 0.4 * s / std::sqrt(1.0 + s2) + 0.5 * s2;
        case 5: return 0.6 * s2 * (std::log(s2 + 0.5) + 1.0) + 0.3 * s2 / std::sqrt(s2 + 5.0);
    }
    throw InvalidArgument("composite cost index out of range");
}

double composite_grad(int k, double s) {
    const double s2 = s * s;
    switch (k) {
        case 1: return -0.05 * std::exp(-0.2 * s) + 0.25 * std::exp(0.5 * s);
        case 2: return (s - 2.0) + 0.1 * std::exp(0.1 * s);
        case 3: return 0.2 * std::log1p(s2) + 0.4 * s2 / (1.0 + s2) + 2.0 * s;
        case 4: return 0.4 / std::pow(1.0 + s2, 1.5) + s;
        case 5:
            return 1.2 * s * (std::log(s2 + 0.5) + 1.0) + 1.2 * s * s2 / (s2 + 0.5) +
                   0.3 * s * (s2 + 10.0) / std::pow(s2 + 5.0, 1.5);
    }
    throw InvalidArgument("composite cost index out of range");
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

}  // namespace

CostFunction::CostFunction(Kind kind, Interval domain_hint) : kind_(kind), domain_(domain_hint) {
    if (!(domain_.lo < domain_.hi)) {
        throw InvalidArgument("cost domain hint must satisfy lo < hi");
    }
    if (auto* c = std::get_if<NamedComposite>(&kind_); c && (c->index < 1 || c->index > 5)) {
        throw InvalidArgument("composite cost index must be in 1..5");
    }
}

CostFunction CostFunction::quadratic(double a, double b, Interval domain) { return {Quadratic{a, b}, domain}; }

CostFunction CostFunction::exp_sum(double c1, double k1, double c2, double k2, Interval domain) {
    return {ExpSum{c1, k1, c2, k2}, domain};
}

CostFunction CostFunction::named(std::string_view name, Interval domain) {
    constexpr std::string_view prefix = "ex2_f";
    if (name.size() == prefix.size() + 1 && name.substr(0, prefix.size()) == prefix) {
        const int k = name.back() - '0';
        if (k >= 1 && k <= 5) {
            return {NamedComposite{k}, domain};
        }
    }
    throw InvalidArgument("unknown named cost '" + std::string(name) + "'");
}

double CostFunction::value(double s) const {
    return std::visit(overloaded{
                          [s](const Quadratic& q) { return q.a * (s - q.b) * (s - q.b); },
                          [s](const ExpSum& e) { return e.c1 * std::exp(e.k1 * s) + e.c2 * std::exp(e.k2 * s); },
                          [s](const NamedComposite& c) { return composite_value(c.index, s); },
                      },
                      kind_);
}

double CostFunction::grad(double s) const {
    return std::visit(overloaded{
                          [s](const Quadratic& q) { return 2.0 * q.a * (s - q.b); },
                          [s](const ExpSum& e) {
                              return e.c1 * e.k1 * std::exp(e.k1 * s) + e.c2 * e.k2 * std::exp(e.k2 * s);
                          },
                          [s](const NamedComposite& c) { return composite_grad(c.index, s); },
                      },
                      kind_);
}

std::string CostFunction::describe() const {
    return std::visit(overloaded{
                          [](const Quadratic& q) {
                              return "quadratic(a=" + std::to_string(q.a) + ", b=" + std::to_string(q.b) + ")";
                          },
                          [](const ExpSum&) { return std::string("exp_sum"); },
                          [](const NamedComposite& c) { return "ex2_f" + std::to_string(c.index); },
                      },
                      kind_);
}

double aggregate_gradient(std::span<const CostFunction> costs, double s) {
    double sum = 0.0;
    for (const auto& c : costs) sum += c.grad(s);
    return sum;
}

double global_optimum(std::span<const CostFunction> costs) {
    if (costs.empty()) {
        throw InvalidArgument("global_optimum needs at least one cost");
    }
    auto G = [&](double s) { return aggregate_gradient(costs, s); };

    // An exact zero only counts when the gradient strictly changes sign
    // around it; underflow (e.g. exp far to the left) is not a minimizer.
    auto stationary = [&](double s) {
        const double d = 1e-6 * std::max(1.0, std::abs(s));
        return G(s) == 0.0 && G(s - d) < 0.0 && G(s + d) > 0.0;
    };

    double lo = -1.0, hi = 1.0;
    constexpr int max_doublings = 60;
    for (int it = 0;; ++it) {
        const double glo = G(lo), ghi = G(hi);
        if (glo < 0.0 && ghi > 0.0) break;
        if (stationary(lo)) return lo;
        if (stationary(hi)) return hi;
        if (it >= max_doublings || !std::isfinite(glo) || !std::isfinite(ghi)) {
            throw BracketNotFound("no sign change of the aggregate gradient found in [" + std::to_string(lo) +
                                  ", " + std::to_string(hi) + "]");
        }
        if (glo >= 0.0) lo *= 2.0;
        if (ghi <= 0.0) hi *= 2.0;
    }

    // Bisect to machine resolution; the gradient map is strictly increasing.
    for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double g = G(mid);
        if (g == 0.0) return mid;
        (g < 0.0 ? lo : hi) = mid;
    }
    return std::abs(G(lo)) <= std::abs(G(hi)) ? lo : hi;
}

ConvexityBounds convexity_bounds(std::span<const CostFunction> costs, Interval interval) {
    if (costs.empty() || !(interval.lo < interval.hi)) {
        throw InvalidArgument("convexity_bounds needs costs and a nonempty interval");
    }
    constexpr double h = 1e-3;
    const auto steps = std::max<long>(2000, static_cast<long>(std::ceil((interval.hi - interval.lo) / h)));
    const double dx = (interval.hi - interval.lo) / static_cast<double>(steps);

    double varpi = std::numeric_limits<double>::infinity();
    double iota = 0.0;
    for (std::size_t a = 0; a < costs.size(); ++a) {
        for (long k = 0; k <= steps; ++k) {
            const double s = interval.lo + dx * static_cast<double>(k);
            const double curv = (costs[a].grad(s + h) - costs[a].grad(s - h)) / (2.0 * h);
            if (!(curv >= 1e-9)) {
                throw NonConvexDetected("cost " + std::to_string(a + 1) + " (" + costs[a].describe() +
                                        ") has curvature " + std::to_string(curv) + " at s = " + std::to_string(s));
            }
            varpi = std::min(varpi, curv);
            iota = std::max(iota, curv);
        }
    }
    return {varpi, std::max(iota, varpi)};
}

double check_gradient(const CostFunction& c, double s) {
    constexpr double h = 1e-6;
    const double fd = (c.value(s + h) - c.value(s - h)) / (2.0 * h);
    return std::abs(c.grad(s) - fd);
}

std::vector<CostFunction> example1_costs(std::size_t n, Interval domain) {
    std::vector<CostFunction> out;
    for (std::size_t i = 1; i <= n; ++i) out.push_back(CostFunction::quadratic(0.1, static_cast<double>(i), domain));
    return out;
}

std::vector<CostFunction> example2_costs(Interval domain) {
    std::vector<CostFunction> out;
    for (int k = 1; k <= 5; ++k) out.emplace_back(NamedComposite{k}, domain);
    return out;
}

}  // namespace ooc
