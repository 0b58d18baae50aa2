#pragma once

#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ooc {

struct Interval {
    double lo = -10.0;
    double hi = 10.0;
};

/// s -> a (s - b)^2
struct Quadratic {
    double a;
    double b;
};

/// s -> c1 exp(k1 s) + c2 exp(k2 s)
struct ExpSum {
    double c1, k1, c2, k2;
};

/// The five closed-form costs of the damping-spring example, by index 1..5.
struct NamedComposite {
    int index;
};

class CostFunction {
public:
    using Kind = std::variant<Quadratic, ExpSum, NamedComposite>;

    CostFunction(Kind kind, Interval domain_hint = {});

    static CostFunction quadratic(double a, double b, Interval domain = {});
    static CostFunction exp_sum(double c1, double k1, double c2, double k2, Interval domain = {});
    // name is one of "ex2_f1" ... "ex2_f5"
    static CostFunction named(std::string_view name, Interval domain = {});

    double value(double s) const;
    double grad(double s) const;

    const Kind& kind() const noexcept { return kind_; }
    const Interval& domain_hint() const noexcept { return domain_; }
    std::string describe() const;

private:
    Kind kind_;
    Interval domain_;
};

inline double grad(const CostFunction& c, double s) { return c.grad(s); }

struct ConvexityBounds {
    double varpi;     // smallest strong-convexity modulus over agents
    double iota_bar;  // largest gradient Lipschitz constant over agents
};

/// Sum of gradients at s.
double aggregate_gradient(std::span<const CostFunction> costs, double s);

/// Minimizer of the summed cost by bisection on the monotone aggregate
/// gradient. Throws BracketNotFound when no sign change is located.
double global_optimum(std::span<const CostFunction> costs);

/// Grid scan of central-difference second derivatives (step 1e-3, at least
/// 2001 points). Throws NonConvexDetected when curvature drops below 1e-9.
ConvexityBounds convexity_bounds(std::span<const CostFunction> costs, Interval interval);

/// |analytic gradient - central difference (h = 1e-6)| at s.
double check_gradient(const CostFunction& c, double s);

/// Costs 0.1 (s - i)^2, i = 1..n.
std::vector<CostFunction> example1_costs(std::size_t n = 5, Interval domain = {});
/// The five named composite costs.
std::vector<CostFunction> example2_costs(Interval domain = {});

}  // namespace ooc
