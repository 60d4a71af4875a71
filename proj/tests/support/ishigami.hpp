#pragma once

#include "campus/rng.hpp"
#include "campus/sensitivity.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace campus::testing {

/// f(x) = sin x1 + a sin^2 x2 + b x3^4 sin x1 on [-pi, pi]^3.
struct Ishigami {
    double a = 7.0;
    double b = 0.1;

    double operator()(double x1, double x2, double x3) const
    {
        return std::sin(x1) + a * std::sin(x2) * std::sin(x2) + b * std::pow(x3, 4) * std::sin(x1);
    }

    double variance() const
    {
        const double pi4 = std::pow(std::numbers::pi, 4);
        return a * a / 8.0 + b * pi4 / 5.0 + b * b * pi4 * pi4 / 18.0 + 0.5;
    }

    // Analytic partial variances from the Sobol-Hoeffding decomposition.
    double v1() const
    {
        const double t = 1.0 + b * std::pow(std::numbers::pi, 4) / 5.0;
        return 0.5 * t * t;
    }
    double v2() const { return a * a / 8.0; }
    double v13() const { return b * b * std::pow(std::numbers::pi, 8) * (1.0 / 18.0 - 1.0 / 50.0); }

    std::array<double, 3> first_order() const { return {v1() / variance(), v2() / variance(), 0.0}; }
    std::array<double, 3> total_order() const
    {
        return {(v1() + v13()) / variance(), v2() / variance(), v13() / variance()};
    }

    static ParameterSpace space()
    {
        ParameterSpace s;
        s.names = {"x1", "x2", "x3"};
        s.context_index = {0, 1, 2};
        s.bounds.assign(3, Interval{-std::numbers::pi, std::numbers::pi});
        s.baseline = {0.0, 0.0, 0.0};
        return s;
    }

    Vector evaluate(const Matrix& x) const
    {
        Vector y(x.rows());
        for (Eigen::Index i = 0; i < x.rows(); ++i) y(i) = (*this)(x(i, 0), x(i, 1), x(i, 2));
        return y;
    }

    SobolIndices estimate(int n, std::uint64_t seed) const
    {
        RngStream rng(seed);
        const auto design = sobol_design(space(), n, rng);
        std::vector<Vector> f_ab;
        for (const auto& m : design.ab) f_ab.push_back(evaluate(m));
        return sobol_indices(evaluate(design.a), evaluate(design.b), f_ab);
    }
};

} // namespace campus::testing
