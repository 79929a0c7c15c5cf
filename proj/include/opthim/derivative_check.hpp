#pragma once

/// \file derivative_check.hpp
///
/// Compares analytic derivatives of a benchmark against the
/// finite-difference oracle at seeded sample points.

#include "benchmarks.hpp"
#include "core.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace opthim {

struct DerivativeCheckOptions {
    int           gradient_points = 10;
    int           hessian_points  = 5;
    double        gradient_step   = 1e-6;
    double        hessian_step    = 1e-5;
    double        gradient_tol    = 1e-5;
    double        hessian_tol     = 1e-4;
    /// Sample points are start + U(-spread, spread)^n.
    double        spread = 1.0;
    std::uint64_t seed   = 12345;
};

struct DerivativeCheckResult {
    std::string         problem;
    std::vector<double> gradient_errors;
    std::vector<double> hessian_errors; // empty when no Hessian is provided
    double              gradient_tol = 0.0;
    double              hessian_tol  = 0.0;

    [[nodiscard]] auto max_gradient_error() const -> double
    {
        double m = 0.0;
        for (double e : gradient_errors) { m = std::max(m, e); }
        return m;
    }

    [[nodiscard]] auto max_hessian_error() const -> double
    {
        double m = 0.0;
        for (double e : hessian_errors) { m = std::max(m, e); }
        return m;
    }

    [[nodiscard]] auto passed() const -> bool
    {
        return max_gradient_error() <= gradient_tol && max_hessian_error() <= hessian_tol;
    }
};

/// Seeded sample points around the benchmark's nominal start.
inline auto sample_points(BenchmarkSpec const& spec, int count, double spread, std::uint64_t seed)
    -> std::vector<Vector>
{
    std::mt19937_64                        rng{seed};
    std::uniform_real_distribution<double> u{-spread, spread};
    std::vector<Vector>                    points;
    for (int i = 0; i < count; ++i) {
        Vector x = spec.x0;
        for (Eigen::Index j = 0; j < x.size(); ++j) { x[j] += u(rng); }
        points.push_back(std::move(x));
    }
    return points;
}

inline auto check_derivatives(BenchmarkSpec const& spec, DerivativeCheckOptions const& opt = {})
    -> DerivativeCheckResult
{
    DerivativeCheckResult out;
    out.problem      = spec.name;
    out.gradient_tol = opt.gradient_tol;
    out.hessian_tol  = opt.hessian_tol;
    auto const& obj  = spec.objective;

    for (auto const& x : sample_points(spec, opt.gradient_points, opt.spread, opt.seed)) {
        out.gradient_errors.push_back(
            relative_error(obj.gradient(x), fd_gradient(obj, x, opt.gradient_step)));
    }
    if (obj.has_hessian()) {
        for (auto const& x : sample_points(spec, opt.hessian_points, opt.spread, opt.seed + 1)) {
            out.hessian_errors.push_back(
                relative_error(obj.hessian(x), fd_hessian(obj, x, opt.hessian_step)));
        }
    }
    return out;
}

} // namespace opthim
