#pragma once

/// \file benchmarks.hpp
///
/// The eleven-function evaluation suite: seeded quadratics, SPD quartics,
/// chained Rosenbrock, the exponential-quartic hybrid and generalized humps.
/// Every function carries an analytic gradient and Hessian.

#include "core.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace opthim {

class UnknownProblemError : public Error {
  public:
    using Error::Error;
};

struct BenchmarkSpec {
    std::string  name;
    Eigen::Index dimension = 0;
    Objective    objective;
    /// Nominal starting point.
    Vector x0;
    /// Half-width of the seeded uniform box perturbation applied by
    /// initial_point(); zero means the start is fixed.
    double perturbation = 0.0;
    /// Seed of the random instance (quadratics); 0 for deterministic ones.
    std::uint64_t generator_seed = 0;

    [[nodiscard]] auto initial_point(std::uint64_t seed) const -> Vector
    {
        if (perturbation == 0.0) { return x0; }
        std::mt19937_64                        rng{seed};
        std::uniform_real_distribution<double> u{-perturbation, perturbation};
        Vector                                 x = x0;
        for (Eigen::Index i = 0; i < x.size(); ++i) { x[i] += u(rng); }
        return x;
    }
};

// ============================== Quadratics ================================

/// Data of f(x) = x'Qx / 2 + b'x, shifted by a constant so that f(x*) = 0.
///
/// The value is evaluated in the eigenbasis as sum_i lambda_i z_i^2 / 2 with
/// z = U'(x - x*). Expanding the uncentred form cancels terms of size
/// kappa * |x|^2, and even the centred product (x - x*)'Q(x - x*) carries
/// rounding error that grows with kappa. Either leaves noise above the
/// decrease a step makes once the gradient is near 1e-6, which stalls line
/// searches and scrambles the trust-region ratio.
struct QuadraticData {
    Matrix q;
    Vector b;
    Vector x_star;
    Matrix u;
    Vector lambda;
};

/// Q = U diag(lambda) U' with lambda log-spaced on [1, kappa] and U the
/// orthogonal factor of a seeded standard-normal matrix; b standard normal.
inline auto generate_quadratic(Eigen::Index n, double kappa, std::uint64_t seed) -> QuadraticData
{
    if (n < 2) { throw std::invalid_argument{"make_quadratic: n must be at least 2"}; }
    if (!(kappa >= 1.0)) { throw std::invalid_argument{"make_quadratic: kappa must be >= 1"}; }

    std::mt19937_64                  rng{seed};
    std::normal_distribution<double> normal{0.0, 1.0};
    Matrix                           z(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) { z(i, j) = normal(rng); }
    }
    Vector b(n);
    for (Eigen::Index i = 0; i < n; ++i) { b[i] = normal(rng); }

    Eigen::HouseholderQR<Matrix> qr{z};
    Matrix const                 u = qr.householderQ() * Matrix::Identity(n, n);

    Vector lambda(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        lambda[i] = std::pow(kappa, static_cast<double>(i) / static_cast<double>(n - 1));
    }
    Matrix q = u * lambda.asDiagonal() * u.transpose();
    q        = 0.5 * (q + q.transpose()).eval();
    Vector x_star = -(u * (u.transpose() * b).cwiseQuotient(lambda));
    return QuadraticData{std::move(q), std::move(b), std::move(x_star), u, std::move(lambda)};
}

inline auto make_quadratic_objective(std::string name, std::shared_ptr<QuadraticData const> data)
    -> Objective
{
    auto const n = data->b.size();
    return Objective{
        std::move(name), n,
        [data](Vector const& x) {
            Vector const z = data->u.transpose() * (x - data->x_star);
            return 0.5 * data->lambda.dot(z.cwiseAbs2());
        },
        [data](Vector const& x) -> Vector {
            Vector const z = data->u.transpose() * (x - data->x_star);
            return data->u * data->lambda.cwiseProduct(z);
        },
        [data](Vector const&) -> Matrix { return data->q; }};
}

inline auto make_quadratic(Eigen::Index n, double kappa, std::uint64_t seed,
                           std::string name = "Quadratic") -> BenchmarkSpec
{
    auto data = std::make_shared<QuadraticData const>(generate_quadratic(n, kappa, seed));
    auto obj = make_quadratic_objective(name, std::move(data));
    return BenchmarkSpec{std::move(name), n, std::move(obj), Vector::Ones(n), 0.0, seed};
}

// =============================== Quartics =================================

/// Fixed SPD (strictly diagonally dominant) matrix of the quartic family.
inline auto quartic_matrix() -> Matrix
{
    Matrix a(4, 4);
    // clang-format off
    a << 5.0, 1.0, 0.0, 0.5,
         1.0, 4.0, 1.0, 0.0,
         0.0, 1.0, 3.0, 1.0,
         0.5, 0.0, 1.0, 2.0;
    // clang-format on
    return a;
}

inline constexpr double quartic_sigma_a = 1e-4;
inline constexpr double quartic_sigma_b = 1e4;

/// f(x) = x'x / 2 + (sigma / 4) (x'Ax)^2.
inline auto make_quartic_objective(std::string name, double sigma) -> Objective
{
    auto const a = std::make_shared<Matrix const>(quartic_matrix());
    return Objective{
        std::move(name), 4,
        [a, sigma](Vector const& x) {
            double const q = x.dot(*a * x);
            return 0.5 * x.squaredNorm() + 0.25 * sigma * q * q;
        },
        [a, sigma](Vector const& x) -> Vector {
            Vector const ax = *a * x;
            return x + sigma * x.dot(ax) * ax;
        },
        [a, sigma](Vector const& x) -> Matrix {
            Vector const ax = *a * x;
            Matrix       h  = sigma * (x.dot(ax) * *a + 2.0 * ax * ax.transpose());
            h.diagonal().array() += 1.0;
            return h;
        }};
}

inline auto make_quartic(char variant) -> BenchmarkSpec
{
    if (variant != 'A' && variant != 'B') {
        throw std::invalid_argument{"make_quartic: variant must be 'A' or 'B'"};
    }
    std::string name = std::string{"Quartic_"} + variant;
    double      sigma = variant == 'A' ? quartic_sigma_a : quartic_sigma_b;
    return BenchmarkSpec{name, 4, make_quartic_objective(name, sigma), Vector::Ones(4), 0.0, 0};
}

// ============================== Rosenbrock ================================

/// Chained form sum_i 100 (x_{i+1} - x_i^2)^2 + (1 - x_i)^2.
inline auto make_rosenbrock_objective(Eigen::Index n, std::string name = "Rosenbrock")
    -> Objective
{
    if (n < 2) { throw std::invalid_argument{"make_rosenbrock: n must be at least 2"}; }
    return Objective{
        std::move(name), n,
        [](Vector const& x) {
            double f = 0.0;
            for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
                double const t = x[i + 1] - x[i] * x[i];
                double const u = 1.0 - x[i];
                f += 100.0 * t * t + u * u;
            }
            return f;
        },
        [](Vector const& x) -> Vector {
            Vector g = Vector::Zero(x.size());
            for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
                double const t = x[i + 1] - x[i] * x[i];
                g[i] += -400.0 * x[i] * t - 2.0 * (1.0 - x[i]);
                g[i + 1] += 200.0 * t;
            }
            return g;
        },
        [](Vector const& x) -> Matrix {
            auto const n = x.size();
            Matrix     h = Matrix::Zero(n, n);
            for (Eigen::Index i = 0; i + 1 < n; ++i) {
                h(i, i) += 1200.0 * x[i] * x[i] - 400.0 * x[i + 1] + 2.0;
                h(i + 1, i + 1) += 200.0;
                h(i, i + 1) = h(i + 1, i) = -400.0 * x[i];
            }
            return h;
        }};
}

inline auto make_rosenbrock(Eigen::Index n, std::string name = "Rosenbrock") -> BenchmarkSpec
{
    Vector x0 = Vector::Ones(n);
    x0[0]     = -1.0;
    return BenchmarkSpec{name, n, make_rosenbrock_objective(n, name), x0, 0.0, 0};
}

// ============================== Exponential ===============================

/// (e^x0 - 1) / (e^x0 + 1) + 0.1 e^-x0 + sum_{i>=1} (x_i - 1)^4.
///
/// The first term is tanh(x0 / 2), which is how it is evaluated.
inline auto make_exponential(Eigen::Index n, std::string name = "Exponential") -> BenchmarkSpec
{
    if (n < 2) { throw std::invalid_argument{"make_exponential: n must be at least 2"}; }
    Objective obj{
        name, n,
        [](Vector const& x) {
            double f = std::tanh(0.5 * x[0]) + 0.1 * std::exp(-x[0]);
            for (Eigen::Index i = 1; i < x.size(); ++i) { f += std::pow(x[i] - 1.0, 4); }
            return f;
        },
        [](Vector const& x) -> Vector {
            Vector       g(x.size());
            double const t = std::tanh(0.5 * x[0]);
            g[0]           = 0.5 * (1.0 - t * t) - 0.1 * std::exp(-x[0]);
            for (Eigen::Index i = 1; i < x.size(); ++i) { g[i] = 4.0 * std::pow(x[i] - 1.0, 3); }
            return g;
        },
        [](Vector const& x) -> Matrix {
            Matrix       h = Matrix::Zero(x.size(), x.size());
            double const t = std::tanh(0.5 * x[0]);
            h(0, 0)        = -0.5 * (1.0 - t * t) * t + 0.1 * std::exp(-x[0]);
            for (Eigen::Index i = 1; i < x.size(); ++i) {
                h(i, i) = 12.0 * (x[i] - 1.0) * (x[i] - 1.0);
            }
            return h;
        }};
    return BenchmarkSpec{std::move(name), n, std::move(obj), Vector::Zero(n), 0.0, 0};
}

// =============================== Genhumps =================================

inline auto make_genhumps_objective(Eigen::Index n, std::string name = "Genhumps") -> Objective
{
    // Each term couples (a, b) = (x_{i-1}, x_i):
    //   sin^2(2a) sin^2(2b) + 0.05 (a^2 + b^2)
    return Objective{
        std::move(name), n,
        [](Vector const& x) {
            double f = 0.0;
            for (Eigen::Index i = 1; i < x.size(); ++i) {
                double const sa = std::sin(2.0 * x[i - 1]);
                double const sb = std::sin(2.0 * x[i]);
                f += sa * sa * sb * sb + 0.05 * (x[i - 1] * x[i - 1] + x[i] * x[i]);
            }
            return f;
        },
        [](Vector const& x) -> Vector {
            Vector g = Vector::Zero(x.size());
            for (Eigen::Index i = 1; i < x.size(); ++i) {
                double const a  = x[i - 1];
                double const b  = x[i];
                double const sa = std::sin(2.0 * a);
                double const sb = std::sin(2.0 * b);
                g[i - 1] += 2.0 * std::sin(4.0 * a) * sb * sb + 0.1 * a;
                g[i] += 2.0 * std::sin(4.0 * b) * sa * sa + 0.1 * b;
            }
            return g;
        },
        [](Vector const& x) -> Matrix {
            auto const n = x.size();
            Matrix     h = Matrix::Zero(n, n);
            for (Eigen::Index i = 1; i < n; ++i) {
                double const a  = x[i - 1];
                double const b  = x[i];
                double const sa = std::sin(2.0 * a);
                double const sb = std::sin(2.0 * b);
                h(i - 1, i - 1) += 8.0 * std::cos(4.0 * a) * sb * sb + 0.1;
                h(i, i) += 8.0 * std::cos(4.0 * b) * sa * sa + 0.1;
                double const cross = 4.0 * std::sin(4.0 * a) * std::sin(4.0 * b);
                h(i - 1, i) += cross;
                h(i, i - 1) += cross;
            }
            return h;
        }};
}

inline auto make_genhumps() -> BenchmarkSpec
{
    Vector x0 = Vector::Constant(5, 506.2);
    x0[0]     = -506.2;
    return BenchmarkSpec{"Genhumps", 5, make_genhumps_objective(5), x0, 0.0, 0};
}

// =============================== Registry =================================

struct QuadraticInstance {
    std::string_view name;
    Eigen::Index     n;
    double           kappa;
    std::uint64_t    seed;
};

inline constexpr std::array<QuadraticInstance, 4> quadratic_instances{{
    {"Quad_A", 10, 1e2, 20250101},
    {"Quad_B", 100, 1e4, 20250102},
    {"Quad_C", 1000, 1e2, 20250103},
    {"Quad_D", 1000, 1e4, 20250104},
}};

/// Half-width of the Rosen_A start perturbation around (-1, 1, 1).
inline constexpr double rosen_a_perturbation = 0.25;

inline auto benchmark_names() -> std::vector<std::string> const&
{
    static std::vector<std::string> const names{
        "Quad_A",  "Quad_B",  "Quad_C", "Quad_D", "Quartic_A", "Quartic_B",
        "Rosen_A", "Rosen_B", "Exp_A",  "Exp_B",  "Genhumps"};
    return names;
}

namespace detail {
inline auto build_benchmark(std::string const& name) -> BenchmarkSpec
{
    for (auto const& q : quadratic_instances) {
        if (name == q.name) { return make_quadratic(q.n, q.kappa, q.seed, name); }
    }
    if (name == "Quartic_A") { return make_quartic('A'); }
    if (name == "Quartic_B") { return make_quartic('B'); }
    if (name == "Rosen_A") {
        auto spec         = make_rosenbrock(3, name);
        spec.perturbation = rosen_a_perturbation;
        return spec;
    }
    if (name == "Rosen_B") { return make_rosenbrock(100, name); }
    if (name == "Exp_A") { return make_exponential(10, name); }
    if (name == "Exp_B") { return make_exponential(100, name); }
    if (name == "Genhumps") { return make_genhumps(); }

    std::string valid;
    for (auto const& n : benchmark_names()) { valid += (valid.empty() ? "" : ", ") + n; }
    throw UnknownProblemError{"unknown problem '" + name + "'; valid names: " + valid};
}
} // namespace detail

/// Canonical suite instance by name. Instances are built once and shared;
/// they are immutable afterwards.
inline auto registry(std::string const& name) -> std::shared_ptr<BenchmarkSpec const>
{
    static std::mutex                                                  mutex;
    static std::map<std::string, std::shared_ptr<BenchmarkSpec const>> cache;
    {
        std::lock_guard lock{mutex};
        if (auto it = cache.find(name); it != cache.end()) { return it->second; }
    }
    auto spec = std::make_shared<BenchmarkSpec const>(detail::build_benchmark(name));
    std::lock_guard lock{mutex};
    return cache.try_emplace(name, std::move(spec)).first->second;
}

} // namespace opthim
