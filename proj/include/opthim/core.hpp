#pragma once

/// \file core.hpp
///
/// Objective contract, evaluation counting and the finite-difference
/// derivative oracle shared by every solver and test.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace opthim {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// ================================ Errors =================================

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
  public:
    using Error::Error;
};

/// A Hessian was requested from an objective that does not provide one.
class MissingHessianError : public Error {
  public:
    using Error::Error;
};

// =============================== Objective ===============================

/// A smooth function f: R^n -> R with analytic first derivatives and an
/// optional analytic Hessian.
///
/// All callables must be deterministic in x and safe to call concurrently.
class Objective {
  public:
    using ValueFn    = std::function<double(Vector const&)>;
    using GradientFn = std::function<Vector(Vector const&)>;
    using HessianFn  = std::function<Matrix(Vector const&)>;

    Objective(std::string name, Eigen::Index dimension, ValueFn value,
              GradientFn gradient, HessianFn hessian = {})
        : _name{std::move(name)}
        , _dimension{dimension}
        , _value{std::move(value)}
        , _gradient{std::move(gradient)}
        , _hessian{std::move(hessian)}
    {
        if (_dimension <= 0) {
            throw DimensionError{"objective '" + _name
                                 + "': dimension must be positive"};
        }
        if (!_value || !_gradient) {
            throw Error{"objective '" + _name
                        + "': value and gradient callables are required"};
        }
    }

    [[nodiscard]] auto name() const noexcept -> std::string const& { return _name; }
    [[nodiscard]] auto dimension() const noexcept -> Eigen::Index { return _dimension; }
    [[nodiscard]] auto has_hessian() const noexcept -> bool { return static_cast<bool>(_hessian); }

    // Raw, uncounted access. Solvers go through evaluate() instead.
    [[nodiscard]] auto value(Vector const& x) const -> double
    {
        check_dimension(x);
        return _value(x);
    }

    [[nodiscard]] auto gradient(Vector const& x) const -> Vector
    {
        check_dimension(x);
        Vector g = _gradient(x);
        if (g.size() != _dimension) {
            throw DimensionError{"objective '" + _name
                                 + "': gradient has wrong length"};
        }
        return g;
    }

    [[nodiscard]] auto hessian(Vector const& x) const -> Matrix
    {
        check_dimension(x);
        if (!_hessian) {
            throw MissingHessianError{"objective '" + _name
                                      + "' does not provide a Hessian"};
        }
        Matrix h = _hessian(x);
        if (h.rows() != _dimension || h.cols() != _dimension) {
            throw DimensionError{"objective '" + _name
                                 + "': Hessian has wrong shape"};
        }
        return h;
    }

    void check_dimension(Vector const& x) const
    {
        if (x.size() != _dimension) {
            throw DimensionError{"objective '" + _name + "': expected a point of dimension "
                                 + std::to_string(_dimension) + ", got "
                                 + std::to_string(x.size())};
        }
    }

  private:
    std::string  _name;
    Eigen::Index _dimension;
    ValueFn      _value;
    GradientFn   _gradient;
    HessianFn    _hessian;
};

// ============================ Evaluation counts ===========================

struct EvalCounters {
    std::int64_t func_evals = 0;
    std::int64_t grad_evals = 0;
    std::int64_t hess_evals = 0;

    friend auto operator==(EvalCounters const&, EvalCounters const&) -> bool = default;
};

/// Which pieces of derivative information to compute.
struct Want {
    bool value    = false;
    bool gradient = false;
    bool hessian  = false;
};

inline constexpr Want want_value{true, false, false};
inline constexpr Want want_gradient{false, true, false};
inline constexpr Want want_value_gradient{true, true, false};

struct Evaluation {
    std::optional<double> value;
    std::optional<Vector> gradient;
    std::optional<Matrix> hessian;
};

/// Evaluates the requested pieces at x and bumps the matching counters by
/// exactly one each. Validation happens before any counter is touched.
inline auto evaluate(Objective const& obj, Vector const& x,
                     EvalCounters& counters, Want want) -> Evaluation
{
    obj.check_dimension(x);
    if (want.hessian && !obj.has_hessian()) {
        throw MissingHessianError{"objective '" + obj.name()
                                  + "' does not provide a Hessian"};
    }
    Evaluation out;
    if (want.value) {
        out.value = obj.value(x);
        ++counters.func_evals;
    }
    if (want.gradient) {
        out.gradient = obj.gradient(x);
        ++counters.grad_evals;
    }
    if (want.hessian) {
        out.hessian = obj.hessian(x);
        ++counters.hess_evals;
    }
    return out;
}

inline auto eval_value(Objective const& obj, Vector const& x, EvalCounters& c) -> double
{
    return *evaluate(obj, x, c, want_value).value;
}

inline auto eval_gradient(Objective const& obj, Vector const& x, EvalCounters& c) -> Vector
{
    return *std::move(evaluate(obj, x, c, want_gradient).gradient);
}

inline auto eval_hessian(Objective const& obj, Vector const& x, EvalCounters& c) -> Matrix
{
    return *std::move(evaluate(obj, x, c, Want{false, false, true}).hessian);
}

/// A point together with its cached value and gradient.
struct Iterate {
    Vector       x;
    double       f = 0.0;
    Vector       g;
    std::int64_t k = 0;
};

// ========================= Finite-difference oracle ========================
//
// Oracle only: these never touch a run's EvalCounters.

/// Central-difference gradient: (f(x + h e_i) - f(x - h e_i)) / 2h.
inline auto fd_gradient(Objective const& obj, Vector const& x, double h) -> Vector
{
    obj.check_dimension(x);
    if (!(h > 0.0)) { throw std::invalid_argument{"fd_gradient: h must be positive"}; }
    auto const n = obj.dimension();
    Vector     g(n);
    Vector     probe = x;
    for (Eigen::Index i = 0; i < n; ++i) {
        probe[i]         = x[i] + h;
        double const fp  = obj.value(probe);
        probe[i]         = x[i] - h;
        double const fm  = obj.value(probe);
        probe[i]         = x[i];
        g[i]             = (fp - fm) / (2.0 * h);
    }
    return g;
}

/// Central differences of the analytic gradient, symmetrized.
inline auto fd_hessian(Objective const& obj, Vector const& x, double h) -> Matrix
{
    obj.check_dimension(x);
    if (!(h > 0.0)) { throw std::invalid_argument{"fd_hessian: h must be positive"}; }
    auto const n = obj.dimension();
    Matrix     m(n, n);
    Vector     probe = x;
    for (Eigen::Index i = 0; i < n; ++i) {
        probe[i]       = x[i] + h;
        Vector const gp = obj.gradient(probe);
        probe[i]       = x[i] - h;
        Vector const gm = obj.gradient(probe);
        probe[i]       = x[i];
        m.col(i)       = (gp - gm) / (2.0 * h);
    }
    return 0.5 * (m + m.transpose());
}

/// ||a - b|| / max(1, ||b||), the error metric of every derivative check.
template <class A, class B>
auto relative_error(Eigen::MatrixBase<A> const& a, Eigen::MatrixBase<B> const& b) -> double
{
    return (a - b).norm() / std::max(1.0, b.norm());
}

} // namespace opthim
