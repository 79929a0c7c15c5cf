#pragma once

/// \file directions.hpp
///
/// Search directions for the line-search family: steepest descent, damped
/// Newton, and the BFGS / DFP / L-BFGS inverse-Hessian approximations.

#include "core.hpp"

#include <cmath>
#include <deque>
#include <string>
#include <vector>

namespace opthim {

class SingularHessianError : public Error {
  public:
    using Error::Error;
};

inline auto steepest_descent(Vector const& g) -> Vector { return -g; }

// ============================ Newton directions ===========================

struct DampedMatrix {
    Matrix              matrix;
    double              tau = 0.0;
    Eigen::LLT<Matrix>  factor;
};

/// Adds tau * I to a symmetric matrix until a Cholesky factorization
/// succeeds. tau starts at 1e-3 * (1 + max|A_ii|) and doubles per failure;
/// giving up past 1e10 * (1 + max|A_ii|).
inline auto damp_to_spd(Matrix const& a) -> DampedMatrix
{
    if (a.rows() != a.cols()) { throw DimensionError{"damp_to_spd: matrix is not square"}; }
    if (!a.allFinite()) { throw SingularHessianError{"damp_to_spd: matrix has non-finite entries"}; }

    DampedMatrix out{a, 0.0, Eigen::LLT<Matrix>{a}};
    if (out.factor.info() == Eigen::Success) { return out; }

    double const scale = 1.0 + a.diagonal().cwiseAbs().maxCoeff();
    double const cap   = 1e10 * scale;
    for (double tau = 1e-3 * scale; tau <= cap; tau *= 2.0) {
        out.matrix = a;
        out.matrix.diagonal().array() += tau;
        out.factor.compute(out.matrix);
        if (out.factor.info() == Eigen::Success) {
            out.tau = tau;
            return out;
        }
    }
    throw SingularHessianError{"damp_to_spd: no positive-definite shift up to "
                               + std::to_string(cap)};
}

/// Solves (H + tau I) p = -g with tau chosen by damp_to_spd.
inline auto newton_direction(Matrix const& hess, Vector const& g) -> Vector
{
    if (hess.rows() != g.size()) { throw DimensionError{"newton_direction: size mismatch"}; }
    auto const damped = damp_to_spd(hess);
    return damped.factor.solve(-g);
}

// ========================== Quasi-Newton updates ==========================

/// True when |y's| <= eps * ||y|| * ||s||, i.e. the pair must be skipped.
inline auto curvature_skip(Vector const& s, Vector const& y, double eps_sy) -> bool
{
    return std::abs(y.dot(s)) <= eps_sy * y.norm() * s.norm();
}

/// Pair admissible for a positive-definite-preserving update: not skipped
/// by the guard and y's > 0.
inline auto curvature_pair_ok(Vector const& s, Vector const& y, double eps_sy) -> bool
{
    return !curvature_skip(s, y, eps_sy) && y.dot(s) > 0.0;
}

/// Inverse BFGS update
///     H+ = (I - rho s y') H (I - rho y s') + rho s s',  rho = 1 / y's,
/// expanded so that it costs O(n^2).
inline auto bfgs_update(Matrix const& h, Vector const& s, Vector const& y) -> Matrix
{
    double const rho = 1.0 / y.dot(s);
    Vector const hy  = h * y;
    double const yhy = y.dot(hy);
    Matrix out       = h;
    out.noalias() -= rho * (s * hy.transpose() + hy * s.transpose());
    out.noalias() += (rho * rho * yhy + rho) * (s * s.transpose());
    return out;
}

/// Inverse DFP update  H+ = H + s s' / s'y - H y y' H / y'H y.
inline auto dfp_update(Matrix const& h, Vector const& s, Vector const& y) -> Matrix
{
    Vector const hy  = h * y;
    double const yhy = y.dot(hy);
    Matrix out       = h;
    out.noalias() += (s * s.transpose()) / s.dot(y);
    out.noalias() -= (hy * hy.transpose()) / yhy;
    return out;
}

enum class InverseUpdate { bfgs, dfp };

/// Dense inverse-Hessian approximation used by the BFGS and DFP line-search
/// methods.
struct InverseHessianState {
    Matrix h;
    double eps_sy          = 1e-6;
    int    skipped_updates = 0;

    explicit InverseHessianState(Eigen::Index n, double eps = 1e-6)
        : h{Matrix::Identity(n, n)}, eps_sy{eps}
    {}

    /// Returns false (and counts a skip) when the pair is rejected.
    auto update(InverseUpdate kind, Vector const& s, Vector const& y) -> bool
    {
        if (!curvature_pair_ok(s, y, eps_sy)) {
            ++skipped_updates;
            return false;
        }
        h = kind == InverseUpdate::bfgs ? bfgs_update(h, s, y) : dfp_update(h, s, y);
        return true;
    }

    [[nodiscard]] auto direction(Vector const& g) const -> Vector { return -(h * g); }

    void reset() { h.setIdentity(); }
};

// ================================ L-BFGS ==================================

enum class LbfgsScaling { gamma, identity };

/// Ring buffer of the m most recent curvature pairs, oldest first.
class LbfgsMemory {
  public:
    struct Pair {
        Vector s;
        Vector y;
        double rho; // 1 / y's
    };

    explicit LbfgsMemory(std::size_t capacity = 10, double eps_sy = 1e-6)
        : _capacity{capacity}, _eps_sy{eps_sy}
    {
        if (_capacity == 0) { throw std::invalid_argument{"L-BFGS memory must be positive"}; }
    }

    /// Appends (s, y) unless the curvature guard rejects it, evicting the
    /// oldest pair when full. Returns whether the pair was stored.
    auto push(Vector s, Vector y) -> bool
    {
        if (!curvature_pair_ok(s, y, _eps_sy)) {
            ++_skipped;
            return false;
        }
        double const rho = 1.0 / y.dot(s);
        _pairs.push_back(Pair{std::move(s), std::move(y), rho});
        if (_pairs.size() > _capacity) { _pairs.pop_front(); }
        return true;
    }

    void clear() { _pairs.clear(); }

    [[nodiscard]] auto size() const noexcept -> std::size_t { return _pairs.size(); }
    [[nodiscard]] auto capacity() const noexcept -> std::size_t { return _capacity; }
    [[nodiscard]] auto empty() const noexcept -> bool { return _pairs.empty(); }
    [[nodiscard]] auto skipped_updates() const noexcept -> int { return _skipped; }
    [[nodiscard]] auto pairs() const noexcept -> std::deque<Pair> const& { return _pairs; }

  private:
    std::size_t      _capacity;
    double           _eps_sy;
    int              _skipped = 0;
    std::deque<Pair> _pairs;
};

/// -H g by the two-loop recursion, with H0 = gamma I where
/// gamma = s'y / y'y of the newest pair (or 1 when empty or when identity
/// scaling is requested).
inline auto lbfgs_direction(LbfgsMemory const& mem, Vector const& g,
                            LbfgsScaling scaling = LbfgsScaling::gamma) -> Vector
{
    auto const& pairs = mem.pairs();
    Vector      q     = g;
    std::vector<double> alpha(pairs.size());
    for (std::size_t i = pairs.size(); i-- > 0;) {
        alpha[i] = pairs[i].rho * pairs[i].s.dot(q);
        q -= alpha[i] * pairs[i].y;
    }
    double gamma = 1.0;
    if (scaling == LbfgsScaling::gamma && !pairs.empty()) {
        auto const& last = pairs.back();
        gamma            = last.s.dot(last.y) / last.y.squaredNorm();
    }
    Vector r = gamma * q;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        double const beta = pairs[i].rho * pairs[i].y.dot(r);
        r += (alpha[i] - beta) * pairs[i].s;
    }
    return -r;
}

} // namespace opthim
