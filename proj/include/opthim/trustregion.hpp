#pragma once

/// \file trustregion.hpp
///
/// Trust-region building blocks: the quadratic model, Hessian-approximation
/// updates in direct (B) form, the Cauchy and Steihaug-CG subproblem solvers,
/// and the reduction-ratio driven radius control.

#include "core.hpp"
#include "directions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace opthim {

struct TrustRegionParams {
    double delta0    = 1.0;
    double delta_min = 1e-6;
    double delta_max = 1e2;
    /// rho below c1 halves the radius.
    double c1 = 0.25;
    /// rho above c2 doubles the radius.
    double c2 = 0.75;
    /// SR1 skip threshold.
    double c3          = 1e-6;
    double cg_tol      = 1e-6;
    int    cg_max_iter = 10;
    /// A trial point is taken only when rho > eta.
    double eta = 1e-4;

    void validate() const
    {
        auto fail = [](std::string const& what) {
            throw std::invalid_argument{"trust region parameters: " + what};
        };
        if (!(0.0 < delta_min && delta_min <= delta0 && delta0 <= delta_max)) {
            fail("require 0 < delta_min <= delta0 <= delta_max");
        }
        if (!(0.0 <= eta && eta < c1 && c1 < c2 && c2 < 1.0)) {
            fail("require 0 <= eta < c1 < c2 < 1");
        }
        if (!(c3 >= 0.0)) { fail("c3 must be non-negative"); }
        if (!(cg_tol > 0.0)) { fail("cg_tol must be positive"); }
        if (cg_max_iter <= 0) { fail("cg_max_iter must be positive"); }
    }
};

class DegenerateModelError : public Error {
  public:
    using Error::Error;
};

class NumericalBreakdownError : public Error {
  public:
    using Error::Error;
};

// ================================= Model ==================================

/// m(p) = f0 + g'p + p'Bp / 2.
inline auto model_value(double f0, Vector const& g, Matrix const& b, Vector const& p) -> double
{
    if (g.size() != p.size() || b.rows() != p.size() || b.cols() != p.size()) {
        throw DimensionError{"model_value: size mismatch"};
    }
    return f0 + g.dot(p) + 0.5 * p.dot(b * p);
}

// ========================== Subproblem solvers ============================

/// Minimizer of the model along -g inside the ball. Under non-positive
/// curvature along g the step goes straight to the boundary.
inline auto cauchy_step(Vector const& g, Matrix const& b, double delta) -> Vector
{
    double const gnorm = g.norm();
    if (gnorm == 0.0) { throw std::invalid_argument{"cauchy_step: zero gradient"}; }
    if (!(delta > 0.0)) { throw std::invalid_argument{"cauchy_step: radius must be positive"}; }
    double const gbg      = g.dot(b * g);
    double const boundary = delta / gnorm;
    double const alpha    = gbg > 0.0 ? std::min(g.squaredNorm() / gbg, boundary) : boundary;
    return -alpha * g;
}

enum class CgStatus { converged, boundary, neg_curvature, max_iter };

inline auto to_string(CgStatus s) -> std::string
{
    switch (s) {
    case CgStatus::converged: return "converged";
    case CgStatus::boundary: return "boundary";
    case CgStatus::neg_curvature: return "neg_curvature";
    case CgStatus::max_iter: return "max_iter";
    }
    return "unknown";
}

struct CgResult {
    Vector   p;
    CgStatus status     = CgStatus::converged;
    int      iterations = 0;
};

namespace detail {
/// Largest sigma >= 0 with ||p + sigma d|| = delta, assuming ||p|| <= delta.
inline auto to_boundary(Vector const& p, Vector const& d, double delta) -> double
{
    double const dd   = d.squaredNorm();
    double const pd   = p.dot(d);
    double const rhs  = std::max(0.0, delta * delta - p.squaredNorm());
    double const disc = std::sqrt(pd * pd + dd * rhs);
    // Two algebraically equal forms; pick the one free of cancellation.
    return pd > 0.0 ? rhs / (pd + disc) : (disc - pd) / dd;
}
} // namespace detail

/// Steihaug truncated conjugate gradients on B p = -g within ||p|| <= delta.
inline auto steihaug_cg(Vector const& g, Matrix const& b, double delta, double tol,
                        int max_iter) -> CgResult
{
    if (!(delta > 0.0)) { throw std::invalid_argument{"steihaug_cg: radius must be positive"}; }
    auto const n = g.size();
    CgResult   out{Vector::Zero(n), CgStatus::converged, 0};

    Vector r = g;
    if (r.norm() <= tol) { return out; }
    Vector d   = -r;
    double rr  = r.squaredNorm();
    for (int j = 0; j < max_iter; ++j) {
        out.iterations = j + 1;
        Vector const bd  = b * d;
        double const dbd = d.dot(bd);
        if (dbd <= 0.0) {
            out.p += detail::to_boundary(out.p, d, delta) * d;
            out.status = CgStatus::neg_curvature;
            return out;
        }
        double const a      = rr / dbd;
        Vector       p_next = out.p + a * d;
        if (p_next.norm() >= delta) {
            out.p += detail::to_boundary(out.p, d, delta) * d;
            out.status = CgStatus::boundary;
            return out;
        }
        out.p = std::move(p_next);
        r += a * bd;
        double const rr_next = r.squaredNorm();
        if (std::sqrt(rr_next) <= tol) {
            out.status = CgStatus::converged;
            return out;
        }
        d  = -r + (rr_next / rr) * d;
        rr = rr_next;
    }
    out.status = CgStatus::max_iter;
    return out;
}

enum class SubproblemSolver { cg, cauchy };

// ============================ Radius control ==============================

/// rho = (f0 - f_trial) / (m(0) - m(p)).
inline auto reduction_ratio(double f0, double f_trial, double model_at_zero,
                            double model_at_p) -> double
{
    double const predicted = model_at_zero - model_at_p;
    if (!(predicted > 0.0)) {
        throw DegenerateModelError{"reduction_ratio: predicted reduction "
                                   + std::to_string(predicted) + " is not positive"};
    }
    return (f0 - f_trial) / predicted;
}

/// Halve below c1, double above c2, then clamp to [delta_min, delta_max].
inline auto update_radius(double delta, double rho, TrustRegionParams const& params) -> double
{
    double next = delta;
    if (rho < params.c1) { next = 0.5 * delta; }
    else if (rho > params.c2) { next = 2.0 * delta; }
    return std::clamp(next, params.delta_min, params.delta_max);
}

inline auto accept_step(double rho, double eta) -> bool { return rho > eta; }

// ====================== Hessian approximations (B form) ====================

/// SR1 pairs are skipped when |v's| < c3 ||v|| ||s|| with v = y - Bs, or
/// when v's vanishes outright (v = 0).
inline auto sr1_skip(Matrix const& b, Vector const& s, Vector const& y, double c3) -> bool
{
    Vector const v  = y - b * s;
    double const vs = v.dot(s);
    return vs == 0.0 || std::abs(vs) < c3 * v.norm() * s.norm();
}

/// B+ = B + v v' / v's, or B unchanged when the pair is skipped.
inline auto sr1_update(Matrix const& b, Vector const& s, Vector const& y, double c3) -> Matrix
{
    if (sr1_skip(b, s, y, c3)) { return b; }
    Vector const v   = y - b * s;
    Matrix       out = b;
    out.noalias() += (v * v.transpose()) / v.dot(s);
    return out;
}

/// Direct BFGS: B+ = B - Bs s'B / s'Bs + y y' / y's. Skipped pairs leave B
/// unchanged.
inline auto bfgs_update_B(Matrix const& b, Vector const& s, Vector const& y, double eps_sy)
    -> Matrix
{
    if (!curvature_pair_ok(s, y, eps_sy)) { return b; }
    Vector const bs  = b * s;
    double const sbs = s.dot(bs);
    if (!(sbs > 0.0)) {
        throw NumericalBreakdownError{"bfgs_update_B: s'Bs is not positive"};
    }
    Matrix out = b;
    out.noalias() -= (bs * bs.transpose()) / sbs;
    out.noalias() += (y * y.transpose()) / y.dot(s);
    return out;
}

/// Direct DFP: B+ = (I - rho y s') B (I - rho s y') + rho y y', rho = 1 / y's,
/// expanded to O(n^2). Skipped pairs leave B unchanged.
inline auto dfp_update_B(Matrix const& b, Vector const& s, Vector const& y, double eps_sy)
    -> Matrix
{
    if (!curvature_pair_ok(s, y, eps_sy)) { return b; }
    Vector const bs  = b * s;
    double const sbs = s.dot(bs);
    if (!(sbs > 0.0)) {
        throw NumericalBreakdownError{"dfp_update_B: s'Bs is not positive"};
    }
    double const rho = 1.0 / y.dot(s);
    Matrix       out = b;
    out.noalias() -= rho * (y * bs.transpose() + bs * y.transpose());
    out.noalias() += (rho * rho * sbs + rho) * (y * y.transpose());
    return out;
}

enum class ModelKind { exact, sr1, bfgs, dfp };

/// The Hessian (approximation) B used by the quadratic model.
struct ModelState {
    ModelKind kind;
    Matrix    b;
    int       skipped_updates = 0;

    ModelState(ModelKind k, Eigen::Index n) : kind{k}, b{Matrix::Identity(n, n)} {}

    /// Applies the quasi-Newton update for an accepted step. Returns false
    /// when the pair was skipped. Not meaningful for the exact model, whose
    /// B is refreshed from the Hessian by the driver.
    auto update(Vector const& s, Vector const& y, double c3, double eps_sy) -> bool
    {
        bool skipped = false;
        switch (kind) {
        case ModelKind::exact: return false;
        case ModelKind::sr1:
            skipped = sr1_skip(b, s, y, c3);
            if (!skipped) { b = sr1_update(b, s, y, c3); }
            break;
        case ModelKind::bfgs:
            skipped = !curvature_pair_ok(s, y, eps_sy);
            if (!skipped) { b = bfgs_update_B(b, s, y, eps_sy); }
            break;
        case ModelKind::dfp:
            skipped = !curvature_pair_ok(s, y, eps_sy);
            if (!skipped) { b = dfp_update_B(b, s, y, eps_sy); }
            break;
        }
        if (skipped) { ++skipped_updates; }
        return !skipped;
    }
};

} // namespace opthim
