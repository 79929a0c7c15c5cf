#pragma once

/// \file linesearch.hpp
///
/// Backtracking step-size selection under the Armijo sufficient-decrease
/// condition, optionally strengthened by the Wolfe curvature condition.

#include "core.hpp"

#include <optional>
#include <string>

namespace opthim {

struct LineSearchParams {
    double alpha_init = 1.0;
    double alpha_low  = 0.0;
    double alpha_high = 1000.0;
    /// Backtracking factor.
    double tau = 0.5;
    /// Sufficient-decrease constant.
    double c1 = 1e-4;
    /// Curvature constant.
    double c2 = 0.9;
    /// Fraction of the bracket [lo, hi] at which the Wolfe search places
    /// the next trial once both ends are known. 0.5 is bisection.
    double c = 0.5;
    int max_trials = 60;

    /// Throws std::invalid_argument naming the first violated constraint.
    void validate() const
    {
        auto fail = [](std::string const& what) {
            throw std::invalid_argument{"line search parameters: " + what};
        };
        if (!(0.0 < c1 && c1 < c2 && c2 < 1.0)) { fail("require 0 < c1 < c2 < 1"); }
        if (!(0.0 < tau && tau < 1.0)) { fail("require 0 < tau < 1"); }
        if (!(0.0 < c && c < 1.0)) { fail("require 0 < c < 1"); }
        if (!(alpha_low >= 0.0 && alpha_low < alpha_init && alpha_init <= alpha_high)) {
            fail("require 0 <= alpha_low < alpha_init <= alpha_high");
        }
        if (max_trials <= 0) { fail("max_trials must be positive"); }
    }
};

struct StepResult {
    double alpha = 0.0;
    Vector x_new;
    double f_new = 0.0;
    /// Gradient at x_new; only the Wolfe search produces it.
    std::optional<Vector> g_new;
    int  trials    = 0;
    bool armijo    = false;
    bool curvature = false;
};

/// Raised when no acceptable step was found within max_trials.
class LineSearchError : public Error {
  public:
    LineSearchError(std::string const& what, std::optional<StepResult> best)
        : Error{what}, _best{std::move(best)}
    {}

    /// Best trial seen (lowest value for Armijo, best Armijo-satisfying
    /// trial for Wolfe), if any.
    [[nodiscard]] auto best() const noexcept -> std::optional<StepResult> const& { return _best; }

  private:
    std::optional<StepResult> _best;
};

class NonDescentError : public Error {
  public:
    using Error::Error;
};

/// f_trial <= f0 + c1 * alpha * slope0.
inline auto armijo_holds(double f0, double slope0, double f_trial, double alpha,
                         double c1) -> bool
{
    if (!(slope0 < 0.0)) {
        throw NonDescentError{"armijo_holds: slope " + std::to_string(slope0)
                              + " is not a descent slope"};
    }
    return f_trial <= f0 + c1 * alpha * slope0;
}

/// slope_trial >= c2 * slope0.
inline auto curvature_holds(double slope_trial, double slope0, double c2) -> bool
{
    return slope_trial >= c2 * slope0;
}

namespace detail {
inline auto descent_slope(Vector const& g0, Vector const& p) -> double
{
    double const slope = g0.dot(p);
    if (!(slope < 0.0)) {
        throw NonDescentError{"line search: direction is not a descent direction (g'p = "
                              + std::to_string(slope) + ")"};
    }
    return slope;
}
} // namespace detail

/// alpha = alpha_init * tau^j for the smallest j that satisfies the Armijo
/// condition. One function evaluation per trial.
inline auto backtrack_armijo(Objective const& obj, Vector const& x, Vector const& p,
                             double f0, Vector const& g0, LineSearchParams const& params,
                             EvalCounters& counters) -> StepResult
{
    double const slope0 = detail::descent_slope(g0, p);

    std::optional<StepResult> best;
    double                    alpha = params.alpha_init;
    for (int trial = 1; trial <= params.max_trials; ++trial) {
        StepResult r;
        r.alpha  = alpha;
        r.x_new  = x + alpha * p;
        r.f_new  = eval_value(obj, r.x_new, counters);
        r.trials = trial;
        r.armijo = armijo_holds(f0, slope0, r.f_new, alpha, params.c1);
        if (r.armijo) { return r; }
        if (!best || r.f_new < best->f_new) { best = r; }
        alpha *= params.tau;
    }
    throw LineSearchError{"Armijo backtracking failed after "
                              + std::to_string(params.max_trials) + " trials",
                          std::move(best)};
}

/// Bracketing backtracking for the Armijo and curvature conditions.
///
/// The bracket [lo, hi] starts at [alpha_low, alpha_high]. An Armijo failure
/// sets hi, a curvature failure sets lo. Once both ends have been set by a
/// trial the next step is lo + c * (hi - lo); with only hi set the step
/// shrinks by tau, with only lo set it doubles (capped at alpha_high).
/// One function and one gradient evaluation per trial.
inline auto backtrack_wolfe(Objective const& obj, Vector const& x, Vector const& p,
                            double f0, Vector const& g0, LineSearchParams const& params,
                            EvalCounters& counters) -> StepResult
{
    double const slope0 = detail::descent_slope(g0, p);

    double lo = params.alpha_low;
    double hi = params.alpha_high;
    bool   have_lo = false;
    bool   have_hi = false;

    std::optional<StepResult> best;
    double                    alpha = params.alpha_init;
    for (int trial = 1; trial <= params.max_trials; ++trial) {
        StepResult r;
        r.alpha  = alpha;
        r.x_new  = x + alpha * p;
        auto ev  = evaluate(obj, r.x_new, counters, want_value_gradient);
        r.f_new  = *ev.value;
        r.g_new  = std::move(ev.gradient);
        r.trials = trial;
        r.armijo = armijo_holds(f0, slope0, r.f_new, alpha, params.c1);
        r.curvature = curvature_holds(r.g_new->dot(p), slope0, params.c2);

        if (r.armijo && r.curvature) { return r; }
        if (!r.armijo) {
            hi      = alpha;
            have_hi = true;
        }
        else {
            if (!best || r.f_new < best->f_new) { best = r; }
            lo      = alpha;
            have_lo = true;
        }

        if (have_lo && have_hi) { alpha = lo + params.c * (hi - lo); }
        else if (have_hi) { alpha *= params.tau; }
        else { alpha = std::min(2.0 * alpha, params.alpha_high); }
    }
    throw LineSearchError{"Wolfe backtracking failed after "
                              + std::to_string(params.max_trials) + " trials",
                          std::move(best)};
}

} // namespace opthim
