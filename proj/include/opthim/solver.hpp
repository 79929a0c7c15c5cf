#pragma once

/// \file solver.hpp
///
/// Run driver: iterates a line-search or trust-region method from a start
/// point until ||grad f|| <= grad_tol or max_iters is reached, collecting a
/// per-iteration history and the summary metrics of a run.

#include "benchmarks.hpp"
#include "core.hpp"
#include "directions.hpp"
#include "linesearch.hpp"
#include "trustregion.hpp"

#include <array>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace opthim {

enum class Method { gd, newton, bfgs, dfp, lbfgs, tr };
enum class LineSearchKind { armijo, wolfe };

// ========================= Enum <-> string tables ==========================

inline auto to_string(Method m) -> std::string
{
    switch (m) {
    case Method::gd: return "gd";
    case Method::newton: return "newton";
    case Method::bfgs: return "bfgs";
    case Method::dfp: return "dfp";
    case Method::lbfgs: return "lbfgs";
    case Method::tr: return "tr";
    }
    return "unknown";
}

inline auto to_string(LineSearchKind k) -> std::string
{
    return k == LineSearchKind::armijo ? "armijo" : "wolfe";
}

inline auto to_string(ModelKind k) -> std::string
{
    switch (k) {
    case ModelKind::exact: return "newton";
    case ModelKind::sr1: return "sr1";
    case ModelKind::bfgs: return "bfgs";
    case ModelKind::dfp: return "dfp";
    }
    return "unknown";
}

inline auto to_string(SubproblemSolver s) -> std::string
{
    return s == SubproblemSolver::cg ? "cg" : "cauchy";
}

inline auto to_string(LbfgsScaling s) -> std::string
{
    return s == LbfgsScaling::gamma ? "gamma" : "identity";
}

inline auto parse_method(std::string_view s) -> std::optional<Method>
{
    for (auto m : {Method::gd, Method::newton, Method::bfgs, Method::dfp, Method::lbfgs,
                   Method::tr}) {
        if (s == to_string(m)) { return m; }
    }
    return std::nullopt;
}

inline auto parse_line_search(std::string_view s) -> std::optional<LineSearchKind>
{
    if (s == "armijo") { return LineSearchKind::armijo; }
    if (s == "wolfe") { return LineSearchKind::wolfe; }
    return std::nullopt;
}

inline auto parse_model(std::string_view s) -> std::optional<ModelKind>
{
    for (auto k : {ModelKind::exact, ModelKind::sr1, ModelKind::bfgs, ModelKind::dfp}) {
        if (s == to_string(k)) { return k; }
    }
    return std::nullopt;
}

inline auto parse_solver(std::string_view s) -> std::optional<SubproblemSolver>
{
    if (s == "cg") { return SubproblemSolver::cg; }
    if (s == "cauchy") { return SubproblemSolver::cauchy; }
    return std::nullopt;
}

inline auto parse_scaling(std::string_view s) -> std::optional<LbfgsScaling>
{
    if (s == "gamma") { return LbfgsScaling::gamma; }
    if (s == "identity") { return LbfgsScaling::identity; }
    return std::nullopt;
}

// ================================ Config ==================================

/// Axis-aligned box [u_lo, u_hi] x [v_lo, v_hi] over the first two
/// coordinates, used for contour sampling.
struct GridBox {
    double u_lo = -1.0;
    double u_hi = 1.0;
    double v_lo = -1.0;
    double v_hi = 1.0;
};

class ConfigError : public Error {
  public:
    using Error::Error;
};

struct SolverConfig {
    Method                          method = Method::gd;
    std::optional<LineSearchKind>   line_search;
    std::optional<ModelKind>        tr_model;
    std::optional<SubproblemSolver> tr_solver;
    std::string                     problem;

    double grad_tol  = 1e-6;
    int    max_iters = 1000;

    LineSearchParams  line_search_params;
    TrustRegionParams trust_region_params;

    int           lbfgs_m       = 10;
    LbfgsScaling  lbfgs_scaling = LbfgsScaling::gamma;
    double        eps_sy        = 1e-6;
    std::uint64_t seed          = 0;

    std::string out_dir = ".";
    /// Unset means "record when n <= 3".
    std::optional<bool>    record_trajectory;
    std::optional<GridBox> grid_box;
    int                    grid_resolution = 50;

    [[nodiscard]] auto is_trust_region() const noexcept -> bool { return method == Method::tr; }

    /// Second label of a run: the line search, or "<model>-<solver>".
    [[nodiscard]] auto variant() const -> std::string
    {
        if (is_trust_region()) {
            return (tr_model ? to_string(*tr_model) : "?") + "-"
                   + (tr_solver ? to_string(*tr_solver) : "?");
        }
        return line_search ? to_string(*line_search) : "?";
    }

    void validate() const
    {
        if (is_trust_region()) {
            if (!tr_model || !tr_solver) {
                throw ConfigError{"config: method 'tr' requires tr_model and tr_solver"};
            }
            if (line_search) {
                throw ConfigError{"config: line_search does not apply to method 'tr'"};
            }
        }
        else {
            if (!line_search) {
                throw ConfigError{"config: method '" + to_string(method)
                                  + "' requires line_search (armijo|wolfe)"};
            }
            if (tr_model || tr_solver) {
                throw ConfigError{"config: tr_model/tr_solver only apply to method 'tr'"};
            }
        }
        if (!(grad_tol > 0.0)) { throw ConfigError{"config: grad_tol must be positive"}; }
        if (max_iters < 1) { throw ConfigError{"config: max_iters must be at least 1"}; }
        if (lbfgs_m < 1) { throw ConfigError{"config: lbfgs_m must be at least 1"}; }
        if (!(eps_sy >= 0.0)) { throw ConfigError{"config: eps_sy must be non-negative"}; }
        if (grid_resolution < 2) { throw ConfigError{"config: grid_resolution must be at least 2"}; }
        try {
            if (is_trust_region()) { trust_region_params.validate(); }
            else { line_search_params.validate(); }
        }
        catch (std::invalid_argument const& e) {
            throw ConfigError{std::string{"config: "} + e.what()};
        }
    }
};

// ================================ Records =================================

struct HistoryRow {
    std::int64_t k = 0;
    double       f = 0.0;
    double       grad_norm = 0.0;
    /// Step size alpha that produced x_k (line search), or the radius after
    /// the update of iteration k (trust region). Row 0 holds 0 resp. delta0.
    double       step_param = 0.0;
    double       step_norm  = 0.0;
    std::int64_t fev = 0;
    std::int64_t gev = 0;
    std::int64_t hev = 0;
    double       time_s = 0.0;
    bool         accepted = true;

    friend auto operator==(HistoryRow const&, HistoryRow const&) -> bool = default;
};

struct RunRecord {
    SolverConfig            config;
    std::string             problem;
    std::vector<HistoryRow> history;
    std::int64_t            iterations = 0;
    std::int64_t            func_evals = 0;
    std::int64_t            grad_evals = 0;
    std::int64_t            hess_evals = 0;
    double                  wall_time  = 0.0;
    bool                    converged  = false;
    Vector                  final_x;
    double                  final_f         = 0.0;
    double                  final_grad_norm = 0.0;
    /// Set when the run stopped early on a solver failure.
    std::optional<std::string> error;

    /// Iterates per history row, when recorded.
    std::vector<Vector> trajectory;
    /// Line search only, recorded with the trajectory: directions[k] is the
    /// search direction taken from trajectory[k].
    std::vector<Vector> directions;
    /// Trust region only: reduction ratio of each iteration.
    std::vector<double> rhos;

    int skipped_updates   = 0;
    int direction_resets  = 0;
};

// ================================ Driver ==================================

namespace detail {

class RunClock {
  public:
    RunClock() : _start{std::chrono::steady_clock::now()} {}
    [[nodiscard]] auto seconds() const -> double
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - _start).count();
    }

  private:
    std::chrono::steady_clock::time_point _start;
};

inline auto make_row(std::int64_t k, double f, double gnorm, double step_param, double step_norm,
                     EvalCounters const& c, double t, bool accepted) -> HistoryRow
{
    return HistoryRow{k, f, gnorm, step_param, step_norm, c.func_evals, c.grad_evals,
                      c.hess_evals, t, accepted};
}

inline void finish(RunRecord& rec, EvalCounters const& c, Vector x, double f, double gnorm,
                   std::int64_t k, double tol, double seconds)
{
    rec.iterations      = k;
    rec.func_evals      = c.func_evals;
    rec.grad_evals      = c.grad_evals;
    rec.hess_evals      = c.hess_evals;
    rec.final_x         = std::move(x);
    rec.final_f         = f;
    rec.final_grad_norm = gnorm;
    rec.converged       = gnorm <= tol;
    rec.wall_time       = seconds;
}

inline auto solve_line_search(Objective const& obj, Vector const& x0, SolverConfig const& cfg,
                              bool record_path) -> RunRecord
{
    RunRecord rec;
    rec.config  = cfg;
    rec.problem = cfg.problem.empty() ? obj.name() : cfg.problem;

    auto const n      = obj.dimension();
    bool const wolfe  = cfg.line_search == LineSearchKind::wolfe;

    InverseHessianState inverse{n, cfg.eps_sy};
    LbfgsMemory         memory{static_cast<std::size_t>(cfg.lbfgs_m), cfg.eps_sy};

    RunClock     clock;
    EvalCounters counters;
    auto         ev = evaluate(obj, x0, counters, want_value_gradient);
    Vector       x  = x0;
    double       f  = *ev.value;
    Vector       g  = *std::move(ev.gradient);

    std::int64_t k = 0;
    rec.history.push_back(make_row(0, f, g.norm(), 0.0, 0.0, counters, clock.seconds(), true));
    if (record_path) { rec.trajectory.push_back(x); }

    while (true) {
        double const gnorm = g.norm();
        if (gnorm <= cfg.grad_tol || k >= cfg.max_iters) { break; }

        Vector p;
        try {
            switch (cfg.method) {
            case Method::gd: p = steepest_descent(g); break;
            case Method::newton: p = newton_direction(eval_hessian(obj, x, counters), g); break;
            case Method::bfgs:
            case Method::dfp: p = inverse.direction(g); break;
            case Method::lbfgs: p = lbfgs_direction(memory, g, cfg.lbfgs_scaling); break;
            case Method::tr: break;
            }
        }
        catch (SingularHessianError const& e) {
            rec.error = e.what();
            break;
        }
        // Rounding can cost a quasi-Newton matrix its definiteness; restart
        // from the identity rather than search uphill.
        if (!(g.dot(p) < 0.0) || !p.allFinite()) {
            ++rec.direction_resets;
            inverse.reset();
            memory.clear();
            p = steepest_descent(g);
        }

        StepResult step;
        try {
            step = wolfe ? backtrack_wolfe(obj, x, p, f, g, cfg.line_search_params, counters)
                         : backtrack_armijo(obj, x, p, f, g, cfg.line_search_params, counters);
        }
        catch (LineSearchError const& e) {
            rec.error = e.what();
            break;
        }

        Vector g_new = step.g_new ? *std::move(step.g_new) : eval_gradient(obj, step.x_new, counters);
        Vector s     = step.x_new - x;
        Vector y     = g_new - g;
        switch (cfg.method) {
        case Method::bfgs: inverse.update(InverseUpdate::bfgs, s, y); break;
        case Method::dfp: inverse.update(InverseUpdate::dfp, s, y); break;
        case Method::lbfgs: memory.push(s, y); break;
        default: break;
        }

        if (record_path) { rec.directions.push_back(p); }
        double const step_norm = s.norm();
        x                      = std::move(step.x_new);
        f                      = step.f_new;
        g                      = std::move(g_new);
        ++k;
        rec.history.push_back(
            make_row(k, f, g.norm(), step.alpha, step_norm, counters, clock.seconds(), true));
        if (record_path) { rec.trajectory.push_back(x); }
    }

    rec.skipped_updates = inverse.skipped_updates + memory.skipped_updates();
    double const gnorm  = g.norm();
    finish(rec, counters, std::move(x), f, gnorm, k, cfg.grad_tol, clock.seconds());
    return rec;
}

inline auto solve_trust_region(Objective const& obj, Vector const& x0, SolverConfig const& cfg,
                               bool record_path) -> RunRecord
{
    RunRecord rec;
    rec.config  = cfg;
    rec.problem = cfg.problem.empty() ? obj.name() : cfg.problem;

    auto const& prm    = cfg.trust_region_params;
    auto const  kind   = *cfg.tr_model;
    auto const  solver = *cfg.tr_solver;
    ModelState  model{kind, obj.dimension()};
    bool        stale_hessian = kind == ModelKind::exact;

    RunClock     clock;
    EvalCounters counters;
    auto         ev    = evaluate(obj, x0, counters, want_value_gradient);
    Vector       x     = x0;
    double       f     = *ev.value;
    Vector       g     = *std::move(ev.gradient);
    double       delta = prm.delta0;

    std::int64_t k = 0;
    rec.history.push_back(make_row(0, f, g.norm(), delta, 0.0, counters, clock.seconds(), true));
    if (record_path) { rec.trajectory.push_back(x); }

    while (true) {
        double const gnorm = g.norm();
        if (gnorm <= cfg.grad_tol || k >= cfg.max_iters) { break; }

        if (stale_hessian) {
            model.b       = eval_hessian(obj, x, counters);
            stale_hessian = false;
        }

        Vector const p = solver == SubproblemSolver::cg
                             ? steihaug_cg(g, model.b, delta, prm.cg_tol, prm.cg_max_iter).p
                             : cauchy_step(g, model.b, delta);

        Vector const x_trial = x + p;
        // The step actually taken after rounding x + p. Near the optimum it
        // differs from p by far more than the model's own accuracy.
        Vector const s       = x_trial - x;
        double const f_trial = eval_value(obj, x_trial, counters);
        // Model evaluated relative to f(x_k) so large |f| does not swamp the
        // predicted reduction.
        double rho = -std::numeric_limits<double>::infinity();
        if (std::isfinite(f_trial)) {
            try {
                rho = reduction_ratio(f, f_trial, 0.0, model_value(0.0, g, model.b, s));
            }
            catch (DegenerateModelError const&) {
            }
        }
        rec.rhos.push_back(rho);

        bool const accepted = accept_step(rho, prm.eta);
        delta               = update_radius(delta, rho, prm);
        double step_norm    = 0.0;
        if (accepted) {
            Vector g_new = eval_gradient(obj, x_trial, counters);
            if (kind == ModelKind::exact) { stale_hessian = true; }
            else {
                try {
                    model.update(s, g_new - g, prm.c3, cfg.eps_sy);
                }
                catch (NumericalBreakdownError const&) {
                    ++rec.direction_resets;
                    model.b.setIdentity();
                }
            }
            step_norm = s.norm();
            x         = x_trial;
            f         = f_trial;
            g         = std::move(g_new);
        }
        ++k;
        rec.history.push_back(
            make_row(k, f, g.norm(), delta, step_norm, counters, clock.seconds(), accepted));
        if (record_path) { rec.trajectory.push_back(x); }
    }

    rec.skipped_updates = model.skipped_updates;
    double const gnorm  = g.norm();
    finish(rec, counters, std::move(x), f, gnorm, k, cfg.grad_tol, clock.seconds());
    return rec;
}

} // namespace detail

/// Runs the configured method on an explicit objective and start point.
inline auto solve(Objective const& obj, Vector const& x0, SolverConfig const& cfg) -> RunRecord
{
    cfg.validate();
    obj.check_dimension(x0);
    if (cfg.method == Method::newton
        || (cfg.is_trust_region() && cfg.tr_model == ModelKind::exact)) {
        if (!obj.has_hessian()) {
            throw ConfigError{"config: method needs a Hessian but '" + obj.name()
                              + "' provides none"};
        }
    }
    bool const record_path = cfg.record_trajectory.value_or(obj.dimension() <= 3);
    return cfg.is_trust_region() ? detail::solve_trust_region(obj, x0, cfg, record_path)
                                 : detail::solve_line_search(obj, x0, cfg, record_path);
}

/// Resolves the configured problem through the registry and runs it from
/// the problem's start point (perturbed by the config seed where the
/// problem defines a perturbation).
inline auto run(SolverConfig const& cfg) -> RunRecord
{
    cfg.validate();
    auto const spec = registry(cfg.problem);
    return solve(spec->objective, spec->initial_point(cfg.seed), cfg);
}

} // namespace opthim
