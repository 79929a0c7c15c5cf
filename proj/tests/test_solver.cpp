#include "test_support.hpp"

#include <opthim/solver.hpp>

#include <gtest/gtest.h>

#include <memory>

using namespace opthim;
using opthim::testing::half_norm_squared;

namespace {

auto line_search_config(Method m, LineSearchKind ls, std::string problem = {}) -> SolverConfig
{
    SolverConfig cfg;
    cfg.method      = m;
    cfg.line_search = ls;
    cfg.problem     = std::move(problem);
    return cfg;
}

auto tr_config(ModelKind model, SubproblemSolver solver, std::string problem = {}) -> SolverConfig
{
    SolverConfig cfg;
    cfg.method    = Method::tr;
    cfg.tr_model  = model;
    cfg.tr_solver = solver;
    cfg.problem   = std::move(problem);
    return cfg;
}

auto all_configs() -> std::vector<SolverConfig>
{
    std::vector<SolverConfig> out;
    for (auto m : {Method::gd, Method::newton, Method::bfgs, Method::dfp, Method::lbfgs}) {
        for (auto ls : {LineSearchKind::armijo, LineSearchKind::wolfe}) {
            out.push_back(line_search_config(m, ls));
        }
    }
    for (auto model : {ModelKind::exact, ModelKind::sr1, ModelKind::bfgs, ModelKind::dfp}) {
        for (auto s : {SubproblemSolver::cg, SubproblemSolver::cauchy}) {
            out.push_back(tr_config(model, s));
        }
    }
    return out;
}

struct CallCounts {
    std::int64_t value = 0, gradient = 0, hessian = 0;
};

/// Wraps an objective so every callback invocation is tallied independently
/// of EvalCounters.
auto counted(Objective const& inner, std::shared_ptr<CallCounts> calls) -> Objective
{
    return Objective{
        inner.name(), inner.dimension(),
        [inner, calls](Vector const& x) {
            ++calls->value;
            return inner.value(x);
        },
        [inner, calls](Vector const& x) -> Vector {
            ++calls->gradient;
            return inner.gradient(x);
        },
        [inner, calls](Vector const& x) -> Matrix {
            ++calls->hessian;
            return inner.hessian(x);
        }};
}

} // namespace

TEST(Solve, NewtonArmijoOnQuadAIsOneStep)
{
    auto const rec = run(line_search_config(Method::newton, LineSearchKind::armijo, "Quad_A"));
    EXPECT_TRUE(rec.converged);
    EXPECT_EQ(rec.iterations, 1);
    EXPECT_EQ(rec.grad_evals, 2);
    EXPECT_EQ(rec.func_evals, 2);
    EXPECT_EQ(rec.hess_evals, 1);
    ASSERT_EQ(rec.history.size(), 2u);
    EXPECT_EQ(rec.history[1].step_param, 1.0);
}

TEST(Solve, GradientDescentOnHalfNormIsOneStep)
{
    auto const rec = solve(half_norm_squared(2), Vector::Ones(2),
                           line_search_config(Method::gd, LineSearchKind::armijo));
    EXPECT_TRUE(rec.converged);
    EXPECT_EQ(rec.iterations, 1);
    EXPECT_EQ(rec.final_x, Vector::Zero(2));
}

TEST(Solve, ConvergedStartTakesNoIterations)
{
    for (auto const& cfg : all_configs()) {
        auto const rec = solve(half_norm_squared(3), Vector::Zero(3), cfg);
        EXPECT_TRUE(rec.converged);
        EXPECT_EQ(rec.iterations, 0);
        EXPECT_EQ(rec.func_evals, 1);
        EXPECT_EQ(rec.grad_evals, 1);
        EXPECT_EQ(rec.hess_evals, 0);
        EXPECT_EQ(rec.history.size(), 1u);
    }
}

TEST(Solve, TrustRegionExactModelOnQuadA)
{
    auto cfg = tr_config(ModelKind::exact, SubproblemSolver::cg, "Quad_A");
    cfg.trust_region_params.delta0 = 1.0;
    auto const rec = run(cfg);
    EXPECT_TRUE(rec.converged);
    ASSERT_EQ(rec.rhos.size(), static_cast<std::size_t>(rec.iterations));
    for (double rho : rec.rhos) { EXPECT_NEAR(rho, 1.0, 1e-8); }
    for (std::size_t i = 1; i < rec.history.size(); ++i) {
        EXPECT_TRUE(rec.history[i].accepted);
        EXPECT_LT(rec.history[i].f, rec.history[i - 1].f);
    }
}

TEST(Solve, MissingHessianIsAConfigError)
{
    Objective no_hessian{"plain", 2, [](Vector const& x) { return x.squaredNorm(); },
                         [](Vector const& x) -> Vector { return 2.0 * x; }};
    EXPECT_THROW(solve(no_hessian, Vector::Ones(2),
                       line_search_config(Method::newton, LineSearchKind::armijo)),
                 ConfigError);
    EXPECT_THROW(solve(no_hessian, Vector::Ones(2),
                       tr_config(ModelKind::exact, SubproblemSolver::cg)),
                 ConfigError);
    EXPECT_NO_THROW(solve(no_hessian, Vector::Ones(2),
                          tr_config(ModelKind::sr1, SubproblemSolver::cg)));
}

TEST(Solve, LineSearchFailureStopsTheRun)
{
    auto cfg = line_search_config(Method::gd, LineSearchKind::armijo, "Quartic_B");
    cfg.line_search_params.max_trials = 1;
    auto const rec = run(cfg);
    EXPECT_FALSE(rec.converged);
    ASSERT_TRUE(rec.error.has_value());
    EXPECT_NE(rec.error->find("Armijo"), std::string::npos);
    EXPECT_EQ(rec.iterations, 0);
}

TEST(Solve, IterationCapOnIllConditionedQuadratic)
{
    auto const rec = run(line_search_config(Method::gd, LineSearchKind::armijo, "Quad_B"));
    EXPECT_FALSE(rec.converged);
    EXPECT_EQ(rec.iterations, 1000);
    EXPECT_FALSE(rec.error.has_value());
    EXPECT_EQ(rec.grad_evals, rec.iterations + 1);
}

TEST(Solve, CountersMatchIndependentCallAudit)
{
    for (auto const& name : {"Rosen_A", "Quartic_A", "Exp_A", "Genhumps"}) {
        for (auto cfg : all_configs()) {
            cfg.problem   = name;
            cfg.max_iters = 200;
            auto const spec  = registry(name);
            auto       calls = std::make_shared<CallCounts>();
            auto const rec   = solve(counted(spec->objective, calls), spec->initial_point(0), cfg);
            SCOPED_TRACE(std::string{name} + " " + to_string(cfg.method) + " " + cfg.variant());
            EXPECT_EQ(rec.func_evals, calls->value);
            EXPECT_EQ(rec.grad_evals, calls->gradient);
            EXPECT_EQ(rec.hess_evals, calls->hessian);
            EXPECT_EQ(rec.history.back().fev, rec.func_evals);
            EXPECT_EQ(rec.history.back().gev, rec.grad_evals);
            EXPECT_EQ(rec.history.back().hev, rec.hess_evals);
        }
    }
}

TEST(Solve, StoppingContractAndHistoryInvariants)
{
    for (auto const& name : {"Rosen_A", "Quartic_B", "Exp_A", "Genhumps", "Quad_A"}) {
        for (auto cfg : all_configs()) {
            cfg.problem    = name;
            auto const rec = run(cfg);
            SCOPED_TRACE(std::string{name} + " " + to_string(cfg.method) + " " + cfg.variant());
            EXPECT_LE(rec.iterations, cfg.max_iters);
            EXPECT_EQ(rec.converged, rec.final_grad_norm <= cfg.grad_tol);
            ASSERT_EQ(rec.history.size(), static_cast<std::size_t>(rec.iterations) + 1);
            for (std::size_t i = 1; i < rec.history.size(); ++i) {
                auto const& a = rec.history[i - 1];
                auto const& b = rec.history[i];
                EXPECT_EQ(b.k, a.k + 1);
                EXPECT_GE(b.fev, a.fev);
                EXPECT_GE(b.gev, a.gev);
                EXPECT_GE(b.hev, a.hev);
                EXPECT_LE(b.f, a.f);
            }
            if (rec.converged) {
                for (std::size_t i = 0; i + 1 < rec.history.size(); ++i) {
                    EXPECT_GT(rec.history[i].grad_norm, 0.0);
                }
            }
            if (!cfg.is_trust_region() && cfg.line_search == LineSearchKind::armijo) {
                EXPECT_EQ(rec.grad_evals, rec.iterations + 1);
            }
            if (cfg.is_trust_region()) {
                for (auto const& row : rec.history) {
                    EXPECT_GE(row.step_param, cfg.trust_region_params.delta_min);
                    EXPECT_LE(row.step_param, cfg.trust_region_params.delta_max);
                }
            }
        }
    }
}

TEST(Solve, RejectedTrustRegionStepsKeepTheIterate)
{
    auto cfg              = tr_config(ModelKind::sr1, SubproblemSolver::cg, "Genhumps");
    cfg.record_trajectory = true;
    auto const rec        = run(cfg);
    ASSERT_EQ(rec.trajectory.size(), rec.history.size());
    int rejected = 0;
    for (std::size_t i = 1; i < rec.history.size(); ++i) {
        if (rec.history[i].accepted) { continue; }
        ++rejected;
        EXPECT_EQ(rec.trajectory[i], rec.trajectory[i - 1]);
        EXPECT_EQ(rec.history[i].f, rec.history[i - 1].f);
        EXPECT_EQ(rec.history[i].step_norm, 0.0);
        EXPECT_LE(rec.rhos[i - 1], cfg.trust_region_params.eta);
    }
    EXPECT_GT(rejected, 0);
}

TEST(Solve, DeterministicApartFromTime)
{
    for (auto cfg : all_configs()) {
        cfg.problem = "Rosen_A";
        cfg.seed    = 3;
        auto a      = run(cfg);
        auto b      = run(cfg);
        ASSERT_EQ(a.history.size(), b.history.size());
        for (std::size_t i = 0; i < a.history.size(); ++i) {
            a.history[i].time_s = b.history[i].time_s = 0.0;
        }
        EXPECT_EQ(a.history, b.history);
        EXPECT_EQ(a.final_x, b.final_x);
    }
}

TEST(Solve, TrajectoryRecordedForSmallProblems)
{
    auto const small = run(line_search_config(Method::bfgs, LineSearchKind::wolfe, "Rosen_A"));
    ASSERT_EQ(small.trajectory.size(), small.history.size());
    EXPECT_EQ(small.trajectory.front(), registry("Rosen_A")->initial_point(0));
    EXPECT_EQ(small.directions.size(), static_cast<std::size_t>(small.iterations));

    auto const large = run(line_search_config(Method::bfgs, LineSearchKind::wolfe, "Exp_A"));
    EXPECT_TRUE(large.trajectory.empty());
}

TEST(Solve, LbfgsWithIdentityScalingTracksBfgs)
{
    auto bfgs = line_search_config(Method::bfgs, LineSearchKind::armijo, "Quad_A");
    bfgs.record_trajectory = true;
    bfgs.max_iters         = 20;
    auto lbfgs             = bfgs;
    lbfgs.method           = Method::lbfgs;
    lbfgs.lbfgs_m          = 50;
    lbfgs.lbfgs_scaling    = LbfgsScaling::identity;

    auto const a = run(bfgs);
    auto const b = run(lbfgs);
    std::size_t const rows = std::min(a.trajectory.size(), b.trajectory.size());
    ASSERT_GE(rows, 2u);
    for (std::size_t k = 0; k < rows; ++k) {
        EXPECT_LE((a.trajectory[k] - b.trajectory[k]).cwiseAbs().maxCoeff(), 1e-8) << "k=" << k;
    }
}

TEST(Solve, NewtonOnGeneratedQuadraticsIsOneStep)
{
    std::mt19937_64 rng{31};
    for (int rep = 0; rep < 5; ++rep) {
        Matrix const q   = opthim::testing::random_spd(12, rng, 1e3);
        Vector const b   = opthim::testing::random_vector(12, rng);
        auto const   rec = solve(opthim::testing::quadratic(q, b),
                                 opthim::testing::random_vector(12, rng),
                                 line_search_config(Method::newton, LineSearchKind::armijo));
        EXPECT_TRUE(rec.converged);
        EXPECT_EQ(rec.iterations, 1);
        EXPECT_EQ(rec.func_evals, 2);
    }
}

TEST(SolverConfig, ValidationRules)
{
    SolverConfig cfg;
    cfg.method = Method::bfgs;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg.line_search = LineSearchKind::armijo;
    EXPECT_NO_THROW(cfg.validate());
    cfg.tr_model = ModelKind::sr1;
    EXPECT_THROW(cfg.validate(), ConfigError);

    auto tr = tr_config(ModelKind::sr1, SubproblemSolver::cg);
    EXPECT_NO_THROW(tr.validate());
    tr.max_iters = 0;
    EXPECT_THROW(tr.validate(), ConfigError);
    tr           = tr_config(ModelKind::sr1, SubproblemSolver::cg);
    tr.grad_tol  = 0.0;
    EXPECT_THROW(tr.validate(), ConfigError);
    tr                               = tr_config(ModelKind::sr1, SubproblemSolver::cg);
    tr.trust_region_params.delta_min = 2.0;
    EXPECT_THROW(tr.validate(), ConfigError);
}

TEST(SolverConfig, Names)
{
    EXPECT_EQ(line_search_config(Method::lbfgs, LineSearchKind::wolfe).variant(), "wolfe");
    EXPECT_EQ(tr_config(ModelKind::exact, SubproblemSolver::cauchy).variant(), "newton-cauchy");
    EXPECT_EQ(parse_method("dfp"), Method::dfp);
    EXPECT_FALSE(parse_method("sgd").has_value());
    EXPECT_EQ(parse_model("newton"), ModelKind::exact);
}
