#pragma once

/// \file cli.hpp
///
/// Command-line front end: `run`, `bench` and `check-derivatives`.

#include "config.hpp"
#include "derivative_check.hpp"
#include "report.hpp"
#include "solver.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace opthim {

namespace detail {

inline auto run_stem(RunRecord const& r) -> std::string
{
    return r.problem + "_" + to_string(r.config.method) + "_" + r.config.variant();
}

/// History CSV always; trajectory and contour grid when the run recorded
/// its iterates.
inline void write_run_files(RunRecord const& r, std::filesystem::path const& dir, std::ostream& log)
{
    auto const stem = run_stem(r);
    emit_history_csv(r, (dir / (stem + "_history.csv")).string());
    if (!r.trajectory.empty() && r.final_x.size() >= 2) {
        emit_trajectory(r, (dir / (stem + "_trajectory.csv")).string());
        auto const box = r.config.grid_box.value_or(trajectory_box(r.trajectory));
        emit_contour_grid(registry(r.problem)->objective, r.final_x, box,
                          r.config.grid_resolution, (dir / (stem + "_grid.csv")).string());
    }
    log << stem << ": iterations=" << r.iterations << " func_evals=" << r.func_evals
        << " grad_evals=" << r.grad_evals << " converged=" << (r.converged ? "T" : "F")
        << " final_grad_norm=" << format_double(r.final_grad_norm)
        << (r.error ? " error=\"" + *r.error + "\"" : std::string{}) << '\n';
}

inline auto split_list(std::string const& text) -> std::vector<std::string>
{
    std::vector<std::string> out;
    std::stringstream        in{text};
    std::string              item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) { out.push_back(item); }
    }
    return out;
}

/// Expands a bench method token into configs (problem left blank).
inline auto expand_method(std::string const& token) -> std::vector<SolverConfig>
{
    std::vector<SolverConfig> out;
    if (auto m = parse_method(token); m && *m != Method::tr) {
        for (auto ls : {LineSearchKind::armijo, LineSearchKind::wolfe}) {
            SolverConfig c;
            c.method      = *m;
            c.line_search = ls;
            out.push_back(c);
        }
        return out;
    }
    std::vector<ModelKind> models;
    if (token == "tr") { models = {ModelKind::exact, ModelKind::sr1, ModelKind::bfgs, ModelKind::dfp}; }
    else if (token.rfind("tr-", 0) == 0) {
        auto m = parse_model(token.substr(3));
        if (!m) { throw ConfigError{"bench: unknown method '" + token + "'"}; }
        models = {*m};
    }
    else {
        throw ConfigError{"bench: unknown method '" + token
                          + "' (gd|newton|bfgs|lbfgs|dfp|tr|tr-<newton|sr1|bfgs|dfp>)"};
    }
    for (auto model : models) {
        for (auto solver : {SubproblemSolver::cg, SubproblemSolver::cauchy}) {
            SolverConfig c;
            c.method    = Method::tr;
            c.tr_model  = model;
            c.tr_solver = solver;
            out.push_back(c);
        }
    }
    return out;
}

} // namespace detail

/// Entry point of the `opthim` tool. Returns the process exit code: 0 on
/// success, 1 on a runtime failure, 2 on bad usage. A run that does not
/// converge is not a failure.
inline auto cli_main(int argc, char const* const* argv, std::ostream& out = std::cout,
                     std::ostream& err = std::cerr) -> int
{
    CLI::App app{"Line-search and trust-region optimization benchmarks", "opthim"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    auto*       run_cmd = app.add_subcommand("run", "Run a single configured solve");
    run_cmd->add_option("--config", config_path, "YAML run configuration")->required();
    run_cmd->add_option("--out-dir", out_dir, "Output directory (overrides config out_dir)");

    std::string suite   = "all";
    std::string methods = "gd,newton,bfgs,lbfgs,dfp";
    std::string bench_out = "bench_out";
    int         max_iters = 1000;
    std::uint64_t seed    = 0;
    auto* bench_cmd = app.add_subcommand("bench", "Run a problem x method grid");
    bench_cmd->add_option("--suite", suite, "'all' or comma-separated problem names");
    bench_cmd->add_option("--methods", methods,
                          "Comma-separated: gd,newton,bfgs,lbfgs,dfp,tr,tr-<model>");
    bench_cmd->add_option("--out-dir", bench_out, "Output directory");
    bench_cmd->add_option("--max-iters", max_iters, "Iteration cap per run");
    bench_cmd->add_option("--seed", seed, "Start-point seed");

    std::string problem;
    auto*       check_cmd = app.add_subcommand("check-derivatives",
                                               "Compare analytic derivatives to finite differences");
    check_cmd->add_option("--problem", problem, "Single problem name (default: all)");

    try {
        app.parse(argc, argv);
    }
    catch (CLI::CallForHelp const&) {
        out << app.help();
        return 0;
    }
    catch (CLI::ParseError const& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (*run_cmd) {
            auto cfg = load_config_file(config_path);
            apply_seed_override(cfg);
            if (!out_dir.empty()) { cfg.out_dir = out_dir; }
            auto const record = run(cfg);
            std::filesystem::path const dir{cfg.out_dir};
            detail::write_run_files(record, dir, out);
            emit_summary({record}, (dir / (detail::run_stem(record) + "_summary.json")).string());
            return 0;
        }
        if (*bench_cmd) {
            std::vector<std::string> problems =
                suite == "all" ? benchmark_names() : detail::split_list(suite);
            std::vector<SolverConfig> templates;
            try {
                for (auto const& token : detail::split_list(methods)) {
                    for (auto& c : detail::expand_method(token)) { templates.push_back(c); }
                }
            }
            catch (ConfigError const& e) {
                err << "error: " << e.what() << '\n';
                return 2;
            }
            if (problems.empty() || templates.empty()) {
                err << "error: bench needs at least one problem and one method\n";
                return 2;
            }
            std::filesystem::path const dir{bench_out};
            std::vector<RunRecord>      records;
            for (auto const& p : problems) {
                for (auto cfg : templates) {
                    cfg.problem   = p;
                    cfg.max_iters = max_iters;
                    cfg.seed      = seed;
                    apply_seed_override(cfg);
                    records.push_back(run(cfg));
                    detail::write_run_files(records.back(), dir / "runs", out);
                }
            }
            emit_summary(records, (dir / "summary.json").string());
            std::vector<SummaryEntry> entries;
            for (auto const& r : records) { entries.push_back(summarize(r)); }
            out << summary_table(entries);
            return 0;
        }
        if (*check_cmd) {
            std::vector<std::string> problems =
                problem.empty() ? benchmark_names() : std::vector<std::string>{problem};
            bool all_ok = true;
            for (auto const& p : problems) {
                auto const res = check_derivatives(*registry(p));
                all_ok         = all_ok && res.passed();
                out << (res.passed() ? "PASS " : "FAIL ") << p
                    << " grad_rel_err=" << format_double(res.max_gradient_error());
                if (!res.hessian_errors.empty()) {
                    out << " hess_rel_err=" << format_double(res.max_hessian_error());
                }
                out << '\n';
            }
            return all_ok ? 0 : 1;
        }
    }
    catch (std::exception const& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

} // namespace opthim
