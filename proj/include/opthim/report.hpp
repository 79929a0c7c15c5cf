#pragma once

/// \file report.hpp
///
/// Flat-file outputs of a run: the per-iteration history CSV, the summary
/// JSON and its aligned text table, trajectories and contour grids.

#include "solver.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

namespace opthim {

class IoError : public Error {
  public:
    using Error::Error;
};

// ============================ Number formatting ============================

/// Shortest decimal representation that parses back to the same double.
inline auto format_double(double v) -> std::string
{
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) { throw IoError{"format_double: conversion failed"}; }
    return std::string{buf, end};
}

inline auto parse_double(std::string_view s) -> double
{
    double v   = 0.0;
    auto   res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        // from_chars rejects the "inf"/"nan" spellings with a sign prefix
        // on some libraries; fall back to strtod for those.
        std::string const copy{s};
        char*             end = nullptr;
        v                     = std::strtod(copy.c_str(), &end);
        if (end != copy.c_str() + copy.size() || copy.empty()) {
            throw IoError{"cannot parse number '" + copy + "'"};
        }
    }
    return v;
}

namespace detail {
inline auto open_for_write(std::string const& path) -> std::ofstream
{
    auto const parent = std::filesystem::path{path}.parent_path();
    if (!parent.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(parent, ec);
    }
    std::ofstream out{path};
    if (!out) { throw IoError{"cannot open '" + path + "' for writing"}; }
    return out;
}

inline void check_written(std::ofstream& out, std::string const& path)
{
    out.flush();
    if (!out) { throw IoError{"write to '" + path + "' failed"}; }
}

inline auto split_csv(std::string const& line) -> std::vector<std::string>
{
    std::vector<std::string> cells;
    std::string              cell;
    std::istringstream       in{line};
    while (std::getline(in, cell, ',')) { cells.push_back(cell); }
    if (!line.empty() && line.back() == ',') { cells.emplace_back(); }
    return cells;
}
} // namespace detail

// ============================== History CSV ===============================

inline constexpr char const* history_header =
    "k,f,grad_norm,step_param,step_norm,fev,gev,hev,time_s,accepted";

inline void emit_history_csv(RunRecord const& record, std::string const& path)
{
    auto out = detail::open_for_write(path);
    out << history_header << '\n';
    for (auto const& r : record.history) {
        out << r.k << ',' << format_double(r.f) << ',' << format_double(r.grad_norm) << ','
            << format_double(r.step_param) << ',' << format_double(r.step_norm) << ',' << r.fev
            << ',' << r.gev << ',' << r.hev << ',' << format_double(r.time_s) << ','
            << (r.accepted ? 1 : 0) << '\n';
    }
    detail::check_written(out, path);
}

inline auto read_history_csv(std::string const& path) -> std::vector<HistoryRow>
{
    std::ifstream in{path};
    if (!in) { throw IoError{"cannot open '" + path + "'"}; }
    std::string line;
    if (!std::getline(in, line) || line != history_header) {
        throw IoError{"'" + path + "': unexpected history header"};
    }
    std::vector<HistoryRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) { continue; }
        auto const c = detail::split_csv(line);
        if (c.size() != 10) { throw IoError{"'" + path + "': malformed row '" + line + "'"}; }
        HistoryRow r;
        r.k          = std::stoll(c[0]);
        r.f          = parse_double(c[1]);
        r.grad_norm  = parse_double(c[2]);
        r.step_param = parse_double(c[3]);
        r.step_norm  = parse_double(c[4]);
        r.fev        = std::stoll(c[5]);
        r.gev        = std::stoll(c[6]);
        r.hev        = std::stoll(c[7]);
        r.time_s     = parse_double(c[8]);
        r.accepted   = c[9] == "1";
        rows.push_back(r);
    }
    return rows;
}

// =============================== Summaries ================================

/// One row of a summary: what the metric tables report per run.
struct SummaryEntry {
    std::string  problem;
    std::string  method;
    std::string  variant;
    std::int64_t iterations = 0;
    std::int64_t func_evals = 0;
    std::int64_t grad_evals = 0;
    std::int64_t hess_evals = 0;
    double       time_s     = 0.0;
    bool         converged  = false;
    double       final_f         = 0.0;
    double       final_grad_norm = 0.0;
    std::string  error;

    friend auto operator==(SummaryEntry const&, SummaryEntry const&) -> bool = default;
};

inline auto summarize(RunRecord const& r) -> SummaryEntry
{
    return SummaryEntry{r.problem,    to_string(r.config.method), r.config.variant(),
                        r.iterations, r.func_evals,               r.grad_evals,
                        r.hess_evals, r.wall_time,                r.converged,
                        r.final_f,    r.final_grad_norm,          r.error.value_or("")};
}

inline auto to_json(SummaryEntry const& e) -> nlohmann::json
{
    nlohmann::json j{
        {"problem", e.problem},
        {"method", e.method},
        {"variant", e.variant},
        {"iterations", e.iterations},
        {"func_evals", e.func_evals},
        {"grad_evals", e.grad_evals},
        {"hess_evals", e.hess_evals},
        {"time_s", e.time_s},
        {"converged", e.converged},
        {"final_f", e.final_f},
        {"final_grad_norm", e.final_grad_norm},
    };
    j["error"] = e.error.empty() ? nlohmann::json(nullptr) : nlohmann::json(e.error);
    return j;
}

inline auto summary_from_json(nlohmann::json const& j) -> SummaryEntry
{
    auto number = [&](char const* key) {
        auto const& v = j.at(key);
        return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
    };
    SummaryEntry e;
    e.problem         = j.at("problem").get<std::string>();
    e.method          = j.at("method").get<std::string>();
    e.variant         = j.at("variant").get<std::string>();
    e.iterations      = j.at("iterations").get<std::int64_t>();
    e.func_evals      = j.at("func_evals").get<std::int64_t>();
    e.grad_evals      = j.at("grad_evals").get<std::int64_t>();
    e.hess_evals      = j.value("hess_evals", std::int64_t{0});
    e.time_s          = number("time_s");
    e.converged       = j.at("converged").get<bool>();
    e.final_f         = number("final_f");
    e.final_grad_norm = number("final_grad_norm");
    if (j.contains("error") && !j.at("error").is_null()) { e.error = j.at("error").get<std::string>(); }
    return e;
}

namespace detail {
inline auto column_label(SummaryEntry const& e) -> std::string
{
    static std::map<std::string, std::string> const names{
        {"gd", "GD"},     {"newton", "Newton"}, {"bfgs", "BFGS"},
        {"lbfgs", "L-BFGS"}, {"dfp", "DFP"},    {"sr1", "SR1"}};
    auto label = [&](std::string const& key) {
        auto it = names.find(key);
        return it == names.end() ? key : it->second;
    };
    if (e.method == "tr") {
        auto const dash = e.variant.find('-');
        return "TR-" + label(e.variant.substr(0, dash));
    }
    return label(e.method);
}
} // namespace detail

/// Aligned text table: one block of metric rows per problem, one column per
/// method; variants of a method (Armijo | Wolfe, CG | Cauchy) share a cell
/// separated by " | ".
inline auto summary_table(std::vector<SummaryEntry> const& entries) -> std::string
{
    std::vector<std::string> problems;
    std::vector<std::string> columns;
    std::map<std::pair<std::string, std::string>, std::vector<SummaryEntry const*>> cells;
    for (auto const& e : entries) {
        auto const col = detail::column_label(e);
        if (std::find(problems.begin(), problems.end(), e.problem) == problems.end()) {
            problems.push_back(e.problem);
        }
        if (std::find(columns.begin(), columns.end(), col) == columns.end()) {
            columns.push_back(col);
        }
        cells[{e.problem, col}].push_back(&e);
    }

    std::vector<std::pair<std::string, std::function<std::string(SummaryEntry const&)>>> const
        metrics{
            {"Iterations", [](auto const& e) { return std::to_string(e.iterations); }},
            {"Func Evals", [](auto const& e) { return std::to_string(e.func_evals); }},
            {"Grad Evals", [](auto const& e) { return std::to_string(e.grad_evals); }},
            {"Time (s)",
             [](auto const& e) {
                 std::ostringstream s;
                 s << std::fixed << std::setprecision(2) << e.time_s;
                 return s.str();
             }},
            {"Converged?", [](auto const& e) { return std::string{e.converged ? "T" : "F"}; }},
        };

    std::vector<std::vector<std::string>> rows;
    rows.push_back({"Problem", "Metric"});
    for (auto const& c : columns) { rows.front().push_back(c); }
    for (auto const& p : problems) {
        bool first = true;
        for (auto const& [metric, fmt] : metrics) {
            std::vector<std::string> row{first ? p : "", metric};
            first = false;
            for (auto const& c : columns) {
                std::string cell;
                if (auto it = cells.find({p, c}); it != cells.end()) {
                    for (auto const* e : it->second) {
                        cell += (cell.empty() ? "" : " | ") + fmt(*e);
                    }
                }
                else {
                    cell = "-";
                }
                row.push_back(cell);
            }
            rows.push_back(std::move(row));
        }
    }

    std::vector<std::size_t> width(rows.front().size(), 0);
    for (auto const& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) { width[i] = std::max(width[i], row[i].size()); }
    }
    std::ostringstream out;
    auto               rule = [&] {
        std::size_t total = 0;
        for (auto w : width) { total += w + 2; }
        out << std::string(total, '-') << '\n';
    };
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (r <= 1 || (r - 1) % metrics.size() == 0) { rule(); }
        for (std::size_t i = 0; i < rows[r].size(); ++i) {
            out << std::left << std::setw(static_cast<int>(width[i] + 2)) << rows[r][i];
        }
        out << '\n';
    }
    rule();
    return out.str();
}

/// Writes the JSON array of summaries to json_path and the aligned table to
/// json_path with its extension replaced by ".txt".
inline void emit_summary(std::vector<RunRecord> const& records, std::string const& json_path)
{
    if (records.empty()) { throw Error{"emit_summary: no run records"}; }
    std::vector<SummaryEntry> entries;
    nlohmann::json            array = nlohmann::json::array();
    for (auto const& r : records) {
        entries.push_back(summarize(r));
        array.push_back(to_json(entries.back()));
    }
    {
        auto out = detail::open_for_write(json_path);
        out << array.dump(2) << '\n';
        detail::check_written(out, json_path);
    }
    auto const table_path = std::filesystem::path{json_path}.replace_extension(".txt").string();
    auto       out        = detail::open_for_write(table_path);
    out << summary_table(entries);
    detail::check_written(out, table_path);
}

inline auto read_summary_json(std::string const& path) -> std::vector<SummaryEntry>
{
    std::ifstream in{path};
    if (!in) { throw IoError{"cannot open '" + path + "'"}; }
    nlohmann::json j;
    try {
        in >> j;
    }
    catch (nlohmann::json::exception const& e) {
        throw IoError{"'" + path + "': " + e.what()};
    }
    std::vector<SummaryEntry> out;
    for (auto const& item : j) { out.push_back(summary_from_json(item)); }
    return out;
}

// ======================== Trajectories and contours ========================

/// One row per recorded iterate: k,x0,x1,...
inline void emit_trajectory(RunRecord const& record, std::string const& path)
{
    if (record.trajectory.empty()) {
        throw Error{"emit_trajectory: run has no recorded trajectory"};
    }
    auto       out = detail::open_for_write(path);
    auto const n   = record.trajectory.front().size();
    out << 'k';
    for (Eigen::Index i = 0; i < n; ++i) { out << ",x" << i; }
    out << '\n';
    for (std::size_t k = 0; k < record.trajectory.size(); ++k) {
        out << k;
        for (Eigen::Index i = 0; i < n; ++i) { out << ',' << format_double(record.trajectory[k][i]); }
        out << '\n';
    }
    detail::check_written(out, path);
}

inline auto read_trajectory_csv(std::string const& path) -> std::vector<Vector>
{
    std::ifstream in{path};
    if (!in) { throw IoError{"cannot open '" + path + "'"}; }
    std::string line;
    std::getline(in, line);
    std::vector<Vector> out;
    while (std::getline(in, line)) {
        if (line.empty()) { continue; }
        auto const c = detail::split_csv(line);
        Vector     x(static_cast<Eigen::Index>(c.size()) - 1);
        for (std::size_t i = 1; i < c.size(); ++i) {
            x[static_cast<Eigen::Index>(i) - 1] = parse_double(c[i]);
        }
        out.push_back(std::move(x));
    }
    return out;
}

/// Bounding box of the first two trajectory coordinates, padded by 10 %.
inline auto trajectory_box(std::vector<Vector> const& trajectory) -> GridBox
{
    if (trajectory.empty() || trajectory.front().size() < 2) {
        throw Error{"trajectory_box: need a trajectory of dimension >= 2"};
    }
    GridBox box{trajectory[0][0], trajectory[0][0], trajectory[0][1], trajectory[0][1]};
    for (auto const& x : trajectory) {
        box.u_lo = std::min(box.u_lo, x[0]);
        box.u_hi = std::max(box.u_hi, x[0]);
        box.v_lo = std::min(box.v_lo, x[1]);
        box.v_hi = std::max(box.v_hi, x[1]);
    }
    double const pu = std::max(0.1 * (box.u_hi - box.u_lo), 0.1);
    double const pv = std::max(0.1 * (box.v_hi - box.v_lo), 0.1);
    return GridBox{box.u_lo - pu, box.u_hi + pu, box.v_lo - pv, box.v_hi + pv};
}

/// Samples f on a resolution x resolution grid over the first two
/// coordinates; remaining coordinates are held at `anchor`. Columns: u,v,f.
inline void emit_contour_grid(Objective const& obj, Vector const& anchor, GridBox const& box,
                              int resolution, std::string const& path)
{
    obj.check_dimension(anchor);
    if (anchor.size() < 2) { throw Error{"emit_contour_grid: objective must have n >= 2"}; }
    if (resolution < 2) { throw Error{"emit_contour_grid: resolution must be at least 2"}; }
    auto   out = detail::open_for_write(path);
    Vector x   = anchor;
    out << "u,v,f\n";
    double const du = (box.u_hi - box.u_lo) / (resolution - 1);
    double const dv = (box.v_hi - box.v_lo) / (resolution - 1);
    for (int j = 0; j < resolution; ++j) {
        for (int i = 0; i < resolution; ++i) {
            x[0] = box.u_lo + i * du;
            x[1] = box.v_lo + j * dv;
            out << format_double(x[0]) << ',' << format_double(x[1]) << ','
                << format_double(obj.value(x)) << '\n';
        }
    }
    detail::check_written(out, path);
}

} // namespace opthim
