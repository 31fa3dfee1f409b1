#pragma once

/// CSV and JSON artifacts: snapshot and trajectory tables, run manifests,
/// diagnostic reports, and series reports.  Every floating-point value is
/// written with %.17g (and JSON uses shortest-round-trip formatting), so a
/// rerun that reproduces the same state reproduces the same bytes, and
/// reading a file back recovers the exact doubles.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "redqueen/diagnostics.hpp"
#include "redqueen/errors.hpp"
#include "redqueen/series.hpp"
#include "redqueen/solver.hpp"

namespace redqueen {

using json = nlohmann::json;

/// Shortest exact decimal form of a double (17 significant digits).
inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline double parse_double(std::string_view s, const std::string& where) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last)
        throw config_error(where + ": cannot parse number '" + std::string(s) + "'");
    return v;
}

inline std::vector<std::string_view> split_line(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

}  // namespace detail

// ========================= plain file helpers ===========================

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot open for writing: " + path.string());
    out << content;
    if (!out) throw config_error("write failed: " + path.string());
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open: " + path.string());
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return content;
}

inline void write_json_file(const std::filesystem::path& path, const json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

inline json read_json_file(const std::filesystem::path& path) {
    try {
        return json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        throw config_error(path.string() + ": " + e.what());
    }
}

// ============================ snapshot CSV ==============================

/// One CSV per snapshot: header "z1[,z2],h,p", flat row-major node order.
inline void write_snapshot_csv(const std::filesystem::path& path, const Grid& g,
                               const Field& h, const Field& p) {
    if (h.size() != g.size() || p.size() != g.size())
        throw config_error("write_snapshot_csv: field size does not match the grid");
    std::string out;
    out.reserve(g.size() * 48);
    out += g.n == 1 ? "z1,h,p\n" : "z1,z2,h,p\n";
    for (std::size_t f = 0; f < g.size(); ++f) {
        const Point z = g.point(f);
        out += format_g17(z[0]);
        if (g.n == 2) {
            out += ',';
            out += format_g17(z[1]);
        }
        out += ',';
        out += format_g17(h[f]);
        out += ',';
        out += format_g17(p[f]);
        out += '\n';
    }
    write_text_file(path, out);
}

/// Reads a snapshot written by write_snapshot_csv back onto its grid.
inline std::pair<Field, Field> read_snapshot_csv(const std::filesystem::path& path,
                                                 const Grid& g) {
    const std::string text = read_text_file(path);
    const std::string expect_header = g.n == 1 ? "z1,h,p" : "z1,z2,h,p";
    Field h, p;
    h.reserve(g.size());
    p.reserve(g.size());
    std::size_t pos = 0;
    int lineno = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        const std::string_view line(text.data() + pos, end - pos);
        pos = end + 1;
        ++lineno;
        if (line.empty()) continue;
        const std::string where = path.string() + ":" + std::to_string(lineno);
        if (lineno == 1) {
            if (line != expect_header)
                throw config_error(where + ": expected header '" + expect_header + "'");
            continue;
        }
        const auto cells = detail::split_line(line);
        if (static_cast<int>(cells.size()) != g.n + 2)
            throw config_error(where + ": expected " + std::to_string(g.n + 2) + " columns");
        h.push_back(detail::parse_double(cells[static_cast<std::size_t>(g.n)], where));
        p.push_back(detail::parse_double(cells[static_cast<std::size_t>(g.n) + 1], where));
    }
    if (h.size() != g.size())
        throw config_error(path.string() + ": expected " + std::to_string(g.size()) +
                           " rows, found " + std::to_string(h.size()));
    return {std::move(h), std::move(p)};
}

// =========================== trajectory CSV =============================

/// Scalar observables per step: "t,H,P,xbar1[,xbar2],ybar1[,ybar2]".
/// An extinct pathogen leaves its mean as "nan".
inline void write_trajectory_csv(const std::filesystem::path& path, int n,
                                 const std::vector<TrajectorySample>& samples) {
    std::string out;
    out.reserve(samples.size() * 96 + 64);
    out += n == 1 ? "t,H,P,xbar1,ybar1\n" : "t,H,P,xbar1,xbar2,ybar1,ybar2\n";
    for (const TrajectorySample& s : samples) {
        out += format_g17(s.t);
        out += ',';
        out += format_g17(s.H);
        out += ',';
        out += format_g17(s.P);
        for (int ax = 0; ax < n; ++ax) {
            out += ',';
            out += format_g17(s.xbar[static_cast<std::size_t>(ax)]);
        }
        for (int ax = 0; ax < n; ++ax) {
            out += ',';
            out += format_g17(s.ybar[static_cast<std::size_t>(ax)]);
        }
        out += '\n';
    }
    write_text_file(path, out);
}

inline std::vector<TrajectorySample> read_trajectory_csv(const std::filesystem::path& path,
                                                         int n) {
    if (n != 1 && n != 2) throw config_error("read_trajectory_csv: dimension must be 1 or 2");
    const std::string text = read_text_file(path);
    const std::string expect_header =
        n == 1 ? "t,H,P,xbar1,ybar1" : "t,H,P,xbar1,xbar2,ybar1,ybar2";
    std::vector<TrajectorySample> out;
    std::size_t pos = 0;
    int lineno = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        const std::string_view line(text.data() + pos, end - pos);
        pos = end + 1;
        ++lineno;
        if (line.empty()) continue;
        const std::string where = path.string() + ":" + std::to_string(lineno);
        if (lineno == 1) {
            if (line != expect_header)
                throw config_error(where + ": expected header '" + expect_header + "'");
            continue;
        }
        const auto cells = detail::split_line(line);
        if (cells.size() != static_cast<std::size_t>(3 + 2 * n))
            throw config_error(where + ": expected " + std::to_string(3 + 2 * n) + " columns");
        TrajectorySample s;
        s.t = detail::parse_double(cells[0], where);
        s.H = detail::parse_double(cells[1], where);
        s.P = detail::parse_double(cells[2], where);
        for (int ax = 0; ax < n; ++ax)
            s.xbar[static_cast<std::size_t>(ax)] =
                detail::parse_double(cells[static_cast<std::size_t>(3 + ax)], where);
        for (int ax = 0; ax < n; ++ax)
            s.ybar[static_cast<std::size_t>(ax)] =
                detail::parse_double(cells[static_cast<std::size_t>(3 + n + ax)], where);
        out.push_back(s);
    }
    return out;
}

// ========================== JSON conversions ============================

/// NaN (or infinity) becomes null so reports stay valid JSON.
inline json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline double number_or_nan(const json& j) {
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

inline json point_to_json(const Point& p, int n) {
    json a = json::array();
    for (int ax = 0; ax < n; ++ax) a.push_back(number_or_null(p[static_cast<std::size_t>(ax)]));
    return a;
}

inline Point point_from_json(const json& a) {
    Point p{0.0, 0.0};
    for (std::size_t ax = 0; ax < a.size() && ax < 2; ++ax) p[ax] = number_or_nan(a[ax]);
    return p;
}

inline json params_to_json(const ModelParams& prm) {
    return json{{"n", prm.n},           {"mu_H2", prm.mu_H2},
                {"mu_P2", prm.mu_P2},   {"R_H", prm.R_H},
                {"R_P", prm.R_P},       {"gamma_H", prm.gamma_H},
                {"gamma_P", prm.gamma_P}, {"rho_max", prm.rho_max},
                {"theta", prm.theta},   {"alpha_H", prm.alpha_H},
                {"alpha_P", prm.alpha_P}, {"beta", prm.beta},
                {"ell", prm.ell},       {"u", point_to_json(prm.u, prm.n)}};
}

inline ModelParams params_from_json(const json& j) {
    ModelParams p;
    p.n = j.at("n").get<int>();
    p.mu_H2 = j.at("mu_H2").get<double>();
    p.mu_P2 = j.at("mu_P2").get<double>();
    p.R_H = j.at("R_H").get<double>();
    p.R_P = j.at("R_P").get<double>();
    p.gamma_H = j.at("gamma_H").get<double>();
    p.gamma_P = j.at("gamma_P").get<double>();
    p.rho_max = j.at("rho_max").get<double>();
    p.theta = j.at("theta").get<double>();
    p.alpha_H = j.at("alpha_H").get<double>();
    p.alpha_P = j.at("alpha_P").get<double>();
    p.beta = j.at("beta").get<double>();
    p.ell = j.at("ell").get<double>();
    p.u = point_from_json(j.at("u"));
    return p;
}

inline json grid_to_json(const Grid& g) {
    return json{{"n", g.n}, {"lo", g.lo}, {"hi", g.hi}, {"m", g.m}};
}

inline Grid grid_from_json(const json& j) {
    return Grid(j.at("n").get<int>(), j.at("lo").get<double>(), j.at("hi").get<double>(),
                j.at("m").get<int>());
}

inline json sim_options_to_json(const SimOptions& o, int n) {
    return json{{"t_end", o.t_end},
                {"dt", o.dt},
                {"m", o.m},
                {"half_width", o.half_width},
                {"comoving", o.comoving},
                {"sample_every", o.sample_every},
                {"snapshot_count", o.snapshot_count},
                {"x0", point_to_json(o.x0, n)},
                {"y0", point_to_json(o.y0, n)},
                {"init_std", o.init_std},
                {"mass_H0", o.mass_H0},
                {"mass_P0", o.mass_P0}};
}

inline SimOptions sim_options_from_json(const json& j) {
    SimOptions o;
    o.t_end = j.at("t_end").get<double>();
    o.dt = j.at("dt").get<double>();
    o.m = j.at("m").get<int>();
    o.half_width = j.at("half_width").get<double>();
    o.comoving = j.at("comoving").get<bool>();
    o.sample_every = j.at("sample_every").get<int>();
    o.snapshot_count = j.at("snapshot_count").get<int>();
    o.x0 = point_from_json(j.at("x0"));
    o.y0 = point_from_json(j.at("y0"));
    o.init_std = j.at("init_std").get<double>();
    o.mass_H0 = j.at("mass_H0").get<double>();
    o.mass_P0 = j.at("mass_P0").get<double>();
    return o;
}

inline Regime regime_from_name(const std::string& name) {
    for (Regime r : {Regime::ring_diffusing, Regime::ring_stationary, Regime::linear_pulse,
                     Regime::rotating_pulse, Regime::undetermined})
        if (name == regime_name(r)) return r;
    throw config_error("unknown regime name '" + name + "'");
}

inline json pulse_report_to_json(const PulseReport& r, int n) {
    return json{{"regime", regime_name(r.regime)},
                {"c_fit", number_or_null(r.c_fit)},
                {"direction", point_to_json(r.direction, n)},
                {"delay_fit", number_or_null(r.delay_fit)},
                {"radius_fit", number_or_null(r.radius_fit)},
                {"omega_fit", number_or_null(r.omega_fit)},
                {"r2", number_or_null(r.r2)},
                {"profile_residual", number_or_null(r.profile_residual)},
                {"ring_score_last", number_or_null(r.ring_score_last)}};
}

inline PulseReport pulse_report_from_json(const json& j) {
    PulseReport r;
    r.regime = regime_from_name(j.at("regime").get<std::string>());
    r.c_fit = number_or_nan(j.at("c_fit"));
    r.direction = point_from_json(j.at("direction"));
    r.delay_fit = number_or_nan(j.at("delay_fit"));
    r.radius_fit = number_or_nan(j.at("radius_fit"));
    r.omega_fit = number_or_nan(j.at("omega_fit"));
    r.r2 = number_or_nan(j.at("r2"));
    r.profile_residual = number_or_nan(j.at("profile_residual"));
    r.ring_score_last = number_or_nan(j.at("ring_score_last"));
    return r;
}

// ============================ series report =============================

/// Per-k rows "k,scaled_sum,exponent,bound_estimate"; the bound estimate is
/// the running maximum of the scaled sums, i.e. the constant the series has
/// exhibited so far.
inline void write_series_csv(const std::filesystem::path& path, const BoundReport& rep) {
    std::string out = "k,scaled_sum,exponent,bound_estimate\n";
    out.reserve(rep.scaled.size() * 64 + 64);
    double running = 0.0;
    for (std::size_t i = 0; i < rep.scaled.size(); ++i) {
        running = std::max(running, rep.scaled[i]);
        out += std::to_string(i + 1);
        out += ',';
        out += format_g17(rep.scaled[i]);
        out += ',';
        out += format_g17(rep.exponent);
        out += ',';
        out += format_g17(running);
        out += '\n';
    }
    write_text_file(path, out);
}

inline json bound_report_to_json(const BoundReport& rep) {
    return json{{"exponent", rep.exponent},
                {"b", rep.b},
                {"theta_bar", rep.theta_bar},
                {"k_max", rep.k_max},
                {"sup", rep.sup},
                {"argmax_k", rep.argmax_k},
                {"last_decade_max", rep.last_decade_max},
                {"bounded", rep.bounded()}};
}

}  // namespace redqueen
