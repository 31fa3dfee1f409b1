#pragma once

/// Plain-text experiment configuration: sections in brackets, `key = value`
/// pairs, `#` comments, blank lines ignored.  Numbers are parsed as plain
/// decimal with no locale dependence; every rejection names the file, line,
/// and offending key.  A `[sweep]` section turns the file into a grid of
/// runs, one cell per combination of the listed parameter values.
///
/// Recognized sections and keys:
///   [model]    n, mu_H2, mu_P2, R_H, R_P, gamma_H, gamma_P, rho_max, theta,
///              alpha_H, alpha_P, beta, ell, u (one or two numbers)
///   [run]      t_end, dt (number or auto), m, half_width (number or auto),
///              comoving (true/false), sample_every, snapshot_count
///   [initial]  x0, y0 (one or two numbers), std, mass_H, mass_P
///   [output]   dir (path, relative to the output root)
///   [sweep]    <any scalar [model] key> = list of values

#include <charconv>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "redqueen/errors.hpp"
#include "redqueen/io.hpp"
#include "redqueen/model.hpp"
#include "redqueen/solver.hpp"

namespace redqueen {

struct SimulationConfig {
    ModelParams params;
    SimOptions options;
    std::string out_dir;  ///< artifact directory, relative to the output root
};

struct SweepAxis {
    std::string key;             ///< scalar model parameter name
    std::vector<double> values;  ///< one run per value
};

/// A base configuration plus the sweep grid (empty axes = a single run).
struct SweepConfig {
    SimulationConfig base;
    std::vector<SweepAxis> axes;
};

/// Sets a scalar model parameter by config-file name.  Used both by the
/// sweep grid and by the [model] section.
inline void apply_model_override(ModelParams& p, const std::string& key, double value,
                                 const std::string& where) {
    if (key == "mu_H2") p.mu_H2 = value;
    else if (key == "mu_P2") p.mu_P2 = value;
    else if (key == "R_H") p.R_H = value;
    else if (key == "R_P") p.R_P = value;
    else if (key == "gamma_H") p.gamma_H = value;
    else if (key == "gamma_P") p.gamma_P = value;
    else if (key == "rho_max") p.rho_max = value;
    else if (key == "theta") p.theta = value;
    else if (key == "alpha_H") p.alpha_H = value;
    else if (key == "alpha_P") p.alpha_P = value;
    else if (key == "beta") p.beta = value;
    else if (key == "ell") p.ell = value;
    else
        throw config_error(where + ": unknown model parameter '" + key + "'");
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        std::size_t start = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
        if (i > start) out.push_back(s.substr(start, i - start));
    }
    return out;
}

inline int parse_int(std::string_view s, const std::string& where) {
    int v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw config_error(where + ": cannot parse integer '" + std::string(s) + "'");
    return v;
}

inline bool parse_bool(std::string_view s, const std::string& where) {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw config_error(where + ": expected true/false, got '" + std::string(s) + "'");
}

/// A number, or `auto` meaning "derive it" (stored as 0).
inline double parse_auto(std::string_view s, const std::string& where) {
    if (s == "auto") return 0.0;
    return parse_double(s, where);
}

inline Point parse_point(std::string_view s, const std::string& where) {
    const auto parts = split_ws(s);
    if (parts.empty() || parts.size() > 2)
        throw config_error(where + ": expected one or two numbers");
    Point p{parse_double(parts[0], where), 0.0};
    if (parts.size() == 2) p[1] = parse_double(parts[1], where);
    return p;
}

}  // namespace detail

/// Parses a configuration file.  The result carries the sweep grid; files
/// without a [sweep] section come back with empty axes.
inline SweepConfig parse_config_file(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    SweepConfig cfg;
    std::string section;
    std::vector<std::string> seen;  // "section/key" duplicates guard

    std::size_t pos = 0;
    int lineno = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        std::string_view line(text.data() + pos, end - pos);
        pos = end + 1;
        ++lineno;
        const std::string where = path.string() + ":" + std::to_string(lineno);

        const std::size_t hash = line.find('#');
        if (hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) {
            if (pos > text.size()) break;
            continue;
        }

        if (line.front() == '[') {
            if (line.back() != ']') throw config_error(where + ": unterminated section header");
            section = std::string(detail::trim(line.substr(1, line.size() - 2)));
            if (section != "model" && section != "run" && section != "initial" &&
                section != "output" && section != "sweep")
                throw config_error(where + ": unknown section '" + section + "'");
            continue;
        }

        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos)
            throw config_error(where + ": expected 'key = value'");
        const std::string key(detail::trim(line.substr(0, eq)));
        const std::string_view value = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw config_error(where + ": empty key");
        if (value.empty()) throw config_error(where + ": empty value for '" + key + "'");
        if (section.empty())
            throw config_error(where + ": key '" + key + "' outside any section");

        const std::string tag = section + "/" + key;
        for (const std::string& s : seen)
            if (s == tag) throw config_error(where + ": duplicate key '" + key + "'");
        seen.push_back(tag);

        ModelParams& prm = cfg.base.params;
        SimOptions& opt = cfg.base.options;
        if (section == "model") {
            if (key == "n") prm.n = detail::parse_int(value, where);
            else if (key == "u") prm.u = detail::parse_point(value, where);
            else apply_model_override(prm, key, detail::parse_double(value, where), where);
        } else if (section == "run") {
            if (key == "t_end") opt.t_end = detail::parse_double(value, where);
            else if (key == "dt") opt.dt = detail::parse_auto(value, where);
            else if (key == "m") opt.m = detail::parse_int(value, where);
            else if (key == "half_width") opt.half_width = detail::parse_auto(value, where);
            else if (key == "comoving") opt.comoving = detail::parse_bool(value, where);
            else if (key == "sample_every") opt.sample_every = detail::parse_int(value, where);
            else if (key == "snapshot_count")
                opt.snapshot_count = detail::parse_int(value, where);
            else
                throw config_error(where + ": unknown key '" + key + "' in [run]");
        } else if (section == "initial") {
            if (key == "x0") opt.x0 = detail::parse_point(value, where);
            else if (key == "y0") opt.y0 = detail::parse_point(value, where);
            else if (key == "std") opt.init_std = detail::parse_double(value, where);
            else if (key == "mass_H") opt.mass_H0 = detail::parse_double(value, where);
            else if (key == "mass_P") opt.mass_P0 = detail::parse_double(value, where);
            else
                throw config_error(where + ": unknown key '" + key + "' in [initial]");
        } else if (section == "output") {
            if (key == "dir") cfg.base.out_dir = std::string(value);
            else
                throw config_error(where + ": unknown key '" + key + "' in [output]");
        } else {  // sweep
            SweepAxis axis;
            axis.key = key;
            {  // validate the key names a scalar model parameter
                ModelParams probe;
                apply_model_override(probe, key, 0.0, where);
            }
            for (const std::string_view v : detail::split_ws(value))
                axis.values.push_back(detail::parse_double(v, where));
            cfg.axes.push_back(std::move(axis));
        }
        if (pos > text.size()) break;
    }

    if (cfg.base.out_dir.empty())
        cfg.base.out_dir = path.stem().string().empty() ? "run" : path.stem().string();
    return cfg;
}

/// Parses a single-run configuration; rejects files with a sweep grid.
inline SimulationConfig parse_sim_config(const std::filesystem::path& path) {
    SweepConfig cfg = parse_config_file(path);
    if (!cfg.axes.empty())
        throw config_error(path.string() +
                           ": this file declares a [sweep] grid; use the sweep command");
    return std::move(cfg.base);
}

}  // namespace redqueen
