#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hho/report.hpp"

namespace hho {

/// Invalid run configuration; the CLI maps it to exit status 2.
class config_error : public error
{
public:
    using error::error;
};

/**
 * Batch run description, read from a JSON object:
 *
 *   command      "verify" | "converge" | "solve" (optional, must match the subcommand)
 *   case         built-in case name: smooth-sine, poly-consistency, kink-aligned, zero
 *   degree       p for converge and solve
 *   degrees      list of p for verify
 *   levels       unit-square subdivisions (converge: at least 2; verify: mesh list)
 *   n            unit-square subdivisions for solve
 *   mesh         mesh file or list of mesh files (verify, solve); relative to the config
 *   method       "classical" | "smoothed"
 *   averaging    "mean" | "scott-zhang", or a list of them for verify
 *   solver       {"method": "cholesky" | "cg", "tolerance": 1e-12, "max_iter": 100000}
 *   seed         RNG seed of the random fields in verify
 *   fields       number of random fields per moment check
 *   quad_extra   extra load-quadrature order (HHO_QUAD_EXTRA overrides)
 *   lattice      samples per cell edge in the solve dump
 *   prefix       output file prefix
 */
struct run_config
{
    std::string                 command;
    std::string                 case_name = "smooth-sine";
    int                         degree    = 1;
    std::vector<int>            degrees   = {0, 1, 2};
    std::vector<std::size_t>    levels;
    std::size_t                 n = 8;
    std::vector<std::string>    meshes;
    method_kind                 method = method_kind::smoothed;
    std::vector<averaging_kind> averaging;
    solver_options              solver;
    unsigned                    seed       = 1;
    std::size_t                 fields     = 100;
    int                         quad_extra = default_quad_extra;
    int                         lattice    = 4;
    std::string                 prefix;

    averaging_kind first_averaging() const { return averaging.empty() ? averaging_kind::mean : averaging.front(); }
};

namespace detail {

inline std::pair<std::size_t, std::size_t>
line_column(const std::string& text, std::size_t byte)
{
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); i++) {
        if (text[i] == '\n') {
            line++;
            col = 1;
        } else {
            col++;
        }
    }
    return {line, col};
}

class config_reader
{
    const std::string& m_text;
    std::string        m_source;

public:
    config_reader(const std::string& text, std::string source)
        : m_text(text)
        , m_source(std::move(source))
    {}

    [[noreturn]] void fail(const std::string& key, const std::string& what) const
    {
        std::string where = m_source;
        const auto  pos   = m_text.find('"' + key + '"');
        if (!key.empty() && pos != std::string::npos) {
            const auto [l, c] = line_column(m_text, pos);
            where += ":" + std::to_string(l) + ":" + std::to_string(c);
        }
        throw config_error(where + ": " + (key.empty() ? "" : "field '" + key + "': ") + what);
    }

    nlohmann::json parse() const
    {
        try {
            return nlohmann::json::parse(m_text);
        } catch (const nlohmann::json::parse_error& e) {
            const std::size_t byte   = e.byte > 0 ? e.byte - 1 : 0;
            const auto [l, c]        = line_column(m_text, byte);
            std::string       reason = e.what();
            const auto        colon  = reason.rfind(": ");
            if (colon != std::string::npos)
                reason = reason.substr(colon + 2);
            throw config_error(m_source + ":" + std::to_string(l) + ":" + std::to_string(c) + ": " + reason);
        }
    }

    long integer(const nlohmann::json& v, const std::string& key, long lo, long hi) const
    {
        if (!v.is_number_integer())
            fail(key, "expected an integer");
        const long x = v.get<long>();
        if (x < lo || x > hi)
            fail(key, "value " + std::to_string(x) + " outside " + std::to_string(lo) + ".." + std::to_string(hi));
        return x;
    }

    std::string string(const nlohmann::json& v, const std::string& key) const
    {
        if (!v.is_string())
            fail(key, "expected a string");
        return v.get<std::string>();
    }

    std::vector<std::string> strings(const nlohmann::json& v, const std::string& key) const
    {
        std::vector<std::string> out;
        if (v.is_array()) {
            for (const auto& e : v)
                out.push_back(string(e, key));
            if (out.empty())
                fail(key, "empty list");
        } else {
            out.push_back(string(v, key));
        }
        return out;
    }
};

inline averaging_kind
parse_averaging(const config_reader& rd, const std::string& s)
{
    if (s == "mean")
        return averaging_kind::mean;
    if (s == "scott-zhang")
        return averaging_kind::scott_zhang;
    rd.fail("averaging", "unknown variant '" + s + "' (mean, scott-zhang)");
}

} // namespace detail

/// Parses and validates a configuration; source names the text in diagnostics.
inline run_config
parse_config(const std::string& text, const std::string& source, const std::string& command,
             const std::filesystem::path& base_dir = {})
{
    const detail::config_reader rd(text, source);
    const nlohmann::json        j = rd.parse();
    if (!j.is_object())
        throw config_error(source + ": the configuration must be a JSON object");

    static const std::set<std::string> known{"command", "case",   "degree",  "degrees", "levels", "n",
                                             "mesh",    "method", "averaging", "solver", "seed",   "fields",
                                             "quad_extra", "lattice", "prefix"};
    for (const auto& [key, v] : j.items())
        if (!known.count(key))
            rd.fail(key, "unknown field");

    run_config cfg;
    cfg.command = command;
    if (j.contains("command") && rd.string(j["command"], "command") != command)
        rd.fail("command", "config is for '" + j["command"].get<std::string>() + "', not '" + command + "'");

    if (j.contains("case"))
        cfg.case_name = rd.string(j["case"], "case");
    if (j.contains("degree"))
        cfg.degree = int(rd.integer(j["degree"], "degree", 0, max_degree));
    if (j.contains("degrees")) {
        if (!j["degrees"].is_array() || j["degrees"].empty())
            rd.fail("degrees", "expected a non-empty list of integers");
        cfg.degrees.clear();
        for (const auto& v : j["degrees"])
            cfg.degrees.push_back(int(rd.integer(v, "degrees", 0, max_degree)));
    }
    if (j.contains("levels")) {
        if (!j["levels"].is_array() || j["levels"].empty())
            rd.fail("levels", "expected a non-empty list of integers");
        for (const auto& v : j["levels"])
            cfg.levels.push_back(std::size_t(rd.integer(v, "levels", 1, 4096)));
    }
    if (j.contains("n"))
        cfg.n = std::size_t(rd.integer(j["n"], "n", 1, 4096));
    if (j.contains("mesh"))
        for (const auto& m : rd.strings(j["mesh"], "mesh"))
            cfg.meshes.push_back(std::filesystem::path(m).is_absolute() ? m : (base_dir / m).string());
    if (j.contains("method")) {
        const auto m = rd.string(j["method"], "method");
        if (m == "classical")
            cfg.method = method_kind::classical;
        else if (m == "smoothed")
            cfg.method = method_kind::smoothed;
        else
            rd.fail("method", "unknown method '" + m + "' (classical, smoothed)");
    }
    if (j.contains("averaging"))
        for (const auto& a : rd.strings(j["averaging"], "averaging"))
            cfg.averaging.push_back(detail::parse_averaging(rd, a));
    if (j.contains("solver")) {
        const auto& s = j["solver"];
        if (!s.is_object())
            rd.fail("solver", "expected an object");
        for (const auto& [key, v] : s.items()) {
            if (key == "method") {
                const auto m = rd.string(v, key);
                if (m == "cholesky")
                    cfg.solver.kind = solver_options::method::cholesky;
                else if (m == "cg")
                    cfg.solver.kind = solver_options::method::cg;
                else
                    rd.fail(key, "unknown solver '" + m + "' (cholesky, cg)");
            } else if (key == "tolerance") {
                if (!v.is_number() || !(v.get<double>() > 0.0))
                    rd.fail(key, "expected a positive number");
                cfg.solver.tolerance = v.get<double>();
            } else if (key == "max_iter") {
                cfg.solver.max_iter = int(rd.integer(v, key, 1, 100000000));
            } else {
                rd.fail(key, "unknown solver field");
            }
        }
    }
    if (j.contains("seed"))
        cfg.seed = unsigned(rd.integer(j["seed"], "seed", 0, 4294967295L));
    if (j.contains("fields"))
        cfg.fields = std::size_t(rd.integer(j["fields"], "fields", 1, 100000));
    if (j.contains("quad_extra"))
        cfg.quad_extra = int(rd.integer(j["quad_extra"], "quad_extra", 0, 20));
    if (j.contains("lattice"))
        cfg.lattice = int(rd.integer(j["lattice"], "lattice", 1, 64));
    if (j.contains("prefix")) {
        cfg.prefix = rd.string(j["prefix"], "prefix");
        if (cfg.prefix.empty() || cfg.prefix.find('/') != std::string::npos)
            rd.fail("prefix", "expected a plain file name prefix");
    }

    if (const char* env = std::getenv("HHO_QUAD_EXTRA")) {
        char*      end = nullptr;
        const long v   = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 0 || v > 20)
            throw config_error(std::string("HHO_QUAD_EXTRA: expected an integer in 0..20, got '") + env + "'");
        cfg.quad_extra = int(v);
    }

    if (command != "verify") {
        manufactured_case mc;
        try {
            mc = find_case(cfg.case_name, cfg.degree);
        } catch (const error& e) {
            rd.fail("case", e.what());
        }
        if (cfg.method == method_kind::classical && mc.load.has_divergence())
            throw method_inapplicable("case '" + mc.name +
                                      "' has a load with a divergence part; the classical method is not defined "
                                      "for it (use \"method\": \"smoothed\")");
        if (cfg.averaging.size() > 1)
            rd.fail("averaging", "a single variant is expected for '" + command + "'");
        if (command == "converge") {
            if (cfg.levels.empty())
                cfg.levels = {8, 16, 32, 64};
            if (cfg.levels.size() < 2)
                rd.fail("levels", "a convergence study needs at least 2 levels");
            if (!cfg.meshes.empty())
                rd.fail("mesh", "convergence studies run on unit-square refinements only");
        }
        const std::vector<std::size_t> ns = command == "converge" ? cfg.levels : std::vector<std::size_t>{cfg.n};
        if (cfg.meshes.empty() && mc.needs_even_n)
            for (auto n : ns)
                if (n % 2 != 0)
                    rd.fail(command == "converge" ? "levels" : "n",
                            "case '" + mc.name + "' needs an even number of subdivisions");
        if (command == "solve" && cfg.meshes.size() > 1)
            rd.fail("mesh", "solve takes a single mesh");
    } else if (cfg.levels.empty() && cfg.meshes.empty()) {
        cfg.levels = {2, 4, 8};
    }
    return cfg;
}

inline run_config
load_config(const std::filesystem::path& path, const std::string& command)
{
    std::ifstream is(path);
    if (!is)
        throw config_error("cannot open config file '" + path.string() + "'");
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str(), path.string(), command, path.parent_path());
}

namespace detail {

inline simplicial_mesh
load_mesh(const std::string& path)
{
    try {
        return read_mesh_file(path);
    } catch (const error& e) {
        throw config_error(e.what());
    }
}

inline std::ofstream
open_output(const std::filesystem::path& path)
{
    std::ofstream os(path);
    if (!os)
        throw config_error("cannot write '" + path.string() + "'");
    return os;
}

} // namespace detail

/// Runs the structural checks; 0 when every check passes, 1 otherwise.
inline int
run_verify(const run_config& cfg, const std::filesystem::path& out, std::ostream& log)
{
    verify_options opt;
    for (auto n : cfg.levels)
        opt.meshes.push_back({"square-" + std::to_string(n), build_unit_square(n)});
    for (const auto& m : cfg.meshes)
        opt.meshes.push_back({std::filesystem::path(m).filename().string(), detail::load_mesh(m)});
    opt.degrees    = cfg.degrees;
    opt.seed       = cfg.seed;
    opt.n_fields   = cfg.fields;
    opt.quad_extra = cfg.quad_extra;
    if (!cfg.averaging.empty())
        opt.averaging = cfg.averaging;

    const verify_report rep = run_verify_suite(opt);
    for (const auto& c : rep.checks) {
        log << (c.passed ? "PASS " : "FAIL ") << c.name << " mesh=" << c.mesh;
        if (c.degree >= 0)
            log << " p=" << c.degree;
        if (!c.averaging.empty())
            log << " averaging=" << c.averaging;
        log << " residual=" << format_number(c.residual) << (c.lower_bound ? " > " : " <= ") << format_number(c.tolerance);
        if (!c.note.empty())
            log << " (" << c.note << ")";
        log << '\n';
    }
    log << rep.checks.size() - rep.n_failed() << " of " << rep.checks.size() << " checks passed\n";

    const std::string prefix = cfg.prefix.empty() ? "verify" : cfg.prefix;
    auto              os     = detail::open_output(out / (prefix + ".json"));
    os << to_json(rep).dump(2) << '\n';
    return rep.passed() ? 0 : 1;
}

inline int
run_converge(const run_config& cfg, const std::filesystem::path& out, std::ostream& log)
{
    const manufactured_case mc = find_case(cfg.case_name, cfg.degree);
    convergence_options     opt;
    opt.method     = cfg.method;
    opt.averaging  = cfg.first_averaging();
    opt.levels     = cfg.levels;
    opt.solver     = cfg.solver;
    opt.quad_extra = cfg.quad_extra;
    const convergence_report rep = run_convergence(mc, cfg.degree, opt);

    const std::string prefix =
        cfg.prefix.empty() ? mc.name + "_p" + std::to_string(cfg.degree) + "_" + to_string(cfg.method) : cfg.prefix;
    {
        auto os = detail::open_output(out / (prefix + ".csv"));
        write_csv(os, rep);
    }
    {
        auto os = detail::open_output(out / (prefix + ".json"));
        write_json(os, rep);
    }
    for (const char* norm : {"e_H1", "e_stab", "e_L2", "e_super", "best_H1"}) {
        auto os = detail::open_output(out / (prefix + "_" + norm + ".dat"));
        write_gnuplot(os, rep, norm);
    }
    write_csv(log, rep);
    return 0;
}

/// Single solve; dumps R U on a lattice of every cell as x,y,value.
inline int
run_solve(const run_config& cfg, const std::filesystem::path& out, std::ostream& log)
{
    const manufactured_case mc  = find_case(cfg.case_name, cfg.degree);
    simplicial_mesh         msh = cfg.meshes.empty() ? mc.mesh(cfg.n) : detail::load_mesh(cfg.meshes.front());
    hho_space               sp(std::move(msh), cfg.degree);
    sp.set_quad_extra(cfg.quad_extra);
    const hho_field   U   = solve_case(sp, mc, cfg.method, cfg.first_averaging(), cfg.solver);
    const broken_poly RU  = reconstruct(sp, U);
    const auto&       m   = sp.mesh();
    const int         L   = cfg.lattice;
    double            err = 0.0;

    const std::string prefix = cfg.prefix.empty() ? mc.name + "_p" + std::to_string(cfg.degree) : cfg.prefix;
    auto              os     = detail::open_output(out / (prefix + "_solution.csv"));
    os << "x,y,value\n";
    for (std::size_t c = 0; c < m.n_cells(); c++) {
        const auto& cl = m.cells[c];
        for (int i = 0; i <= L; i++) {
            for (int k = 0; k <= L - i; k++) {
                const double l1 = double(i) / L, l2 = double(k) / L;
                const point  x  = (1 - l1 - l2) * m.vertices[cl[0]] + l1 * m.vertices[cl[1]] + l2 * m.vertices[cl[2]];
                const double v  = evaluate(m, RU, c, x);
                err             = std::max(err, std::abs(v - mc.u(x)));
                os << format_number(x.x()) << ',' << format_number(x.y()) << ',' << format_number(v) << '\n';
            }
        }
    }

    nlohmann::ordered_json j;
    j["case"]        = mc.name;
    j["degree"]      = cfg.degree;
    j["method"]      = to_string(cfg.method);
    j["averaging"]   = to_string(cfg.first_averaging());
    j["cells"]       = m.n_cells();
    j["dofs"]        = sp.n_dofs();
    j["h"]           = m.mesh_size();
    j["max_error"]   = err;
    auto js          = detail::open_output(out / (prefix + "_solution.json"));
    js << j.dump(2) << '\n';
    log << "dofs=" << sp.n_dofs() << " h=" << format_number(m.mesh_size())
        << " max|RU - u| on lattice=" << format_number(err) << '\n';
    return 0;
}

} // namespace hho
