#pragma once

#include <fstream>
#include <locale>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "hho/analysis.hpp"
#include "hho/verify.hpp"

namespace hho {

/// Number with 17 significant digits and '.' as decimal separator.
inline std::string
format_number(double v)
{
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os.precision(17);
    os << v;
    return os.str();
}

inline std::string
format_number(const std::optional<double>& v)
{
    return v ? format_number(*v) : std::string();
}

inline void
write_csv(std::ostream& os, const convergence_report& rep)
{
    os << "level,h,e_H1,e_stab,e_L2,e_super,best_H1,ratio,eoc_H1,eoc_L2\n";
    for (const auto& r : rep.rows) {
        os << r.level << ',' << format_number(r.h) << ',' << format_number(r.e_h1) << ',' << format_number(r.e_stab)
           << ',' << format_number(r.e_l2) << ',' << format_number(r.e_super) << ',' << format_number(r.best_h1) << ','
           << format_number(r.ratio) << ',' << format_number(r.eoc_h1) << ',' << format_number(r.eoc_l2) << '\n';
    }
}

inline nlohmann::ordered_json
to_json(const convergence_report& rep)
{
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(); };

    nlohmann::ordered_json j;
    j["case"]      = rep.case_name;
    j["degree"]    = rep.degree;
    j["method"]    = rep.method;
    j["averaging"] = rep.averaging;
    j["levels"]    = nlohmann::ordered_json::array();
    for (const auto& r : rep.rows) {
        nlohmann::ordered_json row;
        row["level"]      = r.level;
        row["n"]          = r.n;
        row["h"]          = r.h;
        row["e_H1"]       = r.e_h1;
        row["e_stab"]     = r.e_stab;
        row["e_L2"]       = r.e_l2;
        row["e_super"]    = r.e_super;
        row["best_H1"]    = r.best_h1;
        row["ratio"]      = r.ratio;
        row["eoc_H1"]     = opt(r.eoc_h1);
        row["eoc_L2"]     = opt(r.eoc_l2);
        row["eoc_energy"] = opt(r.eoc_energy);
        row["eoc_super"]  = opt(r.eoc_super);
        j["levels"].push_back(row);
    }
    return j;
}

inline void
write_json(std::ostream& os, const convergence_report& rep)
{
    os << to_json(rep).dump(2) << '\n';
}

/// Two-column (h, error) data for one norm: e_H1, e_stab, e_L2, e_super or best_H1.
inline void
write_gnuplot(std::ostream& os, const convergence_report& rep, const std::string& norm)
{
    os << "# " << rep.case_name << " p=" << rep.degree << " " << rep.method << " " << norm << "\n# h error\n";
    for (const auto& r : rep.rows) {
        double v;
        if (norm == "e_H1")
            v = r.e_h1;
        else if (norm == "e_stab")
            v = r.e_stab;
        else if (norm == "e_L2")
            v = r.e_l2;
        else if (norm == "e_super")
            v = r.e_super;
        else if (norm == "best_H1")
            v = r.best_h1;
        else
            throw error("unknown norm '" + norm + "'");
        os << format_number(r.h) << ' ' << format_number(v) << '\n';
    }
}

inline nlohmann::ordered_json
to_json(const verify_report& rep)
{
    nlohmann::ordered_json j;
    j["passed"] = rep.passed();
    j["failed"] = rep.n_failed();
    j["checks"] = nlohmann::ordered_json::array();
    for (const auto& c : rep.checks) {
        nlohmann::ordered_json e;
        e["name"] = c.name;
        e["mesh"] = c.mesh;
        if (c.degree >= 0)
            e["degree"] = c.degree;
        if (!c.averaging.empty())
            e["averaging"] = c.averaging;
        e["residual"]  = c.residual;
        e["tolerance"] = c.tolerance;
        e["bound"]     = c.lower_bound ? "lower" : "upper";
        e["passed"]    = c.passed;
        if (!c.note.empty())
            e["note"] = c.note;
        j["checks"].push_back(e);
    }
    return j;
}

} // namespace hho
