#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "hho/common.hpp"
#include "hho/linalg.hpp"
#include "hho/local_ops.hpp"
#include "hho/mesh.hpp"
#include "hho/smoothing.hpp"
#include "hho/system.hpp"

namespace hho {

/// Quadrature degree for error integrals at degree p.
inline int
error_quad_degree(int p)
{
    return 2 * (p + 2) + 4;
}

/// (||grad_M (u - R U)||, s(U, U)^{1/2}).
inline std::pair<double, double>
error_h1_broken(const hho_space& sp, const vector_function& grad_u, const hho_field& U)
{
    const auto&         msh = sp.mesh();
    const auto          RU  = reconstruct(sp, U);
    const int           q   = error_quad_degree(sp.degree());
    std::vector<double> e(msh.n_cells());
    parallel_for(msh.n_cells(), [&](std::size_t c) {
        e[c] = integrate_cell(msh, c, q, [&](const point& x) { return (grad_u(x) - gradient(msh, RU, c, x)).squaredNorm(); });
    });
    double s = 0.0;
    for (double v : e)
        s += v;
    return {std::sqrt(s), std::sqrt(std::max(0.0, stab_form(sp, U, U)))};
}

inline double
error_l2(const hho_space& sp, const scalar_function& u, const hho_field& U)
{
    const auto&         msh = sp.mesh();
    const auto          RU  = reconstruct(sp, U);
    const int           q   = error_quad_degree(sp.degree());
    std::vector<double> e(msh.n_cells());
    parallel_for(msh.n_cells(), [&](std::size_t c) {
        e[c] = integrate_cell(msh, c, q, [&](const point& x) { return std::pow(u(x) - evaluate(msh, RU, c, x), 2); });
    });
    double s = 0.0;
    for (double v : e)
        s += v;
    return std::sqrt(s);
}

/// ||U_M - Pi_M u||.
inline double
supercloseness(const hho_space& sp, const scalar_function& u, const hho_field& U)
{
    const auto& msh = sp.mesh();
    const auto  Pu  = project_cell(sp, u, sp.degree(), error_quad_degree(sp.degree()));
    double      s   = 0.0;
    for (std::size_t c = 0; c < msh.n_cells(); c++) {
        const dense_vector d = U.cell(c) - Pu.coeffs[c];
        s += d.dot(mass_matrix(msh, c, cell_basis(msh, c, sp.degree())) * d);
    }
    return std::sqrt(std::max(0.0, s));
}

/// (sum_K ||grad (u - E u)||_K^2)^{1/2}, the best broken P^{p+1} gradient error.
inline double
best_error_h1(const hho_space& sp, const scalar_function& u, const vector_function& grad_u)
{
    const auto&         msh = sp.mesh();
    const int           q   = error_quad_degree(sp.degree());
    const auto          Eu  = elliptic_project(sp, u, grad_u, sp.degree() + 1, q);
    std::vector<double> e(msh.n_cells());
    parallel_for(msh.n_cells(), [&](std::size_t c) {
        e[c] = integrate_cell(msh, c, q, [&](const point& x) { return (grad_u(x) - gradient(msh, Eu, c, x)).squaredNorm(); });
    });
    double s = 0.0;
    for (double v : e)
        s += v;
    return std::sqrt(s);
}

/// Empirical order of convergence between two levels.
inline double
eoc(double e_coarse, double e_fine, double h_coarse, double h_fine)
{
    return std::log(e_coarse / e_fine) / std::log(h_coarse / h_fine);
}

struct manufactured_case
{
    std::string     name;
    std::string     regularity;  // smooth | kink-aligned | polynomial
    scalar_function u;
    vector_function grad_u;
    load_functional load;
    bool            needs_even_n = false;
    double          h1_rate      = 0.0;
    double          l2_rate      = 0.0;

    simplicial_mesh mesh(std::size_t n) const
    {
        if (needs_even_n && n % 2 != 0)
            throw invalid_mesh("case '" + name + "' needs an even number of subdivisions, got " + std::to_string(n));
        return build_unit_square(n);
    }
};

namespace detail {

inline double
sgn(double v)
{
    return (v > 0) - (v < 0);
}

// continuous P1 hat of the centre vertex of the 2 x 2 unit-square mesh
inline double
centre_hat(const point& x)
{
    const double s = 2 * x.x() - 1, t = 2 * x.y() - 1;
    return std::max(0.0, 1.0 - std::max({std::abs(s), std::abs(t), std::abs(s - t)}));
}

inline vector2
centre_hat_grad(const point& x)
{
    const double s = 2 * x.x() - 1, t = 2 * x.y() - 1;
    const double as = std::abs(s), at = std::abs(t), ad = std::abs(s - t);
    if (1.0 - std::max({as, at, ad}) <= 0.0)
        return vector2::Zero();
    if (as >= at && as >= ad)
        return {-2 * sgn(s), 0.0};
    if (at >= ad)
        return {0.0, -2 * sgn(t)};
    return {-2 * sgn(s - t), 2 * sgn(s - t)};
}

} // namespace detail

inline manufactured_case
smooth_sine_case()
{
    using std::numbers::pi;
    manufactured_case mc;
    mc.name       = "smooth-sine";
    mc.regularity = "smooth";
    mc.u          = [](const point& x) { return std::sin(pi * x.x()) * std::sin(pi * x.y()); };
    mc.grad_u     = [](const point& x) {
        return vector2(pi * std::cos(pi * x.x()) * std::sin(pi * x.y()), pi * std::sin(pi * x.x()) * std::cos(pi * x.y()));
    };
    mc.load.f0 = [](const point& x) { return 2 * pi * pi * std::sin(pi * x.x()) * std::sin(pi * x.y()); };
    return mc;
}

/// u = hat^{p+1}, continuous and piecewise P^{p+1} on every even unit-square mesh,
/// with the load given only as g = grad u.
inline manufactured_case
poly_consistency_case(int p)
{
    manufactured_case mc;
    mc.name         = "poly-consistency";
    mc.regularity   = "polynomial";
    mc.needs_even_n = true;
    mc.u            = [p](const point& x) { return std::pow(detail::centre_hat(x), p + 1); };
    mc.grad_u       = [p](const point& x) {
        return vector2((p + 1) * std::pow(detail::centre_hat(x), p) * detail::centre_hat_grad(x));
    };
    mc.load.g = mc.grad_u;
    return mc;
}

/// u = (1 - |2x - 1|) sin(pi y): -div grad u has a line Dirac on x = 1/2,
/// so the load is supplied only as g = grad u.
inline manufactured_case
kink_aligned_case()
{
    using std::numbers::pi;
    manufactured_case mc;
    mc.name         = "kink-aligned";
    mc.regularity   = "kink-aligned";
    mc.needs_even_n = true;
    mc.u            = [](const point& x) { return (1 - std::abs(2 * x.x() - 1)) * std::sin(pi * x.y()); };
    mc.grad_u       = [](const point& x) {
        return vector2(-2 * detail::sgn(2 * x.x() - 1) * std::sin(pi * x.y()),
                       (1 - std::abs(2 * x.x() - 1)) * pi * std::cos(pi * x.y()));
    };
    mc.load.g = mc.grad_u;
    return mc;
}

/// u = 0 with a zero density load.
inline manufactured_case
zero_case()
{
    manufactured_case mc;
    mc.name       = "zero";
    mc.regularity = "smooth";
    mc.u          = [](const point&) { return 0.0; };
    mc.grad_u     = [](const point&) { return vector2(vector2::Zero()); };
    mc.load.f0    = [](const point&) { return 0.0; };
    return mc;
}

/// Built-in cases with their expected rates at degree p.
inline std::vector<manufactured_case>
builtin_cases(int p)
{
    std::vector<manufactured_case> cases{smooth_sine_case(), poly_consistency_case(p), kink_aligned_case()};
    cases[0].h1_rate = p + 1;
    cases[0].l2_rate = p + 2;
    cases[2].h1_rate = p + 1;
    return cases;
}

inline manufactured_case
find_case(const std::string& name, int p)
{
    for (auto& c : builtin_cases(p))
        if (c.name == name)
            return c;
    if (name == "zero")
        return zero_case();
    throw error("unknown case '" + name + "'");
}

/**
 * Checks that load and solution agree: g = grad u where g is given, and
 * -Laplace u = f0 at sample points (central differences) for density loads.
 * Returns the largest defect.
 */
inline double
validate_case(const manufactured_case& mc)
{
    double       defect = 0.0;
    const double h      = 1e-4;
    for (int i = 1; i < 8; i++) {
        for (int j = 1; j < 8; j++) {
            const point x(i / 8.0 + 0.013, j / 8.0 + 0.007);
            if (mc.load.g)
                defect = std::max(defect, (mc.load.g(x) - mc.grad_u(x)).norm());
            if (mc.load.f0) {
                const double lap = (mc.u(x + point(h, 0)) + mc.u(x - point(h, 0)) + mc.u(x + point(0, h)) +
                                    mc.u(x - point(0, h)) - 4 * mc.u(x)) /
                                   (h * h);
                defect = std::max(defect, std::abs(-lap - mc.load.f0(x)) / std::max(1.0, std::abs(mc.load.f0(x))));
            }
        }
    }
    return defect;
}

enum class method_kind
{
    classical,
    smoothed
};

struct convergence_options
{
    method_kind              method     = method_kind::smoothed;
    averaging_kind           averaging  = averaging_kind::mean;
    std::vector<std::size_t> levels     = {8, 16, 32, 64};
    solver_options           solver     = {};
    int                      quad_extra = default_quad_extra;
};

struct convergence_row
{
    std::size_t           level = 0;
    std::size_t           n     = 0;
    double                h = 0, e_h1 = 0, e_stab = 0, e_l2 = 0, e_super = 0, best_h1 = 0, ratio = 0;
    std::optional<double> eoc_h1, eoc_l2, eoc_energy, eoc_super;
};

struct convergence_report
{
    std::string                  case_name;
    int                          degree = 0;
    std::string                  method;
    std::string                  averaging;
    std::vector<convergence_row> rows;
};

inline std::string
to_string(method_kind m)
{
    return m == method_kind::classical ? "classical" : "smoothed";
}

inline std::string
to_string(averaging_kind a)
{
    return a == averaging_kind::mean ? "mean" : "scott-zhang";
}

/// Discrete solution of the case on the unit-square mesh with n subdivisions.
inline hho_field
solve_case(const hho_space& sp, const manufactured_case& mc, method_kind method, averaging_kind averaging,
           const solver_options& solver = {})
{
    dense_vector rhs;
    if (method == method_kind::classical) {
        rhs = rhs_classical(sp, mc.load);
    } else {
        const smoother_operator sm(sp, averaging);
        rhs = rhs_smoothed(sm, mc.load);
    }
    const condensed_system sys(sp, solver);
    return sys.solve(rhs);
}

inline convergence_report
run_convergence(const manufactured_case& mc, int p, const convergence_options& opt)
{
    convergence_report rep{mc.name, p, to_string(opt.method), to_string(opt.averaging), {}};
    if (opt.method == method_kind::classical && mc.load.has_divergence())
        throw method_inapplicable("case '" + mc.name + "' has a load with a divergence part; the classical method "
                                  "is not defined for it");

    for (std::size_t l = 0; l < opt.levels.size(); l++) {
        hho_space sp(mc.mesh(opt.levels[l]), p);
        sp.set_quad_extra(opt.quad_extra);
        const hho_field U = solve_case(sp, mc, opt.method, opt.averaging, opt.solver);

        convergence_row row;
        row.level             = l;
        row.n                 = opt.levels[l];
        row.h                 = sp.mesh().mesh_size();
        std::tie(row.e_h1, row.e_stab) = error_h1_broken(sp, mc.grad_u, U);
        row.e_l2              = error_l2(sp, mc.u, U);
        row.e_super           = supercloseness(sp, mc.u, U);
        row.best_h1           = best_error_h1(sp, mc.u, mc.grad_u);
        row.ratio             = std::hypot(row.e_h1, row.e_stab) / row.best_h1;
        if (l > 0) {
            const auto& pr = rep.rows.back();
            row.eoc_h1     = eoc(pr.e_h1, row.e_h1, pr.h, row.h);
            row.eoc_l2     = eoc(pr.e_l2, row.e_l2, pr.h, row.h);
            row.eoc_energy = eoc(std::hypot(pr.e_h1, pr.e_stab), std::hypot(row.e_h1, row.e_stab), pr.h, row.h);
            row.eoc_super  = eoc(pr.e_super, row.e_super, pr.h, row.h);
        }
        rep.rows.push_back(row);
    }
    return rep;
}

/**
 * Smallest C with ||grad_M (R s - S_H s)|| <= C b_H(s, s)^{1/2} on the
 * discrete space, i.e. the square root of the largest eigenvalue of (G, B).
 */
inline double
smoother_stability_constant(const smoother_operator& sm, bool dense = false)
{
    const auto&       sp  = sm.space();
    const auto&       msh = sp.mesh();
    const std::size_t nS  = poly_dim(sm.output_degree());

    std::vector<triplet> trip;
    for (std::size_t c = 0; c < msh.n_cells(); c++) {
        const dense_matrix K = stiffness_matrix(msh, c, cell_basis(msh, c, sm.output_degree()));
        detail::add_block(trip, c * nS, c * nS, K);
    }
    const sparse_matrix KD = detail::from_triplets(msh.n_cells() * nS, msh.n_cells() * nS, trip);
    const sparse_matrix D  = sm.embedding() * sm.reconstruction() - sm.matrix();
    sparse_matrix       G  = D.transpose() * (KD * D);
    G                      = 0.5 * (G + sparse_matrix(G.transpose()));
    const sparse_matrix B  = global_matrix(sp);

    double lmax;
    if (dense)
        lmax = generalized_eigenvalues(dense_matrix(G), dense_matrix(B)).maxCoeff();
    else
        lmax = lanczos_max_eigenvalue(G, B);
    return std::sqrt(std::max(0.0, lmax));
}

} // namespace hho
