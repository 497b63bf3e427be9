#pragma once

#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "hho/hho.hpp"

namespace hho {

struct named_mesh
{
    std::string     name;
    simplicial_mesh mesh;
};

struct verify_options
{
    std::vector<named_mesh>     meshes;
    std::vector<int>            degrees   = {0, 1, 2};
    std::vector<averaging_kind> averaging = {averaging_kind::mean, averaging_kind::scott_zhang};
    unsigned                    seed      = 1;
    std::size_t                 n_fields  = 100;
    int                         quad_extra = default_quad_extra;
};

/// One check: passes when residual <= tolerance, or residual > tolerance for lower bounds.
struct check_result
{
    std::string name;
    std::string mesh;
    int         degree = -1;
    std::string averaging;
    double      residual    = 0.0;
    double      tolerance   = 0.0;
    bool        lower_bound = false;
    bool        passed      = false;
    std::string note;
};

struct verify_report
{
    std::vector<check_result> checks;

    bool passed() const
    {
        for (const auto& c : checks)
            if (!c.passed)
                return false;
        return true;
    }
    std::size_t n_failed() const
    {
        std::size_t n = 0;
        for (const auto& c : checks)
            n += c.passed ? 0 : 1;
        return n;
    }
};

namespace detail {

using cell_function = std::function<double(std::size_t, const point&)>;

inline dense_vector
random_vector(std::size_t n, std::mt19937_64& gen)
{
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    dense_vector                           v(n);
    for (std::size_t i = 0; i < n; i++)
        v(i) = dist(gen);
    return v;
}

/// Interpolant of a function known cell by cell (continuous across interior faces).
inline hho_field
interpolate_cellwise(const hho_space& sp, const cell_function& v, int quad_degree)
{
    const auto& msh = sp.mesh();
    hho_field   u   = sp.zero_field();
    for (std::size_t c = 0; c < msh.n_cells(); c++) {
        const cell_basis cb(msh, c, sp.degree());
        dense_vector     b = dense_vector::Zero(cb.size());
        for (const auto& qp : cell_quadrature(msh, c, quad_degree))
            b += qp.w * v(c, qp.x) * cb.eval(qp.x);
        u.cell(c) = mass_matrix(msh, c, cb).ldlt().solve(b);
    }
    for (std::size_t i = 0; i < msh.n_interior_faces(); i++) {
        const std::size_t f = msh.interior_faces[i];
        const face_basis  fb(msh, f, sp.degree());
        dense_vector      b = dense_vector::Zero(fb.size());
        for (const auto& qp : face_quadrature(msh, f, quad_degree))
            b += qp.w * v(msh.face_cells[f][0], qp.x) * fb.eval(qp.x);
        u.face(i) = mass_matrix(msh, f, fb).ldlt().solve(b);
    }
    return u;
}

/// Random continuous piecewise P^k function vanishing on the boundary.
inline broken_poly
random_continuous(const simplicial_mesh& msh, int k, std::mt19937_64& gen)
{
    const lagrange_layer lag(msh, k);
    dense_vector         nodal = random_vector(lag.n_nodes(), gen);
    for (std::size_t z = 0; z < lag.n_nodes(); z++)
        if (lag.on_boundary(z))
            nodal(z) = 0.0;
    broken_poly q{k, std::vector<dense_vector>(msh.n_cells())};
    for (std::size_t c = 0; c < msh.n_cells(); c++) {
        const auto& cn = lag.cell_nodes(c);
        q.coeffs[c]    = fit_cell(msh, c, k, 1, [&](const quad_point& qp) {
            dense_vector v(1);
            v(0) = 0.0;
            for (std::size_t i = 0; i < cn.size(); i++)
                v(0) += nodal(cn[i]) * lagrange_layer::shape(lag.alpha(i), k, qp.lambda);
            return v;
        });
    }
    return q;
}

/// Cell containing x, searched from a hint; quadrature loops visit one cell at a time.
class point_locator
{
    const simplicial_mesh* m_msh;
    mutable std::size_t    m_hint = 0;

    bool inside(std::size_t c, const point& x) const
    {
        const auto l = m_msh->barycentric(c, x);
        return l[0] >= -1e-12 && l[1] >= -1e-12 && l[2] >= -1e-12;
    }

public:
    explicit point_locator(const simplicial_mesh& msh)
        : m_msh(&msh)
    {}

    std::size_t operator()(const point& x) const
    {
        if (inside(m_hint, x))
            return m_hint;
        for (std::size_t c = 0; c < m_msh->n_cells(); c++)
            if (inside(c, x))
                return m_hint = c;
        throw error("point outside the mesh");
    }
};

// cell moments against P^{p-1}(K) and face moments against P^p(F) of a P^D
// function, minus those of the HHO unknowns; rows scaled by 1/|K| and 1/|F|
inline sparse_matrix
moment_defect_matrix(const hho_space& sp, int D)
{
    const auto&          msh = sp.mesh();
    const int            p   = sp.degree();
    const std::size_t    nS = poly_dim(D), nc = sp.cell_size(), nf = sp.face_size();
    const std::size_t    nq      = p >= 1 ? poly_dim(p - 1) : 0;
    const std::size_t    n_cols  = msh.n_cells() * nS + sp.n_dofs();
    const std::size_t    dof_off = msh.n_cells() * nS;
    std::vector<triplet> trip;
    std::size_t          row = 0;

    for (std::size_t c = 0; c < msh.n_cells() && p >= 1; c++) {
        const cell_basis qb(msh, c, p - 1), sb(msh, c, D), cb(msh, c, p);
        dense_matrix     A = dense_matrix::Zero(nq, nS), B = dense_matrix::Zero(nq, nc);
        for (const auto& qp : cell_quadrature(msh, c, p - 1 + D)) {
            const dense_vector q = qp.w * qb.eval(qp.x) / msh.cell_area[c];
            A += q * sb.eval(qp.x).transpose();
            B += q * cb.eval(qp.x).transpose();
        }
        detail::add_block(trip, row, c * nS, A);
        detail::add_block(trip, row, dof_off + c * nc, -B);
        row += nq;
    }
    for (std::size_t i = 0; i < msh.n_interior_faces(); i++) {
        const std::size_t f = msh.interior_faces[i];
        const face_basis  fb(msh, f, p);
        for (int s = 0; s < 2; s++) {
            const std::size_t c = msh.face_cells[f][s];
            const cell_basis  sb(msh, c, D);
            dense_matrix      A = dense_matrix::Zero(nf, nS), B = dense_matrix::Zero(nf, nf);
            for (const auto& qp : face_quadrature(msh, f, p + D)) {
                const dense_vector q = qp.w * fb.eval(qp.x) / msh.h_face[f];
                A += q * sb.eval(qp.x).transpose();
                B += q * fb.eval(qp.x).transpose();
            }
            detail::add_block(trip, row, c * nS, A);
            detail::add_block(trip, row, dof_off + sp.n_cell_dofs() + i * nf, -B);
            row += nf;
        }
    }
    return detail::from_triplets(row, n_cols, trip);
}

// rows: trace jumps at 5 equispaced points of interior faces, traces on boundary faces
inline sparse_matrix
trace_defect_matrix(const simplicial_mesh& msh, int D)
{
    const std::size_t    nS = poly_dim(D);
    std::vector<triplet> trip;
    std::size_t          row = 0;
    for (std::size_t f = 0; f < msh.n_faces(); f++) {
        const point a = msh.vertices[msh.faces[f][0]], b = msh.vertices[msh.faces[f][1]];
        for (int k = 0; k <= 4; k++, row++) {
            const point x = a + (b - a) * (k / 4.0);
            for (int s = 0; s < 2; s++) {
                const std::size_t c = msh.face_cells[f][s];
                if (c == npos)
                    continue;
                const dense_vector v = cell_basis(msh, c, D).eval(x);
                for (std::size_t j = 0; j < nS; j++)
                    trip.emplace_back(row, c * nS + j, s == 0 ? v(j) : -v(j));
            }
        }
    }
    return detail::from_triplets(row, msh.n_cells() * nS, trip);
}

inline sparse_matrix
stiffness_blocks(const simplicial_mesh& msh, int D)
{
    const std::size_t    nS = poly_dim(D);
    std::vector<triplet> trip;
    for (std::size_t c = 0; c < msh.n_cells(); c++)
        detail::add_block(trip, c * nS, c * nS, stiffness_matrix(msh, c, cell_basis(msh, c, D)));
    return detail::from_triplets(msh.n_cells() * nS, msh.n_cells() * nS, trip);
}

inline double
max_abs(const dense_matrix& m)
{
    return m.size() == 0 ? 0.0 : m.lpNorm<Eigen::Infinity>();
}

} // namespace detail

/// Runs the structural checks on every mesh, degree and averaging variant.
inline verify_report
run_verify_suite(const verify_options& opt)
{
    verify_report rep;
    auto add = [&](std::string name, const std::string& mesh, int p, std::string av, double residual, double tol,
                   bool lower = false, std::string note = {}) {
        check_result r{std::move(name), mesh, p, std::move(av), residual, tol, lower, false, std::move(note)};
        r.passed = lower ? residual > tol : residual <= tol;
        rep.checks.push_back(std::move(r));
    };

    for (const auto& nm : opt.meshes) {
        const auto& msh = nm.mesh;
        const auto  mr  = check_mesh(msh);
        add("mesh_invariants", nm.name, -1, "", double(mr.violations.size()), 0.0, false,
            mr.valid() ? "" : mr.violations.front());
        if (!mr.valid())
            continue;

        for (int p : opt.degrees) {
            hho_space sp(msh, p);
            sp.set_quad_extra(opt.quad_extra);
            std::mt19937_64 gen(opt.seed + 7919u * unsigned(p));

            // R of the full local interpolant against the elliptic projection
            {
                auto v    = [](const point& x) { return std::exp(x.x()) * std::sin(2 * x.y()) + x.x() * x.y(); };
                auto grad = [](const point& x) {
                    return vector2(std::exp(x.x()) * std::sin(2 * x.y()) + x.y(),
                                   2 * std::exp(x.x()) * std::cos(2 * x.y()) + x.x());
                };
                const int  quad = 2 * p + 20;
                const auto E    = elliptic_project(sp, v, grad, -1, quad);
                double     d    = 0.0;
                for (std::size_t c = 0; c < msh.n_cells(); c++) {
                    dense_vector     loc(sp.local_size());
                    const cell_basis cb(msh, c, p);
                    dense_vector     b = dense_vector::Zero(cb.size());
                    for (const auto& qp : cell_quadrature(msh, c, quad))
                        b += qp.w * v(qp.x) * cb.eval(qp.x);
                    loc.head(sp.cell_size()) = mass_matrix(msh, c, cb).ldlt().solve(b);
                    for (int i = 0; i < 3; i++) {
                        const std::size_t f = msh.cell_faces[c][i];
                        const face_basis  fb(msh, f, p);
                        dense_vector      bf = dense_vector::Zero(fb.size());
                        for (const auto& qp : face_quadrature(msh, f, quad))
                            bf += qp.w * v(qp.x) * fb.eval(qp.x);
                        loc.segment(sp.cell_size() + i * sp.face_size(), sp.face_size()) =
                            mass_matrix(msh, f, fb).ldlt().solve(bf);
                    }
                    d = std::max(d, (sp.local(c).recon * loc - E.coeffs[c]).lpNorm<Eigen::Infinity>());
                }
                add("reconstruction_of_interpolant", nm.name, p, "", d, 1e-10);
            }

            // continuous piecewise P^{p+1} data vanishing on the boundary
            const broken_poly q  = detail::random_continuous(msh, p + 1, gen);
            const hho_field   Iq = detail::interpolate_cellwise(
                sp, [&](std::size_t c, const point& x) { return evaluate(msh, q, c, x); }, 2 * p + 2);
            {
                add("stabilization_kernel", nm.name, p, "", std::abs(stab_form(sp, Iq, Iq)), 1e-18);
                const auto R = reconstruct(sp, Iq);
                double     d = 0.0;
                for (std::size_t c = 0; c < msh.n_cells(); c++)
                    d = std::max(d, (R.coeffs[c] - q.coeffs[c]).lpNorm<Eigen::Infinity>());
                add("reconstruction_of_continuous", nm.name, p, "", d, 1e-10);
            }

            const sparse_matrix B = global_matrix(sp);
            {
                // lambda_min(B, N) = 1 / lambda_max(N, B)
                const sparse_matrix N    = coercivity_norm_matrix(sp);
                const double        lmax = lanczos_max_eigenvalue(N, B);
                add("coercivity_eigenvalue", nm.name, p, "", 1.0 / lmax, 1e-3, true);
            }
            {
                dense_vector           rhs = detail::random_vector(sp.n_dofs(), gen);
                const condensed_system sys(sp);
                const auto             uc = sys.solve(rhs);
                const auto             uf = solve_uncondensed(sp, rhs);
                const double           sc = std::max(1.0, uf.values.lpNorm<Eigen::Infinity>());
                add("condensation_exact", nm.name, p, "", (uc.values - uf.values).lpNorm<Eigen::Infinity>() / sc,
                     1e-10);
            }

            const detail::point_locator locate(msh);
            load_functional             grad_load{{}, [&](const point& x) { return gradient(msh, q, locate(x), x); }};

            for (auto kind : opt.averaging) {
                const std::string       av = to_string(kind);
                const smoother_operator sm(sp, kind);
                const int               D    = sm.output_degree();
                const sparse_matrix&    Smat = sm.matrix();

                {
                    const sparse_matrix M   = detail::moment_defect_matrix(sp, D);
                    const sparse_matrix T   = detail::trace_defect_matrix(msh, D);
                    const std::size_t   nSt = Smat.rows();
                    double              rm = 0.0, rt = 0.0;
                    for (std::size_t s = 0; s < opt.n_fields; s++) {
                        const dense_vector u = detail::random_vector(sp.n_dofs(), gen);
                        dense_vector       w(nSt + sp.n_dofs());
                        w.head(nSt)        = Smat * u;
                        w.tail(sp.n_dofs()) = u;
                        if (M.rows() > 0)
                            rm = std::max(rm, (M * w).lpNorm<Eigen::Infinity>());
                        rt = std::max(rt, (T * w.head(nSt)).lpNorm<Eigen::Infinity>());
                    }
                    add("moment_preservation", nm.name, p, av, rm, 1e-11);
                    add("smoother_conformity", nm.name, p, av, rt, 1e-10);
                }
                {
                    const sparse_matrix KD = detail::stiffness_blocks(msh, D);
                    const sparse_matrix ER = sm.embedding() * sm.reconstruction();
                    const sparse_matrix D0 = ER - Smat;
                    const dense_matrix  O  = dense_matrix(ER.transpose() * (KD * D0));
                    add("orthogonality", nm.name, p, av, detail::max_abs(O), 1e-10);
                }
                {
                    const dense_vector rhs = rhs_smoothed(sm, grad_load);
                    const auto         U   = condensed_system(sp).solve(rhs);
                    add("discrete_consistency", nm.name, p, av, (U.values - Iq.values).lpNorm<Eigen::Infinity>(),
                         1e-9);
                }
                {
                    // support of S_H of every basis field stays in the vertex one-ring of its cells
                    std::vector<std::set<std::size_t>> vertex_cells(msh.n_vertices());
                    for (std::size_t c = 0; c < msh.n_cells(); c++)
                        for (auto v : msh.cells[c])
                            vertex_cells[v].insert(c);
                    const std::size_t nS = poly_dim(D);
                    double            leak = 0.0;
                    for (Eigen::Index j = 0; j < Smat.outerSize(); j++) {
                        std::vector<std::size_t> seeds;
                        const std::size_t        g = std::size_t(j);
                        if (g < sp.n_cell_dofs()) {
                            seeds.push_back(g / sp.cell_size());
                        } else {
                            const auto f = msh.interior_faces[(g - sp.n_cell_dofs()) / sp.face_size()];
                            seeds        = {msh.face_cells[f][0], msh.face_cells[f][1]};
                        }
                        std::set<std::size_t> allowed;
                        for (auto c : seeds)
                            for (auto v : msh.cells[c])
                                allowed.insert(vertex_cells[v].begin(), vertex_cells[v].end());
                        double scale = 0.0, out = 0.0;
                        for (sparse_matrix::InnerIterator it(Smat, j); it; ++it) {
                            scale = std::max(scale, std::abs(it.value()));
                            if (!allowed.count(std::size_t(it.row()) / nS))
                                out = std::max(out, std::abs(it.value()));
                        }
                        if (scale > 0.0)
                            leak = std::max(leak, out / scale);
                    }
                    add("smoother_locality", nm.name, p, av, leak, 1e-12);
                }
            }
        }
    }
    return rep;
}

} // namespace hho
