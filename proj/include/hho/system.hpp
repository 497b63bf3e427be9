#pragma once

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include <vector>

#include "hho/basis.hpp"
#include "hho/common.hpp"
#include "hho/local_ops.hpp"
#include "hho/quadrature.hpp"
#include "hho/smoothing.hpp"

namespace hho {

enum class load_kind
{
    l2_density,
    divergence_form,
    composite
};

/// Load f = f0 - div g acting as <f, v> = int f0 v + int g . grad v.
/// Either part may be left empty; g may jump across faces.
struct load_functional
{
    scalar_function f0;
    vector_function g;

    load_kind kind() const
    {
        if (!f0 && !g)
            throw error("load functional has neither a density nor a divergence part");
        if (f0 && g)
            return load_kind::composite;
        return g ? load_kind::divergence_form : load_kind::l2_density;
    }

    bool has_divergence() const { return static_cast<bool>(g); }
};

/// Quadrature degree used for load integrands.
inline int
load_quad_degree(const hho_space& sp)
{
    return smoother_degree(sp.degree()) + sp.quad_extra();
}

/// Right-hand side int f0 sigma_M of the classical method; refuses loads with
/// a divergence part.
inline dense_vector
rhs_classical(const hho_space& sp, const load_functional& load)
{
    if (load.kind() != load_kind::l2_density)
        throw method_inapplicable("the classical method needs a load in L2; this load has a divergence part "
                                  "(use the smoothed right-hand side)");
    const auto&       msh = sp.mesh();
    const std::size_t nc  = sp.cell_size();
    dense_vector      rhs = dense_vector::Zero(sp.n_dofs());
    const int         q   = load_quad_degree(sp);
    parallel_for(msh.n_cells(), [&](std::size_t c) {
        const cell_basis cb(msh, c, sp.degree());
        dense_vector     b = dense_vector::Zero(nc);
        for (const auto& qp : cell_quadrature(msh, c, q))
            b += qp.w * load.f0(qp.x) * cb.eval(qp.x);
        rhs.segment(c * nc, nc) = b;
    });
    return rhs;
}

/// Pairing of the load with every function of the P^D(K) bases, stacked by cell.
inline dense_vector
load_moments(const simplicial_mesh& msh, const load_functional& load, int D, int quad_degree)
{
    load.kind();
    const std::size_t nS = poly_dim(D);
    dense_vector      L  = dense_vector::Zero(msh.n_cells() * nS);
    parallel_for(msh.n_cells(), [&](std::size_t c) {
        const cell_basis cb(msh, c, D);
        dense_vector     b = dense_vector::Zero(nS);
        for (const auto& qp : cell_quadrature(msh, c, quad_degree)) {
            if (load.f0)
                b += qp.w * load.f0(qp.x) * cb.eval(qp.x);
            if (load.g)
                b += qp.w * cb.grad(qp.x) * load.g(qp.x);
        }
        L.segment(c * nS, nS) = b;
    });
    return L;
}

/// Right-hand side <f, S_H sigma> of the smoothed method.
inline dense_vector
rhs_smoothed(const smoother_operator& sm, const load_functional& load)
{
    const auto& sp = sm.space();
    const int   q  = load_quad_degree(sp);
    return sm.matrix().transpose() * load_moments(sp.mesh(), load, sm.output_degree(), q);
}

struct solver_options
{
    enum class method
    {
        cholesky,
        cg
    };
    method kind      = method::cholesky;
    double tolerance = 1e-12;
    int    max_iter  = 100000;
};

/**
 * b_H with the cell unknowns eliminated locally: the face matrix
 * sum_K (A_FF - A_FT A_TT^{-1} A_TF) plus what is needed to condense a
 * right-hand side and to recover the cell unknowns.
 */
class condensed_system
{
    const hho_space*                             m_sp;
    solver_options                               m_opt;
    sparse_matrix                                m_KFF;
    std::vector<Eigen::LLT<dense_matrix>>        m_att;
    std::vector<dense_matrix>                    m_atf;
    Eigen::SimplicialLLT<sparse_matrix>          m_llt;

    std::size_t face_index(std::size_t c, std::size_t j) const
    {
        const std::size_t g = m_sp->local(c).dof_map[m_sp->cell_size() + j];
        return g == npos ? npos : g - m_sp->n_cell_dofs();
    }

public:
    explicit condensed_system(const hho_space& sp, solver_options opt = {})
        : m_sp(&sp)
        , m_opt(opt)
    {
        const auto&       msh = sp.mesh();
        const std::size_t nc  = sp.cell_size();
        const std::size_t nfl = 3 * sp.face_size();
        const std::size_t nK  = msh.n_cells();

        m_att.resize(nK);
        m_atf.resize(nK);
        std::vector<dense_matrix> schur(nK);
        parallel_for(nK, [&](std::size_t c) {
            const auto& A = sp.local(c).lhs;
            m_att[c].compute(A.topLeftCorner(nc, nc));
            if (m_att[c].info() != Eigen::Success)
                throw internal_error("cell block of b_H is not positive definite on cell " + std::to_string(c));
            m_atf[c] = A.topRightCorner(nc, nfl);
            schur[c] = A.bottomRightCorner(nfl, nfl) - A.bottomLeftCorner(nfl, nc) * m_att[c].solve(m_atf[c]);
        });

        std::vector<triplet> trip;
        for (std::size_t c = 0; c < nK; c++) {
            for (std::size_t i = 0; i < nfl; i++) {
                const std::size_t gi = face_index(c, i);
                if (gi == npos)
                    continue;
                for (std::size_t j = 0; j < nfl; j++) {
                    const std::size_t gj = face_index(c, j);
                    if (gj != npos)
                        trip.emplace_back(gi, gj, schur[c](i, j));
                }
            }
        }
        m_KFF.resize(sp.n_face_dofs(), sp.n_face_dofs());
        m_KFF.setFromTriplets(trip.begin(), trip.end());

        if (m_opt.kind == solver_options::method::cholesky && sp.n_face_dofs() > 0) {
            m_llt.compute(m_KFF);
            if (m_llt.info() != Eigen::Success)
                throw internal_error("Cholesky factorization of the condensed matrix failed");
        }
    }

    const hho_space&     space() const { return *m_sp; }
    const sparse_matrix& face_matrix() const { return m_KFF; }

    /// Face right-hand side g_F = rhs_F - sum_K A_FT A_TT^{-1} rhs_T.
    dense_vector condense(const dense_vector& rhs) const
    {
        const auto&       sp  = *m_sp;
        const std::size_t nc  = sp.cell_size();
        dense_vector      g   = rhs.tail(sp.n_face_dofs());
        for (std::size_t c = 0; c < sp.mesh().n_cells(); c++) {
            const dense_vector t = m_atf[c].transpose() * m_att[c].solve(rhs.segment(c * nc, nc));
            for (Eigen::Index j = 0; j < t.size(); j++) {
                const std::size_t gj = face_index(c, j);
                if (gj != npos)
                    g(gj) -= t(j);
            }
        }
        return g;
    }

    hho_field solve(const dense_vector& rhs) const
    {
        const auto& sp = *m_sp;
        if (std::size_t(rhs.size()) != sp.n_dofs())
            throw error("right-hand side has " + std::to_string(rhs.size()) + " entries, expected " +
                        std::to_string(sp.n_dofs()));

        hho_field          u  = sp.zero_field();
        const dense_vector gF = condense(rhs);
        dense_vector       uF = dense_vector::Zero(sp.n_face_dofs());
        if (sp.n_face_dofs() > 0) {
            if (m_opt.kind == solver_options::method::cholesky) {
                uF = m_llt.solve(gF);
            } else {
                Eigen::ConjugateGradient<sparse_matrix, Eigen::Lower | Eigen::Upper> cg;
                cg.setTolerance(m_opt.tolerance);
                cg.setMaxIterations(m_opt.max_iter);
                cg.compute(m_KFF);
                uF = cg.solve(gF);
                if (cg.info() != Eigen::Success)
                    throw internal_error("conjugate gradients did not converge");
            }
        }
        u.values.tail(sp.n_face_dofs()) = uF;

        const std::size_t nc = sp.cell_size();
        parallel_for(sp.mesh().n_cells(), [&](std::size_t c) {
            dense_vector local_f(m_atf[c].cols());
            for (Eigen::Index j = 0; j < local_f.size(); j++) {
                const std::size_t gj = face_index(c, j);
                local_f(j)           = gj == npos ? 0.0 : uF(gj);
            }
            u.cell(c) = m_att[c].solve(rhs.segment(c * nc, nc) - m_atf[c] * local_f);
        });
        return u;
    }
};

inline condensed_system
assemble(const hho_space& sp, solver_options opt = {})
{
    return condensed_system(sp, opt);
}

inline hho_field
solve(const condensed_system& sys, const dense_vector& rhs)
{
    return sys.solve(rhs);
}

/// Direct solve of the full (cell and face) system, without condensation.
inline hho_field
solve_uncondensed(const hho_space& sp, const dense_vector& rhs)
{
    Eigen::SimplicialLDLT<sparse_matrix> ldlt(global_matrix(sp));
    if (ldlt.info() != Eigen::Success)
        throw internal_error("factorization of the full HHO matrix failed");
    hho_field u = sp.zero_field();
    u.values    = ldlt.solve(rhs);
    return u;
}

} // namespace hho
