#pragma once

#include <memory>
#include <vector>

#include "hho/basis.hpp"
#include "hho/common.hpp"
#include "hho/lagrange.hpp"
#include "hho/local_ops.hpp"
#include "hho/mesh.hpp"
#include "hho/quadrature.hpp"

namespace hho {

enum class averaging_kind
{
    mean,        // arithmetic mean over all cells containing the node
    scott_zhang  // value from the lowest-index cell containing the node
};

/// Cell-wise degree of the smoother output: 2 + max(p, 1).
constexpr int
smoother_degree(int p)
{
    return 2 + std::max(p, 1);
}

inline double
cell_bubble(const std::array<double, 3>& l)
{
    return 27.0 * l[0] * l[1] * l[2];
}

/// Face bubble of the local face i (opposite vertex i) on a cell.
inline double
face_bubble(const std::array<double, 3>& l, int i)
{
    return 4.0 * l[(i + 1) % 3] * l[(i + 2) % 3];
}

inline dense_vector
stack(const broken_poly& u)
{
    const std::size_t n = u.coeffs.empty() ? 0 : u.coeffs[0].size();
    dense_vector      v(u.coeffs.size() * n);
    for (std::size_t c = 0; c < u.coeffs.size(); c++)
        v.segment(c * n, n) = u.coeffs[c];
    return v;
}

inline broken_poly
unstack(const dense_vector& v, int degree, std::size_t n_cells)
{
    const std::size_t n = poly_dim(degree);
    broken_poly       u{degree, std::vector<dense_vector>(n_cells)};
    for (std::size_t c = 0; c < n_cells; c++)
        u.coeffs[c] = v.segment(c * n, n);
    return u;
}

namespace detail {

// L2 fit into P^D(K) of m polynomial functions of degree <= D given at quadrature nodes
template<typename Fn>
dense_matrix
fit_cell(const simplicial_mesh& msh, std::size_t c, int D, std::size_t m, Fn&& fn)
{
    const cell_basis cb(msh, c, D);
    dense_matrix     G = dense_matrix::Zero(cb.size(), m);
    for (const auto& qp : cell_quadrature(msh, c, 2 * D))
        G += qp.w * cb.eval(qp.x) * fn(qp).transpose();
    return mass_matrix(msh, c, cb).ldlt().solve(G);
}

inline void
add_block(std::vector<triplet>& trip, std::size_t r0, std::size_t c0, const dense_matrix& B)
{
    for (Eigen::Index i = 0; i < B.rows(); i++)
        for (Eigen::Index j = 0; j < B.cols(); j++)
            if (B(i, j) != 0.0)
                trip.emplace_back(r0 + i, c0 + j, B(i, j));
}

inline sparse_matrix
from_triplets(std::size_t rows, std::size_t cols, const std::vector<triplet>& trip)
{
    sparse_matrix M(rows, cols);
    M.setFromTriplets(trip.begin(), trip.end());
    return M;
}

} // namespace detail

/**
 * Moment-preserving smoother S_H = A + B (Id - I A) from the HHO space into
 * continuous piecewise polynomials of degree smoother_degree(p) vanishing on
 * the boundary. Every stage is stored as a sparse matrix acting on stacked
 * cell-wise coefficients. The space must outlive the operator.
 */
class smoother_operator
{
    const hho_space* m_sp;
    averaging_kind   m_kind;
    int              m_p, m_D;
    std::size_t      m_nS, m_nR, m_nq, m_nf;

    lagrange_layer m_lag;

    sparse_matrix m_recon;   // unknowns -> P^{p+1} coefficients
    sparse_matrix m_avg;     // P^{p+1} coefficients -> nodal values
    sparse_matrix m_lift;    // nodal values -> P^{p+1} coefficients
    sparse_matrix m_embed;   // P^{p+1} -> P^{D}
    sparse_matrix m_GA;      // unknowns -> A in P^{D}
    sparse_matrix m_bsig;    // face moments -> B_Sigma in P^{D}
    sparse_matrix m_bcell;   // cell moments -> B_M in P^{D}
    sparse_matrix m_bface;   // face moments -> B_Sigma - B_M (cell moments of B_Sigma)
    sparse_matrix m_cell_moments_D;
    sparse_matrix m_face_moments_D;
    sparse_matrix m_face_moments_x;
    sparse_matrix m_cell_moments_x;
    sparse_matrix m_S;

    std::vector<dense_matrix> m_wcell_inv;
    std::vector<dense_matrix> m_wface_inv;

public:
    explicit smoother_operator(const hho_space& sp, averaging_kind kind = averaging_kind::mean)
        : m_sp(&sp)
        , m_kind(kind)
        , m_p(sp.degree())
        , m_D(smoother_degree(sp.degree()))
        , m_nS(poly_dim(m_D))
        , m_nR(poly_dim(m_p + 1))
        , m_nq(poly_dim(m_p - 1))
        , m_nf(poly_dim(m_p, 1))
        , m_lag(sp.mesh(), sp.degree() + 1)
    {
        const auto&       msh = sp.mesh();
        const std::size_t nK  = msh.n_cells();
        const std::size_t nFi = msh.n_interior_faces();
        const std::size_t N   = sp.n_dofs();
        const std::size_t nc  = sp.cell_size();

        m_recon = reconstruction_matrix(sp);

        // averaging at the interior nodes of degree p + 1
        {
            std::vector<triplet> trip;
            for (std::size_t z = 0; z < m_lag.n_nodes(); z++) {
                if (m_lag.on_boundary(z))
                    continue;
                const auto& cells = m_lag.node_cells(z);
                const auto  take  = m_kind == averaging_kind::mean ? cells.size() : std::size_t(1);
                for (std::size_t j = 0; j < take; j++) {
                    const std::size_t  c   = cells[j];
                    const dense_vector phi = cell_basis(msh, c, m_p + 1).eval(m_lag.position(z));
                    for (std::size_t i = 0; i < m_nR; i++)
                        trip.emplace_back(z, c * m_nR + i, phi(i) / double(take));
                }
            }
            m_avg = detail::from_triplets(m_lag.n_nodes(), nK * m_nR, trip);
        }

        std::vector<dense_matrix> lift(nK), mass_D(nK), bcell(nK);
        std::vector<dense_matrix> wface(nFi);
        std::vector<std::array<dense_matrix, 2>> bsig(nFi);
        std::vector<dense_matrix> face_mom(nFi);
        m_wcell_inv.resize(nK);
        m_wface_inv.resize(nFi);

        parallel_for(nK, [&](std::size_t c) {
            lift[c] = detail::fit_cell(msh, c, m_p + 1, m_lag.n_local(),
                                       [&](const quad_point& qp) { return m_lag.eval_local(qp.lambda); });
            const cell_basis cb(msh, c, m_D);
            mass_D[c] = mass_matrix(msh, c, cb);
            if (m_nq > 0) {
                const cell_basis qb(msh, c, m_p - 1);
                dense_matrix     W = dense_matrix::Zero(m_nq, m_nq);
                for (const auto& qp : cell_quadrature(msh, c, 2 * (m_p - 1) + 3)) {
                    const dense_vector q = qb.eval(qp.x);
                    W += qp.w * cell_bubble(qp.lambda) * q * q.transpose();
                }
                m_wcell_inv[c] = W.llt().solve(dense_matrix::Identity(m_nq, m_nq));
                bcell[c]       = detail::fit_cell(msh, c, m_D, m_nq, [&](const quad_point& qp) {
                    return dense_vector(qb.eval(qp.x) * cell_bubble(qp.lambda));
                }) * m_wcell_inv[c];
            }
        });

        std::unique_ptr<lagrange_layer> face_lag;
        if (m_p >= 1)
            face_lag = std::make_unique<lagrange_layer>(msh, m_p);

        parallel_for(nFi, [&](std::size_t i) {
            const std::size_t f = msh.interior_faces[i];
            const face_basis  fb(msh, f, m_p);
            dense_matrix      W = dense_matrix::Zero(m_nf, m_nf);
            for (const auto& qp : face_quadrature(msh, f, 2 * m_p + 2)) {
                const dense_vector r = fb.eval(qp.x);
                W += qp.w * 4.0 * qp.lambda[0] * qp.lambda[1] * r * r.transpose();
            }
            m_wface_inv[i] = W.llt().solve(dense_matrix::Identity(m_nf, m_nf));
            face_mom[i]    = mass_matrix(msh, f, fb);

            for (int s = 0; s < 2; s++) {
                const std::size_t c  = msh.face_cells[f][s];
                const int         li = msh.local_face(c, f);
                dense_matrix      B;
                if (m_p == 0) {
                    B = detail::fit_cell(msh, c, m_D, 1, [&](const quad_point& qp) {
                        return dense_vector::Constant(1, face_bubble(qp.lambda, li));
                    });
                } else {
                    // sum over the degree-p Lagrange nodes z on F of (B_F v)(z) Phi_z Phi_F
                    std::vector<std::size_t>  nodes;
                    std::vector<dense_vector> chi;
                    for (std::size_t a = 0; a < face_lag->n_local(); a++) {
                        if (face_lag->alpha(a)[li] != 0)
                            continue;
                        nodes.push_back(a);
                        chi.push_back(fb.eval(face_lag->position(face_lag->cell_nodes(c)[a])));
                    }
                    B = detail::fit_cell(msh, c, m_D, m_nf, [&](const quad_point& qp) {
                        dense_vector v   = dense_vector::Zero(m_nf);
                        const double phf = face_bubble(qp.lambda, li);
                        for (std::size_t n = 0; n < nodes.size(); n++)
                            v += lagrange_layer::shape(face_lag->alpha(nodes[n]), m_p, qp.lambda) * phf * chi[n];
                        return v;
                    });
                }
                bsig[i][s] = B * m_wface_inv[i];
            }

            const std::size_t c1 = msh.face_cells[f][0];
            const cell_basis  cb(msh, c1, m_D);
            dense_matrix      T = dense_matrix::Zero(m_nf, m_nS);
            for (const auto& qp : face_quadrature(msh, f, m_p + m_D))
                T += qp.w * fb.eval(qp.x) * cb.eval(qp.x).transpose();
            wface[i] = T;
        });

        std::vector<triplet> t_lift, t_embed, t_bcell, t_cmD, t_cmx, t_bsig, t_fmD, t_fmx;
        for (std::size_t c = 0; c < nK; c++) {
            const auto& nodes = m_lag.cell_nodes(c);
            for (std::size_t a = 0; a < nodes.size(); a++) {
                if (m_lag.on_boundary(nodes[a]))
                    continue;
                for (std::size_t j = 0; j < m_nR; j++)
                    if (lift[c](j, a) != 0.0)
                        t_lift.emplace_back(c * m_nR + j, nodes[a], lift[c](j, a));
            }
            for (std::size_t j = 0; j < m_nR; j++)
                t_embed.emplace_back(c * m_nS + j, c * m_nR + j, 1.0);
            if (m_nq > 0) {
                detail::add_block(t_bcell, c * m_nS, c * m_nq, bcell[c]);
                detail::add_block(t_cmD, c * m_nq, c * m_nS, mass_D[c].topRows(m_nq));
                detail::add_block(t_cmx, c * m_nq, c * nc, mass_D[c].topLeftCorner(m_nq, nc));
            }
        }
        for (std::size_t i = 0; i < nFi; i++) {
            const std::size_t f = msh.interior_faces[i];
            for (int s = 0; s < 2; s++)
                detail::add_block(t_bsig, msh.face_cells[f][s] * m_nS, i * m_nf, bsig[i][s]);
            detail::add_block(t_fmD, i * m_nf, msh.face_cells[f][0] * m_nS, wface[i]);
            detail::add_block(t_fmx, i * m_nf, sp.face_offset(f), face_mom[i]);
        }

        m_lift           = detail::from_triplets(nK * m_nR, m_lag.n_nodes(), t_lift);
        m_embed          = detail::from_triplets(nK * m_nS, nK * m_nR, t_embed);
        m_bcell          = detail::from_triplets(nK * m_nS, nK * m_nq, t_bcell);
        m_cell_moments_D = detail::from_triplets(nK * m_nq, nK * m_nS, t_cmD);
        m_cell_moments_x = detail::from_triplets(nK * m_nq, N, t_cmx);
        m_bsig           = detail::from_triplets(nK * m_nS, nFi * m_nf, t_bsig);
        m_face_moments_D = detail::from_triplets(nFi * m_nf, nK * m_nS, t_fmD);
        m_face_moments_x = detail::from_triplets(nFi * m_nf, N, t_fmx);

        const sparse_matrix lift_avg = m_lift * m_avg;
        m_GA                         = m_embed * (lift_avg * m_recon);
        m_bface                      = m_bsig - m_bcell * (m_cell_moments_D * m_bsig);

        const sparse_matrix face_res = m_face_moments_x - m_face_moments_D * m_GA;
        const sparse_matrix cell_res = m_cell_moments_x - m_cell_moments_D * m_GA;
        m_S                          = m_GA + m_bface * face_res + m_bcell * cell_res;
        m_S.prune(0.0);
    }

    const hho_space&      space() const { return *m_sp; }
    averaging_kind        kind() const { return m_kind; }
    int                   output_degree() const { return m_D; }
    const lagrange_layer& nodes() const { return m_lag; }

    /// Unknowns -> stacked P^D coefficients of S_H.
    const sparse_matrix& matrix() const { return m_S; }
    /// Unknowns -> stacked P^{p+1} coefficients of R.
    const sparse_matrix& reconstruction() const { return m_recon; }
    /// Stacked P^{p+1} -> stacked P^D coefficients (zero padding).
    const sparse_matrix& embedding() const { return m_embed; }

    broken_poly apply(const hho_field& u) const
    {
        return unstack(m_S * u.values, m_D, m_sp->mesh().n_cells());
    }

    /// Values at all nodes of degree p + 1 of the averaged broken polynomial
    /// r in P^{p+1}(M); boundary nodes get 0.
    dense_vector nodal_averages(const broken_poly& r) const { return m_avg * stack(r); }

    /// A u as a continuous piecewise P^{p+1} function.
    broken_poly averaging(const hho_field& u) const
    {
        return unstack(m_lift * (m_avg * (m_recon * u.values)), m_p + 1, m_sp->mesh().n_cells());
    }

    /// Coefficients in P^{p-1}(K) of B_K v from the moments int_K q v.
    dense_vector cell_bubble_coefficients(std::size_t c, const dense_vector& moments) const
    {
        if (m_nq == 0)
            return dense_vector();
        return m_wcell_inv[c] * moments;
    }

    /// Coefficients in P^p(F) of B_F v from the moments int_F r v, i the interior face index.
    dense_vector face_bubble_coefficients(std::size_t i, const dense_vector& moments) const
    {
        return m_wface_inv[i] * moments;
    }

    /// Moments int_K q v for q in P^{p-1}(K), stacked by cell.
    dense_vector cell_moments(const scalar_function& v, int quad_degree) const
    {
        const auto&  msh = m_sp->mesh();
        dense_vector m   = dense_vector::Zero(msh.n_cells() * m_nq);
        if (m_nq == 0)
            return m;
        for (std::size_t c = 0; c < msh.n_cells(); c++) {
            const cell_basis qb(msh, c, m_p - 1);
            for (const auto& qp : cell_quadrature(msh, c, quad_degree + m_p - 1))
                m.segment(c * m_nq, m_nq) += qp.w * v(qp.x) * qb.eval(qp.x);
        }
        return m;
    }

    dense_vector cell_moments(const broken_poly& v) const
    {
        const auto&  msh = m_sp->mesh();
        dense_vector m   = dense_vector::Zero(msh.n_cells() * m_nq);
        if (m_nq == 0)
            return m;
        for (std::size_t c = 0; c < msh.n_cells(); c++) {
            const cell_basis qb(msh, c, m_p - 1);
            const cell_basis vb(msh, c, v.degree);
            for (const auto& qp : cell_quadrature(msh, c, v.degree + m_p - 1))
                m.segment(c * m_nq, m_nq) += qp.w * vb.eval(qp.x).dot(v.coeffs[c]) * qb.eval(qp.x);
        }
        return m;
    }

    /// Moments int_F r v for face data v in P^p(F), indexed by interior face.
    dense_vector face_moments(const std::vector<dense_vector>& v) const
    {
        const auto&  msh = m_sp->mesh();
        dense_vector m(msh.n_interior_faces() * m_nf);
        for (std::size_t i = 0; i < msh.n_interior_faces(); i++) {
            const std::size_t f = msh.interior_faces[i];
            m.segment(i * m_nf, m_nf) = mass_matrix(msh, f, face_basis(msh, f, m_p)) * v[i];
        }
        return m;
    }

    /// B_M v, sum over cells of (B_K v) Phi_K.
    broken_poly bubble_cell(const broken_poly& v) const
    {
        return unstack(m_bcell * cell_moments(v), m_D, m_sp->mesh().n_cells());
    }

    broken_poly bubble_cell(const scalar_function& v, int quad_degree) const
    {
        return unstack(m_bcell * cell_moments(v, quad_degree), m_D, m_sp->mesh().n_cells());
    }

    /// B_Sigma v for face data in P^p(F) on the interior faces.
    broken_poly bubble_face(const std::vector<dense_vector>& v) const
    {
        return unstack(m_bsig * face_moments(v), m_D, m_sp->mesh().n_cells());
    }

    /// B(v_M, v_Sigma) = B_Sigma v_Sigma + B_M (v_M - B_Sigma v_Sigma).
    broken_poly bubble_smoother(const broken_poly& vm, const std::vector<dense_vector>& vs) const
    {
        const dense_vector x = m_bface * face_moments(vs) + m_bcell * cell_moments(vm);
        return unstack(x, m_D, m_sp->mesh().n_cells());
    }
};

} // namespace hho
