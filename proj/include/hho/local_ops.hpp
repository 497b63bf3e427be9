#pragma once

#include <array>
#include <functional>
#include <memory>
#include <vector>

#include "hho/basis.hpp"
#include "hho/common.hpp"
#include "hho/mesh.hpp"
#include "hho/quadrature.hpp"

namespace hho {

using scalar_function = std::function<double(const point&)>;
using vector_function = std::function<vector2(const point&)>;

/// Default extra quadrature order for non-polynomial integrands.
inline constexpr int default_quad_extra = 2;

/**
 * Element of the HHO space: cell blocks in P^p(K) for every cell followed by
 * face blocks in P^p(F) for every interior face, stored in one vector.
 * Boundary faces carry no unknowns.
 */
struct hho_field
{
    int          degree     = 0;
    std::size_t  n_cells    = 0;
    std::size_t  n_faces    = 0;
    dense_vector values;

    hho_field() = default;
    hho_field(int p, std::size_t nc, std::size_t nf)
        : degree(p)
        , n_cells(nc)
        , n_faces(nf)
        , values(dense_vector::Zero(nc * poly_dim(p) + nf * poly_dim(p, 1)))
    {}

    std::size_t cell_size() const { return poly_dim(degree); }
    std::size_t face_size() const { return poly_dim(degree, 1); }

    auto cell(std::size_t c) { return values.segment(c * cell_size(), cell_size()); }
    auto cell(std::size_t c) const { return values.segment(c * cell_size(), cell_size()); }
    /// i is the interior face index
    auto face(std::size_t i) { return values.segment(n_cells * cell_size() + i * face_size(), face_size()); }
    auto face(std::size_t i) const { return values.segment(n_cells * cell_size() + i * face_size(), face_size()); }
};

/// Piecewise polynomial of degree <= degree, one scaled-monomial block per cell.
struct broken_poly
{
    int                       degree = 0;
    std::vector<dense_vector> coeffs;
};

inline double
evaluate(const simplicial_mesh& msh, const broken_poly& u, std::size_t c, const point& x)
{
    return cell_basis(msh, c, u.degree).eval(x).dot(u.coeffs[c]);
}

inline vector2
gradient(const simplicial_mesh& msh, const broken_poly& u, std::size_t c, const point& x)
{
    return cell_basis(msh, c, u.degree).grad(x).transpose() * u.coeffs[c];
}

/**
 * Per-cell operators. Local unknowns are the cell block followed by the blocks
 * of the three faces in local order (face i opposite vertex i), boundary faces
 * included; dof_map sends boundary-face entries to npos.
 */
struct local_operators
{
    std::vector<std::size_t> dof_map;

    dense_matrix mass_r;      // mass matrix of P^{p+1}(K)
    dense_matrix stiff_r;     // stiffness matrix of P^{p+1}(K)
    dense_matrix recon;       // local unknowns -> R coefficients in P^{p+1}(K)
    dense_matrix stab_op;     // local unknowns -> S coefficients in P^{p+1}(K)
    dense_matrix lhs;         // R^T K R + stabilization

    std::array<dense_matrix, 3> face_mass;
    std::array<dense_matrix, 3> face_diff;  // local unknowns -> Pi_F(s_F - S|_F)
    std::array<double, 3>       face_weight;
};

class hho_space
{
    std::shared_ptr<const simplicial_mesh> m_msh;
    int                                    m_p;
    int                                    m_quad_extra = default_quad_extra;
    std::vector<local_operators>           m_ops;

    void build_cell(std::size_t c)
    {
        const auto&       msh = *m_msh;
        const std::size_t nc  = cell_size();
        const std::size_t nf  = face_size();
        const std::size_t nr  = recon_size();
        const std::size_t nl  = local_size();
        auto&             op  = m_ops[c];

        op.dof_map.resize(nl);
        for (std::size_t j = 0; j < nc; j++)
            op.dof_map[j] = c * nc + j;
        for (int i = 0; i < 3; i++) {
            const std::size_t fo = face_offset(msh.cell_faces[c][i]);
            for (std::size_t k = 0; k < nf; k++)
                op.dof_map[nc + i * nf + k] = fo == npos ? npos : fo + k;
        }

        const cell_basis rb(msh, c, m_p + 1);
        op.mass_r  = mass_matrix(msh, c, rb);
        op.stiff_r = stiffness_matrix(msh, c, rb);

        // right-hand side of the local Neumann problem, integrated by parts
        dense_matrix rhs = dense_matrix::Zero(nr, nl);
        rhs.leftCols(nc) = op.stiff_r.leftCols(nc);

        std::array<dense_matrix, 3> face_cross;
        for (int i = 0; i < 3; i++) {
            const std::size_t f = msh.cell_faces[c][i];
            const face_basis  fb(msh, f, m_p);
            const vector2     n = msh.normals[c][i];

            face_cross[i] = dense_matrix::Zero(nf, nr);
            for (const auto& qp : face_quadrature(msh, f, 2 * m_p + 1)) {
                const dense_vector phi  = rb.eval(qp.x);
                const dense_vector dphi = rb.grad(qp.x) * n;
                const dense_vector chi  = fb.eval(qp.x);
                rhs.leftCols(nc) -= qp.w * dphi * phi.head(nc).transpose();
                rhs.middleCols(nc + i * nf, nf) += qp.w * dphi * chi.transpose();
                face_cross[i] += qp.w * chi * phi.transpose();
            }
            op.face_mass[i]   = mass_matrix(msh, f, fb);
            op.face_weight[i] = 1.0 / msh.h_face[f];
        }

        Eigen::LDLT<dense_matrix> neumann(op.stiff_r.bottomRightCorner(nr - 1, nr - 1));
        if (neumann.info() != Eigen::Success)
            throw internal_error("local Neumann problem is singular on cell " + std::to_string(c));
        op.recon                 = dense_matrix::Zero(nr, nl);
        op.recon.bottomRows(nr - 1) = neumann.solve(rhs.bottomRows(nr - 1));

        // fix the constant so that the means of R and s_M agree
        const dense_vector moments = op.mass_r.col(0);
        const double       area    = msh.cell_area[c];
        dense_vector       row     = dense_vector::Zero(nl);
        row.head(nc)               = moments.head(nc);
        row -= op.recon.bottomRows(nr - 1).transpose() * moments.tail(nr - 1);
        op.recon.row(0) = row.transpose() / area;

        // S = s_M + (Id - Pi_M) R
        const dense_matrix proj = op.mass_r.topLeftCorner(nc, nc).ldlt().solve(op.mass_r.topRows(nc));
        op.stab_op              = op.recon;
        op.stab_op.topRows(nc) -= proj * op.recon;
        op.stab_op.topLeftCorner(nc, nc) += dense_matrix::Identity(nc, nc);

        op.lhs = op.recon.transpose() * op.stiff_r * op.recon;
        for (int i = 0; i < 3; i++) {
            dense_matrix d = -op.face_mass[i].ldlt().solve(face_cross[i] * op.stab_op);
            d.middleCols(nc + i * nf, nf) += dense_matrix::Identity(nf, nf);
            op.face_diff[i] = d;
            op.lhs += op.face_weight[i] * d.transpose() * op.face_mass[i] * d;
        }
        op.lhs = 0.5 * (op.lhs + op.lhs.transpose()).eval();
    }

public:
    hho_space(simplicial_mesh msh, int p)
        : hho_space(std::make_shared<const simplicial_mesh>(std::move(msh)), p)
    {}

    hho_space(std::shared_ptr<const simplicial_mesh> msh, int p)
        : m_msh(std::move(msh))
        , m_p(p)
    {
        if (p < 0 || p > max_degree)
            throw unsupported_degree("polynomial degree must lie in [0, " + std::to_string(max_degree) + "], got " +
                                     std::to_string(p));
        if (m_msh->dim != 2)
            throw unsupported_dimension("HHO space is implemented for d = 2 only");
        m_ops.resize(m_msh->n_cells());
        parallel_for(m_msh->n_cells(), [this](std::size_t c) { build_cell(c); });
    }

    const simplicial_mesh&                        mesh() const { return *m_msh; }
    const std::shared_ptr<const simplicial_mesh>& mesh_ptr() const { return m_msh; }

    int degree() const { return m_p; }

    std::size_t cell_size() const { return poly_dim(m_p); }
    std::size_t face_size() const { return poly_dim(m_p, 1); }
    std::size_t recon_size() const { return poly_dim(m_p + 1); }
    std::size_t local_size() const { return cell_size() + 3 * face_size(); }

    std::size_t n_cell_dofs() const { return m_msh->n_cells() * cell_size(); }
    std::size_t n_face_dofs() const { return m_msh->n_interior_faces() * face_size(); }
    std::size_t n_dofs() const { return n_cell_dofs() + n_face_dofs(); }

    /// Global offset of the block of face f (global face id), npos on the boundary.
    std::size_t face_offset(std::size_t f) const
    {
        const std::size_t i = m_msh->interior_index[f];
        return i == npos ? npos : n_cell_dofs() + i * face_size();
    }

    int  quad_extra() const { return m_quad_extra; }
    void set_quad_extra(int q) { m_quad_extra = std::max(0, q); }

    /// Quadrature degree for projections of general (non-polynomial) functions.
    int function_quad_degree() const { return 2 * (m_p + 1) + m_quad_extra; }

    const local_operators& local(std::size_t c) const { return m_ops[c]; }

    hho_field zero_field() const { return hho_field(m_p, m_msh->n_cells(), m_msh->n_interior_faces()); }

    hho_field basis_field(std::size_t i) const
    {
        hho_field f = zero_field();
        f.values(i) = 1.0;
        return f;
    }

    dense_vector gather(const dense_vector& x, std::size_t c) const
    {
        const auto&  map = m_ops[c].dof_map;
        dense_vector loc(map.size());
        for (std::size_t i = 0; i < map.size(); i++)
            loc(i) = map[i] == npos ? 0.0 : x(map[i]);
        return loc;
    }

    dense_vector gather(const hho_field& u, std::size_t c) const { return gather(u.values, c); }
};

/// L2 projection onto P^q(K) on every cell; q < 0 selects the space degree.
inline broken_poly
project_cell(const hho_space& sp, const scalar_function& v, int q = -1, int quad_degree = -1)
{
    const auto& msh = sp.mesh();
    if (q < 0)
        q = sp.degree();
    if (quad_degree < 0)
        quad_degree = q + sp.function_quad_degree();

    broken_poly ret{q, std::vector<dense_vector>(msh.n_cells())};
    parallel_for(msh.n_cells(), [&](std::size_t c) {
        const cell_basis cb(msh, c, q);
        dense_vector     b = dense_vector::Zero(cb.size());
        for (const auto& qp : cell_quadrature(msh, c, quad_degree))
            b += qp.w * v(qp.x) * cb.eval(qp.x);
        ret.coeffs[c] = mass_matrix(msh, c, cb).ldlt().solve(b);
    });
    return ret;
}

/// L2 projection onto P^p(F) on every interior face, indexed by interior index.
inline std::vector<dense_vector>
project_face(const hho_space& sp, const scalar_function& v, int quad_degree = -1)
{
    const auto& msh = sp.mesh();
    if (quad_degree < 0)
        quad_degree = sp.degree() + sp.function_quad_degree();

    std::vector<dense_vector> ret(msh.n_interior_faces());
    parallel_for(msh.n_interior_faces(), [&](std::size_t i) {
        const std::size_t f = msh.interior_faces[i];
        const face_basis  fb(msh, f, sp.degree());
        dense_vector      b = dense_vector::Zero(fb.size());
        for (const auto& qp : face_quadrature(msh, f, quad_degree))
            b += qp.w * v(qp.x) * fb.eval(qp.x);
        ret[i] = mass_matrix(msh, f, fb).ldlt().solve(b);
    });
    return ret;
}

/// Interpolant (Pi_M v, Pi_Sigma v).
inline hho_field
interpolate(const hho_space& sp, const scalar_function& v, int quad_degree = -1)
{
    hho_field   u  = sp.zero_field();
    const auto  pc = project_cell(sp, v, sp.degree(), quad_degree);
    const auto  pf = project_face(sp, v, quad_degree);
    for (std::size_t c = 0; c < u.n_cells; c++)
        u.cell(c) = pc.coeffs[c];
    for (std::size_t i = 0; i < u.n_faces; i++)
        u.face(i) = pf[i];
    return u;
}

inline broken_poly
reconstruct(const hho_space& sp, const hho_field& u)
{
    const auto& msh = sp.mesh();
    broken_poly ret{sp.degree() + 1, std::vector<dense_vector>(msh.n_cells())};
    for (std::size_t c = 0; c < msh.n_cells(); c++)
        ret.coeffs[c] = sp.local(c).recon * sp.gather(u, c);
    return ret;
}

inline broken_poly
stab_operator(const hho_space& sp, const hho_field& u)
{
    const auto& msh = sp.mesh();
    broken_poly ret{sp.degree() + 1, std::vector<dense_vector>(msh.n_cells())};
    for (std::size_t c = 0; c < msh.n_cells(); c++)
        ret.coeffs[c] = sp.local(c).stab_op * sp.gather(u, c);
    return ret;
}

inline double
stab_form(const hho_space& sp, const hho_field& a, const hho_field& b)
{
    double s = 0.0;
    for (std::size_t c = 0; c < sp.mesh().n_cells(); c++) {
        const auto&        op = sp.local(c);
        const dense_vector la = sp.gather(a, c);
        const dense_vector lb = sp.gather(b, c);
        for (int i = 0; i < 3; i++) {
            const dense_vector da = op.face_diff[i] * la;
            const dense_vector db = op.face_diff[i] * lb;
            s += op.face_weight[i] * da.dot(op.face_mass[i] * db);
        }
    }
    return s;
}

inline double
bilinear_b(const hho_space& sp, const hho_field& a, const hho_field& b)
{
    double s = 0.0;
    for (std::size_t c = 0; c < sp.mesh().n_cells(); c++)
        s += sp.gather(a, c).dot(sp.local(c).lhs * sp.gather(b, c));
    return s;
}

/// Broken elliptic projection onto P^q(M), q < 0 meaning p + 1.
inline broken_poly
elliptic_project(const hho_space& sp, const scalar_function& v, const vector_function& grad_v, int q = -1,
                 int quad_degree = -1)
{
    const auto& msh = sp.mesh();
    if (q < 0)
        q = sp.degree() + 1;
    if (quad_degree < 0)
        quad_degree = q + sp.function_quad_degree();

    broken_poly ret{q, std::vector<dense_vector>(msh.n_cells())};
    parallel_for(msh.n_cells(), [&](std::size_t c) {
        const cell_basis   cb(msh, c, q);
        const std::size_t  n = cb.size();
        dense_vector       b = dense_vector::Zero(n);
        double             mean_v = 0.0;
        for (const auto& qp : cell_quadrature(msh, c, quad_degree)) {
            b += qp.w * cb.grad(qp.x) * grad_v(qp.x);
            mean_v += qp.w * v(qp.x);
        }
        const dense_matrix M = mass_matrix(msh, c, cb);
        const dense_matrix K = stiffness_matrix(msh, c, cb);
        dense_vector       x = dense_vector::Zero(n);
        if (n > 1)
            x.tail(n - 1) = K.bottomRightCorner(n - 1, n - 1).ldlt().solve(b.tail(n - 1));
        x(0)          = (mean_v - M.col(0).tail(n - 1).dot(x.tail(n - 1))) / msh.cell_area[c];
        ret.coeffs[c] = x;
    });
    return ret;
}

namespace detail {

template<typename LocalFn>
sparse_matrix
assemble_local(const hho_space& sp, LocalFn&& local_matrix)
{
    const std::size_t     nc = sp.mesh().n_cells();
    std::vector<triplet>  trip;
    for (std::size_t c = 0; c < nc; c++) {
        const auto&        map = sp.local(c).dof_map;
        const dense_matrix A   = local_matrix(c);
        for (std::size_t i = 0; i < map.size(); i++) {
            if (map[i] == npos)
                continue;
            for (std::size_t j = 0; j < map.size(); j++)
                if (map[j] != npos && A(i, j) != 0.0)
                    trip.emplace_back(map[i], map[j], A(i, j));
        }
    }
    sparse_matrix M(sp.n_dofs(), sp.n_dofs());
    M.setFromTriplets(trip.begin(), trip.end());
    return M;
}

} // namespace detail

/// Galerkin matrix of b_H on the HHO basis (cells first, then interior faces).
inline sparse_matrix
global_matrix(const hho_space& sp)
{
    return detail::assemble_local(sp, [&](std::size_t c) { return sp.local(c).lhs; });
}

/// Matrix of the coercivity norm sum_K |grad s_M|^2 + sum_F h_F^{-1} |s_F - s_M|^2.
inline sparse_matrix
coercivity_norm_matrix(const hho_space& sp)
{
    const auto& msh = sp.mesh();
    return detail::assemble_local(sp, [&](std::size_t c) {
        const auto&       op = sp.local(c);
        const std::size_t nc = sp.cell_size();
        const std::size_t nf = sp.face_size();
        const cell_basis  cb(msh, c, sp.degree());

        dense_matrix A                 = dense_matrix::Zero(sp.local_size(), sp.local_size());
        A.topLeftCorner(nc, nc)        = op.stiff_r.topLeftCorner(nc, nc);
        for (int i = 0; i < 3; i++) {
            const std::size_t f = msh.cell_faces[c][i];
            const face_basis  fb(msh, f, sp.degree());
            dense_matrix      cross = dense_matrix::Zero(nf, nc);
            for (const auto& qp : face_quadrature(msh, f, 2 * sp.degree()))
                cross += qp.w * fb.eval(qp.x) * cb.eval(qp.x).transpose();
            dense_matrix d = dense_matrix::Zero(nf, sp.local_size());
            d.leftCols(nc) = -op.face_mass[i].ldlt().solve(cross);
            d.middleCols(nc + i * nf, nf) += dense_matrix::Identity(nf, nf);
            A += op.face_weight[i] * d.transpose() * op.face_mass[i] * d;
        }
        return A;
    });
}

/// Sparse map from global unknowns to the R coefficients, cell blocks of
/// size recon_size() stacked by cell index.
inline sparse_matrix
reconstruction_matrix(const hho_space& sp)
{
    const std::size_t    nc = sp.mesh().n_cells();
    const std::size_t    nr = sp.recon_size();
    std::vector<triplet> trip;
    for (std::size_t c = 0; c < nc; c++) {
        const auto& op = sp.local(c);
        for (std::size_t i = 0; i < nr; i++)
            for (std::size_t j = 0; j < op.dof_map.size(); j++)
                if (op.dof_map[j] != npos && op.recon(i, j) != 0.0)
                    trip.emplace_back(c * nr + i, op.dof_map[j], op.recon(i, j));
    }
    sparse_matrix R(nc * nr, sp.n_dofs());
    R.setFromTriplets(trip.begin(), trip.end());
    return R;
}

} // namespace hho
