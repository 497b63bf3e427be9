#pragma once

#include <cmath>
#include <vector>

#include "hho/common.hpp"
#include "hho/mesh.hpp"
#include "hho/quadrature.hpp"

namespace hho {

/**
 * Scaled monomials ((x - m_K) / h_K)^a on a cell, ordered by total degree and,
 * within a degree, by decreasing power of x. The first function is 1, and the
 * functions of degree <= k form a prefix of length poly_dim(k).
 */
class cell_basis
{
    point  m_center;
    double m_h;
    int    m_degree;

    std::vector<std::array<int, 2>> m_powers;

public:
    cell_basis(const simplicial_mesh& msh, std::size_t c, int degree)
        : cell_basis(msh.cell_barycenter[c], msh.h_cell[c], degree)
    {}

    cell_basis(const point& center, double h, int degree)
        : m_center(center)
        , m_h(h)
        , m_degree(degree)
    {
        for (int k = 0; k <= degree; k++)
            for (int i = k; i >= 0; i--)
                m_powers.push_back({i, k - i});
    }

    std::size_t size() const { return m_powers.size(); }
    int         degree() const { return m_degree; }
    const point& center() const { return m_center; }
    double      scale() const { return m_h; }

    const std::array<int, 2>& powers(std::size_t i) const { return m_powers[i]; }

    dense_vector eval(const point& x) const
    {
        const double sx = (x.x() - m_center.x()) / m_h;
        const double sy = (x.y() - m_center.y()) / m_h;
        std::vector<double> px(m_degree + 1, 1.0), py(m_degree + 1, 1.0);
        for (int k = 1; k <= m_degree; k++) {
            px[k] = px[k - 1] * sx;
            py[k] = py[k - 1] * sy;
        }
        dense_vector ret(size());
        for (std::size_t i = 0; i < size(); i++)
            ret(i) = px[m_powers[i][0]] * py[m_powers[i][1]];
        return ret;
    }

    /// size() x 2 matrix of gradients.
    dense_matrix grad(const point& x) const
    {
        const double sx = (x.x() - m_center.x()) / m_h;
        const double sy = (x.y() - m_center.y()) / m_h;
        std::vector<double> px(m_degree + 1, 1.0), py(m_degree + 1, 1.0);
        for (int k = 1; k <= m_degree; k++) {
            px[k] = px[k - 1] * sx;
            py[k] = py[k - 1] * sy;
        }
        dense_matrix ret(size(), 2);
        for (std::size_t i = 0; i < size(); i++) {
            const auto [a, b] = m_powers[i];
            ret(i, 0)         = a == 0 ? 0.0 : a * px[a - 1] * py[b] / m_h;
            ret(i, 1)         = b == 0 ? 0.0 : b * px[a] * py[b - 1] / m_h;
        }
        return ret;
    }
};

/// Scaled monomials t^k, t = (x - m_F) . tau / h_F, tau pointing from the
/// lower to the higher vertex id of the face.
class face_basis
{
    point   m_center;
    vector2 m_tangent;
    double  m_h;
    int     m_degree;

public:
    face_basis(const simplicial_mesh& msh, std::size_t f, int degree)
        : m_center(msh.face_barycenter[f])
        , m_tangent(msh.face_tangent(f))
        , m_h(msh.h_face[f])
        , m_degree(degree)
    {}

    std::size_t size() const { return std::size_t(m_degree + 1); }
    int         degree() const { return m_degree; }

    double coordinate(const point& x) const { return (x - m_center).dot(m_tangent) / m_h; }

    dense_vector eval(const point& x) const
    {
        const double t = coordinate(x);
        dense_vector ret(size());
        ret(0) = 1.0;
        for (int k = 1; k <= m_degree; k++)
            ret(k) = ret(k - 1) * t;
        return ret;
    }
};

inline dense_matrix
mass_matrix(const simplicial_mesh& msh, std::size_t c, const cell_basis& cb)
{
    dense_matrix M = dense_matrix::Zero(cb.size(), cb.size());
    for (const auto& qp : cell_quadrature(msh, c, 2 * cb.degree())) {
        const dense_vector phi = cb.eval(qp.x);
        M.selfadjointView<Eigen::Lower>().rankUpdate(phi, qp.w);
    }
    M.triangularView<Eigen::StrictlyUpper>() = M.transpose();
    return M;
}

inline dense_matrix
mass_matrix(const simplicial_mesh& msh, std::size_t f, const face_basis& fb)
{
    dense_matrix M = dense_matrix::Zero(fb.size(), fb.size());
    for (const auto& qp : face_quadrature(msh, f, 2 * fb.degree())) {
        const dense_vector phi = fb.eval(qp.x);
        M.selfadjointView<Eigen::Lower>().rankUpdate(phi, qp.w);
    }
    M.triangularView<Eigen::StrictlyUpper>() = M.transpose();
    return M;
}

inline dense_matrix
stiffness_matrix(const simplicial_mesh& msh, std::size_t c, const cell_basis& cb)
{
    dense_matrix K = dense_matrix::Zero(cb.size(), cb.size());
    const int    q = std::max(0, 2 * cb.degree() - 2);
    for (const auto& qp : cell_quadrature(msh, c, q)) {
        const dense_matrix g = cb.grad(qp.x);
        K.selfadjointView<Eigen::Lower>().rankUpdate(g, qp.w);
    }
    K.triangularView<Eigen::StrictlyUpper>() = K.transpose();
    return K;
}

} // namespace hho
