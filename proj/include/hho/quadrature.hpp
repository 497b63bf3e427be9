#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "hho/common.hpp"
#include "hho/mesh.hpp"

namespace hho {

/// Highest exactness degree available from quad_for_degree.
inline constexpr int max_quadrature_degree = 40;

/**
 * Quadrature rule on the reference simplex. Points are barycentric (two
 * coordinates on an edge, three on a triangle) and weights sum to one, so the
 * physical weight is weight * measure.
 */
struct quadrature_rule
{
    int                                dim    = 0;
    int                                degree = 0;
    std::vector<std::array<double, 3>> points;
    std::vector<double>                weights;

    std::size_t size() const { return weights.size(); }
};

namespace detail {

// Legendre polynomial P_n(z) and its derivative
inline std::pair<double, double>
legendre(int n, double z)
{
    double p0 = 1.0, p1 = z;
    for (int k = 2; k <= n; k++) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0              = p1;
        p1              = p2;
    }
    return {p1, n * (z * p1 - p0) / (z * z - 1.0)};
}

// Gauss-Legendre nodes and weights on [0, 1]
inline void
gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w)
{
    x.resize(n);
    w.resize(n);
    for (int i = 0; i < n; i++) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; it++) {
            const auto [pn, dp] = legendre(n, z);
            const double dz     = pn / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16)
                break;
        }
        const double dp = legendre(n, z).second;
        x[i]            = 0.5 * (1.0 - z);
        w[i]            = 1.0 / ((1.0 - z * z) * dp * dp);
    }
}

inline quadrature_rule
make_edge_rule(int degree)
{
    const int           n = degree / 2 + 1;
    std::vector<double> x, w;
    gauss_legendre(n, x, w);
    quadrature_rule qr;
    qr.dim    = 1;
    qr.degree = degree;
    for (int i = 0; i < n; i++) {
        qr.points.push_back({1.0 - x[i], x[i], 0.0});
        qr.weights.push_back(w[i]);
    }
    return qr;
}

// collapsed (Duffy) tensor rule: x = u, y = v (1 - u), dx dy = (1 - u) du dv
inline quadrature_rule
make_triangle_rule(int degree)
{
    const int           nu = (degree + 3) / 2;
    const int           nv = (degree + 2) / 2;
    std::vector<double> xu, wu, xv, wv;
    gauss_legendre(nu, xu, wu);
    gauss_legendre(nv, xv, wv);
    quadrature_rule qr;
    qr.dim    = 2;
    qr.degree = degree;
    for (int i = 0; i < nu; i++) {
        for (int j = 0; j < nv; j++) {
            const double x = xu[i];
            const double y = xv[j] * (1.0 - xu[i]);
            qr.points.push_back({1.0 - x - y, x, y});
            qr.weights.push_back(2.0 * wu[i] * wv[j] * (1.0 - xu[i]));
        }
    }
    return qr;
}

} // namespace detail

/**
 * Rule exact for polynomials of total degree <= degree on the reference
 * simplex of dimension dim (1: edge, 2: triangle).
 */
inline const quadrature_rule&
quad_for_degree(int dim, int degree)
{
    if (dim == 3)
        throw unsupported_dimension("tetrahedral quadrature is not implemented");
    if (dim != 1 && dim != 2)
        throw unsupported_dimension("quadrature dimension must be 1 or 2");
    if (degree < 0 || degree > max_quadrature_degree)
        throw unsupported_degree("no quadrature rule of degree " + std::to_string(degree));

    static const auto table = [] {
        std::array<std::vector<quadrature_rule>, 2> t;
        for (int k = 0; k <= max_quadrature_degree; k++) {
            t[0].push_back(detail::make_edge_rule(k));
            t[1].push_back(detail::make_triangle_rule(k));
        }
        return t;
    }();
    return table[dim - 1][degree];
}

/// Physical quadrature node: position, weight, and barycentric coordinates
/// with respect to the owning cell (or the face endpoints).
struct quad_point
{
    point                 x;
    double                w;
    std::array<double, 3> lambda;
};

inline std::vector<quad_point>
cell_quadrature(const simplicial_mesh& msh, std::size_t c, int degree)
{
    const auto&  qr  = quad_for_degree(2, degree);
    const auto&  cl  = msh.cells[c];
    const point& a   = msh.vertices[cl[0]];
    const point& b   = msh.vertices[cl[1]];
    const point& d   = msh.vertices[cl[2]];
    const double vol = msh.cell_area[c];

    std::vector<quad_point> qps(qr.size());
    for (std::size_t i = 0; i < qr.size(); i++) {
        const auto& l = qr.points[i];
        qps[i]        = {l[0] * a + l[1] * b + l[2] * d, qr.weights[i] * vol, l};
    }
    return qps;
}

/// Nodes on face f; lambda[0], lambda[1] refer to faces[f][0], faces[f][1].
inline std::vector<quad_point>
face_quadrature(const simplicial_mesh& msh, std::size_t f, int degree)
{
    const auto&  qr  = quad_for_degree(1, degree);
    const point& a   = msh.vertices[msh.faces[f][0]];
    const point& b   = msh.vertices[msh.faces[f][1]];
    const double len = msh.h_face[f];

    std::vector<quad_point> qps(qr.size());
    for (std::size_t i = 0; i < qr.size(); i++) {
        const auto& l = qr.points[i];
        qps[i]        = {l[0] * a + l[1] * b, qr.weights[i] * len, l};
    }
    return qps;
}

template<typename Fn>
double
integrate_cell(const simplicial_mesh& msh, std::size_t c, int degree, Fn&& fn)
{
    double s = 0.0;
    for (const auto& qp : cell_quadrature(msh, c, degree))
        s += qp.w * fn(qp.x);
    return s;
}

template<typename Fn>
double
integrate_face(const simplicial_mesh& msh, std::size_t f, int degree, Fn&& fn)
{
    double s = 0.0;
    for (const auto& qp : face_quadrature(msh, f, degree))
        s += qp.w * fn(qp.x);
    return s;
}

} // namespace hho
