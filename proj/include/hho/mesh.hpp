#pragma once

#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hho/common.hpp"

namespace hho {

/**
 * Matching simplicial mesh of a polygonal domain.
 *
 * Faces are stored once globally. Local face i of a cell is the edge opposite
 * its local vertex i; the per-incidence outward normal carries the orientation.
 * Cells are positively (counter-clockwise) oriented. Only d = 2 is implemented.
 */
struct simplicial_mesh
{
    int dim = 2;

    std::vector<point>                      vertices;
    std::vector<std::array<std::size_t, 3>> cells;

    // faces[f] holds the two vertex ids in increasing order
    std::vector<std::array<std::size_t, 2>> faces;
    std::vector<char>                       face_is_boundary;
    // second entry is npos on boundary faces
    std::vector<std::array<std::size_t, 2>> face_cells;
    std::vector<std::array<std::size_t, 3>> cell_faces;
    std::vector<std::array<vector2, 3>>     normals;

    std::vector<double> cell_area;
    std::vector<double> h_cell;
    std::vector<double> r_cell;
    std::vector<double> h_face;
    std::vector<point>  cell_barycenter;
    std::vector<point>  face_barycenter;

    // interior face numbering used by the face unknowns
    std::vector<std::size_t> interior_index;
    std::vector<std::size_t> interior_faces;

    std::size_t n_vertices() const { return vertices.size(); }
    std::size_t n_cells() const { return cells.size(); }
    std::size_t n_faces() const { return faces.size(); }
    std::size_t n_interior_faces() const { return interior_faces.size(); }

    bool is_boundary(std::size_t f) const { return face_is_boundary[f] != 0; }

    /// Unit tangent from the lower to the higher vertex id.
    vector2 face_tangent(std::size_t f) const
    {
        const vector2 t = vertices[faces[f][1]] - vertices[faces[f][0]];
        return t / t.norm();
    }

    /// Local index (0..2) of face f inside cell c.
    int local_face(std::size_t c, std::size_t f) const
    {
        for (int i = 0; i < 3; i++)
            if (cell_faces[c][i] == f)
                return i;
        return -1;
    }

    /// Barycentric coordinates of x with respect to cell c.
    std::array<double, 3> barycentric(std::size_t c, const point& x) const
    {
        const point& a = vertices[cells[c][0]];
        const point& b = vertices[cells[c][1]];
        const point& d = vertices[cells[c][2]];
        const double det = (b - a).x() * (d - a).y() - (b - a).y() * (d - a).x();
        const double l1  = ((x - a).x() * (d - a).y() - (x - a).y() * (d - a).x()) / det;
        const double l2  = ((b - a).x() * (x - a).y() - (b - a).y() * (x - a).x()) / det;
        return {1.0 - l1 - l2, l1, l2};
    }

    double mesh_size() const
    {
        double h = 0.0;
        for (double hk : h_cell)
            h = std::max(h, hk);
        return h;
    }
};

namespace detail {

inline double
signed_area(const point& a, const point& b, const point& c)
{
    return 0.5 * ((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
}

} // namespace detail

/**
 * Builds the face structure and geometric quantities of a triangulation.
 * Negatively oriented cells are reoriented. Throws invalid_mesh for degenerate
 * cells, out-of-range vertex ids, or edges shared by more than two cells, and
 * unsupported_dimension for dim != 2.
 */
inline simplicial_mesh
make_mesh(int dim, std::vector<point> vertices, std::vector<std::array<std::size_t, 3>> cells)
{
    if (dim == 3)
        throw unsupported_dimension("three-dimensional meshes are not implemented");
    if (dim != 2)
        throw unsupported_dimension("mesh dimension must be 2 or 3, got " + std::to_string(dim));

    simplicial_mesh msh;
    msh.dim      = dim;
    msh.vertices = std::move(vertices);
    msh.cells    = std::move(cells);

    const std::size_t nc = msh.cells.size();
    if (nc == 0)
        throw invalid_mesh("mesh has no cells");

    for (std::size_t c = 0; c < nc; c++) {
        auto& cl = msh.cells[c];
        for (auto v : cl)
            if (v >= msh.vertices.size())
                throw invalid_mesh("cell " + std::to_string(c) + " references missing vertex " + std::to_string(v));
        const double a = detail::signed_area(msh.vertices[cl[0]], msh.vertices[cl[1]], msh.vertices[cl[2]]);
        if (!(std::abs(a) > 0.0))
            throw invalid_mesh("cell " + std::to_string(c) + " is degenerate");
        if (a < 0.0)
            std::swap(cl[1], cl[2]);
    }

    std::map<std::pair<std::size_t, std::size_t>, std::size_t> edge_ids;
    msh.cell_faces.resize(nc);
    for (std::size_t c = 0; c < nc; c++) {
        for (int i = 0; i < 3; i++) {
            std::size_t a = msh.cells[c][(i + 1) % 3];
            std::size_t b = msh.cells[c][(i + 2) % 3];
            if (a > b)
                std::swap(a, b);
            auto [it, inserted] = edge_ids.try_emplace({a, b}, msh.faces.size());
            if (inserted) {
                msh.faces.push_back({a, b});
                msh.face_cells.push_back({c, npos});
            } else {
                auto& fc = msh.face_cells[it->second];
                if (fc[1] != npos)
                    throw invalid_mesh("edge (" + std::to_string(a) + ", " + std::to_string(b) +
                                       ") is shared by more than two cells");
                fc[1] = c;
            }
            msh.cell_faces[c][i] = it->second;
        }
    }

    const std::size_t nf = msh.faces.size();
    msh.face_is_boundary.resize(nf);
    msh.interior_index.assign(nf, npos);
    for (std::size_t f = 0; f < nf; f++) {
        msh.face_is_boundary[f] = msh.face_cells[f][1] == npos;
        if (!msh.face_is_boundary[f]) {
            msh.interior_index[f] = msh.interior_faces.size();
            msh.interior_faces.push_back(f);
        }
    }

    msh.h_face.resize(nf);
    msh.face_barycenter.resize(nf);
    for (std::size_t f = 0; f < nf; f++) {
        const point& a         = msh.vertices[msh.faces[f][0]];
        const point& b         = msh.vertices[msh.faces[f][1]];
        msh.h_face[f]          = (b - a).norm();
        msh.face_barycenter[f] = 0.5 * (a + b);
    }

    msh.cell_area.resize(nc);
    msh.h_cell.resize(nc);
    msh.r_cell.resize(nc);
    msh.cell_barycenter.resize(nc);
    msh.normals.resize(nc);
    for (std::size_t c = 0; c < nc; c++) {
        const auto&  cl = msh.cells[c];
        const point& a  = msh.vertices[cl[0]];
        const point& b  = msh.vertices[cl[1]];
        const point& d  = msh.vertices[cl[2]];

        msh.cell_area[c]       = detail::signed_area(a, b, d);
        msh.cell_barycenter[c] = (a + b + d) / 3.0;

        double perimeter = 0.0, diam = 0.0;
        for (int i = 0; i < 3; i++) {
            const point&  p0 = msh.vertices[cl[(i + 1) % 3]];
            const point&  p1 = msh.vertices[cl[(i + 2) % 3]];
            const vector2 t  = p1 - p0;
            const double  l  = t.norm();
            perimeter += l;
            diam = std::max(diam, l);
            msh.normals[c][i] = vector2(t.y(), -t.x()) / l;
        }
        msh.h_cell[c] = diam;
        msh.r_cell[c] = 2.0 * msh.cell_area[c] / perimeter;
    }

    return msh;
}

/// Outcome of the structural checks on a mesh; `violations` is empty when valid.
struct mesh_report
{
    double                   total_area       = 0.0;
    double                   boundary_area    = 0.0;
    double                   closure_defect   = 0.0;
    double                   normal_defect    = 0.0;
    std::size_t              hanging_vertices = 0;
    std::vector<std::string> violations;

    bool valid() const { return violations.empty(); }
};

/**
 * Checks the matching and geometric invariants: no vertex lies in the interior
 * of a boundary edge (hanging nodes), the cells tile the region enclosed by the
 * boundary without overlap, interior normals are opposite, sum_F |F| n_F = 0
 * per cell, and r_K <= h_K, h_F <= h_K.
 */
inline mesh_report
check_mesh(const simplicial_mesh& msh, double tol = 1e-12)
{
    mesh_report rep;

    for (double a : msh.cell_area)
        rep.total_area += a;

    for (std::size_t c = 0; c < msh.n_cells(); c++) {
        vector2 s = vector2::Zero();
        for (int i = 0; i < 3; i++) {
            const std::size_t f = msh.cell_faces[c][i];
            s += msh.h_face[f] * msh.normals[c][i];
            if (msh.is_boundary(f)) {
                const point& a = msh.vertices[msh.cells[c][(i + 1) % 3]];
                const point& b = msh.vertices[msh.cells[c][(i + 2) % 3]];
                rep.boundary_area += 0.5 * (a.x() * b.y() - a.y() * b.x());
            }
        }
        rep.closure_defect = std::max(rep.closure_defect, s.norm() / msh.h_cell[c]);

        if (!(msh.r_cell[c] > 0.0) || msh.r_cell[c] > msh.h_cell[c])
            rep.violations.push_back("cell " + std::to_string(c) + " violates 0 < r_K <= h_K");
        for (int i = 0; i < 3; i++)
            if (msh.h_face[msh.cell_faces[c][i]] > msh.h_cell[c] * (1.0 + tol))
                rep.violations.push_back("cell " + std::to_string(c) + " has h_F > h_K");
    }

    for (std::size_t f = 0; f < msh.n_faces(); f++) {
        if (msh.is_boundary(f))
            continue;
        const auto [k1, k2] = msh.face_cells[f];
        const vector2 n1    = msh.normals[k1][msh.local_face(k1, f)];
        const vector2 n2    = msh.normals[k2][msh.local_face(k2, f)];
        rep.normal_defect   = std::max(rep.normal_defect, (n1 + n2).norm());
    }

    // a hanging node sits strictly inside an edge that is then seen by one cell only
    for (std::size_t f = 0; f < msh.n_faces(); f++) {
        if (!msh.is_boundary(f))
            continue;
        const point&  a  = msh.vertices[msh.faces[f][0]];
        const point&  b  = msh.vertices[msh.faces[f][1]];
        const vector2 t  = b - a;
        const double  l2 = t.squaredNorm();
        for (std::size_t v = 0; v < msh.n_vertices(); v++) {
            if (v == msh.faces[f][0] || v == msh.faces[f][1])
                continue;
            const vector2 w     = msh.vertices[v] - a;
            const double  s     = w.dot(t) / l2;
            const double  cross = std::abs(w.x() * t.y() - w.y() * t.x()) / std::sqrt(l2);
            if (s > tol && s < 1.0 - tol && cross <= tol * std::sqrt(l2)) {
                rep.hanging_vertices++;
                rep.violations.push_back("vertex " + std::to_string(v) + " lies inside edge " + std::to_string(f) +
                                         " (non-matching mesh)");
            }
        }
    }

    if (std::abs(rep.total_area - rep.boundary_area) > tol * std::max(1.0, rep.boundary_area))
        rep.violations.push_back("cells do not tile the enclosed region (overlap or gap): area " +
                                 std::to_string(rep.total_area) + " vs " + std::to_string(rep.boundary_area));
    if (rep.closure_defect > tol)
        rep.violations.push_back("sum of |F| n_F over a cell is not zero");
    if (rep.normal_defect > tol)
        rep.violations.push_back("interior face normals are not opposite");

    return rep;
}

/// Uniform n x n grid of the unit square, every square split along the
/// diagonal from its lower-left to its upper-right corner.
inline simplicial_mesh
build_unit_square(std::size_t n)
{
    if (n < 1)
        throw invalid_mesh("build_unit_square needs n >= 1");

    std::vector<point> verts;
    verts.reserve((n + 1) * (n + 1));
    for (std::size_t j = 0; j <= n; j++)
        for (std::size_t i = 0; i <= n; i++)
            verts.emplace_back(double(i) / double(n), double(j) / double(n));

    auto id = [n](std::size_t i, std::size_t j) { return j * (n + 1) + i; };

    std::vector<std::array<std::size_t, 3>> cls;
    cls.reserve(2 * n * n);
    for (std::size_t j = 0; j < n; j++) {
        for (std::size_t i = 0; i < n; i++) {
            cls.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            cls.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    }
    return make_mesh(2, std::move(verts), std::move(cls));
}

/// Red refinement: each triangle is split into four through its edge midpoints.
inline simplicial_mesh
refine_red(const simplicial_mesh& msh)
{
    if (msh.dim != 2)
        throw unsupported_dimension("refine_red is implemented for d = 2 only");

    std::vector<point> verts = msh.vertices;
    const std::size_t  nv    = verts.size();
    for (std::size_t f = 0; f < msh.n_faces(); f++)
        verts.push_back(msh.face_barycenter[f]);

    std::vector<std::array<std::size_t, 3>> cls;
    cls.reserve(4 * msh.n_cells());
    for (std::size_t c = 0; c < msh.n_cells(); c++) {
        const auto&       v  = msh.cells[c];
        const std::size_t m0 = nv + msh.cell_faces[c][0];
        const std::size_t m1 = nv + msh.cell_faces[c][1];
        const std::size_t m2 = nv + msh.cell_faces[c][2];
        cls.push_back({v[0], m2, m1});
        cls.push_back({m2, v[1], m0});
        cls.push_back({m1, m0, v[2]});
        cls.push_back({m0, m1, m2});
    }
    return make_mesh(2, std::move(verts), std::move(cls));
}

/// Largest gamma with gamma * r_K <= h_K for all cells, i.e. min_K h_K / r_K.
inline double
shape_parameter(const simplicial_mesh& msh)
{
    double gamma = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < msh.n_cells(); c++) {
        if (!(msh.r_cell[c] > 0.0))
            throw invalid_mesh("cell " + std::to_string(c) + " has zero inradius");
        gamma = std::min(gamma, msh.h_cell[c] / msh.r_cell[c]);
    }
    return gamma;
}

/**
 * Plain-text mesh format:
 *
 *     # optional comment lines
 *     dim n_vertices n_cells
 *     x y                      (n_vertices lines)
 *     i j k                    (n_cells lines, 0-based vertex ids)
 */
inline simplicial_mesh
read_mesh(std::istream& is)
{
    std::string       content, line;
    std::stringstream body;
    while (std::getline(is, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        body << line << '\n';
    }

    int         dim = 0;
    std::size_t nv = 0, nc = 0;
    if (!(body >> dim >> nv >> nc))
        throw invalid_mesh("mesh file: malformed header, expected 'dim n_vertices n_cells'");
    if (dim != 2)
        return make_mesh(dim, {}, {});

    std::vector<point> verts(nv);
    for (std::size_t i = 0; i < nv; i++) {
        double x, y;
        if (!(body >> x >> y))
            throw invalid_mesh("mesh file: vertex " + std::to_string(i) + " is malformed");
        verts[i] = point(x, y);
    }
    std::vector<std::array<std::size_t, 3>> cls(nc);
    for (std::size_t i = 0; i < nc; i++) {
        long long a, b, c;
        if (!(body >> a >> b >> c))
            throw invalid_mesh("mesh file: cell " + std::to_string(i) + " is malformed");
        if (a < 0 || b < 0 || c < 0)
            throw invalid_mesh("mesh file: cell " + std::to_string(i) + " has a negative vertex id");
        cls[i] = {std::size_t(a), std::size_t(b), std::size_t(c)};
    }
    return make_mesh(dim, std::move(verts), std::move(cls));
}

inline simplicial_mesh
read_mesh_file(const std::string& path)
{
    std::ifstream ifs(path);
    if (!ifs)
        throw invalid_mesh("cannot open mesh file '" + path + "'");
    return read_mesh(ifs);
}

inline void
write_mesh(std::ostream& os, const simplicial_mesh& msh)
{
    const auto flags = os.flags();
    const auto prec  = os.precision(17);
    os << msh.dim << ' ' << msh.n_vertices() << ' ' << msh.n_cells() << '\n';
    for (const auto& v : msh.vertices)
        os << v.x() << ' ' << v.y() << '\n';
    for (const auto& c : msh.cells)
        os << c[0] << ' ' << c[1] << ' ' << c[2] << '\n';
    os.precision(prec);
    os.flags(flags);
}

} // namespace hho
