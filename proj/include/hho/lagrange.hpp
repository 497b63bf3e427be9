#pragma once

#include <array>
#include <vector>

#include "hho/common.hpp"
#include "hho/mesh.hpp"

namespace hho {

/**
 * Nodes of the continuous piecewise P^k Lagrange space, k >= 1.
 *
 * Global numbering: mesh vertices, then k - 1 nodes per face (ordered from the
 * lower to the higher vertex id), then the interior nodes of every cell. Local
 * nodes of a cell are multi-indices alpha with |alpha| = k attached to the
 * local vertices; the node sits at sum_i alpha_i / k * v_i.
 */
class lagrange_layer
{
    int         m_k;
    std::size_t m_nv, m_nf;

    std::vector<std::array<int, 3>>       m_alpha;
    std::vector<std::vector<std::size_t>> m_cell_nodes;
    std::vector<std::vector<std::size_t>> m_node_cells;
    std::vector<point>                    m_position;
    std::vector<char>                     m_boundary;

public:
    lagrange_layer(const simplicial_mesh& msh, int k)
        : m_k(k)
        , m_nv(msh.n_vertices())
        , m_nf(msh.n_faces())
    {
        if (k < 1)
            throw unsupported_degree("Lagrange layer needs k >= 1");

        for (int a = k; a >= 0; a--)
            for (int b = k - a; b >= 0; b--)
                m_alpha.push_back({a, b, k - a - b});

        std::vector<std::size_t> interior_slot(m_alpha.size(), npos);
        std::size_t              n_interior = 0;
        for (std::size_t i = 0; i < m_alpha.size(); i++)
            if (m_alpha[i][0] > 0 && m_alpha[i][1] > 0 && m_alpha[i][2] > 0)
                interior_slot[i] = n_interior++;

        const std::size_t n_nodes = m_nv + m_nf * (k - 1) + msh.n_cells() * n_interior;
        m_position.resize(n_nodes);
        m_boundary.assign(n_nodes, 0);
        m_node_cells.resize(n_nodes);
        m_cell_nodes.resize(msh.n_cells());

        for (std::size_t f = 0; f < m_nf; f++) {
            if (!msh.is_boundary(f))
                continue;
            m_boundary[msh.faces[f][0]] = 1;
            m_boundary[msh.faces[f][1]] = 1;
            for (int m = 1; m < k; m++)
                m_boundary[m_nv + f * (k - 1) + (m - 1)] = 1;
        }

        for (std::size_t c = 0; c < msh.n_cells(); c++) {
            const auto& cl = msh.cells[c];
            auto&       cn = m_cell_nodes[c];
            cn.resize(m_alpha.size());
            for (std::size_t i = 0; i < m_alpha.size(); i++) {
                const auto& al = m_alpha[i];
                int         nz = 0, zero = -1;
                for (int j = 0; j < 3; j++) {
                    if (al[j] > 0)
                        nz++;
                    else
                        zero = j;
                }
                std::size_t id;
                if (nz == 1) {
                    int j = al[0] > 0 ? 0 : (al[1] > 0 ? 1 : 2);
                    id    = cl[j];
                } else if (nz == 2) {
                    const std::size_t f  = msh.cell_faces[c][zero];
                    const std::size_t hi = msh.faces[f][1];
                    int               m  = 0;
                    for (int j = 0; j < 3; j++)
                        if (cl[j] == hi)
                            m = al[j];
                    id = m_nv + f * (k - 1) + (m - 1);
                } else {
                    id = m_nv + m_nf * (k - 1) + c * n_interior + interior_slot[i];
                }
                cn[i] = id;
                m_node_cells[id].push_back(c);
                m_position[id] = (al[0] * msh.vertices[cl[0]] + al[1] * msh.vertices[cl[1]] +
                                  al[2] * msh.vertices[cl[2]]) /
                                 double(k);
            }
        }
    }

    int         degree() const { return m_k; }
    std::size_t n_nodes() const { return m_position.size(); }
    std::size_t n_local() const { return m_alpha.size(); }

    const std::array<int, 3>&       alpha(std::size_t i) const { return m_alpha[i]; }
    const std::vector<std::size_t>& cell_nodes(std::size_t c) const { return m_cell_nodes[c]; }
    /// Cells containing node z, in increasing order.
    const std::vector<std::size_t>& node_cells(std::size_t z) const { return m_node_cells[z]; }
    const point&                    position(std::size_t z) const { return m_position[z]; }
    bool                            on_boundary(std::size_t z) const { return m_boundary[z] != 0; }

    /// Local basis function of multi-index alpha at barycentric coordinates lambda.
    static double shape(const std::array<int, 3>& alpha, int k, const std::array<double, 3>& lambda)
    {
        double v = 1.0;
        for (int j = 0; j < 3; j++)
            for (int m = 0; m < alpha[j]; m++)
                v *= (k * lambda[j] - m) / (m + 1);
        return v;
    }

    dense_vector eval_local(const std::array<double, 3>& lambda) const
    {
        dense_vector ret(m_alpha.size());
        for (std::size_t i = 0; i < m_alpha.size(); i++)
            ret(i) = shape(m_alpha[i], m_k, lambda);
        return ret;
    }
};

} // namespace hho
