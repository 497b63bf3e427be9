#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"

using namespace hho;

TEST(quadrature, triangle_monomials_exact)
{
    auto ref = oracle::reference_triangle();
    for (int k = 0; k <= 20; k++) {
        for (int a = 0; a <= k; a++) {
            const int    b     = k - a;
            const double exact = oracle::reference_monomial(a, b);
            const double q     = integrate_cell(ref, 0, k, [&](const point& x) {
                return std::pow(x.x(), a) * std::pow(x.y(), b);
            });
            EXPECT_NEAR(q, exact, 1e-14 * exact) << a << " " << b;
        }
    }
}

TEST(quadrature, reference_value_x2y3)
{
    auto         ref = oracle::reference_triangle();
    const double q   = integrate_cell(ref, 0, 5, [](const point& x) { return x.x() * x.x() * std::pow(x.y(), 3); });
    EXPECT_NEAR(q, oracle::reference_monomial(2, 3), 1e-16);
    EXPECT_NEAR(q, 1.0 / 420.0, 1e-16);
}

TEST(quadrature, barycentric_linear)
{
    auto         tri = oracle::single_triangle({0.1, 0.2}, {1.3, -0.4}, {0.7, 0.9});
    const auto&  qr  = quad_for_degree(2, 1);
    double       s   = 0.0;
    for (std::size_t i = 0; i < qr.size(); i++)
        s += qr.weights[i] * qr.points[i][1];
    EXPECT_NEAR(s * tri.cell_area[0], tri.cell_area[0] / 3, 1e-16);
}

TEST(quadrature, edge_gauss_exactness)
{
    for (int k = 0; k <= 39; k++) {
        const auto& qr = quad_for_degree(1, k);
        EXPECT_EQ(qr.size(), std::size_t(k / 2 + 1));
        double s = 0.0;
        for (std::size_t i = 0; i < qr.size(); i++) {
            EXPECT_GT(qr.weights[i], 0.0);
            s += qr.weights[i] * std::pow(qr.points[i][1], k);
        }
        EXPECT_NEAR(s, 1.0 / (k + 1), 1e-14) << k;
    }
}

TEST(quadrature, positive_weights_and_limits)
{
    for (int k = 0; k <= max_quadrature_degree; k++) {
        const auto& qr = quad_for_degree(2, k);
        double      s  = 0.0;
        for (double w : qr.weights) {
            EXPECT_GT(w, 0.0);
            s += w;
        }
        EXPECT_NEAR(s, 1.0, 1e-14);
    }
    EXPECT_THROW(quad_for_degree(2, max_quadrature_degree + 1), unsupported_degree);
    EXPECT_THROW(quad_for_degree(3, 2), unsupported_dimension);
    EXPECT_GE(max_quadrature_degree, 2 * max_degree + 2 + 4);
}

TEST(basis, ordering_and_constant)
{
    auto       msh = oracle::reference_triangle();
    cell_basis cb(msh, 0, 3);
    EXPECT_EQ(cb.size(), 10u);
    EXPECT_EQ(cb.powers(0), (std::array<int, 2>{0, 0}));
    EXPECT_EQ(cb.powers(1), (std::array<int, 2>{1, 0}));
    EXPECT_EQ(cb.powers(2), (std::array<int, 2>{0, 1}));
    EXPECT_EQ(cb.powers(3), (std::array<int, 2>{2, 0}));
    const point x(0.3, 0.1);
    EXPECT_EQ(cb.eval(x)(0), 1.0);
    cell_basis low(msh, 0, 1);
    EXPECT_TRUE(cb.eval(x).head(3).isApprox(low.eval(x)));

    const double h = 1e-6;
    for (std::size_t i = 0; i < cb.size(); i++) {
        const double gx = (cb.eval(x + point(h, 0))(i) - cb.eval(x - point(h, 0))(i)) / (2 * h);
        const double gy = (cb.eval(x + point(0, h))(i) - cb.eval(x - point(0, h))(i)) / (2 * h);
        EXPECT_NEAR(cb.grad(x)(i, 0), gx, 1e-7);
        EXPECT_NEAR(cb.grad(x)(i, 1), gy, 1e-7);
    }
}

TEST(basis, mass_matrix_properties)
{
    auto tri = oracle::single_triangle({0.1, 0.2}, {1.3, -0.4}, {0.7, 0.9});
    cell_basis c0(tri, 0, 0);
    auto       M0 = mass_matrix(tri, 0, c0);
    EXPECT_NEAR(M0(0, 0), tri.cell_area[0], 1e-15);

    for (int q = 1; q <= 4; q++) {
        cell_basis cb(tri, 0, q);
        auto       M = mass_matrix(tri, 0, cb);
        EXPECT_EQ((M - M.transpose()).norm(), 0.0);
        Eigen::SelfAdjointEigenSolver<dense_matrix> es(M);
        EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);

        face_basis fb(tri, 0, q);
        auto       Mf = mass_matrix(tri, 0, fb);
        Eigen::SelfAdjointEigenSolver<dense_matrix> ef(Mf);
        EXPECT_GT(ef.eigenvalues().minCoeff(), 0.0);
        EXPECT_NEAR(Mf(0, 0), tri.h_face[0], 1e-15);
    }
}

TEST(basis, stiffness_matrix_p1_reference)
{
    auto       ref = oracle::reference_triangle();
    cell_basis cb(ref, 0, 1);
    auto       K = stiffness_matrix(ref, 0, cb);
    // basis (1, (x - 1/3)/h, (y - 1/3)/h) with h = sqrt(2), area 1/2
    const double h = std::sqrt(2.0);
    dense_matrix expected(3, 3);
    expected << 0, 0, 0, 0, 0.5 / (h * h), 0, 0, 0, 0.5 / (h * h);
    EXPECT_LT((K - expected).norm(), 1e-15);

    cell_basis                                  c3(ref, 0, 3);
    auto                                        K3 = stiffness_matrix(ref, 0, c3);
    Eigen::SelfAdjointEigenSolver<dense_matrix> es(K3);
    EXPECT_NEAR(es.eigenvalues()(0), 0.0, 1e-14);
    EXPECT_GT(es.eigenvalues()(1), 1e-6);
    EXPECT_EQ(K3.row(0).norm(), 0.0);
}

TEST(basis, gram_condition_independent_of_h)
{
    auto msh = build_unit_square(1);
    std::vector<double> conds;
    for (int l = 0; l < 3; l++) {
        cell_basis cb(msh, 0, 3);
        auto       M = mass_matrix(msh, 0, cb);
        Eigen::SelfAdjointEigenSolver<dense_matrix> es(M);
        conds.push_back(es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff());
        msh = refine_red(msh);
    }
    EXPECT_NEAR(conds[1] / conds[0], 1.0, 0.01);
    EXPECT_NEAR(conds[2] / conds[0], 1.0, 0.01);
}
