#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"

using namespace hho;

namespace {

const double pi = std::numbers::pi;

double sine(const point& x) { return std::sin(pi * x.x()) * std::sin(pi * x.y()); }

} // namespace

TEST(system, classical_rhs)
{
    auto      msh = build_unit_square(3);
    hho_space s0(msh, 0);

    load_functional zero{[](const point&) { return 0.0; }, {}};
    EXPECT_EQ(rhs_classical(s0, zero).norm(), 0.0);

    load_functional one{[](const point&) { return 1.0; }, {}};
    auto            r1 = rhs_classical(s0, one);
    for (std::size_t c = 0; c < msh.n_cells(); c++)
        EXPECT_NEAR(r1(c), msh.cell_area[c], 1e-15);
    EXPECT_EQ(r1.tail(s0.n_face_dofs()).norm(), 0.0);

    // a quartic load is integrated exactly at the default degree
    hho_space       s2(msh, 2);
    auto            quartic = [](const point& x) { return x.x() * x.x() * x.y() * (1 - x.y()) + x.x() * x.y(); };
    load_functional sq{quartic, {}};
    load_functional sl{sine, {}};
    auto            rq = rhs_classical(s2, sq);
    s2.set_quad_extra(20);
    auto rs = rhs_classical(s2, sl);
    for (std::size_t c = 0; c < msh.n_cells(); c++) {
        cell_basis cb(msh, c, 2);
        for (std::size_t i = 0; i < cb.size(); i++) {
            double ref = integrate_cell(msh, c, 30, [&](const point& x) { return sine(x) * cb.eval(x)(i); });
            EXPECT_NEAR(rs(c * cb.size() + i), ref, 1e-13);
            ref = integrate_cell(msh, c, 30, [&](const point& x) { return quartic(x) * cb.eval(x)(i); });
            EXPECT_NEAR(rq(c * cb.size() + i), ref, 1e-15);
        }
    }

    load_functional div{{}, [](const point& x) { return vector2(x.y(), 0.0); }};
    EXPECT_THROW(rhs_classical(s0, div), method_inapplicable);
    load_functional both{sine, [](const point&) { return vector2(1.0, 0.0); }};
    EXPECT_THROW(rhs_classical(s0, both), method_inapplicable);
    EXPECT_EQ(both.kind(), load_kind::composite);
    EXPECT_THROW(load_functional{}.kind(), error);
}

TEST(system, smoothed_rhs_of_zero_load)
{
    auto              msh = build_unit_square(2);
    hho_space         sp(msh, 1);
    smoother_operator sm(sp);
    load_functional   zero{[](const point&) { return 0.0; }, [](const point&) { return vector2::Zero().eval(); }};
    EXPECT_EQ(rhs_smoothed(sm, zero).norm(), 0.0);
}

TEST(system, condensed_matrix_is_spd)
{
    for (int p = 0; p <= 2; p++) {
        hho_space        sp(build_unit_square(3), p);
        condensed_system sys(sp);
        dense_matrix     K(sys.face_matrix());
        EXPECT_LT((K - K.transpose()).norm(), 1e-13 * K.norm());
        Eigen::SelfAdjointEigenSolver<dense_matrix> es(K);
        EXPECT_GT(es.eigenvalues()(0), 0.0);
    }
    hho_space    tiny(build_unit_square(1), 0);
    dense_matrix B(global_matrix(tiny));
    EXPECT_EQ((B - B.transpose()).norm(), 0.0);
    Eigen::SelfAdjointEigenSolver<dense_matrix> es(B);
    EXPECT_GT(es.eigenvalues()(0), 0.0);
}

TEST(system, condensation_is_exact)
{
    load_functional load{[](const point& x) { return 2 * pi * pi * sine(x); }, {}};
    for (int p = 0; p <= 3; p++) {
        hho_space sp(build_unit_square(4), p);
        auto      rhs = rhs_classical(sp, load);
        auto      uc  = assemble(sp).solve(rhs);
        auto      uf  = solve_uncondensed(sp, rhs);
        EXPECT_LT((uc.values - uf.values).lpNorm<Eigen::Infinity>(), 1e-10) << p;

        solver_options cg;
        cg.kind = solver_options::method::cg;
        auto ucg = condensed_system(sp, cg).solve(rhs);
        EXPECT_LT((ucg.values - uf.values).lpNorm<Eigen::Infinity>(), 1e-9) << p;
    }
}

TEST(system, zero_rhs_and_residual)
{
    hho_space sp(build_unit_square(16), 1);
    auto      sys = assemble(sp);
    auto      z   = sys.solve(dense_vector::Zero(sp.n_dofs()));
    EXPECT_EQ(z.values.norm(), 0.0);

    auto rhs = rhs_classical(sp, smooth_sine_case().load);
    auto U   = solve(sys, rhs);
    EXPECT_LT((global_matrix(sp) * U.values - rhs).lpNorm<Eigen::Infinity>(), 1e-10);
    EXPECT_THROW(sys.solve(dense_vector::Zero(3)), error);
}

TEST(system, discrete_consistency)
{
    for (int p = 0; p <= 2; p++) {
        auto mc = poly_consistency_case(p);
        for (std::size_t n : {2, 4, 6}) {
            hho_space sp(mc.mesh(n), p);
            auto      Iu = interpolate(sp, mc.u, 2 * p + 6);
            for (auto kind : {averaging_kind::mean, averaging_kind::scott_zhang}) {
                smoother_operator sm(sp, kind);
                auto              rhs = rhs_smoothed(sm, mc.load);
                // the smoothed load equals b_H(I u, .) exactly
                EXPECT_LT((rhs - global_matrix(sp) * Iu.values).lpNorm<Eigen::Infinity>(), 1e-11);
                auto U = assemble(sp).solve(rhs);
                EXPECT_LT((U.values - Iu.values).lpNorm<Eigen::Infinity>(), 1e-9) << p << " " << n;
            }
        }
    }
}

TEST(system, energy_is_bounded_across_refinements)
{
    auto   mc    = smooth_sine_case();
    double exact = pi / std::sqrt(2.0);  // ||grad u|| on the unit square
    for (int p = 0; p <= 1; p++) {
        for (std::size_t n : {4, 8, 16}) {
            hho_space         sp(mc.mesh(n), p);
            smoother_operator sm(sp);
            auto              U = assemble(sp).solve(rhs_smoothed(sm, mc.load));
            const double      e = std::sqrt(bilinear_b(sp, U, U));
            EXPECT_NEAR(e / exact, 1.0, 0.1) << p << " " << n;
        }
    }
}
