#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "hho/report.hpp"
#include "oracles.hpp"

using namespace hho;

TEST(analysis, eoc_arithmetic)
{
    EXPECT_DOUBLE_EQ(eoc(1.0, 0.25, 1.0, 0.5), 2.0);
    EXPECT_DOUBLE_EQ(eoc(1.0, 0.125, 0.5, 0.25), 3.0);
}

TEST(analysis, builtin_cases_are_consistent)
{
    for (int p = 0; p <= 2; p++) {
        auto cases = builtin_cases(p);
        ASSERT_EQ(cases.size(), 3u);
        for (const auto& mc : cases)
            EXPECT_LT(validate_case(mc), 1e-5) << mc.name;
        EXPECT_EQ(cases[0].load.kind(), load_kind::l2_density);
        EXPECT_EQ(cases[1].load.kind(), load_kind::divergence_form);
        EXPECT_EQ(cases[2].load.kind(), load_kind::divergence_form);
    }
    EXPECT_THROW(kink_aligned_case().mesh(3), invalid_mesh);
    EXPECT_THROW(find_case("corner", 1), error);

    // the hat profile is the P1 nodal basis function of the centre vertex
    for (double x : {0.1, 0.3, 0.55, 0.8})
        for (double y : {0.05, 0.45, 0.7})
            EXPECT_DOUBLE_EQ(poly_consistency_case(0).u({x, y}), oracle::centre_hat({x, y}));
}

TEST(analysis, errors_vanish_for_consistent_polynomials)
{
    for (int p = 0; p <= 2; p++) {
        auto      mc = poly_consistency_case(p);
        hho_space sp(mc.mesh(4), p);
        auto      U  = solve_case(sp, mc, method_kind::smoothed, averaging_kind::mean);
        auto [eh, es] = error_h1_broken(sp, mc.grad_u, U);
        EXPECT_LT(eh, 1e-9);
        EXPECT_LT(es, 1e-9);
        EXPECT_LT(error_l2(sp, mc.u, U), 1e-9);
        EXPECT_LT(supercloseness(sp, mc.u, U), 1e-9);
        EXPECT_LT(best_error_h1(sp, mc.u, mc.grad_u), 1e-9);
    }
}

TEST(analysis, error_against_quadrature_oracle)
{
    auto                                   msh = build_unit_square(2);
    hho_space                              sp(msh, 1);
    std::mt19937_64                        gen(4);
    std::uniform_real_distribution<double> dist(-1, 1);
    hho_field                              U = sp.zero_field();
    for (Eigen::Index i = 0; i < U.values.size(); i++)
        U.values(i) = dist(gen);
    auto   mc = smooth_sine_case();
    auto   RU = reconstruct(sp, U);
    double e2 = 0.0, l2 = 0.0;
    for (std::size_t c = 0; c < msh.n_cells(); c++) {
        e2 += integrate_cell(msh, c, 30, [&](const point& x) { return (mc.grad_u(x) - gradient(msh, RU, c, x)).squaredNorm(); });
        l2 += integrate_cell(msh, c, 30, [&](const point& x) { return std::pow(mc.u(x) - evaluate(msh, RU, c, x), 2); });
    }
    EXPECT_NEAR(error_h1_broken(sp, mc.grad_u, U).first, std::sqrt(e2), 1e-6 * std::sqrt(e2));
    EXPECT_NEAR(error_l2(sp, mc.u, U), std::sqrt(l2), 1e-6 * std::sqrt(l2));
}

TEST(analysis, interpolation_error_is_bounded_by_best_error)
{
    auto                mc = smooth_sine_case();
    std::vector<double> c;
    for (int l = 0; l < 4; l++) {
        hho_space sp(mc.mesh(std::size_t(2) << l), 1);
        auto      Iu     = interpolate(sp, mc.u, 20);
        auto [eh, es]    = error_h1_broken(sp, mc.grad_u, Iu);
        const double best = best_error_h1(sp, mc.u, mc.grad_u);
        c.push_back(std::sqrt(eh * eh + es * es) / best);
    }
    for (double v : c) {
        EXPECT_GE(v, 1.0 - 1e-9);
        EXPECT_LT(v / c[0], 1.5);
    }
}

TEST(analysis, convergence_on_smooth_case)
{
    convergence_options opt;
    opt.levels = {4, 8, 16};
    auto rep   = run_convergence(smooth_sine_case(), 1, opt);
    ASSERT_EQ(rep.rows.size(), 3u);
    EXPECT_FALSE(rep.rows[0].eoc_h1.has_value());
    EXPECT_NEAR(*rep.rows[2].eoc_energy, 2.0, 0.15);
    EXPECT_NEAR(*rep.rows[2].eoc_l2, 3.0, 0.3);
    for (const auto& r : rep.rows)
        EXPECT_GE(r.ratio, 1.0 - 1e-9);
    EXPECT_GE(*rep.rows[2].eoc_super - *rep.rows[2].eoc_energy, 0.8);
}

TEST(analysis, classical_method_refuses_divergence_loads)
{
    convergence_options opt;
    opt.method = method_kind::classical;
    opt.levels = {2, 4};
    EXPECT_THROW(run_convergence(kink_aligned_case(), 0, opt), method_inapplicable);
}

TEST(analysis, report_formats)
{
    convergence_options opt;
    opt.levels = {2, 4};
    auto rep   = run_convergence(smooth_sine_case(), 0, opt);

    std::ostringstream csv;
    write_csv(csv, rep);
    std::istringstream in(csv.str());
    std::string        line;
    std::getline(in, line);
    EXPECT_EQ(line, "level,h,e_H1,e_stab,e_L2,e_super,best_H1,ratio,eoc_H1,eoc_L2");
    std::getline(in, line);
    EXPECT_EQ(line.substr(0, 21), "0,0.70710678118654757");
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 9);
    EXPECT_EQ(line.back(), ',');

    auto j = to_json(rep);
    EXPECT_EQ(j["case"], "smooth-sine");
    EXPECT_EQ(j["levels"].size(), 2u);
    EXPECT_TRUE(j["levels"][0]["eoc_H1"].is_null());
    EXPECT_DOUBLE_EQ(j["levels"][1]["eoc_H1"].get<double>(), *rep.rows[1].eoc_h1);

    std::ostringstream gp;
    write_gnuplot(gp, rep, "e_L2");
    EXPECT_NE(gp.str().find("0.35355339059327379 "), std::string::npos);
    EXPECT_THROW(write_gnuplot(gp, rep, "bogus"), error);
    EXPECT_EQ(format_number(0.1), "0.10000000000000001");
}

TEST(analysis, stability_constant_lanczos_matches_dense)
{
    for (int p = 0; p <= 2; p++) {
        hho_space         sp(build_unit_square(4), p);
        smoother_operator sm(sp);
        const double      cl = smoother_stability_constant(sm);
        const double      cd = smoother_stability_constant(sm, true);
        EXPECT_NEAR(cl, cd, 1e-6 * cd) << p;
        EXPECT_GT(cd, 0.0);
    }
}
