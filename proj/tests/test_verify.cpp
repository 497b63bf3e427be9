#include <gtest/gtest.h>

#include <iostream>

#include "hho/verify.hpp"

using namespace hho;

TEST(verify, default_suite_passes)
{
    verify_options opt;
    for (std::size_t n : {2, 4, 8})
        opt.meshes.push_back({"square-" + std::to_string(n), build_unit_square(n)});
    opt.n_fields = 20;
    auto rep     = run_verify_suite(opt);
    for (const auto& c : rep.checks) {
        EXPECT_TRUE(c.passed) << c.name << " " << c.mesh << " p=" << c.degree << " " << c.averaging << ": "
                              << c.residual << " vs " << c.tolerance;
        if (std::getenv("HHO_VERBOSE"))
            std::cout << c.name << " " << c.mesh << " " << c.degree << " " << c.averaging << " " << c.residual << "\n";
    }
    EXPECT_EQ(rep.n_failed(), 0u);
}

TEST(verify, seeded_runs_are_reproducible)
{
    verify_options opt;
    opt.meshes   = {{"square-2", build_unit_square(2)}};
    opt.degrees  = {1};
    opt.n_fields = 5;
    auto a = run_verify_suite(opt), b = run_verify_suite(opt);
    ASSERT_EQ(a.checks.size(), b.checks.size());
    for (std::size_t i = 0; i < a.checks.size(); i++)
        EXPECT_EQ(a.checks[i].residual, b.checks[i].residual) << a.checks[i].name;
}

TEST(verify, non_matching_mesh_fails_the_mesh_check)
{
    verify_options opt;
    opt.meshes = {{"t-junction", read_mesh_file(HHO_TEST_DATA "/t_junction.mesh")}};
    auto rep   = run_verify_suite(opt);
    ASSERT_FALSE(rep.checks.empty());
    EXPECT_EQ(rep.checks[0].name, "mesh_invariants");
    EXPECT_FALSE(rep.checks[0].passed);
    EXPECT_FALSE(rep.passed());
}
