#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "hho/cli.hpp"

int
main(int argc, char** argv)
{
    CLI::App app{"Hybrid high-order Poisson solver: verification, convergence studies and single solves"};
    app.require_subcommand(1);

    std::string config, out = ".";
    int         threads = 0;
    for (const char* name : {"verify", "converge", "solve"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config, "JSON run configuration")->required();
        sub->add_option("--threads", threads, "cap on worker threads (0: hardware)")->check(CLI::NonNegativeNumber);
        sub->add_option("--out", out, "output directory");
    }
    app.get_subcommand("verify")->description("run the structural identity checks");
    app.get_subcommand("converge")->description("run a convergence study on unit-square refinements");
    app.get_subcommand("solve")->description("solve once and dump the reconstruction on a lattice");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        if (threads > 0)
            hho::set_num_threads(unsigned(threads));
        const hho::run_config cfg = hho::load_config(config, command);
        std::filesystem::create_directories(out);
        if (command == "verify")
            return hho::run_verify(cfg, out, std::cout);
        if (command == "converge")
            return hho::run_converge(cfg, out, std::cout);
        return hho::run_solve(cfg, out, std::cout);
    } catch (const hho::config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const hho::method_inapplicable& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
