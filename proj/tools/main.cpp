#include "bosejj/runner.hpp"

#include "CLI11.hpp"

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw bosejj::ConfigError({"cannot read config file: " + path});
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Steady-state spectra, currents and quench dynamics of one bosonic "
                 "mode coupled to N reservoirs"};
    app.fallthrough();
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    std::string format = "csv";
    std::uint64_t seed = 0;
    int threads = 0;
    app.add_option("--config", config_path, "JSON run configuration")->required();
    app.add_option("--out", out_dir, "output directory (default .)");
    app.add_option("--format", format, "report format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    auto* seed_opt = app.add_option("--seed", seed, "override numerics.seed");
    auto* threads_opt = app.add_option("--threads", threads, "override numerics.threads");

    app.add_subcommand("density", "tabulate reservoir spectral densities");
    app.add_subcommand("eta", "tabulate the boundary self-energy and eta(0)");
    app.add_subcommand("check", "evaluate the spectral conditions");
    app.add_subcommand("currents", "steady-state particle/energy/Josephson currents");
    app.add_subcommand("epr", "entropy production rate and positivity verdict");
    app.add_subcommand("evolve", "finite-mode quench dynamics vs boundary-value series");
    app.add_subcommand("graph-check", "adapted/admissible/positive-weight verdicts");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 3;
    }

    try {
        bosejj::RunConfig cfg = bosejj::parse_config(read_file(config_path));
        if (*seed_opt) bosejj::apply_seed_override(cfg, seed);
        if (*threads_opt) bosejj::apply_threads_override(cfg, threads);
        for (const std::string& w : cfg.warnings) std::cerr << "warning: " << w << '\n';

        const std::string name = app.get_subcommands().front()->get_name();
        const bosejj::RunResult res = bosejj::run_subcommand(name, cfg, out_dir, format);
        if (!res.message.empty())
            (res.exit_code == 0 ? std::cout : std::cerr) << res.message << '\n';
        for (const std::string& a : res.artifacts) std::cout << out_dir << '/' << a << '\n';
        return res.exit_code;
    } catch (const bosejj::ConfigError& e) {
        std::cerr << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return 4;
    }
}
