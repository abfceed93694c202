// Batch front-end: one subcommand per pipeline stage.
//
//   henonmf report --config configs/henon_a5.json --out out/henon_a5
//
// Exit codes: 0 success, 2 configuration error, 3 numeric failure.

#include <CLI11.hpp>

#include <cstdio>
#include <functional>
#include <map>

#include "henonmf/henonmf.hpp"

namespace {

constexpr int exit_config = 2;
constexpr int exit_numeric = 3;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multifractal analysis of unstable-manifold slices of planar horseshoes"};
    app.set_version_flag("--version", henonmf::version_string);
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    int threads = 0;
    bool no_cache = false;
    app.add_option("--config", config_path, "JSON run configuration (defaults apply when omitted)");
    app.add_option("--out", out_dir, "output directory (overrides output_dir)");
    app.add_option("--threads", threads, "worker threads for sampling")->check(CLI::PositiveNumber);
    app.add_flag("--no-cache", no_cache, "recompute the orbit ensemble");

    using henonmf::Pipeline;
    const std::map<std::string, std::pair<std::string, void (Pipeline::*)()>> commands{
        {"fixed-points", {"both saddle fixed points", &Pipeline::cmd_fixed_points}},
        {"find-a-star", {"first tangency parameter with its bisection sweep", &Pipeline::cmd_find_a_star}},
        {"orbits", {"periodic-orbit ensemble", &Pipeline::cmd_orbits}},
        {"pressure", {"pressure curve and t^u", &Pipeline::cmd_pressure}},
        {"spectrum", {"Legendre and direct spectrum", &Pipeline::cmd_spectrum}},
        {"levelsets", {"survivor samples and level-set box dimensions", &Pipeline::cmd_levelsets}},
        {"report", {"full pipeline with route comparison", &Pipeline::cmd_report}},
    };
    for (const auto& [name, entry] : commands) app.add_subcommand(name, entry.first)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : exit_config;
    }

    henonmf::RunConfig cfg;
    try {
        if (!config_path.empty()) cfg = henonmf::RunConfig::load(config_path);
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        if (threads > 0) cfg.threads = threads;
        if (no_cache) cfg.cache = false;
        Pipeline pipe(cfg);
        for (const auto& [name, entry] : commands) {
            if (!app.got_subcommand(name)) continue;
            (pipe.*entry.second)();
            std::printf("%s: ok, outputs in %s\n", name.c_str(), pipe.output_dir().c_str());
        }
    } catch (const henonmf::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return exit_config;
    } catch (const henonmf::Error& e) {
        std::fprintf(stderr, "%s error: %s\n", e.kind().c_str(), e.what());
        return exit_numeric;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_numeric;
    }
    return 0;
}
