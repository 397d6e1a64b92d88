#include <CLI11.hpp>
#include <exception>
#include <iostream>

#include "ergmcal/errors.hpp"
#include "ergmcal/pipeline.hpp"

namespace {

int exit_code(ergmcal::ErrorKind kind) {
    switch (kind) {
        case ergmcal::ErrorKind::Config: return 2;
        case ergmcal::ErrorKind::Data: return 3;
        case ergmcal::ErrorKind::Numerical: return 4;
        case ergmcal::ErrorKind::NonConvergence: return 5;
    }
    return 1;
}

int run(const std::string& config_path, const std::optional<std::uint64_t>& seed, const std::string& out,
        const std::string& mode) {
    ergmcal::RunConfig cfg = ergmcal::load_config(config_path);
    if (seed) cfg.seed = seed;
    if (!out.empty()) cfg.out = out;
    if (!mode.empty()) cfg.mode = ergmcal::parse_mode(mode);
    const auto report = ergmcal::run_pipeline(cfg, std::cerr);
    for (const auto& path : report.artifacts) std::cout << path.string() << '\n';
    return 0;
}

int summarize(const std::string& chain_path) {
    const ergmcal::McmcChain chain = ergmcal::load_chain_csv(chain_path);
    std::vector<std::string> labels;
    for (int k = 1; k <= chain.dim(); ++k) labels.push_back("theta_" + std::to_string(k));
    ergmcal::write_summary(std::cout, ergmcal::summarize(chain, labels), chain_path);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian ERGM inference with calibrated pseudo-posteriors"};
    app.require_subcommand(1);

    std::string config_path, out, mode, chain_path;
    std::optional<std::uint64_t> seed;
    auto* run_cmd = app.add_subcommand("run", "run the pipeline described by a config file");
    run_cmd->add_option("--config", config_path, "INI run configuration")->required();
    run_cmd->add_option("--seed", seed, "override [run] seed");
    run_cmd->add_option("--out", out, "override [run] out");
    run_cmd->add_option("--mode", mode, "pseudo | calibrate | aea | degeneracy-check | oracle-test");

    auto* sum_cmd = app.add_subcommand("summarize", "posterior summary of a chain CSV");
    sum_cmd->add_option("--chain", chain_path, "chain CSV written by run")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*run_cmd) return run(config_path, seed, out, mode);
        return summarize(chain_path);
    } catch (const ergmcal::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
