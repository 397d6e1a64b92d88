#ifndef ERGMCAL_CONFIG_HPP_
#define ERGMCAL_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ergmcal/calibration.hpp"
#include "ergmcal/diagnostics.hpp"

namespace ergmcal {

enum class RunMode { Pseudo, Calibrate, Aea, DegeneracyCheck, OracleTest };

RunMode parse_mode(const std::string& text);
std::string mode_name(RunMode mode);

/// Everything one `ergm-calibrate run` needs. Defaults follow the method's
/// published settings: 40,000 iterations with 10,000 burn-in, N(0, 30 I)
/// prior, N = 400 graphs per Monte Carlo estimate, alpha = 0.001.
struct RunConfig {
    RunMode mode = RunMode::Calibrate;
    std::optional<std::uint64_t> seed;
    std::filesystem::path out = "out";

    // [data]
    std::filesystem::path edges;
    std::filesystem::path attributes;
    int index_base = 1;
    std::optional<int> nodes;

    // [model]
    std::string terms;

    // [prior]
    std::vector<double> prior_mean{0.0};  ///< one value broadcasts to every parameter
    double prior_variance = 30.0;

    // [sampler]
    int iterations = 40000;
    int burn_in = 10000;
    std::vector<double> tuning{1.0};
    std::optional<std::vector<double>> chain_start;  ///< default: pseudo-posterior mode

    // [calibration]
    RobbinsMonroConfig robbins_monro;
    std::optional<std::vector<double>> rm_start;  ///< default: the MPLE
    HessianSampling hessian;  ///< N = 400 draws, thinning grown until ESS >= N / 2
    ModeRefinement refinement;  ///< one Newton step on theta* by default
    std::string calibrated_sampler = "correct";   ///< "correct" or "mh"

    // [aea]
    int aea_iterations = 40000;
    int aea_burn_in = 10000;
    int aux_iters = 10000;
    std::vector<double> aea_tuning{1.0};

    // [degeneracy]
    DegeneracySettings degeneracy;
    std::optional<std::vector<double>> reference_theta;
    int reference_graphs = 20;

    // [oracle]
    std::vector<double> grid_lo{-4.0};
    std::vector<double> grid_hi{4.0};
    std::vector<int> grid_points{201};
    int oracle_random_thetas = 3;
    double oracle_rm_alpha = 6.0;
    int oracle_rm_iters = 2000;
    int oracle_aea_iterations = 6000;
    int oracle_aea_burn_in = 1000;
    int oracle_aux_iters = 5000;
    int oracle_hessian_replicates = 20;
};

/// Parses an INI file (sections [run], [data], [model], [prior], [sampler],
/// [calibration], [aea], [degeneracy], [oracle]). Relative data paths are
/// resolved against the config file's directory. Unknown keys are rejected.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir);

/// Mode-specific checks; throws ConfigError.
void validate(const RunConfig& cfg);

/// Expands a one-element vector to d copies; otherwise requires size d.
Vector broadcast(const std::vector<double>& values, int d, const std::string& what);

}  // namespace ergmcal

#endif  // ERGMCAL_CONFIG_HPP_
