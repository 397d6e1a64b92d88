#ifndef ERGMCAL_PIPELINE_HPP_
#define ERGMCAL_PIPELINE_HPP_

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ergmcal/config.hpp"
#include "ergmcal/io.hpp"

namespace ergmcal {

struct OracleCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct PipelineReport {
    RunMode mode = RunMode::Calibrate;
    std::vector<std::string> labels;
    Vector theta_mple;
    Vector theta_pl;
    std::optional<McmcChain> raw;
    std::optional<McmcChain> calibrated;
    std::optional<McmcChain> aea;
    std::optional<RobbinsMonroResult> robbins_monro;
    std::optional<CalibrationMap> map;
    std::optional<RefinedMode> refined;  ///< theta* after Newton polish, with its H* sample
    std::optional<DegeneracyReport> degeneracy;
    std::optional<double> reference_mean_edges;
    std::vector<OracleCheck> oracle_checks;
    StageTimings timings;
    std::vector<std::string> warnings;
    std::vector<std::filesystem::path> artifacts;
};

/// Loads the graph (and attributes) named in the config.
Graph load_graph(const RunConfig& cfg);

/// Runs one mode end to end and writes its artifacts into cfg.out. Progress
/// and warnings go to `log`. Stage failures are rethrown with the stage name
/// prefixed to the message; a failed oracle comparison throws VerificationError.
PipelineReport run_pipeline(const RunConfig& cfg, std::ostream& log);

/// Seed of a pipeline stage, derived from the run seed.
std::uint64_t stage_seed(std::uint64_t seed, std::uint64_t stage);

}  // namespace ergmcal

#endif  // ERGMCAL_PIPELINE_HPP_
