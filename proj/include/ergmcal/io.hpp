#ifndef ERGMCAL_IO_HPP_
#define ERGMCAL_IO_HPP_

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ergmcal/diagnostics.hpp"

namespace ergmcal {

/// Reads an undirected edge list: two whitespace-separated node indices per
/// line, lines starting with '#' or '%' ignored, extra columns ignored.
/// Indices are shifted by `index_base` (0 or 1). The node count defaults to
/// the largest index seen; duplicate edges collapse, self-loops are rejected.
Graph read_edge_list(std::istream& in, int index_base, std::optional<int> nodes = std::nullopt);
Graph load_edge_list(const std::filesystem::path& path, int index_base, std::optional<int> nodes = std::nullopt);

/// Reads `node,<name>` then one `index,level` row per node and attaches the
/// attribute. Every node must be listed exactly once.
void read_attributes(std::istream& in, Graph& g, int index_base);
void load_attributes(const std::filesystem::path& path, Graph& g, int index_base);

void write_edge_list(std::ostream& out, const Graph& g, int index_base);

/// `iter,theta_1,...,theta_d,log_target`, one row per retained draw, with
/// iter counted from the first post-burn-in iteration (burn_in + 1 onwards).
void write_chain_csv(std::ostream& out, const McmcChain& chain);
void save_chain_csv(const std::filesystem::path& path, const McmcChain& chain);
McmcChain read_chain_csv(std::istream& in);
McmcChain load_chain_csv(const std::filesystem::path& path);

void write_density_csv(std::ostream& out, const DensityGrid& grid);
/// `edges,count`, one row per distinct edge count in ascending order.
void write_edge_histogram_csv(std::ostream& out, const std::vector<std::int64_t>& edge_counts);

/// Named stage durations in seconds.
class StageTimings {
  public:
    void add(const std::string& stage, double seconds) { stages_.emplace_back(stage, seconds); }
    double total() const;
    const std::vector<std::pair<std::string, double>>& stages() const noexcept { return stages_; }
    /// One `stage seconds` line per stage, then `total` as their sum.
    void write(std::ostream& out) const;

  private:
    std::vector<std::pair<std::string, double>> stages_;
};

}  // namespace ergmcal

#endif  // ERGMCAL_IO_HPP_
