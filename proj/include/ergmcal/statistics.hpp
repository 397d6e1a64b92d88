#ifndef ERGMCAL_STATISTICS_HPP_
#define ERGMCAL_STATISTICS_HPP_

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "ergmcal/graph.hpp"

namespace ergmcal {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class TermKind { Edges, KStar, Triangles, Gwesp, NodeFactor };

/// One ERGM sufficient statistic.
///
/// NodeFactor is the main-effect form sum_{i<j} y_ij {1(x_i = l) + 1(x_j = l)}
/// for a single level l of a categorical attribute x. Levels are listed
/// explicitly; there is no automatic dummy coding.
struct StatisticTerm {
    TermKind kind = TermKind::Edges;
    int k = 0;            // KStar order
    double decay = 0.0;   // Gwesp decay, fixed
    std::string attribute;
    std::string level;
    std::string label;

    static StatisticTerm edges();
    static StatisticTerm kstar(int k);
    static StatisticTerm triangles();
    static StatisticTerm gwesp(double decay);
    static StatisticTerm node_factor(const std::string& attribute, const std::string& level);

    /// Parses `edges`, `kstar{k=2}`, `triangles`, `gwesp{decay=1.0}`,
    /// `nodefactor{attr=grade,level=7}`.
    static StatisticTerm parse(const std::string& text);
};

/// Ordered list of terms; its size is the parameter dimension d.
class ModelSpec {
  public:
    explicit ModelSpec(std::vector<StatisticTerm> terms);

    /// Comma-separated list of terms, e.g. "edges, gwesp{decay=1}".
    static ModelSpec parse(const std::string& text);

    int dim() const noexcept { return static_cast<int>(terms_.size()); }
    const std::vector<StatisticTerm>& terms() const noexcept { return terms_; }
    std::vector<std::string> labels() const;

    /// Throws ModelDataMismatch when a term references a missing attribute or level.
    void check_against(const Graph& g) const;

  private:
    std::vector<StatisticTerm> terms_;
};

/// A ModelSpec resolved against a graph's attributes, ready for repeated
/// evaluation on graphs with the same node set (e.g. sampler states).
class BoundModel {
  public:
    BoundModel(const ModelSpec& model, const Graph& g);

    int dim() const noexcept { return static_cast<int>(terms_.size()); }
    int num_nodes() const noexcept { return n_; }

    /// s(y^+_ij) - s(y^-_ij) written into out (size dim()). g is not modified.
    void change(const Graph& g, Dyad d, std::span<double> out) const;
    Vector change(const Graph& g, Dyad d) const;

    Vector sufficient(const Graph& g) const;

  private:
    struct Resolved {
        TermKind kind;
        int k;
        double decay;
        double ratio;                    // 1 - exp(-decay)
        std::vector<unsigned char> match;  // NodeFactor indicator per node
    };
    double gwesp_change(const Graph& g, Dyad d, const Resolved& t) const;

    int n_;
    std::vector<Resolved> terms_;
};

/// Weight e^decay {1 - (1 - e^-decay)^k} given to an edge with k shared partners.
double gwesp_weight(double decay, int shared_partners);

Vector sufficient_statistics(const Graph& g, const ModelSpec& m);
Vector change_statistic(const Graph& g, const ModelSpec& m, Dyad d);

/// Change statistics for every dyad in dyad_list order, plus the observed
/// dyad values as a 0/1 response.
struct ChangeStatMatrix {
    RowMatrix rows;
    Vector response;

    std::int64_t num_dyads() const noexcept { return rows.rows(); }
    int dim() const noexcept { return static_cast<int>(rows.cols()); }
};

ChangeStatMatrix change_stat_matrix(const Graph& g, const ModelSpec& m);

}  // namespace ergmcal

#endif  // ERGMCAL_STATISTICS_HPP_
