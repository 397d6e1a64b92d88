#ifndef ERGMCAL_GRAPH_HPP_
#define ERGMCAL_GRAPH_HPP_

#include <bit>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ergmcal {

/// Unordered node pair in canonical form (i < j).
struct Dyad {
    int i = 0;
    int j = 0;

    friend bool operator==(const Dyad&, const Dyad&) = default;
};

/// Builds the canonical dyad for two distinct nodes in either order.
Dyad make_dyad(int a, int b);

/// Categorical node attribute: one small integer code per node plus the
/// dictionary mapping codes back to level labels.
struct NodeAttribute {
    std::vector<int> codes;
    std::vector<std::string> levels;

    /// Code of a level label, or nullopt when the label never occurs.
    std::optional<int> code_of(const std::string& level) const;
};

/// Undirected simple graph on nodes 0..n-1.
///
/// Adjacency is held as one bit row per node so that dyad queries, toggles
/// and common-neighbour counts are word operations. An unordered edge list
/// with a dyad -> position index is maintained alongside so that a uniformly
/// random edge can be drawn in O(1).
class Graph {
  public:
    explicit Graph(int n);

    int num_nodes() const noexcept { return n_; }
    std::int64_t num_dyads() const noexcept { return static_cast<std::int64_t>(n_) * (n_ - 1) / 2; }
    std::int64_t num_edges() const noexcept { return static_cast<std::int64_t>(edges_.size()); }
    double density() const noexcept;

    bool has_edge(int i, int j) const noexcept {
        return (row(i)[j >> 6] >> (j & 63)) & 1U;
    }
    bool has_edge(Dyad d) const noexcept { return has_edge(d.i, d.j); }

    /// Flips y_ij. Throws StructuralError for out-of-range or non-canonical dyads.
    void toggle(Dyad d);
    /// Same as toggle() without the range checks; for sampler inner loops.
    void toggle_unchecked(Dyad d);
    void set_edge(Dyad d, bool present);

    int degree(int v) const noexcept { return degree_[v]; }
    const std::vector<int>& degrees() const noexcept { return degree_; }

    int common_neighbors(int i, int j) const noexcept;

    template <class F>
    void for_each_neighbor(int v, F&& f) const {
        const std::uint64_t* r = row(v);
        for (int w = 0; w < words_; ++w) {
            for (std::uint64_t bits = r[w]; bits != 0; bits &= bits - 1) {
                f(w * 64 + std::countr_zero(bits));
            }
        }
    }

    template <class F>
    void for_each_common_neighbor(int i, int j, F&& f) const {
        const std::uint64_t* a = row(i);
        const std::uint64_t* b = row(j);
        for (int w = 0; w < words_; ++w) {
            for (std::uint64_t bits = a[w] & b[w]; bits != 0; bits &= bits - 1) {
                f(w * 64 + std::countr_zero(bits));
            }
        }
    }

    /// Current edges in unspecified order (changes as edges are toggled).
    const std::vector<Dyad>& edges() const noexcept { return edges_; }

    /// Row-major position of a canonical dyad in dyad_list().
    std::int64_t dyad_index(Dyad d) const noexcept {
        return static_cast<std::int64_t>(d.i) * n_ - static_cast<std::int64_t>(d.i) * (d.i + 1) / 2 +
               (d.j - d.i - 1);
    }

    void set_attribute(const std::string& name, NodeAttribute attr);
    bool has_attribute(const std::string& name) const { return attributes_.count(name) != 0; }
    const NodeAttribute& attribute(const std::string& name) const;
    const std::map<std::string, NodeAttribute>& attributes() const noexcept { return attributes_; }

    /// Same node count, adjacency and attributes (edge-list order ignored).
    bool same_as(const Graph& other) const;

    /// Empty graph with the same node count and attributes.
    Graph empty_like() const;

  private:
    const std::uint64_t* row(int v) const noexcept { return bits_.data() + static_cast<std::size_t>(v) * words_; }
    std::uint64_t* row(int v) noexcept { return bits_.data() + static_cast<std::size_t>(v) * words_; }
    void check(Dyad d) const;

    int n_;
    int words_;
    std::vector<std::uint64_t> bits_;
    std::vector<int> degree_;
    std::vector<Dyad> edges_;
    std::vector<std::int32_t> edge_pos_;
    std::map<std::string, NodeAttribute> attributes_;
};

/// All n(n-1)/2 canonical dyads, i ascending then j ascending.
std::vector<Dyad> dyad_list(int n);
inline std::vector<Dyad> dyad_list(const Graph& g) { return dyad_list(g.num_nodes()); }

/// Inverse of Graph::dyad_index.
Dyad dyad_at(int n, std::int64_t index);

}  // namespace ergmcal

#endif  // ERGMCAL_GRAPH_HPP_
