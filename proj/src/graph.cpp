#include "ergmcal/graph.hpp"

#include <algorithm>
#include <cmath>

#include "ergmcal/errors.hpp"

namespace ergmcal {

Dyad make_dyad(int a, int b) {
    if (a == b) {
        throw StructuralError("self-loop (" + std::to_string(a) + "," + std::to_string(b) + ") is not a dyad");
    }
    return a < b ? Dyad{a, b} : Dyad{b, a};
}

std::optional<int> NodeAttribute::code_of(const std::string& level) const {
    auto it = std::find(levels.begin(), levels.end(), level);
    if (it == levels.end()) return std::nullopt;
    return static_cast<int>(it - levels.begin());
}

Graph::Graph(int n) : n_(n), words_((n + 63) / 64) {
    if (n < 1) throw StructuralError("graph needs at least one node, got " + std::to_string(n));
    bits_.assign(static_cast<std::size_t>(n_) * words_, 0);
    degree_.assign(n_, 0);
    edge_pos_.assign(static_cast<std::size_t>(num_dyads()), -1);
}

double Graph::density() const noexcept {
    const auto d = num_dyads();
    return d == 0 ? 0.0 : static_cast<double>(num_edges()) / static_cast<double>(d);
}

void Graph::check(Dyad d) const {
    if (d.i < 0 || d.j >= n_ || d.i >= d.j) {
        throw StructuralError("dyad (" + std::to_string(d.i) + "," + std::to_string(d.j) +
                              ") is not canonical for a graph with " + std::to_string(n_) + " nodes");
    }
}

void Graph::toggle(Dyad d) {
    check(d);
    toggle_unchecked(d);
}

void Graph::toggle_unchecked(Dyad d) {
    row(d.i)[d.j >> 6] ^= std::uint64_t{1} << (d.j & 63);
    row(d.j)[d.i >> 6] ^= std::uint64_t{1} << (d.i & 63);
    const auto k = dyad_index(d);
    if (edge_pos_[k] < 0) {
        edge_pos_[k] = static_cast<std::int32_t>(edges_.size());
        edges_.push_back(d);
        ++degree_[d.i];
        ++degree_[d.j];
    } else {
        // swap-remove keeps the edge list dense
        const auto pos = edge_pos_[k];
        const Dyad last = edges_.back();
        edges_[pos] = last;
        edge_pos_[dyad_index(last)] = pos;
        edges_.pop_back();
        edge_pos_[k] = -1;
        --degree_[d.i];
        --degree_[d.j];
    }
}

void Graph::set_edge(Dyad d, bool present) {
    check(d);
    if (has_edge(d) != present) toggle_unchecked(d);
}

int Graph::common_neighbors(int i, int j) const noexcept {
    const std::uint64_t* a = row(i);
    const std::uint64_t* b = row(j);
    int c = 0;
    for (int w = 0; w < words_; ++w) c += std::popcount(a[w] & b[w]);
    return c;
}

void Graph::set_attribute(const std::string& name, NodeAttribute attr) {
    if (static_cast<int>(attr.codes.size()) != n_) {
        throw DataError("attribute '" + name + "' has " + std::to_string(attr.codes.size()) +
                        " values for a graph with " + std::to_string(n_) + " nodes");
    }
    for (int c : attr.codes) {
        if (c < 0 || c >= static_cast<int>(attr.levels.size())) {
            throw DataError("attribute '" + name + "' has a code outside its level dictionary");
        }
    }
    attributes_[name] = std::move(attr);
}

const NodeAttribute& Graph::attribute(const std::string& name) const {
    auto it = attributes_.find(name);
    if (it == attributes_.end()) throw ModelDataMismatch("graph has no attribute '" + name + "'");
    return it->second;
}

bool Graph::same_as(const Graph& other) const {
    if (n_ != other.n_ || bits_ != other.bits_) return false;
    if (attributes_.size() != other.attributes_.size()) return false;
    for (const auto& [name, a] : attributes_) {
        auto it = other.attributes_.find(name);
        if (it == other.attributes_.end()) return false;
        if (a.codes != it->second.codes || a.levels != it->second.levels) return false;
    }
    return true;
}

Graph Graph::empty_like() const {
    Graph g(n_);
    g.attributes_ = attributes_;
    return g;
}

std::vector<Dyad> dyad_list(int n) {
    std::vector<Dyad> out;
    if (n < 2) return out;
    out.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) out.push_back({i, j});
    }
    return out;
}

Dyad dyad_at(int n, std::int64_t index) {
    // row i starts at i*n - i(i+1)/2; solve the quadratic then fix rounding
    const double nn = n;
    auto i = static_cast<std::int64_t>(std::floor(((2 * nn - 1) - std::sqrt((2 * nn - 1) * (2 * nn - 1) - 8.0 * index)) / 2));
    auto start = [n](std::int64_t r) { return r * n - r * (r + 1) / 2; };
    while (i > 0 && start(i) > index) --i;
    while (start(i + 1) <= index) ++i;
    const auto j = index - start(i) + i + 1;
    return {static_cast<int>(i), static_cast<int>(j)};
}

}  // namespace ergmcal
