#include "ergmcal/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "ergmcal/errors.hpp"

namespace ergmcal {

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    return in;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool skip_line(const std::string& line) {
    const std::string t = trim(line);
    return t.empty() || t[0] == '#' || t[0] == '%';
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    return out;
}

long long parse_index(const std::string& s, const std::string& where) {
    long long v = 0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end) throw DataError(where + ": '" + s + "' is not an integer node index");
    return v;
}

// Shortest text that reads back to the same double.
std::string format_double(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

}  // namespace

Graph read_edge_list(std::istream& in, int index_base, std::optional<int> nodes) {
    if (index_base != 0 && index_base != 1) throw ConfigError("index base must be 0 or 1");
    std::vector<std::pair<int, int>> pairs;
    long long max_index = -1;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (skip_line(line)) continue;
        std::istringstream row(line);
        std::string a, b;
        const std::string where = "edge list line " + std::to_string(line_no);
        if (!(row >> a >> b)) throw DataError(where + ": expected two node indices");
        const long long u = parse_index(a, where) - index_base;
        const long long v = parse_index(b, where) - index_base;
        if (u < 0 || v < 0 || u > std::numeric_limits<int>::max() || v > std::numeric_limits<int>::max()) {
            throw StructuralError(where + ": node index out of range for index base " + std::to_string(index_base));
        }
        if (u == v) throw StructuralError(where + ": self-loop on node " + a);
        pairs.emplace_back(static_cast<int>(u), static_cast<int>(v));
        max_index = std::max({max_index, u, v});
    }
    const int n = nodes ? *nodes : static_cast<int>(max_index + 1);
    if (n < 2) throw DataError("edge list describes fewer than two nodes");
    if (max_index >= n) {
        throw StructuralError("edge list references node " + std::to_string(max_index + index_base) + " but only " +
                              std::to_string(n) + " nodes were declared");
    }
    Graph g(n);
    for (const auto& [u, v] : pairs) g.set_edge(make_dyad(u, v), true);
    return g;
}

Graph load_edge_list(const std::filesystem::path& path, int index_base, std::optional<int> nodes) {
    auto in = open_input(path);
    return read_edge_list(in, index_base, nodes);
}

void read_attributes(std::istream& in, Graph& g, int index_base) {
    std::string line;
    while (std::getline(in, line) && skip_line(line)) {
    }
    const auto header = split_csv(line);
    if (header.size() != 2 || header[0] != "node" || header[1].empty()) {
        throw DataError("attribute file must start with a 'node,<name>' header");
    }
    const int n = g.num_nodes();
    std::vector<std::string> values(static_cast<std::size_t>(n));
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (skip_line(line)) continue;
        const auto cells = split_csv(line);
        const std::string where = "attribute file line " + std::to_string(line_no);
        if (cells.size() != 2 || cells[1].empty()) throw DataError(where + ": expected 'index,level'");
        const long long v = parse_index(cells[0], where) - index_base;
        if (v < 0 || v >= n) throw StructuralError(where + ": node index out of range");
        if (seen[static_cast<std::size_t>(v)]) throw DataError(where + ": node listed twice");
        seen[static_cast<std::size_t>(v)] = true;
        values[static_cast<std::size_t>(v)] = cells[1];
    }
    for (int v = 0; v < n; ++v) {
        if (!seen[static_cast<std::size_t>(v)]) {
            throw DataError("attribute '" + header[1] + "' has no value for node " + std::to_string(v + index_base));
        }
    }
    // levels sorted so the coding does not depend on file order
    std::vector<std::string> levels = values;
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    NodeAttribute attr;
    attr.levels = levels;
    for (const auto& v : values) {
        attr.codes.push_back(static_cast<int>(std::lower_bound(levels.begin(), levels.end(), v) - levels.begin()));
    }
    g.set_attribute(header[1], std::move(attr));
}

void load_attributes(const std::filesystem::path& path, Graph& g, int index_base) {
    auto in = open_input(path);
    read_attributes(in, g, index_base);
}

void write_edge_list(std::ostream& out, const Graph& g, int index_base) {
    for (const Dyad& d : dyad_list(g)) {
        if (g.has_edge(d)) out << d.i + index_base << ' ' << d.j + index_base << '\n';
    }
}

void write_chain_csv(std::ostream& out, const McmcChain& chain) {
    out << "iter";
    for (int k = 1; k <= chain.dim(); ++k) out << ",theta_" << k;
    out << ",log_target\n";
    for (Eigen::Index r = 0; r < chain.size(); ++r) {
        out << chain.burn_in + r + 1;
        for (int k = 0; k < chain.dim(); ++k) out << ',' << format_double(chain.draws(r, k));
        out << ',' << format_double(chain.log_target[r]) << '\n';
    }
}

void save_chain_csv(const std::filesystem::path& path, const McmcChain& chain) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    write_chain_csv(out, chain);
}

McmcChain read_chain_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("chain file is empty");
    const auto header = split_csv(line);
    if (header.size() < 3 || header.front() != "iter" || header.back() != "log_target") {
        throw DataError("chain file header must be 'iter,theta_1,...,theta_d,log_target'");
    }
    const int d = static_cast<int>(header.size()) - 2;
    std::vector<std::vector<double>> rows;
    long long first_iter = 0;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split_csv(line);
        if (static_cast<int>(cells.size()) != d + 2) {
            throw DataError("chain file line " + std::to_string(line_no) + ": expected " + std::to_string(d + 2) +
                            " columns");
        }
        std::vector<double> row;
        for (const auto& c : cells) {
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
            if (ec != std::errc() || ptr != c.data() + c.size()) {
                throw DataError("chain file line " + std::to_string(line_no) + ": bad number '" + c + "'");
            }
            row.push_back(v);
        }
        if (rows.empty()) first_iter = static_cast<long long>(row[0]);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataError("chain file has no draws");
    McmcChain chain;
    const auto t = static_cast<Eigen::Index>(rows.size());
    chain.draws.resize(t, d);
    chain.log_target.resize(t);
    for (Eigen::Index r = 0; r < t; ++r) {
        for (int k = 0; k < d; ++k) chain.draws(r, k) = rows[static_cast<std::size_t>(r)][k + 1];
        chain.log_target[r] = rows[static_cast<std::size_t>(r)][d + 1];
    }
    chain.burn_in = static_cast<int>(std::max<long long>(0, first_iter - 1));
    chain.iterations = chain.burn_in + t;
    return chain;
}

McmcChain load_chain_csv(const std::filesystem::path& path) {
    auto in = open_input(path);
    return read_chain_csv(in);
}

void write_density_csv(std::ostream& out, const DensityGrid& grid) {
    out << "x,density\n";
    for (std::size_t p = 0; p < grid.x.size(); ++p) {
        out << format_double(grid.x[p]) << ',' << format_double(grid.density[p]) << '\n';
    }
}

void write_edge_histogram_csv(std::ostream& out, const std::vector<std::int64_t>& edge_counts) {
    std::map<std::int64_t, std::int64_t> hist;
    for (auto e : edge_counts) ++hist[e];
    out << "edges,count\n";
    for (const auto& [e, c] : hist) out << e << ',' << c << '\n';
}

double StageTimings::total() const {
    double t = 0.0;
    for (const auto& s : stages_) t += s.second;
    return t;
}

void StageTimings::write(std::ostream& out) const {
    const auto old = out.precision(6);
    out << std::fixed;
    for (const auto& [name, seconds] : stages_) out << std::left << std::setw(28) << name << seconds << '\n';
    out << std::left << std::setw(28) << "total" << total() << '\n';
    out.unsetf(std::ios::floatfield);
    out.precision(old);
}

}  // namespace ergmcal
