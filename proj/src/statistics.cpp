#include "ergmcal/statistics.hpp"

#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "ergmcal/errors.hpp"

namespace ergmcal {

namespace {

double choose(int m, int r) {
    if (r < 0 || m < r) return 0.0;
    if (r == 0) return 1.0;
    double out = 1.0;
    for (int t = 1; t <= r; ++t) out = out * (m - r + t) / t;
    return out;
}

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string format_number(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

// Splits on commas that are not nested inside braces.
std::vector<std::string> split_top_level(const std::string& text) {
    std::vector<std::string> parts;
    int depth = 0;
    std::string cur;
    for (char c : text) {
        if (c == '{') ++depth;
        if (c == '}') --depth;
        if (c == ',' && depth == 0) {
            parts.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (depth != 0) throw ConfigError("unbalanced braces in term list '" + text + "'");
    parts.push_back(trim(cur));
    return parts;
}

}  // namespace

StatisticTerm StatisticTerm::edges() {
    StatisticTerm t;
    t.kind = TermKind::Edges;
    t.label = "edges";
    return t;
}

StatisticTerm StatisticTerm::kstar(int k) {
    if (k < 2) throw ConfigError("kstar order must be at least 2, got " + std::to_string(k));
    StatisticTerm t;
    t.kind = TermKind::KStar;
    t.k = k;
    t.label = "kstar" + std::to_string(k);
    return t;
}

StatisticTerm StatisticTerm::triangles() {
    StatisticTerm t;
    t.kind = TermKind::Triangles;
    t.label = "triangle";
    return t;
}

StatisticTerm StatisticTerm::gwesp(double decay) {
    // Negative decay gives alternating-sign weights; only the fixed,
    // non-negative form is supported.
    if (!std::isfinite(decay) || decay < 0.0) {
        throw ConfigError("gwesp decay must be finite and non-negative, got " + format_number(decay));
    }
    StatisticTerm t;
    t.kind = TermKind::Gwesp;
    t.decay = decay;
    t.label = "gwesp.fixed." + format_number(decay);
    return t;
}

StatisticTerm StatisticTerm::node_factor(const std::string& attribute, const std::string& level) {
    if (attribute.empty() || level.empty()) throw ConfigError("nodefactor needs both attr and level");
    StatisticTerm t;
    t.kind = TermKind::NodeFactor;
    t.attribute = attribute;
    t.level = level;
    t.label = "nodefactor." + attribute + "." + level;
    return t;
}

StatisticTerm StatisticTerm::parse(const std::string& raw) {
    const std::string text = trim(raw);
    std::string name = text;
    std::map<std::string, std::string> args;
    if (auto open = text.find('{'); open != std::string::npos) {
        if (text.back() != '}') throw ConfigError("malformed term '" + text + "'");
        name = trim(text.substr(0, open));
        const std::string body = text.substr(open + 1, text.size() - open - 2);
        for (const auto& kv : split_top_level(body)) {
            if (kv.empty()) continue;
            auto eq = kv.find('=');
            if (eq == std::string::npos) throw ConfigError("term argument '" + kv + "' is not key=value");
            args[trim(kv.substr(0, eq))] = trim(kv.substr(eq + 1));
        }
    }
    auto take = [&](const std::string& key) -> std::string {
        auto it = args.find(key);
        if (it == args.end()) throw ConfigError("term '" + name + "' needs argument '" + key + "'");
        std::string v = it->second;
        args.erase(it);
        return v;
    };
    auto to_number = [&](const std::string& key, const std::string& v) {
        try {
            std::size_t used = 0;
            double x = std::stod(v, &used);
            if (used != v.size()) throw std::invalid_argument(v);
            return x;
        } catch (const std::exception&) {
            throw ConfigError("term '" + name + "' argument " + key + "='" + v + "' is not a number");
        }
    };

    StatisticTerm t;
    if (name == "edges") {
        t = edges();
    } else if (name == "kstar") {
        const double k = to_number("k", take("k"));
        if (k != std::floor(k)) throw ConfigError("kstar order must be an integer");
        t = kstar(static_cast<int>(k));
    } else if (name == "triangles" || name == "triangle") {
        t = triangles();
    } else if (name == "gwesp") {
        t = gwesp(to_number("decay", take("decay")));
    } else if (name == "nodefactor") {
        const std::string attr = take("attr");
        t = node_factor(attr, take("level"));
    } else {
        throw ConfigError("unknown model term '" + name + "'");
    }
    if (!args.empty()) throw ConfigError("unexpected argument '" + args.begin()->first + "' for term '" + name + "'");
    return t;
}

ModelSpec::ModelSpec(std::vector<StatisticTerm> terms) : terms_(std::move(terms)) {
    if (terms_.empty()) throw ConfigError("model needs at least one term");
    std::set<std::string> seen;
    for (const auto& t : terms_) {
        if (!seen.insert(t.label).second) throw ConfigError("duplicate model term '" + t.label + "'");
    }
}

ModelSpec ModelSpec::parse(const std::string& text) {
    std::vector<StatisticTerm> terms;
    for (const auto& part : split_top_level(text)) {
        if (part.empty()) throw ConfigError("empty term in model '" + text + "'");
        terms.push_back(StatisticTerm::parse(part));
    }
    return ModelSpec(std::move(terms));
}

std::vector<std::string> ModelSpec::labels() const {
    std::vector<std::string> out;
    for (const auto& t : terms_) out.push_back(t.label);
    return out;
}

void ModelSpec::check_against(const Graph& g) const {
    for (const auto& t : terms_) {
        if (t.kind != TermKind::NodeFactor) continue;
        const auto& attr = g.attribute(t.attribute);
        if (!attr.code_of(t.level)) {
            throw ModelDataMismatch("attribute '" + t.attribute + "' has no level '" + t.level + "'");
        }
    }
}

double gwesp_weight(double decay, int shared_partners) {
    return std::exp(decay) * (1.0 - std::pow(1.0 - std::exp(-decay), shared_partners));
}

BoundModel::BoundModel(const ModelSpec& model, const Graph& g) : n_(g.num_nodes()) {
    model.check_against(g);
    for (const auto& t : model.terms()) {
        Resolved r{t.kind, t.k, t.decay, 1.0 - std::exp(-t.decay), {}};
        if (t.kind == TermKind::NodeFactor) {
            const auto& attr = g.attribute(t.attribute);
            const int code = *attr.code_of(t.level);
            r.match.resize(n_);
            for (int v = 0; v < n_; ++v) r.match[v] = attr.codes[v] == code ? 1 : 0;
        }
        terms_.push_back(std::move(r));
    }
}

double BoundModel::gwesp_change(const Graph& g, Dyad d, const Resolved& t) const {
    // Adding (i,j): the new edge scores w(cn_ij), and each edge (i,k), (j,k)
    // to a common neighbour k gains one shared partner, worth ratio^sp where
    // sp is its partner count with (i,j) absent.
    const int present = g.has_edge(d) ? 1 : 0;
    int cn = 0;
    double delta = 0.0;
    g.for_each_common_neighbor(d.i, d.j, [&](int k) {
        ++cn;
        const int sp_ik = g.common_neighbors(d.i, k) - present;
        const int sp_jk = g.common_neighbors(d.j, k) - present;
        delta += std::pow(t.ratio, sp_ik) + std::pow(t.ratio, sp_jk);
    });
    return delta + gwesp_weight(t.decay, cn);
}

void BoundModel::change(const Graph& g, Dyad d, std::span<double> out) const {
    const int present = g.has_edge(d) ? 1 : 0;
    for (std::size_t a = 0; a < terms_.size(); ++a) {
        const auto& t = terms_[a];
        switch (t.kind) {
            case TermKind::Edges:
                out[a] = 1.0;
                break;
            case TermKind::KStar: {
                const int di = g.degree(d.i) - present;
                const int dj = g.degree(d.j) - present;
                out[a] = t.k == 2 ? static_cast<double>(di + dj) : choose(di, t.k - 1) + choose(dj, t.k - 1);
                break;
            }
            case TermKind::Triangles:
                out[a] = g.common_neighbors(d.i, d.j);
                break;
            case TermKind::Gwesp:
                out[a] = gwesp_change(g, d, t);
                break;
            case TermKind::NodeFactor:
                out[a] = t.match[d.i] + t.match[d.j];
                break;
        }
    }
}

Vector BoundModel::change(const Graph& g, Dyad d) const {
    Vector out(dim());
    change(g, d, std::span<double>(out.data(), out.size()));
    return out;
}

Vector BoundModel::sufficient(const Graph& g) const {
    Vector s = Vector::Zero(dim());
    const int n = g.num_nodes();
    for (std::size_t a = 0; a < terms_.size(); ++a) {
        const auto& t = terms_[a];
        double acc = 0.0;
        switch (t.kind) {
            case TermKind::Edges:
                acc = static_cast<double>(g.num_edges());
                break;
            case TermKind::KStar:
                for (int v = 0; v < n; ++v) acc += choose(g.degree(v), t.k);
                break;
            case TermKind::Triangles: {
                long long tri = 0;
                for (int i = 0; i < n; ++i) {
                    g.for_each_neighbor(i, [&](int j) {
                        if (j > i) tri += g.common_neighbors(i, j);
                    });
                }
                acc = static_cast<double>(tri / 3);
                break;
            }
            case TermKind::Gwesp:
                for (int i = 0; i < n; ++i) {
                    g.for_each_neighbor(i, [&](int j) {
                        if (j > i) acc += gwesp_weight(t.decay, g.common_neighbors(i, j));
                    });
                }
                break;
            case TermKind::NodeFactor:
                for (int i = 0; i < n; ++i) {
                    if (!t.match[i]) continue;
                    acc += g.degree(i);
                }
                break;
        }
        s[a] = acc;
    }
    return s;
}

Vector sufficient_statistics(const Graph& g, const ModelSpec& m) { return BoundModel(m, g).sufficient(g); }

Vector change_statistic(const Graph& g, const ModelSpec& m, Dyad d) {
    if (d.i < 0 || d.j >= g.num_nodes() || d.i >= d.j) {
        throw StructuralError("dyad (" + std::to_string(d.i) + "," + std::to_string(d.j) + ") is not canonical");
    }
    return BoundModel(m, g).change(g, d);
}

ChangeStatMatrix change_stat_matrix(const Graph& g, const ModelSpec& m) {
    const BoundModel bound(m, g);
    const int n = g.num_nodes();
    ChangeStatMatrix out;
    out.rows.resize(g.num_dyads(), bound.dim());
    out.response.resize(g.num_dyads());
    Eigen::Index k = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j, ++k) {
            bound.change(g, {i, j}, std::span<double>(out.rows.row(k).data(), bound.dim()));
            out.response[k] = g.has_edge(i, j) ? 1.0 : 0.0;
        }
    }
    return out;
}

}  // namespace ergmcal
