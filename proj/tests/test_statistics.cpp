#include <doctest.h>

#include <random>

#include "ergmcal/errors.hpp"
#include "ergmcal/io.hpp"
#include "ergmcal/statistics.hpp"
#include "naive.hpp"

using namespace ergmcal;

namespace {

std::vector<double> naive_stats(const Graph& g, const ModelSpec& m) {
    const auto a = naive::adjacency(g);
    std::vector<double> out;
    for (const auto& t : m.terms()) {
        switch (t.kind) {
            case TermKind::Edges: out.push_back(naive::edges(a)); break;
            case TermKind::KStar: out.push_back(naive::kstar(a, t.k)); break;
            case TermKind::Triangles: out.push_back(naive::triangles(a)); break;
            case TermKind::Gwesp: out.push_back(naive::gwesp(a, t.decay)); break;
            case TermKind::NodeFactor: {
                const auto& attr = g.attribute(t.attribute);
                out.push_back(naive::nodefactor(a, attr.codes, *attr.code_of(t.level)));
                break;
            }
        }
    }
    return out;
}

// s(y with d present) - s(y with d absent), both recounted from scratch
std::vector<double> toggle_difference(const Graph& g, const ModelSpec& m, Dyad d) {
    Graph plus = g, minus = g;
    plus.set_edge(d, true);
    minus.set_edge(d, false);
    const auto sp = naive_stats(plus, m);
    const auto sm = naive_stats(minus, m);
    std::vector<double> out(sp.size());
    for (std::size_t k = 0; k < sp.size(); ++k) out[k] = sp[k] - sm[k];
    return out;
}

void attach_colour(Graph& g, std::mt19937_64& rng) {
    NodeAttribute attr;
    attr.levels = {"a", "b", "c"};
    std::uniform_int_distribution<int> pick(0, 2);
    for (int v = 0; v < g.num_nodes(); ++v) attr.codes.push_back(pick(rng));
    g.set_attribute("colour", attr);
}

const char* kAllTerms =
    "edges, kstar{k=2}, kstar{k=3}, triangles, gwesp{decay=1.0}, gwesp{decay=0.3}, gwesp{decay=0}, "
    "nodefactor{attr=colour,level=b}";

}  // namespace

TEST_CASE("sufficient statistics match brute-force counts") {
    std::mt19937_64 rng(11);
    const ModelSpec m = ModelSpec::parse(kAllTerms);
    for (int rep = 0; rep < 40; ++rep) {
        const int n = 3 + rep % 9;
        Graph g = naive::random_graph(n, 0.15 + 0.02 * rep, rng);
        attach_colour(g, rng);
        const Vector s = sufficient_statistics(g, m);
        const auto ref = naive_stats(g, m);
        for (int k = 0; k < m.dim(); ++k) CHECK(s[k] == doctest::Approx(ref[k]).epsilon(1e-12));
    }
}

TEST_CASE("change statistics equal toggle-and-recount differences") {
    std::mt19937_64 rng(5);
    const ModelSpec m = ModelSpec::parse(kAllTerms);
    for (int rep = 0; rep < 30; ++rep) {
        const int n = 2 + rep % 7;  // n <= 8
        Graph g = naive::random_graph(n, 0.5, rng);
        attach_colour(g, rng);
        for (const auto& d : dyad_list(g)) {
            const Vector c = change_statistic(g, m, d);
            const auto ref = toggle_difference(g, m, d);
            for (int k = 0; k < m.dim(); ++k) CHECK(std::abs(c[k] - ref[k]) <= 1e-10);
        }
    }
}

TEST_CASE("triangle change statistic counts common neighbours") {
    Graph g(6);
    // 0 and 1 share neighbours 2, 3, 4
    for (int k : {2, 3, 4}) {
        g.toggle({0, k});
        g.toggle({1, k});
    }
    g.toggle({1, 5});
    const ModelSpec m = ModelSpec::parse("triangles");
    CHECK(change_statistic(g, m, {0, 1})[0] == 3.0);
    g.toggle({0, 1});
    CHECK(change_statistic(g, m, {0, 1})[0] == 3.0);
}

TEST_CASE("change statistics do not depend on the dyad's own state") {
    std::mt19937_64 rng(3);
    const ModelSpec m = ModelSpec::parse(kAllTerms);
    Graph g = naive::random_graph(8, 0.4, rng);
    attach_colour(g, rng);
    for (const auto& d : dyad_list(g)) {
        Graph h = g;
        h.toggle(d);
        CHECK((change_statistic(g, m, d) - change_statistic(h, m, d)).norm() < 1e-12);
    }
}

TEST_CASE("GWESP weights and non-negativity") {
    CHECK(gwesp_weight(1.0, 0) == 0.0);
    CHECK(gwesp_weight(1.0, 1) == doctest::Approx(1.0));
    CHECK(gwesp_weight(0.0, 5) == doctest::Approx(1.0));
    CHECK(gwesp_weight(1.0, 2) == doctest::Approx(std::exp(1.0) * (1 - std::pow(1 - std::exp(-1.0), 2))));
    std::mt19937_64 rng(9);
    const ModelSpec m = ModelSpec::parse("gwesp{decay=0.7}, kstar{k=2}");
    for (int rep = 0; rep < 20; ++rep) {
        const Graph g = naive::random_graph(9, 0.4, rng);
        for (const auto& d : dyad_list(g)) CHECK((change_statistic(g, m, d).array() >= 0.0).all());
    }
}

TEST_CASE("change-stat matrix of the toy network matches the toggle oracle row by row") {
    const Graph g = load_edge_list(ERGMCAL_SOURCE_DIR "/data/toy/toy30.edges", 1, 30);
    const ModelSpec m = ModelSpec::parse("edges, triangles");
    const auto csm = change_stat_matrix(g, m);
    REQUIRE(csm.num_dyads() == 435);
    REQUIRE(csm.dim() == 2);
    const auto dyads = dyad_list(g);
    for (std::size_t r = 0; r < dyads.size(); ++r) {
        const auto ref = toggle_difference(g, m, dyads[r]);
        const auto row = static_cast<Eigen::Index>(r);
        CHECK(csm.rows(row, 0) == ref[0]);
        CHECK(csm.rows(row, 1) == ref[1]);
        CHECK(csm.response[row] == (g.has_edge(dyads[r]) ? 1.0 : 0.0));
    }
    const Vector s = sufficient_statistics(g, m);
    CHECK(s[0] == 65.0);
    CHECK(csm.response.sum() == 65.0);
}

TEST_CASE("model parsing") {
    const ModelSpec m = ModelSpec::parse(" edges , kstar{k=2}, triangles,gwesp{decay=1.0}, nodefactor{attr=grade,level=7}");
    const std::vector<std::string> labels{"edges", "kstar2", "triangle", "gwesp.fixed.1", "nodefactor.grade.7"};
    CHECK(m.labels() == labels);
    CHECK(m.dim() == 5);
    CHECK_THROWS_AS(ModelSpec::parse("kstar{k=1}"), ConfigError);
    CHECK_THROWS_AS(ModelSpec::parse("kstar{k=2.5}"), ConfigError);
    CHECK_THROWS_AS(ModelSpec::parse("gwesp{decay=-1}"), ConfigError);
    CHECK_THROWS_AS(ModelSpec::parse("wibble"), ConfigError);
    CHECK_THROWS_AS(ModelSpec::parse("edges, edges"), ConfigError);
    CHECK_THROWS_AS(ModelSpec::parse(""), ConfigError);
    CHECK_THROWS_AS(ModelSpec::parse("edges, gwesp{decay=1"), ConfigError);
    CHECK_THROWS_AS(ModelSpec::parse("triangles{k=2}"), ConfigError);
}

TEST_CASE("nodefactor terms must match the data") {
    Graph g(4);
    const ModelSpec m = ModelSpec::parse("edges, nodefactor{attr=grade,level=7}");
    CHECK_THROWS_AS(m.check_against(g), ModelDataMismatch);
    NodeAttribute grade;
    grade.levels = {"7", "8"};
    grade.codes = {0, 0, 1, 1};
    g.set_attribute("grade", grade);
    CHECK_NOTHROW(m.check_against(g));
    CHECK_THROWS_AS(ModelSpec::parse("nodefactor{attr=grade,level=9}").check_against(g), ModelDataMismatch);
    g.toggle({0, 2});
    g.toggle({0, 1});
    // main effect: edge (0,1) counts twice, (0,2) once
    CHECK(sufficient_statistics(g, m)[1] == 3.0);
    CHECK(change_statistic(g, m, {1, 2})[1] == 1.0);
}
