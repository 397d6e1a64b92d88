#include <CLI11.hpp>
#include <exception>
#include <fstream>
#include <iostream>

#include "ergmcal/errors.hpp"
#include "ergmcal/io.hpp"
#include "ergmcal/samplers.hpp"

// Draws one network from an ERGM by running TNT from the empty graph.
// Used to build surrogate data sets with a known generating parameter.
int main(int argc, char** argv) {
    CLI::App app{"simulate a network from an ERGM"};
    int nodes = 0;
    std::string terms, out;
    std::vector<double> theta;
    long long steps = 3'000'000;
    std::uint64_t seed = 1;
    int base = 1;
    app.add_option("--nodes", nodes, "number of nodes")->required()->check(CLI::Range(2, 1 << 20));
    app.add_option("--terms", terms, "model terms, e.g. \"edges, kstar2\"")->required();
    app.add_option("--theta", theta, "parameter values, one per term")->required();
    app.add_option("--steps", steps, "TNT steps from the empty graph")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "random seed");
    app.add_option("--index-base", base, "node index base in the output (0 or 1)")->check(CLI::Range(0, 1));
    app.add_option("--out", out, "edge list to write")->required();
    CLI11_PARSE(app, argc, argv);

    try {
        const ergmcal::ModelSpec model = ergmcal::ModelSpec::parse(terms);
        ergmcal::Graph g(nodes);
        const ergmcal::BoundModel bound(model, g);
        if (static_cast<int>(theta.size()) != bound.dim()) {
            std::cerr << "error: --theta needs " << bound.dim() << " values\n";
            return 2;
        }
        const ergmcal::Vector th = Eigen::Map<const ergmcal::Vector>(theta.data(), bound.dim());
        ergmcal::Rng rng(seed);
        for (long long t = 0; t < steps; ++t) ergmcal::tnt_step(g, th, bound, rng);
        std::ofstream os(out);
        if (!os) {
            std::cerr << "error: cannot write " << out << '\n';
            return 3;
        }
        ergmcal::write_edge_list(os, g, base);
        std::cerr << g.num_edges() << " edges, statistics " << bound.sufficient(g).transpose() << '\n';
    } catch (const ergmcal::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
