#include "ergmcal/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "ergmcal/errors.hpp"

namespace ergmcal {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys{
        {"run", {"mode", "seed", "out"}},
        {"data", {"edges", "attributes", "index_base", "nodes"}},
        {"model", {"terms"}},
        {"prior", {"mean", "variance"}},
        {"sampler", {"iterations", "burn_in", "tuning", "start"}},
        {"calibration",
         {"alpha", "tol", "persistence", "max_iters", "graphs", "sim_burn", "sim_thin", "start", "hessian_graphs",
          "hessian_burn", "hessian_thin", "hessian_min_ess", "hessian_max_thin", "newton_steps", "newton_max_step",
          "saturated_density", "empty_fraction", "max_saturated_share", "dense_warning", "sampler"}},
        {"aea", {"iterations", "burn_in", "aux_iters", "tuning"}},
        {"degeneracy",
         {"draws", "networks", "steps", "dense_density", "flag_share", "reference_theta", "reference_graphs"}},
        {"oracle",
         {"grid_lo", "grid_hi", "grid_points", "random_thetas", "rm_alpha", "rm_iters", "aea_iterations",
          "aea_burn_in", "aux_iters", "hessian_replicates"}},
    };
    return keys;
}

std::string key_name(const std::string& section, const std::string& key) { return "[" + section + "] " + key; }

template <class T>
T parse_number(const std::string& text, const std::string& what) {
    T v{};
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) throw ConfigError(what + ": '" + text + "' is not a valid number");
    return v;
}

template <class T>
std::vector<T> parse_list(const std::string& text, const std::string& what) {
    std::string cleaned = text;
    for (char& c : cleaned) {
        if (c == ',') c = ' ';
    }
    std::istringstream ss(cleaned);
    std::vector<T> out;
    std::string tok;
    while (ss >> tok) out.push_back(parse_number<T>(tok, what));
    if (out.empty()) throw ConfigError(what + " is empty");
    return out;
}

class Reader {
  public:
    explicit Reader(const pt::ptree& tree) : tree_(tree) {}

    std::optional<std::string> get(const std::string& section, const std::string& key) const {
        const auto sec = tree_.get_child_optional(section);
        if (!sec) return std::nullopt;
        const auto v = sec->get_optional<std::string>(key);
        if (!v) return std::nullopt;
        return *v;
    }
    template <class T>
    void number(const std::string& section, const std::string& key, T& target) const {
        if (auto v = get(section, key)) target = parse_number<T>(*v, key_name(section, key));
    }
    template <class T>
    void list(const std::string& section, const std::string& key, std::vector<T>& target) const {
        if (auto v = get(section, key)) target = parse_list<T>(*v, key_name(section, key));
    }
    void optional_list(const std::string& section, const std::string& key,
                       std::optional<std::vector<double>>& target) const {
        if (auto v = get(section, key)) target = parse_list<double>(*v, key_name(section, key));
    }

  private:
    const pt::ptree& tree_;
};

}  // namespace

RunMode parse_mode(const std::string& text) {
    if (text == "pseudo") return RunMode::Pseudo;
    if (text == "calibrate") return RunMode::Calibrate;
    if (text == "aea") return RunMode::Aea;
    if (text == "degeneracy-check") return RunMode::DegeneracyCheck;
    if (text == "oracle-test") return RunMode::OracleTest;
    throw ConfigError("unknown mode '" + text + "' (expected pseudo, calibrate, aea, degeneracy-check or oracle-test)");
}

std::string mode_name(RunMode mode) {
    switch (mode) {
        case RunMode::Pseudo: return "pseudo";
        case RunMode::Calibrate: return "calibrate";
        case RunMode::Aea: return "aea";
        case RunMode::DegeneracyCheck: return "degeneracy-check";
        case RunMode::OracleTest: return "oracle-test";
    }
    return "?";
}

RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    for (const auto& [section, body] : tree) {
        const auto it = known_keys().find(section);
        if (it == known_keys().end()) throw ConfigError("unknown config section [" + section + "]");
        if (!body.data().empty()) throw ConfigError("config key '" + section + "' must sit inside a section");
        for (const auto& [key, value] : body) {
            if (!it->second.count(key)) throw ConfigError("unknown config key " + key_name(section, key));
        }
    }

    const Reader r(tree);
    RunConfig cfg;
    auto path_of = [&](const std::string& text) {
        std::filesystem::path p(text);
        return p.is_relative() ? base_dir / p : p;
    };

    if (auto v = r.get("run", "mode")) cfg.mode = parse_mode(*v);
    if (auto v = r.get("run", "seed")) cfg.seed = parse_number<std::uint64_t>(*v, "[run] seed");
    if (auto v = r.get("run", "out")) cfg.out = *v;

    if (auto v = r.get("data", "edges")) cfg.edges = path_of(*v);
    if (auto v = r.get("data", "attributes")) cfg.attributes = path_of(*v);
    r.number("data", "index_base", cfg.index_base);
    if (auto v = r.get("data", "nodes")) cfg.nodes = parse_number<int>(*v, "[data] nodes");

    if (auto v = r.get("model", "terms")) cfg.terms = *v;

    r.list("prior", "mean", cfg.prior_mean);
    r.number("prior", "variance", cfg.prior_variance);

    r.number("sampler", "iterations", cfg.iterations);
    r.number("sampler", "burn_in", cfg.burn_in);
    r.list("sampler", "tuning", cfg.tuning);
    r.optional_list("sampler", "start", cfg.chain_start);

    auto& rm = cfg.robbins_monro;
    r.number("calibration", "alpha", rm.alpha);
    r.number("calibration", "tol", rm.tol);
    r.number("calibration", "persistence", rm.persistence);
    r.number("calibration", "max_iters", rm.max_iters);
    r.number("calibration", "graphs", rm.sim.draws);
    r.number("calibration", "sim_burn", rm.sim.burn);
    r.number("calibration", "sim_thin", rm.sim.thin);
    r.number("calibration", "saturated_density", rm.saturated_density);
    r.number("calibration", "empty_fraction", rm.empty_fraction);
    r.number("calibration", "max_saturated_share", rm.max_saturated_share);
    r.number("calibration", "dense_warning", rm.dense_warning);
    r.optional_list("calibration", "start", cfg.rm_start);
    r.number("calibration", "hessian_graphs", cfg.hessian.sim.draws);
    r.number("calibration", "hessian_burn", cfg.hessian.sim.burn);
    r.number("calibration", "hessian_thin", cfg.hessian.sim.thin);
    r.number("calibration", "hessian_min_ess", cfg.hessian.min_ess_share);
    r.number("calibration", "hessian_max_thin", cfg.hessian.max_thin);
    r.number("calibration", "newton_steps", cfg.refinement.newton_steps);
    r.number("calibration", "newton_max_step", cfg.refinement.max_step);
    if (auto v = r.get("calibration", "sampler")) cfg.calibrated_sampler = *v;

    // AEA chain length and tuning follow the sampler section unless overridden
    cfg.aea_iterations = cfg.iterations;
    cfg.aea_burn_in = cfg.burn_in;
    cfg.aea_tuning = cfg.tuning;
    r.number("aea", "iterations", cfg.aea_iterations);
    r.number("aea", "burn_in", cfg.aea_burn_in);
    r.number("aea", "aux_iters", cfg.aux_iters);
    r.list("aea", "tuning", cfg.aea_tuning);

    auto& dg = cfg.degeneracy;
    r.number("degeneracy", "draws", dg.subsample);
    r.number("degeneracy", "networks", dg.networks_per_theta);
    r.number("degeneracy", "steps", dg.steps);
    r.number("degeneracy", "dense_density", dg.dense_density);
    r.number("degeneracy", "flag_share", dg.flag_share);
    r.optional_list("degeneracy", "reference_theta", cfg.reference_theta);
    r.number("degeneracy", "reference_graphs", cfg.reference_graphs);

    r.list("oracle", "grid_lo", cfg.grid_lo);
    r.list("oracle", "grid_hi", cfg.grid_hi);
    r.list("oracle", "grid_points", cfg.grid_points);
    r.number("oracle", "random_thetas", cfg.oracle_random_thetas);
    r.number("oracle", "rm_alpha", cfg.oracle_rm_alpha);
    r.number("oracle", "rm_iters", cfg.oracle_rm_iters);
    r.number("oracle", "aea_iterations", cfg.oracle_aea_iterations);
    r.number("oracle", "aea_burn_in", cfg.oracle_aea_burn_in);
    r.number("oracle", "aux_iters", cfg.oracle_aux_iters);
    r.number("oracle", "hessian_replicates", cfg.oracle_hessian_replicates);
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    return parse_config(in, path.parent_path());
}

void validate(const RunConfig& cfg) {
    if (!cfg.seed) throw ConfigError("[run] seed is required (or pass --seed)");
    if (cfg.edges.empty()) throw ConfigError("[data] edges is required");
    if (cfg.index_base != 0 && cfg.index_base != 1) throw ConfigError("[data] index_base must be 0 or 1");
    if (cfg.nodes && *cfg.nodes < 2) throw ConfigError("[data] nodes must be at least 2");
    if (cfg.terms.empty()) throw ConfigError("[model] terms is required");
    if (!(cfg.prior_variance > 0.0)) throw ConfigError("[prior] variance must be positive");
    if (cfg.iterations < 1 || cfg.burn_in < 0 || cfg.burn_in >= cfg.iterations) {
        throw ConfigError("[sampler] needs iterations >= 1 and 0 <= burn_in < iterations");
    }
    for (double t : cfg.tuning) {
        if (!(t > 0.0)) throw ConfigError("[sampler] tuning entries must be positive");
    }
    const auto& rm = cfg.robbins_monro;
    if (!(rm.alpha > 0.0)) throw ConfigError("[calibration] alpha must be positive");
    if (!(rm.tol > 0.0)) throw ConfigError("[calibration] tol must be positive");
    if (rm.persistence < 1 || rm.max_iters < 1) throw ConfigError("[calibration] persistence and max_iters must be >= 1");
    if (rm.sim.draws < 1 || rm.sim.burn < 0 || rm.sim.thin < 1) {
        throw ConfigError("[calibration] needs graphs >= 1, sim_burn >= 0, sim_thin >= 1");
    }
    const auto& hs = cfg.hessian;
    if (hs.sim.draws < 2 || hs.sim.burn < 0 || hs.sim.thin < 1 || hs.max_thin < hs.sim.thin) {
        throw ConfigError("[calibration] needs hessian_graphs >= 2, hessian_burn >= 0, "
                          "1 <= hessian_thin <= hessian_max_thin");
    }
    if (!(hs.min_ess_share >= 0.0 && hs.min_ess_share <= 1.0)) {
        throw ConfigError("[calibration] hessian_min_ess must lie in [0, 1]");
    }
    if (cfg.refinement.newton_steps < 0 || !(cfg.refinement.max_step > 0.0)) {
        throw ConfigError("[calibration] needs newton_steps >= 0 and newton_max_step > 0");
    }
    if (cfg.calibrated_sampler != "correct" && cfg.calibrated_sampler != "mh") {
        throw ConfigError("[calibration] sampler must be 'correct' or 'mh'");
    }
    if (cfg.mode == RunMode::Aea) {
        if (cfg.aux_iters < 1) throw ConfigError("[aea] aux_iters must be >= 1");
        if (cfg.aea_iterations < 1 || cfg.aea_burn_in < 0 || cfg.aea_burn_in >= cfg.aea_iterations) {
            throw ConfigError("[aea] needs iterations >= 1 and 0 <= burn_in < iterations");
        }
    }
    if (cfg.mode == RunMode::DegeneracyCheck) {
        const auto& dg = cfg.degeneracy;
        if (dg.subsample < 1 || dg.networks_per_theta < 1 || dg.steps < 1) {
            throw ConfigError("[degeneracy] draws, networks and steps must be >= 1");
        }
        if (cfg.reference_graphs < 1) throw ConfigError("[degeneracy] reference_graphs must be >= 1");
    }
    if (cfg.mode == RunMode::OracleTest) {
        if (cfg.grid_points.empty() || cfg.grid_lo.empty() || cfg.grid_hi.empty()) {
            throw ConfigError("[oracle] grid_lo, grid_hi and grid_points are required");
        }
        if (cfg.oracle_random_thetas < 1 || cfg.oracle_rm_iters < 1 || cfg.oracle_aux_iters < 1 ||
            cfg.oracle_hessian_replicates < 2 || cfg.oracle_aea_burn_in < 0 ||
            cfg.oracle_aea_burn_in >= cfg.oracle_aea_iterations) {
            throw ConfigError("[oracle] settings out of range");
        }
    }
}

Vector broadcast(const std::vector<double>& values, int d, const std::string& what) {
    if (values.size() == 1) return Vector::Constant(d, values[0]);
    if (static_cast<int>(values.size()) != d) {
        throw ConfigError(what + " needs 1 or " + std::to_string(d) + " values, got " + std::to_string(values.size()));
    }
    return Eigen::Map<const Vector>(values.data(), d);
}

}  // namespace ergmcal
