#include "mfgce/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "mfgce/error.hpp"

namespace mfgce {

namespace {

[[noreturn]] void fail(const YAML::Node& n, const std::string& what) {
    const auto m = n.Mark();
    throw ConfigError(what, m.line >= 0 ? m.line + 1 : -1, m.column >= 0 ? m.column + 1 : -1);
}

void only_keys(const YAML::Node& n, const std::string& section, std::set<std::string> allowed) {
    if (!n.IsMap()) fail(n, "section '" + section + "' must be a mapping");
    for (auto it = n.begin(); it != n.end(); ++it) {
        const std::string key = it->first.as<std::string>();
        if (!allowed.count(key)) fail(it->first, "unknown key '" + key + "' in section '" + section + "'");
    }
}

template <typename T>
T scalar(const YAML::Node& n, const std::string& name) {
    if (!n.IsScalar()) fail(n, "'" + name + "' must be a scalar");
    try {
        return n.as<T>();
    } catch (const YAML::Exception&) {
        fail(n, "'" + name + "' has the wrong type");
    }
}

template <typename T>
void read(const YAML::Node& parent, const char* key, T& dst, const std::string& section) {
    if (const YAML::Node n = parent[key]) dst = scalar<T>(n, section + "." + key);
}

std::size_t count(const YAML::Node& n, const std::string& name) {
    const long long v = scalar<long long>(n, name);
    if (v < 0) fail(n, "'" + name + "' must be nonnegative");
    return std::size_t(v);
}

XDistribution parse_x(const YAML::Node& n) {
    only_keys(n, "model.initial_law.x", {"kind", "value", "mean", "sd", "log_mean", "log_sd"});
    const std::string kind = n["kind"] ? scalar<std::string>(n["kind"], "kind") : "point";
    XDistribution d;
    if (kind == "point") {
        d.kind = XDistribution::Kind::point;
        read(n, "value", d.a, "x");
    } else if (kind == "normal") {
        d.kind = XDistribution::Kind::normal;
        read(n, "mean", d.a, "x");
        read(n, "sd", d.b, "x");
    } else if (kind == "lognormal") {
        d.kind = XDistribution::Kind::lognormal;
        read(n, "log_mean", d.a, "x");
        read(n, "log_sd", d.b, "x");
    } else {
        fail(n["kind"], "unknown x-distribution kind '" + kind + "'");
    }
    return d;
}

YDistribution parse_y(const YAML::Node& n) {
    only_keys(n, "model.initial_law.y", {"kind", "value", "values", "weights"});
    const std::string kind = n["kind"] ? scalar<std::string>(n["kind"], "kind") : "point";
    YDistribution d;
    if (kind == "point") {
        d.kind = YDistribution::Kind::point;
        read(n, "value", d.value, "y");
    } else if (kind == "uniform") {
        d.kind = YDistribution::Kind::uniform;
    } else if (kind == "discrete") {
        d.kind = YDistribution::Kind::discrete;
        for (const char* key : {"values", "weights"}) {
            const YAML::Node s = n[key];
            if (!s || !s.IsSequence()) fail(n, std::string("discrete y law needs a '") + key + "' list");
            auto& dst = std::string(key) == "values" ? d.values : d.weights;
            for (const auto& v : s) dst.push_back(scalar<double>(v, key));
        }
    } else {
        fail(n["kind"], "unknown y-distribution kind '" + kind + "'");
    }
    return d;
}

InitialLaw parse_law(const YAML::Node& n) {
    only_keys(n, "model.initial_law", {"x", "y", "atoms"});
    try {
        if (const YAML::Node atoms = n["atoms"]) {
            if (n["x"] || n["y"]) fail(n, "initial_law takes either atoms or x/y marginals");
            if (!atoms.IsSequence()) fail(atoms, "'atoms' must be a list");
            std::vector<Atom> list;
            for (const auto& a : atoms) {
                only_keys(a, "model.initial_law.atoms", {"x", "y", "w"});
                Atom at;
                read(a, "x", at.x, "atom");
                read(a, "y", at.y, "atom");
                read(a, "w", at.w, "atom");
                list.push_back(at);
            }
            return InitialLaw::atoms(std::move(list));
        }
        XDistribution x;
        YDistribution y;
        if (n["x"]) x = parse_x(n["x"]);
        if (n["y"]) y = parse_y(n["y"]);
        return InitialLaw::product(x, y);
    } catch (const InvalidArgument& e) {
        fail(n, e.what());
    }
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(e.msg, e.mark.line + 1, e.mark.column + 1);
    }
    if (!root || !root.IsMap()) throw ConfigError("config must be a mapping", 1, 1);
    only_keys(root, "root", {"seed", "output", "model", "grid", "stopping", "sim", "mfg", "solve", "game"});

    RunConfig cfg;
    cfg.source = text;
    read(root, "seed", cfg.seed, "root");
    read(root, "output", cfg.output_dir, "root");

    const YAML::Node model = root["model"];
    if (!model) throw ConfigError("missing required section 'model'", 1, 1);
    only_keys(model, "model", {"preset", "params", "r", "c0", "T", "domain", "initial_law", "decouple_at"});
    if (!model["preset"]) fail(model, "model.preset is required");
    cfg.preset = scalar<std::string>(model["preset"], "model.preset");
    if (const YAML::Node p = model["params"]) {
        if (!p.IsMap()) fail(p, "model.params must be a mapping");
        for (auto it = p.begin(); it != p.end(); ++it)
            cfg.params[it->first.as<std::string>()] = scalar<double>(it->second, it->first.as<std::string>());
    }
    for (const char* key : {"r", "c0", "T"}) {
        if (!model[key]) fail(model, std::string("model.") + key + " is required");
        cfg.params[key] = scalar<double>(model[key], key);
    }
    if (const YAML::Node d = model["domain"]) {
        only_keys(d, "model.domain", {"x_lo", "x_hi"});
        read(d, "x_lo", cfg.domain.lo, "model.domain");
        read(d, "x_hi", cfg.domain.hi, "model.domain");
    }
    if (const YAML::Node l = model["initial_law"]) cfg.initial_law = parse_law(l);
    if (const YAML::Node d = model["decouple_at"]) cfg.decouple_at = scalar<double>(d, "decouple_at");

    if (const YAML::Node g = root["grid"]) {
        only_keys(g, "grid", {"M_t", "M_x", "M_y", "y_floor"});
        read(g, "M_t", cfg.grid.m_t, "grid");
        read(g, "M_x", cfg.grid.m_x, "grid");
        read(g, "M_y", cfg.grid.m_y, "grid");
        read(g, "y_floor", cfg.stopping.y_floor, "grid");
    }
    if (const YAML::Node s = root["stopping"]) {
        only_keys(s, "stopping", {"omega", "tol", "max_iter", "tol_mono", "tol_active"});
        read(s, "omega", cfg.stopping.omega, "stopping");
        read(s, "tol", cfg.stopping.psor_tol, "stopping");
        read(s, "max_iter", cfg.stopping.max_iter, "stopping");
        read(s, "tol_mono", cfg.stopping.tol_mono, "stopping");
        read(s, "tol_active", cfg.tol_active, "stopping");
        if (!(cfg.stopping.omega > 0 && cfg.stopping.omega < 2)) fail(s, "stopping.omega must lie in (0,2)");
    }
    if (const YAML::Node s = root["sim"]) {
        only_keys(s, "sim", {"n_paths", "substeps", "antithetic"});
        if (s["n_paths"]) cfg.sim.n_paths = count(s["n_paths"], "sim.n_paths");
        read(s, "substeps", cfg.sim.substeps, "sim");
        read(s, "antithetic", cfg.sim.antithetic, "sim");
        if (cfg.sim.n_paths < 1) fail(s, "sim.n_paths must be positive");
        if (cfg.sim.substeps < 1) fail(s, "sim.substeps must be positive");
    }
    if (const YAML::Node s = root["mfg"]) {
        only_keys(s, "mfg", {"tol_iter", "max_iters"});
        read(s, "tol_iter", cfg.mfg.tol_iter, "mfg");
        read(s, "max_iters", cfg.mfg.max_iters, "mfg");
    }
    if (const YAML::Node s = root["solve"]) {
        only_keys(s, "solve", {"m"});
        read(s, "m", cfg.solve_m, "solve");
        if (!(cfg.solve_m >= 0 && cfg.solve_m <= 1)) fail(s, "solve.m must lie in [0,1]");
    }
    if (const YAML::Node s = root["game"]) {
        only_keys(s, "game", {"N", "Ns", "replications", "bootstrap"});
        if (s["N"]) cfg.game.N = count(s["N"], "game.N");
        if (s["replications"]) cfg.game.replications = count(s["replications"], "game.replications");
        if (s["bootstrap"]) cfg.game.bootstrap = count(s["bootstrap"], "game.bootstrap");
        if (const YAML::Node ns = s["Ns"]) {
            if (!ns.IsSequence()) fail(ns, "game.Ns must be a list");
            cfg.game.Ns.clear();
            for (const auto& v : ns) cfg.game.Ns.push_back(count(v, "game.Ns"));
        }
    }
    cfg.mfg.stopping = cfg.stopping;
    cfg.mfg.tol_active = cfg.tol_active;
    cfg.sim.seed = cfg.seed;
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

ModelSpec RunConfig::build_model() const {
    ModelSpec m = preset_model(preset, params, initial_law, domain);
    if (decouple_at) m = decoupled(m, *decouple_at);
    return m;
}

Grid RunConfig::build_grid(const ModelSpec& model) const { return Grid::make(model, grid); }

}  // namespace mfgce
