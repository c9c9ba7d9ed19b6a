#include "popdyn/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <regex>
#include <set>

namespace popdyn {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
    if (!obj.is_object()) throw ConfigError(where, "expected an object");
    for (const auto& [k, v] : obj.items())
        if (!allowed.count(k)) throw ConfigError(where.empty() ? k : where + "." + k, "unknown key");
}

double number(const json& obj, const std::string& key, const std::string& path, double fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(path, "expected a number");
    return v.get<double>();
}

std::uint64_t unsigned_int(const json& obj, const std::string& key, const std::string& path, std::uint64_t fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    throw ConfigError(path, "expected a nonnegative integer");
}

std::string text(const json& obj, const std::string& key, const std::string& path, const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_string()) throw ConfigError(path, "expected a string");
    return v.get<std::string>();
}

template <class F>
void rethrow_as(const std::string& path, F&& f) {
    try {
        f();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path, e.what());
    }
}

double& influencer_field(InfluencerParams& p, const std::string& field, const std::string& path) {
    if (field == "beta") return p.beta;
    if (field == "lambda0") return p.lambda0;
    if (field == "lambda1") return p.lambda1;
    if (field == "phi") return p.phi;
    if (field == "cv") return p.cv;
    throw ConfigError(path, "not a numeric influencer parameter");
}

} // namespace

void Scenario::validate() const {
    rethrow_as("system", [&] { sys.validate(); });
    if (influencers.empty()) throw ConfigError("influencers", "at least one influencer is required");
    for (std::size_t i = 0; i < influencers.size(); ++i)
        rethrow_as("influencers[" + std::to_string(i) + "]", [&] { influencers[i].validate(); });
    if (!(horizon > 0.0)) throw ConfigError("run.horizon_days", "must be > 0");
    if (!(burnin_frac >= 0.0 && burnin_frac < 1.0)) throw ConfigError("run.burnin_frac", "must lie in [0, 1)");
    if (replicas < 1) throw ConfigError("run.replicas", "must be >= 1");
    if (!(x0 >= 0.0)) throw ConfigError("run.x0", "must be >= 0");
    if (!(solver.tol > 0.0)) throw ConfigError("solver.tol", "must be > 0");
    if (solver.max_iter < 2) throw ConfigError("solver.max_iter", "must be >= 2");
    if (solver.grid.nodes && *solver.grid.nodes < 64) throw ConfigError("solver.nodes", "must be >= 64");
    if (solver.grid.y_min && !(*solver.grid.y_min > 0.0)) throw ConfigError("solver.ymin", "must be > 0");
    if (solver.grid.y_min && solver.grid.y_max && !(*solver.grid.y_max > *solver.grid.y_min))
        throw ConfigError("solver.ymax", "must exceed solver.ymin");
}

PopulationSpec Scenario::population() const {
    PopulationSpec p;
    p.sys = sys;
    p.influencers = influencers;
    p.horizon = horizon;
    p.burnin_frac = burnin_frac;
    p.seed = seed;
    p.opts = SimulationOptions{x0, split};
    return p;
}

Scenario baseline_scenario() {
    Scenario s;
    for (int i = 0; i < 5; ++i) {
        InfluencerParams p;
        p.beta = std::pow(0.9, i);
        s.influencers.push_back(p);
    }
    return s;
}

Scenario scenario_from_json(const json& j) {
    check_keys(j, "", {"system", "influencers", "run", "solver"});
    Scenario s;
    if (j.contains("system")) {
        const json& o = j.at("system");
        check_keys(o, "system", {"gamma", "theta", "epsilon", "mu", "w_mean", "w_cv"});
        s.sys.gamma = number(o, "gamma", "system.gamma", s.sys.gamma);
        s.sys.theta = number(o, "theta", "system.theta", s.sys.theta);
        s.sys.epsilon = number(o, "epsilon", "system.epsilon", s.sys.epsilon);
        s.sys.mu = number(o, "mu", "system.mu", s.sys.mu);
        const double w_mean = number(o, "w_mean", "system.w_mean", 1.0);
        const double w_cv = number(o, "w_cv", "system.w_cv", 1.0);
        rethrow_as("system.w_mean", [&] { s.sys.w_dist = JumpDistribution::lognormal_from_moments(w_mean, w_cv); });
    }
    if (!j.contains("influencers")) throw ConfigError("influencers", "missing");
    const json& arr = j.at("influencers");
    if (!arr.is_array() || arr.empty()) throw ConfigError("influencers", "expected a nonempty array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string where = "influencers[" + std::to_string(i) + "]";
        const json& o = arr[i];
        check_keys(o, where, {"beta", "lambda0", "lambda1", "phi", "cv", "v_family"});
        InfluencerParams p;
        p.beta = number(o, "beta", where + ".beta", p.beta);
        p.lambda0 = number(o, "lambda0", where + ".lambda0", p.lambda0);
        p.lambda1 = number(o, "lambda1", where + ".lambda1", p.lambda1);
        p.phi = number(o, "phi", where + ".phi", p.phi);
        p.cv = number(o, "cv", where + ".cv", p.cv);
        const std::string fam = text(o, "v_family", where + ".v_family", "lognormal");
        rethrow_as(where + ".v_family", [&] { p.v_family = family_from_string(fam); });
        s.influencers.push_back(p);
    }
    if (j.contains("run")) {
        const json& o = j.at("run");
        check_keys(o, "run", {"horizon_days", "burnin_frac", "replicas", "seed", "x0", "split", "output_dir"});
        s.horizon = number(o, "horizon_days", "run.horizon_days", s.horizon);
        s.burnin_frac = number(o, "burnin_frac", "run.burnin_frac", s.burnin_frac);
        s.replicas = unsigned_int(o, "replicas", "run.replicas", s.replicas);
        s.seed = unsigned_int(o, "seed", "run.seed", s.seed);
        s.x0 = number(o, "x0", "run.x0", s.x0);
        const std::string split = text(o, "split", "run.split", "jump_instant");
        if (split == "jump_instant") s.split = SplitState::JumpInstant;
        else if (split == "interval_start") s.split = SplitState::IntervalStart;
        else throw ConfigError("run.split", "expected jump_instant or interval_start");
        s.output_dir = text(o, "output_dir", "run.output_dir", s.output_dir);
    }
    if (j.contains("solver")) {
        const json& o = j.at("solver");
        check_keys(o, "solver", {"ymin", "ymax", "nodes", "tol", "max_iter"});
        if (o.contains("ymin") && !o.at("ymin").is_null()) s.solver.grid.y_min = number(o, "ymin", "solver.ymin", 0.0);
        if (o.contains("ymax") && !o.at("ymax").is_null()) s.solver.grid.y_max = number(o, "ymax", "solver.ymax", 0.0);
        if (o.contains("nodes") && !o.at("nodes").is_null())
            s.solver.grid.nodes = static_cast<std::size_t>(unsigned_int(o, "nodes", "solver.nodes", 0));
        s.solver.tol = number(o, "tol", "solver.tol", s.solver.tol);
        s.solver.max_iter = static_cast<std::size_t>(unsigned_int(o, "max_iter", "solver.max_iter", s.solver.max_iter));
    }
    s.validate();
    return s;
}

json scenario_to_json(const Scenario& s) {
    json j;
    j["system"] = {{"gamma", s.sys.gamma},
                   {"theta", s.sys.theta},
                   {"epsilon", s.sys.epsilon},
                   {"mu", s.sys.mu},
                   {"w_mean", s.sys.w_dist.mean()},
                   {"w_cv", s.sys.w_dist.cv()}};
    j["influencers"] = json::array();
    for (const auto& p : s.influencers)
        j["influencers"].push_back({{"beta", p.beta},
                                    {"lambda0", p.lambda0},
                                    {"lambda1", p.lambda1},
                                    {"phi", p.phi},
                                    {"cv", p.cv},
                                    {"v_family", std::string(to_string(p.v_family))}});
    j["run"] = {{"horizon_days", s.horizon},
                {"burnin_frac", s.burnin_frac},
                {"replicas", s.replicas},
                {"seed", s.seed},
                {"x0", s.x0},
                {"split", s.split == SplitState::JumpInstant ? "jump_instant" : "interval_start"},
                {"output_dir", s.output_dir}};
    json solver = {{"tol", s.solver.tol}, {"max_iter", s.solver.max_iter}};
    solver["ymin"] = s.solver.grid.y_min ? json(*s.solver.grid.y_min) : json(nullptr);
    solver["ymax"] = s.solver.grid.y_max ? json(*s.solver.grid.y_max) : json(nullptr);
    solver["nodes"] = s.solver.grid.nodes ? json(*s.solver.grid.nodes) : json(nullptr);
    j["solver"] = solver;
    return j;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("<file>", std::string("not valid JSON: ") + e.what());
    }
    return scenario_from_json(j);
}

std::string config_hash(const Scenario& s) {
    // The output directory does not change results.
    json j = scenario_to_json(s);
    j["run"].erase("output_dir");
    const std::string text = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void set_parameter(Scenario& s, const std::string& path, double value) {
    static const std::regex indexed(R"(influencers\[(\d+)\]\.(\w+))");
    std::smatch m;
    if (path.rfind("system.", 0) == 0) {
        const std::string f = path.substr(7);
        if (f == "gamma") s.sys.gamma = value;
        else if (f == "theta") s.sys.theta = value;
        else if (f == "epsilon") s.sys.epsilon = value;
        else if (f == "mu") s.sys.mu = value;
        else throw ConfigError(path, "unknown system parameter");
    } else if (path.rfind("shared.", 0) == 0) {
        for (auto& p : s.influencers) influencer_field(p, path.substr(7), path) = value;
    } else if (std::regex_match(path, m, indexed)) {
        const auto i = static_cast<std::size_t>(std::stoul(m[1].str()));
        if (i >= s.influencers.size()) throw ConfigError(path, "influencer index out of range");
        influencer_field(s.influencers[i], m[2].str(), path) = value;
    } else if (path == "run.horizon_days") {
        s.horizon = value;
    } else if (path == "run.burnin_frac") {
        s.burnin_frac = value;
    } else {
        throw ConfigError(path, "unknown parameter path");
    }
    s.validate();
}

} // namespace popdyn
