#pragma once

#include "popdyn/simulator.hpp"
#include "popdyn/solver.hpp"

#include <json.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace popdyn {

struct SolverConfig {
    GridSpec grid;
    double tol{1e-10};
    std::size_t max_iter{100};
};

struct Scenario {
    SystemParams sys;
    std::vector<InfluencerParams> influencers;
    double horizon{2e5};
    double burnin_frac{0.2};
    std::size_t replicas{1};
    std::uint64_t seed{1};
    double x0{0.0};
    SplitState split{SplitState::JumpInstant};
    SolverConfig solver;
    std::string output_dir{"out"};

    /// Throws ConfigError naming the first bad field.
    void validate() const;
    [[nodiscard]] PopulationSpec population() const;
};

/// Invalid configuration; key() is the dotted path of the offending entry.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string key, const std::string& message)
        : std::invalid_argument(key + ": " + message), key_(std::move(key)) {}
    [[nodiscard]] const std::string& key() const { return key_; }

private:
    std::string key_;
};

/// Five influencers with beta = 0.9^(i-1), gamma = 1/64, theta = 0.6, lambda0 = 4, cv = 4.
[[nodiscard]] Scenario baseline_scenario();

[[nodiscard]] Scenario scenario_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json scenario_to_json(const Scenario& s);
[[nodiscard]] Scenario load_scenario(const std::string& path);

/// FNV-1a of the canonical JSON form, as 16 hex digits.
[[nodiscard]] std::string config_hash(const Scenario& s);

/// Sets a parameter by path: system.<field>, shared.<field> (every influencer),
/// influencers[i].<field> or run.<field>.
void set_parameter(Scenario& s, const std::string& path, double value);

} // namespace popdyn
