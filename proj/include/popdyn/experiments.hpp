#pragma once

#include "popdyn/config.hpp"

#include <optional>
#include <string>
#include <vector>

namespace popdyn {

struct InfluencerMetrics {
    double first_place_probability{0.0};
    std::optional<double> average_stay; ///< empty when the influencer never leads
    std::size_t stays{0};
    double lead_time{0.0};
    double posting_rate{0.0};   ///< posts per day in the window
    double exogenous_rate{0.0}; ///< exogenous jumps per day in the window
    double mean_popularity{0.0}; ///< time average of X in the window
    ErgodicityVerdict ergodicity;
    std::string jump_note; ///< set when the requested cv was not honoured
    std::optional<OccupationHistogram> occupation;
    std::optional<StationarySolution> stationary;
    std::optional<double> ks; ///< occupation CDF vs stationary CDF
    std::string solver_error;
};

struct MetricsReport {
    std::string config_hash;
    std::uint64_t seed{0};
    std::size_t replicas{0};
    double horizon{0.0};
    double burn_in{0.0};
    double window_total{0.0}; ///< summed over replicas
    std::vector<InfluencerMetrics> influencers;
    std::vector<std::string> warnings;

    [[nodiscard]] double first_place_sum() const;
};

struct RunOptions {
    bool occupation{false}; ///< occupation histograms on each influencer's solver grid
    bool solve{false};      ///< stationary solution per influencer plus KS against the histogram
};

/// Solver grid of one influencer from the scenario's solver section.
[[nodiscard]] Grid scenario_grid(const Scenario& s, std::size_t influencer);

/// Simulates all replicas and reduces the metrics. Deterministic per (config, seed).
[[nodiscard]] MetricsReport run_scenario(const Scenario& s, const RunOptions& opts = {});

struct SweepRow {
    double value{0.0};
    std::size_t influencer{0};
    std::optional<InfluencerMetrics> metrics;
    std::string error; ///< nonempty when the cell failed
};

/// One run per value with a seed derived from (scenario seed, value index).
[[nodiscard]] std::vector<SweepRow> sweep(const Scenario& base, const std::string& path,
                                          const std::vector<double>& values);

struct AdaptOptions {
    double target_rate{4.0};
    double tolerance{0.05};
    double horizon{1e6}; ///< days per rate evaluation; the rate noise must sit well below tolerance
    double burnin_frac{0.2};
    std::uint64_t seed{1};
    double lambda1_max{1e6};
    double rel_width{1e-3}; ///< bisection stops once the bracket is this narrow relative to its top
    std::size_t max_iter{60};
};

struct AdaptResult {
    double lambda1{0.0};
    double rate{0.0};
    std::size_t evaluations{0};
};

/// Long-run posts per day of a single influencer, after burn-in.
[[nodiscard]] double simulated_posting_rate(const SystemParams& sys, const InfluencerParams& inf, double horizon,
                                            double burnin_frac, std::uint64_t seed);

/// lambda1 giving the target mean posting rate, by bisection on the simulated rate
/// (common random numbers across candidates). phi = 0 is solved exactly.
[[nodiscard]] AdaptResult adapt_lambda1(const SystemParams& sys, InfluencerParams inf, const AdaptOptions& opts = {});

struct Table3Column {
    double phi{0.0};
    std::vector<double> lambda1;
    std::vector<double> rate;
    std::vector<double> first_place;
};

struct Table3Options {
    std::vector<double> phis{0.0, 0.1, 0.2, 0.3};
    double lambda0{1.0};
    AdaptOptions adapt;
};

/// For each phi: set lambda0, adapt lambda1 per influencer and record first-place probabilities.
[[nodiscard]] std::vector<Table3Column> table3_experiment(const Scenario& base, const Table3Options& opts = {});

struct ValidationEntry {
    std::optional<double> ks;
    bool passed{false};
    std::string error;
    std::optional<SolverDiagnostics> diagnostics;
};

struct ValidationReport {
    double threshold{0.03};
    std::vector<ValidationEntry> entries;
    MetricsReport metrics;

    [[nodiscard]] bool passed() const;
};

/// Occupation CDF from simulation against the stationary solver, per influencer.
[[nodiscard]] ValidationReport validate_scenario(const Scenario& s, double threshold = 0.03);

} // namespace popdyn
