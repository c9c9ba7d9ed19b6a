#pragma once

#include "popdyn/simulator.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace popdyn {

struct PostRecord {
    double timestamp{0.0}; ///< days
    double likes{0.0};
};

struct PostDataset {
    std::string influencer_id;
    std::vector<PostRecord> posts;
    std::optional<std::string> topic;

    /// Throws on negative likes or timestamps out of order.
    void validate() const;
};

/// Internal events of a simulated log as posts (likes = jump sizes).
[[nodiscard]] PostDataset posts_from_log(const EventLog& log, std::string id = {});

/// Reads influencer_id,timestamp,likes rows (optional header). Timestamps are day numbers or
/// ISO-8601 date-times, converted to days since the Unix epoch. Datasets keep first-seen order.
[[nodiscard]] std::vector<PostDataset> read_posts_csv(const std::string& path);
[[nodiscard]] double parse_timestamp_days(const std::string& text);

/// X(t_k-) for every post from a zero initial condition, exogenous jumps ignored.
[[nodiscard]] std::vector<double> reconstruct_popularity(const PostDataset& ds, double gamma);

struct NormalizedSeries {
    std::vector<double> x;
    std::vector<double> v;
};

/// Each series divided by its own maximum.
[[nodiscard]] NormalizedSeries normalize_series(std::span<const double> x, std::span<const double> v);

struct ConditionalBin {
    double lo{0.0};
    double hi{0.0};
    std::size_t count{0};
    std::optional<double> mean; ///< empty for an empty bin
};

/// Equal-width bins on [0, 1]; mean of v given x in each bin.
[[nodiscard]] std::vector<ConditionalBin> binned_conditional_mean(std::span<const double> x,
                                                                  std::span<const double> v, std::size_t n_bins = 10);

struct Residuals {
    std::vector<double> values;
    std::size_t skipped_zero_state{0}; ///< posts with X(t-) = 0 while theta > 0
    std::size_t skipped_zero_likes{0}; ///< posts with no likes (nonpositive residual)
};

/// likes_k / X(t_k-)^theta with epsilon neglected.
[[nodiscard]] Residuals compute_residuals(const PostDataset& ds, double gamma, double theta);

inline constexpr std::size_t kMinFitSamples = 30;

struct FitResult {
    Family family{Family::LogNormal};
    JumpDistribution dist{PointMass{1.0}};
    double beta_hat{0.0}; ///< mean of the fitted law
    double cv_hat{0.0};
    double log_likelihood{0.0};
    double kappa{1.0}; ///< Kolmogorov distance to the empirical residual CDF
    std::size_t n{0};
};

/// Maximum-likelihood fit of one family (lognormal, exponential or power-law).
[[nodiscard]] FitResult mle_fit(std::span<const double> residuals, Family family);

struct FamilySelection {
    std::vector<FitResult> fits; ///< one per family that could be fitted
    std::size_t best{0};         ///< index of the smallest kappa

    [[nodiscard]] const FitResult& chosen() const { return fits.at(best); }
};

/// Fits every family by likelihood and picks the one closest in Kolmogorov distance.
[[nodiscard]] FamilySelection select_family(std::span<const double> residuals,
                                            std::span<const Family> families = {});

/// Exact sup |F_n - F| over the sample, checking both sides of every jump of F_n.
/// cdf_left gives F(x-); it defaults to cdf (continuous F).
[[nodiscard]] double kolmogorov_distance(std::span<const double> sample, const std::function<double(double)>& cdf,
                                         const std::function<double(double)>& cdf_left = {});
[[nodiscard]] double kolmogorov_distance(std::span<const double> sample, const JumpDistribution& dist);

struct KappaCell {
    double gamma{0.0};
    double theta{0.0};
    double kappa_sum{0.0};
    std::size_t failed{0}; ///< datasets without enough residuals, each counted as kappa = 1
};

struct GridSearchResult {
    double gamma_star{0.0};
    double theta_star{0.0};
    double kappa_star{0.0};
    std::vector<KappaCell> surface; ///< gamma-major order
};

/// Minimizes the summed best-family Kolmogorov distance over a (gamma, theta) grid.
/// Per-cell sums are taken over sorted terms, so the result does not depend on dataset order.
[[nodiscard]] GridSearchResult grid_search_system_params(std::span<const PostDataset> datasets,
                                                         std::span<const double> gamma_grid,
                                                         std::span<const double> theta_grid);

/// Variance / mean of post counts in windows tiled from the first post (unbiased variance;
/// partial trailing window dropped). Empty when the mean count is zero.
[[nodiscard]] std::optional<double> dispersion_index(const PostDataset& ds, double window_days = 7.0);

struct RateBin {
    double lo{0.0};
    double hi{0.0};
    std::size_t count{0};
    double mean_x{0.0};         ///< mean normalized popularity of the samples
    std::optional<double> rate; ///< 1 / mean next inter-post time; empty below the sample floor
};

struct IntensityFit {
    double lambda0{0.0};
    double lambda1{0.0}; ///< on the raw popularity scale
    double lambda1_normalized{0.0};
    double phi{0.0};
    double sse{0.0};
};

struct PostingIntensityEstimate {
    std::vector<RateBin> bins;
    double x_scale{0.0}; ///< popularity that maps to 1
    std::optional<IntensityFit> fit;
};

/// Posting rate against normalized popularity just after each post, and a fit of
/// lambda0 + lambda1 x^phi with phi in {0, 0.1, ..., 1} and nonnegative coefficients.
[[nodiscard]] PostingIntensityEstimate estimate_posting_intensity(const PostDataset& ds, double gamma,
                                                                  std::size_t n_bins = 10,
                                                                  std::size_t min_samples = 10);

struct InfluencerCalibration {
    std::string influencer_id;
    std::size_t n_posts{0};
    std::size_t n_residuals{0};
    std::size_t skipped_zero_state{0};
    std::size_t skipped_zero_likes{0};
    std::optional<FamilySelection> selection; ///< empty when too few residuals
    std::string error;
    std::optional<double> dispersion;
    PostingIntensityEstimate intensity;
};

struct CalibrationReport {
    GridSearchResult grid;
    std::vector<InfluencerCalibration> influencers;
};

/// Grid search for (gamma, theta), then per-influencer family fits at the optimum.
[[nodiscard]] CalibrationReport calibrate(std::span<const PostDataset> datasets, std::span<const double> gamma_grid,
                                          std::span<const double> theta_grid);

} // namespace popdyn
