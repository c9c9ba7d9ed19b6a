#pragma once

#include "popdyn/distributions.hpp"

#include <optional>
#include <string>

namespace popdyn {

/// Constants shared by every influencer on a topic.
struct SystemParams {
    double gamma{1.0 / 64.0}; ///< popularity decay rate [1/day]
    double theta{0.6};        ///< exponent of the popularity dependence of jump means
    double epsilon{0.01};     ///< floor of the conditional jump mean; keeps zero non-absorbing
    double mu{0.0};           ///< exogenous event rate [events/day]
    /// Exogenous jump law W; inert while mu == 0.
    JumpDistribution w_dist{JumpDistribution::lognormal_from_moments(1.0, 1.0)};

    void validate() const;
};

struct InfluencerParams {
    double beta{1.0};    ///< mean jump scale
    double lambda0{4.0}; ///< constant posting rate [posts/day]
    double lambda1{0.0}; ///< state-dependent posting scale
    double phi{0.0};     ///< posting-rate exponent
    double cv{4.0};      ///< coefficient of variation of the unit-mean multiplier
    Family v_family{Family::LogNormal};

    void validate() const;
};

/// x^e with the convention x^0 = 1, including x = 0.
[[nodiscard]] double pow0(double x, double e);

/// The unit-mean multiplier of an influencer's jumps.
[[nodiscard]] JumpDistribution unit_jump(const InfluencerParams& inf);

/// epsilon + beta x^theta
[[nodiscard]] double conditional_jump_mean(double x, const SystemParams& sys, const InfluencerParams& inf);

/// lambda0 + lambda1 x^phi
[[nodiscard]] double posting_intensity(double x, const InfluencerParams& inf);

/// Draws V = (epsilon + beta x^theta) * V_hat.
[[nodiscard]] double sample_jump(double x, const SystemParams& sys, const InfluencerParams& inf, Rng& rng);

/// Root of gamma x = lambda(x) m(x) + mu E[W], the level where mean drift vanishes.
/// Empty when no finite root exists (theta + phi >= 1 with dominant jumps).
[[nodiscard]] std::optional<double> drift_balance_level(const SystemParams& sys, const InfluencerParams& inf);

enum class ErgodicityStatus { SufficientStrict, SufficientBoundary, NotGuaranteed };

[[nodiscard]] std::string_view to_string(ErgodicityStatus status);

struct ErgodicityVerdict {
    ErgodicityStatus status{ErgodicityStatus::NotGuaranteed};
    double theta_plus_phi{0.0};
    // Boundary case only: drift constant c, ratio c / beta and where c was evaluated.
    std::optional<double> drift_constant;
    std::optional<double> margin;
    std::optional<double> reference_state;
    double alpha{2.0};
    std::string detail;
};

/// Sufficient condition for a unique stationary law of the jump chain.
/// The boundary case theta + phi == 1 is a heuristic check: the drift constant is evaluated
/// at alpha = 2 and at the theta = 0 stationary mean lambda0 (epsilon + beta) / gamma.
[[nodiscard]] ErgodicityVerdict check_ergodicity(const SystemParams& sys, const InfluencerParams& inf);

} // namespace popdyn
