#include "popdyn/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace popdyn {

namespace {

// theta + phi within this distance of 1 is treated as the boundary case.
constexpr double kBoundaryTol = 1e-12;

} // namespace

void SystemParams::validate() const {
    if (!(gamma > 0.0)) throw std::invalid_argument("system.gamma must be > 0");
    if (!(theta >= 0.0)) throw std::invalid_argument("system.theta must be >= 0");
    if (!(epsilon > 0.0)) throw std::invalid_argument("system.epsilon must be > 0");
    if (!(mu >= 0.0)) throw std::invalid_argument("system.mu must be >= 0");
}

void InfluencerParams::validate() const {
    if (!(beta > 0.0)) throw std::invalid_argument("influencer.beta must be > 0");
    if (!(lambda0 >= 0.0) || !(lambda1 >= 0.0)) throw std::invalid_argument("influencer posting rates must be >= 0");
    if (!(lambda0 + lambda1 > 0.0)) throw std::invalid_argument("influencer must post: lambda0 + lambda1 > 0");
    if (!(phi >= 0.0)) throw std::invalid_argument("influencer.phi must be >= 0");
    if (v_family != Family::Deterministic && !(cv > 0.0)) throw std::invalid_argument("influencer.cv must be > 0");
}

double pow0(double x, double e) { return e == 0.0 ? 1.0 : std::pow(x, e); }

JumpDistribution unit_jump(const InfluencerParams& inf) { return unit_mean_params(inf.v_family, inf.cv).dist; }

double conditional_jump_mean(double x, const SystemParams& sys, const InfluencerParams& inf) {
    return sys.epsilon + inf.beta * pow0(x, sys.theta);
}

double posting_intensity(double x, const InfluencerParams& inf) { return inf.lambda0 + inf.lambda1 * pow0(x, inf.phi); }

double sample_jump(double x, const SystemParams& sys, const InfluencerParams& inf, Rng& rng) {
    return conditional_jump_mean(x, sys, inf) * unit_jump(inf).sample(rng);
}

std::optional<double> drift_balance_level(const SystemParams& sys, const InfluencerParams& inf) {
    const double exo = sys.mu > 0.0 ? sys.mu * sys.w_dist.mean() : 0.0;
    // excess(x) = inflow - decay; positive at 0, root where it turns negative.
    auto excess = [&](double x) {
        return posting_intensity(x, inf) * conditional_jump_mean(x, sys, inf) + exo - sys.gamma * x;
    };
    if (excess(0.0) <= 0.0) return 0.0;
    double lo = 0.0;
    double hi = 1.0;
    while (excess(hi) > 0.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e300) return std::nullopt;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (excess(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

std::string_view to_string(ErgodicityStatus status) {
    switch (status) {
    case ErgodicityStatus::SufficientStrict: return "SufficientStrict";
    case ErgodicityStatus::SufficientBoundary: return "SufficientBoundary";
    case ErgodicityStatus::NotGuaranteed: return "NotGuaranteed";
    }
    return "unknown";
}

ErgodicityVerdict check_ergodicity(const SystemParams& sys, const InfluencerParams& inf) {
    ErgodicityVerdict v;
    v.theta_plus_phi = sys.theta + inf.phi;
    std::ostringstream detail;
    detail << "theta + phi = " << v.theta_plus_phi;

    if (v.theta_plus_phi < 1.0 - kBoundaryTol) {
        v.status = ErgodicityStatus::SufficientStrict;
        detail << " < 1";
    } else if (v.theta_plus_phi <= 1.0 + kBoundaryTol) {
        // c = gamma / (lambda0 + lambda1 + gamma) * alpha^-phi * F_Z((alpha - 1) x | x)
        const double x_ref = inf.lambda0 * (sys.epsilon + inf.beta) / sys.gamma;
        const double lam = posting_intensity(x_ref, inf);
        const double total = lam + sys.mu;
        const double z = (v.alpha - 1.0) * x_ref;
        double fz = 0.0;
        if (total > 0.0) {
            const double fv = unit_jump(inf).cdf(z / conditional_jump_mean(x_ref, sys, inf));
            const double fw = sys.mu > 0.0 ? sys.w_dist.cdf(z) : 0.0;
            fz = (lam * fv + sys.mu * fw) / total;
        }
        const double c = sys.gamma / (inf.lambda0 + inf.lambda1 + sys.gamma) * std::pow(v.alpha, -inf.phi) * fz;
        v.drift_constant = c;
        v.margin = c / inf.beta;
        v.reference_state = x_ref;
        v.status = *v.margin > 1.0 ? ErgodicityStatus::SufficientBoundary : ErgodicityStatus::NotGuaranteed;
        detail << " == 1; heuristic sufficient check: c/beta = " << *v.margin << " at alpha = " << v.alpha
               << ", x = " << x_ref;
    } else {
        v.status = ErgodicityStatus::NotGuaranteed;
        detail << " > 1";
    }
    if (inf.lambda0 <= 0.0) detail << "; note: the sufficient condition assumes lambda0 > 0";
    v.detail = detail.str();
    return v;
}

} // namespace popdyn
