#include "popdyn/model.hpp"

#include <doctest.h>

#include <boost/math/distributions/lognormal.hpp>

#include <cmath>
#include <limits>
#include <vector>

using namespace popdyn;

namespace {

double sample_mean(const JumpDistribution& d, std::size_t n, Rng& rng, double* cv = nullptr) {
    double s = 0.0, s2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double x = d.sample(rng);
        s += x;
        s2 += x * x;
    }
    const double m = s / n;
    if (cv) *cv = std::sqrt(s2 / n - m * m) / m;
    return m;
}

} // namespace

TEST_CASE("derive_seed separates streams and is stable") {
    CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
    CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 2));
    CHECK(derive_seed(1, 0, 0) != derive_seed(2, 0, 0));
}

TEST_CASE("unit-mean multipliers have mean one and the requested cv") {
    for (double cv : {0.3, 1.0, 4.0}) {
        const auto ln = unit_mean_params(Family::LogNormal, cv);
        CHECK(ln.dist.mean() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(ln.dist.cv() == doctest::Approx(cv).epsilon(1e-12));
        CHECK_FALSE(ln.cv_overridden);
    }
    const auto ex = unit_mean_params(Family::Exponential, 1.0);
    CHECK(ex.dist.mean() == doctest::Approx(1.0));
    CHECK(ex.dist.cv() == doctest::Approx(1.0));

    const auto forced = unit_mean_params(Family::Exponential, 4.0);
    CHECK(forced.cv_overridden);
    CHECK_FALSE(forced.note.empty());
    CHECK_THROWS_AS((void)unit_mean_params(Family::Exponential, 4.0, true), std::invalid_argument);

    const auto pl = unit_mean_params(Family::PowerLaw, 0.5);
    CHECK(pl.dist.mean() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pl.dist.cv() == doctest::Approx(0.5).epsilon(1e-10));

    const auto det = unit_mean_params(Family::Deterministic, 0.0);
    CHECK(det.dist.atom().value() == 1.0);
}

TEST_CASE("sampled moments agree with the analytic ones") {
    Rng rng(11);
    double cv = 0.0;
    const auto ln = unit_mean_params(Family::LogNormal, 0.5).dist;
    CHECK(sample_mean(ln, 400000, rng, &cv) == doctest::Approx(1.0).epsilon(0.005));
    CHECK(cv == doctest::Approx(0.5).epsilon(0.02));
    const auto pl = unit_mean_params(Family::PowerLaw, 0.4).dist;
    CHECK(sample_mean(pl, 400000, rng, &cv) == doctest::Approx(1.0).epsilon(0.005));
    CHECK(cv == doctest::Approx(0.4).epsilon(0.05));
    const auto ex = unit_mean_params(Family::Exponential, 1.0).dist;
    CHECK(sample_mean(ex, 400000, rng, &cv) == doctest::Approx(1.0).epsilon(0.005));
}

TEST_CASE("lognormal cdf matches an independent implementation") {
    const auto d = JumpDistribution::lognormal_from_moments(2.5, 1.7);
    const auto& p = std::get<LogNormal>(d.params());
    const boost::math::lognormal_distribution<double> ref(p.log_mean, p.log_sd);
    for (double w : {0.01, 0.3, 1.0, 2.5, 9.0, 80.0}) {
        CHECK(d.cdf(w) == doctest::Approx(boost::math::cdf(ref, w)).epsilon(1e-12));
        CHECK(d.log_pdf(w) == doctest::Approx(std::log(boost::math::pdf(ref, w))).epsilon(1e-10));
        CHECK(d.cdf(w) + d.ccdf(w) == doctest::Approx(1.0));
    }
    CHECK(d.cdf(0.0) == 0.0);
    CHECK(d.cdf(-1.0) == 0.0);
}

TEST_CASE("pareto and point-mass laws") {
    const JumpDistribution p(Pareto{3.0, 2.0});
    CHECK(p.ccdf(4.0) == doctest::Approx(0.125));
    CHECK(p.cdf(1.0) == 0.0);
    CHECK(p.mean() == doctest::Approx(3.0));
    CHECK(std::isinf(JumpDistribution(Pareto{1.5, 1.0}).cv()));

    const JumpDistribution a(PointMass{2.0});
    CHECK(a.cdf(2.0) == 1.0);
    CHECK(a.cdf_left(2.0) == 0.0);
    CHECK(a.cdf(1.999) == 0.0);
    CHECK(a.cv() == 0.0);
}

TEST_CASE("pow0 treats x^0 as one, including at zero") {
    CHECK(pow0(0.0, 0.0) == 1.0);
    CHECK(pow0(0.0, 0.5) == 0.0);
    CHECK(pow0(4.0, 0.5) == doctest::Approx(2.0));
}

TEST_CASE("conditional jump mean and posting intensity") {
    SystemParams sys;
    sys.theta = 0.5;
    sys.epsilon = 0.1;
    InfluencerParams inf;
    inf.beta = 2.0;
    inf.lambda0 = 1.0;
    inf.lambda1 = 0.5;
    inf.phi = 0.5;
    CHECK(conditional_jump_mean(9.0, sys, inf) == doctest::Approx(6.1));
    CHECK(conditional_jump_mean(0.0, sys, inf) == doctest::Approx(0.1));
    CHECK(posting_intensity(16.0, inf) == doctest::Approx(3.0));
    inf.phi = 0.0;
    CHECK(posting_intensity(0.0, inf) == doctest::Approx(1.5));
}

TEST_CASE("sample_jump scales the multiplier by the conditional mean") {
    SystemParams sys;
    InfluencerParams inf;
    inf.cv = 0.5;
    Rng rng(5);
    double s = 0.0;
    const int n = 200000;
    for (int k = 0; k < n; ++k) s += sample_jump(1000.0, sys, inf, rng);
    CHECK(s / n == doctest::Approx(conditional_jump_mean(1000.0, sys, inf)).epsilon(0.01));
}

TEST_CASE("drift balance level solves the mean-drift equation") {
    SystemParams sys;
    sys.mu = 0.5;
    for (double theta : {0.0, 0.3, 0.6, 0.9}) {
        sys.theta = theta;
        InfluencerParams inf;
        inf.lambda1 = 0.2;
        inf.phi = 0.05;
        const auto x = drift_balance_level(sys, inf);
        REQUIRE(x.has_value());
        const double rhs = posting_intensity(*x, inf) * conditional_jump_mean(*x, sys, inf) + sys.mu * sys.w_dist.mean();
        CHECK(sys.gamma * *x == doctest::Approx(rhs).epsilon(1e-9));
    }
    sys.theta = 0.9;
    InfluencerParams hot;
    hot.lambda1 = 1.0;
    hot.phi = 0.3;
    CHECK_FALSE(drift_balance_level(sys, hot).has_value());
}

TEST_CASE("ergodicity verdicts by exponent sum") {
    SystemParams sys;
    InfluencerParams inf;
    CHECK(check_ergodicity(sys, inf).status == ErgodicityStatus::SufficientStrict);
    sys.theta = 0.8;
    inf.phi = 0.3;
    inf.lambda1 = 1.0;
    CHECK(check_ergodicity(sys, inf).status == ErgodicityStatus::NotGuaranteed);
    inf.phi = 0.2;
    const auto b = check_ergodicity(sys, inf);
    CHECK(b.status != ErgodicityStatus::SufficientStrict);
    CHECK(b.drift_constant.has_value());
    CHECK(b.reference_state.has_value());
}

TEST_CASE("parameter validation rejects bad values") {
    SystemParams sys;
    sys.gamma = 0.0;
    CHECK_THROWS_AS(sys.validate(), std::invalid_argument);
    sys = SystemParams{};
    sys.epsilon = 0.0;
    CHECK_THROWS_AS(sys.validate(), std::invalid_argument);
    InfluencerParams inf;
    inf.beta = -1.0;
    CHECK_THROWS_AS(inf.validate(), std::invalid_argument);
    inf = InfluencerParams{};
    inf.lambda0 = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(inf.validate(), std::invalid_argument);
}
