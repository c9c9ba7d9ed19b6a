#include "popdyn/simulator.hpp"

#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace popdyn;

namespace {

// exp(-integral of the total jump intensity along the decaying path), by adaptive quadrature.
double survival_by_quadrature(double s, double z, const SystemParams& sys, const InfluencerParams& inf) {
    auto rate = [&](double u) { return posting_intensity(z * std::exp(-sys.gamma * u), inf) + sys.mu; };
    const double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(rate, 0.0, s, 15, 1e-13);
    return std::exp(-integral);
}

double max_survival_deviation(double z, const SystemParams& sys, const InfluencerParams& inf, std::size_t n,
                              std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> zeta(n);
    for (auto& v : zeta) v = sample_inter_jump(z, sys, inf, rng);
    std::sort(zeta.begin(), zeta.end());
    double dev = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double s = inter_jump_survival(zeta[k], z, sys, inf);
        // empirical survival just before and at the k-th order statistic
        dev = std::max({dev, std::abs(1.0 - double(k) / n - s), std::abs(1.0 - double(k + 1) / n - s)});
    }
    return dev;
}

} // namespace

TEST_CASE("closed-form survival matches quadrature of the intensity") {
    SystemParams sys;
    sys.gamma = 0.05;
    sys.mu = 0.3;
    InfluencerParams inf;
    inf.lambda0 = 0.7;
    for (double lambda1 : {0.0, 0.4, 2.0}) {
        for (double phi : {0.0, 0.25, 0.9}) {
            inf.lambda1 = lambda1;
            inf.phi = phi;
            for (double z : {0.0, 1.0, 300.0}) {
                for (double s : {0.01, 0.5, 3.0, 20.0}) {
                    CAPTURE(lambda1);
                    CAPTURE(phi);
                    CAPTURE(z);
                    CAPTURE(s);
                    CHECK(inter_jump_survival(s, z, sys, inf) ==
                          doctest::Approx(survival_by_quadrature(s, z, sys, inf)).epsilon(1e-9));
                }
            }
        }
    }
}

TEST_CASE("survival is one at zero and nonincreasing") {
    SystemParams sys;
    InfluencerParams inf;
    inf.lambda1 = 0.5;
    inf.phi = 0.3;
    double prev = inter_jump_survival(0.0, 50.0, sys, inf);
    CHECK(prev == doctest::Approx(1.0));
    for (double s = 0.05; s < 10.0; s += 0.05) {
        const double cur = inter_jump_survival(s, 50.0, sys, inf);
        CHECK(cur <= prev + 1e-15);
        prev = cur;
    }
}

TEST_CASE("thinning sampler reproduces the survival function") {
    SystemParams sys;
    sys.mu = 0.2;
    InfluencerParams inf;
    inf.lambda0 = 1.0;
    inf.lambda1 = 0.8;
    inf.phi = 0.2;
    CHECK(max_survival_deviation(500.0, sys, inf, 40000, 3) < 0.015);
    CHECK(max_survival_deviation(0.0, sys, inf, 40000, 4) < 0.015);
}

TEST_CASE("without state-dependent posting the waiting time is exponential") {
    SystemParams sys;
    InfluencerParams inf;
    inf.lambda0 = 2.0;
    Rng rng(9);
    double s = 0.0;
    const int n = 200000;
    for (int k = 0; k < n; ++k) s += sample_inter_jump(1e4, sys, inf, rng);
    CHECK(s / n == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("a process that cannot jump never does") {
    SystemParams sys;
    InfluencerParams inf;
    inf.lambda0 = 0.0;
    inf.lambda1 = 1.0;
    inf.phi = 0.5;
    Rng rng(1);
    CHECK(std::isinf(sample_inter_jump(0.0, sys, inf, rng)));
}

TEST_CASE("event classification splits by intensity share") {
    SystemParams sys;
    sys.mu = 1.0;
    InfluencerParams inf;
    inf.lambda0 = 3.0;
    Rng rng(2);
    int ext = 0;
    const int n = 100000;
    for (int k = 0; k < n; ++k) ext += classify_event(10.0, sys, inf, rng) == EventKind::External;
    CHECK(double(ext) / n == doctest::Approx(0.25).epsilon(0.03));
    sys.mu = 0.0;
    for (int k = 0; k < 100; ++k) CHECK(classify_event(10.0, sys, inf, rng) == EventKind::Internal);
}

TEST_CASE("transition decays then jumps") {
    const Event e = apply_transition(2.0, 100.0, 3.0, EventKind::Internal, 5.0, 0.1);
    CHECK(e.time == doctest::Approx(5.0));
    CHECK(e.x_before == doctest::Approx(100.0 * std::exp(-0.3)));
    CHECK(e.x_after == doctest::Approx(e.x_before + 5.0));
}

TEST_CASE("trajectories are consistent and reproducible") {
    SystemParams sys;
    sys.mu = 0.5;
    InfluencerParams inf;
    inf.lambda1 = 0.1;
    inf.phi = 0.2;
    const EventLog a = simulate_trajectory(sys, inf, 2000.0, 77);
    const EventLog b = simulate_trajectory(sys, inf, 2000.0, 77);
    REQUIRE(a.events.size() == b.events.size());
    REQUIRE(a.events.size() > 1000);
    double t = 0.0, x = 0.0;
    std::size_t ext = 0;
    for (std::size_t k = 0; k < a.events.size(); ++k) {
        const Event& e = a.events[k];
        CHECK(e.time == b.events[k].time);
        CHECK(e.x_after == b.events[k].x_after);
        CHECK(e.time >= t);
        CHECK(e.time <= 2000.0);
        CHECK(e.x_before == doctest::Approx(x * std::exp(-sys.gamma * (e.time - t))).epsilon(1e-12));
        CHECK(e.x_after == e.x_before + e.jump);
        CHECK(e.jump > 0.0);
        ext += e.kind == EventKind::External;
        t = e.time;
        x = e.x_after;
    }
    CHECK(ext > 0);
    const EventLog c = simulate_trajectory(sys, inf, 2000.0, 78);
    CHECK(c.events.front().time != a.events.front().time);
}

TEST_CASE("interval-start split runs and keeps the state consistent") {
    SystemParams sys;
    sys.mu = 1.0;
    InfluencerParams inf;
    const EventLog log = simulate_trajectory(sys, inf, 500.0, 4, SimulationOptions{10.0, SplitState::IntervalStart});
    REQUIRE(!log.events.empty());
    CHECK(log.events.front().x_before == doctest::Approx(10.0 * std::exp(-sys.gamma * log.events.front().time)));
}

TEST_CASE("leadership on a hand-built path") {
    LeadershipTracker tr(2, 0.1, 0.0, 10.0);
    tr.update(1.0, 0, 5.0);
    tr.update(3.0, 1, 10.0);
    const LeadershipStats st = tr.finish();
    // ties at zero go to the lower index, so influencer 0 leads on [0, 3)
    CHECK(st.lead_time[0] == doctest::Approx(3.0));
    CHECK(st.lead_time[1] == doctest::Approx(7.0));
    CHECK(st.stays[0] == 1);
    CHECK(st.stays[1] == 1);
    CHECK(st.window == doctest::Approx(10.0));
    const auto stay = st.average_stay();
    CHECK(*stay[1] == doctest::Approx(7.0));
}

TEST_CASE("leadership changes and returns count separate stays") {
    LeadershipTracker tr(2, 0.0001, 2.0, 10.0);
    tr.update(1.0, 1, 1.0);
    tr.update(4.0, 0, 2.0);
    tr.update(6.0, 1, 5.0);
    const LeadershipStats st = tr.finish();
    CHECK(st.lead_time[0] == doctest::Approx(2.0));
    CHECK(st.lead_time[1] == doctest::Approx(6.0));
    CHECK(st.stays[0] == 1);
    CHECK(st.stays[1] == 2);
    CHECK(st.window == doctest::Approx(8.0));
}

TEST_CASE("single influencer always leads") {
    PopulationSpec spec;
    spec.influencers.resize(1);
    spec.horizon = 3000.0;
    const auto st = leadership(simulate_population(spec));
    CHECK(st.first_place_probability()[0] == doctest::Approx(1.0));
    CHECK(*st.average_stay()[0] == doctest::Approx(spec.horizon - spec.burn_in()));
}

TEST_CASE("first-place probabilities sum to one") {
    PopulationSpec spec;
    for (double b : {1.0, 0.9, 0.8, 0.7}) {
        InfluencerParams p;
        p.beta = b;
        spec.influencers.push_back(p);
    }
    spec.horizon = 20000.0;
    const auto pi = first_place_probability(simulate_population(spec));
    double s = 0.0;
    for (double p : pi) s += p;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("streaming replica agrees with stored trajectories") {
    PopulationSpec spec;
    spec.sys.mu = 0.3;
    for (double b : {1.0, 0.9, 0.8}) {
        InfluencerParams p;
        p.beta = b;
        p.lambda1 = 0.05;
        p.phi = 0.1;
        spec.influencers.push_back(p);
    }
    spec.horizon = 5000.0;
    spec.seed = 12;
    const auto jt = simulate_population(spec, 2);
    const auto batch = leadership(jt);
    const std::vector<double> edges = log_edges(1e3, 1e7, 200);
    const ReplicaStats rs = run_replica(spec, 2, {edges, edges, edges});
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(rs.lead.lead_time[i] == doctest::Approx(batch.lead_time[i]).epsilon(1e-12));
        CHECK(rs.lead.stays[i] == batch.stays[i]);
        std::size_t posts = 0;
        for (const auto& e : jt.logs[i].events) posts += e.time >= spec.burn_in() && e.kind == EventKind::Internal;
        CHECK(rs.posts[i] == posts);
        const auto h = occupation_pdf(jt.logs[i], spec.sys.gamma, edges, spec.burn_in());
        for (std::size_t k = 0; k < h.occupation.size(); ++k)
            CHECK(rs.occupation[i].occupation[k] == doctest::Approx(h.occupation[k]).epsilon(1e-9));
    }
}

TEST_CASE("decay segment spends log(b/a)/gamma days in a crossed bin") {
    const double gamma = 0.02;
    OccupationAccumulator acc({1.0, 2.0, 4.0, 8.0}, gamma);
    acc.add_decay(10.0, 200.0); // 10 e^{-4} < 1, so every bin is crossed
    const auto& h = acc.histogram();
    for (double days : h.occupation) CHECK(days == doctest::Approx(std::log(2.0) / gamma));
    CHECK(h.above == doctest::Approx(std::log(10.0 / 8.0) / gamma));
    CHECK(h.total() == doctest::Approx(200.0).epsilon(1e-12));
}

TEST_CASE("occupation histogram conserves time") {
    SystemParams sys;
    InfluencerParams inf;
    const EventLog log = simulate_trajectory(sys, inf, 10000.0, 31);
    const auto h = occupation_pdf(log, sys.gamma, log_edges(1e4, 5e6, 300), 1000.0);
    CHECK(std::abs(h.total() - 9000.0) / 9000.0 < 1e-9);
    const auto cdf = h.cdf_at_edges();
    CHECK(cdf.back() <= 1.0 + 1e-12);
    CHECK(std::is_sorted(cdf.begin(), cdf.end()));
}

TEST_CASE("state stays nonnegative over a million events") {
    SystemParams sys;
    sys.mu = 0.5;
    InfluencerParams inf;
    inf.lambda1 = 0.5;
    inf.phi = 0.3;
    InfluencerProcess proc(sys, inf, 101);
    double min_x = 1.0;
    for (int k = 0; k < 1000000; ++k) {
        const Event e = proc.next();
        min_x = std::min({min_x, e.x_before, e.x_after});
    }
    CHECK(min_x >= 0.0);
}
