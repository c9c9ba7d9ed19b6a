#include "popdyn/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace popdyn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double exogenous_probability(double x, const SystemParams& sys, const InfluencerParams& inf) {
    if (sys.mu <= 0.0) return 0.0;
    return sys.mu / (posting_intensity(x, inf) + sys.mu);
}

// Clips a decay segment [t0, t1) starting at x0 to [lo, hi]; returns the start state and
// duration of what remains (duration <= 0 when nothing remains).
std::pair<double, double> clip_segment(double x0, double t0, double t1, double lo, double hi, double gamma) {
    if (t0 < lo) {
        x0 *= std::exp(-gamma * (lo - t0));
        t0 = lo;
    }
    return {x0, std::min(t1, hi) - t0};
}

} // namespace

std::string_view to_string(EventKind kind) { return kind == EventKind::Internal ? "internal" : "external"; }

double inter_jump_survival(double s, double z, const SystemParams& sys, const InfluencerParams& inf) {
    if (s <= 0.0) return 1.0;
    const double base = inf.lambda0 + sys.mu;
    if (inf.phi == 0.0) return std::exp(-(base + inf.lambda1) * s);
    const double gp = sys.gamma * inf.phi;
    return std::exp(-base * s - inf.lambda1 / gp * std::pow(z, inf.phi) * -std::expm1(-gp * s));
}

double sample_inter_jump(double z, const SystemParams& sys, const InfluencerParams& inf, Rng& rng) {
    const double base = inf.lambda0 + sys.mu;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    if (inf.lambda1 == 0.0 || inf.phi == 0.0 || z <= 0.0) {
        const double rate = base + (inf.phi == 0.0 ? inf.lambda1 : 0.0);
        if (rate <= 0.0) return kInf;
        std::exponential_distribution<double> e(rate);
        return e(rng);
    }
    // The intensity lambda0 + mu + lambda1 (z e^{-gamma t})^phi only decreases between
    // jumps, so its current value dominates the rest of the interval.
    const double zphi = std::pow(z, inf.phi);
    const double gp = sys.gamma * inf.phi;
    double bound = base + inf.lambda1 * zphi;
    double t = 0.0;
    for (;;) {
        if (!(bound > 0.0)) return kInf;
        std::exponential_distribution<double> e(bound);
        t += e(rng);
        if (!std::isfinite(t)) return kInf;
        const double lam = base + inf.lambda1 * zphi * std::exp(-gp * t);
        if (lam > bound * (1.0 + 1e-12)) throw std::logic_error("thinning majorant exceeded by the intensity");
        if (unif(rng) * bound <= lam) return t;
        bound = lam;
    }
}

EventKind classify_event(double x_at_jump, const SystemParams& sys, const InfluencerParams& inf, Rng& rng) {
    const double p_ext = exogenous_probability(x_at_jump, sys, inf);
    if (p_ext <= 0.0) return EventKind::Internal;
    if (p_ext >= 1.0) return EventKind::External;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    return unif(rng) < p_ext ? EventKind::External : EventKind::Internal;
}

Event apply_transition(double t_start, double z, double zeta, EventKind kind, double jump, double gamma) {
    const double decayed = z * std::exp(-gamma * zeta);
    return Event{t_start + zeta, kind, decayed, jump, decayed + jump};
}

Event step(double t, double z, const SystemParams& sys, const InfluencerParams& inf, const JumpDistribution& v_hat,
           Rng& rng, SplitState split) {
    const double zeta = sample_inter_jump(z, sys, inf, rng);
    if (!std::isfinite(zeta)) return Event{kInf, EventKind::Internal, 0.0, 0.0, 0.0};
    const double decayed = z * std::exp(-sys.gamma * zeta);
    const EventKind kind = classify_event(split == SplitState::JumpInstant ? decayed : z, sys, inf, rng);
    const double jump = kind == EventKind::Internal ? conditional_jump_mean(decayed, sys, inf) * v_hat.sample(rng)
                                                    : sys.w_dist.sample(rng);
    return apply_transition(t, z, zeta, kind, jump, sys.gamma);
}

InfluencerProcess::InfluencerProcess(SystemParams sys, InfluencerParams inf, std::uint64_t seed,
                                     SimulationOptions opts)
    : sys_(std::move(sys)), inf_(inf), v_hat_(unit_jump(inf)), opts_(opts), rng_(seed), x_(opts.x0) {
    sys_.validate();
    inf_.validate();
    if (!(opts_.x0 >= 0.0)) throw std::invalid_argument("initial popularity must be >= 0");
}

Event InfluencerProcess::next() {
    Event ev = step(t_, x_, sys_, inf_, v_hat_, rng_, opts_.split);
    t_ = ev.time;
    x_ = ev.x_after;
    return ev;
}

EventLog simulate_trajectory(const SystemParams& sys, const InfluencerParams& inf, double horizon,
                             std::uint64_t seed, const SimulationOptions& opts) {
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be > 0");
    InfluencerProcess proc(sys, inf, seed, opts);
    EventLog log;
    log.horizon = horizon;
    log.seed = seed;
    log.x0 = opts.x0;
    for (;;) {
        const Event ev = proc.next();
        if (!(ev.time <= horizon)) break;
        log.events.push_back(ev);
    }
    return log;
}

JointTrajectory simulate_population(const PopulationSpec& spec, std::size_t replica) {
    if (spec.influencers.empty()) throw std::invalid_argument("population needs at least one influencer");
    JointTrajectory jt;
    jt.horizon = spec.horizon;
    jt.burn_in = spec.burn_in();
    jt.gamma = spec.sys.gamma;
    for (std::size_t i = 0; i < spec.influencers.size(); ++i) {
        EventLog log = simulate_trajectory(spec.sys, spec.influencers[i], spec.horizon,
                                           derive_seed(spec.seed, i, replica), spec.opts);
        log.influencer_id = i;
        jt.logs.push_back(std::move(log));
    }
    return jt;
}

// ---------------------------------------------------------------------------------------------
// leadership

std::vector<double> LeadershipStats::first_place_probability() const {
    std::vector<double> p(lead_time.size(), 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = lead_time[i] / window;
    return p;
}

std::vector<std::optional<double>> LeadershipStats::average_stay() const {
    std::vector<std::optional<double>> s(lead_time.size());
    for (std::size_t i = 0; i < s.size(); ++i)
        if (stays[i] > 0) s[i] = lead_time[i] / static_cast<double>(stays[i]);
    return s;
}

void LeadershipStats::merge(const LeadershipStats& other) {
    if (lead_time.empty()) {
        *this = other;
        return;
    }
    if (other.lead_time.size() != lead_time.size()) throw std::invalid_argument("leadership stats size mismatch");
    for (std::size_t i = 0; i < lead_time.size(); ++i) {
        lead_time[i] += other.lead_time[i];
        stays[i] += other.stays[i];
    }
    window += other.window;
}

LeadershipTracker::LeadershipTracker(std::size_t n, double gamma, double burn_in, double horizon,
                                     std::span<const double> x0)
    : gamma_(gamma), burn_in_(burn_in), horizon_(horizon), x_(n, 0.0), t_(n, 0.0) {
    if (n == 0) throw std::invalid_argument("leadership needs at least one influencer");
    if (!(burn_in < horizon)) throw std::invalid_argument("empty observation window (burn-in >= horizon)");
    if (!x0.empty()) std::copy(x0.begin(), x0.end(), x_.begin());
    stats_.lead_time.assign(n, 0.0);
    stats_.stays.assign(n, 0);
    stats_.window = horizon - burn_in;
    leader_ = current_leader(0.0);
}

std::size_t LeadershipTracker::current_leader(double t) const {
    // Lowest index wins ties.
    std::size_t best = 0;
    double best_v = x_[0] * std::exp(-gamma_ * (t - t_[0]));
    for (std::size_t k = 1; k < x_.size(); ++k) {
        const double v = x_[k] * std::exp(-gamma_ * (t - t_[k]));
        if (v > best_v) {
            best_v = v;
            best = k;
        }
    }
    return best;
}

void LeadershipTracker::advance(double t) {
    const double lo = std::max(now_, burn_in_);
    const double hi = std::min(t, horizon_);
    if (hi > lo) {
        if (stay_owner_ != leader_) {
            ++stats_.stays[leader_];
            stay_owner_ = leader_;
        }
        stats_.lead_time[leader_] += hi - lo;
    }
    now_ = std::max(now_, t);
}

void LeadershipTracker::update(double t, std::size_t i, double x_after) {
    if (t < now_) throw std::invalid_argument("leadership updates must be time-ordered");
    advance(t);
    x_[i] = x_after;
    t_[i] = t;
    leader_ = current_leader(t);
}

LeadershipStats LeadershipTracker::finish() {
    advance(horizon_);
    return stats_;
}

LeadershipStats leadership(const JointTrajectory& jt) {
    std::vector<double> x0;
    for (const auto& log : jt.logs) x0.push_back(log.x0);
    LeadershipTracker tracker(jt.logs.size(), jt.gamma, jt.burn_in, jt.horizon, x0);
    std::vector<std::size_t> pos(jt.logs.size(), 0);
    for (;;) {
        std::size_t who = jt.logs.size();
        double t_min = kInf;
        for (std::size_t i = 0; i < jt.logs.size(); ++i) {
            if (pos[i] < jt.logs[i].events.size() && jt.logs[i].events[pos[i]].time < t_min) {
                t_min = jt.logs[i].events[pos[i]].time;
                who = i;
            }
        }
        if (who == jt.logs.size() || t_min > jt.horizon) break;
        tracker.update(t_min, who, jt.logs[who].events[pos[who]].x_after);
        ++pos[who];
    }
    return tracker.finish();
}

std::vector<double> first_place_probability(const JointTrajectory& jt) {
    return leadership(jt).first_place_probability();
}

std::vector<std::optional<double>> first_place_average_stay(const JointTrajectory& jt) {
    return leadership(jt).average_stay();
}

// ---------------------------------------------------------------------------------------------
// occupation

double OccupationHistogram::total() const {
    double s = below + above;
    for (double o : occupation) s += o;
    return s;
}

std::vector<double> OccupationHistogram::density() const {
    const double tot = total();
    std::vector<double> d(occupation.size(), 0.0);
    if (tot <= 0.0) return d;
    for (std::size_t j = 0; j < d.size(); ++j) d[j] = occupation[j] / (tot * (edges[j + 1] - edges[j]));
    return d;
}

std::vector<double> OccupationHistogram::cdf_at_edges() const {
    const double tot = total();
    std::vector<double> c(edges.size(), 0.0);
    if (tot <= 0.0) return c;
    double acc = below;
    c[0] = acc / tot;
    for (std::size_t j = 0; j < occupation.size(); ++j) {
        acc += occupation[j];
        c[j + 1] = acc / tot;
    }
    return c;
}

std::vector<double> log_edges(double lo, double hi, std::size_t n_edges) {
    if (!(lo > 0.0) || !(hi > lo) || n_edges < 2) throw std::invalid_argument("log_edges needs 0 < lo < hi, n >= 2");
    std::vector<double> e(n_edges);
    const double a = std::log(lo);
    const double b = std::log(hi);
    for (std::size_t j = 0; j < n_edges; ++j)
        e[j] = std::exp(a + (b - a) * static_cast<double>(j) / static_cast<double>(n_edges - 1));
    e.front() = lo;
    e.back() = hi;
    return e;
}

OccupationAccumulator::OccupationAccumulator(std::vector<double> edges, double gamma) : gamma_(gamma) {
    if (edges.size() < 2 || !(edges.front() > 0.0) || !std::is_sorted(edges.begin(), edges.end()))
        throw std::invalid_argument("occupation edges must be positive and increasing");
    log_edges_.reserve(edges.size());
    for (double e : edges) log_edges_.push_back(std::log(e));
    hist_.occupation.assign(edges.size() - 1, 0.0);
    hist_.edges = std::move(edges);
}

void OccupationAccumulator::add_decay(double x_start, double duration) {
    if (!(duration > 0.0)) return;
    if (!(x_start > 0.0)) {
        hist_.below += duration;
        return;
    }
    // In log-space the state moves down linearly at speed gamma.
    const double u_hi = std::log(x_start);
    const double u_lo = u_hi - gamma_ * duration;
    const double first = log_edges_.front();
    const double last = log_edges_.back();
    if (u_lo < first) hist_.below += (std::min(u_hi, first) - u_lo) / gamma_;
    if (u_hi > last) hist_.above += (u_hi - std::max(u_lo, last)) / gamma_;
    const double a = std::max(u_lo, first);
    const double b = std::min(u_hi, last);
    if (!(b > a)) return;
    auto it = std::upper_bound(log_edges_.begin(), log_edges_.end(), a);
    std::size_t j = static_cast<std::size_t>(std::distance(log_edges_.begin(), it)) - 1;
    for (; j + 1 < log_edges_.size() && log_edges_[j] < b; ++j) {
        const double lo = std::max(a, log_edges_[j]);
        const double hi = std::min(b, log_edges_[j + 1]);
        if (hi > lo) hist_.occupation[j] += (hi - lo) / gamma_;
    }
}

OccupationHistogram occupation_pdf(const EventLog& log, double gamma, std::vector<double> edges, double burn_in) {
    OccupationAccumulator acc(std::move(edges), gamma);
    double x = log.x0;
    double t = 0.0;
    auto add = [&](double t_end) {
        auto [xs, d] = clip_segment(x, t, t_end, burn_in, log.horizon, gamma);
        acc.add_decay(xs, d);
    };
    for (const Event& ev : log.events) {
        add(ev.time);
        x = ev.x_after;
        t = ev.time;
    }
    add(log.horizon);
    return acc.histogram();
}

// ---------------------------------------------------------------------------------------------
// streaming replica

ReplicaStats run_replica(const PopulationSpec& spec, std::size_t replica,
                         const std::vector<std::vector<double>>& occupation_edges) {
    const std::size_t n = spec.influencers.size();
    if (n == 0) throw std::invalid_argument("population needs at least one influencer");
    if (!occupation_edges.empty() && occupation_edges.size() != n)
        throw std::invalid_argument("need one occupation grid per influencer");
    const double gamma = spec.sys.gamma;
    const double burn = spec.burn_in();
    const double horizon = spec.horizon;

    std::vector<InfluencerProcess> procs;
    std::vector<Event> pending;
    std::vector<double> x(n, spec.opts.x0);
    std::vector<double> t(n, 0.0);
    procs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        procs.emplace_back(spec.sys, spec.influencers[i], derive_seed(spec.seed, i, replica), spec.opts);
        pending.push_back(procs.back().next());
    }
    std::vector<OccupationAccumulator> occ;
    for (const auto& e : occupation_edges) occ.emplace_back(e, gamma);

    ReplicaStats out;
    out.posts.assign(n, 0);
    out.exogenous.assign(n, 0);
    out.x_time_integral.assign(n, 0.0);
    out.window = horizon - burn;
    LeadershipTracker tracker(n, gamma, burn, horizon, x);

    auto close_segment = [&](std::size_t i, double t_end) {
        auto [xs, d] = clip_segment(x[i], t[i], t_end, burn, horizon, gamma);
        if (d <= 0.0) return;
        out.x_time_integral[i] += xs * -std::expm1(-gamma * d) / gamma;
        if (!occ.empty()) occ[i].add_decay(xs, d);
    };

    for (;;) {
        std::size_t who = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (pending[i].time < pending[who].time) who = i;
        const Event ev = pending[who];
        if (!(ev.time <= horizon)) break;
        close_segment(who, ev.time);
        x[who] = ev.x_after;
        t[who] = ev.time;
        tracker.update(ev.time, who, ev.x_after);
        if (ev.time >= burn) ++(ev.kind == EventKind::Internal ? out.posts : out.exogenous)[who];
        pending[who] = procs[who].next();
    }
    for (std::size_t i = 0; i < n; ++i) close_segment(i, horizon);
    out.lead = tracker.finish();
    for (auto& a : occ) out.occupation.push_back(a.histogram());
    return out;
}

} // namespace popdyn
