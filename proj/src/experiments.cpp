#include "popdyn/experiments.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace popdyn {

namespace {

void merge_histogram(OccupationHistogram& into, const OccupationHistogram& h) {
    if (into.edges.empty()) {
        into = h;
        return;
    }
    for (std::size_t j = 0; j < into.occupation.size(); ++j) into.occupation[j] += h.occupation[j];
    into.below += h.below;
    into.above += h.above;
}

} // namespace

double MetricsReport::first_place_sum() const {
    double s = 0.0;
    for (const auto& m : influencers) s += m.first_place_probability;
    return s;
}

Grid scenario_grid(const Scenario& s, std::size_t influencer) {
    return default_grid(s.sys, s.influencers.at(influencer), s.solver.grid);
}

MetricsReport run_scenario(const Scenario& s, const RunOptions& opts) {
    s.validate();
    const std::size_t n = s.influencers.size();
    const PopulationSpec spec = s.population();
    MetricsReport r;
    r.config_hash = config_hash(s);
    r.seed = s.seed;
    r.replicas = s.replicas;
    r.horizon = s.horizon;
    r.burn_in = spec.burn_in();
    r.influencers.resize(n);

    std::vector<std::optional<Grid>> grids(n);
    std::vector<std::vector<double>> edges;
    if (opts.occupation || opts.solve) {
        for (std::size_t i = 0; i < n; ++i) {
            try {
                grids[i] = scenario_grid(s, i);
                edges.push_back(grids[i]->nodes);
            } catch (const std::invalid_argument& e) {
                r.influencers[i].solver_error = std::string("no solver grid: ") + e.what();
                r.warnings.push_back("influencer " + std::to_string(i) + ": " + r.influencers[i].solver_error);
                edges.push_back(log_edges(1.0, 2.0, 2));
            }
        }
    }

    LeadershipStats lead;
    std::vector<std::size_t> posts(n, 0);
    std::vector<std::size_t> exo(n, 0);
    std::vector<double> integral(n, 0.0);
    std::vector<OccupationHistogram> occ(n);
    for (std::size_t rep = 0; rep < s.replicas; ++rep) {
        const ReplicaStats st = run_replica(spec, rep, edges);
        lead.merge(st.lead);
        for (std::size_t i = 0; i < n; ++i) {
            posts[i] += st.posts[i];
            exo[i] += st.exogenous[i];
            integral[i] += st.x_time_integral[i];
            if (!st.occupation.empty()) merge_histogram(occ[i], st.occupation[i]);
        }
    }
    r.window_total = lead.window;
    const auto pi = lead.first_place_probability();
    const auto stay = lead.average_stay();
    for (std::size_t i = 0; i < n; ++i) {
        InfluencerMetrics& m = r.influencers[i];
        const InfluencerParams& inf = s.influencers[i];
        m.first_place_probability = pi[i];
        m.average_stay = stay[i];
        m.stays = lead.stays[i];
        m.lead_time = lead.lead_time[i];
        m.posting_rate = static_cast<double>(posts[i]) / lead.window;
        m.exogenous_rate = static_cast<double>(exo[i]) / lead.window;
        m.mean_popularity = integral[i] / lead.window;
        m.ergodicity = check_ergodicity(s.sys, inf);
        if (m.ergodicity.status == ErgodicityStatus::NotGuaranteed)
            r.warnings.push_back("influencer " + std::to_string(i) + ": stationarity not guaranteed (" +
                                 m.ergodicity.detail + ")");
        m.jump_note = unit_mean_params(inf.v_family, inf.cv).note;
        if (!m.jump_note.empty()) r.warnings.push_back("influencer " + std::to_string(i) + ": " + m.jump_note);
        if (!grids[i]) continue;
        m.occupation = occ[i];
        if (!opts.solve) continue;
        try {
            m.stationary = solve_stationary(s.sys, inf, *grids[i], SolverOptions{s.solver.tol, s.solver.max_iter});
            if (m.occupation->total() > 0.0)
                m.ks = ks_distance(grids[i]->nodes, m.occupation->cdf_at_edges(), grids[i]->nodes,
                                   m.stationary->dist.cdf);
            for (const auto& w : m.stationary->diag.warnings)
                r.warnings.push_back("influencer " + std::to_string(i) + ": " + w);
        } catch (const SolverError& e) {
            std::ostringstream msg;
            msg << e.what() << " (residual " << e.diagnostics().residual << ")";
            m.solver_error = msg.str();
            r.warnings.push_back("influencer " + std::to_string(i) + ": " + m.solver_error);
        }
    }
    return r;
}

std::vector<SweepRow> sweep(const Scenario& base, const std::string& path, const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("sweep needs at least one value");
    {
        Scenario probe = base;
        set_parameter(probe, path, values.front()); // reject unresolvable paths up front
    }
    std::vector<SweepRow> rows;
    for (std::size_t k = 0; k < values.size(); ++k) {
        std::string error;
        std::optional<MetricsReport> rep;
        try {
            Scenario cell = base;
            set_parameter(cell, path, values[k]);
            cell.seed = derive_seed(base.seed, 0x5eeb, k);
            rep = run_scenario(cell);
        } catch (const std::exception& e) {
            std::ostringstream msg;
            msg << path << " = " << values[k] << ": " << e.what();
            error = msg.str();
        }
        for (std::size_t i = 0; i < base.influencers.size(); ++i) {
            SweepRow row{values[k], i, std::nullopt, error};
            if (rep) row.metrics = rep->influencers[i];
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

namespace {

// Posts per day after burn-in; stops early once max_posts is exceeded (the rate is then a lower bound).
double posting_rate_capped(const SystemParams& sys, const InfluencerParams& inf, double horizon, double burnin_frac,
                           std::uint64_t seed, std::size_t max_posts) {
    if (!(horizon > 0.0) || !(burnin_frac >= 0.0 && burnin_frac < 1.0))
        throw std::invalid_argument("posting rate needs horizon > 0 and burn-in fraction in [0, 1)");
    InfluencerProcess proc(sys, inf, seed);
    const double burn = burnin_frac * horizon;
    std::size_t posts = 0;
    std::size_t all = 0;
    for (;;) {
        const Event ev = proc.next();
        if (!(ev.time <= horizon)) break;
        if (ev.kind != EventKind::Internal) continue;
        if (++all > max_posts) return static_cast<double>(all) / std::max(ev.time, 1e-300);
        if (ev.time >= burn) ++posts;
    }
    return static_cast<double>(posts) / (horizon - burn);
}

} // namespace

double simulated_posting_rate(const SystemParams& sys, const InfluencerParams& inf, double horizon,
                              double burnin_frac, std::uint64_t seed) {
    return posting_rate_capped(sys, inf, horizon, burnin_frac, seed, std::numeric_limits<std::size_t>::max());
}

AdaptResult adapt_lambda1(const SystemParams& sys, InfluencerParams inf, const AdaptOptions& opts) {
    if (!(inf.phi >= 0.0)) throw std::invalid_argument("phi must be >= 0");
    if (inf.lambda0 > opts.target_rate)
        throw std::invalid_argument("lambda0 exceeds the target posting rate; no lambda1 >= 0 fits");
    const double gap = opts.target_rate - inf.lambda0;
    if (gap == 0.0) return {0.0, opts.target_rate, 0};
    if (inf.phi == 0.0) return {gap, opts.target_rate, 0}; // rate = lambda0 + lambda1

    AdaptResult res;
    // Runaway candidates are cut off well above the target.
    const auto cap = static_cast<std::size_t>(20.0 * opts.target_rate * opts.horizon) + 1000;
    auto rate = [&](double l1) {
        inf.lambda1 = l1;
        ++res.evaluations;
        return posting_rate_capped(sys, inf, opts.horizon, opts.burnin_frac, opts.seed, cap);
    };
    // First guess: lambda(x) = target at the drift-balance level of a constant target rate.
    InfluencerParams flat = inf;
    flat.lambda0 = opts.target_rate;
    flat.lambda1 = 0.0;
    flat.phi = 0.0;
    const auto x_bal = drift_balance_level(sys, flat);
    double guess = gap;
    if (x_bal && *x_bal > 0.0) guess = gap / std::pow(*x_bal, inf.phi);

    // The rate is close to linear in lambda1, so one evaluation places a narrow starting bracket.
    const double r_guess = rate(guess);
    if (r_guess > inf.lambda0 && r_guess < 10.0 * opts.target_rate)
        guess *= gap / (r_guess - inf.lambda0);
    double lo = 0.95 * guess;
    double hi = 1.05 * guess;
    double r_lo = rate(lo);
    while (r_lo > opts.target_rate && lo > 0.0) {
        hi = lo;
        lo = lo > 1e-12 ? 0.5 * lo : 0.0;
        r_lo = rate(lo);
    }
    double r_hi = rate(hi);
    while (r_hi < opts.target_rate) {
        lo = hi;
        hi *= 2.0;
        if (hi > opts.lambda1_max) {
            std::ostringstream msg;
            msg << "no lambda1 in [0, " << opts.lambda1_max << "] reaches rate " << opts.target_rate
                << " (rate " << r_hi << " at lambda1 = " << lo << ")";
            throw std::runtime_error(msg.str());
        }
        r_hi = rate(hi);
    }
    double best = hi;
    double best_rate = r_hi;
    for (std::size_t it = 0; it < opts.max_iter && hi - lo > opts.rel_width * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double r = rate(mid);
        if (std::abs(r - opts.target_rate) <= std::abs(best_rate - opts.target_rate)) {
            best = mid;
            best_rate = r;
        }
        (r < opts.target_rate ? lo : hi) = mid;
    }
    if (std::abs(best_rate - opts.target_rate) > opts.tolerance) {
        std::ostringstream msg;
        msg << "lambda1 bisection ended at rate " << best_rate << " (target " << opts.target_rate << " +- "
            << opts.tolerance << ", lambda1 = " << best << ")";
        throw std::runtime_error(msg.str());
    }
    res.lambda1 = best;
    res.rate = best_rate;
    return res;
}

std::vector<Table3Column> table3_experiment(const Scenario& base, const Table3Options& opts) {
    std::vector<Table3Column> out;
    for (std::size_t k = 0; k < opts.phis.size(); ++k) {
        Scenario cell = base;
        Table3Column col;
        col.phi = opts.phis[k];
        for (std::size_t i = 0; i < cell.influencers.size(); ++i) {
            InfluencerParams& inf = cell.influencers[i];
            inf.lambda0 = opts.lambda0;
            inf.phi = col.phi;
            AdaptOptions a = opts.adapt;
            a.seed = derive_seed(opts.adapt.seed, i, k);
            const AdaptResult fit = adapt_lambda1(cell.sys, inf, a);
            inf.lambda1 = fit.lambda1;
            col.lambda1.push_back(fit.lambda1);
            col.rate.push_back(fit.rate);
        }
        const MetricsReport rep = run_scenario(cell);
        for (const auto& m : rep.influencers) col.first_place.push_back(m.first_place_probability);
        out.push_back(std::move(col));
    }
    return out;
}

bool ValidationReport::passed() const {
    for (const auto& e : entries)
        if (!e.passed) return false;
    return !entries.empty();
}

ValidationReport validate_scenario(const Scenario& s, double threshold) {
    ValidationReport v;
    v.threshold = threshold;
    v.metrics = run_scenario(s, RunOptions{true, true});
    for (const auto& m : v.metrics.influencers) {
        ValidationEntry e;
        e.ks = m.ks;
        if (m.stationary) e.diagnostics = m.stationary->diag;
        if (!m.solver_error.empty()) {
            e.error = m.solver_error;
        } else if (m.occupation && m.occupation->total() > 0.0 &&
                   m.occupation->below + m.occupation->above >= m.occupation->total()) {
            e.error = "simulated path never entered the solver grid (too few events in the window?)";
        } else if (!m.ks) {
            e.error = "no occupation data";
        }
        e.passed = e.error.empty() && e.ks && *e.ks <= threshold;
        v.entries.push_back(std::move(e));
    }
    return v;
}

} // namespace popdyn
