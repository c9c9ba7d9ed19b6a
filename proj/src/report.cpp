#include "popdyn/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace popdyn {

namespace {

using nlohmann::json;

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

template <class T>
json opt(const std::optional<T>& x) {
    if (!x) return nullptr;
    if constexpr (std::is_floating_point_v<T>) return num(*x);
    else return *x;
}

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    return out;
}

// Shortest text that reads back to the same double.
std::string fmt(double x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

json fit_json(const FitResult& f) {
    return {{"family", std::string(to_string(f.family))},
            {"beta_hat", num(f.beta_hat)},
            {"cv_hat", num(f.cv_hat)},
            {"log_likelihood", num(f.log_likelihood)},
            {"kappa", num(f.kappa)},
            {"n", f.n}};
}

} // namespace

json to_json(const ErgodicityVerdict& v) {
    json j = {{"status", std::string(to_string(v.status))},
              {"theta_plus_phi", num(v.theta_plus_phi)},
              {"detail", v.detail}};
    if (v.drift_constant) {
        j["heuristic_sufficient_check"] = true;
        j["drift_constant"] = opt(v.drift_constant);
        j["margin"] = opt(v.margin);
        j["reference_state"] = opt(v.reference_state);
        j["alpha"] = num(v.alpha);
    }
    return j;
}

json to_json(const SolverDiagnostics& d) {
    json hist = json::array();
    for (double c : d.change_history) hist.push_back(num(c));
    return {{"iterations", d.iterations},
            {"change_history", hist},
            {"residual", num(d.residual)},
            {"min_pivot", num(d.min_pivot)},
            {"mass_bottom_cell", num(d.mass_bottom_cell)},
            {"mass_top_cell", num(d.mass_top_cell)},
            {"converged", d.converged},
            {"ergodicity", to_json(d.ergodicity)},
            {"warnings", d.warnings}};
}

json to_json(const MetricsReport& r) {
    json infl = json::array();
    for (std::size_t i = 0; i < r.influencers.size(); ++i) {
        const InfluencerMetrics& m = r.influencers[i];
        json e = {{"influencer", i},
                  {"first_place_probability", num(m.first_place_probability)},
                  {"average_stay", opt(m.average_stay)},
                  {"stays", m.stays},
                  {"lead_time", num(m.lead_time)},
                  {"posting_rate", num(m.posting_rate)},
                  {"exogenous_rate", num(m.exogenous_rate)},
                  {"mean_popularity", num(m.mean_popularity)},
                  {"ergodicity", to_json(m.ergodicity)}};
        if (!m.jump_note.empty()) e["jump_note"] = m.jump_note;
        if (m.stationary) {
            const Moments mo = distribution_moments(m.stationary->dist);
            e["stationary_mean"] = num(mo.mean);
            e["stationary_sd"] = num(std::sqrt(mo.variance));
        }
        if (m.ks) e["ks_occupation_vs_solver"] = num(*m.ks);
        if (!m.solver_error.empty()) e["solver_error"] = m.solver_error;
        infl.push_back(e);
    }
    return {{"config_hash", r.config_hash},
            {"seed", r.seed},
            {"replicas", r.replicas},
            {"horizon_days", num(r.horizon)},
            {"burn_in_days", num(r.burn_in)},
            {"window_days_total", num(r.window_total)},
            {"first_place_sum", num(r.first_place_sum())},
            {"influencers", infl},
            {"warnings", r.warnings}};
}

json to_json(const ValidationReport& v) {
    json entries = json::array();
    for (std::size_t i = 0; i < v.entries.size(); ++i) {
        const ValidationEntry& e = v.entries[i];
        json o = {{"influencer", i}, {"ks", opt(e.ks)}, {"passed", e.passed}};
        if (!e.error.empty()) o["error"] = e.error;
        if (e.diagnostics) o["solver"] = to_json(*e.diagnostics);
        entries.push_back(o);
    }
    return {{"config_hash", v.metrics.config_hash},
            {"seed", v.metrics.seed},
            {"threshold", v.threshold},
            {"passed", v.passed()},
            {"entries", entries}};
}

json to_json(const CalibrationReport& r) {
    json infl = json::array();
    for (const auto& c : r.influencers) {
        json o = {{"influencer_id", c.influencer_id},
                  {"n_posts", c.n_posts},
                  {"n_residuals", c.n_residuals},
                  {"skipped_zero_state", c.skipped_zero_state},
                  {"skipped_zero_likes", c.skipped_zero_likes},
                  {"dispersion_index", opt(c.dispersion)}};
        if (c.selection) {
            json fits = json::array();
            for (const auto& f : c.selection->fits) fits.push_back(fit_json(f));
            const FitResult& best = c.selection->chosen();
            o["candidates"] = fits;
            o["family"] = std::string(to_string(best.family));
            o["beta_hat"] = num(best.beta_hat);
            o["cv_hat"] = num(best.cv_hat);
            o["kappa"] = num(best.kappa);
        }
        if (c.intensity.fit) {
            const IntensityFit& f = *c.intensity.fit;
            o["posting_intensity"] = {{"lambda0", num(f.lambda0)},
                                      {"lambda1", num(f.lambda1)},
                                      {"lambda1_normalized", num(f.lambda1_normalized)},
                                      {"phi", num(f.phi)},
                                      {"sse", num(f.sse)},
                                      {"x_scale", num(c.intensity.x_scale)}};
        }
        if (!c.error.empty()) o["error"] = c.error;
        infl.push_back(o);
    }
    return {{"gamma_star", num(r.grid.gamma_star)},
            {"theta_star", num(r.grid.theta_star)},
            {"kappa_star", num(r.grid.kappa_star)},
            {"influencers", infl}};
}

json to_json(const std::vector<Table3Column>& cols, const std::string& config_hash, std::uint64_t seed) {
    json arr = json::array();
    for (const auto& c : cols) {
        json l1 = json::array(), rate = json::array(), pi = json::array();
        for (double x : c.lambda1) l1.push_back(num(x));
        for (double x : c.rate) rate.push_back(num(x));
        for (double x : c.first_place) pi.push_back(num(x));
        arr.push_back({{"phi", c.phi}, {"lambda1", l1}, {"posting_rate", rate}, {"first_place_probability", pi}});
    }
    return {{"config_hash", config_hash}, {"seed", seed}, {"columns", arr}};
}

void write_json(const std::filesystem::path& path, const json& j) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

void write_pdf_csv(const std::filesystem::path& path, const MetricsReport& r) {
    auto out = open_out(path);
    out << "influencer,y,f,F\n";
    for (std::size_t i = 0; i < r.influencers.size(); ++i) {
        const auto& st = r.influencers[i].stationary;
        if (!st) continue;
        const DensityOnGrid& d = st->dist;
        for (std::size_t k = 0; k < d.grid.size(); ++k)
            out << i << ',' << fmt(d.grid.nodes[k]) << ',' << fmt(d.density[k]) << ',' << fmt(d.cdf[k]) << '\n';
    }
}

void write_occupation_csv(const std::filesystem::path& path, const MetricsReport& r) {
    auto out = open_out(path);
    out << "influencer,bin_lo,bin_hi,occupation_days,density\n";
    for (std::size_t i = 0; i < r.influencers.size(); ++i) {
        const auto& h = r.influencers[i].occupation;
        if (!h) continue;
        const auto dens = h->density();
        for (std::size_t k = 0; k < h->occupation.size(); ++k)
            out << i << ',' << fmt(h->edges[k]) << ',' << fmt(h->edges[k + 1]) << ',' << fmt(h->occupation[k]) << ','
                << fmt(dens[k]) << '\n';
    }
}

void write_solver_json(const std::filesystem::path& path, const MetricsReport& r) {
    json arr = json::array();
    for (std::size_t i = 0; i < r.influencers.size(); ++i) {
        const InfluencerMetrics& m = r.influencers[i];
        json o = {{"influencer", i}};
        if (m.stationary) {
            o["diagnostics"] = to_json(m.stationary->diag);
            o["grid"] = {{"y_min", m.stationary->dist.grid.y_min()},
                         {"y_max", m.stationary->dist.grid.y_max()},
                         {"nodes", m.stationary->dist.grid.size()}};
        }
        if (!m.solver_error.empty()) o["error"] = m.solver_error;
        arr.push_back(o);
    }
    write_json(path, {{"config_hash", r.config_hash}, {"influencers", arr}});
}

void write_sweep_csv(const std::filesystem::path& path, const std::string& param, const std::vector<SweepRow>& rows,
                     const std::string& config_hash, std::uint64_t seed) {
    auto out = open_out(path);
    out << "config_hash,seed,param,value,influencer,first_place_probability,average_stay,posting_rate,"
           "mean_popularity,error\n";
    for (const auto& row : rows) {
        out << config_hash << ',' << seed << ',' << param << ',' << fmt(row.value) << ',' << row.influencer << ',';
        if (row.metrics) {
            const InfluencerMetrics& m = *row.metrics;
            out << fmt(m.first_place_probability) << ',';
            if (m.average_stay) out << fmt(*m.average_stay);
            out << ',' << fmt(m.posting_rate) << ',' << fmt(m.mean_popularity) << ',';
        } else {
            out << ",,,,";
        }
        std::string err = row.error;
        for (char& c : err)
            if (c == ',' || c == '\n') c = ';';
        out << err << '\n';
    }
}

void write_kappa_surface_csv(const std::filesystem::path& path, const GridSearchResult& g) {
    auto out = open_out(path);
    out << "gamma,theta,kappa_sum\n";
    for (const auto& c : g.surface) out << fmt(c.gamma) << ',' << fmt(c.theta) << ',' << fmt(c.kappa_sum) << '\n';
}

void write_events_csv(const std::filesystem::path& path, const JointTrajectory& traj) {
    auto out = open_out(path);
    out << "influencer_id,time_days,kind,x_before,jump,x_after\n";
    for (const auto& log : traj.logs)
        for (const auto& e : log.events)
            out << log.influencer_id << ',' << fmt(e.time) << ',' << to_string(e.kind) << ',' << fmt(e.x_before) << ','
                << fmt(e.jump) << ',' << fmt(e.x_after) << '\n';
}

} // namespace popdyn
