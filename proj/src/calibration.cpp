#include "popdyn/calibration.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace popdyn {

namespace {

std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

std::optional<double> parse_double(const std::string& s) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end) return std::nullopt;
    return v;
}

int parse_int(const std::string& s, std::size_t pos, std::size_t len) {
    int v = 0;
    if (pos + len > s.size()) throw std::invalid_argument("bad timestamp '" + s + "'");
    auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, v);
    if (ec != std::errc{} || ptr != s.data() + pos + len) throw std::invalid_argument("bad timestamp '" + s + "'");
    return v;
}

// Sup distance for an already sorted sample.
double kappa_sorted(std::span<const double> xs, const std::function<double(double)>& cdf,
                    const std::function<double(double)>& cdf_left) {
    if (xs.empty()) throw std::invalid_argument("Kolmogorov distance needs a nonempty sample");
    const auto n = static_cast<double>(xs.size());
    double sup = 0.0;
    std::size_t i = 0;
    while (i < xs.size()) {
        std::size_t k = i;
        while (k < xs.size() && xs[k] == xs[i]) ++k;
        const double left = cdf_left ? cdf_left(xs[i]) : cdf(xs[i]);
        sup = std::max({sup, std::abs(static_cast<double>(k) / n - cdf(xs[i])),
                        std::abs(static_cast<double>(i) / n - left)});
        i = k;
    }
    return std::clamp(sup, 0.0, 1.0);
}

FitResult fit_sorted(std::span<const double> xs, Family family) {
    if (xs.size() < kMinFitSamples)
        throw std::invalid_argument("need at least " + std::to_string(kMinFitSamples) + " residuals to fit");
    if (!(xs.front() > 0.0)) throw std::invalid_argument("residuals must be positive");
    const auto n = static_cast<double>(xs.size());
    std::optional<JumpDistribution> dist;
    switch (family) {
    case Family::LogNormal: {
        double m = 0.0;
        for (double x : xs) m += std::log(x);
        m /= n;
        double ss = 0.0;
        for (double x : xs) ss += (std::log(x) - m) * (std::log(x) - m);
        dist.emplace(LogNormal{m, std::sqrt(ss / n)});
        break;
    }
    case Family::Exponential: {
        const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
        dist.emplace(Exponential{1.0 / mean});
        break;
    }
    case Family::PowerLaw: {
        const double xm = xs.front();
        double s = 0.0;
        for (double x : xs) s += std::log(x / xm);
        if (!(s > 0.0)) throw std::invalid_argument("power-law fit needs residuals above the sample minimum");
        dist.emplace(Pareto{n / s, xm});
        break;
    }
    case Family::Deterministic: throw std::invalid_argument("deterministic family is not fitted");
    }
    FitResult r;
    r.family = family;
    r.dist = *dist;
    r.beta_hat = dist->mean();
    r.cv_hat = dist->cv();
    r.n = xs.size();
    for (double x : xs) r.log_likelihood += dist->log_pdf(x);
    const JumpDistribution& d = *dist;
    r.kappa = kappa_sorted(xs, [&d](double x) { return d.cdf(x); }, [&d](double x) { return d.cdf_left(x); });
    return r;
}

constexpr Family kFittedFamilies[] = {Family::LogNormal, Family::Exponential, Family::PowerLaw};

FamilySelection select_sorted(std::span<const double> xs, std::span<const Family> families) {
    if (families.empty()) families = kFittedFamilies;
    FamilySelection sel;
    for (Family f : families) {
        try {
            sel.fits.push_back(fit_sorted(xs, f));
        } catch (const std::invalid_argument&) {
            // family not applicable to this sample
        }
    }
    if (sel.fits.empty()) throw std::invalid_argument("no family could be fitted to the residuals");
    for (std::size_t k = 1; k < sel.fits.size(); ++k)
        if (sel.fits[k].kappa < sel.fits[sel.best].kappa) sel.best = k;
    return sel;
}

} // namespace

void PostDataset::validate() const {
    for (std::size_t k = 0; k < posts.size(); ++k) {
        if (!(posts[k].likes >= 0.0)) throw std::invalid_argument("likes must be >= 0 (" + influencer_id + ")");
        if (!std::isfinite(posts[k].timestamp)) throw std::invalid_argument("timestamps must be finite");
        if (k > 0 && posts[k].timestamp < posts[k - 1].timestamp)
            throw std::invalid_argument("timestamps must be sorted ascending (" + influencer_id + ")");
    }
}

PostDataset posts_from_log(const EventLog& log, std::string id) {
    PostDataset ds;
    ds.influencer_id = id.empty() ? std::to_string(log.influencer_id) : std::move(id);
    for (const Event& ev : log.events)
        if (ev.kind == EventKind::Internal) ds.posts.push_back({ev.time, ev.jump});
    return ds;
}

double parse_timestamp_days(const std::string& text) {
    const std::string s = trim(text);
    if (auto v = parse_double(s)) return *v;
    // YYYY-MM-DD[THH:MM[:SS[.fff]]][Z]
    if (s.size() < 10 || s[4] != '-' || s[7] != '-') throw std::invalid_argument("bad timestamp '" + s + "'");
    using namespace std::chrono;
    const year_month_day ymd{year{parse_int(s, 0, 4)}, month{static_cast<unsigned>(parse_int(s, 5, 2))},
                             day{static_cast<unsigned>(parse_int(s, 8, 2))}};
    if (!ymd.ok()) throw std::invalid_argument("bad date '" + s + "'");
    double days = static_cast<double>(sys_days{ymd}.time_since_epoch().count());
    if (s.size() > 10) {
        if (s[10] != 'T' && s[10] != ' ') throw std::invalid_argument("bad timestamp '" + s + "'");
        double secs = 3600.0 * parse_int(s, 11, 2) + 60.0 * parse_int(s, 14, 2);
        std::size_t pos = 16;
        if (s.size() > 16 && s[16] == ':') {
            std::size_t end = 17;
            while (end < s.size() && (std::isdigit(static_cast<unsigned char>(s[end])) || s[end] == '.')) ++end;
            const auto sec = parse_double(s.substr(17, end - 17));
            if (!sec) throw std::invalid_argument("bad timestamp '" + s + "'");
            secs += *sec;
            pos = end;
        }
        const std::string rest = s.substr(pos);
        if (!rest.empty() && rest != "Z") throw std::invalid_argument("unsupported time zone in '" + s + "'");
        days += secs / 86400.0;
    }
    return days;
}

std::vector<PostDataset> read_posts_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open posts file '" + path + "'");
    std::vector<PostDataset> out;
    std::map<std::string, std::size_t> index;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(trim(f));
        if (fields.size() != 3)
            throw std::invalid_argument(path + ":" + std::to_string(line_no) + ": expected 3 fields");
        const auto likes = parse_double(fields[2]);
        if (!likes) {
            if (out.empty() && index.empty() && line_no == 1) continue; // header
            throw std::invalid_argument(path + ":" + std::to_string(line_no) + ": bad likes '" + fields[2] + "'");
        }
        double t = 0.0;
        try {
            t = parse_timestamp_days(fields[1]);
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
        auto [it, fresh] = index.try_emplace(fields[0], out.size());
        if (fresh) out.push_back(PostDataset{fields[0], {}, std::nullopt});
        out[it->second].posts.push_back({t, *likes});
    }
    for (const auto& ds : out) ds.validate();
    return out;
}

std::vector<double> reconstruct_popularity(const PostDataset& ds, double gamma) {
    ds.validate();
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be > 0");
    std::vector<double> x(ds.posts.size(), 0.0);
    for (std::size_t k = 1; k < x.size(); ++k) {
        const double dt = ds.posts[k].timestamp - ds.posts[k - 1].timestamp;
        x[k] = (x[k - 1] + ds.posts[k - 1].likes) * std::exp(-gamma * dt);
    }
    return x;
}

NormalizedSeries normalize_series(std::span<const double> x, std::span<const double> v) {
    if (x.size() != v.size()) throw std::invalid_argument("series lengths differ");
    const auto scale = [](std::span<const double> s, const char* name) {
        const double m = s.empty() ? 0.0 : *std::max_element(s.begin(), s.end());
        if (!(m > 0.0)) throw std::invalid_argument(std::string(name) + " series has no positive maximum");
        std::vector<double> out(s.begin(), s.end());
        for (double& e : out) e /= m;
        return out;
    };
    return {scale(x, "popularity"), scale(v, "likes")};
}

std::vector<ConditionalBin> binned_conditional_mean(std::span<const double> x, std::span<const double> v,
                                                    std::size_t n_bins) {
    if (n_bins < 2) throw std::invalid_argument("need at least 2 bins");
    if (x.size() != v.size()) throw std::invalid_argument("series lengths differ");
    std::vector<ConditionalBin> bins(n_bins);
    std::vector<double> sums(n_bins, 0.0);
    const auto nb = static_cast<double>(n_bins);
    for (std::size_t j = 0; j < n_bins; ++j) {
        bins[j].lo = static_cast<double>(j) / nb;
        bins[j].hi = static_cast<double>(j + 1) / nb;
    }
    for (std::size_t k = 0; k < x.size(); ++k) {
        const auto j = static_cast<std::size_t>(std::clamp(std::floor(x[k] * nb), 0.0, nb - 1.0));
        ++bins[j].count;
        sums[j] += v[k];
    }
    for (std::size_t j = 0; j < n_bins; ++j)
        if (bins[j].count > 0) bins[j].mean = sums[j] / static_cast<double>(bins[j].count);
    return bins;
}

Residuals compute_residuals(const PostDataset& ds, double gamma, double theta) {
    if (!(theta >= 0.0)) throw std::invalid_argument("theta must be >= 0");
    const std::vector<double> x = reconstruct_popularity(ds, gamma);
    Residuals r;
    r.values.reserve(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (theta > 0.0 && !(x[k] > 0.0)) {
            ++r.skipped_zero_state;
            continue;
        }
        const double likes = ds.posts[k].likes;
        if (!(likes > 0.0)) {
            ++r.skipped_zero_likes;
            continue;
        }
        r.values.push_back(theta > 0.0 ? likes / std::pow(x[k], theta) : likes);
    }
    if (r.values.size() < 2) throw std::invalid_argument("fewer than 2 usable residuals (" + ds.influencer_id + ")");
    return r;
}

FitResult mle_fit(std::span<const double> residuals, Family family) {
    std::vector<double> xs(residuals.begin(), residuals.end());
    std::sort(xs.begin(), xs.end());
    return fit_sorted(xs, family);
}

FamilySelection select_family(std::span<const double> residuals, std::span<const Family> families) {
    std::vector<double> xs(residuals.begin(), residuals.end());
    std::sort(xs.begin(), xs.end());
    return select_sorted(xs, families);
}

double kolmogorov_distance(std::span<const double> sample, const std::function<double(double)>& cdf,
                           const std::function<double(double)>& cdf_left) {
    std::vector<double> xs(sample.begin(), sample.end());
    std::sort(xs.begin(), xs.end());
    return kappa_sorted(xs, cdf, cdf_left);
}

double kolmogorov_distance(std::span<const double> sample, const JumpDistribution& dist) {
    return kolmogorov_distance(
        sample, [&dist](double x) { return dist.cdf(x); }, [&dist](double x) { return dist.cdf_left(x); });
}

GridSearchResult grid_search_system_params(std::span<const PostDataset> datasets, std::span<const double> gamma_grid,
                                           std::span<const double> theta_grid) {
    if (gamma_grid.empty() || theta_grid.empty()) throw std::invalid_argument("grid search needs nonempty grids");
    if (datasets.empty()) throw std::invalid_argument("grid search needs at least one dataset");
    GridSearchResult res;
    bool first = true;
    for (double g : gamma_grid) {
        for (double th : theta_grid) {
            KappaCell cell{g, th, 0.0, 0};
            std::vector<double> terms;
            terms.reserve(datasets.size());
            for (const auto& ds : datasets) {
                try {
                    std::vector<double> xs = compute_residuals(ds, g, th).values;
                    std::sort(xs.begin(), xs.end());
                    terms.push_back(select_sorted(xs, {}).chosen().kappa);
                } catch (const std::invalid_argument&) {
                    ++cell.failed;
                    terms.push_back(1.0);
                }
            }
            std::sort(terms.begin(), terms.end());
            cell.kappa_sum = std::accumulate(terms.begin(), terms.end(), 0.0);
            if (first || cell.kappa_sum < res.kappa_star) {
                res.gamma_star = g;
                res.theta_star = th;
                res.kappa_star = cell.kappa_sum;
                first = false;
            }
            res.surface.push_back(cell);
        }
    }
    return res;
}

std::optional<double> dispersion_index(const PostDataset& ds, double window_days) {
    ds.validate();
    if (!(window_days > 0.0)) throw std::invalid_argument("window must be > 0");
    if (ds.posts.size() < 2) throw std::invalid_argument("dispersion index needs at least 2 posts");
    const double t0 = ds.posts.front().timestamp;
    const auto windows = static_cast<std::size_t>(std::floor((ds.posts.back().timestamp - t0) / window_days));
    if (windows < 2) throw std::invalid_argument("observation span shorter than 2 windows");
    std::vector<double> counts(windows, 0.0);
    for (const auto& p : ds.posts) {
        const auto w = static_cast<std::size_t>(std::floor((p.timestamp - t0) / window_days));
        if (w < windows) counts[w] += 1.0;
    }
    const auto n = static_cast<double>(windows);
    const double mean = std::accumulate(counts.begin(), counts.end(), 0.0) / n;
    if (!(mean > 0.0)) return std::nullopt;
    double ss = 0.0;
    for (double c : counts) ss += (c - mean) * (c - mean);
    return ss / (n - 1.0) / mean;
}

PostingIntensityEstimate estimate_posting_intensity(const PostDataset& ds, double gamma, std::size_t n_bins,
                                                    std::size_t min_samples) {
    if (ds.posts.size() < 2) throw std::invalid_argument("posting intensity needs at least 2 posts");
    if (n_bins < 2) throw std::invalid_argument("need at least 2 bins");
    const std::vector<double> before = reconstruct_popularity(ds, gamma);
    const std::size_t m = ds.posts.size() - 1;
    std::vector<double> x(m);
    std::vector<double> gap(m);
    for (std::size_t k = 0; k < m; ++k) {
        x[k] = before[k] + ds.posts[k].likes;
        gap[k] = ds.posts[k + 1].timestamp - ds.posts[k].timestamp;
    }
    PostingIntensityEstimate est;
    est.x_scale = *std::max_element(x.begin(), x.end());
    if (est.x_scale > 0.0)
        for (double& v : x) v /= est.x_scale;

    const auto nb = static_cast<double>(n_bins);
    est.bins.resize(n_bins);
    std::vector<double> gap_sum(n_bins, 0.0);
    std::vector<double> x_sum(n_bins, 0.0);
    for (std::size_t j = 0; j < n_bins; ++j) {
        est.bins[j].lo = static_cast<double>(j) / nb;
        est.bins[j].hi = static_cast<double>(j + 1) / nb;
    }
    for (std::size_t k = 0; k < m; ++k) {
        const auto j = static_cast<std::size_t>(std::clamp(std::floor(x[k] * nb), 0.0, nb - 1.0));
        ++est.bins[j].count;
        gap_sum[j] += gap[k];
        x_sum[j] += x[k];
    }
    // Bin rates are fitted by least squares weighted with the bin counts (rate variance ~ 1 / count).
    std::vector<double> bx;
    std::vector<double> br;
    std::vector<double> bw;
    for (std::size_t j = 0; j < n_bins; ++j) {
        auto& b = est.bins[j];
        if (b.count == 0) continue;
        b.mean_x = x_sum[j] / static_cast<double>(b.count);
        if (b.count >= min_samples && gap_sum[j] > 0.0) {
            b.rate = static_cast<double>(b.count) / gap_sum[j];
            bx.push_back(b.mean_x);
            br.push_back(*b.rate);
            bw.push_back(static_cast<double>(b.count));
        }
    }
    if (bx.size() < 2) return est;

    auto sse_of = [&](double l0, double l1, double phi) {
        double s = 0.0;
        for (std::size_t i = 0; i < bx.size(); ++i) {
            const double e = l0 + l1 * pow0(bx[i], phi) - br[i];
            s += bw[i] * e * e;
        }
        return s;
    };
    double sw = 0.0, swr = 0.0;
    for (std::size_t i = 0; i < bx.size(); ++i) {
        sw += bw[i];
        swr += bw[i] * br[i];
    }
    const double mean_r = swr / sw;
    IntensityFit best;
    bool have = false;
    for (int step = 0; step <= 10; ++step) {
        const double phi = step / 10.0;
        // (lambda0, lambda1) candidates: intercept only, then the unconstrained and slope-only fits.
        std::vector<std::pair<double, double>> cands{{mean_r, 0.0}};
        if (phi > 0.0) {
            double sb = 0.0, sbb = 0.0, sbr = 0.0;
            for (std::size_t i = 0; i < bx.size(); ++i) {
                const double b = std::pow(bx[i], phi);
                sb += bw[i] * b;
                sbb += bw[i] * b * b;
                sbr += bw[i] * b * br[i];
            }
            const double det = sw * sbb - sb * sb;
            if (det > 1e-14 * sw * sbb) {
                const double l1 = (sw * sbr - sb * swr) / det;
                const double l0 = (swr - l1 * sb) / sw;
                if (l0 >= 0.0 && l1 >= 0.0) cands.emplace_back(l0, l1);
            }
            if (sbb > 0.0 && sbr > 0.0) cands.emplace_back(0.0, sbr / sbb);
        }
        for (auto [l0, l1] : cands) {
            const double s = sse_of(l0, l1, phi);
            if (!have || s < best.sse * (1.0 - 1e-12)) {
                best = IntensityFit{l0, 0.0, l1, phi, s};
                have = true;
            }
        }
    }
    best.lambda1 = best.phi == 0.0 || est.x_scale <= 0.0 ? best.lambda1_normalized
                                                          : best.lambda1_normalized / std::pow(est.x_scale, best.phi);
    est.fit = best;
    return est;
}

CalibrationReport calibrate(std::span<const PostDataset> datasets, std::span<const double> gamma_grid,
                            std::span<const double> theta_grid) {
    CalibrationReport rep;
    rep.grid = grid_search_system_params(datasets, gamma_grid, theta_grid);
    for (const auto& ds : datasets) {
        InfluencerCalibration c;
        c.influencer_id = ds.influencer_id;
        c.n_posts = ds.posts.size();
        const Residuals r = compute_residuals(ds, rep.grid.gamma_star, rep.grid.theta_star);
        c.n_residuals = r.values.size();
        c.skipped_zero_state = r.skipped_zero_state;
        c.skipped_zero_likes = r.skipped_zero_likes;
        if (r.values.size() >= kMinFitSamples) {
            try {
                c.selection = select_family(r.values);
            } catch (const std::exception& e) {
                c.error = e.what();
            }
        } else {
            c.error = "only " + std::to_string(r.values.size()) + " usable residuals (need " +
                      std::to_string(kMinFitSamples) + ")";
        }
        c.dispersion = dispersion_index(ds);
        try {
            c.intensity = estimate_posting_intensity(ds, rep.grid.gamma_star);
        } catch (const std::invalid_argument& e) {
            if (c.error.empty()) c.error = e.what();
        }
        rep.influencers.push_back(std::move(c));
    }
    return rep;
}

} // namespace popdyn
