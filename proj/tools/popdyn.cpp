#include "popdyn/report.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>

using namespace popdyn;
namespace fs = std::filesystem;

namespace {

// Accepts "0.25" or "1/4".
double parse_value(const std::string& s) {
    std::size_t used = 0;
    const auto slash = s.find('/');
    try {
        if (slash == std::string::npos) {
            const double v = std::stod(s, &used);
            if (used == s.size()) return v;
        } else {
            const std::string a = s.substr(0, slash), b = s.substr(slash + 1);
            std::size_t ua = 0, ub = 0;
            const double num = std::stod(a, &ua), den = std::stod(b, &ub);
            if (ua == a.size() && ub == b.size() && den != 0.0) return num / den;
        }
    } catch (const std::exception&) {
    }
    throw CLI::ValidationError("value", "cannot parse '" + s + "' as a number or fraction");
}

std::vector<double> parse_values(const std::vector<std::string>& items) {
    std::vector<double> out;
    for (const auto& s : items) out.push_back(parse_value(s));
    return out;
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    [[nodiscard]] double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

Scenario load(const std::string& path, const std::string& out_override) {
    Scenario s = load_scenario(path);
    if (!out_override.empty()) s.output_dir = out_override;
    return s;
}

void print_metrics(const MetricsReport& r) {
    std::printf("config %s  seed %llu  replicas %zu  window %.6g days\n", r.config_hash.c_str(),
                static_cast<unsigned long long>(r.seed), r.replicas, r.window_total);
    std::printf("%4s %10s %12s %10s %14s\n", "i", "pi1", "stay", "rate", "mean X");
    for (std::size_t i = 0; i < r.influencers.size(); ++i) {
        const auto& m = r.influencers[i];
        std::printf("%4zu %10.5f %12.5g %10.4f %14.6g", i, m.first_place_probability,
                    m.average_stay ? *m.average_stay : 0.0, m.posting_rate, m.mean_popularity);
        if (m.ks) std::printf("  KS %.4f", *m.ks);
        std::printf("\n");
    }
    for (const auto& w : r.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Popularity dynamics of competing influencers: simulation, stationary solver, calibration"};
    app.require_subcommand(1);

    std::string config, out;
    bool events = false, occupation = false, with_solver = false;
    auto* sim = app.add_subcommand("simulate", "Simulate a scenario and write metrics.json");
    sim->add_option("config", config, "Scenario JSON")->required()->check(CLI::ExistingFile);
    sim->add_option("--out", out, "Output directory (overrides run.output_dir)");
    sim->add_flag("--events", events, "Also write events.csv for replica 0");
    sim->add_flag("--occupation", occupation, "Also write occupation.csv on the solver grids");
    sim->add_flag("--solve", with_solver, "Also solve the stationary equation and record KS distances");

    auto* solve = app.add_subcommand("solve", "Solve the stationary equation per influencer");
    solve->add_option("config", config, "Scenario JSON")->required()->check(CLI::ExistingFile);
    solve->add_option("--out", out, "Output directory");

    double threshold = 0.03;
    auto* val = app.add_subcommand("validate", "Compare simulated occupation CDFs against the solver");
    val->add_option("config", config, "Scenario JSON")->required()->check(CLI::ExistingFile);
    val->add_option("--out", out, "Output directory");
    val->add_option("--threshold", threshold, "KS pass threshold")->capture_default_str();

    std::string param;
    std::vector<std::string> values;
    auto* sw = app.add_subcommand("sweep", "One run per parameter value; writes sweep.csv");
    sw->add_option("config", config, "Scenario JSON")->required()->check(CLI::ExistingFile);
    sw->add_option("--param", param, "Parameter path, e.g. system.gamma or shared.cv")->required();
    sw->add_option("--values", values, "Comma-separated values (fractions allowed)")->required()->delimiter(',');
    sw->add_option("--out", out, "Output directory");

    Table3Options t3;
    std::vector<std::string> phis;
    auto* tab = app.add_subcommand("table3", "First-place probabilities with lambda1 adapted to a target posting rate");
    tab->add_option("config", config, "Scenario JSON")->required()->check(CLI::ExistingFile);
    tab->add_option("--phis", phis, "Comma-separated phi values")->delimiter(',');
    tab->add_option("--lambda0", t3.lambda0, "Constant posting rate")->capture_default_str();
    tab->add_option("--target", t3.adapt.target_rate, "Target posts per day")->capture_default_str();
    tab->add_option("--tolerance", t3.adapt.tolerance, "Allowed posting-rate error")->capture_default_str();
    tab->add_option("--adapt-horizon", t3.adapt.horizon, "Days simulated per bisection step")->capture_default_str();
    tab->add_option("--out", out, "Output directory");

    std::string posts;
    std::vector<std::string> gamma_grid, theta_grid;
    auto* cal = app.add_subcommand("calibrate", "Grid search for (gamma, theta) and per-influencer jump fits");
    cal->add_option("posts", posts, "CSV: influencer_id, timestamp, likes")->required()->check(CLI::ExistingFile);
    cal->add_option("--gamma-grid", gamma_grid, "Comma-separated gamma values (fractions allowed)")
        ->required()
        ->delimiter(',');
    cal->add_option("--theta-grid", theta_grid, "Comma-separated theta values")->required()->delimiter(',');
    cal->add_option("--out", out, "Output directory")->default_str("out");

    auto* chk = app.add_subcommand("check", "Ergodicity check per influencer");
    chk->add_option("config", config, "Scenario JSON")->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        const Timer timer;
        if (*sim) {
            const Scenario s = load(config, out);
            const MetricsReport r = run_scenario(s, RunOptions{occupation || with_solver, with_solver});
            const fs::path dir = s.output_dir;
            write_json(dir / "metrics.json", to_json(r));
            if (occupation || with_solver) write_occupation_csv(dir / "occupation.csv", r);
            if (with_solver) {
                write_pdf_csv(dir / "pdf.csv", r);
                write_solver_json(dir / "solver.json", r);
            }
            if (events) write_events_csv(dir / "events.csv", simulate_population(s.population(), 0));
            print_metrics(r);
        } else if (*solve) {
            const Scenario s = load(config, out);
            s.validate();
            MetricsReport r;
            r.config_hash = config_hash(s);
            r.seed = s.seed;
            r.influencers.resize(s.influencers.size());
            int failures = 0;
            for (std::size_t i = 0; i < s.influencers.size(); ++i) {
                auto& m = r.influencers[i];
                m.ergodicity = check_ergodicity(s.sys, s.influencers[i]);
                try {
                    m.stationary = solve_stationary(s.sys, s.influencers[i], scenario_grid(s, i),
                                                    SolverOptions{s.solver.tol, s.solver.max_iter});
                    const Moments mo = distribution_moments(m.stationary->dist);
                    std::printf("influencer %zu: %zu iterations, residual %.3g, mean %.6g, sd %.6g\n", i,
                                m.stationary->diag.iterations, m.stationary->diag.residual, mo.mean,
                                std::sqrt(mo.variance));
                } catch (const std::exception& e) {
                    m.solver_error = e.what();
                    std::fprintf(stderr, "influencer %zu: %s\n", i, e.what());
                    ++failures;
                }
            }
            const fs::path dir = s.output_dir;
            write_pdf_csv(dir / "pdf.csv", r);
            write_solver_json(dir / "solver.json", r);
            if (failures) return 1;
        } else if (*val) {
            const Scenario s = load(config, out);
            const ValidationReport v = validate_scenario(s, threshold);
            const fs::path dir = s.output_dir;
            write_json(dir / "validation.json", to_json(v));
            write_json(dir / "metrics.json", to_json(v.metrics));
            write_pdf_csv(dir / "pdf.csv", v.metrics);
            write_occupation_csv(dir / "occupation.csv", v.metrics);
            print_metrics(v.metrics);
            for (std::size_t i = 0; i < v.entries.size(); ++i) {
                const auto& e = v.entries[i];
                std::printf("influencer %zu: %s", i, e.passed ? "PASS" : "FAIL");
                if (e.ks) std::printf("  KS %.4f (threshold %.4f)", *e.ks, threshold);
                if (!e.error.empty()) std::printf("  %s", e.error.c_str());
                std::printf("\n");
            }
            if (!v.passed()) return 1;
        } else if (*sw) {
            const Scenario s = load(config, out);
            const auto rows = sweep(s, param, parse_values(values));
            write_sweep_csv(fs::path(s.output_dir) / "sweep.csv", param, rows, config_hash(s), s.seed);
            for (const auto& row : rows)
                if (!row.error.empty()) std::fprintf(stderr, "cell failed: %s\n", row.error.c_str());
            std::printf("%zu rows written to %s\n", rows.size(), (fs::path(s.output_dir) / "sweep.csv").c_str());
        } else if (*tab) {
            const Scenario s = load(config, out);
            if (!phis.empty()) t3.phis = parse_values(phis);
            t3.adapt.seed = derive_seed(s.seed, 0x7ab3);
            const auto cols = table3_experiment(s, t3);
            write_json(fs::path(s.output_dir) / "table3.json", to_json(cols, config_hash(s), s.seed));
            std::printf("%4s", "i");
            for (const auto& c : cols) std::printf("  phi=%-6.3g", c.phi);
            std::printf("\n");
            for (std::size_t i = 0; i < s.influencers.size(); ++i) {
                std::printf("%4zu", i);
                for (const auto& c : cols) std::printf("  %-10.4f", c.first_place[i]);
                std::printf("\n");
            }
        } else if (*cal) {
            const auto datasets = read_posts_csv(posts);
            const auto rep = calibrate(datasets, parse_values(gamma_grid), parse_values(theta_grid));
            const fs::path dir = out;
            write_kappa_surface_csv(dir / "kappa_surface.csv", rep.grid);
            write_json(dir / "fits.json", to_json(rep));
            std::printf("gamma* = %.6g  theta* = %.6g  kappa sum = %.6g\n", rep.grid.gamma_star, rep.grid.theta_star,
                        rep.grid.kappa_star);
            for (const auto& c : rep.influencers) {
                if (c.selection) {
                    const auto& f = c.selection->chosen();
                    std::printf("%s: %s  beta %.5g  cv %.4g  kappa %.4f\n", c.influencer_id.c_str(),
                                std::string(to_string(f.family)).c_str(), f.beta_hat, f.cv_hat, f.kappa);
                } else {
                    std::printf("%s: %s\n", c.influencer_id.c_str(), c.error.c_str());
                }
            }
        } else if (*chk) {
            const Scenario s = load(config, out);
            nlohmann::json arr = nlohmann::json::array();
            for (const auto& inf : s.influencers) arr.push_back(to_json(check_ergodicity(s.sys, inf)));
            std::cout << arr.dump(2) << '\n';
        }
        std::fprintf(stderr, "done in %.2f s\n", timer.seconds());
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error at '%s': %s\n", e.key().c_str(), e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
