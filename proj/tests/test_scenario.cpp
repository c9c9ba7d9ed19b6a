#include "popdyn/report.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace popdyn;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

Scenario small_scenario() {
    Scenario s = baseline_scenario();
    s.influencers.resize(3);
    s.horizon = 4000.0;
    s.replicas = 2;
    s.seed = 99;
    return s;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string config_error_key(const json& j) {
    try {
        (void)scenario_from_json(j);
    } catch (const ConfigError& e) {
        return e.key();
    }
    return {};
}

} // namespace

TEST_CASE("baseline scenario parameters") {
    const Scenario s = baseline_scenario();
    REQUIRE(s.influencers.size() == 5);
    CHECK(s.sys.gamma == doctest::Approx(1.0 / 64));
    CHECK(s.sys.theta == doctest::Approx(0.6));
    CHECK(s.influencers[4].beta == doctest::Approx(0.6561));
    for (const auto& p : s.influencers) {
        CHECK(p.lambda0 == 4.0);
        CHECK(p.cv == 4.0);
    }
}

TEST_CASE("config round trip and hash") {
    Scenario s = small_scenario();
    s.solver.grid.nodes = 800;
    const Scenario back = scenario_from_json(scenario_to_json(s));
    CHECK(config_hash(back) == config_hash(s));
    CHECK(back.solver.grid.nodes.value() == 800);
    CHECK(config_hash(s).size() == 16);

    Scenario moved = s;
    moved.output_dir = "elsewhere";
    CHECK(config_hash(moved) == config_hash(s));
    Scenario reseeded = s;
    reseeded.seed = 100;
    CHECK(config_hash(reseeded) != config_hash(s));
}

TEST_CASE("config errors name the offending key") {
    const json ok = scenario_to_json(small_scenario());
    json j = ok;
    j["run"]["replicas"] = 0;
    CHECK(config_error_key(j) == "run.replicas");
    j = ok;
    j["run"]["burnin_frac"] = 1.0;
    CHECK(config_error_key(j) == "run.burnin_frac");
    j = ok;
    j["influencers"][1]["colour"] = "red";
    CHECK(config_error_key(j) == "influencers[1].colour");
    j = ok;
    j["influencers"][2]["beta"] = -1.0;
    CHECK(config_error_key(j) == "influencers[2]");
    j = ok;
    j["system"]["gamma"] = "fast";
    CHECK(config_error_key(j) == "system.gamma");
    j = ok;
    j["influencers"][0]["v_family"] = "cauchy";
    CHECK(config_error_key(j) == "influencers[0].v_family");
    j = ok;
    j.erase("influencers");
    CHECK(config_error_key(j) == "influencers");
}

TEST_CASE("parameter paths") {
    Scenario s = small_scenario();
    set_parameter(s, "system.gamma", 0.25);
    CHECK(s.sys.gamma == 0.25);
    set_parameter(s, "shared.cv", 2.0);
    for (const auto& p : s.influencers) CHECK(p.cv == 2.0);
    set_parameter(s, "influencers[1].beta", 0.3);
    CHECK(s.influencers[1].beta == 0.3);
    set_parameter(s, "run.horizon_days", 10.0);
    CHECK(s.horizon == 10.0);
    CHECK_THROWS_AS(set_parameter(s, "system.colour", 1.0), ConfigError);
    CHECK_THROWS_AS(set_parameter(s, "influencers[9].beta", 1.0), ConfigError);
    CHECK_THROWS_AS(set_parameter(s, "system.gamma", -1.0), ConfigError);
}

TEST_CASE("runs are reproducible byte for byte") {
    const Scenario s = small_scenario();
    const fs::path dir = fs::temp_directory_path() / "popdyn_repro";
    fs::remove_all(dir);
    for (const char* sub : {"a", "b"}) {
        const MetricsReport r = run_scenario(s, RunOptions{true, false});
        write_json(dir / sub / "metrics.json", to_json(r));
        write_occupation_csv(dir / sub / "occupation.csv", r);
        write_events_csv(dir / sub / "events.csv", simulate_population(s.population(), 1));
    }
    for (const char* f : {"metrics.json", "occupation.csv", "events.csv"}) {
        CAPTURE(f);
        const std::string a = slurp(dir / "a" / f);
        CHECK(!a.empty());
        CHECK(a == slurp(dir / "b" / f));
    }
    const json j = json::parse(slurp(dir / "a" / "metrics.json"));
    CHECK(j["config_hash"] == config_hash(s));
    CHECK(j["seed"] == s.seed);
    fs::remove_all(dir);
}

TEST_CASE("metrics invariants") {
    const MetricsReport r = run_scenario(small_scenario());
    CHECK(r.first_place_sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(r.first_place_sum() - 1.0) <= 1e-6);
    CHECK(r.window_total == doctest::Approx(2 * 0.8 * 4000.0));
    for (const auto& m : r.influencers) CHECK(m.posting_rate == doctest::Approx(4.0).epsilon(0.05));

    Scenario one = small_scenario();
    one.influencers.resize(1);
    const MetricsReport r1 = run_scenario(one);
    CHECK(r1.influencers[0].first_place_probability == doctest::Approx(1.0));
    CHECK(*r1.influencers[0].average_stay == doctest::Approx(0.8 * 4000.0));
}

TEST_CASE("non-ergodic parameters warn but still run") {
    Scenario s = small_scenario();
    s.horizon = 30.0;
    s.sys.theta = 0.7;
    s.influencers[0].lambda1 = 0.01;
    s.influencers[0].phi = 0.4;
    const MetricsReport r = run_scenario(s);
    CHECK(r.influencers[0].ergodicity.status == ErgodicityStatus::NotGuaranteed);
    CHECK_FALSE(r.warnings.empty());
}

TEST_CASE("sweep shape and per-cell failures") {
    Scenario s = small_scenario();
    s.horizon = 1500.0;
    s.replicas = 1;
    const auto rows = sweep(s, "system.gamma", {1.0 / 32, -1.0, 1.0 / 128});
    CHECK(rows.size() == 3 * s.influencers.size());
    for (const auto& row : rows) {
        if (row.value < 0.0) {
            CHECK_FALSE(row.metrics.has_value());
            CHECK(row.error.find("system.gamma") != std::string::npos);
        } else {
            CHECK(row.metrics.has_value());
            CHECK(row.error.empty());
        }
    }
    CHECK_THROWS_AS((void)sweep(s, "nonsense.path", {1.0}), ConfigError);

    const fs::path p = fs::temp_directory_path() / "popdyn_sweep.csv";
    write_sweep_csv(p, "system.gamma", rows, config_hash(s), s.seed);
    std::ifstream in(p);
    std::size_t lines = 0;
    for (std::string line; std::getline(in, line);) ++lines;
    CHECK(lines == rows.size() + 1);
    fs::remove(p);
}

TEST_CASE("lambda1 adaptation") {
    const SystemParams sys;
    InfluencerParams inf;
    inf.lambda0 = 1.0;
    const AdaptOptions opts;
    CHECK(adapt_lambda1(sys, inf, opts).lambda1 == 3.0);
    inf.lambda0 = 4.0;
    CHECK(adapt_lambda1(sys, inf, opts).lambda1 == 0.0);
    inf.lambda0 = 5.0;
    CHECK_THROWS_AS((void)adapt_lambda1(sys, inf, opts), std::invalid_argument);

    inf.lambda0 = 1.0;
    inf.phi = 0.2;
    const AdaptResult a = adapt_lambda1(sys, inf, opts);
    const AdaptResult b = adapt_lambda1(sys, inf, opts);
    CHECK(a.lambda1 == b.lambda1);
    CHECK(std::abs(a.rate - opts.target_rate) <= opts.tolerance);
    inf.lambda1 = a.lambda1;
    const double verify = simulated_posting_rate(sys, inf, opts.horizon, opts.burnin_frac, 12345);
    CHECK(std::abs(verify - opts.target_rate) <= 3 * opts.tolerance);
}

TEST_CASE("degenerate validation fails informatively") {
    Scenario s = small_scenario();
    s.influencers.resize(1);
    s.horizon = 0.05;
    s.replicas = 1;
    ValidationReport v;
    CHECK_NOTHROW(v = validate_scenario(s));
    CHECK_FALSE(v.passed());
    REQUIRE(v.entries.size() == 1);
    CHECK_FALSE(v.entries[0].error.empty());
}

TEST_CASE("solver and validation reports") {
    Scenario s = small_scenario();
    s.influencers.resize(1);
    s.horizon = 20000.0;
    const ValidationReport v = validate_scenario(s, 0.2);
    REQUIRE(v.entries.size() == 1);
    CHECK(v.entries[0].ks.has_value());
    const json j = to_json(v);
    CHECK(j["entries"][0]["solver"]["iterations"].get<int>() >= 2);

    const fs::path p = fs::temp_directory_path() / "popdyn_pdf.csv";
    write_pdf_csv(p, v.metrics);
    std::ifstream in(p);
    std::string header;
    std::getline(in, header);
    CHECK(header == "influencer,y,f,F");
    fs::remove(p);

    const json m = to_json(v.metrics);
    CHECK(m["influencers"][0].contains("stationary_mean"));
}

TEST_CASE("non-finite numbers become null") {
    MetricsReport r;
    r.influencers.resize(1);
    r.influencers[0].mean_popularity = std::numeric_limits<double>::infinity();
    const json j = to_json(r);
    CHECK(j["influencers"][0]["mean_popularity"].is_null());
    CHECK(j["influencers"][0]["average_stay"].is_null());
}
