#pragma once

#include "popdyn/model.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace popdyn {

enum class EventKind : std::uint8_t { Internal, External };

[[nodiscard]] std::string_view to_string(EventKind kind);

struct Event {
    double time;
    EventKind kind;
    double x_before; ///< X(T-)
    double jump;
    double x_after;  ///< X(T+) = x_before + jump
};

struct EventLog {
    std::size_t influencer_id{0};
    std::vector<Event> events;
    double horizon{0.0};
    std::uint64_t seed{0};
    double x0{0.0};
};

/// Which state decides whether a jump is exogenous.
enum class SplitState {
    JumpInstant,   ///< intensities at X(T-), the decayed state at the jump (exact)
    IntervalStart, ///< intensities at the post-jump state the interval started from
};

struct SimulationOptions {
    double x0{0.0};
    SplitState split{SplitState::JumpInstant};
};

/// P(zeta > s | post-jump state z) in closed form.
[[nodiscard]] double inter_jump_survival(double s, double z, const SystemParams& sys, const InfluencerParams& inf);

/// Time to the next jump of N_I + N_E from post-jump state z, by thinning.
[[nodiscard]] double sample_inter_jump(double z, const SystemParams& sys, const InfluencerParams& inf, Rng& rng);

/// Exogenous with probability mu / (lambda(x) + mu).
[[nodiscard]] EventKind classify_event(double x_at_jump, const SystemParams& sys, const InfluencerParams& inf,
                                       Rng& rng);

/// Deterministic part of a transition: decay z over zeta, then apply the jump.
[[nodiscard]] Event apply_transition(double t_start, double z, double zeta, EventKind kind, double jump,
                                     double gamma);

/// One influencer's jump process; yields events in time order. Owns its RNG stream.
class InfluencerProcess {
public:
    InfluencerProcess(SystemParams sys, InfluencerParams inf, std::uint64_t seed, SimulationOptions opts = {});

    /// Next event after the current one (no horizon cut).
    Event next();

    [[nodiscard]] double time() const { return t_; }
    [[nodiscard]] double state() const { return x_; }
    [[nodiscard]] const SystemParams& system() const { return sys_; }
    [[nodiscard]] const InfluencerParams& influencer() const { return inf_; }

private:
    SystemParams sys_;
    InfluencerParams inf_;
    JumpDistribution v_hat_;
    SimulationOptions opts_;
    Rng rng_;
    double t_{0.0};
    double x_{0.0};
};

/// Draws the next event from post-jump state z at time t.
[[nodiscard]] Event step(double t, double z, const SystemParams& sys, const InfluencerParams& inf,
                         const JumpDistribution& v_hat, Rng& rng, SplitState split = SplitState::JumpInstant);

/// All events in [0, horizon].
[[nodiscard]] EventLog simulate_trajectory(const SystemParams& sys, const InfluencerParams& inf, double horizon,
                                           std::uint64_t seed, const SimulationOptions& opts = {});

struct PopulationSpec {
    SystemParams sys;
    std::vector<InfluencerParams> influencers;
    double horizon{1000.0};
    double burnin_frac{0.2};
    std::uint64_t seed{1};
    SimulationOptions opts;

    [[nodiscard]] double burn_in() const { return burnin_frac * horizon; }
};

struct JointTrajectory {
    std::vector<EventLog> logs;
    double horizon{0.0};
    double burn_in{0.0};
    double gamma{0.0};
};

/// Independent per-influencer streams seeded from (seed, influencer, replica).
[[nodiscard]] JointTrajectory simulate_population(const PopulationSpec& spec, std::size_t replica = 0);

/// Exact leadership accounting. Between events all states decay at the same rate,
/// so the leader can change only when some influencer jumps.
struct LeadershipStats {
    std::vector<double> lead_time;
    std::vector<std::size_t> stays;
    double window{0.0};

    [[nodiscard]] std::vector<double> first_place_probability() const;
    /// Mean leadership interval; empty for influencers that never lead.
    [[nodiscard]] std::vector<std::optional<double>> average_stay() const;
    void merge(const LeadershipStats& other);
};

class LeadershipTracker {
public:
    LeadershipTracker(std::size_t n, double gamma, double burn_in, double horizon, std::span<const double> x0 = {});

    /// Influencer i jumps to x_after at time t; times must be nondecreasing.
    void update(double t, std::size_t i, double x_after);
    /// Closes the window at the horizon.
    [[nodiscard]] LeadershipStats finish();

private:
    void advance(double t);
    [[nodiscard]] std::size_t current_leader(double t) const;

    double gamma_;
    double burn_in_;
    double horizon_;
    std::vector<double> x_;
    std::vector<double> t_;
    std::size_t leader_{0};
    std::optional<std::size_t> stay_owner_;
    double now_{0.0};
    LeadershipStats stats_;
};

[[nodiscard]] LeadershipStats leadership(const JointTrajectory& jt);
[[nodiscard]] std::vector<double> first_place_probability(const JointTrajectory& jt);
[[nodiscard]] std::vector<std::optional<double>> first_place_average_stay(const JointTrajectory& jt);

struct OccupationHistogram {
    std::vector<double> edges;     ///< increasing bin edges
    std::vector<double> occupation; ///< days spent in each bin
    double below{0.0};             ///< days below edges.front()
    double above{0.0};             ///< days above edges.back()

    [[nodiscard]] double total() const;
    /// occupation / (total * width)
    [[nodiscard]] std::vector<double> density() const;
    /// Occupation CDF at each edge, counting time below the grid.
    [[nodiscard]] std::vector<double> cdf_at_edges() const;
};

/// Log-spaced edges.
[[nodiscard]] std::vector<double> log_edges(double lo, double hi, std::size_t n_edges);

/// Exact time-in-bin accumulator for exponentially decaying segments.
class OccupationAccumulator {
public:
    OccupationAccumulator(std::vector<double> edges, double gamma);

    /// Segment that starts at x_start and decays for `duration` days.
    void add_decay(double x_start, double duration);
    [[nodiscard]] const OccupationHistogram& histogram() const { return hist_; }

private:
    double gamma_;
    std::vector<double> log_edges_;
    OccupationHistogram hist_;
};

/// Occupation histogram of X over [burn_in, log.horizon].
[[nodiscard]] OccupationHistogram occupation_pdf(const EventLog& log, double gamma, std::vector<double> edges,
                                                 double burn_in = 0.0);

/// Streaming statistics of one replica, without storing event logs.
struct ReplicaStats {
    LeadershipStats lead;
    std::vector<std::size_t> posts;      ///< internal events inside the window
    std::vector<std::size_t> exogenous;  ///< external events inside the window
    std::vector<double> x_time_integral; ///< integral of X over the window
    std::vector<OccupationHistogram> occupation;
    double window{0.0};
};

/// Simulates all influencers of a replica in time order, feeding the leadership tracker
/// and (when edges are given, one vector per influencer) occupation accumulators.
[[nodiscard]] ReplicaStats run_replica(const PopulationSpec& spec, std::size_t replica,
                                       const std::vector<std::vector<double>>& occupation_edges = {});

} // namespace popdyn
