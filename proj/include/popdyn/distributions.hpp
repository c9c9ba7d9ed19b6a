#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <variant>

namespace popdyn {

using Rng = std::mt19937_64;

// Mixes (master, a, b) into an independent stream seed (splitmix64 finalizer).
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0);

enum class Family { LogNormal, Exponential, PowerLaw, Deterministic };

[[nodiscard]] std::string_view to_string(Family family);
[[nodiscard]] Family family_from_string(std::string_view name);

struct LogNormal {
    double log_mean;
    double log_sd;
};

struct Exponential {
    double rate;
};

// Pareto type I: P(X > w) = (scale / w)^shape for w >= scale.
struct Pareto {
    double shape;
    double scale;
};

struct PointMass {
    double value;
};

/// Positive jump-size law. All mass lies on (0, inf).
class JumpDistribution {
public:
    using Params = std::variant<LogNormal, Exponential, Pareto, PointMass>;

    explicit JumpDistribution(Params params);

    /// Log-normal with the given (arithmetic) mean and coefficient of variation.
    static JumpDistribution lognormal_from_moments(double mean, double cv);

    [[nodiscard]] Family family() const;
    [[nodiscard]] const Params& params() const { return params_; }

    [[nodiscard]] double mean() const;
    /// Infinite when the second moment diverges.
    [[nodiscard]] double cv() const;

    [[nodiscard]] double cdf(double w) const;
    [[nodiscard]] double ccdf(double w) const;
    /// Left limit F(w-); differs from cdf() only at an atom.
    [[nodiscard]] double cdf_left(double w) const;
    /// -inf outside the support. Undefined (returns +inf at the atom) for PointMass.
    [[nodiscard]] double log_pdf(double w) const;
    [[nodiscard]] std::optional<double> atom() const;

    [[nodiscard]] double sample(Rng& rng) const;

private:
    Params params_;
};

struct UnitMeanJump {
    JumpDistribution dist;
    /// Set when the requested cv could not be honoured (exponential forces cv = 1).
    bool cv_overridden{false};
    std::string note;
};

/// Unit-mean multiplier of the given family and coefficient of variation.
/// With strict = true, an exponential request with cv != 1 throws instead of being flagged.
[[nodiscard]] UnitMeanJump unit_mean_params(Family family, double cv, bool strict = false);

} // namespace popdyn
