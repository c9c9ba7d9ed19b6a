#include "popdyn/distributions.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace popdyn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double normal_ccdf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

} // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(mix(mix(master) ^ (a + 0x632be59bd9b4e019ULL)) ^ (b + 0x8cb92ba72f3d8dd7ULL));
}

std::string_view to_string(Family family) {
    switch (family) {
    case Family::LogNormal: return "lognormal";
    case Family::Exponential: return "exponential";
    case Family::PowerLaw: return "powerlaw";
    case Family::Deterministic: return "deterministic";
    }
    return "unknown";
}

Family family_from_string(std::string_view name) {
    if (name == "lognormal") return Family::LogNormal;
    if (name == "exponential") return Family::Exponential;
    if (name == "powerlaw" || name == "pareto") return Family::PowerLaw;
    if (name == "deterministic") return Family::Deterministic;
    throw std::invalid_argument("unknown jump family '" + std::string(name) + "'");
}

JumpDistribution::JumpDistribution(Params params) : params_(params) {
    std::visit(overloaded{
                   [](const LogNormal& p) {
                       if (!std::isfinite(p.log_mean) || !(p.log_sd >= 0.0))
                           throw std::invalid_argument("lognormal requires finite log-mean and log-sd >= 0");
                   },
                   [](const Exponential& p) {
                       if (!(p.rate > 0.0)) throw std::invalid_argument("exponential rate must be > 0");
                   },
                   [](const Pareto& p) {
                       if (!(p.shape > 0.0) || !(p.scale > 0.0))
                           throw std::invalid_argument("pareto shape and scale must be > 0");
                   },
                   [](const PointMass& p) {
                       if (!(p.value > 0.0)) throw std::invalid_argument("point mass must sit at a positive value");
                   },
               },
               params_);
}

JumpDistribution JumpDistribution::lognormal_from_moments(double mean, double cv) {
    if (!(mean > 0.0) || !(cv > 0.0)) throw std::invalid_argument("lognormal mean and cv must be > 0");
    const double s2 = std::log1p(cv * cv);
    return JumpDistribution(LogNormal{std::log(mean) - 0.5 * s2, std::sqrt(s2)});
}

Family JumpDistribution::family() const {
    return std::visit(overloaded{
                          [](const LogNormal&) { return Family::LogNormal; },
                          [](const Exponential&) { return Family::Exponential; },
                          [](const Pareto&) { return Family::PowerLaw; },
                          [](const PointMass&) { return Family::Deterministic; },
                      },
                      params_);
}

double JumpDistribution::mean() const {
    return std::visit(overloaded{
                          [](const LogNormal& p) { return std::exp(p.log_mean + 0.5 * p.log_sd * p.log_sd); },
                          [](const Exponential& p) { return 1.0 / p.rate; },
                          [](const Pareto& p) { return p.shape > 1.0 ? p.shape * p.scale / (p.shape - 1.0) : kInf; },
                          [](const PointMass& p) { return p.value; },
                      },
                      params_);
}

double JumpDistribution::cv() const {
    return std::visit(overloaded{
                          [](const LogNormal& p) { return std::sqrt(std::expm1(p.log_sd * p.log_sd)); },
                          [](const Exponential&) { return 1.0; },
                          [](const Pareto& p) {
                              return p.shape > 2.0 ? 1.0 / std::sqrt(p.shape * (p.shape - 2.0)) : kInf;
                          },
                          [](const PointMass&) { return 0.0; },
                      },
                      params_);
}

double JumpDistribution::ccdf(double w) const {
    return std::visit(overloaded{
                          [w](const LogNormal& p) {
                              if (w <= 0.0) return 1.0;
                              if (p.log_sd == 0.0) return std::log(w) < p.log_mean ? 1.0 : 0.0;
                              return normal_ccdf((std::log(w) - p.log_mean) / p.log_sd);
                          },
                          [w](const Exponential& p) { return w <= 0.0 ? 1.0 : std::exp(-p.rate * w); },
                          [w](const Pareto& p) { return w <= p.scale ? 1.0 : std::pow(p.scale / w, p.shape); },
                          [w](const PointMass& p) { return w < p.value ? 1.0 : 0.0; },
                      },
                      params_);
}

double JumpDistribution::cdf(double w) const {
    return std::visit(overloaded{
                          [w](const LogNormal& p) {
                              if (w <= 0.0) return 0.0;
                              if (p.log_sd == 0.0) return std::log(w) < p.log_mean ? 0.0 : 1.0;
                              return normal_ccdf(-(std::log(w) - p.log_mean) / p.log_sd);
                          },
                          [w](const Exponential& p) { return w <= 0.0 ? 0.0 : -std::expm1(-p.rate * w); },
                          [w](const Pareto& p) { return w <= p.scale ? 0.0 : 1.0 - std::pow(p.scale / w, p.shape); },
                          [w](const PointMass& p) { return w < p.value ? 0.0 : 1.0; },
                      },
                      params_);
}

double JumpDistribution::cdf_left(double w) const {
    if (auto a = atom(); a && w == *a) return 0.0;
    return cdf(w);
}

std::optional<double> JumpDistribution::atom() const {
    if (const auto* p = std::get_if<PointMass>(&params_)) return p->value;
    if (const auto* p = std::get_if<LogNormal>(&params_); p && p->log_sd == 0.0) return std::exp(p->log_mean);
    return std::nullopt;
}

double JumpDistribution::log_pdf(double w) const {
    return std::visit(overloaded{
                          [w](const LogNormal& p) {
                              if (w <= 0.0) return -kInf;
                              if (p.log_sd == 0.0) return std::log(w) == p.log_mean ? kInf : -kInf;
                              const double z = (std::log(w) - p.log_mean) / p.log_sd;
                              return -0.5 * z * z - std::log(w * p.log_sd) - 0.5 * std::log(2.0 * std::numbers::pi);
                          },
                          [w](const Exponential& p) { return w < 0.0 ? -kInf : std::log(p.rate) - p.rate * w; },
                          [w](const Pareto& p) {
                              if (w < p.scale) return -kInf;
                              return std::log(p.shape) + p.shape * std::log(p.scale) - (p.shape + 1.0) * std::log(w);
                          },
                          [w](const PointMass& p) { return w == p.value ? kInf : -kInf; },
                      },
                      params_);
}

double JumpDistribution::sample(Rng& rng) const {
    return std::visit(overloaded{
                          [&rng](const LogNormal& p) {
                              std::normal_distribution<double> n(0.0, 1.0);
                              return std::exp(p.log_mean + p.log_sd * n(rng));
                          },
                          [&rng](const Exponential& p) {
                              std::exponential_distribution<double> e(p.rate);
                              return e(rng);
                          },
                          [&rng](const Pareto& p) {
                              std::uniform_real_distribution<double> u(0.0, 1.0);
                              // 1 - u lies in (0, 1]
                              return p.scale * std::pow(1.0 - u(rng), -1.0 / p.shape);
                          },
                          [](const PointMass& p) { return p.value; },
                      },
                      params_);
}

UnitMeanJump unit_mean_params(Family family, double cv, bool strict) {
    switch (family) {
    case Family::LogNormal: {
        if (!(cv > 0.0)) throw std::invalid_argument("lognormal multiplier needs cv > 0");
        const double s2 = std::log1p(cv * cv);
        return {JumpDistribution(LogNormal{-0.5 * s2, std::sqrt(s2)}), false, {}};
    }
    case Family::Exponential: {
        const bool mismatch = std::abs(cv - 1.0) > 1e-12;
        if (mismatch && strict)
            throw std::invalid_argument("exponential multiplier has cv = 1 by construction; requested cv = " +
                                        std::to_string(cv));
        return {JumpDistribution(Exponential{1.0}), mismatch,
                mismatch ? "exponential family forces cv = 1 (requested " + std::to_string(cv) + ")" : std::string{}};
    }
    case Family::PowerLaw: {
        if (!(cv > 0.0) || !std::isfinite(cv))
            throw std::invalid_argument("power-law multiplier needs a finite cv > 0 (shape > 2)");
        // cv^2 = 1 / (a (a - 2))  =>  a = 1 + sqrt(1 + 1/cv^2), always > 2.
        const double shape = 1.0 + std::sqrt(1.0 + 1.0 / (cv * cv));
        return {JumpDistribution(Pareto{shape, (shape - 1.0) / shape}), false, {}};
    }
    case Family::Deterministic:
        return {JumpDistribution(PointMass{1.0}), false, {}};
    }
    throw std::invalid_argument("unknown family");
}

} // namespace popdyn
