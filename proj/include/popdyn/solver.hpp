#pragma once

#include "popdyn/model.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace popdyn {

/// Strictly increasing positive nodes; cells are the intervals between neighbours.
struct Grid {
    std::vector<double> nodes;

    [[nodiscard]] static Grid log_spaced(double y_min, double y_max, std::size_t n);

    [[nodiscard]] std::size_t size() const { return nodes.size(); }
    [[nodiscard]] std::size_t cells() const { return nodes.size() - 1; }
    [[nodiscard]] double y_min() const { return nodes.front(); }
    [[nodiscard]] double y_max() const { return nodes.back(); }
    /// Throws unless N >= 64, nodes positive and strictly increasing.
    void validate() const;
};

/// Optional overrides of the automatic grid.
struct GridSpec {
    std::optional<double> y_min;
    std::optional<double> y_max;
    std::optional<std::size_t> nodes;
};

/// Log-spaced grid around the drift-balance level, wide enough for the stationary law
/// (linear-noise spread estimate plus a jump-tail allowance) and fine enough for the
/// marching solver (log step about gamma / (2 lambda_max)).
[[nodiscard]] Grid default_grid(const SystemParams& sys, const InfluencerParams& inf, const GridSpec& spec = {});

struct DensityOnGrid {
    Grid grid;
    std::vector<double> density; ///< f at the nodes; trapezoid integral 1
    std::vector<double> cdf;     ///< F at the nodes, F(y_min) .. F(y_max) = 1

    /// Normalizes f by the trapezoid rule and integrates it into a CDF.
    [[nodiscard]] static DensityOnGrid from_density(Grid grid, std::vector<double> f);
    /// Cell masses (one per cell) to node densities and exact cumulative CDF.
    [[nodiscard]] static DensityOnGrid from_cell_masses(Grid grid, std::span<const double> mass);

    /// Log-linear interpolation; 0 outside the grid.
    [[nodiscard]] double density_at(double y) const;
    /// Linear interpolation; clamped to the end values outside the grid.
    [[nodiscard]] double cdf_at(double y) const;
};

enum class KernelForm {
    Combined, ///< (lambda(x) + mu) * P(Z > y - x | x) with Z the mixed jump
    Split,    ///< lambda(x) P(V > y - x | x) + mu P(W > y - x)
};

/// Rate of jumps from x that end above level y (requires x <= y).
[[nodiscard]] double kernel_ccdf(double y, double x, const SystemParams& sys, const InfluencerParams& inf,
                                 KernelForm form = KernelForm::Combined);

/// The upward-crossing kernel with cached per-cell quadrature data.
class LevelCrossingKernel {
public:
    LevelCrossingKernel(const SystemParams& sys, const InfluencerParams& inf, const Grid& grid,
                        KernelForm form = KernelForm::Combined);

    [[nodiscard]] double operator()(double level, double x) const;
    /// Integral of the kernel over x in [a, b], b <= level.
    [[nodiscard]] double integral(double level, double a, double b) const;
    /// Same over a whole grid cell lying below the level.
    [[nodiscard]] double cell_integral(double level, std::size_t cell) const;

private:
    struct CellRule {
        double x[4];
        double w[4];
        double lam[4];
        double inv_m[4];
        int n{0};
    };

    [[nodiscard]] double eval(double level, double x, double lam, double inv_m) const;
    [[nodiscard]] double log_distance_integral(double level, double a, double b) const;

    SystemParams sys_;
    InfluencerParams inf_;
    JumpDistribution v_hat_;
    KernelForm form_;
    std::vector<double> nodes_;
    std::vector<CellRule> rules_;
};

enum class StationaryScheme {
    Midpoint, ///< balance at cell midpoints, second order (default)
    Upwind,   ///< balance at nodes; the exact fixed point of the transient scheme
};

struct SolverOptions {
    double tol{1e-10};
    std::size_t max_iter{100};
    StationaryScheme scheme{StationaryScheme::Midpoint};
    KernelForm form{KernelForm::Combined};
};

struct SolverDiagnostics {
    std::size_t iterations{0};
    std::vector<double> change_history; ///< L1 change of the normalized cell masses per sweep
    double residual{0.0};                ///< relative L1 residual of the balance equations
    double min_pivot{0.0};
    double mass_bottom_cell{0.0};
    double mass_top_cell{0.0};
    bool converged{false};
    ErgodicityVerdict ergodicity;
    std::vector<std::string> warnings;
};

struct StationarySolution {
    DensityOnGrid dist;
    std::vector<double> cell_mass;
    SolverDiagnostics diag;
};

class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, SolverDiagnostics diag)
        : std::runtime_error(what), diag_(std::move(diag)) {}
    [[nodiscard]] const SolverDiagnostics& diagnostics() const { return diag_; }

private:
    SolverDiagnostics diag_;
};

/// Stationary law from the level-crossing balance: downward drift flux gamma y f(y) equals the rate
/// of jumps from below y to above y. Cell masses are found by Gauss-Seidel sweeps upward from the
/// bottom cell; the system is lower triangular, so one sweep solves it and the next confirms.
[[nodiscard]] StationarySolution solve_stationary(const SystemParams& sys, const InfluencerParams& inf,
                                                  const Grid& grid, const SolverOptions& opts = {});

/// Explicit finite-volume evolution of the forward equation on a fixed grid. Mass below the grid
/// is held in the bottom cell and jumps past the top stay in the top cell, so total mass is exact.
class TransientEvolver {
public:
    TransientEvolver(const SystemParams& sys, const InfluencerParams& inf, Grid grid,
                     KernelForm form = KernelForm::Combined);

    /// Largest stable step: 1 / (gamma / min log-step + max jump rate).
    [[nodiscard]] double max_stable_dt() const { return max_dt_; }
    void set_cdf(std::span<const double> cdf);
    void set_cell_masses(std::span<const double> mass);
    /// Throws on a step above max_stable_dt() or when a cell mass turns negative.
    void step(double dt);
    /// Advances by t using equal steps no larger than dt.
    void advance(double t, double dt);

    [[nodiscard]] std::vector<double> cdf() const;
    [[nodiscard]] const Eigen::VectorXd& cell_masses() const { return mass_; }
    [[nodiscard]] const Grid& grid() const { return grid_; }

private:
    Grid grid_;
    double gamma_;
    Eigen::VectorXd down_rate_; ///< gamma / log-step per cell
    Eigen::MatrixXd jump_flux_; ///< (k, i): upward flux across node k per unit mass of cell i < k
    Eigen::VectorXd mass_;
    double max_dt_{0.0};
};

[[nodiscard]] double max_stable_dt(const Grid& grid, const SystemParams& sys, const InfluencerParams& inf);

/// CDF at the nodes after t_end days, starting from cdf0 at the nodes.
[[nodiscard]] std::vector<double> evolve_transient(const Grid& grid, std::span<const double> cdf0,
                                                   const SystemParams& sys, const InfluencerParams& inf,
                                                   double t_end, double dt, KernelForm form = KernelForm::Combined);

/// Step CDF of a point mass at x0.
[[nodiscard]] std::vector<double> point_mass_cdf(const Grid& grid, double x0);

struct Moments {
    double mean{0.0};
    double variance{0.0};
};

/// Trapezoid moments of the node density.
[[nodiscard]] Moments distribution_moments(const DensityOnGrid& d);

/// Sup over the merged nodes of |F_a - F_b|, each CDF linear between its nodes and held at its
/// end values outside them.
[[nodiscard]] double ks_distance(std::span<const double> ya, std::span<const double> fa, std::span<const double> yb,
                                 std::span<const double> fb);
[[nodiscard]] double ks_distance(const DensityOnGrid& a, const DensityOnGrid& b);

/// Linear interpolation of a nodal CDF, clamped at the ends.
[[nodiscard]] double interpolate_cdf(std::span<const double> y, std::span<const double> f, double at);

} // namespace popdyn
