#include "popdyn/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace popdyn {

namespace {

constexpr double kGl2X[2] = {-0.5773502691896257645, 0.5773502691896257645};
constexpr double kGl2W[2] = {1.0, 1.0};
constexpr double kGl4X[4] = {-0.8611363115940525752, -0.3399810435848562648, 0.3399810435848562648,
                             0.8611363115940525752};
constexpr double kGl4W[4] = {0.3478548451374538574, 0.6521451548625461426, 0.6521451548625461426,
                             0.3478548451374538574};

// Panels in s = ln(level - x) are at most this wide.
constexpr double kMaxLogPanel = 0.5;
// The integral over level - x < kNearFraction * (level - a) is approximated by a single value.
constexpr double kNearFraction = 1e-12;

// Smallest w with P(X > w) <= p, by bisection on a log scale.
double upper_quantile(const JumpDistribution& d, double p) {
    double lo = 0.0;
    double hi = std::max(1.0, d.mean());
    while (d.ccdf(hi) > p && hi < 1e300) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (d.ccdf(mid) > p ? lo : hi) = mid;
    }
    return hi;
}

double lambda_m(double x, const SystemParams& sys, const InfluencerParams& inf) {
    return posting_intensity(x, inf) * conditional_jump_mean(x, sys, inf);
}

} // namespace

// ---------------------------------------------------------------------------------------------
// grids and densities

Grid Grid::log_spaced(double y_min, double y_max, std::size_t n) {
    if (!(y_min > 0.0) || !(y_max > y_min) || n < 2) throw std::invalid_argument("log grid needs 0 < y_min < y_max");
    Grid g;
    g.nodes.resize(n);
    const double a = std::log(y_min);
    const double b = std::log(y_max);
    for (std::size_t j = 0; j < n; ++j)
        g.nodes[j] = std::exp(a + (b - a) * static_cast<double>(j) / static_cast<double>(n - 1));
    g.nodes.front() = y_min;
    g.nodes.back() = y_max;
    return g;
}

void Grid::validate() const {
    if (nodes.size() < 64) throw std::invalid_argument("grid needs at least 64 nodes");
    if (!(nodes.front() > 0.0)) throw std::invalid_argument("grid nodes must be positive");
    for (std::size_t j = 1; j < nodes.size(); ++j)
        if (!(nodes[j] > nodes[j - 1])) throw std::invalid_argument("grid nodes must be strictly increasing");
}

Grid default_grid(const SystemParams& sys, const InfluencerParams& inf, const GridSpec& spec) {
    double lo = spec.y_min.value_or(0.0);
    double hi = spec.y_max.value_or(0.0);
    if (!spec.y_min || !spec.y_max) {
        const auto level = drift_balance_level(sys, inf);
        if (!level || !(*level > 0.0))
            throw std::invalid_argument("no finite positive drift-balance level; set solver.ymin and solver.ymax");
        const double x = *level;
        const JumpDistribution v = unit_jump(inf);
        const double m = conditional_jump_mean(x, sys, inf);
        const double v_cv = std::isfinite(v.cv()) ? v.cv() : 4.0;
        double noise = posting_intensity(x, inf) * m * m * (1.0 + v_cv * v_cv);
        if (sys.mu > 0.0) {
            const double w_cv = std::isfinite(sys.w_dist.cv()) ? sys.w_dist.cv() : 4.0;
            noise += sys.mu * sys.w_dist.mean() * sys.w_dist.mean() * (1.0 + w_cv * w_cv);
        }
        // Linear-noise estimate: restoring rate gamma - d(lambda m)/dx at the balance level.
        const double dx = 1e-6 * x;
        const double slope = (lambda_m(x + dx, sys, inf) - lambda_m(x - dx, sys, inf)) / (2.0 * dx);
        const double kappa = std::max(sys.gamma - slope, 0.05 * sys.gamma);
        const double rel = std::clamp(std::sqrt(noise / (2.0 * kappa)) / x, 0.01, 2.0);
        double tail = x + m * upper_quantile(v, 1e-6);
        if (sys.mu > 0.0) tail = std::max(tail, x + upper_quantile(sys.w_dist, 1e-6));
        if (!spec.y_min) lo = x * std::exp(-8.0 * rel);
        if (!spec.y_max) hi = std::max(x * std::exp(12.0 * rel), tail);
    }
    if (!(lo > 0.0) || !(hi > lo)) throw std::invalid_argument("solver grid needs 0 < ymin < ymax");
    std::size_t n = 0;
    if (spec.nodes) {
        n = *spec.nodes;
    } else {
        const double step = 0.5 * sys.gamma / (posting_intensity(hi, inf) + sys.mu);
        n = static_cast<std::size_t>(std::clamp(std::ceil(std::log(hi / lo) / step) + 1.0, 512.0, 8192.0));
    }
    Grid g = Grid::log_spaced(lo, hi, n);
    g.validate();
    return g;
}

DensityOnGrid DensityOnGrid::from_density(Grid grid, std::vector<double> f) {
    grid.validate();
    if (f.size() != grid.size()) throw std::invalid_argument("density size must match the grid");
    for (double v : f)
        if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("density must be finite and >= 0");
    const auto& y = grid.nodes;
    std::vector<double> cdf(y.size(), 0.0);
    for (std::size_t j = 1; j < y.size(); ++j) cdf[j] = cdf[j - 1] + 0.5 * (f[j - 1] + f[j]) * (y[j] - y[j - 1]);
    const double z = cdf.back();
    if (!(z > 0.0)) throw std::invalid_argument("density has zero integral");
    for (double& v : f) v /= z;
    for (double& v : cdf) v /= z;
    return DensityOnGrid{std::move(grid), std::move(f), std::move(cdf)};
}

DensityOnGrid DensityOnGrid::from_cell_masses(Grid grid, std::span<const double> mass) {
    grid.validate();
    const std::size_t c = grid.cells();
    if (mass.size() != c) throw std::invalid_argument("need one mass per cell");
    const auto& y = grid.nodes;
    const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
    if (!(total > 0.0)) throw std::invalid_argument("cell masses sum to zero");
    std::vector<double> f(grid.size());
    f[0] = mass[0] / (y[1] - y[0]);
    f[c] = mass[c - 1] / (y[c] - y[c - 1]);
    for (std::size_t j = 1; j < c; ++j) f[j] = (mass[j - 1] + mass[j]) / (y[j + 1] - y[j - 1]);
    DensityOnGrid d = from_density(std::move(grid), std::move(f));
    // The CDF is the exact cumulative cell mass rather than the trapezoid of f.
    double acc = 0.0;
    d.cdf[0] = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
        acc += mass[j];
        d.cdf[j + 1] = acc / total;
    }
    d.cdf[c] = 1.0;
    return d;
}

double DensityOnGrid::density_at(double y) const {
    const auto& n = grid.nodes;
    if (y < n.front() || y > n.back()) return 0.0;
    const std::size_t k = std::min<std::size_t>(
        static_cast<std::size_t>(std::upper_bound(n.begin(), n.end(), y) - n.begin()), n.size() - 1);
    const std::size_t j = k - 1;
    const double t = (std::log(y) - std::log(n[j])) / (std::log(n[k]) - std::log(n[j]));
    if (density[j] > 0.0 && density[k] > 0.0)
        return std::exp((1.0 - t) * std::log(density[j]) + t * std::log(density[k]));
    return (1.0 - t) * density[j] + t * density[k];
}

double DensityOnGrid::cdf_at(double y) const { return interpolate_cdf(grid.nodes, cdf, y); }

// ---------------------------------------------------------------------------------------------
// kernel

double kernel_ccdf(double y, double x, const SystemParams& sys, const InfluencerParams& inf, KernelForm form) {
    if (y < x) throw std::invalid_argument("kernel_ccdf needs x <= y");
    const double w = y - x;
    const double lam = posting_intensity(x, inf);
    const double fv = unit_jump(inf).ccdf(w / conditional_jump_mean(x, sys, inf));
    const double fw = sys.mu > 0.0 ? sys.w_dist.ccdf(w) : 0.0;
    if (form == KernelForm::Split) return lam * fv + sys.mu * fw;
    const double total = lam + sys.mu;
    if (total <= 0.0) return 0.0;
    const double fz = (lam * fv + sys.mu * fw) / total;
    return total * fz;
}

LevelCrossingKernel::LevelCrossingKernel(const SystemParams& sys, const InfluencerParams& inf, const Grid& grid,
                                         KernelForm form)
    : sys_(sys), inf_(inf), v_hat_(unit_jump(inf)), form_(form), nodes_(grid.nodes) {
    sys_.validate();
    inf_.validate();
    rules_.resize(nodes_.size() > 0 ? 2 * (nodes_.size() - 1) : 0);
    for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
        const double a = nodes_[i];
        const double b = nodes_[i + 1];
        const double mid = 0.5 * (a + b);
        const double half = 0.5 * (b - a);
        for (int rule = 0; rule < 2; ++rule) {
            CellRule& r = rules_[2 * i + static_cast<std::size_t>(rule)];
            r.n = rule == 0 ? 2 : 4;
            for (int q = 0; q < r.n; ++q) {
                const double x = mid + half * (rule == 0 ? kGl2X[q] : kGl4X[q]);
                const double w = half * (rule == 0 ? kGl2W[q] : kGl4W[q]);
                r.x[q] = x;
                r.w[q] = w;
                r.lam[q] = posting_intensity(x, inf_);
                r.inv_m[q] = 1.0 / conditional_jump_mean(x, sys_, inf_);
            }
        }
    }
}

double LevelCrossingKernel::eval(double level, double x, double lam, double inv_m) const {
    const double w = level - x;
    const double fv = v_hat_.ccdf(w * inv_m);
    const double fw = sys_.mu > 0.0 ? sys_.w_dist.ccdf(w) : 0.0;
    if (form_ == KernelForm::Split) return lam * fv + sys_.mu * fw;
    const double total = lam + sys_.mu;
    if (total <= 0.0) return 0.0;
    return total * ((lam * fv + sys_.mu * fw) / total);
}

double LevelCrossingKernel::operator()(double level, double x) const {
    if (level < x) throw std::invalid_argument("kernel needs x <= level");
    return eval(level, x, posting_intensity(x, inf_), 1.0 / conditional_jump_mean(x, sys_, inf_));
}

double LevelCrossingKernel::log_distance_integral(double level, double a, double b) const {
    // x = level - e^s; dx = e^s ds.
    const double ua = level - a;
    double ub = level - b;
    double near = 0.0;
    const double u_min = kNearFraction * ua;
    if (ub < u_min) {
        const double x = level - 0.5 * (u_min + ub);
        near = (*this)(level, x) * (u_min - ub);
        ub = u_min;
    }
    double scale = conditional_jump_mean(a, sys_, inf_);
    if (sys_.mu > 0.0) scale = std::min(scale, sys_.w_dist.mean());
    const double s_lo = std::log(ub);
    const double s_hi = std::log(ua);
    const double ds_max = scale < ua ? std::min(kMaxLogPanel, scale / ua) : kMaxLogPanel;
    const auto panels = static_cast<std::size_t>(std::clamp(std::ceil((s_hi - s_lo) / ds_max), 1.0, 20000.0));
    const double ds = (s_hi - s_lo) / static_cast<double>(panels);
    double sum = 0.0;
    for (std::size_t p = 0; p < panels; ++p) {
        const double c = s_lo + (static_cast<double>(p) + 0.5) * ds;
        for (int q = 0; q < 4; ++q) {
            const double s = c + 0.5 * ds * kGl4X[q];
            const double u = std::exp(s);
            sum += 0.5 * ds * kGl4W[q] * u * (*this)(level, level - u);
        }
    }
    return sum + near;
}

double LevelCrossingKernel::integral(double level, double a, double b) const {
    if (!(a <= b)) throw std::invalid_argument("integral needs a <= b");
    if (b > level * (1.0 + 1e-12)) throw std::invalid_argument("integral upper end lies above the level");
    b = std::min(b, level);
    if (b == a) return 0.0;
    return log_distance_integral(level, a, b);
}

double LevelCrossingKernel::cell_integral(double level, std::size_t cell) const {
    const double a = nodes_.at(cell);
    const double b = nodes_.at(cell + 1);
    if (b > level * (1.0 + 1e-12)) throw std::invalid_argument("cell lies above the level");
    const double ratio = (level - a) / (level - b);
    double scale = conditional_jump_mean(a, sys_, inf_);
    if (sys_.mu > 0.0) scale = std::min(scale, sys_.w_dist.mean());
    if (b - a <= scale && ratio <= 2.0) {
        const CellRule& r = rules_[2 * cell + (ratio <= 1.2 ? 0 : 1)];
        double sum = 0.0;
        for (int q = 0; q < r.n; ++q) sum += r.w[q] * eval(level, r.x[q], r.lam[q], r.inv_m[q]);
        return sum;
    }
    return integral(level, a, b);
}

// ---------------------------------------------------------------------------------------------
// stationary solver

StationarySolution solve_stationary(const SystemParams& sys, const InfluencerParams& inf, const Grid& grid,
                                    const SolverOptions& opts) {
    grid.validate();
    sys.validate();
    inf.validate();
    if (!(opts.tol > 0.0) || opts.max_iter < 2) throw std::invalid_argument("solver needs tol > 0 and max_iter >= 2");

    SolverDiagnostics diag;
    diag.ergodicity = check_ergodicity(sys, inf);
    if (diag.ergodicity.status == ErgodicityStatus::NotGuaranteed)
        diag.warnings.push_back("stationarity not guaranteed: " + diag.ergodicity.detail);

    const LevelCrossingKernel kernel(sys, inf, grid, opts.form);
    const auto& y = grid.nodes;
    const std::size_t c = grid.cells();
    std::vector<double> h(c);
    std::vector<double> level(c);
    std::vector<double> pivot(c);
    for (std::size_t j = 0; j < c; ++j) {
        h[j] = y[j + 1] - y[j];
        if (opts.scheme == StationaryScheme::Midpoint) {
            level[j] = std::sqrt(y[j] * y[j + 1]);
            pivot[j] = (sys.gamma * level[j] - kernel.integral(level[j], y[j], level[j])) / h[j];
        } else {
            level[j] = y[j];
            pivot[j] = sys.gamma / std::log(y[j + 1] / y[j]);
        }
    }
    diag.min_pivot = *std::min_element(pivot.begin() + 1, pivot.end());
    if (!(diag.min_pivot > 0.0)) {
        std::ostringstream msg;
        msg << "grid too coarse for the marching solver: drift out of a cell does not exceed the jump rate "
               "inside it (min pivot "
            << diag.min_pivot << "); use a log step below about 2 gamma / (lambda + mu)";
        throw SolverError(msg.str(), diag);
    }

    std::vector<double> mass(c, 0.0);
    mass[0] = 1.0;
    auto row = [&](std::size_t j, const std::vector<double>& m) {
        double rhs = 0.0;
        for (std::size_t i = 0; i < j; ++i)
            if (m[i] > 0.0) rhs += m[i] / h[i] * kernel.cell_integral(level[j], i);
        return rhs;
    };

    for (std::size_t sweep = 1; sweep <= opts.max_iter; ++sweep) {
        std::vector<double> next(mass);
        double res_num = 0.0;
        double res_den = 0.0;
        if (sweep == 1) {
            // Gauss-Seidel from the seeded bottom cell solves the triangular system in one pass.
            for (std::size_t j = 1; j < c; ++j) {
                next[j] = row(j, next) / pivot[j];
                if (next[j] > 1e200)
                    for (std::size_t i = 0; i <= j; ++i) next[i] *= 1e-200;
            }
        } else {
            // Jacobi pass on the normalized masses; measures the balance residual.
            for (std::size_t j = 1; j < c; ++j) {
                const double rhs = row(j, mass);
                res_num += std::abs(pivot[j] * mass[j] - rhs);
                res_den += std::abs(rhs);
                next[j] = rhs / pivot[j];
            }
        }
        const double total = std::accumulate(next.begin(), next.end(), 0.0);
        if (!(total > 0.0) || !std::isfinite(total)) throw SolverError("stationary masses degenerate", diag);
        double change = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
            next[j] /= total;
            change += std::abs(next[j] - mass[j]);
        }
        mass = std::move(next);
        diag.iterations = sweep;
        diag.change_history.push_back(change);
        if (sweep > 1) diag.residual = res_den > 0.0 ? res_num / res_den : 0.0;
        if (sweep > 1 && change < opts.tol) {
            diag.converged = true;
            break;
        }
    }
    diag.mass_bottom_cell = mass.front();
    diag.mass_top_cell = mass.back();
    if (diag.mass_bottom_cell > 1e-4) diag.warnings.push_back("grid may cut the lower tail (bottom-cell mass high)");
    if (diag.mass_top_cell > 1e-4) diag.warnings.push_back("grid may cut the upper tail (top-cell mass high)");
    if (!diag.converged) {
        std::ostringstream msg;
        msg << "stationary solver did not converge in " << opts.max_iter << " sweeps (last change "
            << diag.change_history.back() << ", residual " << diag.residual << ")";
        throw SolverError(msg.str(), diag);
    }
    StationarySolution sol{DensityOnGrid::from_cell_masses(grid, mass), std::move(mass), std::move(diag)};
    return sol;
}

// ---------------------------------------------------------------------------------------------
// transient

TransientEvolver::TransientEvolver(const SystemParams& sys, const InfluencerParams& inf, Grid grid, KernelForm form)
    : grid_(std::move(grid)), gamma_(sys.gamma) {
    grid_.validate();
    const LevelCrossingKernel kernel(sys, inf, grid_, form);
    const auto& y = grid_.nodes;
    const auto c = static_cast<Eigen::Index>(grid_.cells());
    down_rate_.resize(c);
    jump_flux_ = Eigen::MatrixXd::Zero(c, c);
    for (Eigen::Index k = 0; k < c; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        down_rate_(k) = sys.gamma / std::log(y[ku + 1] / y[ku]);
        for (Eigen::Index i = 0; i < k; ++i) {
            const auto iu = static_cast<std::size_t>(i);
            jump_flux_(k, i) = kernel.cell_integral(y[ku], iu) / (y[iu + 1] - y[iu]);
        }
    }
    max_dt_ = 1.0 / (down_rate_.maxCoeff() + posting_intensity(y.back(), inf) + sys.mu);
    mass_ = Eigen::VectorXd::Zero(c);
    mass_(0) = 1.0;
}

void TransientEvolver::set_cdf(std::span<const double> cdf) {
    const std::size_t n = grid_.size();
    if (cdf.size() != n) throw std::invalid_argument("initial CDF must have one value per node");
    std::vector<double> m(n - 1);
    for (std::size_t j = 0; j + 1 < n; ++j) m[j] = cdf[j + 1] - cdf[j];
    m.front() += cdf[0];
    m.back() += 1.0 - cdf[n - 1];
    set_cell_masses(m);
}

void TransientEvolver::set_cell_masses(std::span<const double> mass) {
    if (mass.size() != grid_.cells()) throw std::invalid_argument("need one mass per cell");
    double total = 0.0;
    for (double v : mass) {
        if (v < -1e-12) throw std::invalid_argument("initial distribution must be nondecreasing");
        total += std::max(v, 0.0);
    }
    if (!(total > 0.0)) throw std::invalid_argument("initial distribution has no mass");
    for (std::size_t j = 0; j < mass.size(); ++j) mass_(static_cast<Eigen::Index>(j)) = std::max(mass[j], 0.0) / total;
}

void TransientEvolver::step(double dt) {
    if (!(dt > 0.0) || dt > max_dt_ * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "time step " << dt << " outside (0, " << max_dt_ << "], the explicit stability bound";
        throw std::invalid_argument(msg.str());
    }
    const Eigen::Index c = mass_.size();
    // Net downward flux across node k; zero at the bottom and (implicitly) at the top.
    Eigen::VectorXd flux = down_rate_.cwiseProduct(mass_) - jump_flux_.triangularView<Eigen::StrictlyLower>() * mass_;
    flux(0) = 0.0;
    Eigen::VectorXd change(c);
    change.head(c - 1) = flux.tail(c - 1) - flux.head(c - 1);
    change(c - 1) = -flux(c - 1);
    mass_ += dt * change;
    const double worst = mass_.minCoeff();
    if (worst < -1e-12) {
        std::ostringstream msg;
        msg << "transient instability: negative cell mass " << worst;
        throw std::runtime_error(msg.str());
    }
    mass_ = mass_.cwiseMax(0.0);
}

void TransientEvolver::advance(double t, double dt) {
    if (!(t >= 0.0)) throw std::invalid_argument("advance needs t >= 0");
    if (t == 0.0) return;
    const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(t / dt - 1e-9)));
    const double h = t / static_cast<double>(n);
    for (std::size_t s = 0; s < n; ++s) step(h);
}

std::vector<double> TransientEvolver::cdf() const {
    std::vector<double> f(grid_.size(), 0.0);
    const double total = mass_.sum();
    double acc = 0.0;
    for (Eigen::Index j = 0; j < mass_.size(); ++j) {
        acc += mass_(j);
        f[static_cast<std::size_t>(j) + 1] = acc / total;
    }
    f.back() = 1.0;
    return f;
}

double max_stable_dt(const Grid& grid, const SystemParams& sys, const InfluencerParams& inf) {
    grid.validate();
    double min_step = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j + 1 < grid.size(); ++j)
        min_step = std::min(min_step, std::log(grid.nodes[j + 1] / grid.nodes[j]));
    return 1.0 / (sys.gamma / min_step + posting_intensity(grid.y_max(), inf) + sys.mu);
}

std::vector<double> evolve_transient(const Grid& grid, std::span<const double> cdf0, const SystemParams& sys,
                                     const InfluencerParams& inf, double t_end, double dt, KernelForm form) {
    TransientEvolver ev(sys, inf, grid, form);
    ev.set_cdf(cdf0);
    ev.advance(t_end, dt);
    return ev.cdf();
}

std::vector<double> point_mass_cdf(const Grid& grid, double x0) {
    std::vector<double> f(grid.size());
    for (std::size_t j = 0; j < f.size(); ++j) f[j] = grid.nodes[j] >= x0 ? 1.0 : 0.0;
    return f;
}

// ---------------------------------------------------------------------------------------------
// summaries

Moments distribution_moments(const DensityOnGrid& d) {
    const auto& y = d.grid.nodes;
    double z = 0.0;
    double m1 = 0.0;
    double m2 = 0.0;
    for (std::size_t j = 1; j < y.size(); ++j) {
        const double w = 0.5 * (y[j] - y[j - 1]);
        z += w * (d.density[j - 1] + d.density[j]);
        m1 += w * (y[j - 1] * d.density[j - 1] + y[j] * d.density[j]);
        m2 += w * (y[j - 1] * y[j - 1] * d.density[j - 1] + y[j] * y[j] * d.density[j]);
    }
    if (!(z > 0.0)) throw std::invalid_argument("density has zero integral");
    const double mean = m1 / z;
    return {mean, std::max(0.0, m2 / z - mean * mean)};
}

double interpolate_cdf(std::span<const double> y, std::span<const double> f, double at) {
    if (y.empty() || y.size() != f.size()) throw std::invalid_argument("CDF nodes and values must match");
    if (at <= y.front()) return f.front();
    if (at >= y.back()) return f.back();
    const std::size_t k = static_cast<std::size_t>(std::upper_bound(y.begin(), y.end(), at) - y.begin());
    const double t = (at - y[k - 1]) / (y[k] - y[k - 1]);
    return f[k - 1] + t * (f[k] - f[k - 1]);
}

double ks_distance(std::span<const double> ya, std::span<const double> fa, std::span<const double> yb,
                   std::span<const double> fb) {
    double sup = 0.0;
    for (std::size_t j = 0; j < ya.size(); ++j) sup = std::max(sup, std::abs(fa[j] - interpolate_cdf(yb, fb, ya[j])));
    for (std::size_t j = 0; j < yb.size(); ++j) sup = std::max(sup, std::abs(fb[j] - interpolate_cdf(ya, fa, yb[j])));
    return std::min(sup, 1.0);
}

double ks_distance(const DensityOnGrid& a, const DensityOnGrid& b) {
    return ks_distance(a.grid.nodes, a.cdf, b.grid.nodes, b.cdf);
}

} // namespace popdyn
