#include "cgmc/chaos.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "cgmc/parallel.hpp"
#include "cgmc/quadrature.hpp"
#include "cgmc/stats.hpp"

namespace cgmc {

void ChaosParams::validate() const {
    if (dimension != 1 && dimension != 2)
        throw std::invalid_argument("chaos params: dimension must be 1 or 2");
    if (!std::isfinite(gamma) || !std::isfinite(beta))
        throw std::invalid_argument("chaos params: gamma/beta must be finite");
}

std::string phase_name(Phase p) {
    switch (p) {
        case Phase::PhaseI_inner: return "phase-I";
        case Phase::Frontier_I_II: return "frontier-I/II";
        case Phase::PhaseII_inner: return "phase-II";
        case Phase::PhaseIII_inner: return "phase-III";
        case Phase::Frontier_I_III: return "frontier-I/III";
        case Phase::Frontier_II_III: return "frontier-II/III";
        case Phase::TriplePoint: return "triple-point";
    }
    return "?";
}

PhaseLabel classify_phase(const ChaosParams& params, double tol) {
    params.validate();
    // the diagram lives on the nonnegative quadrant (Gaussian symmetry)
    if (params.gamma < 0.0 || params.beta < 0.0)
        throw std::invalid_argument("classify_phase: gamma/beta must be nonnegative");
    if (tol < 0.0) throw std::invalid_argument("classify_phase: tol must be >= 0");
    const double d = static_cast<double>(params.dimension);
    const double g = params.gamma;
    const double b = params.beta;
    const double sd2 = std::sqrt(d / 2.0);
    const double s2d = std::sqrt(2.0 * d);

    const bool on_gamma_crit = std::abs(g - sd2) <= tol * std::max(1.0, sd2);
    const bool on_circle = std::abs(g * g + b * b - d) <= tol * std::max(1.0, d);
    const bool on_diag = std::abs(g + b - s2d) <= tol * std::max(1.0, s2d);

    if (on_gamma_crit && std::abs(b - sd2) <= tol * std::max(1.0, sd2))
        return {Phase::TriplePoint, false};
    if (on_gamma_crit && g * g + b * b > d) return {Phase::Frontier_II_III, true};
    if (on_diag && g > sd2 && g <= s2d + tol) return {Phase::Frontier_I_II, true};
    if (on_circle && g < sd2) return {Phase::Frontier_I_III, true};
    if (g * g + b * b < d || (g + b < s2d && g >= sd2)) return {Phase::PhaseI_inner, true};
    if (g < sd2) return {Phase::PhaseIII_inner, true};
    return {Phase::PhaseII_inner, false};
}

double zeta(const ChaosParams& params, double p) {
    const double d = static_cast<double>(params.dimension);
    const double g2 = params.gamma * params.gamma;
    const double b2 = params.beta * params.beta;
    return (d + 0.5 * g2 - 0.5 * b2) * p - 0.5 * g2 * p * p;
}

CriticalP critical_p(const ChaosParams& params) {
    params.validate();
    const double d = static_cast<double>(params.dimension);
    const double g2 = params.gamma * params.gamma;
    const double b2 = params.beta * params.beta;
    const double inf = std::numeric_limits<double>::infinity();
    if (params.gamma == 0.0) {
        if (d - 0.5 * b2 > 0.0) return {inf, false, "linear zeta, all moments"};
        return {inf, false, "no L_p window"};
    }
    const double bcoef = d + 0.5 * g2 - 0.5 * b2;
    double disc = bcoef * bcoef - 2.0 * g2 * d;
    // double roots (the frontier I/II) land at disc = 0 up to roundoff
    if (disc < 0.0 && disc > -1e-12 * std::max(1.0, bcoef * bcoef)) disc = 0.0;
    if (disc < 0.0) return {inf, false, "no L_p window"};
    const double pc = (bcoef + std::sqrt(disc)) / g2;
    if (pc <= 1.0) return {inf, false, "no L_p window"};
    return {pc, true, ""};
}

double renormalization_factor(const ChaosParams& params, double eps) {
    if (!(eps > 0.0 && eps < 1.0))
        throw std::invalid_argument("renormalization_factor: eps must lie in (0,1)");
    const double d = static_cast<double>(params.dimension);
    const double g = params.gamma;
    const double b = params.beta;
    const double l = std::abs(std::log(eps));
    switch (classify_phase(params).phase) {
        case Phase::PhaseI_inner:
        case Phase::Frontier_I_II:
            return std::pow(eps, 0.5 * (g * g - b * b));
        case Phase::PhaseIII_inner:
            return std::pow(eps, g * g - 0.5 * d);
        case Phase::Frontier_I_III:
            return std::pow(eps, g * g - 0.5 * d) / std::sqrt(l);
        case Phase::Frontier_II_III:
            return std::pow(l, 0.25);
        case Phase::PhaseII_inner:
            return std::pow(l, 1.5 * g / std::sqrt(2.0 * d)) *
                   std::pow(eps, g * std::sqrt(2.0 * d) - d);
        case Phase::TriplePoint:
            return std::pow(l, -0.25);
    }
    throw std::logic_error("unreachable");
}

// ---------------------------------------------------------------------------
// test functions

namespace {
double bump_profile(double u) {
    const double u2 = u * u;
    if (u2 >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - u2));
}

double bump_profile_mass() {
    static const double mass =
        integrate([](double u) { return bump_profile(u); }, -1.0, 1.0, {1e-13, 1e-12, 20000})
            .value;
    return mass;
}
}  // namespace

TestFunction TestFunction::bump(std::vector<double> center, double radius) {
    TestFunction f;
    f.kind = Kind::SmoothBump;
    f.center = std::move(center);
    f.radius = radius;
    return f;
}

TestFunction TestFunction::indicator(std::vector<double> center, double radius) {
    TestFunction f;
    f.kind = Kind::Indicator;
    f.center = std::move(center);
    f.radius = radius;
    return f;
}

double TestFunction::value1d(double x) const {
    const double u = (x - center.at(0)) / radius;
    return kind == Kind::SmoothBump ? bump_profile(u) : (std::abs(u) <= 1.0 ? 1.0 : 0.0);
}

double TestFunction::operator()(const std::vector<double>& x) const {
    double v = 1.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double u = (x[i] - center.at(i)) / radius;
        v *= kind == Kind::SmoothBump ? bump_profile(u) : (std::abs(u) <= 1.0 ? 1.0 : 0.0);
    }
    return v;
}

double TestFunction::integral(int dimension) const {
    const double per_axis =
        kind == Kind::SmoothBump ? radius * bump_profile_mass() : 2.0 * radius;
    return std::pow(per_axis, dimension);
}

void TestFunction::validate_support(const Grid& grid) const {
    if (static_cast<int>(center.size()) != grid.dimension)
        throw std::invalid_argument("test function: dimension mismatch");
    for (double c : center)
        if (c - radius < 0.0 || c + radius > grid.length)
            throw std::invalid_argument("test function: support exceeds the grid domain");
}

// ---------------------------------------------------------------------------
// chaos evaluations

namespace {
void check_shared_grid(const FieldHierarchy& x, const FieldHierarchy& y) {
    if (x.grid.dimension != y.grid.dimension || x.grid.n != y.grid.n ||
        x.grid.length != y.grid.length || x.n_levels() != y.n_levels())
        throw std::invalid_argument("chaos: field hierarchies must share grid and schedule");
}

void check_params_grid(const ChaosParams& params, const Grid& grid) {
    if (params.dimension != grid.dimension)
        throw std::invalid_argument("chaos: params/grid dimension mismatch");
}
}  // namespace

std::complex<double> complex_chaos(const FieldHierarchy& field_x, const FieldHierarchy& field_y,
                                   const ChaosParams& params, std::size_t level,
                                   const TestFunction& phi) {
    params.validate();
    check_shared_grid(field_x, field_y);
    check_params_grid(params, field_x.grid);
    phi.validate_support(field_x.grid);
    const auto& X = field_x.at_level(level);
    const auto& Y = field_y.at_level(level);
    const Grid& grid = field_x.grid;
    const double h = grid.spacing();
    std::complex<double> acc = 0.0;
    if (grid.dimension == 1) {
        for (std::size_t i = 0; i < grid.n; ++i) {
            const double w = phi.value1d(grid.coord(i));
            if (w == 0.0) continue;
            acc += w * std::exp(params.gamma * X[i]) *
                   std::polar(1.0, params.beta * Y[i]);
        }
        return acc * h;
    }
    std::vector<double> pt(2);
    for (std::size_t a = 0; a < grid.n; ++a) {
        pt[0] = grid.coord(a);
        for (std::size_t b = 0; b < grid.n; ++b) {
            pt[1] = grid.coord(b);
            const double w = phi(pt);
            if (w == 0.0) continue;
            const std::size_t i = a * grid.n + b;
            acc += w * std::exp(params.gamma * X[i]) * std::polar(1.0, params.beta * Y[i]);
        }
    }
    return acc * (h * h);
}

std::complex<double> renormalized_chaos(const FieldHierarchy& field_x,
                                        const FieldHierarchy& field_y,
                                        const ChaosParams& params, std::size_t level,
                                        const TestFunction& phi) {
    const double eps = field_x.schedule.eps(level);
    return renormalization_factor(params, eps) * complex_chaos(field_x, field_y, params, level, phi);
}

double real_chaos(const FieldHierarchy& field_x, const ChaosParams& params, std::size_t level,
                  const TestFunction& phi, bool wick) {
    if (params.beta != 0.0) throw std::invalid_argument("real_chaos requires beta = 0");
    phi.validate_support(field_x.grid);
    const auto& X = field_x.at_level(level);
    const Grid& grid = field_x.grid;
    const double h = grid.spacing();
    const double wick_factor =
        wick ? std::exp(-0.5 * params.gamma * params.gamma * field_x.level_variance.at(level))
             : 1.0;
    double acc = 0.0;
    if (grid.dimension == 1) {
        for (std::size_t i = 0; i < grid.n; ++i) {
            const double w = phi.value1d(grid.coord(i));
            if (w != 0.0) acc += w * std::exp(params.gamma * X[i]);
        }
        return acc * h * wick_factor;
    }
    std::vector<double> pt(2);
    for (std::size_t a = 0; a < grid.n; ++a) {
        pt[0] = grid.coord(a);
        for (std::size_t b = 0; b < grid.n; ++b) {
            pt[1] = grid.coord(b);
            const double w = phi(pt);
            if (w != 0.0) acc += w * std::exp(params.gamma * X[a * grid.n + b]);
        }
    }
    return acc * h * h * wick_factor;
}

double derivative_martingale(const FieldHierarchy& field_x, int dimension, std::size_t level,
                             const TestFunction& phi) {
    phi.validate_support(field_x.grid);
    const double gc = std::sqrt(2.0 * dimension);
    const double v = field_x.level_variance.at(level);
    const auto& X = field_x.at_level(level);
    const Grid& grid = field_x.grid;
    const double h = grid.spacing();
    const double wick = std::exp(-0.5 * gc * gc * v);
    double acc = 0.0;
    if (grid.dimension == 1) {
        for (std::size_t i = 0; i < grid.n; ++i) {
            const double w = phi.value1d(grid.coord(i));
            if (w != 0.0) acc += w * (gc * v - X[i]) * std::exp(gc * X[i]) * wick;
        }
        return acc * h;
    }
    std::vector<double> pt(2);
    for (std::size_t a = 0; a < grid.n; ++a) {
        pt[0] = grid.coord(a);
        for (std::size_t b = 0; b < grid.n; ++b) {
            pt[1] = grid.coord(b);
            const double w = phi(pt);
            if (w != 0.0) {
                const double x = X[a * grid.n + b];
                acc += w * (gc * v - x) * std::exp(gc * x) * wick;
            }
        }
    }
    return acc * h * h;
}

std::complex<double> complex_chaos_interval(const FieldHierarchy& field_x,
                                            const FieldHierarchy& field_y,
                                            const ChaosParams& params, std::size_t level,
                                            double a, double b) {
    check_shared_grid(field_x, field_y);
    if (field_x.grid.dimension != 1)
        throw std::invalid_argument("interval measures are d = 1 helpers");
    const auto& X = field_x.at_level(level);
    const auto& Y = field_y.at_level(level);
    const double h = field_x.grid.spacing();
    const std::size_t i0 = static_cast<std::size_t>(std::max(0.0, std::ceil(a / h - 1e-12)));
    std::complex<double> acc = 0.0;
    for (std::size_t i = i0; i < field_x.grid.n && field_x.grid.coord(i) < b - 1e-15; ++i)
        acc += std::exp(params.gamma * X[i]) * std::polar(1.0, params.beta * Y[i]);
    return acc * h;
}

double real_chaos_interval(const FieldHierarchy& field_x, double gamma, std::size_t level,
                           double a, double b, bool wick) {
    if (field_x.grid.dimension != 1)
        throw std::invalid_argument("interval measures are d = 1 helpers");
    const auto& X = field_x.at_level(level);
    const double h = field_x.grid.spacing();
    const double wf =
        wick ? std::exp(-0.5 * gamma * gamma * field_x.level_variance.at(level)) : 1.0;
    const std::size_t i0 = static_cast<std::size_t>(std::max(0.0, std::ceil(a / h - 1e-12)));
    double acc = 0.0;
    for (std::size_t i = i0; i < field_x.grid.n && field_x.grid.coord(i) < b - 1e-15; ++i)
        acc += std::exp(gamma * X[i]);
    return acc * h * wf;
}

StarScaleResult star_scale_test(const HierarchySampler& sampler, double gamma, double lambda,
                                double q, std::size_t n_replicas, std::uint64_t seed,
                                unsigned threads) {
    if (sampler.grid().dimension != 1)
        throw std::invalid_argument("star_scale_test: d = 1 only");
    if (!(lambda > 0.0 && lambda <= 1.0))
        throw std::invalid_argument("star_scale_test: lambda must lie in (0,1]");
    ChaosParams p{1, gamma, 0.0};
    const auto pc = critical_p(p);
    if (pc.finite && q >= pc.value)
        throw std::invalid_argument("star_scale_test: q outside the moment window");

    const auto& sched = sampler.schedule();
    // deepest level pair with eps(j_lo) = lambda * eps(j_hi)
    std::size_t j_hi = sched.size(), j_lo = sched.size();
    for (std::size_t hi = sched.size(); hi-- > 0;) {
        for (std::size_t lo = sched.size(); lo-- > hi;) {
            if (std::abs(sched.eps(lo) - lambda * sched.eps(hi)) <= 1e-12 * sched.eps(hi)) {
                j_hi = hi;
                j_lo = lo;
                break;
            }
        }
        if (j_hi != sched.size()) break;
    }
    if (j_hi == sched.size())
        throw std::invalid_argument("star_scale_test: lambda does not match the schedule");

    const double zq = zeta(p, q);
    std::vector<double> small_side(n_replicas), unit_side(n_replicas);
    parallel_for(
        n_replicas,
        [&](std::size_t r) {
            auto field = sampler.sample(seed, static_cast<std::uint32_t>(r), 0);
            small_side[r] =
                std::pow(real_chaos_interval(field, gamma, j_lo, 0.0, lambda, true), q);
            unit_side[r] = std::pow(real_chaos_interval(field, gamma, j_hi, 0.0, 1.0, true), q);
        },
        threads);

    const double scale = std::pow(lambda, zq);
    // batch ratios for the stderr; the point estimate uses the full means
    const std::size_t n_batches = 32;
    std::vector<double> batch_ratio;
    if (n_replicas >= 2 * n_batches) {
        for (std::size_t k = 0; k < n_batches; ++k) {
            double sa = 0.0, sb = 0.0;
            const std::size_t lo = k * n_replicas / n_batches;
            const std::size_t hi = (k + 1) * n_replicas / n_batches;
            for (std::size_t i = lo; i < hi; ++i) {
                sa += small_side[i];
                sb += unit_side[i];
            }
            batch_ratio.push_back(sa / (scale * sb));
        }
    }
    double sa = 0.0, sb = 0.0;
    for (std::size_t i = 0; i < n_replicas; ++i) {
        sa += small_side[i];
        sb += unit_side[i];
    }
    StarScaleResult out;
    out.ratio = sa / (scale * sb);
    out.stderr_ = batch_ratio.empty() ? 0.0 : mean_stderr(batch_ratio).stderr_;
    out.lambda = lambda;
    out.q = q;
    out.n_replicas = n_replicas;
    return out;
}

}  // namespace cgmc
