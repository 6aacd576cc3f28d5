#include "cgmc/moments.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "cgmc/parallel.hpp"
#include "cgmc/quadrature.hpp"
#include "cgmc/stats.hpp"

namespace cgmc {

namespace {

void check_interval(const Interval& r, const Grid& grid) {
    if (!(r.hi > r.lo)) throw std::invalid_argument("region: empty interval");
    if (r.lo < 0.0 || r.hi > grid.length)
        throw std::invalid_argument("region exceeds the grid domain");
}

double s_total(const ChaosParams& p) { return p.gamma * p.gamma + p.beta * p.beta; }

// linear interpolation of a periodic grid function
double interp(const std::vector<double>& values, const Grid& grid, double x) {
    const double h = grid.spacing();
    double t = x / h;
    const double fl = std::floor(t);
    std::size_t i = static_cast<std::size_t>(fl) % grid.n;
    const double frac = t - fl;
    const std::size_t ip = (i + 1) % grid.n;
    return values[i] * (1.0 - frac) + values[ip] * frac;
}

}  // namespace

MomentEstimate unconditional_second_moment(const Kernel& kernel, const ChaosParams& params,
                                           double eps, const Interval& region) {
    params.validate();
    if (params.dimension != 1)
        throw std::invalid_argument("unconditional_second_moment: d = 1 regions only");
    if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("eps must lie in (0,1]");
    if (!(region.hi > region.lo)) throw std::invalid_argument("region: empty interval");
    const double a = region.length();
    const double s = s_total(params);
    const double g2 = params.gamma * params.gamma;
    const double b2 = params.beta * params.beta;
    // E|M_eps(A)|^2 = e^{(g2-b2) K(0)} * 2 int_0^a (a-r) e^{s K_eps(r)} dr
    auto integrand = [&](double r) {
        return (a - r) * std::exp(s * cutoff_covariance(kernel, r, eps));
    };
    std::vector<double> splits{eps};
    for (double b : kernel.break_points()) splits.push_back(b);
    auto quad = integrate_split(integrand, 0.0, a, splits, {1e-12, 1e-10, 8000});
    const double k0_factor = std::exp((g2 - b2) * std::log(1.0 / eps));
    MomentEstimate out;
    out.value = 2.0 * quad.value * k0_factor;
    out.stderr_ = 2.0 * quad.error * k0_factor;
    out.method = "quadrature";
    out.params = params;
    out.epsilon = eps;
    out.order = 2.0;
    return out;
}

double phase3_normalized_second_moment(const Kernel& kernel, const ChaosParams& params,
                                       double eps, const Interval& region) {
    const double d = static_cast<double>(params.dimension);
    const double g2 = params.gamma * params.gamma;
    const auto raw = unconditional_second_moment(kernel, params, eps, region);
    return std::pow(eps, 2.0 * g2 - d) * raw.value.real();
}

namespace {

// circular autocorrelation of the weights through one forward/backward FFT
std::vector<double> circular_autocorrelation(const std::vector<double>& w) {
    const std::size_t n = w.size();
    static std::mutex plan_mu;
    static std::map<std::size_t, std::pair<fftw_plan, fftw_plan>> plans;
    fftw_plan fwd, bwd;
    {
        std::lock_guard<std::mutex> lock(plan_mu);
        auto it = plans.find(n);
        if (it == plans.end()) {
            std::vector<std::complex<double>> dummy(n);
            fwd = fftw_plan_dft_1d(static_cast<int>(n),
                                   reinterpret_cast<fftw_complex*>(dummy.data()),
                                   reinterpret_cast<fftw_complex*>(dummy.data()), FFTW_FORWARD,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
            bwd = fftw_plan_dft_1d(static_cast<int>(n),
                                   reinterpret_cast<fftw_complex*>(dummy.data()),
                                   reinterpret_cast<fftw_complex*>(dummy.data()), FFTW_BACKWARD,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
            plans.emplace(n, std::make_pair(fwd, bwd));
        } else {
            std::tie(fwd, bwd) = it->second;
        }
    }
    std::vector<std::complex<double>> buf(n);
    for (std::size_t i = 0; i < n; ++i) buf[i] = w[i];
    fftw_execute_dft(fwd, reinterpret_cast<fftw_complex*>(buf.data()),
                     reinterpret_cast<fftw_complex*>(buf.data()));
    for (auto& z : buf) z = std::norm(z);
    fftw_execute_dft(bwd, reinterpret_cast<fftw_complex*>(buf.data()),
                     reinterpret_cast<fftw_complex*>(buf.data()));
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = buf[i].real() / static_cast<double>(n);
    return out;
}

}  // namespace

double conditional_second_moment(const HierarchySampler& sampler, const FieldHierarchy& field_x,
                                 const ChaosParams& params, std::size_t level,
                                 const Interval& region) {
    params.validate();
    const Grid& grid = field_x.grid;
    if (grid.dimension != 1)
        throw std::invalid_argument("conditional_second_moment: d = 1 regions only");
    check_interval(region, grid);
    const double h = grid.spacing();
    const double b2 = params.beta * params.beta;
    const double k0 = field_x.level_variance.at(level);
    const auto& X = field_x.at_level(level);

    const bool full_box = region.lo <= 1e-15 && region.hi >= grid.length - 1e-15;
    if (full_box) {
        // FFT path: circular autocorrelation against periodized pair weights
        std::vector<double> w(grid.n);
        for (std::size_t i = 0; i < grid.n; ++i) w[i] = std::exp(params.gamma * X[i]);
        const auto corr = circular_autocorrelation(w);
        double acc = 0.0;
        for (std::size_t lag = 0; lag < grid.n; ++lag) {
            const std::size_t dist = std::min(lag, grid.n - lag);
            acc += corr[lag] *
                   std::exp(b2 * (sampler.level_covariance(level, h * static_cast<double>(dist)) -
                                  k0));
        }
        return acc * h * h;
    }

    const std::size_t i0 = static_cast<std::size_t>(std::ceil(region.lo / h - 1e-12));
    const std::size_t i1 =
        std::min(grid.n, static_cast<std::size_t>(std::ceil(region.hi / h - 1e-12)));
    const std::size_t m = i1 - i0;

    std::vector<double> w(m);
    for (std::size_t i = 0; i < m; ++i) w[i] = std::exp(params.gamma * X[i0 + i]);

    // pair weights e^{b^2 (K_eps(lag) - K_eps(0))}
    std::vector<double> pw(m);
    for (std::size_t lag = 0; lag < m; ++lag)
        pw[lag] = std::exp(
            b2 * (sampler.level_covariance(level, h * static_cast<double>(lag)) - k0));

    double acc = 0.0;
    for (std::size_t lag = 1; lag < m; ++lag) {
        double corr = 0.0;
        for (std::size_t i = 0; i + lag < m; ++i) corr += w[i] * w[i + lag];
        acc += 2.0 * pw[lag] * corr;
    }
    double diag = 0.0;
    for (std::size_t i = 0; i < m; ++i) diag += w[i] * w[i];
    acc += diag;
    return acc * h * h;
}

double conditional_moment_frontier23(const HierarchySampler& sampler,
                                     const FieldHierarchy& field_x, const ChaosParams& params,
                                     std::size_t level, const Interval& region) {
    const double d = static_cast<double>(params.dimension);
    if (std::abs(params.gamma - std::sqrt(d / 2.0)) > 1e-9)
        throw std::invalid_argument("frontier II/III moment requires gamma = sqrt(d/2)");
    if (!(s_total(params) > d + 1e-9))
        throw std::invalid_argument("frontier II/III moment requires beta^2 + gamma^2 > d");
    const double eps = field_x.schedule.eps(level);
    return std::sqrt(std::abs(std::log(eps))) *
           conditional_second_moment(sampler, field_x, params, level, region);
}

std::vector<MomentEstimate> mc_absolute_moment(const HierarchySampler& sampler,
                                               const ChaosParams& params, double q,
                                               const Interval& region, std::size_t n_replicas,
                                               std::uint64_t seed, unsigned threads) {
    params.validate();
    if (q < 0.0) throw std::invalid_argument("mc_absolute_moment: q must be >= 0");
    if (n_replicas < 16) throw std::invalid_argument("mc_absolute_moment: need >= 16 replicas");
    check_interval(region, sampler.grid());
    const std::size_t J = sampler.schedule().size();
    std::vector<std::vector<double>> samples(J, std::vector<double>(n_replicas));
    parallel_for(
        n_replicas,
        [&](std::size_t r) {
            const auto [fx, fy] = sample_independent_pair(sampler, seed,
                                                          static_cast<std::uint32_t>(r));
            for (std::size_t j = 0; j < J; ++j) {
                const double eps = sampler.schedule().eps(j);
                const std::complex<double> m =
                    renormalization_factor(params, eps) *
                    complex_chaos_interval(fx, fy, params, j, region.lo, region.hi);
                samples[j][r] = q == 0.0 ? 1.0 : std::pow(std::abs(m), q);
            }
        },
        threads);
    std::vector<MomentEstimate> out(J);
    for (std::size_t j = 0; j < J; ++j) {
        const auto bm = batch_means(samples[j]);
        out[j].value = bm.mean;
        out[j].stderr_ = bm.stderr_;
        out[j].n_samples = n_replicas;
        out[j].method = "mc";
        out[j].params = params;
        out[j].epsilon = sampler.schedule().eps(j);
        out[j].order = q;
    }
    return out;
}

std::vector<MomentEstimate> mc_ball_moments(const HierarchySampler& sampler,
                                            const ChaosParams& params, double q, double center,
                                            const std::vector<double>& radii,
                                            std::size_t n_replicas, std::uint64_t seed,
                                            unsigned threads) {
    params.validate();
    if (n_replicas < 16) throw std::invalid_argument("mc_ball_moments: need >= 16 replicas");
    for (double r : radii) check_interval({center - r, center + r}, sampler.grid());
    const std::size_t J = sampler.schedule().size();
    const std::size_t deepest = J - 1;
    const double eps = sampler.schedule().eps(deepest);
    const double factor = renormalization_factor(params, eps);

    std::vector<std::vector<double>> samples(radii.size(), std::vector<double>(n_replicas));
    parallel_for(
        n_replicas,
        [&](std::size_t r) {
            const auto [fx, fy] = sample_independent_pair(sampler, seed,
                                                          static_cast<std::uint32_t>(r));
            for (std::size_t ri = 0; ri < radii.size(); ++ri) {
                const std::complex<double> m =
                    factor * complex_chaos_interval(fx, fy, params, deepest,
                                                    center - radii[ri], center + radii[ri]);
                samples[ri][r] = q == 0.0 ? 1.0 : std::pow(std::abs(m), q);
            }
        },
        threads);
    std::vector<MomentEstimate> out(radii.size());
    for (std::size_t ri = 0; ri < radii.size(); ++ri) {
        const auto bm = batch_means(samples[ri]);
        out[ri].value = bm.mean;
        out[ri].stderr_ = bm.stderr_;
        out[ri].n_samples = n_replicas;
        out[ri].method = "mc";
        out[ri].params = params;
        out[ri].epsilon = eps;
        out[ri].order = q;
    }
    return out;
}

ScalingFit multifractal_fit(const std::vector<double>& radii,
                            const std::vector<MomentEstimate>& estimates, double q) {
    if (radii.size() != estimates.size() || radii.size() < 4)
        throw std::invalid_argument("multifractal_fit: need >= 4 radii");
    for (std::size_t i = 1; i < radii.size(); ++i)
        if (!(radii[i] < radii[i - 1]))
            throw std::invalid_argument("multifractal_fit: radii must decrease strictly");
    ScalingFit fit;
    fit.q = q;
    std::vector<double> xs, ys, ws;
    for (std::size_t i = 0; i < radii.size(); ++i) {
        const double v = estimates[i].value.real();
        if (!(v > 0.0)) {
            fit.dropped_radii.push_back(radii[i]);
            continue;
        }
        fit.radii.push_back(radii[i]);
        fit.log_moments.push_back(std::log(v));
        xs.push_back(std::log(radii[i]));
        ys.push_back(std::log(v));
        const double rel = estimates[i].stderr_ > 0.0 ? estimates[i].stderr_ / v : 1e-6;
        ws.push_back(1.0 / (rel * rel));
    }
    if (xs.size() < 2) throw std::runtime_error("multifractal_fit: too few usable radii");
    const auto line = fit_line(xs, ys, ws);
    fit.slope = line.slope;
    fit.intercept = line.intercept;
    fit.r2 = line.r2;
    fit.slope_stderr = line.slope_stderr;
    return fit;
}

// ---------------------------------------------------------------------------
// conditional moments of order k + k' on a coarse sub-grid

namespace {

struct QuadNode {
    std::vector<double> xs;  // node positions
    std::vector<double> w;   // e^{gamma X(node)}
    double dx;
    int sign;
};

// E[ prod_i M^{s_i} | X ] with M from e^{gamma X + i beta Y}: every node pair
// carries e^{-s_i s_j b^2 K_eps(x_i - x_j)}, the diagonal contributes
// eps^{n b^2 / 2}.
double conditional_small_k_moment(const HierarchySampler& sampler, const FieldHierarchy& field_x,
                                  const ChaosParams& params, std::size_t level,
                                  const std::vector<std::pair<Interval, int>>& vars,
                                  std::size_t m) {
    const std::size_t dim = vars.size();
    if (dim == 0 || dim > 4)
        throw std::invalid_argument("conditional moments support 1 <= k + k' <= 4");
    if (m < 4 || m > 64) throw std::invalid_argument("sub-grid must have 4..64 points per axis");
    const double b2 = params.beta * params.beta;
    const auto& X = field_x.at_level(level);
    const double eps = field_x.schedule.eps(level);

    std::vector<QuadNode> nodes(dim);
    for (std::size_t v = 0; v < dim; ++v) {
        check_interval(vars[v].first, field_x.grid);
        auto& nd = nodes[v];
        nd.dx = vars[v].first.length() / static_cast<double>(m);
        nd.sign = vars[v].second;
        nd.xs.resize(m);
        nd.w.resize(m);
        for (std::size_t i = 0; i < m; ++i) {
            nd.xs[i] = vars[v].first.lo + (static_cast<double>(i) + 0.5) * nd.dx;
            nd.w[i] = std::exp(params.gamma * interp(X, field_x.grid, nd.xs[i]));
        }
    }

    // pair factors F_{uv}(a,b) = exp(-s_u s_v b^2 K_eps(|x - y|)), row-major m x m
    std::vector<std::vector<double>> pair_f(dim * dim);
    for (std::size_t u = 0; u < dim; ++u) {
        for (std::size_t v = u + 1; v < dim; ++v) {
            auto& f = pair_f[u * dim + v];
            f.resize(m * m);
            const double sgn = static_cast<double>(nodes[u].sign * nodes[v].sign);
            for (std::size_t a = 0; a < m; ++a)
                for (std::size_t b = 0; b < m; ++b)
                    f[a * m + b] = std::exp(
                        -sgn * b2 *
                        sampler.level_covariance(level, std::abs(nodes[u].xs[a] - nodes[v].xs[b])));
        }
    }
    auto row = [&](std::size_t u, std::size_t v, std::size_t a) {
        return pair_f[u * dim + v].data() + a * m;
    };

    double vol = 1.0;
    for (const auto& nd : nodes) vol *= nd.dx;
    const double diag = std::pow(eps, 0.5 * static_cast<double>(dim) * b2);

    double total = 0.0;
    if (dim == 1) {
        for (std::size_t a = 0; a < m; ++a) total += nodes[0].w[a];
    } else if (dim == 2) {
        for (std::size_t a = 0; a < m; ++a) {
            const double* f01 = row(0, 1, a);
            for (std::size_t b = 0; b < m; ++b)
                total += nodes[0].w[a] * nodes[1].w[b] * f01[b];
        }
    } else if (dim == 3) {
        for (std::size_t a = 0; a < m; ++a) {
            const double* f01 = row(0, 1, a);
            const double* f02 = row(0, 2, a);
            for (std::size_t b = 0; b < m; ++b) {
                const double wab = nodes[0].w[a] * nodes[1].w[b] * f01[b];
                const double* f12 = row(1, 2, b);
                double inner = 0.0;
                for (std::size_t c = 0; c < m; ++c)
                    inner += nodes[2].w[c] * f02[c] * f12[c];
                total += wab * inner;
            }
        }
    } else {
        for (std::size_t a = 0; a < m; ++a) {
            const double* f01 = row(0, 1, a);
            const double* f02 = row(0, 2, a);
            const double* f03 = row(0, 3, a);
            for (std::size_t b = 0; b < m; ++b) {
                const double wab = nodes[0].w[a] * nodes[1].w[b] * f01[b];
                if (wab == 0.0) continue;
                const double* f12 = row(1, 2, b);
                const double* f13 = row(1, 3, b);
                double inner = 0.0;
                for (std::size_t c = 0; c < m; ++c) {
                    const double wc = nodes[2].w[c] * f02[c] * f12[c];
                    if (wc == 0.0) continue;
                    const double* f23 = row(2, 3, c);
                    double innermost = 0.0;
                    for (std::size_t e = 0; e < m; ++e)
                        innermost += nodes[3].w[e] * f03[e] * f13[e] * f23[e];
                    inner += wc * innermost;
                }
                total += wab * inner;
            }
        }
    }
    return total * vol * diag;
}

}  // namespace

std::complex<double> gaussianity_ratio(const HierarchySampler& sampler,
                                       const FieldHierarchy& field_x, const ChaosParams& params,
                                       std::size_t level, int k, int k_prime,
                                       const Interval& region, std::size_t subgrid) {
    if (k < 0 || k_prime < 0 || k + k_prime < 1 || k + k_prime > 4)
        throw std::invalid_argument("gaussianity_ratio: need 1 <= k + k' <= 4");
    std::vector<std::pair<Interval, int>> vars;
    for (int i = 0; i < k; ++i) vars.emplace_back(region, +1);
    for (int i = 0; i < k_prime; ++i) vars.emplace_back(region, -1);
    const double num =
        conditional_small_k_moment(sampler, field_x, params, level, vars, subgrid);
    const double csm = conditional_small_k_moment(
        sampler, field_x, params, level, {{region, +1}, {region, -1}}, subgrid);
    if (k == 1 && k_prime == 1) return 1.0;  // same quantity over itself
    return num / std::pow(csm, 0.5 * static_cast<double>(k + k_prime));
}

std::complex<double> multi_interval_ratio(const HierarchySampler& sampler,
                                          const FieldHierarchy& field_x,
                                          const ChaosParams& params, std::size_t level,
                                          const std::vector<IntervalExponents>& blocks,
                                          std::size_t subgrid) {
    if (blocks.empty()) throw std::invalid_argument("multi_interval_ratio: empty interval list");
    for (std::size_t i = 0; i < blocks.size(); ++i)
        for (std::size_t j = i + 1; j < blocks.size(); ++j) {
            const auto& a = blocks[i].interval;
            const auto& b = blocks[j].interval;
            if (std::max(a.lo, b.lo) < std::min(a.hi, b.hi) + 1e-15)
                throw std::invalid_argument("multi_interval_ratio: intervals must be disjoint");
        }
    std::vector<std::pair<Interval, int>> vars;
    for (const auto& se : blocks) {
        for (int i = 0; i < se.k_plus; ++i) vars.emplace_back(se.interval, +1);
        for (int i = 0; i < se.k_minus; ++i) vars.emplace_back(se.interval, -1);
    }
    if (vars.empty() || vars.size() > 4)
        throw std::invalid_argument("multi_interval_ratio: total dimension must be 1..4");
    const double num = conditional_small_k_moment(sampler, field_x, params, level, vars, subgrid);
    double denom = 1.0;
    for (const auto& se : blocks) {
        const double csm = conditional_small_k_moment(
            sampler, field_x, params, level, {{se.interval, +1}, {se.interval, -1}}, subgrid);
        denom *= std::pow(csm, 0.5 * static_cast<double>(se.k_plus + se.k_minus));
    }
    return num / denom;
}

}  // namespace cgmc
