#include "cgmc/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cgmc {

namespace {
constexpr double kEulerGamma = 0.57721566490153286060651209;

void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) throw std::invalid_argument(std::string(what) + ": non-finite input");
}

void require_eps(double eps) {
    if (!(eps > 0.0) || eps > 1.0)
        throw std::invalid_argument("cutoff eps must lie in (0,1]");
}
}  // namespace

double Kernel::effective_range(double tol) const {
    // walk outward until |k| stays below tol; A2 guarantees this terminates
    double r = 1.0;
    while (r < 1e9) {
        if (std::abs(radial(r)) < tol && std::abs(radial(1.5 * r)) < tol &&
            std::abs(radial(2.0 * r)) < tol)
            return r;
        r *= 1.5;
    }
    return r;
}

// ---------------------------------------------------------------------------
// built-in kernels

namespace {

class TriangleKernel final : public Kernel {
  public:
    TriangleKernel() : Kernel("triangle", 1, 2.0, 1.0) {}
    double radial(double r) const override { return r < 1.0 ? 1.0 - r : 0.0; }
    double one_minus_radial(double r) const override { return r < 1.0 ? r : 1.0; }
    double effective_range(double) const override { return 1.0; }
    std::vector<double> break_points() const override { return {1.0}; }
};

class GaussianKernel final : public Kernel {
  public:
    explicit GaussianKernel(int d) : Kernel("gaussian", d, static_cast<double>(d) + 1.0, 1.0) {}
    double radial(double r) const override { return std::exp(-0.5 * r * r); }
    double one_minus_radial(double r) const override { return -std::expm1(-0.5 * r * r); }
    double effective_range(double tol) const override {
        return std::sqrt(-2.0 * std::log(std::max(tol, 1e-300)));
    }
};

// k_m(r) = (1/2) int_0^inf exp(-m^2 r^2 / (2v) - v/2) dv = m r K_1(m r)
class MffKernel final : public Kernel {
  public:
    explicit MffKernel(double mass, int d)
        : Kernel("mff", d, static_cast<double>(d) + 1.0, std::max(1.0, 1.0 / mass)), mass_(mass) {
        if (!(mass > 0.0)) throw std::invalid_argument("mff kernel requires mass > 0");
    }
    double radial(double r) const override {
        const double z = mass_ * r;
        if (z == 0.0) return 1.0;
        if (z > 700.0) return 0.0;
        return z * std::cyl_bessel_k(1, z);
    }
    double one_minus_radial(double r) const override {
        const double z = mass_ * r;
        if (z < 1e-3) {
            // z K1(z) = 1 + (z^2/2) [ log(z/2) + gamma_E - 1/2 ] + O(z^4 log z)
            const double z2 = z * z;
            return -0.5 * z2 * (std::log(0.5 * z) + kEulerGamma - 0.5);
        }
        return 1.0 - radial(r);
    }
    double effective_range(double tol) const override {
        return std::max(1.0, -2.0 * std::log(std::max(tol, 1e-300)) / mass_);
    }
    double mass() const { return mass_; }

  private:
    double mass_;
};

class TabulatedKernel final : public Kernel {
  public:
    TabulatedKernel(std::vector<double> xs, std::vector<double> ys, int d)
        : Kernel("table", d, static_cast<double>(d) + 1.0,
                 validated_constant(xs, ys, static_cast<double>(d) + 1.0)),
          xs_(std::move(xs)),
          ys_(std::move(ys)) {}

    double radial(double r) const override {
        if (r >= xs_.back()) return 0.0;
        auto it = std::upper_bound(xs_.begin(), xs_.end(), r);
        const std::size_t hi = static_cast<std::size_t>(it - xs_.begin());
        const std::size_t lo = hi - 1;
        const double t = (r - xs_[lo]) / (xs_[hi] - xs_[lo]);
        return ys_[lo] + t * (ys_[hi] - ys_[lo]);
    }
    double effective_range(double) const override { return xs_.back(); }
    std::vector<double> break_points() const override { return {xs_.back()}; }

  private:
    // A1-A3 hold for a compactly supported table iff the implied constants are
    // finite and sane; the smallest admissible C_k is computed and stored.
    static double validated_constant(const std::vector<double>& xs,
                                     const std::vector<double>& ys, double nu) {
        if (xs.size() != ys.size() || xs.size() < 2)
            throw std::invalid_argument("tabulated kernel: need >= 2 rows");
        for (std::size_t i = 1; i < xs.size(); ++i)
            if (!(xs[i] > xs[i - 1]))
                throw std::invalid_argument("tabulated kernel: abscissae must increase strictly");
        if (xs.front() != 0.0)
            throw std::invalid_argument("tabulated kernel: first abscissa must be 0");
        if (std::abs(ys.front() - 1.0) > 1e-12)
            throw std::invalid_argument("tabulated kernel: k(0) must equal 1 (A1)");
        if (ys.back() != 0.0)
            throw std::invalid_argument(
                "tabulated kernel: last value must be 0 (zero extension beyond the table)");
        double ck = 1.0;
        for (std::size_t i = 1; i < xs.size(); ++i) {
            ck = std::max(ck, std::abs(ys[i]) * std::pow(1.0 + xs[i], nu));   // A2
            ck = std::max(ck, std::abs(ys[i] - 1.0) / xs[i]);                 // A3
        }
        if (!(ck < 1e6))
            throw std::invalid_argument(
                "tabulated kernel: decay/Lipschitz constants are implausibly large (A2/A3)");
        return ck;
    }

    std::vector<double> xs_;
    std::vector<double> ys_;
};

}  // namespace

KernelPtr make_triangle_kernel() { return std::make_shared<TriangleKernel>(); }

KernelPtr make_gaussian_kernel(int dimension) {
    if (dimension != 1 && dimension != 2)
        throw std::invalid_argument("gaussian kernel: dimension must be 1 or 2");
    return std::make_shared<GaussianKernel>(dimension);
}

KernelPtr make_mff_kernel(double mass, int dimension) {
    if (dimension != 1 && dimension != 2)
        throw std::invalid_argument("mff kernel: dimension must be 1 or 2");
    return std::make_shared<MffKernel>(mass, dimension);
}

KernelPtr make_tabulated_kernel(std::vector<double> abscissae, std::vector<double> values,
                                int dimension) {
    return std::make_shared<TabulatedKernel>(std::move(abscissae), std::move(values), dimension);
}

KernelPtr load_tabulated_kernel(const std::string& csv_path, int dimension) {
    std::ifstream in(csv_path);
    if (!in) throw std::runtime_error("cannot open kernel table: " + csv_path);
    std::vector<double> xs, ys;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double x, y;
        if (ls >> x >> y) {
            xs.push_back(x);
            ys.push_back(y);
        }
    }
    return make_tabulated_kernel(std::move(xs), std::move(ys), dimension);
}

KernelPtr make_kernel(const std::string& name, int dimension, double mass) {
    if (name == "triangle") {
        if (dimension != 1) throw std::invalid_argument("triangle kernel is d = 1 only");
        return make_triangle_kernel();
    }
    if (name == "gaussian") return make_gaussian_kernel(dimension);
    if (name == "mff") return make_mff_kernel(mass, dimension);
    throw std::invalid_argument("unknown kernel: " + name);
}

double eval_kernel(const Kernel& k, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != k.dimension())
        throw std::invalid_argument("eval_kernel: dimension mismatch");
    double r2 = 0.0;
    for (double xi : x) {
        require_finite(xi, "eval_kernel");
        r2 += xi * xi;
    }
    return k.radial(std::sqrt(r2));
}

// ---------------------------------------------------------------------------
// K_eps and friends

double cutoff_covariance(const Kernel& k, double r, double eps) {
    require_eps(eps);
    require_finite(r, "cutoff_covariance");
    r = std::abs(r);
    if (r == 0.0) return std::log(1.0 / eps);
    if (k.name() == "triangle") {
        // int_1^{1/eps} (1 - r u)_+ / u du, closed form
        if (r >= 1.0) return 0.0;
        if (r <= eps) return std::log(1.0 / eps) - r * (1.0 / eps - 1.0);
        return std::log(1.0 / r) - 1.0 + r;
    }
    // substitute u = e^v: int_0^{log(1/eps)} k(r e^v) dv
    const double vmax = std::log(1.0 / eps);
    std::vector<double> splits;
    for (double b : k.break_points()) {
        const double v = std::log(b / r);
        if (v > 0.0 && v < vmax) splits.push_back(v);
    }
    auto res = integrate_split([&k, r](double v) { return k.radial(r * std::exp(v)); }, 0.0,
                               vmax, splits);
    return res.value;
}

double g_eps(const Kernel& k, double r, double eps) {
    return std::exp(-cutoff_covariance(k, r, eps));
}

double log_f(const Kernel& k, double t) {
    t = std::abs(t);
    if (t == 0.0) return 0.0;
    std::vector<double> splits = k.break_points();
    auto res = integrate_split(
        [&k](double u) { return u > 0.0 ? k.one_minus_radial(u) / u : k.one_minus_radial(1e-300); },
        0.0, t, splits);
    return res.value;
}

GreenkDecomposition greenk_decomposition(const Kernel& k, double t, double eps) {
    require_eps(eps);
    if (k.dimension() != 1)
        throw std::invalid_argument("greenk_decomposition is a d = 1 statement");
    if (std::abs(eps * t) > 1.0)
        throw std::invalid_argument("greenk_decomposition requires eps * |t| <= 1");
    const double lf = log_f(k, t);
    const double lg = -log_f(k, eps * std::abs(t));
    GreenkDecomposition out{std::exp(lf), std::exp(lg), 0.0};
    // reconstruction residual doubles as the achieved-error report
    const double direct = g_eps(k, eps * std::abs(t), eps);
    const double recon = eps * out.f_value * out.g_value;
    out.quad_error = std::abs(direct - recon) / std::max(direct, 1e-300);
    return out;
}

double log_asymptote_constant(const Kernel& k) {
    // int_0^1 (1-k)/u du - int_1^inf k/u du, the tail truncated via A2
    const double head = log_f(k, 1.0);
    const double range = k.effective_range(1e-14);
    double tail = 0.0;
    if (range > 1.0)
        tail = integrate_split([&k](double u) { return k.radial(u) / u; }, 1.0, range,
                               k.break_points())
                   .value;
    return head - tail;
}

Sigma2Result sigma2(const Kernel& k, double s, int dimension) {
    if (dimension != 1 && dimension != 2) throw std::invalid_argument("sigma2: d must be 1 or 2");
    const double d = static_cast<double>(dimension);
    if (s < d) throw std::invalid_argument("sigma2 requires s >= d");
    const double surface = dimension == 1 ? 2.0 : 2.0 * M_PI;
    const double c_inf = log_asymptote_constant(k);
    if (s == d) return {surface * std::exp(-c_inf), 1e-12};

    // head: S_d int_0^{Z0} exp(-s I(r)) r^{d-1} dr with I(r) = log f(r)
    const double z0 = std::max(4.0, k.effective_range(1e-13));
    auto integrand = [&](double r) {
        return std::exp(-s * log_f(k, r)) * (dimension == 2 ? r : 1.0);
    };
    auto head = integrate_split(integrand, 0.0, z0, k.break_points());
    // beyond Z0 the exponent is log r + c_inf up to rho(Z0) = int_Z0^inf k/u du
    const double tail = std::exp(-s * c_inf) * std::pow(z0, d - s) / (s - d);
    double rho = 0.0;
    const double range = k.effective_range(1e-14);
    if (range > z0)
        rho = std::abs(integrate([&k](double u) { return k.radial(u) / u; }, z0, range).value);
    const double tail_err = tail * (std::exp(s * rho) - 1.0 + 1e-12);
    return {surface * (head.value + tail), surface * (head.error + tail_err)};
}

// ---------------------------------------------------------------------------
// schedules and diagnostics

CutoffSchedule CutoffSchedule::geometric(double eps_min, double ratio) {
    if (!(ratio > 0.0 && ratio < 1.0))
        throw std::invalid_argument("schedule ratio must lie in (0,1)");
    if (!(eps_min > 0.0 && eps_min < 1.0))
        throw std::invalid_argument("schedule eps_min must lie in (0,1)");
    CutoffSchedule s;
    s.ratio = ratio;
    for (double e = ratio; e > eps_min * (1.0 - 1e-12); e *= ratio) s.levels.push_back(e);
    if (s.levels.empty() || s.levels.back() > eps_min * (1.0 + 1e-12))
        s.levels.push_back(eps_min);
    s.validate();
    return s;
}

void CutoffSchedule::validate() const {
    if (levels.empty()) throw std::invalid_argument("schedule: empty");
    double prev = 1.0 + 1e-15;
    for (double e : levels) {
        if (!(e > 0.0 && e <= 1.0)) throw std::invalid_argument("schedule: levels must be in (0,1]");
        if (!(e < prev)) throw std::invalid_argument("schedule: levels must decrease strictly");
        prev = e;
    }
}

std::vector<double> log_approximation_defect_per_level(const Kernel& k, double R,
                                                       const CutoffSchedule& schedule,
                                                       std::size_t n_grid) {
    if (!(R > 0.0)) throw std::invalid_argument("log_approximation_defect: R must be positive");
    std::vector<double> out;
    out.reserve(schedule.size());
    for (double eps : schedule.levels) {
        double worst = 0.0;
        for (std::size_t i = 0; i <= n_grid; ++i) {
            const double x = R * static_cast<double>(i) / static_cast<double>(n_grid);
            const double target = std::abs(std::log(std::max(x, eps)));
            worst = std::max(worst, std::abs(cutoff_covariance(k, x, eps) - target));
        }
        out.push_back(worst);
    }
    return out;
}

double log_approximation_defect(const Kernel& k, double R, const CutoffSchedule& schedule,
                                std::size_t n_grid) {
    const auto per_level = log_approximation_defect_per_level(k, R, schedule, n_grid);
    return *std::max_element(per_level.begin(), per_level.end());
}

double doubling_constant(const Kernel& k, double eps, std::size_t n_s, std::size_t n_t) {
    require_eps(eps);
    if (k.dimension() != 1) throw std::invalid_argument("doubling_constant is d = 1 only");
    std::vector<double> s_values;
    const double s_lo = std::log(eps / 8.0);
    for (std::size_t i = 0; i <= n_s; ++i)
        s_values.push_back(
            std::exp(s_lo + (0.0 - s_lo) * static_cast<double>(i) / static_cast<double>(n_s)));
    // the supremum typically sits at the cutoff scale; refine locally there
    for (int i = -16; i <= 16; ++i)
        s_values.push_back(eps * (1.0 + 0.01 * static_cast<double>(i)));
    double best = 1.0;
    for (double s : s_values) {
        if (s <= 0.0 || s > 1.0) continue;
        const double ks = cutoff_covariance(k, s, eps);
        for (std::size_t j = 0; j <= n_t; ++j) {
            const double t = 2.0 * s * static_cast<double>(j) / static_cast<double>(n_t);
            const double kt = cutoff_covariance(k, t, eps);
            best = std::max(best, std::exp(ks - kt));
        }
    }
    return best;
}

}  // namespace cgmc
