#pragma once

#include <memory>
#include <string>
#include <vector>

#include "cgmc/quadrature.hpp"

namespace cgmc {

// Covariance seed k: radial, k(0) = 1, |k(x)| <= C_k (1+|x|)^-nu with nu > d,
// |k(x) - 1| <= C_k |x|.
class Kernel {
  public:
    virtual ~Kernel() = default;

    const std::string& name() const { return name_; }
    int dimension() const { return dimension_; }
    double decay_exponent() const { return nu_; }
    double lipschitz_bound() const { return ck_; }

    // k(r) for r = |x| >= 0
    virtual double radial(double r) const = 0;
    // 1 - k(r), evaluated without cancellation near r = 0
    virtual double one_minus_radial(double r) const { return 1.0 - radial(r); }
    // radius beyond which |k| < tol (used to size circulant paddings and tails)
    virtual double effective_range(double tol) const;
    // integrand kinks, if any, for the quadrature splits
    virtual std::vector<double> break_points() const { return {}; }

  protected:
    Kernel(std::string name, int dimension, double nu, double ck)
        : name_(std::move(name)), dimension_(dimension), nu_(nu), ck_(ck) {}

  private:
    std::string name_;
    int dimension_;
    double nu_;
    double ck_;
};

using KernelPtr = std::shared_ptr<const Kernel>;

// Built-ins. The registry is closed: triangle (d=1), gaussian, massive free
// field, plus the tabulated adapter below.
KernelPtr make_triangle_kernel();
KernelPtr make_gaussian_kernel(int dimension);
KernelPtr make_mff_kernel(double mass, int dimension = 2);

// Two-column CSV (abscissa, value), strictly increasing abscissae, linear
// interpolation in between and zero beyond the last point. The normalization
// and decay assumptions are validated numerically at load.
KernelPtr load_tabulated_kernel(const std::string& csv_path, int dimension);
KernelPtr make_tabulated_kernel(std::vector<double> abscissae, std::vector<double> values,
                                int dimension);

KernelPtr make_kernel(const std::string& name, int dimension, double mass = 1.0);

double eval_kernel(const Kernel& k, const std::vector<double>& x);

// K_eps(x) = int_1^{1/eps} k(|x| u) / u du; K_eps(0) = log(1/eps) exactly.
double cutoff_covariance(const Kernel& k, double r, double eps);

// G_eps = exp(-K_eps)
double g_eps(const Kernel& k, double r, double eps);

// log f(t) with f(t) = exp(int_0^|t| (1 - k(u))/u du); d = 1 decomposition
// G_eps(eps t) = eps f(t) g_eps(t)
double log_f(const Kernel& k, double t);

struct GreenkDecomposition {
    double f_value;
    double g_value;
    double quad_error;
};
GreenkDecomposition greenk_decomposition(const Kernel& k, double t, double eps);

// sigma^2(s) for s >= d: the full-space integral for s > d, the
// sphere-average form at s = d.
struct Sigma2Result {
    double value;
    double error;
};
Sigma2Result sigma2(const Kernel& k, double s, int dimension);

// c_inf = lim_{r->inf} [ int_0^r (1-k(u))/u du - log r ]
double log_asymptote_constant(const Kernel& k);

struct CutoffSchedule {
    std::vector<double> levels;  // strictly decreasing, in (0,1]
    double ratio = 0.5;

    static CutoffSchedule geometric(double eps_min, double ratio = 0.5);
    std::size_t size() const { return levels.size(); }
    double eps(std::size_t j) const { return levels.at(j); }
    void validate() const;
};

// sup over the sampled grid and all schedule levels of
// | K_eps(x) - |log(|x| or eps)| |
double log_approximation_defect(const Kernel& k, double R, const CutoffSchedule& schedule,
                                std::size_t n_grid = 256);
std::vector<double> log_approximation_defect_per_level(const Kernel& k, double R,
                                                       const CutoffSchedule& schedule,
                                                       std::size_t n_grid = 256);

// C1 = sup_{s in (0,1], t <= 2s} G_eps(t) / G_eps(s), grid supremum
double doubling_constant(const Kernel& k, double eps, std::size_t n_s = 96,
                         std::size_t n_t = 33);

}  // namespace cgmc
