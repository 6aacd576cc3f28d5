#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "cgmc/fields.hpp"

namespace cgmc {

struct ChaosParams {
    int dimension = 1;
    double gamma = 0.0;
    double beta = 0.0;

    double gamma_c() const { return std::sqrt(2.0 * dimension); }
    void validate() const;
};

enum class Phase {
    PhaseI_inner,
    Frontier_I_II,
    PhaseII_inner,
    PhaseIII_inner,
    Frontier_I_III,
    Frontier_II_III,
    TriplePoint,
};

struct PhaseLabel {
    Phase phase;
    // false for the conjectural renormalizations (inner phase II, triple point)
    bool rigorous_renormalization;
};

std::string phase_name(Phase p);

PhaseLabel classify_phase(const ChaosParams& params, double tol = 1e-12);

// zeta(p) = (d + gamma^2/2 - beta^2/2) p - gamma^2 p^2 / 2
double zeta(const ChaosParams& params, double p);

struct CriticalP {
    double value;      // +inf sentinel when there is no finite moment window
    bool finite;
    std::string note;  // "no L_p window" when the discriminant is negative
};
CriticalP critical_p(const ChaosParams& params);

double renormalization_factor(const ChaosParams& params, double eps);

// Smooth bump (C^infinity, so in particular C^d) or box indicator.
struct TestFunction {
    enum class Kind { SmoothBump, Indicator } kind = Kind::SmoothBump;
    std::vector<double> center;  // per axis
    double radius = 0.0;

    static TestFunction bump(std::vector<double> center, double radius);
    static TestFunction indicator(std::vector<double> center, double radius);
    double operator()(const std::vector<double>& x) const;
    double value1d(double x) const;
    // Lebesgue integral, by quadrature for the bump, exactly for the box
    double integral(int dimension) const;
    void validate_support(const Grid& grid) const;
};

// M^{gamma,beta}_eps(phi) as a midpoint Riemann sum at schedule level j;
// carries no internal compensator.
std::complex<double> complex_chaos(const FieldHierarchy& field_x, const FieldHierarchy& field_y,
                                   const ChaosParams& params, std::size_t level,
                                   const TestFunction& phi);

std::complex<double> renormalized_chaos(const FieldHierarchy& field_x,
                                        const FieldHierarchy& field_y,
                                        const ChaosParams& params, std::size_t level,
                                        const TestFunction& phi);

double real_chaos(const FieldHierarchy& field_x, const ChaosParams& params, std::size_t level,
                  const TestFunction& phi, bool wick);

// int phi (gamma_c E[X^2] - X) exp(gamma_c X - gamma_c^2 E[X^2]/2) dx
double derivative_martingale(const FieldHierarchy& field_x, int dimension, std::size_t level,
                             const TestFunction& phi);

// Interval measure of the renormalized chaos at one level, d = 1 helper used
// by the moment estimators: integral over [a,b) of e^{gamma X + i beta Y}.
std::complex<double> complex_chaos_interval(const FieldHierarchy& field_x,
                                            const FieldHierarchy& field_y,
                                            const ChaosParams& params, std::size_t level,
                                            double a, double b);
double real_chaos_interval(const FieldHierarchy& field_x, double gamma, std::size_t level,
                           double a, double b, bool wick);

struct StarScaleResult {
    double ratio;
    double stderr_;
    double lambda;
    double q;
    std::size_t n_replicas;
};

// Moment side of the star equation for the exact scale-invariant field:
// E[M_{lambda eps}(lambda [0,1])^q] versus lambda^{zeta(q)} E[M_eps([0,1])^q].
StarScaleResult star_scale_test(const HierarchySampler& sampler, double gamma, double lambda,
                                double q, std::size_t n_replicas, std::uint64_t seed,
                                unsigned threads = 0);

}  // namespace cgmc
