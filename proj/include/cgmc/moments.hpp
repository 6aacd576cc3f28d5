#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "cgmc/chaos.hpp"
#include "cgmc/fields.hpp"

namespace cgmc {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double length() const { return hi - lo; }
};

struct MomentEstimate {
    std::complex<double> value;
    double stderr_ = 0.0;
    std::size_t n_samples = 0;
    std::string method;  // "mc" or "quadrature"
    ChaosParams params;
    double epsilon = 0.0;
    double order = 0.0;  // q, or k + k' for the ratio diagnostics
};

// E |M_eps(A)|^2 = |A-pairs| integral of e^{(g^2-b^2)K(0)} e^{(g^2+b^2)K(x-y)},
// deterministic quadrature, d = 1 interval region.
MomentEstimate unconditional_second_moment(const Kernel& kernel, const ChaosParams& params,
                                           double eps, const Interval& region);

// E|eps^{g^2-d/2} M_eps(A)|^2, the phase-III renormalization of the above;
// divide by |log eps| on the frontier I/III.
double phase3_normalized_second_moment(const Kernel& kernel, const ChaosParams& params,
                                       double eps, const Interval& region);

// E[|M_eps(A)|^2 | X] on the sampling grid (pair weights e^{b^2 (K - K(0))});
// O(n^2) window sum, FFT autocorrelation when the region is the whole box.
double conditional_second_moment(const HierarchySampler& sampler, const FieldHierarchy& field_x,
                                 const ChaosParams& params, std::size_t level,
                                 const Interval& region);

// |log eps|^{1/2} * conditional_second_moment, defined on gamma = sqrt(d/2),
// beta^2 + gamma^2 > d
double conditional_moment_frontier23(const HierarchySampler& sampler,
                                     const FieldHierarchy& field_x, const ChaosParams& params,
                                     std::size_t level, const Interval& region);

// Monte Carlo E |renormalized chaos(region)|^q per schedule level.
std::vector<MomentEstimate> mc_absolute_moment(const HierarchySampler& sampler,
                                               const ChaosParams& params, double q,
                                               const Interval& region, std::size_t n_replicas,
                                               std::uint64_t seed, unsigned threads = 0);

// Same estimator, deepest level only, evaluated on nested centered balls in
// one pass over the replicas.
std::vector<MomentEstimate> mc_ball_moments(const HierarchySampler& sampler,
                                            const ChaosParams& params, double q, double center,
                                            const std::vector<double>& radii,
                                            std::size_t n_replicas, std::uint64_t seed,
                                            unsigned threads = 0);

struct ScalingFit {
    double q = 0.0;
    std::vector<double> radii;
    std::vector<double> log_moments;
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    double slope_stderr = 0.0;
    std::vector<double> dropped_radii;  // non-positive moment estimates
};

ScalingFit multifractal_fit(const std::vector<double>& radii,
                            const std::vector<MomentEstimate>& estimates, double q);

// E[(M)^k (conj M)^{k'} | X] / E[M conj M | X]^{(k+k')/2} on a coarse
// sub-grid with the field linearly interpolated; k + k' <= 4.
std::complex<double> gaussianity_ratio(const HierarchySampler& sampler,
                                       const FieldHierarchy& field_x, const ChaosParams& params,
                                       std::size_t level, int k, int k_prime,
                                       const Interval& region, std::size_t subgrid = 64);

struct IntervalExponents {
    Interval interval;
    int k_plus = 0;   // powers of M(J_i)
    int k_minus = 0;  // powers of conj(M(J_i))
};

std::complex<double> multi_interval_ratio(const HierarchySampler& sampler,
                                          const FieldHierarchy& field_x,
                                          const ChaosParams& params, std::size_t level,
                                          const std::vector<IntervalExponents>& blocks,
                                          std::size_t subgrid = 32);

}  // namespace cgmc
