#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace cgmc {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;   // estimated absolute error
    std::size_t evaluations = 0;
    bool converged = false;
};

struct QuadOptions {
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    std::size_t max_intervals = 4000;
};

// Adaptive Gauss-Kronrod (G7/K15) on a finite interval. Splitting is driven
// by the per-interval error estimate; break points let callers pre-split at
// known kinks.
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     const QuadOptions& opt = {});

QuadResult integrate_split(const std::function<double(double)>& f, double a, double b,
                           const std::vector<double>& break_points,
                           const QuadOptions& opt = {});

// \int_a^inf f, mapped onto (0,1] via u = a + t/(1-t).
QuadResult integrate_to_infinity(const std::function<double(double)>& f, double a,
                                 const QuadOptions& opt = {});

}  // namespace cgmc
