#pragma once

#include <cstddef>
#include <vector>

#include "cgmc/kernels.hpp"

namespace cgmc {

struct PointMatching {
    std::vector<std::size_t> assignment;  // assignment[i] = index into ys, injective
    bool tie_break_used = false;
    std::size_t rounds = 0;
};

// Iterated removal of mutually closest pairs until every x is matched.
// Requires |xs| <= |ys|; ties are broken lexicographically on
// (distance, x index, y index) and flagged.
PointMatching optimal_matching(const std::vector<std::vector<double>>& xs,
                               const std::vector<std::vector<double>>& ys);

// 1-d convenience overload
PointMatching optimal_matching(const std::vector<double>& xs, const std::vector<double>& ys);

struct ProductBoundCheck {
    double lhs = 0.0;        // same-side pair factors over cross factors
    double rhs = 0.0;        // C1^{beta^2 k (k-1)} * prod G_eps(x_i - y_i)^{-beta^2}
    bool ok = false;
    double c1 = 0.0;
    double matched_product = 0.0;  // prod G_eps(x_i - y_i)^{-beta^2}
};

// Both sides of the identity-matched product bound, d = 1. The configuration
// must have the identity as its optimal matching.
ProductBoundCheck matched_product_bound_check(const Kernel& kernel, double eps, double beta,
                                              const std::vector<double>& xs,
                                              const std::vector<double>& ys,
                                              double c1_hint = 0.0);

}  // namespace cgmc
