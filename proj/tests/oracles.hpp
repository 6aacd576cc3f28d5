#pragma once

// Test-only reference implementations, written directly from the definitions
// and kept independent of the library code paths they check.

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace oracles {

inline double euclid(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

// Brute-force executor of the mutually-closest removal rule: each round scans
// every surviving (i, j) pair and tests the defining universally-quantified
// inequalities verbatim.
inline std::vector<std::size_t> brute_force_matching(
    const std::vector<std::vector<double>>& xs, const std::vector<std::vector<double>>& ys) {
    const std::size_t k = xs.size();
    const std::size_t kp = ys.size();
    std::vector<std::size_t> sigma(k, std::numeric_limits<std::size_t>::max());
    std::vector<bool> xd(k, false), yd(kp, false);
    std::size_t matched = 0;
    while (matched < k) {
        std::vector<std::pair<std::size_t, std::size_t>> round;
        for (std::size_t i = 0; i < k; ++i) {
            if (xd[i]) continue;
            for (std::size_t j = 0; j < kp; ++j) {
                if (yd[j]) continue;
                const double dij = euclid(xs[i], ys[j]);
                bool mutually_closest = true;
                for (std::size_t i2 = 0; i2 < k && mutually_closest; ++i2)
                    if (!xd[i2] && i2 != i && euclid(xs[i2], ys[j]) <= dij)
                        mutually_closest = false;
                for (std::size_t j2 = 0; j2 < kp && mutually_closest; ++j2)
                    if (!yd[j2] && j2 != j && euclid(xs[i], ys[j2]) <= dij)
                        mutually_closest = false;
                if (mutually_closest) round.emplace_back(i, j);
            }
        }
        if (round.empty()) return sigma;  // degenerate distances; caller skips
        for (const auto& [i, j] : round) {
            xd[i] = true;
            yd[j] = true;
            sigma[i] = j;
            ++matched;
        }
    }
    return sigma;
}

}  // namespace oracles
