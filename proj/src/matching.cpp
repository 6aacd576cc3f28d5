#include "cgmc/matching.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cgmc {

namespace {
double dist2(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}
}  // namespace

PointMatching optimal_matching(const std::vector<std::vector<double>>& xs,
                               const std::vector<std::vector<double>>& ys) {
    const std::size_t k = xs.size();
    const std::size_t kp = ys.size();
    if (k > kp) throw std::invalid_argument("optimal_matching: requires |xs| <= |ys|");
    for (const auto& p : xs)
        if (p.size() != xs.front().size())
            throw std::invalid_argument("optimal_matching: ragged points");
    PointMatching out;
    out.assignment.assign(k, std::numeric_limits<std::size_t>::max());
    if (k == 0) return out;

    std::vector<bool> x_done(k, false), y_done(kp, false);
    std::size_t matched = 0;
    while (matched < k) {
        bool progress = false;
        ++out.rounds;
        // mutually closest pairs among the survivors of this round
        std::vector<std::pair<std::size_t, std::size_t>> found;
        for (std::size_t i = 0; i < k; ++i) {
            if (x_done[i]) continue;
            // nearest surviving y for this x, lexicographic tie-break
            std::size_t best_j = kp;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < kp; ++j) {
                if (y_done[j]) continue;
                const double d = dist2(xs[i], ys[j]);
                if (d < best_d) {
                    best_d = d;
                    best_j = j;
                } else if (d == best_d) {
                    out.tie_break_used = true;
                }
            }
            // mutual: no surviving x is closer to best_j
            bool mutual = true;
            for (std::size_t i2 = 0; i2 < k && mutual; ++i2) {
                if (x_done[i2] || i2 == i) continue;
                const double d2 = dist2(xs[i2], ys[best_j]);
                if (d2 < best_d || (d2 == best_d && i2 < i)) mutual = false;
                if (d2 == best_d) out.tie_break_used = true;
            }
            if (mutual) found.emplace_back(i, best_j);
        }
        for (const auto& [i, j] : found) {
            if (x_done[i] || y_done[j]) continue;  // tie collisions: first wins
            x_done[i] = true;
            y_done[j] = true;
            out.assignment[i] = j;
            ++matched;
            progress = true;
        }
        if (!progress) throw std::logic_error("optimal_matching: no progress");
    }
    return out;
}

PointMatching optimal_matching(const std::vector<double>& xs, const std::vector<double>& ys) {
    std::vector<std::vector<double>> xv, yv;
    xv.reserve(xs.size());
    yv.reserve(ys.size());
    for (double x : xs) xv.push_back({x});
    for (double y : ys) yv.push_back({y});
    return optimal_matching(xv, yv);
}

ProductBoundCheck matched_product_bound_check(const Kernel& kernel, double eps, double beta,
                                              const std::vector<double>& xs,
                                              const std::vector<double>& ys,
                                              double c1_hint) {
    if (kernel.dimension() != 1)
        throw std::invalid_argument("matched_product_bound_check: d = 1 only");
    const std::size_t k = xs.size();
    if (ys.size() != k || k == 0)
        throw std::invalid_argument("matched_product_bound_check: need equal nonempty sets");
    const auto matching = optimal_matching(xs, ys);
    for (std::size_t i = 0; i < k; ++i)
        if (matching.assignment[i] != i)
            throw std::invalid_argument(
                "matched_product_bound_check: configuration is not identity-matched");

    const double b2 = beta * beta;
    ProductBoundCheck out;
    out.c1 = c1_hint > 0.0 ? c1_hint : doubling_constant(kernel, eps);

    // work in logs: the individual factors span many orders of magnitude
    double log_lhs = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
            log_lhs += -b2 * cutoff_covariance(kernel, xs[i] - xs[j], eps);
            log_lhs += -b2 * cutoff_covariance(kernel, ys[i] - ys[j], eps);
        }
        for (std::size_t j = 0; j < k; ++j)
            log_lhs -= -b2 * cutoff_covariance(kernel, xs[i] - ys[j], eps);
    }
    double log_matched = 0.0;
    for (std::size_t i = 0; i < k; ++i)
        log_matched += b2 * cutoff_covariance(kernel, xs[i] - ys[i], eps);
    const double log_rhs =
        b2 * static_cast<double>(k) * static_cast<double>(k - 1) * std::log(out.c1) + log_matched;

    out.lhs = std::exp(log_lhs);
    out.rhs = std::exp(log_rhs);
    out.matched_product = std::exp(log_matched);
    out.ok = log_lhs <= log_rhs + 1e-12;
    return out;
}

}  // namespace cgmc
