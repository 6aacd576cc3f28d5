#include "cgmc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cgmc {

MeanStderr mean_stderr(std::span<const double> xs) {
    MeanStderr r;
    r.n = xs.size();
    if (r.n == 0) return r;
    double s = 0.0;
    for (double x : xs) s += x;
    r.mean = s / static_cast<double>(r.n);
    if (r.n < 2) return r;
    double ss = 0.0;
    for (double x : xs) ss += (x - r.mean) * (x - r.mean);
    r.stderr_ = std::sqrt(ss / (static_cast<double>(r.n) * static_cast<double>(r.n - 1)));
    return r;
}

MeanStderr batch_means(std::span<const double> xs, std::size_t n_batches) {
    const std::size_t n = xs.size();
    if (n_batches < 2 || n < 2 * n_batches) return mean_stderr(xs);
    std::vector<double> batch(n_batches, 0.0);
    std::vector<std::size_t> counts(n_batches, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t b = i * n_batches / n;
        batch[b] += xs[i];
        ++counts[b];
    }
    for (std::size_t b = 0; b < n_batches; ++b) batch[b] /= static_cast<double>(counts[b]);
    MeanStderr r = mean_stderr(batch);
    // overall mean from the full sample (batch sizes may differ by one)
    double s = 0.0;
    for (double x : xs) s += x;
    r.mean = s / static_cast<double>(n);
    r.n = n;
    return r;
}

double sample_variance(std::span<const double> xs) {
    if (xs.size() < 2) return 0.0;
    double m = mean_stderr(xs).mean;
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return ss / static_cast<double>(xs.size() - 1);
}

double sample_skewness(std::span<const double> xs) {
    const double m = mean_stderr(xs).mean;
    double m2 = 0.0, m3 = 0.0;
    for (double x : xs) {
        const double d = x - m;
        m2 += d * d;
        m3 += d * d * d;
    }
    const double n = static_cast<double>(xs.size());
    m2 /= n;
    m3 /= n;
    return m3 / std::pow(m2, 1.5);
}

double sample_excess_kurtosis(std::span<const double> xs) {
    const double m = mean_stderr(xs).mean;
    double m2 = 0.0, m4 = 0.0;
    for (double x : xs) {
        const double d = x - m;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    const double n = static_cast<double>(xs.size());
    m2 /= n;
    m4 /= n;
    return m4 / (m2 * m2) - 3.0;
}

double sample_covariance(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw std::invalid_argument("sample_covariance: size mismatch");
    const double mx = mean_stderr(xs).mean;
    const double my = mean_stderr(ys).mean;
    double s = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (xs[i] - mx) * (ys[i] - my);
    return s / static_cast<double>(xs.size() - 1);
}

double median(std::vector<double> xs) {
    if (xs.empty()) throw std::invalid_argument("median of empty sample");
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

LineFit fit_line(std::span<const double> x, std::span<const double> y,
                 std::span<const double> w) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw std::invalid_argument("fit_line: need >= 2 points");
    double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0, swyy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double wi = w.empty() ? 1.0 : w[i];
        sw += wi;
        swx += wi * x[i];
        swy += wi * y[i];
        swxx += wi * x[i] * x[i];
        swxy += wi * x[i] * y[i];
        swyy += wi * y[i] * y[i];
    }
    LineFit f;
    const double det = sw * swxx - swx * swx;
    f.slope = (sw * swxy - swx * swy) / det;
    f.intercept = (swxx * swy - swx * swxy) / det;
    double ss_res = 0.0, ss_tot = 0.0;
    const double ybar = swy / sw;
    for (std::size_t i = 0; i < n; ++i) {
        const double wi = w.empty() ? 1.0 : w[i];
        const double fit = f.slope * x[i] + f.intercept;
        ss_res += wi * (y[i] - fit) * (y[i] - fit);
        ss_tot += wi * (y[i] - ybar) * (y[i] - ybar);
    }
    f.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    if (n > 2) f.slope_stderr = std::sqrt(std::max(ss_res, 0.0) / (static_cast<double>(n - 2)) * sw / det);
    return f;
}

ComplexMeanStderr mean_stderr_complex(std::span<const std::complex<double>> zs) {
    std::vector<double> re(zs.size()), im(zs.size());
    for (std::size_t i = 0; i < zs.size(); ++i) {
        re[i] = zs[i].real();
        im[i] = zs[i].imag();
    }
    const auto mr = mean_stderr(re);
    const auto mi = mean_stderr(im);
    return {{mr.mean, mi.mean}, mr.stderr_, mi.stderr_, zs.size()};
}

}  // namespace cgmc
