#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace cgmc {

struct MeanStderr {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t n = 0;
};

MeanStderr mean_stderr(std::span<const double> xs);

// Batch-means standard error: robust for the heavy-tailed integrands the
// chaos moments produce. n_batches is clipped to the sample count.
MeanStderr batch_means(std::span<const double> xs, std::size_t n_batches = 32);

double sample_variance(std::span<const double> xs);
double sample_skewness(std::span<const double> xs);
double sample_excess_kurtosis(std::span<const double> xs);
double sample_covariance(std::span<const double> xs, std::span<const double> ys);
double median(std::vector<double> xs);  // by value: needs a sort

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double r2 = 0.0;
};

// Weighted least squares of y against x (weights default to 1).
LineFit fit_line(std::span<const double> x, std::span<const double> y,
                 std::span<const double> w = {});

struct ComplexMeanStderr {
    std::complex<double> mean;
    double stderr_re = 0.0;
    double stderr_im = 0.0;
    std::size_t n = 0;
};

ComplexMeanStderr mean_stderr_complex(std::span<const std::complex<double>> zs);

}  // namespace cgmc
