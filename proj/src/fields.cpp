#include "cgmc/fields.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <stdexcept>

#include "cgmc/rng.hpp"

namespace cgmc {

namespace {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// Shared FFTW plans; planning is not thread-safe, execution on distinct
// buffers is. FFTW_UNALIGNED lets us execute on plain std::vector storage.
class PlanCache {
  public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    fftw_plan backward(std::size_t n, int rank = 1) { return get(n, FFTW_BACKWARD, rank); }
    fftw_plan forward(std::size_t n, int rank = 1) { return get(n, FFTW_FORWARD, rank); }

    void execute(fftw_plan plan, std::complex<double>* data) {
        fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(data),
                         reinterpret_cast<fftw_complex*>(data));
    }

  private:
    fftw_plan get(std::size_t n, int sign, int rank) {
        std::lock_guard<std::mutex> lock(mu_);
        auto key = std::make_tuple(n, sign, rank);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        std::vector<std::complex<double>> dummy(rank == 1 ? n : n * n);
        fftw_plan p;
        if (rank == 1) {
            p = fftw_plan_dft_1d(static_cast<int>(n),
                                 reinterpret_cast<fftw_complex*>(dummy.data()),
                                 reinterpret_cast<fftw_complex*>(dummy.data()), sign,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
        } else {
            p = fftw_plan_dft_2d(static_cast<int>(n), static_cast<int>(n),
                                 reinterpret_cast<fftw_complex*>(dummy.data()),
                                 reinterpret_cast<fftw_complex*>(dummy.data()), sign,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
        }
        plans_.emplace(key, p);
        return p;
    }

    std::mutex mu_;
    std::map<std::tuple<std::size_t, int, int>, fftw_plan> plans_;
};

constexpr double kClampAbortThreshold = 1e-6;

}  // namespace

void Grid::validate(const CutoffSchedule& schedule) const {
    if (dimension != 1 && dimension != 2)
        throw std::invalid_argument("grid: dimension must be 1 or 2");
    if (!is_pow2(n)) throw std::invalid_argument("grid: n must be a power of two");
    if (!(length > 0.0)) throw std::invalid_argument("grid: length must be positive");
    schedule.validate();
    const double eps_min = schedule.levels.back();
    if (spacing() > eps_min / 4.0 + 1e-15)
        throw std::invalid_argument("grid: spacing must satisfy h <= eps_min / 4");
}

HierarchySampler::HierarchySampler(KernelPtr kernel, double T, bool exact, const Grid& grid,
                                   const CutoffSchedule& schedule)
    : kernel_(std::move(kernel)), T_(T), exact_(exact), grid_(grid), schedule_(schedule) {
    grid_.validate(schedule_);
    if (exact_) {
        if (grid_.dimension != 1)
            throw std::invalid_argument("exact scale-invariant field is d = 1 only");
        if (T_ < grid_.length)
            throw std::invalid_argument("exact scale-invariant field needs T >= grid length");
        kernel_name_ = "exact-scale-invariant";
    } else {
        if (kernel_->dimension() != grid_.dimension)
            throw std::invalid_argument("kernel/grid dimension mismatch");
        kernel_name_ = kernel_->name();
    }
    build_spectra();
}

HierarchySampler HierarchySampler::star(KernelPtr kernel, const Grid& grid,
                                        const CutoffSchedule& schedule) {
    return HierarchySampler(std::move(kernel), 0.0, false, grid, schedule);
}

HierarchySampler HierarchySampler::exact_scale_invariant(double T, const Grid& grid,
                                                         const CutoffSchedule& schedule) {
    return HierarchySampler(nullptr, T, true, grid, schedule);
}

double HierarchySampler::level_covariance(std::size_t j, double r) const {
    r = std::abs(r);
    if (exact_) {
        const double eps = schedule_.eps(j);
        if (r <= eps) return std::log(T_ / eps) + 1.0 - r / eps;
        return std::max(std::log(T_ / r), 0.0);
    }
    return cutoff_covariance(*kernel_, r, schedule_.eps(j));
}

double HierarchySampler::shell_covariance(std::size_t j, double r) const {
    const double cur = level_covariance(j, r);
    if (j == 0) return cur;
    return cur - level_covariance(j - 1, r);
}

void HierarchySampler::build_spectra() {
    const std::size_t n = grid_.n;
    const double h = grid_.spacing();
    double range;
    if (exact_) {
        range = T_;
    } else {
        range = kernel_->effective_range(1e-12);
    }
    // pad to >= 2L plus the correlation range, rounded up to a power of two
    n_pad_ = next_pow2(2 * n + static_cast<std::size_t>(std::ceil(range / h)));

    const std::size_t J = schedule_.size();
    sqrt_eigen_.resize(J);
    level_variance_.resize(J);
    for (std::size_t j = 0; j < J; ++j) {
        if (exact_) {
            level_variance_[j] = std::log(T_ / schedule_.eps(j)) + 1.0;
        } else {
            level_variance_[j] = std::log(1.0 / schedule_.eps(j));
        }
    }

    auto& cache = PlanCache::instance();
    if (grid_.dimension == 1) {
        std::vector<std::complex<double>> buf(n_pad_);
        for (std::size_t j = 0; j < J; ++j) {
            for (std::size_t i = 0; i < n_pad_; ++i) {
                const std::size_t d = std::min(i, n_pad_ - i);
                buf[i] = shell_covariance(j, h * static_cast<double>(d));
            }
            cache.execute(cache.forward(n_pad_), buf.data());
            auto& lam = sqrt_eigen_[j];
            lam.resize(n_pad_);
            double neg = 0.0, tot = 0.0;
            for (std::size_t i = 0; i < n_pad_; ++i) {
                const double v = buf[i].real();
                tot += std::abs(v);
                if (v < 0.0) {
                    neg += -v;
                    lam[i] = 0.0;
                } else {
                    lam[i] = std::sqrt(v);
                }
            }
            const double rel = tot > 0.0 ? neg / tot : 0.0;
            clamped_mass_ = std::max(clamped_mass_, rel);
            if (rel > kClampAbortThreshold)
                throw std::runtime_error(
                    "circulant embedding: clamped spectral mass above tolerance");
        }
    } else {
        const std::size_t m = n_pad_;
        std::vector<std::complex<double>> buf(m * m);
        for (std::size_t j = 0; j < J; ++j) {
            for (std::size_t a = 0; a < m; ++a) {
                const std::size_t da = std::min(a, m - a);
                for (std::size_t b = 0; b < m; ++b) {
                    const std::size_t db = std::min(b, m - b);
                    const double r = h * std::sqrt(static_cast<double>(da * da + db * db));
                    buf[a * m + b] = shell_covariance(j, r);
                }
            }
            cache.execute(cache.forward(m, 2), buf.data());
            auto& lam = sqrt_eigen_[j];
            lam.resize(m * m);
            double neg = 0.0, tot = 0.0;
            for (std::size_t i = 0; i < m * m; ++i) {
                const double v = buf[i].real();
                tot += std::abs(v);
                if (v < 0.0) {
                    neg += -v;
                    lam[i] = 0.0;
                } else {
                    lam[i] = std::sqrt(v);
                }
            }
            const double rel = tot > 0.0 ? neg / tot : 0.0;
            clamped_mass_ = std::max(clamped_mass_, rel);
            if (rel > kClampAbortThreshold)
                throw std::runtime_error(
                    "circulant embedding: clamped spectral mass above tolerance");
        }
    }
}

std::vector<double> HierarchySampler::sample_shell(std::size_t j, std::uint64_t seed,
                                                   std::uint32_t replica,
                                                   std::uint32_t field_tag,
                                                   std::uint32_t variant) const {
    if (j >= schedule_.size()) throw std::out_of_range("sample_shell: level out of range");
    const std::uint32_t stream =
        static_cast<std::uint32_t>(j) | (variant << 16) | (field_tag << 24);
    CounterRng rng(seed, replica, stream);

    const auto& lam = sqrt_eigen_[j];
    const std::size_t total = lam.size();
    std::vector<std::complex<double>> spectrum(total);
    for (std::size_t i = 0; i < total; ++i) {
        const double a = rng.normal();
        const double b = rng.normal();
        spectrum[i] = {lam[i] * a, lam[i] * b};
    }

    auto& cache = PlanCache::instance();
    if (grid_.dimension == 1) {
        cache.execute(cache.backward(n_pad_), spectrum.data());
    } else {
        cache.execute(cache.backward(n_pad_, 2), spectrum.data());
    }

    const double norm = 1.0 / std::sqrt(static_cast<double>(total));
    std::vector<double> out(grid_.total_points());
    if (grid_.dimension == 1) {
        for (std::size_t i = 0; i < grid_.n; ++i) out[i] = spectrum[i].real() * norm;
    } else {
        for (std::size_t a = 0; a < grid_.n; ++a)
            for (std::size_t b = 0; b < grid_.n; ++b)
                out[a * grid_.n + b] = spectrum[a * n_pad_ + b].real() * norm;
    }
    return out;
}

FieldHierarchy HierarchySampler::sample(std::uint64_t seed, std::uint32_t replica,
                                        std::uint32_t field_tag) const {
    FieldHierarchy h;
    h.grid = grid_;
    h.schedule = schedule_;
    h.seed = seed;
    h.replica = replica;
    h.field_tag = field_tag;
    h.kernel_name = kernel_name_;
    h.level_variance = level_variance_;
    h.clamped_spectral_mass = clamped_mass_;
    const std::size_t J = schedule_.size();
    h.levels.resize(J);
    std::vector<double> acc(grid_.total_points(), 0.0);
    for (std::size_t j = 0; j < J; ++j) {
        const auto shell = sample_shell(j, seed, replica, field_tag);
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += shell[i];
        h.levels[j] = acc;
    }
    return h;
}

std::pair<FieldHierarchy, FieldHierarchy> sample_independent_pair(const HierarchySampler& sampler,
                                                                  std::uint64_t seed,
                                                                  std::uint32_t replica) {
    return {sampler.sample(seed, replica, 0), sampler.sample(seed, replica, 1)};
}

}  // namespace cgmc
