#include "cgmc/lqg.hpp"

#include <cmath>
#include <stdexcept>

#include "cgmc/quadrature.hpp"
#include "cgmc/rng.hpp"

namespace cgmc {

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;

double bump2d(Complex x, Complex center, double radius) {
    const double u = std::abs(x - center) / radius;
    const double u2 = u * u;
    if (u2 >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - u2));
}
}  // namespace

double square_map_constant() {
    // int_0^1 dt / sqrt(1 - t^4) after t = 1 - v^2 (removes the endpoint singularity)
    static const double c =
        integrate(
            [](double v) {
                const double t = 1.0 - v * v;
                return 2.0 / std::sqrt((2.0 - v * v) * (1.0 + t * t));
            },
            0.0, 1.0, {1e-14, 1e-13, 20000})
            .value;
    return c;
}

namespace {
// G(z) = int_0^z dt / sqrt(1 - t^4) = sum_n a_n z^{4n+1} / (4n+1), |z| < 1
Complex sc_primitive(Complex z) {
    const double r = std::abs(z);
    if (r >= 0.999)
        throw std::domain_error("square map: point too close to the disk boundary");
    Complex z4 = z * z * z * z;
    Complex term = z;  // a_n z^{4n+1}
    Complex sum = 0.0;
    double a = 1.0;
    for (std::size_t n = 0;; ++n) {
        sum += a * term / static_cast<double>(4 * n + 1);
        if (a * std::abs(term) < 1e-17 * (1.0 + std::abs(sum))) break;
        if (n > 20000) throw std::runtime_error("square map: series did not converge");
        a *= (2.0 * n + 1.0) / (2.0 * n + 2.0);
        term *= z4;
    }
    return sum;
}

const Complex kSquareCenter{0.5, 0.5};
const Complex kRot45 = std::polar(1.0, kPi / 4.0);
}  // namespace

Complex square_map(Complex z) {
    const double scale = (std::sqrt(2.0) / 2.0) / square_map_constant();
    return kSquareCenter + scale * kRot45 * sc_primitive(z);
}

Complex square_map_derivative(Complex z) {
    const double scale = (std::sqrt(2.0) / 2.0) / square_map_constant();
    return scale * kRot45 / std::sqrt(Complex(1.0, 0.0) - z * z * z * z);
}

Complex square_map_inverse(Complex x) {
    if (!(x.real() > 0.0 && x.real() < 1.0 && x.imag() > 0.0 && x.imag() < 1.0))
        throw std::domain_error("square map inverse: point outside the open unit square");
    Complex z = 0.0;
    for (int it = 0; it < 200; ++it) {
        const Complex f = square_map(z) - x;
        if (std::abs(f) < 1e-14) return z;
        Complex step = f / square_map_derivative(z);
        Complex znext = z - step;
        // keep the iterate strictly inside the disk
        while (std::abs(znext) >= 0.995) {
            step *= 0.5;
            znext = z - step;
        }
        z = znext;
    }
    throw std::runtime_error("square map inverse: Newton iteration did not converge");
}

bool PlanarDomain::contains(Complex x) const {
    switch (kind_) {
        case Kind::UnitDisk: return std::abs(x) < 1.0;
        case Kind::UnitSquare:
            return x.real() > 0.0 && x.real() < 1.0 && x.imag() > 0.0 && x.imag() < 1.0;
        case Kind::UpperHalfPlane: return x.imag() > 0.0;
    }
    return false;
}

double PlanarDomain::conformal_radius(Complex x) const {
    if (!contains(x)) throw std::domain_error("conformal_radius: point not in the domain");
    switch (kind_) {
        case Kind::UnitDisk:
            return 1.0 - std::norm(x);
        case Kind::UpperHalfPlane:
            return 2.0 * x.imag();
        case Kind::UnitSquare: {
            const Complex z = square_map_inverse(x);
            return std::abs(square_map_derivative(z)) * (1.0 - std::norm(z));
        }
    }
    throw std::logic_error("unreachable");
}

// ---------------------------------------------------------------------------
// unit-square GFF covariance via the Dirichlet heat kernel

double truncated_gff_covariance(Complex x, Complex y, double eps, double eps_prime,
                                double mass, double tail_tol) {
    const PlanarDomain square = PlanarDomain::unit_square();
    if (!square.contains(x) || !square.contains(y))
        throw std::domain_error("truncated_gff_covariance: points must lie in the open square");
    if (!(eps > 0.0) || !(eps_prime > 0.0))
        throw std::invalid_argument("truncated_gff_covariance: cutoffs must be positive");
    if (mass < 0.0) throw std::invalid_argument("truncated_gff_covariance: mass must be >= 0");
    const double e2 = std::max(eps, eps_prime) * std::max(eps, eps_prime);

    // tail over j^2 + k^2 > R^2 bounded by 4 exp(-a R^2) / (2 a R^2), a = pi^2 e2 / 2
    const double a = 0.5 * kPi * kPi * e2;
    std::size_t R = 16;
    const std::size_t R_budget = 4096;
    while (2.0 * std::exp(-a * static_cast<double>(R) * static_cast<double>(R)) /
               (a * static_cast<double>(R) * static_cast<double>(R)) >
           tail_tol) {
        R *= 2;
        if (R > R_budget)
            throw std::runtime_error(
                "truncated_gff_covariance: tail bound not achieved within the mode budget");
    }

    double sum = 0.0;
    for (std::size_t j = 1; j <= R; ++j) {
        const double sjx = std::sin(static_cast<double>(j) * kPi * x.real());
        const double sjy = std::sin(static_cast<double>(j) * kPi * y.real());
        if (sjx == 0.0 && sjy == 0.0) continue;
        for (std::size_t k = 1; k <= R; ++k) {
            if (j * j + k * k > R * R) break;
            const double lambda = kPi * kPi * static_cast<double>(j * j + k * k);
            const double phi_x = 2.0 * sjx * std::sin(static_cast<double>(k) * kPi * x.imag());
            const double phi_y = 2.0 * sjy * std::sin(static_cast<double>(k) * kPi * y.imag());
            sum += 2.0 * kPi / (lambda + 2.0 * mass) * phi_x * phi_y *
                   std::exp(-(0.5 * lambda + mass) * e2);
        }
    }
    return sum;
}

ConformalRadiusEstimate conformal_radius_from_green(Complex x, double eps) {
    const double g = truncated_gff_covariance(x, x, eps, eps, 0.0);
    // The time-eps^2 heat-kernel cutoff averages the log singularity over a
    // Gaussian of scale eps, which shifts g_eps(x,x) by E[log|Z|] =
    // (log 2 - gamma_E)/2 below log(1/eps) + log C(x,D); compensating that
    // universal constant makes the estimator converge to the conformal
    // radius itself.
    constexpr double kEulerGamma = 0.57721566490153286;
    const double smear = 0.5 * (std::log(2.0) - kEulerGamma);
    const double boundary_dist =
        std::min(std::min(x.real(), 1.0 - x.real()), std::min(x.imag(), 1.0 - x.imag()));
    return {eps * std::exp(g + smear), boundary_dist < 8.0 * eps};
}

// ---------------------------------------------------------------------------
// orthonormal basis machinery

double GffBasis::lambda(std::size_t j, std::size_t k) const {
    return kPi * kPi * static_cast<double>(j * j + k * k);
}

double GffBasis::mode_value(std::size_t idx, double x1, double x2) const {
    const std::size_t j = idx / j_max + 1;
    const std::size_t k = idx % j_max + 1;
    return std::sqrt(2.0 * kPi / lambda(j, k)) * 2.0 *
           std::sin(static_cast<double>(j) * kPi * x1) *
           std::sin(static_cast<double>(k) * kPi * x2);
}

double GffBasis::variance(double x1, double x2, std::size_t n_modes) const {
    double s = 0.0;
    for (std::size_t idx = 0; idx < n_modes; ++idx) {
        const double f = mode_value(idx, x1, x2);
        s += f * f;
    }
    return s;
}

double GffBasis::gram_entry(std::size_t a, std::size_t b) const {
    const std::size_t j1 = a / j_max + 1, k1 = a % j_max + 1;
    const std::size_t j2 = b / j_max + 1, k2 = b % j_max + 1;
    auto cc = [](std::size_t m, std::size_t n) {
        return integrate(
                   [m, n](double u) {
                       return std::cos(static_cast<double>(m) * kPi * u) *
                              std::cos(static_cast<double>(n) * kPi * u);
                   },
                   0.0, 1.0, {1e-13, 1e-12, 4000})
            .value;
    };
    auto ss = [](std::size_t m, std::size_t n) {
        return integrate(
                   [m, n](double u) {
                       return std::sin(static_cast<double>(m) * kPi * u) *
                              std::sin(static_cast<double>(n) * kPi * u);
                   },
                   0.0, 1.0, {1e-13, 1e-12, 4000})
            .value;
    };
    const double norm1 = std::sqrt(2.0 * kPi / lambda(j1, k1)) * 2.0;
    const double norm2 = std::sqrt(2.0 * kPi / lambda(j2, k2)) * 2.0;
    const double dj = static_cast<double>(j1) * static_cast<double>(j2) * kPi * kPi;
    const double dk = static_cast<double>(k1) * static_cast<double>(k2) * kPi * kPi;
    const double grad = dj * cc(j1, j2) * ss(k1, k2) + dk * ss(j1, j2) * cc(k1, k2);
    return norm1 * norm2 * grad / (2.0 * kPi);
}

GFFBasisSample gff_sample_basis(std::size_t j_max, std::uint64_t seed, std::uint32_t replica,
                                std::uint32_t field_tag) {
    GFFBasisSample s;
    s.basis.j_max = j_max;
    s.coeffs.resize(j_max * j_max);
    CounterRng rng(seed, replica, 0x47460000u | field_tag);
    for (auto& c : s.coeffs) c = rng.normal();
    return s;
}

double GFFBasisSample::value(double x1, double x2, std::size_t n_modes) const {
    double s = 0.0;
    for (std::size_t idx = 0; idx < n_modes; ++idx)
        s += coeffs[idx] * basis.mode_value(idx, x1, x2);
    return s;
}

CircleProjection circle_projection(const GffBasis& basis, Complex center, double radius,
                                   std::size_t n_quadrature) {
    const PlanarDomain square = PlanarDomain::unit_square();
    for (double theta : {0.0, kPi / 2.0, kPi, 1.5 * kPi}) {
        if (!square.contains(center + std::polar(radius, theta)))
            throw std::domain_error("circle_projection: circle leaves the domain");
    }
    if (n_quadrature == 0) {
        const double top_freq = kPi * static_cast<double>(basis.j_max) * std::sqrt(2.0);
        n_quadrature = std::max<std::size_t>(
            64, static_cast<std::size_t>(std::ceil(2.0 * kPi * top_freq * radius)));
    }
    CircleProjection proj;
    proj.center = center;
    proj.radius = radius;
    proj.mode_average.assign(basis.n_modes(), 0.0);
    const double w = 1.0 / static_cast<double>(n_quadrature);
    // accumulate mode-by-mode across the quadrature points; the separable
    // sin products are evaluated directly
    std::vector<double> sin1(basis.j_max), sin2(basis.j_max);
    for (std::size_t q = 0; q < n_quadrature; ++q) {
        const double theta = 2.0 * kPi * static_cast<double>(q) * w;
        const double x1 = center.real() + radius * std::cos(theta);
        const double x2 = center.imag() + radius * std::sin(theta);
        for (std::size_t j = 1; j <= basis.j_max; ++j) {
            sin1[j - 1] = std::sin(static_cast<double>(j) * kPi * x1);
            sin2[j - 1] = std::sin(static_cast<double>(j) * kPi * x2);
        }
        for (std::size_t j = 1; j <= basis.j_max; ++j)
            for (std::size_t k = 1; k <= basis.j_max; ++k) {
                const std::size_t idx = (j - 1) * basis.j_max + (k - 1);
                proj.mode_average[idx] += w * sin1[j - 1] * sin2[k - 1] *
                                          std::sqrt(2.0 * kPi / basis.lambda(j, k)) * 2.0;
            }
    }
    return proj;
}

double CircleProjection::variance() const {
    double s = 0.0;
    for (double f : mode_average) s += f * f;
    return s;
}

double circle_average(const GFFBasisSample& sample, const CircleProjection& projection) {
    if (projection.mode_average.size() != sample.coeffs.size())
        throw std::invalid_argument("circle_average: projection/sample mode count mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < sample.coeffs.size(); ++i)
        s += sample.coeffs[i] * projection.mode_average[i];
    return s;
}

double circle_average(const GFFBasisSample& sample, Complex center, double radius,
                      std::size_t n_quadrature) {
    return circle_average(sample, circle_projection(sample.basis, center, radius, n_quadrature));
}

GffChaosGrid::GffChaosGrid(double lo, double hi, std::size_t m) : m_(m) {
    if (!(lo < hi) || lo <= 0.0 || hi >= 1.0)
        throw std::invalid_argument("GffChaosGrid: region must sit inside the open square");
    dx_ = (hi - lo) / static_cast<double>(m);
    xs_.resize(m);
    for (std::size_t i = 0; i < m; ++i)
        xs_[i] = lo + (static_cast<double>(i) + 0.5) * dx_;
    const PlanarDomain square = PlanarDomain::unit_square();
    weight_.resize(m * m);
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b)
            weight_[a * m + b] = square.conformal_radius({xs_[a], xs_[b]});
}

Complex GffChaosGrid::chaos(const GFFBasisSample& x_field, const GFFBasisSample& y_field,
                            double gamma, double beta, std::size_t n_modes) const {
    const double exponent = 0.5 * (gamma * gamma - beta * beta);
    Complex acc = 0.0;
    for (std::size_t a = 0; a < m_; ++a)
        for (std::size_t b = 0; b < m_; ++b) {
            const double var = x_field.basis.variance(xs_[a], xs_[b], n_modes);
            const double xv = x_field.value(xs_[a], xs_[b], n_modes);
            const double yv = y_field.value(xs_[a], xs_[b], n_modes);
            acc += std::exp(gamma * xv - exponent * var) * std::polar(1.0, beta * yv) *
                   std::pow(weight_[a * m_ + b], exponent);
        }
    return acc * dx_ * dx_;
}

// ---------------------------------------------------------------------------
// tachyon arithmetic and the KPZ identity

TachyonCondition tachyon_condition(double gamma, double beta) {
    if (gamma < 0.0 || beta < 0.0)
        throw std::invalid_argument("tachyon_condition: gamma/beta must be nonnegative");
    TachyonCondition out;
    out.residual = 2.0 * gamma - (0.5 * gamma * gamma - 0.5 * beta * beta + 2.0);
    out.satisfied = std::abs(out.residual) <= 1e-12;
    out.admissible = out.satisfied && gamma > 1.0 && gamma < 2.0;
    out.special_point = std::abs(gamma - 2.0) <= 1e-12 && std::abs(beta) <= 1e-12;
    return out;
}

KpzCheck kpz_check(double beta) {
    if (!(beta >= 0.0 && beta < 1.0))
        throw std::invalid_argument("kpz_check: beta must lie in [0,1)");
    KpzCheck out;
    out.delta0 = 0.25 * beta * beta;
    out.delta_q = 0.5 * beta;
    out.residual = out.delta0 - (out.delta_q + out.delta_q * (out.delta_q - 1.0));
    return out;
}

Complex MobiusDiskMap::value(Complex z) const { return (z - a) / (1.0 - std::conj(a) * z); }

Complex MobiusDiskMap::derivative(Complex z) const {
    const Complex den = 1.0 - std::conj(a) * z;
    return (1.0 - std::norm(a)) / (den * den);
}

Complex MobiusDiskMap::inverse(Complex w) const { return (w + a) / (1.0 + std::conj(a) * w); }

ConformalInvarianceResult conformal_invariance_first_moment(const MobiusDiskMap& psi,
                                                            double gamma, double beta,
                                                            Complex phi_center,
                                                            double phi_radius,
                                                            std::size_t grid) {
    if (std::abs(phi_center) + phi_radius >= 1.0)
        throw std::invalid_argument("conformal_invariance: phi support must sit in the disk");
    const double cr_exp = 0.5 * (gamma * gamma - beta * beta);
    const double tachyon_exp = 2.0 * gamma - 0.5 * gamma * gamma + 0.5 * beta * beta - 2.0;
    const PlanarDomain disk = PlanarDomain::unit_disk();
    const double h = 2.0 / static_cast<double>(grid);
    Complex lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < grid; ++i) {
        const double x1 = -1.0 + (static_cast<double>(i) + 0.5) * h;
        for (std::size_t j = 0; j < grid; ++j) {
            const double x2 = -1.0 + (static_cast<double>(j) + 0.5) * h;
            const Complex x{x1, x2};
            if (std::abs(x) >= 1.0) continue;
            const Complex pre = psi.inverse(x);
            const double phi = bump2d(pre, phi_center, phi_radius);
            if (phi == 0.0) continue;
            const double base = phi * std::pow(disk.conformal_radius(x), cr_exp);
            lhs += base;
            rhs += base * std::pow(std::abs(psi.derivative(pre)), tachyon_exp);
        }
    }
    lhs *= h * h;
    rhs *= h * h;
    ConformalInvarianceResult out{lhs, rhs, 0.0};
    out.residual = std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-300);
    return out;
}

}  // namespace cgmc
