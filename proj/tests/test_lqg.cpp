#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "cgmc/lqg.hpp"
#include "cgmc/parallel.hpp"
#include "cgmc/rng.hpp"
#include "cgmc/stats.hpp"

using namespace cgmc;

TEST_CASE("conformal radii in closed form") {
    const auto disk = PlanarDomain::unit_disk();
    const auto half = PlanarDomain::upper_half_plane();
    CHECK(disk.conformal_radius({0.0, 0.0}) == 1.0);
    CHECK(disk.conformal_radius({0.5, 0.0}) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(half.conformal_radius({3.7, 0.5}) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS(disk.conformal_radius({1.0, 0.0}));
    CHECK_THROWS(half.conformal_radius({0.0, -0.1}));

    CounterRng rng(1, 0, 0);
    for (int i = 0; i < 50; ++i) {
        const Complex x = {1.8 * (rng.uniform01() - 0.5), 1.8 * (rng.uniform01() - 0.5)};
        if (std::abs(x) >= 0.99) continue;
        CHECK(std::abs(disk.conformal_radius(x) - (1.0 - std::norm(x))) < 1e-10);
    }
}

TEST_CASE("disk-to-square map") {
    const double c = square_map_constant();
    CHECK(c == doctest::Approx(1.3110287771460599).epsilon(1e-12));

    // center and corners land where they should (the corner slowly, as sqrt)
    CHECK(std::abs(square_map(0.0) - Complex{0.5, 0.5}) < 1e-15);
    CHECK(std::abs(square_map(Complex{0.995, 0.0}) - Complex{1.0, 1.0}) < 0.05);

    // inverse round-trips on interior points
    CounterRng rng(2, 0, 0);
    for (int i = 0; i < 40; ++i) {
        const Complex x = {0.15 + 0.7 * rng.uniform01(), 0.15 + 0.7 * rng.uniform01()};
        const Complex z = square_map_inverse(x);
        CHECK(std::abs(square_map(z) - x) < 1e-12);
    }

    // transformation rule through the map: C(T(z), square) = |T'(z)| (1 - |z|^2)
    const auto square = PlanarDomain::unit_square();
    for (Complex z : {Complex{0.2, 0.1}, Complex{-0.3, 0.25}, Complex{0.0, -0.45}}) {
        const double via_rule = std::abs(square_map_derivative(z)) * (1.0 - std::norm(z));
        CHECK(square.conformal_radius(square_map(z)) ==
              doctest::Approx(via_rule).epsilon(1e-10));
    }
    // square center value: 1 / (sqrt(2) c)
    CHECK(square.conformal_radius({0.5, 0.5}) ==
          doctest::Approx(1.0 / (std::sqrt(2.0) * c)).epsilon(1e-12));
}

TEST_CASE("Mobius transformation rule on the disk") {
    const auto disk = PlanarDomain::unit_disk();
    const MobiusDiskMap psi{{0.3, -0.2}};
    CounterRng rng(3, 0, 0);
    for (int i = 0; i < 40; ++i) {
        const Complex z = std::polar(0.9 * rng.uniform01(), 6.28 * rng.uniform01());
        const double lhs = disk.conformal_radius(psi.value(z));
        const double rhs = std::abs(psi.derivative(z)) * disk.conformal_radius(z);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
        CHECK(std::abs(psi.inverse(psi.value(z)) - z) < 1e-14);
    }
}

TEST_CASE("truncated covariance of the square GFF") {
    const Complex x{0.5, 0.5};
    const Complex y{0.3, 0.6};

    // symmetry is bit-identical
    CHECK(truncated_gff_covariance(x, y, 0.03, 0.05) ==
          truncated_gff_covariance(y, x, 0.03, 0.05));
    // only the larger cutoff matters
    CHECK(truncated_gff_covariance(x, y, 0.05, 0.01) ==
          truncated_gff_covariance(x, y, 0.05, 0.05));

    // eps = 1: small positive value
    const double coarse = truncated_gff_covariance(x, x, 1.0, 1.0);
    CHECK(coarse > 0.0);
    CHECK(coarse < 1.0);

    // the mass damps the covariance
    CHECK(truncated_gff_covariance(x, y, 0.05, 0.05, 2.0) <
          truncated_gff_covariance(x, y, 0.05, 0.05, 0.0));

    // mode budget exhausted for a too-small cutoff
    CHECK_THROWS(truncated_gff_covariance(x, y, 1e-5, 1e-5));

    // diagonal asymptotic: g_eps(x,x) - log(1/eps) -> log C(x,D) + E[log|Z|],
    // the last term being the universal Gaussian smearing constant
    const auto square = PlanarDomain::unit_square();
    const double smear = 0.5 * (std::log(2.0) - 0.57721566490153286);
    for (const Complex p : {Complex{0.5, 0.5}, Complex{0.4, 0.35}}) {
        const double eps = std::pow(2.0, -7.0);
        const double shift = truncated_gff_covariance(p, p, eps, eps) - std::log(1.0 / eps);
        CHECK(shift == doctest::Approx(std::log(square.conformal_radius(p)) - smear)
                           .epsilon(1e-4));
    }
    CHECK_THROWS(truncated_gff_covariance({1.2, 0.5}, y, 0.1, 0.1));
}

TEST_CASE("conformal radius from the regularized Green function") {
    const auto square = PlanarDomain::unit_square();
    const Complex center{0.5, 0.5};
    const double target = square.conformal_radius(center);

    const auto est = conformal_radius_from_green(center, std::pow(2.0, -7.0));
    CHECK_FALSE(est.near_boundary);
    CHECK(std::abs(est.value - target) / target < 0.05);

    // |C_{eps/2} - C_eps| decreasing; at the center the interior expansion is
    // exact (the harmonic part has zero isotropic moments), so only the
    // boundary term survives and the sweep must start shallow to see it
    std::vector<double> values;
    for (int k = 1; k <= 4; ++k)
        values.push_back(conformal_radius_from_green(center, std::pow(2.0, -k)).value);
    const double d1 = std::abs(values[1] - values[0]);
    const double d2 = std::abs(values[2] - values[1]);
    const double d3 = std::abs(values[3] - values[2]);
    CHECK(d3 < d2);
    CHECK(d2 < d1);

    CHECK(conformal_radius_from_green({0.02, 0.5}, std::pow(2.0, -5.0)).near_boundary);
}

TEST_CASE("basis orthonormality under the gradient inner product") {
    GffBasis basis{8};
    double worst = 0.0;
    for (std::size_t a = 0; a < basis.n_modes(); ++a) {
        for (std::size_t b = a; b < basis.n_modes(); ++b) {
            const double g = basis.gram_entry(a, b);
            worst = std::max(worst, std::abs(g - (a == b ? 1.0 : 0.0)));
        }
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("partial covariance sums converge to the Green function") {
    const Complex x{0.42, 0.55};
    const Complex y{0.52, 0.61};
    // reference: the converged eigen-series at a tiny cutoff
    const double target = truncated_gff_covariance(x, y, 1e-3, 1e-3);
    GffBasis basis{96};
    std::vector<double> partial;
    double s = 0.0;
    std::size_t next_block = 8;
    for (std::size_t j = 1; j <= basis.j_max; ++j) {
        for (std::size_t k = 1; k <= basis.j_max; ++k) {
            const std::size_t idx = (j - 1) * basis.j_max + (k - 1);
            s += basis.mode_value(idx, x.real(), x.imag()) *
                 basis.mode_value(idx, y.real(), y.imag());
        }
        if (j == next_block) {
            partial.push_back(s);
            next_block *= 2;
        }
    }
    // block sums approach the target with shrinking error
    double prev_err = std::abs(partial.front() - target);
    for (std::size_t i = 1; i < partial.size(); ++i) {
        const double err = std::abs(partial[i] - target);
        CHECK(err < prev_err + 1e-6);
        prev_err = err;
    }
    CHECK(prev_err < 5e-3);

    // on the diagonal the sums are monotone (every term is a square)
    GffBasis small{16};
    double diag = 0.0, prev_diag = -1.0;
    for (std::size_t idx = 0; idx < small.n_modes(); ++idx) {
        const double f = small.mode_value(idx, x.real(), x.imag());
        diag += f * f;
        CHECK(diag >= prev_diag);
        prev_diag = diag;
    }
}

TEST_CASE("basis sampling: variance, independence, determinism") {
    const std::size_t j_max = 16;
    const double x1 = 0.3, x2 = 0.7;
    GffBasis basis{j_max};
    const double target = basis.variance(x1, x2, j_max * j_max);

    const std::size_t n_rep = 3000;
    std::vector<double> vals(n_rep), cross(n_rep);
    parallel_for(n_rep, [&](std::size_t r) {
        const auto sx = gff_sample_basis(j_max, 44, static_cast<std::uint32_t>(r), 0);
        const auto sy = gff_sample_basis(j_max, 44, static_cast<std::uint32_t>(r), 1);
        vals[r] = sx.value(x1, x2);
        cross[r] = sx.coeffs[3] * sy.coeffs[3];
    });
    const double var = sample_variance(vals);
    CHECK(std::abs(var - target) <= 3.0 * target * std::sqrt(2.0 / (n_rep - 1.0)));
    const auto cm = mean_stderr(cross);
    CHECK(std::abs(cm.mean) <= 3.0 * cm.stderr_);

    const auto a = gff_sample_basis(j_max, 44, 7, 0);
    const auto b = gff_sample_basis(j_max, 44, 7, 0);
    const auto c = gff_sample_basis(j_max, 45, 7, 0);
    CHECK(a.coeffs == b.coeffs);
    CHECK(a.coeffs != c.coeffs);
}

TEST_CASE("circle averages") {
    // near-constant single-mode field: the average reproduces the point value
    GFFBasisSample flat;
    flat.basis.j_max = 4;
    flat.coeffs.assign(16, 0.0);
    flat.coeffs[0] = 2.5;  // mode (1,1)
    const Complex x{0.5, 0.5};
    const double avg = circle_average(flat, x, 1e-4);
    CHECK(avg == doctest::Approx(flat.value(0.5, 0.5)).epsilon(1e-6));

    // projection variance decreases in radius with log-ratio increments
    GffBasis basis{128};
    const auto big = circle_projection(basis, x, 0.125);
    const auto small = circle_projection(basis, x, 0.0625);
    CHECK(small.variance() > big.variance());
    CHECK(small.variance() - big.variance() == doctest::Approx(std::log(2.0)).epsilon(0.12));

    // independent oracle: the circle average of a product-sine mode is
    // J_0(pi r sqrt(j^2 + k^2)) times the mode value at the center
    {
        GffBasis small_basis{12};
        const auto proj = circle_projection(small_basis, x, 0.07);
        double worst = 0.0;
        for (std::size_t j = 1; j <= 12; ++j)
            for (std::size_t k = 1; k <= 12; ++k) {
                const std::size_t idx = (j - 1) * 12 + (k - 1);
                const double kappa =
                    M_PI * 0.07 * std::sqrt(static_cast<double>(j * j + k * k));
                const double oracle = std::cyl_bessel_j(0, kappa) *
                                      small_basis.mode_value(idx, x.real(), x.imag());
                worst = std::max(worst, std::abs(proj.mode_average[idx] - oracle));
            }
        CHECK(worst < 1e-10);
    }

    CHECK_THROWS(circle_projection(basis, {0.05, 0.5}, 0.25));
}

TEST_CASE("chaos of the mode expansion is a martingale in the mode count") {
    const std::size_t j_small = 4, j_big = 8;
    const std::size_t n_small = j_small * j_small, n_big = j_big * j_big;
    const GffChaosGrid grid(0.3, 0.7, 16);
    const double gamma = 0.4, beta = 0.3;
    const std::size_t n_rep = 300;
    const int n_variants = 12;

    // mode reordering: put the first j_small x j_small block first so that a
    // prefix of coefficients spans the small basis
    auto expand = [&](const GFFBasisSample& small, const GFFBasisSample& fill) {
        GFFBasisSample full;
        full.basis.j_max = j_big;
        full.coeffs.assign(n_big, 0.0);
        for (std::size_t j = 1; j <= j_big; ++j)
            for (std::size_t k = 1; k <= j_big; ++k) {
                const std::size_t idx = (j - 1) * j_big + (k - 1);
                if (j <= j_small && k <= j_small)
                    full.coeffs[idx] = small.coeffs[(j - 1) * j_small + (k - 1)];
                else
                    full.coeffs[idx] = fill.coeffs[idx];
            }
        return full;
    };

    std::vector<double> gap(n_rep);
    parallel_for(n_rep, [&](std::size_t r) {
        const auto xs = gff_sample_basis(j_small, 900, static_cast<std::uint32_t>(r), 0);
        const auto ys = gff_sample_basis(j_small, 900, static_cast<std::uint32_t>(r), 1);
        const Complex base = grid.chaos(xs, ys, gamma, beta, n_small);
        Complex avg = 0.0;
        for (int v = 1; v <= n_variants; ++v) {
            const auto fx = gff_sample_basis(j_big, 900, static_cast<std::uint32_t>(r),
                                             static_cast<std::uint32_t>(2 * v));
            const auto fy = gff_sample_basis(j_big, 900, static_cast<std::uint32_t>(r),
                                             static_cast<std::uint32_t>(2 * v + 1));
            avg += grid.chaos(expand(xs, fx), expand(ys, fy), gamma, beta, n_big);
        }
        avg /= static_cast<double>(n_variants);
        gap[r] = (avg - base).real();
    });
    const auto g = mean_stderr(gap);
    CHECK(std::abs(g.mean) <= 3.0 * g.stderr_);
}

TEST_CASE("tachyon condition fixtures") {
    const auto good = tachyon_condition(1.5, 0.5);
    CHECK(good.satisfied);
    CHECK(good.admissible);
    CHECK(good.residual == 0.0);

    const auto special = tachyon_condition(2.0, 0.0);
    CHECK(special.satisfied);
    CHECK_FALSE(special.admissible);
    CHECK(special.special_point);

    const auto excluded = tachyon_condition(1.0, 1.0);
    CHECK(excluded.satisfied);
    CHECK_FALSE(excluded.admissible);
    CHECK_FALSE(excluded.special_point);

    CHECK_FALSE(tachyon_condition(1.5, 0.3).satisfied);
    CHECK_THROWS(tachyon_condition(-1.0, 0.0));
}

TEST_CASE("KPZ identity") {
    CounterRng rng(77, 0, 0);
    const auto zero = kpz_check(0.0);
    CHECK(zero.delta0 == 0.0);
    CHECK(zero.delta_q == 0.0);
    CHECK(zero.residual == 0.0);
    const auto near_one = kpz_check(1.0 - 1e-12);
    CHECK(near_one.delta0 == doctest::Approx(0.25));
    CHECK(near_one.delta_q == doctest::Approx(0.5));
    for (int i = 0; i < 100; ++i) {
        const auto k = kpz_check(rng.uniform01());
        CHECK(std::abs(k.residual) < 1e-15);
    }
    CHECK_THROWS(kpz_check(1.0));
}

TEST_CASE("conformal invariance of the first moment") {
    const MobiusDiskMap psi{{0.35, 0.1}};
    const Complex phi_center{0.1, -0.05};
    const double phi_radius = 0.45;

    const auto identity_case =
        conformal_invariance_first_moment({{0.0, 0.0}}, 1.5, 0.3, phi_center, phi_radius, 256);
    CHECK(identity_case.residual < 1e-14);

    const auto tachyon =
        conformal_invariance_first_moment(psi, 1.5, 0.5, phi_center, phi_radius, 256);
    CHECK(tachyon.residual < 1e-8);

    const auto off = conformal_invariance_first_moment(psi, 1.5, 0.3, phi_center, phi_radius, 256);
    CHECK(off.residual > 1e-3);

    CHECK_THROWS(
        conformal_invariance_first_moment(psi, 1.5, 0.5, Complex{0.8, 0.0}, 0.45, 128));
}
