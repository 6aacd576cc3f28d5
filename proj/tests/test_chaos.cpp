#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "cgmc/chaos.hpp"
#include "cgmc/parallel.hpp"
#include "cgmc/rng.hpp"
#include "cgmc/stats.hpp"

using namespace cgmc;

namespace {

double grid_integral(const TestFunction& phi, const Grid& grid) {
    const double h = grid.spacing();
    double acc = 0.0;
    for (std::size_t i = 0; i < grid.n; ++i) acc += phi.value1d(grid.coord(i));
    return acc * h;
}

}  // namespace

TEST_CASE("phase classification fixtures, d = 1") {
    auto at = [](double g, double b) { return classify_phase({1, g, b}); };
    CHECK(at(0.5, 0.5).phase == Phase::PhaseI_inner);
    CHECK(at(1.0, std::sqrt(2.0) - 1.0).phase == Phase::Frontier_I_II);
    CHECK(at(0.3, 1.2).phase == Phase::PhaseIII_inner);
    CHECK(at(0.3, std::sqrt(1.0 - 0.09)).phase == Phase::Frontier_I_III);
    CHECK(at(std::sqrt(0.5), 1.0).phase == Phase::Frontier_II_III);
    CHECK(at(1.2, 0.9).phase == Phase::PhaseII_inner);
    const auto triple = at(std::sqrt(0.5), std::sqrt(0.5));
    CHECK(triple.phase == Phase::TriplePoint);
    CHECK_FALSE(triple.rigorous_renormalization);
    CHECK_FALSE(at(1.2, 0.9).rigorous_renormalization);
    CHECK(at(0.5, 0.5).rigorous_renormalization);
    // high gamma on the real line is supercritical (phase II territory)
    CHECK(at(2.0, 0.0).phase == Phase::PhaseII_inner);
    CHECK_THROWS(classify_phase({1, -0.1, 0.0}));
}

TEST_CASE("classification is locally constant off the boundary curves") {
    CounterRng rng(31, 0, 0);
    const double d = 1.0;
    int tested = 0;
    while (tested < 200) {
        const double g = 2.0 * rng.uniform01();
        const double b = 2.0 * rng.uniform01();
        const double m1 = std::abs(g + b - std::sqrt(2.0 * d));
        const double m2 = std::abs(g * g + b * b - d);
        const double m3 = std::abs(g - std::sqrt(d / 2.0));
        const double margin = std::min({m1, m2, m3});
        if (margin < 1e-3) continue;
        ++tested;
        const auto base = classify_phase({1, g, b}, 0.0);
        CHECK((base.phase == Phase::PhaseI_inner || base.phase == Phase::PhaseII_inner ||
               base.phase == Phase::PhaseIII_inner));
        for (double dg : {-1e-9, 1e-9}) {
            const auto moved = classify_phase({1, g + dg, b + 1e-9}, 0.0);
            CHECK(moved.phase == base.phase);
        }
    }
    // boundary points map to boundary labels at tol = 0
    CHECK(classify_phase({1, 0.6, std::sqrt(1.0 - 0.36)}, 0.0).phase == Phase::Frontier_I_III);
}

TEST_CASE("zeta and p_c arithmetic") {
    ChaosParams p{1, 1.0, std::sqrt(2.0) - 1.0};
    CHECK(zeta(p, 1.0) == doctest::Approx(1.0 - 0.5 * p.beta * p.beta).epsilon(1e-15));
    CHECK(zeta(p, std::sqrt(2.0)) == doctest::Approx(1.0).epsilon(1e-12));
    const auto pc = critical_p(p);
    CHECK(pc.finite);
    CHECK(pc.value == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

    // gamma = 0: linear zeta
    ChaosParams lin{2, 0.0, 0.7};
    for (double q : {0.5, 1.0, 3.0})
        CHECK(zeta(lin, q) == doctest::Approx((2.0 - 0.245) * q).epsilon(1e-15));
    CHECK_FALSE(critical_p(lin).finite);

    // L2 phase: p_c >= 2
    CHECK(critical_p({1, 0.5, 0.5}).value >= 2.0);

    // no window for strongly supercritical parameters
    const auto none = critical_p({1, 2.5, 0.0});
    CHECK_FALSE(none.finite);
    CHECK(none.note == "no L_p window");

    // bracket p_c in (sqrt(2d)/gamma, 2d/gamma^2] on random inner-phase-I points
    CounterRng rng(8, 0, 0);
    int tested = 0;
    while (tested < 100) {
        const double g = 0.05 + 1.3 * rng.uniform01();
        const double b = 1.4 * rng.uniform01();
        const auto label = classify_phase({1, g, b}, 0.0);
        if (label.phase != Phase::PhaseI_inner) continue;
        ++tested;
        const auto pcv = critical_p({1, g, b});
        REQUIRE(pcv.finite);
        CHECK(pcv.value > std::sqrt(2.0) / g);
        CHECK(pcv.value <= 2.0 / (g * g) + 1e-12);
        CHECK(std::abs(zeta({1, g, b}, pcv.value) - 1.0) < 1e-12);
    }
}

TEST_CASE("renormalization factors per phase") {
    // gamma = beta in phase I: exponent vanishes
    for (double eps : {0.5, 0.01})
        CHECK(renormalization_factor({1, 0.4, 0.4}, eps) == 1.0);
    // frontier II/III at eps = e^-4: |log eps|^{1/4} = sqrt(2)
    CHECK(renormalization_factor({1, std::sqrt(0.5), 1.0}, std::exp(-4.0)) ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    // phase III fixture
    CHECK(renormalization_factor({1, 0.3, 1.2}, 0.01) ==
          doctest::Approx(std::pow(0.01, -0.41)).epsilon(1e-12));
    // frontier I/III carries the log correction
    const ChaosParams f13{1, 0.3, std::sqrt(0.91)};
    CHECK(renormalization_factor(f13, 0.01) ==
          doctest::Approx(std::pow(0.01, 0.09 - 0.5) / std::sqrt(std::log(100.0)))
              .epsilon(1e-12));
    CHECK_THROWS(renormalization_factor({1, 0.4, 0.4}, 1.0));
}

TEST_CASE("test functions") {
    Grid grid{1, 512, 1.0};
    auto bump = TestFunction::bump({0.5}, 0.25);
    auto box = TestFunction::indicator({0.5}, 0.25);
    CHECK(bump.value1d(0.5) == doctest::Approx(1.0));
    CHECK(bump.value1d(0.76) == 0.0);
    CHECK(box.integral(1) == doctest::Approx(0.5));
    CHECK(bump.integral(1) > 0.0);
    CHECK(bump.integral(1) < box.integral(1));
    CHECK_NOTHROW(bump.validate_support(grid));
    CHECK_THROWS(TestFunction::bump({0.1}, 0.25).validate_support(grid));
}

TEST_CASE("chaos evaluation basics") {
    Grid grid{1, 512, 1.0};
    auto schedule = CutoffSchedule::geometric(1.0 / 16.0);
    const auto sampler = HierarchySampler::star(make_triangle_kernel(), grid, schedule);
    const auto [fx, fy] = sample_independent_pair(sampler, 11, 0);
    const auto phi = TestFunction::bump({0.5}, 0.3);

    // gamma = beta = 0: Lebesgue mass of phi at every level
    for (std::size_t j = 0; j < schedule.size(); ++j) {
        const auto v = complex_chaos(fx, fy, {1, 0.0, 0.0}, j, phi);
        CHECK(v.real() == doctest::Approx(grid_integral(phi, grid)).epsilon(1e-14));
        CHECK(v.imag() == 0.0);
        const auto r = renormalized_chaos(fx, fy, {1, 0.0, 0.0}, j, phi);
        CHECK(r.real() == doctest::Approx(grid_integral(phi, grid)).epsilon(1e-14));
    }

    // beta = 0: strictly positive real output
    const auto real_out = complex_chaos(fx, fy, {1, 0.7, 0.0}, 2, phi);
    CHECK(real_out.real() > 0.0);
    CHECK(real_out.imag() == 0.0);

    // conjugation symmetry is exact on identical inputs
    const auto plus = complex_chaos(fx, fy, {1, 0.5, 0.3}, 2, phi);
    const auto minus = complex_chaos(fx, fy, {1, 0.5, -0.3}, 2, phi);
    CHECK(plus.real() == minus.real());
    CHECK(plus.imag() == -minus.imag());

    CHECK_THROWS(complex_chaos(fx, fy, {2, 0.5, 0.3}, 2, phi));
}

TEST_CASE("phase-I renormalized mean and martingale step") {
    Grid grid{1, 256, 1.0};
    auto schedule = CutoffSchedule::geometric(1.0 / 16.0);
    const auto sampler = HierarchySampler::star(make_triangle_kernel(), grid, schedule);
    const ChaosParams params{1, 0.5, 0.3};
    const auto phi = TestFunction::bump({0.5}, 0.3);
    const double target = grid_integral(phi, grid);
    const std::size_t n_rep = 4000;

    const std::size_t J = schedule.size();
    std::vector<std::vector<std::complex<double>>> vals(J);
    for (auto& v : vals) v.resize(n_rep);
    std::vector<double> martingale_gap(n_rep);
    parallel_for(n_rep, [&](std::size_t rep) {
        const auto [fx, fy] = sample_independent_pair(sampler, 2025,
                                                      static_cast<std::uint32_t>(rep));
        for (std::size_t j = 0; j < J; ++j)
            vals[j][rep] = renormalized_chaos(fx, fy, params, j, phi);

        // paired completions: averaging chaos at level j+1 over independent
        // re-draws of the last shell reproduces level j
        const std::size_t j = J - 2;
        std::complex<double> avg = 0.0;
        const int n_variants = 8;
        for (int v = 1; v <= n_variants; ++v) {
            FieldHierarchy fx2 = fx;
            FieldHierarchy fy2 = fy;
            const auto sx = sampler.sample_shell(j + 1, 2025, static_cast<std::uint32_t>(rep),
                                                 0, static_cast<std::uint32_t>(v));
            const auto sy = sampler.sample_shell(j + 1, 2025, static_cast<std::uint32_t>(rep),
                                                 1, static_cast<std::uint32_t>(v));
            for (std::size_t i = 0; i < grid.n; ++i) {
                fx2.levels[j + 1][i] = fx.levels[j][i] + sx[i];
                fy2.levels[j + 1][i] = fy.levels[j][i] + sy[i];
            }
            avg += renormalized_chaos(fx2, fy2, params, j + 1, phi);
        }
        avg /= static_cast<double>(n_variants);
        martingale_gap[rep] = (avg - renormalized_chaos(fx, fy, params, j, phi)).real();
    });

    for (std::size_t j = 0; j < J; ++j) {
        const auto ms = mean_stderr_complex(vals[j]);
        CHECK(std::abs(ms.mean.real() - target) <= 3.0 * ms.stderr_re);
        CHECK(std::abs(ms.mean.imag()) <= 3.0 * ms.stderr_im);
    }
    const auto gap = mean_stderr(martingale_gap);
    CHECK(std::abs(gap.mean) <= 3.0 * gap.stderr_);
}

TEST_CASE("real chaos and its Wick normalization") {
    Grid grid{1, 256, 1.0};
    auto schedule = CutoffSchedule::geometric(1.0 / 16.0);
    const auto sampler = HierarchySampler::star(make_triangle_kernel(), grid, schedule);
    const auto phi = TestFunction::bump({0.5}, 0.3);
    const double target = grid_integral(phi, grid);
    const ChaosParams params{1, 0.6, 0.0};
    const std::size_t n_rep = 4000;
    const std::size_t j = 2;

    std::vector<double> wick(n_rep), raw(n_rep), unit(n_rep);
    parallel_for(n_rep, [&](std::size_t rep) {
        const auto fx = sampler.sample(77, static_cast<std::uint32_t>(rep), 0);
        wick[rep] = real_chaos(fx, params, j, phi, true);
        raw[rep] = real_chaos(fx, params, j, phi, false);
        unit[rep] = real_chaos(fx, {1, 0.0, 0.0}, j, phi, true);
    });
    for (double u : unit) REQUIRE(u == doctest::Approx(target).epsilon(1e-14));
    const auto mw = mean_stderr(wick);
    CHECK(std::abs(mw.mean - target) <= 3.0 * mw.stderr_);
    const double eps = schedule.eps(j);
    const auto mr = mean_stderr(raw);
    const double raw_target = std::pow(eps, -0.18) * target;
    CHECK(std::abs(mr.mean - raw_target) <= 3.0 * mr.stderr_);
}

TEST_CASE("derivative martingale equals the gamma-derivative of the Wick chaos") {
    Grid grid{1, 256, 1.0};
    auto schedule = CutoffSchedule::geometric(1.0 / 16.0);
    const auto sampler = HierarchySampler::star(make_triangle_kernel(), grid, schedule);
    const auto fx = sampler.sample(3, 0, 0);
    const auto phi = TestFunction::bump({0.5}, 0.3);
    const std::size_t j = 3;
    const double gc = std::sqrt(2.0);
    const double dm = derivative_martingale(fx, 1, j, phi);
    const double delta = 1e-5;
    const double up = real_chaos(fx, {1, gc + delta, 0.0}, j, phi, true);
    const double dn = real_chaos(fx, {1, gc - delta, 0.0}, j, phi, true);
    const double fd = -(up - dn) / (2.0 * delta);
    CHECK(dm == doctest::Approx(fd).epsilon(1e-6));

    // degenerate zero field with zero variance: integrand vanishes
    FieldHierarchy zero = fx;
    for (auto& level : zero.levels) std::fill(level.begin(), level.end(), 0.0);
    zero.level_variance.assign(zero.n_levels(), 0.0);
    CHECK(derivative_martingale(zero, 1, j, phi) == 0.0);
}

TEST_CASE("critical chaos trends: Seneta-Heyde ratio and positivity") {
    Grid grid{1, 1024, 1.0};
    auto schedule = CutoffSchedule::geometric(1.0 / 256.0);
    const auto sampler = HierarchySampler::star(make_triangle_kernel(), grid, schedule);
    const auto phi = TestFunction::indicator({0.5}, 0.5);
    const double gc = std::sqrt(2.0);
    const std::size_t n_rep = 600;
    const std::size_t J = schedule.size();

    std::vector<std::vector<double>> ratio(J, std::vector<double>(n_rep));
    std::vector<std::vector<double>> dm(J, std::vector<double>(n_rep));
    parallel_for(n_rep, [&](std::size_t rep) {
        const auto fx = sampler.sample(515, static_cast<std::uint32_t>(rep), 0);
        for (std::size_t j = 0; j < J; ++j) {
            const double eps = schedule.eps(j);
            const double raw = real_chaos(fx, {1, gc, 0.0}, j, phi, false);
            const double d = derivative_martingale(fx, 1, j, phi);
            dm[j][rep] = d;
            ratio[j][rep] = std::sqrt(M_PI / 2.0) * eps * std::sqrt(std::log(1.0 / eps)) * raw /
                            d;
        }
    });
    // positive-mass fraction of the derivative martingale increases with depth
    auto positive_fraction = [&](std::size_t j) {
        std::size_t c = 0;
        for (double v : dm[j]) c += v > 0.0;
        return static_cast<double>(c) / static_cast<double>(n_rep);
    };
    CHECK(positive_fraction(J - 1) >= positive_fraction(0));
    CHECK(positive_fraction(J - 1) > 0.9);
    // the Seneta-Heyde normed ratio drifts toward 1
    const double first = std::abs(median(ratio[1]) - 1.0);
    const double last = std::abs(median(ratio[J - 1]) - 1.0);
    CHECK(last < first);
    CHECK(last < 0.35);
}

TEST_CASE("star scale invariance of the exact field") {
    Grid grid{1, 512, 1.0};
    auto schedule = CutoffSchedule::geometric(1.0 / 64.0);
    const auto sampler = HierarchySampler::exact_scale_invariant(1.0, grid, schedule);

    // lambda = 1 reduces to the same level: ratio is identically 1
    const auto unit = star_scale_test(sampler, 0.5, 1.0, 1.5, 64, 5);
    CHECK(unit.ratio == doctest::Approx(1.0).epsilon(1e-15));

    // q = 1: means are deterministic, ratio concentrates at 1
    const auto mean_test = star_scale_test(sampler, 0.5, 0.5, 1.0, 3000, 6);
    CHECK(std::abs(mean_test.ratio - 1.0) <= 3.0 * mean_test.stderr_);

    // lambda = 1/2, q = 1.5, gamma = 0.5
    const auto fix = star_scale_test(sampler, 0.5, 0.5, 1.5, 4000, 7);
    CHECK(std::abs(fix.ratio - 1.0) <= 3.0 * fix.stderr_);

    CHECK_THROWS(star_scale_test(sampler, 0.9, 0.5, 8.0, 64, 5));   // q beyond p_c
    CHECK_THROWS(star_scale_test(sampler, 0.5, 0.3, 1.5, 64, 5));   // lambda off-schedule
}
