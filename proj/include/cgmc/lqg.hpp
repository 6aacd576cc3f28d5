#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace cgmc {

using Complex = std::complex<double>;

// Planar domains with a known uniformizing map: the disk and half-plane in
// closed form, the unit square through the disk Schwarz-Christoffel map
// w = int_0^z (1 - t^4)^{-1/2} dt evaluated by series/quadrature and inverted
// by Newton iteration.
class PlanarDomain {
  public:
    enum class Kind { UnitDisk, UnitSquare, UpperHalfPlane };

    static PlanarDomain unit_disk() { return PlanarDomain(Kind::UnitDisk); }
    static PlanarDomain unit_square() { return PlanarDomain(Kind::UnitSquare); }
    static PlanarDomain upper_half_plane() { return PlanarDomain(Kind::UpperHalfPlane); }

    Kind kind() const { return kind_; }
    bool contains(Complex x) const;
    double conformal_radius(Complex x) const;

  private:
    explicit PlanarDomain(Kind k) : kind_(k) {}
    Kind kind_;
};

// Lemniscatic constant int_0^1 dt / sqrt(1 - t^4) shared by the square map.
double square_map_constant();
// disk -> unit square [0,1]^2 map and its derivative
Complex square_map(Complex z);
Complex square_map_derivative(Complex z);
Complex square_map_inverse(Complex x);  // Newton; throws off-domain

// pi int_{max(eps,eps')^2}^inf e^{-r m} p(r,x,y) dr on the unit square via the
// Dirichlet eigenfunction expansion of the killed heat kernel.
double truncated_gff_covariance(Complex x, Complex y, double eps, double eps_prime,
                                double mass = 0.0, double tail_tol = 1e-10);

struct ConformalRadiusEstimate {
    double value;
    bool near_boundary;  // convergence degrades there
};
// C_eps(x, D) = eps * exp(g_eps(x,x)) -> C(x, D)
ConformalRadiusEstimate conformal_radius_from_green(Complex x, double eps);

// Dirichlet eigenbasis of the unit square normalized for the (1/2pi) grad
// inner product: f_{jk} = sqrt(2 pi / lambda_jk) 2 sin(j pi x1) sin(k pi x2).
struct GffBasis {
    std::size_t j_max = 0;

    std::size_t n_modes() const { return j_max * j_max; }
    double lambda(std::size_t j, std::size_t k) const;
    double mode_value(std::size_t idx, double x1, double x2) const;
    // sum over the first n modes of f_k(x)^2 = Var X_n(x)
    double variance(double x1, double x2, std::size_t n_modes) const;
    // grad inner product (f_a, f_b) by 1-d quadratures of the separable factors
    double gram_entry(std::size_t a, std::size_t b) const;
};

struct GFFBasisSample {
    GffBasis basis;
    std::vector<double> coeffs;  // i.i.d. standard normals

    double value(double x1, double x2, std::size_t n_modes) const;
    double value(double x1, double x2) const { return value(x1, x2, coeffs.size()); }
};

GFFBasisSample gff_sample_basis(std::size_t j_max, std::uint64_t seed, std::uint32_t replica,
                                std::uint32_t field_tag = 0);

// circle average of the truncated field: precomputed mode projections make the
// per-replica cost a dot product
struct CircleProjection {
    Complex center;
    double radius = 0.0;
    std::vector<double> mode_average;

    double variance() const;  // sum of squared projections = Var of the average
};

CircleProjection circle_projection(const GffBasis& basis, Complex center, double radius,
                                   std::size_t n_quadrature = 0);
double circle_average(const GFFBasisSample& sample, const CircleProjection& projection);
double circle_average(const GFFBasisSample& sample, Complex center, double radius,
                      std::size_t n_quadrature = 0);

// Wick-ordered chaos of the basis-truncated fields over an axis-aligned
// square region, with the conformal radius weight of the square domain.
class GffChaosGrid {
  public:
    GffChaosGrid(double lo, double hi, std::size_t m);
    Complex chaos(const GFFBasisSample& x_field, const GFFBasisSample& y_field, double gamma,
                  double beta, std::size_t n_modes) const;

  private:
    std::size_t m_;
    double dx_;
    std::vector<double> xs_;      // node coordinates, per axis
    std::vector<double> weight_;  // C(x, D) per node pair, row-major
};

struct TachyonCondition {
    bool satisfied;
    double residual;     // 2 gamma - (gamma^2/2 - beta^2/2 + 2)
    bool admissible;     // residual = 0 and gamma in (1,2)
    bool special_point;  // (2, 0), the derivative-martingale tachyon
};
TachyonCondition tachyon_condition(double gamma, double beta);

struct KpzCheck {
    double delta0;    // beta^2 / 4
    double delta_q;   // beta / 2
    double residual;  // delta0 - (delta_q + delta_q (delta_q - 1))
};
KpzCheck kpz_check(double beta);

struct MobiusDiskMap {
    Complex a;  // psi(z) = (z - a) / (1 - conj(a) z)

    Complex value(Complex z) const;
    Complex derivative(Complex z) const;
    Complex inverse(Complex w) const;
};

struct ConformalInvarianceResult {
    Complex lhs;
    Complex rhs;
    double residual;  // relative
};

// First moments of both sides of the reparametrization identity for a smooth
// bump phi (center/radius inside the disk); the |psi'| factor disappears
// exactly when 2 gamma - gamma^2/2 + beta^2/2 - 2 = 0.
ConformalInvarianceResult conformal_invariance_first_moment(const MobiusDiskMap& psi,
                                                            double gamma, double beta,
                                                            Complex phi_center,
                                                            double phi_radius,
                                                            std::size_t grid = 512);

}  // namespace cgmc
