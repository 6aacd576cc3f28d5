#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "cgmc/kernels.hpp"

namespace cgmc {

struct Grid {
    int dimension = 1;
    std::size_t n = 0;      // points per axis, power of two
    double length = 1.0;    // periodic box edge

    double spacing() const { return length / static_cast<double>(n); }
    std::size_t total_points() const { return dimension == 1 ? n : n * n; }
    // grid coordinate of point index along one axis (midpoints not used: the
    // field lives on the lattice, integrals use the midpoint convention of the
    // chaos module)
    double coord(std::size_t i) const { return spacing() * static_cast<double>(i); }
    void validate(const CutoffSchedule& schedule) const;
};

struct FieldHierarchy {
    Grid grid;
    CutoffSchedule schedule;
    std::uint64_t seed = 0;
    std::uint32_t replica = 0;
    std::uint32_t field_tag = 0;
    std::string kernel_name;
    // levels[j][i] = X_{eps_j}(x_i), cumulative over shells
    std::vector<std::vector<double>> levels;
    // exact Var X_{eps_j}(x) used by Wick factors (log expressions, not table lookups)
    std::vector<double> level_variance;
    double clamped_spectral_mass = 0.0;  // worst relative clamped mass over shells

    std::size_t n_levels() const { return levels.size(); }
    const std::vector<double>& at_level(std::size_t j) const { return levels.at(j); }
};

// Samples hierarchies of stationary Gaussian fields, one independent shell per
// schedule level, by circulant embedding on a padded periodic extension.
class HierarchySampler {
  public:
    static HierarchySampler star(KernelPtr kernel, const Grid& grid,
                                 const CutoffSchedule& schedule);
    // d = 1 exact scale-invariant family: Var X_eps(0) = log(T/eps) + 1,
    // lag covariance log_+(T/|x|) beyond eps
    static HierarchySampler exact_scale_invariant(double T, const Grid& grid,
                                                  const CutoffSchedule& schedule);

    FieldHierarchy sample(std::uint64_t seed, std::uint32_t replica,
                          std::uint32_t field_tag = 0) const;

    // one shell on its own; variant > 0 selects an independent re-draw of the
    // same shell (used by the martingale-in-level checks)
    std::vector<double> sample_shell(std::size_t j, std::uint64_t seed, std::uint32_t replica,
                                     std::uint32_t field_tag = 0,
                                     std::uint32_t variant = 0) const;

    const Grid& grid() const { return grid_; }
    const CutoffSchedule& schedule() const { return schedule_; }
    double level_variance(std::size_t j) const { return level_variance_.at(j); }
    // target covariance of X_{eps_j} at lag r (exact evaluation, not sampled)
    double level_covariance(std::size_t j, double r) const;
    double clamped_spectral_mass() const { return clamped_mass_; }
    std::size_t padded_size() const { return n_pad_; }
    const std::string& kernel_name() const { return kernel_name_; }

  private:
    HierarchySampler(KernelPtr kernel, double T, bool exact, const Grid& grid,
                     const CutoffSchedule& schedule);
    void build_spectra();
    double shell_covariance(std::size_t j, double r) const;

    KernelPtr kernel_;  // null for the exact family
    double T_ = 0.0;
    bool exact_ = false;
    Grid grid_;
    CutoffSchedule schedule_;
    std::string kernel_name_;
    std::size_t n_pad_ = 0;
    std::vector<std::vector<double>> sqrt_eigen_;  // per shell, padded spectrum
    std::vector<double> level_variance_;
    double clamped_mass_ = 0.0;
};

std::pair<FieldHierarchy, FieldHierarchy> sample_independent_pair(const HierarchySampler& sampler,
                                                                  std::uint64_t seed,
                                                                  std::uint32_t replica);

}  // namespace cgmc
