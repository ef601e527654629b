#pragma once

#include "lahda/mesh.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace lahda {

/// Normalized Gaussian kernel G(x) = (√(2π)δ)^(−d) exp(−|x|²/(2δ²)).
struct GaussKernel {
    double delta = 1e-3;
    int dim = 1;

    double operator()(double r) const;
};

enum class ObsKind { pointwise, nonlocal };

struct ObsOperator {
    ObsKind kind = ObsKind::pointwise;
    GaussKernel kernel{};
    /// Support radius of each nonlocal observation.
    double r_obs = 2e-2;

    /// Extra reach of one observation beyond its center (0 for point values).
    double support() const { return kind == ObsKind::nonlocal ? r_obs : 0.0; }
};

/// Point values by linear interpolation; locations must lie in the domain.
Eigen::VectorXd obs_pointwise(std::span<const double> u, const Mesh1D& mesh, std::span<const double> locations);

/// Truncated kernel average: Σ over elements with midpoint within r_obs of x̂
/// of |K|·G(x̂ − x_K)·(u_j + u_{j+1})/2. No renormalization after truncation.
Eigen::VectorXd obs_nonlocal(std::span<const double> u, const Mesh1D& mesh, std::span<const double> locations,
                             const GaussKernel& kernel, double r_obs);

/// x_k(t) = x_k(0) + amplitude·sin(ω·π·t)
std::vector<double> moving_locations(double t, std::span<const double> base, double amplitude, double omega);

/// Static or oscillating observing network, one location set per state
/// component. Observation error covariance is R = variance·I.
struct ObsNetwork {
    ObsOperator op{};
    std::vector<std::vector<double>> base;
    double amplitude = 0.0;
    double omega = 0.0;
    double variance = 0.01;

    bool moving() const { return amplitude != 0.0; }
    std::vector<std::vector<double>> locations_at(double t) const;
    /// Rejects networks whose full excursion leaves [lo, hi].
    void validate(double lo, double hi) const;
    std::size_t size() const;
};

/// Observations at one time. The vector layout is component-major:
/// all locations of component 0, then component 1, and so on.
struct ObservationSet {
    double time = 0.0;
    ObsOperator op{};
    std::vector<std::vector<double>> locations;
    Eigen::VectorXd values;
    Eigen::VectorXd r_diag;
    std::uint64_t noise_seed = 0;

    std::size_t size() const { return static_cast<std::size_t>(values.size()); }
    /// H(u) in the same layout as `values`.
    Eigen::VectorXd apply(const StateField& u) const;
};

Eigen::VectorXd apply_operator(const ObsOperator& op, const StateField& u,
                               const std::vector<std::vector<double>>& locations);

/// Applies the network's operator to the truth and adds independent
/// N(0, R_jj) noise drawn from a generator seeded with `seed`.
ObservationSet synthesize_observations(const StateField& truth, const ObsNetwork& network, double t,
                                       std::uint64_t seed);

} // namespace lahda
