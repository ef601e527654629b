#pragma once

#include "lahda/mesh.hpp"
#include "lahda/spd.hpp"

#include <span>
#include <vector>

namespace lahda {

enum class Location { node, element };

/// Metric tensor (mesh density function) sampled over a mesh, one SPD value
/// per node or per element.
class MetricField {
public:
    MetricField(Mesh1D mesh, Location location, std::vector<SpdMatrix> values);

    static MetricField identity(const Mesh1D& mesh, int dim = 1);
    static MetricField scalar(const Mesh1D& mesh, std::span<const double> values);

    const Mesh1D& mesh() const { return mesh_; }
    Location location() const { return location_; }
    int dim() const { return values_.front().dim(); }
    std::size_t size() const { return values_.size(); }
    const SpdMatrix& operator[](std::size_t i) const { return values_[i]; }
    const std::vector<SpdMatrix>& values() const& { return values_; }
    /// By value on temporaries so that range-for over a returned field is safe.
    std::vector<SpdMatrix> values() && { return std::move(values_); }

    /// √det 𝕄 at each sample.
    Eigen::VectorXd density() const;
    Eigen::VectorXd determinants() const;

    /// Element field averaged to nodes by adjacent-element mean; node fields
    /// are returned unchanged.
    MetricField to_nodes() const;

    /// Entrywise linear interpolation of a node field onto another mesh of
    /// the same domain.
    MetricField interpolate_to(const Mesh1D& target) const;

private:
    Mesh1D mesh_;
    Location location_;
    std::vector<SpdMatrix> values_;
};

/// Left-to-right fold of spd_intersect over fields sharing mesh, dim and location.
MetricField metric_intersect_field(std::span<const MetricField> fields);
MetricField metric_intersect(const MetricField& a, const MetricField& b);

/// Recovered nodal Hessian of u: the nonuniform second difference at interior
/// nodes, boundary nodes copy their neighbour.
Eigen::VectorXd recovered_hessian(std::span<const double> u, const Mesh1D& mesh);

/// Hessian-based metric optimal for the L² linear interpolation error:
/// 𝕄 = det(I + |H|/α)^(−1/(d+4)) (I + |H|/α), nodal.
MetricField hessian_metric(std::span<const double> u, const Mesh1D& mesh, double alpha_h = 1.0);

/// Arc-length metric m = √(1 + u_x²) with u_x the backward difference
/// averaged from the adjacent elements to each node.
MetricField arclength_metric(std::span<const double> u, const Mesh1D& mesh);

/// Ad hoc metric concentrating nodes near point observations:
/// 𝕄(x) = (1 + Σⱼ χ(|x − xⱼ|)) I, χ(w) = [e^(w²/σ²) − 1 + 2/D]⁻¹ with
/// D = max_K √det 𝕄ᴷ of the supplied ensemble metric.
MetricField adhoc_obs_metric(std::span<const double> obs_locations, const Mesh1D& mesh, double sigma,
                             const MetricField& ens_metric);

struct GaussKernel;

/// Goal-oriented metric for nonlocal (kernel) observations, per element:
/// 𝕄_K = det(A_K)^(−1/(d+2)) A_K, A_K = I + |H_K|/α · Σᵢ |G(x̂ᵢ − x_K)|,
/// with x_K the element midpoint and H_K the mean of the nodal Hessians.
MetricField nonlocal_obs_metric(std::span<const double> u, const Mesh1D& mesh,
                                std::span<const double> obs_locations, const GaussKernel& kernel,
                                double alpha_h = 1.0);

/// `sweeps` passes of 1/4–1/2–1/4 entrywise averaging; end values are kept.
MetricField smooth_metric(const MetricField& m, int sweeps);

/// Discrete meshing energy (θ = 1/3, p = 3/2) of a 1D mesh in the metric,
/// with F'_K = |K|·N and 𝕄_K the element average. Diagnostic only.
double mesh_energy(const Mesh1D& mesh, const MetricField& m);

} // namespace lahda
