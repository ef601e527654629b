#pragma once

#include "lahda/mesh.hpp"
#include "lahda/metric.hpp"

#include <span>
#include <vector>

namespace lahda {

/// Location of a point inside a mesh: x = (1 − t)·x[element] + t·x[element+1].
struct Bracket {
    int element;
    double t;
};

/// Brackets for sorted query points; queries outside [lo, hi] (beyond a
/// 1e-12·length tolerance) raise std::out_of_range.
std::vector<Bracket> locate_sorted(const Mesh1D& mesh, std::span<const double> sorted_points);
Bracket locate(const Mesh1D& mesh, double x);

/// Equidistributes ρ = √det 𝕄 (nodal, piecewise linear) into `intervals`
/// elements by exact inversion of the piecewise-quadratic cumulative
/// integral. Endpoints are those of the metric's mesh.
Mesh1D equidistribute(const MetricField& m, int intervals);

/// Piecewise-linear interpolation of every component onto `target`.
StateField interp_linear(const StateField& u, const Mesh1D& target);
Eigen::VectorXd interp_linear(const Mesh1D& source, std::span<const double> values, const Mesh1D& target);

struct MeshQuality {
    /// max_K |ρ_K|K| − σ_h/N| / (σ_h/N)
    double equidistribution_residual;
    /// Identically zero in 1D.
    double alignment_residual;
    double min_width;
    double max_width;
    double energy;
};

/// Mesh diagnostics in the metric. When `m` lives on `mesh`, ρ_K|K| is the
/// trapezoidal integral of the nodal density; when it lives on a different
/// mesh, its piecewise-linear density is integrated exactly over the
/// elements of `mesh` (re-measuring an equidistributed mesh against its
/// source metric).
MeshQuality mesh_quality(const Mesh1D& mesh, const MetricField& m);

} // namespace lahda
