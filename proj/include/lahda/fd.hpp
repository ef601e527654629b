#pragma once

#include "lahda/mesh.hpp"

#include <array>
#include <span>
#include <vector>

namespace lahda {

/// Nonuniform finite-difference operators on a Mesh1D.
///
/// Interior formulas:
///   u_x    backward difference (u_j − u_{j−1}) / (x_j − x_{j−1})
///   u_xx   2/(x_{j+1} − x_{j−1}) · [D⁺u_j − D⁻u_j]
///   u_xxxx the u_xx stencil applied to the u_xx values (nested form)
///
/// Boundary rows use a ghost node obtained by odd reflection about the end
/// value (x₋₁ = 2x₀ − x₁, u₋₁ = 2u₀ − u₁, same at the right end). With that
/// closure u_xx vanishes at both ends and u_x at the left end becomes the
/// forward difference.
///
/// Each row is stored as coefficients for offsets −2..+2.
class FdStencils {
public:
    using Row = std::array<double, 5>;

    explicit FdStencils(const Mesh1D& mesh);

    const Mesh1D& mesh() const { return mesh_; }
    const std::vector<Row>& first() const { return d1_; }
    const std::vector<Row>& second() const { return d2_; }
    const std::vector<Row>& fourth() const { return d4_; }
    const std::vector<Row>& rows(int order) const;

    /// Applies the stencil of the given order (1, 2 or 4).
    Eigen::VectorXd apply(std::span<const double> u, int order) const;

private:
    Mesh1D mesh_;
    std::vector<Row> d1_;
    std::vector<Row> d2_;
    std::vector<Row> d4_;
};

/// Convenience wrapper building the stencils on the fly.
/// Order 4 needs at least 5 nodes.
Eigen::VectorXd fd_apply(std::span<const double> u, const Mesh1D& mesh, int order);

} // namespace lahda
