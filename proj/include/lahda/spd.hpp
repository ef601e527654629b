#pragma once

#include <Eigen/Dense>

namespace lahda {

/// Dense storage for metric values; dimension is at most 3.
using SmallMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;

/// Symmetric positive definite d×d matrix (d ∈ {1,2,3}).
///
/// Construction validates symmetry (1e-12 relative) and positivity: inputs
/// whose smallest eigenvalue is at or below 1e-12·trace are rejected with
/// std::invalid_argument.
class SpdMatrix {
public:
    explicit SpdMatrix(const SmallMatrix& m);

    static SpdMatrix identity(int dim);
    static SpdMatrix scalar(double value);
    static SpdMatrix diagonal(const Eigen::VectorXd& diag);

    /// Wraps a matrix already known to be SPD (e.g. a convex combination of
    /// SPD values). Only symmetrizes; no eigenvalue check.
    static SpdMatrix assume_spd(const SmallMatrix& m);

    int dim() const { return static_cast<int>(m_.rows()); }
    const SmallMatrix& matrix() const { return m_; }
    double operator()(int i, int j) const { return m_(i, j); }
    double det() const;
    double min_eigenvalue() const;
    double max_eigenvalue() const;

private:
    struct Trusted {};
    SpdMatrix(const SmallMatrix& m, Trusted) : m_(m) {}

    SmallMatrix m_;
};

/// Metric intersection A ∩ B = P⁻¹ diag(max(1, bᵢ)) P⁻ᵀ where PAPᵀ = I and
/// PBPᵀ = diag(b). The result dominates both operands in the Loewner order.
///
/// P is obtained from the Cholesky factor of A composed with the eigenbasis
/// of L⁻¹BL⁻ᵀ. For d = 1 this reduces to max(a, b).
SpdMatrix spd_intersect(const SpdMatrix& a, const SpdMatrix& b);

} // namespace lahda
