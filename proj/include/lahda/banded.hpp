#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace lahda {

/// Raised when a model step cannot be completed (singular system, step
/// size underflow).
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Square band matrix in LAPACK general-band storage, solved with dgbsv.
class BandMatrix {
public:
    BandMatrix(int n, int kl, int ku);

    int size() const { return n_; }
    int lower() const { return kl_; }
    int upper() const { return ku_; }

    /// Entry (i, j); |i − j| must lie inside the band.
    double& at(int i, int j);
    double get(int i, int j) const;

    /// Dense copy, for tests and diagnostics.
    Eigen::MatrixXd dense() const;

    /// Solves A x = b by banded LU with partial pivoting. The matrix is
    /// consumed (factored in place); a second call throws.
    Eigen::VectorXd solve(const Eigen::VectorXd& b);

private:
    int n_;
    int kl_;
    int ku_;
    int ldab_;
    bool factored_ = false;
    std::vector<double> ab_;
};

} // namespace lahda
