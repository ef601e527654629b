#include "lahda/banded.hpp"

#include <lapacke.h>

#include <sstream>

namespace lahda {

BandMatrix::BandMatrix(int n, int kl, int ku)
    : n_(n), kl_(kl), ku_(ku), ldab_(2 * kl + ku + 1)
{
    if (n < 1 || kl < 0 || ku < 0) {
        throw std::invalid_argument("BandMatrix: invalid dimensions");
    }
    ab_.assign(static_cast<std::size_t>(ldab_) * n_, 0.0);
}

double& BandMatrix::at(int i, int j)
{
    if (i < 0 || j < 0 || i >= n_ || j >= n_ || i - j > kl_ || j - i > ku_) {
        std::ostringstream os;
        os << "BandMatrix: entry (" << i << ", " << j << ") outside the band";
        throw std::out_of_range(os.str());
    }
    // column-major band storage: AB(kl + ku + i − j, j)
    return ab_[static_cast<std::size_t>(j) * ldab_ + kl_ + ku_ + i - j];
}

double BandMatrix::get(int i, int j) const
{
    if (i - j > kl_ || j - i > ku_) {
        return 0.0;
    }
    return ab_[static_cast<std::size_t>(j) * ldab_ + kl_ + ku_ + i - j];
}

Eigen::MatrixXd BandMatrix::dense() const
{
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_, n_);
    for (int j = 0; j < n_; ++j) {
        for (int i = std::max(0, j - ku_); i <= std::min(n_ - 1, j + kl_); ++i) {
            a(i, j) = get(i, j);
        }
    }
    return a;
}

Eigen::VectorXd BandMatrix::solve(const Eigen::VectorXd& b)
{
    if (factored_) {
        throw std::logic_error("BandMatrix: already factored");
    }
    if (b.size() != n_) {
        throw std::invalid_argument("BandMatrix: right-hand side has the wrong length");
    }
    factored_ = true;
    Eigen::VectorXd x = b;
    std::vector<lapack_int> ipiv(n_);
    const lapack_int info = LAPACKE_dgbsv(LAPACK_COL_MAJOR, n_, kl_, ku_, 1, ab_.data(), ldab_, ipiv.data(),
                                          x.data(), n_);
    if (info != 0) {
        std::ostringstream os;
        if (info > 0) {
            os << "banded solve: exactly singular pivot at row " << info - 1 << " of " << n_;
        } else {
            os << "banded solve: illegal argument " << -info;
        }
        throw SolverError(os.str());
    }
    return x;
}

} // namespace lahda
