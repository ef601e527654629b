#include "lahda/spd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace lahda {

namespace {

void check_dim(Eigen::Index rows, Eigen::Index cols)
{
    if (rows != cols || rows < 1 || rows > 3) {
        std::ostringstream os;
        os << "SpdMatrix: expected square d x d with d in {1,2,3}, got " << rows << "x" << cols;
        throw std::invalid_argument(os.str());
    }
}

} // namespace

SpdMatrix::SpdMatrix(const SmallMatrix& m)
{
    check_dim(m.rows(), m.cols());
    const double scale = std::max(m.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw std::invalid_argument("SpdMatrix: input is not symmetric");
    }
    m_ = 0.5 * (m + m.transpose());
    const double trace = m_.trace();
    const double lo = min_eigenvalue();
    if (!(trace > 0.0) || !(lo > 1e-12 * trace) || !std::isfinite(trace)) {
        std::ostringstream os;
        os << "SpdMatrix: not positive definite (min eigenvalue " << lo << ", trace " << trace << ")";
        throw std::invalid_argument(os.str());
    }
}

SpdMatrix SpdMatrix::identity(int dim)
{
    check_dim(dim, dim);
    return SpdMatrix(SmallMatrix::Identity(dim, dim), Trusted{});
}

SpdMatrix SpdMatrix::scalar(double value)
{
    if (!(value > 0.0) || !std::isfinite(value)) {
        std::ostringstream os;
        os << "SpdMatrix: scalar metric value must be positive and finite, got " << value;
        throw std::invalid_argument(os.str());
    }
    SmallMatrix m(1, 1);
    m(0, 0) = value;
    return SpdMatrix(m, Trusted{});
}

SpdMatrix SpdMatrix::diagonal(const Eigen::VectorXd& diag)
{
    SmallMatrix m = SmallMatrix::Zero(diag.size(), diag.size());
    m.diagonal() = diag;
    return SpdMatrix(m);
}

SpdMatrix SpdMatrix::assume_spd(const SmallMatrix& m)
{
    check_dim(m.rows(), m.cols());
    return SpdMatrix(0.5 * (m + m.transpose()), Trusted{});
}

double SpdMatrix::det() const
{
    switch (dim()) {
    case 1:
        return m_(0, 0);
    case 2:
        return m_(0, 0) * m_(1, 1) - m_(0, 1) * m_(1, 0);
    default:
        return m_.determinant();
    }
}

double SpdMatrix::min_eigenvalue() const
{
    if (dim() == 1) {
        return m_(0, 0);
    }
    Eigen::SelfAdjointEigenSolver<SmallMatrix> es(m_, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double SpdMatrix::max_eigenvalue() const
{
    if (dim() == 1) {
        return m_(0, 0);
    }
    Eigen::SelfAdjointEigenSolver<SmallMatrix> es(m_, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

SpdMatrix spd_intersect(const SpdMatrix& a, const SpdMatrix& b)
{
    if (a.dim() != b.dim()) {
        std::ostringstream os;
        os << "spd_intersect: dimension mismatch (" << a.dim() << " vs " << b.dim() << ")";
        throw std::invalid_argument(os.str());
    }
    if (a.dim() == 1) {
        return SpdMatrix::assume_spd(SmallMatrix::Constant(1, 1, std::max(a(0, 0), b(0, 0))));
    }

    Eigen::LLT<SmallMatrix> llt(a.matrix());
    if (llt.info() != Eigen::Success) {
        throw std::invalid_argument("spd_intersect: Cholesky factorization of first operand failed");
    }
    const SmallMatrix l = llt.matrixL();
    // C = L⁻¹ B L⁻ᵀ
    SmallMatrix c = l.triangularView<Eigen::Lower>().solve(b.matrix());
    c = l.triangularView<Eigen::Lower>().solve(c.transpose()).eval();
    c = 0.5 * (c + c.transpose());

    Eigen::SelfAdjointEigenSolver<SmallMatrix> es(c);
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("spd_intersect: eigen-decomposition failed");
    }
    const Eigen::VectorXd lifted = es.eigenvalues().cwiseMax(1.0);
    // P = Vᵀ L⁻¹, so P⁻¹ D P⁻ᵀ = L V D Vᵀ Lᵀ.
    const SmallMatrix lv = l * es.eigenvectors();
    const SmallMatrix result = lv * lifted.asDiagonal() * lv.transpose();
    return SpdMatrix::assume_spd(result);
}

} // namespace lahda
