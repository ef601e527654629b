#include "lahda/fd.hpp"

#include <sstream>
#include <stdexcept>

namespace lahda {

FdStencils::FdStencils(const Mesh1D& mesh)
    : mesh_(mesh)
{
    const int n = static_cast<int>(mesh.size());
    const auto x = mesh.nodes();
    d1_.assign(n, Row{});
    d2_.assign(n, Row{});
    d4_.assign(n, Row{});

    // offset o is stored at index o + 2
    d1_[0][2] = -1.0 / (x[1] - x[0]);
    d1_[0][3] = 1.0 / (x[1] - x[0]);
    for (int j = 1; j < n; ++j) {
        const double h = x[j] - x[j - 1];
        d1_[j][1] = -1.0 / h;
        d1_[j][2] = 1.0 / h;
    }

    for (int j = 1; j + 1 < n; ++j) {
        const double hm = x[j] - x[j - 1];
        const double hp = x[j + 1] - x[j];
        const double a = 2.0 / (x[j + 1] - x[j - 1]);
        d2_[j][1] = a / hm;
        d2_[j][3] = a / hp;
        d2_[j][2] = -a / hm - a / hp;
    }

    // D4 = D2 ∘ D2; the zero boundary rows of D2 carry the ghost closure.
    for (int j = 1; j + 1 < n; ++j) {
        for (int o = -1; o <= 1; ++o) {
            const int m = j + o;
            const double outer = d2_[j][o + 2];
            for (int p = -1; p <= 1; ++p) {
                const int col = m + p - j;
                if (m + p < 0 || m + p >= n) {
                    continue;
                }
                d4_[j][col + 2] += outer * d2_[m][p + 2];
            }
        }
    }
}

const std::vector<FdStencils::Row>& FdStencils::rows(int order) const
{
    switch (order) {
    case 1:
        return d1_;
    case 2:
        return d2_;
    case 4:
        return d4_;
    default: {
        std::ostringstream os;
        os << "FdStencils: unsupported derivative order " << order;
        throw std::invalid_argument(os.str());
    }
    }
}

Eigen::VectorXd FdStencils::apply(std::span<const double> u, int order) const
{
    const int n = static_cast<int>(mesh_.size());
    if (static_cast<int>(u.size()) != n) {
        throw std::invalid_argument("FdStencils::apply: vector length does not match mesh");
    }
    if (order == 4 && n < 5) {
        throw std::invalid_argument("FdStencils::apply: fourth derivative needs at least 5 nodes");
    }
    const auto& r = rows(order);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int o = -2; o <= 2; ++o) {
            const int c = j + o;
            if (c >= 0 && c < n && r[j][o + 2] != 0.0) {
                s += r[j][o + 2] * u[c];
            }
        }
        out[j] = s;
    }
    return out;
}

Eigen::VectorXd fd_apply(std::span<const double> u, const Mesh1D& mesh, int order)
{
    return FdStencils(mesh).apply(u, order);
}

} // namespace lahda
