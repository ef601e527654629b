#include "lahda/kse.hpp"

#include "lahda/banded.hpp"
#include "lahda/fd.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace lahda {

void KseParams::validate() const
{
    if (!(L1 > 0.0 && L2 > 0.0 && mu1 > 0.0 && mu_min > 0.0 && mu_max > 0.0)) {
        throw std::invalid_argument("kse: lengths and viscosities must be positive");
    }
    if (mu_min > mu_max) {
        throw std::invalid_argument("kse: mu_min must not exceed mu_max");
    }
    if (c1 < 0.0 || c2 < 0.0) {
        throw std::invalid_argument("kse: coupling coefficients must be non-negative");
    }
}

double mu2(double x, double t, const KseParams& p)
{
    if (p.mu2_literal) {
        return p.mu_min;
    }
    const double z = std::numbers::pi * (x + p.omega * std::sin(2.0 * std::numbers::pi * t));
    const double s = 1.0 - std::abs(std::sin(z));
    return p.mu_min + (p.mu_max - p.mu_min) * s * s;
}

namespace {

void check_state(const StateField& state)
{
    if (state.components() != 2) {
        throw std::invalid_argument("kse: state must have two components (u, v)");
    }
    if (state.mesh().size() < 5) {
        throw std::invalid_argument("kse: need at least 5 nodes");
    }
}

} // namespace

StateField kse_step(const StateField& state, double dt, const KseParams& p, double t)
{
    if (!(dt > 0.0)) {
        throw std::invalid_argument("kse_step: dt must be positive");
    }
    check_state(state);
    const Mesh1D& mesh = state.mesh();
    const int n = static_cast<int>(mesh.size());
    const FdStencils fd(mesh);
    const auto& d1 = fd.first();
    const auto& d2 = fd.second();
    const auto& d4 = fd.fourth();

    const double length[2] = {p.L1, p.L2};
    const double coupling[2] = {p.c1, p.c2};
    const Eigen::VectorXd* comp[2] = {&state.component(0), &state.component(1)};
    const Eigen::VectorXd ux[2] = {fd.apply(as_span(state.component(0)), 1),
                                   fd.apply(as_span(state.component(1)), 1)};

    // unknown (node j, component c) sits at 2j + c
    BandMatrix a(2 * n, 4, 4);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(2 * n);
    for (int c = 0; c < 2; ++c) {
        a.at(c, c) = 1.0;
        a.at(2 * (n - 1) + c, 2 * (n - 1) + c) = 1.0;
    }
    for (int j = 1; j + 1 < n; ++j) {
        for (int c = 0; c < 2; ++c) {
            const double len = length[c];
            const double mu = c == 0 ? p.mu1 : mu2(mesh[j], t + dt, p);
            const double un = (*comp[c])[j];
            const int row = 2 * j + c;
            for (int o = -2; o <= 2; ++o) {
                const int node = j + o;
                if (node < 0 || node >= n) {
                    continue;
                }
                const double coef = un * d1[j][o + 2] / len + d2[j][o + 2] / (len * len) +
                                    mu * d4[j][o + 2] / (len * len * len * len);
                if (coef != 0.0) {
                    a.at(row, 2 * node + c) += dt * coef;
                }
            }
            a.at(row, row) += 1.0 + dt * (ux[c][j] / len + coupling[c]);
            a.at(row, 2 * j + (1 - c)) -= dt * coupling[c];
            rhs[row] = un + dt / len * un * ux[c][j];
        }
    }
    Eigen::VectorXd x;
    try {
        x = a.solve(rhs);
    } catch (const SolverError& e) {
        std::ostringstream os;
        os << e.what() << " (kse step t = " << t << ", dt = " << dt << ", " << n
           << " nodes, min width = " << mesh.min_width() << ")";
        throw SolverError(os.str());
    }
    Eigen::VectorXd u(n);
    Eigen::VectorXd v(n);
    for (int j = 0; j < n; ++j) {
        u[j] = x[2 * j];
        v[j] = x[2 * j + 1];
    }
    if (!u.allFinite() || !v.allFinite()) {
        std::ostringstream os;
        os << "kse step produced non-finite values at t = " << t << " (dt = " << dt << ")";
        throw SolverError(os.str());
    }
    return StateField(mesh, {u, v});
}

StateField kse_rhs(const StateField& state, const KseParams& p, double t)
{
    check_state(state);
    const Mesh1D& mesh = state.mesh();
    const FdStencils fd(mesh);
    const double length[2] = {p.L1, p.L2};
    const double coupling[2] = {p.c1, p.c2};
    std::vector<Eigen::VectorXd> out;
    for (int c = 0; c < 2; ++c) {
        const auto w = as_span(state.component(c));
        const Eigen::VectorXd wx = fd.apply(w, 1);
        const Eigen::VectorXd wxx = fd.apply(w, 2);
        const Eigen::VectorXd wxxxx = fd.apply(w, 4);
        const double len = length[c];
        Eigen::VectorXd r = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.size()));
        for (Eigen::Index j = 1; j + 1 < r.size(); ++j) {
            const double mu = c == 0 ? p.mu1 : mu2(mesh[static_cast<std::size_t>(j)], t, p);
            r[j] = -(state.component(c)[j] * wx[j] / len + wxx[j] / (len * len) +
                     mu * wxxxx[j] / (len * len * len * len)) +
                   coupling[c] * (state.component(1 - c)[j] - state.component(c)[j]);
        }
        out.push_back(std::move(r));
    }
    return StateField(mesh, std::move(out));
}

} // namespace lahda
