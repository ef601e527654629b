#pragma once

#include "lahda/mesh.hpp"

#include <numbers>

namespace lahda {

/// Coupled Kuramoto–Sivashinsky pair on the rescaled interval [0, 1]:
///   u_t + u u_x + u_xx + μ₁ u_xxxx = c₁(v − u)   (physical length L₁)
///   v_t + v v_x + v_xx + μ₂ v_xxxx = c₂(u − v)   (physical length L₂)
/// with u = v = 0 and u_xx = v_xx = 0 at both ends.
struct KseParams {
    double L1 = 1.5 * std::numbers::pi;
    double L2 = 4.0 * std::numbers::pi;
    double mu1 = 2.5e-3;
    double mu_min = 2.5e-3;
    double mu_max = 5e-2;
    double omega = 0.2;
    double c1 = 0.1;
    double c2 = 0.1;
    /// Use the equation as printed, which makes μ₂ ≡ μ_min.
    bool mu2_literal = false;

    void validate() const;
};

/// Storm-tracker viscosity μ_min + (μ_max − μ_min)(1 − |sin z|)²,
/// z = π(x + ω sin 2πt).
double mu2(double x, double t, const KseParams& p);

/// One linearly implicit backward Euler step. The advection term is split as
/// (u u_x)ₙ₊₁ ≈ uₙ(u_x)ₙ₊₁ + uₙ₊₁(u_x)ₙ − uₙ(u_x)ₙ, μ₂ is evaluated at t + dt,
/// and the two components are solved together as one banded system with
/// interleaved unknowns. Throws SolverError if the system is singular.
StateField kse_step(const StateField& state, double dt, const KseParams& p, double t);

/// Spatial residual −(u u_x + u_xx + μ u_xxxx)/scales + coupling, i.e. the
/// right-hand side u_t of the semi-discrete system at time t.
StateField kse_rhs(const StateField& state, const KseParams& p, double t);

} // namespace lahda
