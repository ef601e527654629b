#include "lahda/nagumo.hpp"

#include "lahda/banded.hpp"
#include "lahda/fd.hpp"
#include "lahda/mesh_ops.hpp"
#include "lahda/metric.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace lahda {

double NagumoParams::eps() const
{
    return std::sqrt(eps2);
}

double NagumoParams::speed() const
{
    return (a - 0.5) * eps() * std::sqrt(2.0);
}

void NagumoParams::validate() const
{
    if (!(eps2 > 0.0)) {
        throw std::invalid_argument("nagumo: eps2 must be positive");
    }
    if (!(a > 0.0 && a < 1.0)) {
        throw std::invalid_argument("nagumo: threshold a must lie in (0, 1)");
    }
    if (!(L > 0.0)) {
        throw std::invalid_argument("nagumo: domain length must be positive");
    }
}

double nagumo_exact(double x, double t, const NagumoParams& p)
{
    const double s = (x - p.x0 - p.speed() * t) / (2.0 * std::sqrt(2.0) * p.eps());
    return 0.5 * (1.0 + std::tanh(s));
}

StateField nagumo_exact_field(const Mesh1D& mesh, double t, const NagumoParams& p)
{
    Eigen::VectorXd u(static_cast<Eigen::Index>(mesh.size()));
    for (std::size_t j = 0; j < mesh.size(); ++j) {
        u[static_cast<Eigen::Index>(j)] = nagumo_exact(mesh[j], t, p);
    }
    return StateField(mesh, {u});
}

StateField nagumo_step(const StateField& u, double dt, const NagumoParams& p, double t)
{
    if (!(dt > 0.0)) {
        throw std::invalid_argument("nagumo_step: dt must be positive");
    }
    const Mesh1D& mesh = u.mesh();
    const int n = static_cast<int>(mesh.size());
    if (n < 3) {
        throw std::invalid_argument("nagumo_step: need at least 3 nodes");
    }
    const FdStencils stencils(mesh);
    const auto& d2 = stencils.second();
    const Eigen::VectorXd& un = u.component(0);

    BandMatrix a(n, 1, 1);
    Eigen::VectorXd rhs(n);
    for (int j = 1; j + 1 < n; ++j) {
        for (int o = -1; o <= 1; ++o) {
            a.at(j, j + o) = -dt * p.eps2 * d2[j][o + 2];
        }
        a.at(j, j) += 1.0;
        rhs[j] = un[j];
        if (p.reaction) {
            // f(u) = u(u − 1)(u − a) = u³ − (1 + a)u² + au
            const double v = un[j];
            const double f = v * (v - 1.0) * (v - p.a);
            const double df = 3.0 * v * v - 2.0 * (1.0 + p.a) * v + p.a;
            a.at(j, j) += dt * df;
            rhs[j] -= dt * (f - df * v);
        }
    }
    a.at(0, 0) = 1.0;
    a.at(n - 1, n - 1) = 1.0;
    if (p.exact_boundary) {
        rhs[0] = nagumo_exact(mesh.lo(), t + dt, p);
        rhs[n - 1] = nagumo_exact(mesh.hi(), t + dt, p);
    } else {
        rhs[0] = un[0];
        rhs[n - 1] = un[n - 1];
    }
    Eigen::VectorXd next;
    try {
        next = a.solve(rhs);
    } catch (const SolverError& e) {
        std::ostringstream os;
        os << e.what() << " (nagumo step t = " << t << ", dt = " << dt << ", " << n
           << " nodes, min width = " << mesh.min_width() << ")";
        throw SolverError(os.str());
    }
    return StateField(mesh, {next});
}

StateField nagumo_integrate(const StateField& u0, double t0, double t1, const NagumoParams& p,
                            const StepControl& ctl, StepLog& log, const StepHook& on_step)
{
    if (!(ctl.tol > 0.0)) {
        throw std::invalid_argument("nagumo_integrate: tolerance must be positive");
    }
    StateField u = u0;
    double t = t0;
    double dt = std::min(ctl.dt_initial, ctl.dt_max);
    const double span = t1 - t0;
    long steps = 0;
    while (t < t1 - 1e-12 * std::max(1.0, std::abs(span))) {
        const bool last = t + dt >= t1;
        const double h = last ? t1 - t : dt;
        const StateField coarse = nagumo_step(u, h, p, t);
        const StateField half = nagumo_step(u, 0.5 * h, p, t);
        StateField fine = nagumo_step(half, 0.5 * h, p, t + 0.5 * h);
        const double err = (fine.component(0) - coarse.component(0)).lpNorm<Eigen::Infinity>();
        double factor = err > 0.0 ? ctl.safety * std::sqrt(ctl.tol / err) : ctl.max_growth;
        factor = std::clamp(factor, ctl.min_shrink, ctl.max_growth);
        if (err <= ctl.tol) {
            fine.component(0) = 2.0 * fine.component(0) - coarse.component(0);
            u = std::move(fine);
            t = last ? t1 : t + h;
            log.times.push_back(t);
            log.steps.push_back(h);
            if (on_step) {
                on_step(u, t);
            }
            if (++steps > ctl.max_steps) {
                throw SolverError("nagumo_integrate: step budget exhausted");
            }
            if (!last) {
                dt = std::min(h * factor, ctl.dt_max);
            }
        } else {
            ++log.rejected;
            dt = h * factor;
            if (dt < ctl.dt_min) {
                std::ostringstream os;
                os << "nagumo_integrate: step size " << dt << " fell below dt_min = " << ctl.dt_min << " at t = " << t
                   << " after " << log.accepted() << " accepted and " << log.rejected << " rejected steps";
                if (!log.steps.empty()) {
                    os << "; last accepted steps:";
                    const std::size_t from = log.steps.size() > 5 ? log.steps.size() - 5 : 0;
                    for (std::size_t i = from; i < log.steps.size(); ++i) {
                        os << " " << log.steps[i];
                    }
                }
                throw SolverError(os.str());
            }
        }
    }
    return u;
}

namespace {

Mesh1D adapted_mesh(const StateField& u, const NagumoMeshing& meshing)
{
    const auto values = as_span(u.component(0));
    MetricField m = meshing.kind == NagumoMeshing::Kind::hessian ? hessian_metric(values, u.mesh(), meshing.alpha_h)
                                                                  : arclength_metric(values, u.mesh());
    return equidistribute(smooth_metric(m, meshing.smoothing), u.mesh().intervals());
}

} // namespace

NagumoRun nagumo_run_adaptive(const StateField& u0, double t0, double t1, const NagumoParams& p,
                              const StepControl& ctl, const NagumoMeshing& meshing)
{
    p.validate();
    if (!(meshing.interval > 0.0)) {
        throw std::invalid_argument("nagumo_run_adaptive: remesh interval must be positive");
    }
    NagumoRun run{interp_linear(u0, adapted_mesh(u0, meshing)), {}, 0};
    double next_remesh = t0 + meshing.interval;
    auto hook = [&](StateField& u, double t) {
        if (t >= next_remesh - 1e-12) {
            u = interp_linear(u, adapted_mesh(u, meshing));
            ++run.remeshes;
            while (next_remesh <= t + 1e-12) {
                next_remesh += meshing.interval;
            }
        }
    };
    run.final_state = nagumo_integrate(run.final_state, t0, t1, p, ctl, run.log, hook);
    return run;
}

} // namespace lahda
