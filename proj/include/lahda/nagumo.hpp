#pragma once

#include "lahda/mesh.hpp"

#include <functional>
#include <vector>

namespace lahda {

/// Bistable reaction–diffusion u_t = ε²u_xx − u(u − 1)(u − a) on [0, L].
struct NagumoParams {
    double eps2 = 1e-2;
    double a = 0.95;
    double L = 20.0;
    /// Position of the front at t = 0.
    double x0 = 5.0;
    /// Test switch: drop the reaction term (heat equation).
    bool reaction = true;
    /// Dirichlet data from the exact wave at t + dt; otherwise the
    /// incoming boundary values are held fixed.
    bool exact_boundary = true;

    double eps() const;
    /// Wave speed c = (a − ½)·ε√2.
    double speed() const;
    void validate() const;
};

/// ½[1 + tanh((x − x0 − ct)/(2√2 ε))]
double nagumo_exact(double x, double t, const NagumoParams& p);
StateField nagumo_exact_field(const Mesh1D& mesh, double t, const NagumoParams& p);

/// One linearly implicit Euler step from t to t + dt. The reaction term is
/// linearized about u_n (one Newton correction), so every step is a single
/// tridiagonal solve.
StateField nagumo_step(const StateField& u, double dt, const NagumoParams& p, double t);

/// Step-doubling controller settings.
struct StepControl {
    double tol = 1e-5;
    double dt_initial = 1e-2;
    double dt_min = 1e-9;
    double dt_max = 0.25;
    double safety = 0.9;
    double max_growth = 2.0;
    double min_shrink = 0.2;
    long max_steps = 10'000'000;
};

struct StepLog {
    std::vector<double> times;
    std::vector<double> steps;
    long rejected = 0;

    long accepted() const { return static_cast<long>(steps.size()); }
};

/// Called after every accepted step with the new state and time; may
/// replace the state (for example with a remeshed copy).
using StepHook = std::function<void(StateField&, double)>;

/// Adaptive integration over [t0, t1]. Each step is compared against two
/// half steps; the error estimate is the max-norm difference and accepted
/// steps keep the extrapolated value 2·fine − coarse. The step is rescaled by
/// safety·(tol/err)^(1/2), clamped to [min_shrink, max_growth].
///
/// Throws SolverError (with the step log so far in the message) if the step
/// falls below dt_min.
StateField nagumo_integrate(const StateField& u0, double t0, double t1, const NagumoParams& p,
                            const StepControl& ctl, StepLog& log, const StepHook& on_step = {});

/// Mesh adaptation used by the standalone adaptive run.
struct NagumoMeshing {
    enum class Kind { arclength, hessian };
    Kind kind = Kind::hessian;
    double alpha_h = 1.0;
    int smoothing = 3;
    /// Remesh after the first accepted step at or beyond every multiple of
    /// this time.
    double interval = 0.5;
};

struct NagumoRun {
    StateField final_state;
    StepLog log;
    int remeshes = 0;
};

/// Integrates on an adaptive mesh: the mesh is re-equidistributed from the
/// current solution at regular time intervals and the state is carried over
/// by linear interpolation. The initial mesh is equidistributed from u0
/// first.
NagumoRun nagumo_run_adaptive(const StateField& u0, double t0, double t1, const NagumoParams& p,
                              const StepControl& ctl, const NagumoMeshing& meshing);

} // namespace lahda
