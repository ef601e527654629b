#include "lahda/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace lahda {

KseModel::KseModel(KseParams params, double dt)
    : params_(params), dt_(dt)
{
    params_.validate();
    if (!(dt > 0.0)) {
        throw std::invalid_argument("KseModel: solver step must be positive");
    }
}

long KseModel::advance(StateField& u, double t, double span, const StepHook& on_step) const
{
    const double ratio = span / dt_;
    const long steps = std::lround(ratio);
    if (steps < 1 || std::abs(ratio - static_cast<double>(steps)) > 1e-9 * ratio) {
        std::ostringstream os;
        os << "KseModel: solver step " << dt_ << " does not divide the interval " << span;
        throw std::invalid_argument(os.str());
    }
    for (long s = 0; s < steps; ++s) {
        const double ts = t + static_cast<double>(s) * dt_;
        u = kse_step(u, dt_, params_, ts);
        if (on_step) {
            on_step(u, t + static_cast<double>(s + 1) * dt_);
        }
    }
    return steps;
}

NagumoModel::NagumoModel(NagumoParams params, StepControl control)
    : params_(params), control_(control)
{
    params_.validate();
}

long NagumoModel::advance(StateField& u, double t, double span, const StepHook& on_step) const
{
    StepLog log;
    u = nagumo_integrate(u, t, t + span, params_, control_, log, on_step);
    return log.accepted();
}

} // namespace lahda
