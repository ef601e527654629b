#pragma once

#include "lahda/banded.hpp"
#include "lahda/kse.hpp"
#include "lahda/mesh.hpp"
#include "lahda/nagumo.hpp"

#include <memory>
#include <string>

namespace lahda {

/// Forward model as seen by the cycle drivers.
class Model {
public:
    virtual ~Model() = default;

    virtual std::string name() const = 0;
    virtual int components() const = 0;
    virtual double lo() const = 0;
    virtual double hi() const = 0;

    /// Advances u from t to t + span and returns the number of accepted
    /// internal steps. `on_step` runs after each accepted step and may
    /// replace u (for example with a remeshed copy).
    virtual long advance(StateField& u, double t, double span, const StepHook& on_step = {}) const = 0;
};

/// Coupled KSE with a fixed internal step that must divide every span.
class KseModel : public Model {
public:
    KseModel(KseParams params, double dt);

    std::string name() const override { return "kse"; }
    int components() const override { return 2; }
    double lo() const override { return 0.0; }
    double hi() const override { return 1.0; }
    long advance(StateField& u, double t, double span, const StepHook& on_step = {}) const override;

    const KseParams& params() const { return params_; }
    double dt() const { return dt_; }

private:
    KseParams params_;
    double dt_;
};

/// Nagumo equation with step-doubling adaptive time steps.
class NagumoModel : public Model {
public:
    NagumoModel(NagumoParams params, StepControl control);

    std::string name() const override { return "nagumo"; }
    int components() const override { return 1; }
    double lo() const override { return 0.0; }
    double hi() const override { return params_.L; }
    long advance(StateField& u, double t, double span, const StepHook& on_step = {}) const override;

    const NagumoParams& params() const { return params_; }
    const StepControl& control() const { return control_; }

private:
    NagumoParams params_;
    StepControl control_;
};

} // namespace lahda
