#pragma once

#include "lahda/kse.hpp"
#include "lahda/letkf.hpp"
#include "lahda/nagumo.hpp"
#include "lahda/observations.hpp"

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>

namespace lahda {

enum class ModelKind { kse, nagumo };
enum class Method { A, B };
/// How observations enter the look-ahead metric: only at the analysis time
/// (non_flow), at every internal time together with the member metric
/// (flow), or accumulated over the window and applied at the end
/// (non_flow_obs_accum).
enum class LahVariant { non_flow, flow, non_flow_obs_accum };
enum class MeshMode { adaptive, uniform };
/// midpoints: centers of `count` equal cells over the model domain.
/// offset: first + k·spacing. range: `count` points evenly covering
/// [range_lo, range_hi].
enum class ObsLayout { midpoints, offset, range };

struct ObsConfig {
    ObsKind kind = ObsKind::pointwise;
    int count = 400;
    ObsLayout layout = ObsLayout::midpoints;
    double first = 0.0;
    double spacing = 0.0;
    double range_lo = 0.25;
    double range_hi = 0.75;
    bool moving = false;
    double amplitude = 0.25;
    double omega = 750.0;
    double delta = 1e-3;
    double r_obs = 2e-2;
    /// Number of observed components counted from the first; 0 means all.
    int components = 0;
};

/// Every parameter of a twin experiment.
struct CycleConfig {
    ModelKind model = ModelKind::kse;
    KseParams kse{};
    NagumoParams nagumo{};
    StepControl nagumo_control{};

    int ne = 20;
    int nse = 8;
    double dt_obs = 1e-4;
    double dt_solver = 2.5e-5;
    int intervals = 400;
    int cycles = 500;
    int spinup_cycles = 100;

    double p0 = 0.1;
    double q = 0.1;
    double r = 0.01;
    double rho = 1.1;
    double r0 = 0.02;
    /// α_h of the metric that sets the localization radii; 0 reuses the mesh α_h.
    double loc_alpha_h = 0.0;
    Coupling coupling = Coupling::coupled;
    bool perturbed_obs = false;

    Method method = Method::B;
    LahVariant variant = LahVariant::non_flow;
    MeshMode mesh = MeshMode::adaptive;
    double alpha_h = 1.0;
    int smoothing = 3;
    double sigma = 0.5;
    bool obs_metric = true;
    /// Method A: internal steps between member re-equidistributions.
    int remesh_steps = 4;

    ObsConfig obs{};

    double localization_alpha() const { return loc_alpha_h > 0.0 ? loc_alpha_h : alpha_h; }

    int truth_refinement = 4;
    double truth_spinup = 0.2;
    double rmse_window = 0.05;
    std::uint64_t seed = 1;
    int threads = 1;

    /// Rejects inconsistent settings with a message naming the field.
    void validate() const;
};

/// Parses `key = value` lines grouped in [section]s. Unknown sections or
/// keys and malformed values raise ConfigError naming the field.
CycleConfig parse_config(std::istream& in);
CycleConfig load_config(const std::string& path);

/// Writes every field; parse_config of the result reproduces `cfg` exactly.
std::string write_config(const CycleConfig& cfg);

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string to_string(ModelKind v);
std::string to_string(Method v);
std::string to_string(LahVariant v);
std::string to_string(MeshMode v);
std::string to_string(Coupling v);
std::string to_string(ObsKind v);
std::string to_string(ObsLayout v);

} // namespace lahda
