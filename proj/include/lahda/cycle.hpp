#pragma once

#include "lahda/config.hpp"
#include "lahda/letkf.hpp"
#include "lahda/metric.hpp"
#include "lahda/model.hpp"
#include "lahda/observations.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <vector>

namespace lahda {

/// Instantaneous metric of a state: each component's Hessian metric is
/// smoothed, the components are intersected, and the result is smoothed again.
MetricField state_metric(const StateField& u, double alpha_h, int smoothing);

/// Running intersection 𝕄[t₀, t] of instantaneous metrics.
struct AccumulatedMetric {
    double t0 = 0.0;
    MetricField field;
};

/// acc ∩ now, with acc first interpolated onto now's mesh when they differ.
AccumulatedMetric accumulate_step(const AccumulatedMetric& acc, const MetricField& now);

/// Observation metric provider for one network.
class ObsMetric {
public:
    ObsMetric(ObsNetwork network, double sigma, double alpha_h, bool enabled = true);

    /// 𝕄_obs at time t on `mesh`. `ens_metric` supplies the scale of the ad
    /// hoc point metric; `state` the Hessian of the goal-oriented nonlocal
    /// metric. Returns the identity field when disabled.
    MetricField at(double t, const StateField& state, const MetricField& ens_metric) const;

    const ObsNetwork& network() const { return network_; }
    bool enabled() const { return enabled_; }

private:
    ObsNetwork network_;
    double sigma_;
    double alpha_h_;
    bool enabled_;
};

/// Result of one small-ensemble pre-forecast on the member's own mesh.
struct PreForecast {
    StateField state;
    /// 𝕄[t, t + Δt] on the member's final mesh.
    MetricField accumulated;
    /// ⋂ⱼ (𝕄[t, tⱼ] ∩ 𝕄_obs(tⱼ)), flow variant only.
    std::optional<MetricField> flow;
    /// ⋂ⱼ 𝕄_obs(tⱼ), obs-accumulation variant only.
    std::optional<MetricField> obs_accumulated;
    long steps = 0;
};

/// Advances one member over [t, t + span] on its own adaptive mesh. After
/// every accepted step the instantaneous metric is intersected into the
/// accumulated metric, the mesh is re-equidistributed with the (smoothed)
/// accumulated metric, and state and metrics move to the new mesh.
PreForecast pre_forecast(const Model& model, const StateField& start, double t, double span, double alpha_h,
                         int smoothing, LahVariant variant, const ObsMetric* obs);

/// Look-ahead metric on `eval_mesh` from the pre-forecasts, then smoothed:
///   non_flow:            ⋂ᵢ [𝕄⁽ⁱ⁾[t, t+Δt] ∩ 𝕄_obs(t+Δt)]
///   flow:                ⋂ᵢ ⋂ⱼ [𝕄⁽ⁱ⁾[t, tⱼ] ∩ 𝕄_obs(tⱼ)]
///   non_flow_obs_accum:  ⋂ᵢ [𝕄⁽ⁱ⁾[t, t+Δt] ∩ 𝕄_obs[t, t+Δt]]
MetricField build_lah_metric(const std::vector<PreForecast>& members, const Mesh1D& eval_mesh, double t_end,
                             LahVariant variant, const ObsMetric* obs, int smoothing);

/// Wall-clock seconds spent in each phase of a cycle.
struct PhaseTimes {
    double pre_forecast = 0.0;
    double mesh = 0.0;
    double interpolation = 0.0;
    double forecast = 0.0;
    double analysis = 0.0;
    double truth = 0.0;
};

struct CycleRecord {
    int cycle = 0;
    /// Analysis time.
    double time = 0.0;
    std::vector<double> rmse;
    std::vector<double> forecast_rmse;
    std::vector<double> spread;
    /// Accepted internal steps of every full-ensemble member.
    std::vector<long> steps;
    /// Accepted internal steps of the small-ensemble pre-forecasts.
    std::vector<long> pre_steps;
    Mesh1D mesh = Mesh1D::uniform(0.0, 1.0, 1);
    /// Member-state interpolations performed in the cycle.
    long interpolations = 0;
    AnalysisReport analysis;
    PhaseTimes timings;
};

/// Truth trajectory on a fixed uniform reference mesh.
class TruthRun {
public:
    TruthRun(const Model& model, StateField initial, double t0);

    void advance(double span);
    const StateField& state() const { return state_; }
    double time() const { return t_; }

private:
    const Model* model_;
    StateField state_;
    double t_;
};

/// A complete twin experiment: truth, ensemble and network.
class TwinExperiment {
public:
    explicit TwinExperiment(const CycleConfig& cfg);

    /// Runs one forecast/analysis cycle and returns its record.
    CycleRecord step();
    bool done() const { return cycle_ >= cfg_.cycles; }
    std::vector<CycleRecord> run();

    const CycleConfig& config() const { return cfg_; }
    const Model& model() const { return *model_; }
    const TruthRun& truth() const { return *truth_; }
    double time() const { return t_; }
    /// Method B / uniform: the shared mesh of all members.
    const Mesh1D& common_mesh() const { return common_; }
    const std::vector<StateField>& members() const { return members_; }
    const ObsNetwork& network() const { return obs_->network(); }

private:
    CycleRecord step_method_b();
    CycleRecord step_method_a();
    void add_model_noise(std::vector<StateField>& members) const;
    void finish_record(CycleRecord& rec, const EnsembleState& forecast, const EnsembleState& analysis) const;
    ObservationSet observe(double t) const;
    std::mt19937_64 generator(std::uint64_t tag, std::uint64_t member = 0) const;

    CycleConfig cfg_;
    std::unique_ptr<Model> model_;
    std::unique_ptr<TruthRun> truth_;
    std::unique_ptr<ObsMetric> obs_;
    std::vector<StateField> members_;
    Mesh1D common_;
    double t_start_ = 0.0;
    double t_ = 0.0;
    int cycle_ = 0;
};

std::unique_ptr<Model> make_model(const CycleConfig& cfg);
ObsNetwork make_network(const CycleConfig& cfg, double lo, double hi, int components);

/// Root mean square over nodes of a − b.
double rmse(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Centered moving average: entry i is the mean of values[j] over all j with
/// |times[j] − times[i]| ≤ window/2.
std::vector<double> rmse_series(const std::vector<double>& times, const std::vector<double>& values, double window);

/// Per-component windowed RMSE series of a run.
std::vector<std::vector<double>> rmse_series(const std::vector<CycleRecord>& records, double window);

/// Time-averaged raw analysis RMSE per component over cycles ≥ first_cycle.
std::vector<double> mean_rmse(const std::vector<CycleRecord>& records, int first_cycle);

} // namespace lahda
