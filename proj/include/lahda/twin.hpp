#pragma once

#include "lahda/config.hpp"
#include "lahda/cycle.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace lahda {

struct TwinResult {
    std::string label;
    std::vector<CycleRecord> records;
    /// Time-averaged analysis RMSE per component after spin-up.
    std::vector<double> mean_rmse;
};

/// Runs a full twin experiment.
TwinResult run_twin(const CycleConfig& cfg, const std::string& label = "run");

/// Writes rmse.csv, steps.csv, mesh.csv, timings.csv and config.resolved.cfg
/// into `dir` (created if needed).
void write_twin_outputs(const TwinResult& result, const CycleConfig& cfg, const std::string& dir);

/// One line per component with the post-spin-up mean RMSE.
void print_summary(std::ostream& os, const TwinResult& result, const CycleConfig& cfg);

/// Paired runs sharing truth and observation noise (they share the seed),
/// differing along one axis: flow, mesh, coupling or nse.
std::vector<TwinResult> compare_runs(const CycleConfig& cfg, const std::string& axis);
void write_compare_outputs(const std::vector<TwinResult>& runs, const CycleConfig& cfg, const std::string& dir);

/// Step counts of a Nagumo look-ahead experiment: a perturbed ensemble of
/// traveling waves, a small ensemble pre-forecast on adaptive meshes over
/// [0, horizon] forming the look-ahead mesh (no observation metric), and the
/// full ensemble integrated on that fixed mesh.
struct LahStudy {
    int nse = 0;
    double p0 = 0.0;
    std::vector<long> small_steps;
    std::vector<long> full_steps;
    Mesh1D mesh = Mesh1D::uniform(0.0, 1.0, 1);

    double full_step_stddev() const;
};

LahStudy nagumo_lah_study(const CycleConfig& cfg, int nse, double p0, double horizon);
void write_lah_outputs(const std::vector<LahStudy>& studies, const std::string& dir);

/// Traveling wave snapshots at the given times, their adapted meshes and the
/// combined look-ahead mesh. Writes mesh_demo.csv (and metric.csv when
/// `dump_metric`) into `dir`.
struct MeshDemo {
    std::vector<double> times;
    std::vector<Mesh1D> snapshots;
    std::vector<MetricField> metrics;
    Mesh1D combined = Mesh1D::uniform(0.0, 1.0, 1);
    MetricField combined_metric = MetricField::identity(Mesh1D::uniform(0.0, 1.0, 1));
};

MeshDemo mesh_demo(const CycleConfig& cfg, const std::vector<double>& times);
void write_mesh_demo(const MeshDemo& demo, const CycleConfig& cfg, const std::string& dir, bool dump_metric);

/// Mesh adapted to a state by repeated equidistribution of its metric,
/// resampling `f` on every new mesh.
template <class F>
Mesh1D adapt_to(F&& sample, Mesh1D mesh, double alpha_h, int smoothing, int passes = 3);

} // namespace lahda

#include "lahda/mesh_ops.hpp"

namespace lahda {

template <class F>
Mesh1D adapt_to(F&& sample, Mesh1D mesh, double alpha_h, int smoothing, int passes)
{
    for (int p = 0; p < passes; ++p) {
        mesh = equidistribute(state_metric(sample(mesh), alpha_h, smoothing), mesh.intervals());
    }
    return mesh;
}

} // namespace lahda
