#include "lahda/twin.hpp"

#include "lahda/csv.hpp"
#include "lahda/mesh_ops.hpp"
#include "lahda/parallel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>

namespace lahda {

namespace {

const char* component_name(int c)
{
    static const char* names[] = {"u", "v", "w"};
    return c < 3 ? names[c] : "c";
}

std::string path_in(const std::string& dir, const std::string& file)
{
    return (std::filesystem::path(dir) / file).string();
}

} // namespace

TwinResult run_twin(const CycleConfig& cfg, const std::string& label)
{
    TwinExperiment exp(cfg);
    TwinResult r;
    r.label = label;
    r.records = exp.run();
    r.mean_rmse = mean_rmse(r.records, cfg.spinup_cycles);
    return r;
}

void write_twin_outputs(const TwinResult& result, const CycleConfig& cfg, const std::string& dir)
{
    std::filesystem::create_directories(dir);
    const auto& recs = result.records;
    const int nc = recs.empty() ? 0 : static_cast<int>(recs.front().rmse.size());
    const auto windowed = rmse_series(recs, cfg.rmse_window);

    std::vector<std::string> cols{"cycle", "t"};
    for (int c = 0; c < nc; ++c) {
        const std::string n = component_name(c);
        cols.insert(cols.end(), {"rmse_" + n, "rmse_" + n + "_window", "forecast_rmse_" + n, "spread_" + n});
    }
    cols.insert(cols.end(), {"min_width", "max_width", "interpolations", "empty_updates", "mean_local_obs"});
    CsvWriter rmse_csv(path_in(dir, "rmse.csv"), "rmse", cols);
    for (std::size_t i = 0; i < recs.size(); ++i) {
        const auto& r = recs[i];
        rmse_csv.cell(r.cycle).cell(r.time);
        for (int c = 0; c < nc; ++c) {
            rmse_csv.cell(r.rmse[c]).cell(windowed[c][i]).cell(r.forecast_rmse[c]).cell(r.spread[c]);
        }
        rmse_csv.cell(r.mesh.min_width()).cell(r.mesh.max_width()).cell(r.interpolations);
        rmse_csv.cell(r.analysis.empty_updates).cell(r.analysis.mean_local_obs);
        rmse_csv.end_row();
    }

    CsvWriter steps(path_in(dir, "steps.csv"), "steps", {"cycle", "t", "ensemble", "member", "steps"});
    for (const auto& r : recs) {
        for (std::size_t i = 0; i < r.pre_steps.size(); ++i) {
            steps.cell(r.cycle).cell(r.time).cell("small").cell(i).cell(r.pre_steps[i]).end_row();
        }
        for (std::size_t i = 0; i < r.steps.size(); ++i) {
            steps.cell(r.cycle).cell(r.time).cell("full").cell(i).cell(r.steps[i]).end_row();
        }
    }

    CsvWriter mesh(path_in(dir, "mesh.csv"), "mesh", {"cycle", "t", "index", "x"});
    for (const auto& r : recs) {
        for (std::size_t k = 0; k < r.mesh.size(); ++k) {
            mesh.cell(r.cycle).cell(r.time).cell(k).cell(r.mesh[k]).end_row();
        }
    }

    CsvWriter timings(path_in(dir, "timings.csv"), "timings",
                      {"cycle", "pre_forecast", "mesh", "interpolation", "forecast", "analysis", "truth"});
    for (const auto& r : recs) {
        const auto& p = r.timings;
        timings.cell(r.cycle).cell(p.pre_forecast).cell(p.mesh).cell(p.interpolation).cell(p.forecast);
        timings.cell(p.analysis).cell(p.truth).end_row();
    }

    std::ofstream resolved(path_in(dir, "config.resolved.cfg"));
    resolved << write_config(cfg);
}

void print_summary(std::ostream& os, const TwinResult& result, const CycleConfig& cfg)
{
    PhaseTimes total;
    for (const auto& r : result.records) {
        total.pre_forecast += r.timings.pre_forecast;
        total.mesh += r.timings.mesh;
        total.interpolation += r.timings.interpolation;
        total.forecast += r.timings.forecast;
        total.analysis += r.timings.analysis;
        total.truth += r.timings.truth;
    }
    os << fmt::format("{}: {} cycles, method {}, mesh {}, variant {}\n", result.label, result.records.size(),
                      to_string(cfg.method), to_string(cfg.mesh), to_string(cfg.variant));
    for (std::size_t c = 0; c < result.mean_rmse.size(); ++c) {
        os << fmt::format("  mean analysis RMSE {} after {} spin-up cycles: {:.6g}\n", component_name(static_cast<int>(c)),
                          cfg.spinup_cycles, result.mean_rmse[c]);
    }
    os << fmt::format("  phase seconds: pre-forecast {:.3f}, mesh {:.3f}, interpolation {:.3f}, forecast {:.3f}, "
                      "analysis {:.3f}, truth {:.3f}\n",
                      total.pre_forecast, total.mesh, total.interpolation, total.forecast, total.analysis,
                      total.truth);
}

std::vector<TwinResult> compare_runs(const CycleConfig& cfg, const std::string& axis)
{
    std::vector<std::pair<std::string, CycleConfig>> runs;
    auto with = [&](const std::string& label, auto&& edit) {
        CycleConfig c = cfg;
        edit(c);
        runs.emplace_back(label, c);
    };
    if (axis == "flow") {
        with("nonflow", [](CycleConfig& c) { c.variant = LahVariant::non_flow; });
        with("flow", [](CycleConfig& c) { c.variant = LahVariant::flow; });
    } else if (axis == "mesh") {
        with("uniform", [](CycleConfig& c) { c.mesh = MeshMode::uniform; });
        with("adaptive", [](CycleConfig& c) { c.mesh = MeshMode::adaptive; });
    } else if (axis == "coupling") {
        with("coupled", [](CycleConfig& c) { c.coupling = Coupling::coupled; });
        with("uncoupled", [](CycleConfig& c) { c.coupling = Coupling::uncoupled; });
    } else if (axis == "nse") {
        for (int n : {1, 2, 4, 8}) {
            if (n <= cfg.ne) {
                with(fmt::format("nse{}", n), [n](CycleConfig& c) { c.nse = n; });
            }
        }
    } else if (axis == "method") {
        with("methodA", [](CycleConfig& c) { c.method = Method::A; });
        with("methodB", [](CycleConfig& c) { c.method = Method::B; });
    } else {
        throw std::invalid_argument(fmt::format("unknown comparison axis '{}' (expected flow|mesh|coupling|nse|method)", axis));
    }
    std::vector<TwinResult> out;
    for (auto& [label, c] : runs) {
        out.push_back(run_twin(c, label));
    }
    return out;
}

void write_compare_outputs(const std::vector<TwinResult>& runs, const CycleConfig& cfg, const std::string& dir)
{
    std::filesystem::create_directories(dir);
    if (runs.empty()) {
        return;
    }
    const int nc = static_cast<int>(runs.front().mean_rmse.size());
    std::vector<std::string> cols{"label", "cycle", "t"};
    for (int c = 0; c < nc; ++c) {
        cols.push_back(fmt::format("rmse_{}", component_name(c)));
        cols.push_back(fmt::format("rmse_{}_window", component_name(c)));
    }
    CsvWriter series(path_in(dir, "compare.csv"), "compare", cols);
    for (const auto& run : runs) {
        const auto w = rmse_series(run.records, cfg.rmse_window);
        for (std::size_t i = 0; i < run.records.size(); ++i) {
            series.cell(run.label).cell(run.records[i].cycle).cell(run.records[i].time);
            for (int c = 0; c < nc; ++c) {
                series.cell(run.records[i].rmse[c]).cell(w[c][i]);
            }
            series.end_row();
        }
    }
    std::vector<std::string> scols{"label"};
    for (int c = 0; c < nc; ++c) {
        scols.push_back(fmt::format("mean_rmse_{}", component_name(c)));
        scols.push_back(fmt::format("delta_{}", component_name(c)));
    }
    CsvWriter summary(path_in(dir, "compare_summary.csv"), "compare-summary", scols);
    for (const auto& run : runs) {
        summary.cell(run.label);
        for (int c = 0; c < nc; ++c) {
            summary.cell(run.mean_rmse[c]).cell(run.mean_rmse[c] - runs.front().mean_rmse[c]);
        }
        summary.end_row();
    }
}

double LahStudy::full_step_stddev() const
{
    if (full_steps.size() < 2) {
        return 0.0;
    }
    const double mean =
        std::accumulate(full_steps.begin(), full_steps.end(), 0.0) / static_cast<double>(full_steps.size());
    double s = 0.0;
    for (long n : full_steps) {
        s += (static_cast<double>(n) - mean) * (static_cast<double>(n) - mean);
    }
    return std::sqrt(s / static_cast<double>(full_steps.size() - 1));
}

LahStudy nagumo_lah_study(const CycleConfig& cfg, int nse, double p0, double horizon)
{
    if (nse < 1 || nse > cfg.ne) {
        throw std::invalid_argument("nagumo_lah_study: nse must lie in [1, ne]");
    }
    const NagumoModel model(cfg.nagumo, cfg.nagumo_control);
    const auto exact = [&](const Mesh1D& m) { return nagumo_exact_field(m, 0.0, cfg.nagumo); };
    const Mesh1D start =
        adapt_to(exact, Mesh1D::uniform(0.0, cfg.nagumo.L, cfg.intervals), cfg.alpha_h, cfg.smoothing);
    const StateField wave = exact(start);

    std::vector<StateField> members;
    for (int i = 0; i < cfg.ne; ++i) {
        std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                          static_cast<std::uint32_t>(i), 2u};
        std::mt19937_64 rng(seq);
        std::normal_distribution<double> normal(0.0, std::sqrt(p0));
        StateField m = wave;
        for (Eigen::Index j = 1; j + 1 < m.component(0).size(); ++j) {
            m.component(0)[j] += normal(rng);
        }
        members.push_back(std::move(m));
    }

    std::vector<int> chosen(nse);
    std::iota(chosen.begin(), chosen.end(), 0);
    std::vector<std::optional<PreForecast>> pre(nse);
    parallel_for(static_cast<std::size_t>(nse), [&](std::size_t i) {
        pre[i] = pre_forecast(model, members[chosen[i]], 0.0, horizon, cfg.alpha_h, cfg.smoothing,
                              LahVariant::non_flow, nullptr);
    });
    LahStudy study;
    study.nse = nse;
    study.p0 = p0;
    std::vector<PreForecast> done;
    for (auto& p : pre) {
        study.small_steps.push_back(p->steps);
        done.push_back(std::move(*p));
    }
    study.mesh = equidistribute(build_lah_metric(done, start, horizon, LahVariant::non_flow, nullptr, cfg.smoothing),
                                cfg.intervals);
    study.full_steps.assign(members.size(), 0);
    parallel_for(members.size(), [&](std::size_t i) {
        StateField u = interp_linear(members[i], study.mesh);
        study.full_steps[i] = model.advance(u, 0.0, horizon);
    });
    return study;
}

void write_lah_outputs(const std::vector<LahStudy>& studies, const std::string& dir)
{
    std::filesystem::create_directories(dir);
    CsvWriter steps(path_in(dir, "lah_steps.csv"), "lah-steps", {"nse", "p0", "ensemble", "member", "steps"});
    CsvWriter summary(path_in(dir, "lah_summary.csv"), "lah-summary",
                      {"nse", "p0", "mean_full_steps", "stddev_full_steps", "min_width"});
    for (const auto& s : studies) {
        for (std::size_t i = 0; i < s.small_steps.size(); ++i) {
            steps.cell(s.nse).cell(s.p0).cell("small").cell(i).cell(s.small_steps[i]).end_row();
        }
        for (std::size_t i = 0; i < s.full_steps.size(); ++i) {
            steps.cell(s.nse).cell(s.p0).cell("full").cell(i).cell(s.full_steps[i]).end_row();
        }
        const double mean = std::accumulate(s.full_steps.begin(), s.full_steps.end(), 0.0) /
                            static_cast<double>(std::max<std::size_t>(s.full_steps.size(), 1));
        summary.cell(s.nse).cell(s.p0).cell(mean).cell(s.full_step_stddev()).cell(s.mesh.min_width()).end_row();
    }
}

MeshDemo mesh_demo(const CycleConfig& cfg, const std::vector<double>& times)
{
    if (cfg.model != ModelKind::nagumo) {
        throw std::invalid_argument("mesh-demo requires model = nagumo");
    }
    if (times.empty()) {
        throw std::invalid_argument("mesh-demo needs at least one snapshot time");
    }
    MeshDemo demo;
    demo.times = times;
    const Mesh1D uniform = Mesh1D::uniform(0.0, cfg.nagumo.L, cfg.intervals);
    // metrics are compared on a fine reference mesh so the intersection sees
    // every front sharply
    const Mesh1D fine = Mesh1D::uniform(0.0, cfg.nagumo.L, 8 * cfg.intervals);
    std::vector<MetricField> on_fine;
    for (double t : times) {
        const auto exact = [&](const Mesh1D& m) { return nagumo_exact_field(m, t, cfg.nagumo); };
        const Mesh1D mesh = adapt_to(exact, uniform, cfg.alpha_h, cfg.smoothing);
        demo.snapshots.push_back(mesh);
        demo.metrics.push_back(state_metric(exact(mesh), cfg.alpha_h, cfg.smoothing));
        on_fine.push_back(state_metric(exact(fine), cfg.alpha_h, cfg.smoothing));
    }
    demo.combined_metric = metric_intersect_field(on_fine);
    demo.combined = equidistribute(demo.combined_metric, cfg.intervals);
    return demo;
}

void write_mesh_demo(const MeshDemo& demo, const CycleConfig& cfg, const std::string& dir, bool dump_metric)
{
    std::filesystem::create_directories(dir);
    CsvWriter csv(path_in(dir, "mesh_demo.csv"), "mesh-demo", {"mesh", "kind", "t", "index", "x", "u"});
    for (std::size_t s = 0; s < demo.snapshots.size(); ++s) {
        const StateField u = nagumo_exact_field(demo.snapshots[s], demo.times[s], cfg.nagumo);
        for (std::size_t k = 0; k < demo.snapshots[s].size(); ++k) {
            csv.cell(s).cell("snapshot").cell(demo.times[s]).cell(k).cell(demo.snapshots[s][k]);
            csv.cell(u.component(0)[static_cast<Eigen::Index>(k)]).end_row();
        }
    }
    for (std::size_t k = 0; k < demo.combined.size(); ++k) {
        csv.cell(demo.snapshots.size()).cell("combined").cell(demo.times.back()).cell(k).cell(demo.combined[k]);
        csv.cell(std::string_view{}).end_row();
    }
    if (dump_metric) {
        CsvWriter m(path_in(dir, "metric.csv"), "metric", metric_csv_columns(1));
        for (std::size_t s = 0; s < demo.metrics.size(); ++s) {
            write_metric_csv(m, fmt::format("t={}", csv_real(demo.times[s])), demo.metrics[s]);
        }
        write_metric_csv(m, "combined", demo.combined_metric);
    }
}

} // namespace lahda
