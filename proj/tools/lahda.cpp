#include "lahda/config.hpp"
#include "lahda/parallel.hpp"
#include "lahda/twin.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <iostream>
#include <optional>

using namespace lahda;

namespace {

struct CommonOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::string out = "out";
    std::optional<std::string> method;
    std::optional<std::string> variant;
    bool mu2_literal = false;
};

void add_common(CLI::App* cmd, CommonOptions& o)
{
    cmd->add_option("--config", o.config, "Experiment configuration file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", o.seed, "Override the configuration seed");
    cmd->add_option("--threads", o.threads, "Worker threads (results do not depend on it)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--out", o.out, "Output directory");
    cmd->add_option("--method", o.method, "Forecast/analysis method")->check(CLI::IsMember({"A", "B"}));
    cmd->add_option("--variant", o.variant, "Look-ahead metric variant")
        ->check(CLI::IsMember({"flow", "nonflow", "nonflow-obs-accum"}));
    cmd->add_flag("--mu2-literal", o.mu2_literal, "Use the printed storm-tracker viscosity (constant mu_min)");
}

CycleConfig resolve(const CommonOptions& o)
{
    CycleConfig cfg = load_config(o.config);
    if (o.seed) {
        cfg.seed = *o.seed;
    }
    if (o.threads) {
        cfg.threads = *o.threads;
    }
    if (o.method) {
        cfg.method = *o.method == "A" ? Method::A : Method::B;
    }
    if (o.variant) {
        cfg.variant = *o.variant == "flow"      ? LahVariant::flow
                      : *o.variant == "nonflow" ? LahVariant::non_flow
                                                : LahVariant::non_flow_obs_accum;
    }
    if (o.mu2_literal) {
        cfg.kse.mu2_literal = true;
    }
    cfg.validate();
    set_thread_count(cfg.threads);
    return cfg;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Ensemble data assimilation on adaptive look-ahead meshes"};
    app.require_subcommand(1);

    CommonOptions twin_opts;
    auto* twin = app.add_subcommand("run-twin", "Run a twin experiment and write rmse/steps/mesh CSVs");
    add_common(twin, twin_opts);

    CommonOptions cmp_opts;
    std::string axis;
    double horizon = 20.0;
    auto* cmp = app.add_subcommand("compare", "Run paired experiments along one axis");
    add_common(cmp, cmp_opts);
    cmp->add_option("--axis", axis, "Comparison axis")
        ->required()
        ->check(CLI::IsMember({"flow", "mesh", "coupling", "nse", "method"}));
    cmp->add_option("--horizon", horizon, "Nagumo look-ahead window for --axis nse")->check(CLI::PositiveNumber);

    CommonOptions demo_opts;
    std::vector<double> times{0.0, 10.0, 20.0};
    bool dump_metric = false;
    auto* demo = app.add_subcommand("mesh-demo", "Wave snapshots, their meshes and the combined look-ahead mesh");
    add_common(demo, demo_opts);
    demo->add_option("--times", times, "Snapshot times");
    demo->add_flag("--dump-metric", dump_metric, "Also write the metric fields to metric.csv");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*twin) {
            const CycleConfig cfg = resolve(twin_opts);
            const TwinResult result = run_twin(cfg, "run-twin");
            write_twin_outputs(result, cfg, twin_opts.out);
            print_summary(std::cout, result, cfg);
        } else if (*cmp) {
            const CycleConfig cfg = resolve(cmp_opts);
            if (axis == "nse" && cfg.model == ModelKind::nagumo) {
                std::vector<LahStudy> studies;
                for (double p0 : {0.1, 0.01}) {
                    for (int n : {1, 2, 4, 8}) {
                        if (n > cfg.ne) {
                            continue;
                        }
                        studies.push_back(nagumo_lah_study(cfg, n, p0, horizon));
                        const auto& s = studies.back();
                        std::cout << fmt::format("nse {} p0 {}: full-ensemble step count stddev {:.4g}\n", s.nse, s.p0,
                                                 s.full_step_stddev());
                    }
                }
                write_lah_outputs(studies, cmp_opts.out);
            } else {
                const auto runs = compare_runs(cfg, axis);
                write_compare_outputs(runs, cfg, cmp_opts.out);
                for (const auto& r : runs) {
                    print_summary(std::cout, r, cfg);
                }
            }
        } else if (*demo) {
            CycleConfig cfg = resolve(demo_opts);
            const MeshDemo d = mesh_demo(cfg, times);
            write_mesh_demo(d, cfg, demo_opts.out, dump_metric);
            std::cout << fmt::format("{} snapshot meshes and 1 combined mesh written to {}\n", d.snapshots.size(),
                                     demo_opts.out);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
