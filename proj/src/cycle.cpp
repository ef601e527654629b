#include "lahda/cycle.hpp"

#include "lahda/mesh_ops.hpp"
#include "lahda/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace lahda {

namespace {

enum Tag : std::uint64_t { tag_truth = 1, tag_init = 2, tag_subset = 3, tag_noise = 4, tag_obs = 5, tag_perturb = 6 };

class Stopwatch {
public:
    double lap()
    {
        const auto now = std::chrono::steady_clock::now();
        const double s = std::chrono::duration<double>(now - last_).count();
        last_ = now;
        return s;
    }

private:
    std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

MetricField nodal_on(const MetricField& m, const Mesh1D& mesh)
{
    return m.to_nodes().interpolate_to(mesh);
}

std::vector<double> merged_locations(const std::vector<std::vector<double>>& locs)
{
    std::vector<double> all;
    for (const auto& l : locs) {
        all.insert(all.end(), l.begin(), l.end());
    }
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    return all;
}

} // namespace

MetricField state_metric(const StateField& u, double alpha_h, int smoothing)
{
    std::vector<MetricField> parts;
    parts.reserve(u.components());
    for (int c = 0; c < u.components(); ++c) {
        parts.push_back(smooth_metric(hessian_metric(as_span(u.component(c)), u.mesh(), alpha_h), smoothing));
    }
    if (parts.size() == 1) {
        return parts.front();
    }
    return smooth_metric(metric_intersect_field(parts), smoothing);
}

AccumulatedMetric accumulate_step(const AccumulatedMetric& acc, const MetricField& now)
{
    const MetricField current = now.to_nodes();
    return {acc.t0, metric_intersect(nodal_on(acc.field, current.mesh()), current)};
}

ObsMetric::ObsMetric(ObsNetwork network, double sigma, double alpha_h, bool enabled)
    : network_(std::move(network)), sigma_(sigma), alpha_h_(alpha_h), enabled_(enabled)
{
    if (!(sigma > 0.0) || !(alpha_h > 0.0)) {
        throw std::invalid_argument("ObsMetric: sigma and alpha_h must be positive");
    }
}

MetricField ObsMetric::at(double t, const StateField& state, const MetricField& ens_metric) const
{
    const Mesh1D& mesh = state.mesh();
    if (!enabled_ || network_.size() == 0) {
        return MetricField::identity(mesh, ens_metric.dim());
    }
    const auto locs = network_.locations_at(t);
    if (network_.op.kind == ObsKind::pointwise) {
        const auto all = merged_locations(locs);
        return adhoc_obs_metric(all, mesh, sigma_, ens_metric);
    }
    std::vector<MetricField> parts;
    for (std::size_t c = 0; c < locs.size(); ++c) {
        parts.push_back(nonlocal_obs_metric(as_span(state.component(static_cast<int>(c))), mesh, locs[c],
                                            network_.op.kernel, alpha_h_)
                            .to_nodes());
    }
    return metric_intersect_field(parts);
}

PreForecast pre_forecast(const Model& model, const StateField& start, double t, double span, double alpha_h,
                         int smoothing, LahVariant variant, const ObsMetric* obs)
{
    PreForecast out{start, state_metric(start, alpha_h, smoothing), std::nullopt, std::nullopt, 0};
    AccumulatedMetric acc{t, out.accumulated};
    const bool use_obs = obs != nullptr && obs->enabled();
    auto hook = [&](StateField& s, double tj) {
        acc = accumulate_step(acc, state_metric(s, alpha_h, smoothing));
        const MetricField smoothed = smooth_metric(acc.field, smoothing);
        if (variant == LahVariant::flow) {
            MetricField term = use_obs ? metric_intersect(acc.field, obs->at(tj, s, smoothed)) : acc.field;
            out.flow = out.flow ? metric_intersect(nodal_on(*out.flow, s.mesh()), term) : term;
        } else if (variant == LahVariant::non_flow_obs_accum && use_obs) {
            MetricField term = obs->at(tj, s, smoothed);
            out.obs_accumulated =
                out.obs_accumulated ? metric_intersect(nodal_on(*out.obs_accumulated, s.mesh()), term) : term;
        }
        const Mesh1D next = equidistribute(smoothed, s.mesh().intervals());
        s = interp_linear(s, next);
        acc.field = acc.field.interpolate_to(next);
        if (out.flow) {
            out.flow = out.flow->interpolate_to(next);
        }
        if (out.obs_accumulated) {
            out.obs_accumulated = out.obs_accumulated->interpolate_to(next);
        }
    };
    out.steps = model.advance(out.state, t, span, hook);
    out.accumulated = acc.field;
    return out;
}

MetricField build_lah_metric(const std::vector<PreForecast>& members, const Mesh1D& eval_mesh, double t_end,
                             LahVariant variant, const ObsMetric* obs, int smoothing)
{
    if (members.empty()) {
        throw std::invalid_argument("build_lah_metric: the small ensemble is empty");
    }
    const bool use_obs = obs != nullptr && obs->enabled();
    std::vector<MetricField> terms;
    terms.reserve(members.size());
    if (variant == LahVariant::flow) {
        for (const auto& m : members) {
            terms.push_back(nodal_on(m.flow ? *m.flow : m.accumulated, eval_mesh));
        }
        return smooth_metric(metric_intersect_field(terms), smoothing);
    }

    std::vector<MetricField> accs;
    accs.reserve(members.size());
    for (const auto& m : members) {
        accs.push_back(nodal_on(m.accumulated, eval_mesh));
    }
    if (!use_obs) {
        return smooth_metric(metric_intersect_field(accs), smoothing);
    }
    const MetricField ens = smooth_metric(metric_intersect_field(accs), smoothing);
    const bool state_free = obs->network().op.kind == ObsKind::pointwise;
    std::optional<MetricField> shared;
    for (std::size_t i = 0; i < members.size(); ++i) {
        const StateField state = interp_linear(members[i].state, eval_mesh);
        MetricField o = MetricField::identity(eval_mesh);
        if (variant == LahVariant::non_flow_obs_accum && members[i].obs_accumulated) {
            o = nodal_on(*members[i].obs_accumulated, eval_mesh);
        } else if (state_free) {
            if (!shared) {
                shared = obs->at(t_end, state, ens);
            }
            o = *shared;
        } else {
            o = obs->at(t_end, state, ens);
        }
        terms.push_back(metric_intersect(accs[i], o));
    }
    return smooth_metric(metric_intersect_field(terms), smoothing);
}

TruthRun::TruthRun(const Model& model, StateField initial, double t0)
    : model_(&model), state_(std::move(initial)), t_(t0)
{
}

void TruthRun::advance(double span)
{
    model_->advance(state_, t_, span);
    t_ += span;
}

std::unique_ptr<Model> make_model(const CycleConfig& cfg)
{
    if (cfg.model == ModelKind::kse) {
        return std::make_unique<KseModel>(cfg.kse, cfg.dt_solver);
    }
    return std::make_unique<NagumoModel>(cfg.nagumo, cfg.nagumo_control);
}

ObsNetwork make_network(const CycleConfig& cfg, double lo, double hi, int components)
{
    const ObsConfig& o = cfg.obs;
    std::vector<double> base(o.count);
    for (int k = 0; k < o.count; ++k) {
        switch (o.layout) {
        case ObsLayout::midpoints:
            base[k] = lo + (hi - lo) * (k + 0.5) / o.count;
            break;
        case ObsLayout::offset:
            base[k] = o.first + k * o.spacing;
            break;
        case ObsLayout::range:
            base[k] = o.count == 1 ? 0.5 * (o.range_lo + o.range_hi)
                                   : o.range_lo + (o.range_hi - o.range_lo) * k / (o.count - 1);
            break;
        }
    }
    ObsNetwork net;
    net.op.kind = o.kind;
    net.op.kernel = GaussKernel{o.delta, 1};
    net.op.r_obs = o.r_obs;
    const int observed = o.components == 0 ? components : std::min(o.components, components);
    net.base.assign(observed, base);
    if (o.moving) {
        net.amplitude = o.amplitude;
        net.omega = o.omega;
    }
    net.variance = cfg.r;
    net.validate(lo, hi);
    return net;
}

TwinExperiment::TwinExperiment(const CycleConfig& cfg)
    : cfg_(cfg), common_(Mesh1D::uniform(0.0, 1.0, 1))
{
    cfg_.validate();
    set_thread_count(cfg_.threads);
    model_ = make_model(cfg_);
    const double lo = model_->lo();
    const double hi = model_->hi();
    const int nc = model_->components();

    const Mesh1D reference = Mesh1D::uniform(lo, hi, cfg_.intervals * cfg_.truth_refinement);
    if (cfg_.model == ModelKind::kse) {
        auto rng = generator(tag_truth);
        std::normal_distribution<double> normal(0.0, 1.0);
        StateField u0(reference, nc);
        for (int c = 0; c < nc; ++c) {
            for (int mode = 1; mode <= 8; ++mode) {
                const double a = normal(rng);
                for (std::size_t j = 0; j < reference.size(); ++j) {
                    u0.component(c)[static_cast<Eigen::Index>(j)] += a * std::sin(mode * std::numbers::pi * reference[j]);
                }
            }
        }
        truth_ = std::make_unique<TruthRun>(*model_, u0, 0.0);
        if (cfg_.truth_spinup > 0.0) {
            const double ratio = cfg_.truth_spinup / cfg_.dt_obs;
            const long blocks = std::lround(std::ceil(ratio - 1e-9));
            for (long b = 0; b < blocks; ++b) {
                truth_->advance(cfg_.dt_obs);
            }
        }
    } else {
        truth_ = std::make_unique<TruthRun>(*model_, nagumo_exact_field(reference, cfg_.truth_spinup, cfg_.nagumo),
                                            cfg_.truth_spinup);
    }
    t_start_ = truth_->time();
    t_ = t_start_;

    obs_ = std::make_unique<ObsMetric>(make_network(cfg_, lo, hi, nc), cfg_.sigma, cfg_.alpha_h, cfg_.obs_metric);

    common_ = Mesh1D::uniform(lo, hi, cfg_.intervals);
    if (cfg_.mesh == MeshMode::adaptive) {
        for (int pass = 0; pass < 2; ++pass) {
            const StateField sampled = interp_linear(truth_->state(), common_);
            common_ = equidistribute(state_metric(sampled, cfg_.alpha_h, cfg_.smoothing), cfg_.intervals);
        }
    }
    const StateField start = interp_linear(truth_->state(), common_);
    members_.reserve(cfg_.ne);
    for (int i = 0; i < cfg_.ne; ++i) {
        StateField m = start;
        auto rng = generator(tag_init, static_cast<std::uint64_t>(i));
        std::normal_distribution<double> normal(0.0, std::sqrt(cfg_.p0));
        for (int c = 0; c < nc; ++c) {
            auto& v = m.component(c);
            for (Eigen::Index j = 1; j + 1 < v.size(); ++j) {
                v[j] += normal(rng);
            }
        }
        members_.push_back(std::move(m));
    }
}

std::mt19937_64 TwinExperiment::generator(std::uint64_t tag, std::uint64_t member) const
{
    std::seed_seq seq{static_cast<std::uint32_t>(cfg_.seed), static_cast<std::uint32_t>(cfg_.seed >> 32),
                      static_cast<std::uint32_t>(cycle_), static_cast<std::uint32_t>(member),
                      static_cast<std::uint32_t>(tag)};
    return std::mt19937_64(seq);
}

void TwinExperiment::add_model_noise(std::vector<StateField>& members) const
{
    if (cfg_.q == 0.0) {
        return;
    }
    for (std::size_t i = 0; i < members.size(); ++i) {
        auto rng = generator(tag_noise, i);
        std::normal_distribution<double> normal(0.0, std::sqrt(cfg_.q));
        for (int c = 0; c < members[i].components(); ++c) {
            auto& v = members[i].component(c);
            for (Eigen::Index j = 1; j + 1 < v.size(); ++j) {
                v[j] += normal(rng);
            }
        }
    }
}

ObservationSet TwinExperiment::observe(double t) const
{
    auto rng = generator(tag_obs);
    return synthesize_observations(truth_->state(), obs_->network(), t, rng());
}

void TwinExperiment::finish_record(CycleRecord& rec, const EnsembleState& forecast,
                                   const EnsembleState& analysis) const
{
    const StateField truth = interp_linear(truth_->state(), analysis.mesh());
    const StateField fmean = forecast.mean();
    const StateField amean = analysis.mean();
    rec.mesh = analysis.mesh();
    for (int c = 0; c < analysis.components(); ++c) {
        rec.rmse.push_back(rmse(amean.component(c), truth.component(c)));
        rec.forecast_rmse.push_back(rmse(fmean.component(c), truth.component(c)));
        double var = 0.0;
        for (int i = 0; i < analysis.size(); ++i) {
            var += (analysis[i].component(c) - amean.component(c)).squaredNorm();
        }
        var /= static_cast<double>((analysis.size() - 1) * amean.component(c).size());
        rec.spread.push_back(std::sqrt(var));
    }
}

namespace {

Eigen::VectorXd analysis_radii(const std::vector<StateField>& members, double alpha_h, int smoothing, double r0)
{
    std::vector<MetricField> metrics(members.size(), MetricField::identity(members.front().mesh()));
    parallel_for(members.size(), [&](std::size_t i) { metrics[i] = state_metric(members[i], alpha_h, smoothing); });
    return localization_radii(smooth_metric(metric_intersect_field(metrics), smoothing), r0);
}

} // namespace

CycleRecord TwinExperiment::step()
{
    if (done()) {
        throw std::logic_error("TwinExperiment: all cycles already run");
    }
    CycleRecord rec = cfg_.method == Method::B || cfg_.mesh == MeshMode::uniform ? step_method_b() : step_method_a();
    ++cycle_;
    t_ = t_start_ + cycle_ * cfg_.dt_obs;
    return rec;
}

CycleRecord TwinExperiment::step_method_b()
{
    CycleRecord rec;
    rec.cycle = cycle_;
    const double t = t_;
    const double tn = t + cfg_.dt_obs;
    rec.time = tn;
    Stopwatch clock;

    Mesh1D target = common_;
    if (cfg_.mesh == MeshMode::adaptive) {
        std::vector<StateField> starts;
        if (cfg_.nse == 1) {
            starts.push_back(EnsembleState(members_).mean());
        } else {
            std::vector<int> all(cfg_.ne);
            std::iota(all.begin(), all.end(), 0);
            std::vector<int> chosen;
            auto rng = generator(tag_subset);
            std::sample(all.begin(), all.end(), std::back_inserter(chosen), cfg_.nse, rng);
            for (int i : chosen) {
                starts.push_back(members_[i]);
            }
        }
        std::vector<std::optional<PreForecast>> pre(starts.size());
        parallel_for(starts.size(), [&](std::size_t i) {
            try {
                pre[i] = pre_forecast(*model_, starts[i], t, cfg_.dt_obs, cfg_.alpha_h, cfg_.smoothing,
                                      cfg_.variant, obs_.get());
            } catch (const SolverError& e) {
                std::ostringstream os;
                os << "cycle " << cycle_ << ": pre-forecast of small-ensemble member " << i << " failed: " << e.what();
                throw SolverError(os.str());
            }
        });
        std::vector<PreForecast> done_pre;
        for (auto& p : pre) {
            rec.pre_steps.push_back(p->steps);
            done_pre.push_back(std::move(*p));
        }
        rec.timings.pre_forecast = clock.lap();

        const MetricField lah = build_lah_metric(done_pre, common_, tn, cfg_.variant, obs_.get(), cfg_.smoothing);
        target = equidistribute(lah, cfg_.intervals);
        rec.timings.mesh = clock.lap();

        for (auto& m : members_) {
            m = interp_linear(m, target);
            ++rec.interpolations;
        }
        rec.timings.interpolation = clock.lap();
    }
    for (const auto& m : members_) {
        if (!m.mesh().same_as(target)) {
            throw std::logic_error("look-ahead mesh is not shared by every member");
        }
    }

    rec.steps.assign(members_.size(), 0);
    parallel_for(members_.size(), [&](std::size_t i) {
        try {
            rec.steps[i] = model_->advance(members_[i], t, cfg_.dt_obs);
        } catch (const SolverError& e) {
            std::ostringstream os;
            os << "cycle " << cycle_ << ": forecast of member " << i << " failed: " << e.what();
            throw SolverError(os.str());
        }
    });
    add_model_noise(members_);
    rec.timings.forecast = clock.lap();

    truth_->advance(cfg_.dt_obs);
    const ObservationSet obs = observe(tn);
    rec.timings.truth = clock.lap();

    const EnsembleState forecast(members_);
    const Eigen::VectorXd radii = analysis_radii(members_, cfg_.localization_alpha(), cfg_.smoothing, cfg_.r0);
    AnalysisConfig acfg{cfg_.rho, cfg_.r0, cfg_.coupling, cfg_.perturbed_obs, generator(tag_perturb)()};
    const EnsembleState analysis = local_analysis(forecast, obs, radii, acfg, &rec.analysis);
    rec.timings.analysis = clock.lap();

    members_ = analysis.members();
    common_ = target;
    finish_record(rec, forecast, analysis);
    return rec;
}

CycleRecord TwinExperiment::step_method_a()
{
    CycleRecord rec;
    rec.cycle = cycle_;
    const double t = t_;
    const double tn = t + cfg_.dt_obs;
    rec.time = tn;
    Stopwatch clock;

    rec.steps.assign(members_.size(), 0);
    std::vector<long> remeshes(members_.size(), 0);
    parallel_for(members_.size(), [&](std::size_t i) {
        long count = 0;
        auto hook = [&](StateField& s, double) {
            if (++count % cfg_.remesh_steps == 0) {
                s = interp_linear(s, equidistribute(state_metric(s, cfg_.alpha_h, cfg_.smoothing),
                                                    s.mesh().intervals()));
                ++remeshes[i];
            }
        };
        try {
            rec.steps[i] = model_->advance(members_[i], t, cfg_.dt_obs, hook);
        } catch (const SolverError& e) {
            std::ostringstream os;
            os << "cycle " << cycle_ << ": forecast of member " << i << " failed: " << e.what();
            throw SolverError(os.str());
        }
    });
    add_model_noise(members_);
    for (long r : remeshes) {
        rec.interpolations += r;
    }
    rec.timings.forecast = clock.lap();

    truth_->advance(cfg_.dt_obs);
    const ObservationSet obs = observe(tn);
    rec.timings.truth = clock.lap();

    std::vector<MetricField> metrics(members_.size(), MetricField::identity(common_));
    std::vector<StateField> on_eval(members_.size(), StateField(common_, model_->components()));
    parallel_for(members_.size(), [&](std::size_t i) {
        metrics[i] = nodal_on(state_metric(members_[i], cfg_.alpha_h, cfg_.smoothing), common_);
        on_eval[i] = interp_linear(members_[i], common_);
    });
    const MetricField ens = smooth_metric(metric_intersect_field(metrics), cfg_.smoothing);
    const MetricField combined =
        smooth_metric(metric_intersect(ens, obs_->at(tn, EnsembleState(on_eval).mean(), ens)), cfg_.smoothing);
    const Mesh1D target = equidistribute(combined, cfg_.intervals);
    rec.timings.mesh = clock.lap();

    std::vector<Mesh1D> own;
    std::vector<StateField> moved;
    own.reserve(members_.size());
    moved.reserve(members_.size());
    for (const auto& m : members_) {
        own.push_back(m.mesh());
        moved.push_back(interp_linear(m, target));
        ++rec.interpolations;
    }
    rec.timings.interpolation = clock.lap();

    const EnsembleState forecast(moved);
    const Eigen::VectorXd radii = analysis_radii(moved, cfg_.localization_alpha(), cfg_.smoothing, cfg_.r0);
    AnalysisConfig acfg{cfg_.rho, cfg_.r0, cfg_.coupling, cfg_.perturbed_obs, generator(tag_perturb)()};
    const EnsembleState analysis = local_analysis(forecast, obs, radii, acfg, &rec.analysis);
    rec.timings.analysis = clock.lap();

    for (std::size_t i = 0; i < members_.size(); ++i) {
        members_[i] = interp_linear(analysis[static_cast<int>(i)], own[i]);
        ++rec.interpolations;
    }
    rec.timings.interpolation += clock.lap();
    common_ = target;
    finish_record(rec, forecast, analysis);
    return rec;
}

std::vector<CycleRecord> TwinExperiment::run()
{
    std::vector<CycleRecord> out;
    out.reserve(static_cast<std::size_t>(cfg_.cycles - cycle_));
    while (!done()) {
        out.push_back(step());
    }
    return out;
}

double rmse(const Eigen::VectorXd& a, const Eigen::VectorXd& b)
{
    if (a.size() != b.size() || a.size() == 0) {
        throw std::invalid_argument("rmse: vectors must have the same nonzero length");
    }
    return std::sqrt((a - b).squaredNorm() / static_cast<double>(a.size()));
}

std::vector<double> rmse_series(const std::vector<double>& times, const std::vector<double>& values, double window)
{
    if (!(window > 0.0)) {
        throw std::invalid_argument("rmse_series: window must be positive");
    }
    if (times.size() != values.size()) {
        throw std::invalid_argument("rmse_series: times and values differ in length");
    }
    const double half = 0.5 * window * (1.0 + 1e-12);
    std::vector<double> out(values.size());
    std::size_t lo = 0;
    std::size_t hi = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        while (hi < values.size() && times[hi] <= times[i] + half) {
            ++hi;
        }
        while (times[lo] < times[i] - half) {
            ++lo;
        }
        double s = 0.0;
        for (std::size_t j = lo; j < hi; ++j) {
            s += values[j];
        }
        out[i] = s / static_cast<double>(hi - lo);
    }
    return out;
}

std::vector<std::vector<double>> rmse_series(const std::vector<CycleRecord>& records, double window)
{
    std::vector<std::vector<double>> out;
    if (records.empty()) {
        return out;
    }
    std::vector<double> times;
    for (const auto& r : records) {
        times.push_back(r.time);
    }
    for (std::size_t c = 0; c < records.front().rmse.size(); ++c) {
        std::vector<double> v;
        for (const auto& r : records) {
            v.push_back(r.rmse[c]);
        }
        out.push_back(rmse_series(times, v, window));
    }
    return out;
}

std::vector<double> mean_rmse(const std::vector<CycleRecord>& records, int first_cycle)
{
    std::vector<double> sum;
    long n = 0;
    for (const auto& r : records) {
        if (r.cycle < first_cycle) {
            continue;
        }
        sum.resize(r.rmse.size(), 0.0);
        for (std::size_t c = 0; c < r.rmse.size(); ++c) {
            sum[c] += r.rmse[c];
        }
        ++n;
    }
    for (double& s : sum) {
        s /= static_cast<double>(std::max<long>(n, 1));
    }
    return sum;
}

} // namespace lahda
