#include "lahda/cycle.hpp"
#include "lahda/parallel.hpp"
#include "lahda/twin.hpp"

#include <doctest.h>

#include <cmath>

using namespace lahda;

namespace {

CycleConfig small_kse()
{
    CycleConfig cfg;
    cfg.intervals = 100;
    cfg.ne = 4;
    cfg.nse = 2;
    cfg.cycles = 3;
    cfg.spinup_cycles = 1;
    cfg.obs.count = 50;
    cfg.truth_refinement = 2;
    cfg.truth_spinup = 1e-3;
    cfg.seed = 11;
    return cfg;
}

void check_same(const std::vector<CycleRecord>& a, const std::vector<CycleRecord>& b)
{
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].rmse == b[i].rmse);
        CHECK(a[i].spread == b[i].spread);
        CHECK(a[i].steps == b[i].steps);
        CHECK(a[i].mesh == b[i].mesh);
    }
}

} // namespace

TEST_CASE("accumulate_step")
{
    const Mesh1D m = Mesh1D::uniform(0.0, 1.0, 4);
    const MetricField a = MetricField::scalar(m, std::vector<double>{1.0, 3.0, 2.0, 1.0, 5.0});
    const MetricField b = MetricField::scalar(m, std::vector<double>{2.0, 1.0, 2.0, 4.0, 1.0});
    const AccumulatedMetric acc{0.5, a};
    const AccumulatedMetric once = accumulate_step(acc, b);
    const AccumulatedMetric twice = accumulate_step(once, b);
    CHECK(once.t0 == 0.5);
    const double expect[] = {2.0, 3.0, 2.0, 4.0, 5.0};
    for (std::size_t i = 0; i < m.size(); ++i) {
        CHECK(once.field[i](0, 0) == doctest::Approx(expect[i]));
        CHECK(twice.field[i](0, 0) == doctest::Approx(expect[i]));
    }
    const AccumulatedMetric with_identity = accumulate_step(acc, MetricField::identity(m));
    for (std::size_t i = 0; i < m.size(); ++i) {
        CHECK(with_identity.field[i](0, 0) == doctest::Approx(a[i](0, 0)));
    }

    // accumulated field on a different mesh is carried onto the new one
    const Mesh1D fine = Mesh1D::uniform(0.0, 1.0, 8);
    const AccumulatedMetric moved = accumulate_step(acc, MetricField::identity(fine));
    CHECK(moved.field.mesh() == fine);
    CHECK(moved.field[1](0, 0) == doctest::Approx(2.0));
}

TEST_CASE("build_lah_metric without observations intersects the members")
{
    const Mesh1D m = Mesh1D::uniform(0.0, 1.0, 4);
    PreForecast a{StateField(m, 1), MetricField::scalar(m, std::vector<double>{1.0, 4.0, 1.0, 1.0, 1.0}), {}, {}, 3};
    PreForecast b{StateField(m, 1), MetricField::scalar(m, std::vector<double>{1.0, 1.0, 1.0, 9.0, 1.0}), {}, {}, 3};
    const MetricField one = build_lah_metric({a}, m, 0.0, LahVariant::non_flow, nullptr, 0);
    CHECK(one[1](0, 0) == doctest::Approx(4.0));
    const MetricField both = build_lah_metric({a, b}, m, 0.0, LahVariant::non_flow, nullptr, 0);
    CHECK(both[1](0, 0) == doctest::Approx(4.0));
    CHECK(both[3](0, 0) == doctest::Approx(9.0));
    CHECK(both[2](0, 0) == doctest::Approx(1.0));

    ObsNetwork net;
    net.base = {{0.5}};
    const ObsMetric disabled(net, 0.1, 1.0, false);
    const MetricField same = build_lah_metric({a, b}, m, 0.0, LahVariant::non_flow, &disabled, 0);
    for (std::size_t i = 0; i < m.size(); ++i) {
        CHECK(same[i](0, 0) == doctest::Approx(both[i](0, 0)));
    }
    // the observation metric only ever refines
    const ObsMetric enabled(net, 0.1, 1.0, true);
    const MetricField refined = build_lah_metric({a, b}, m, 0.0, LahVariant::non_flow, &enabled, 0);
    for (std::size_t i = 0; i < m.size(); ++i) {
        CHECK(refined[i](0, 0) >= both[i](0, 0) - 1e-12);
    }
    CHECK(refined[2](0, 0) > 1.0);
    CHECK_THROWS(build_lah_metric({}, m, 0.0, LahVariant::non_flow, nullptr, 0));
}

TEST_CASE("rmse and rmse_series")
{
    CHECK(rmse(Eigen::Vector2d(1.0, 2.0), Eigen::Vector2d(1.0, 0.0)) == doctest::Approx(std::sqrt(2.0)));
    CHECK_THROWS(rmse(Eigen::Vector2d(1.0, 2.0), Eigen::Vector3d(1.0, 0.0, 0.0)));

    std::vector<double> t, v;
    for (int i = 0; i < 20; ++i) {
        t.push_back(1e-4 * i);
        v.push_back(i % 2 == 0 ? 1.0 : 3.0);
    }
    const auto flat = rmse_series(t, std::vector<double>(20, 0.7), 5e-4);
    for (double x : flat) {
        CHECK(x == doctest::Approx(0.7));
    }
    // a window narrower than the spacing returns the raw values
    CHECK(rmse_series(t, v, 1e-5) == v);
    // an odd window of width 2Δt averages three neighbours of a sawtooth
    const auto saw = rmse_series(t, v, 2e-4);
    CHECK(saw[0] == doctest::Approx(2.0));
    CHECK(saw[5] == doctest::Approx((1.0 + 3.0 + 1.0) / 3.0));
    CHECK(saw[6] == doctest::Approx((3.0 + 1.0 + 3.0) / 3.0));
    CHECK_THROWS(rmse_series(t, v, 0.0));
}

TEST_CASE("mean_rmse skips spin-up")
{
    std::vector<CycleRecord> recs(4);
    for (int i = 0; i < 4; ++i) {
        recs[i].cycle = i;
        recs[i].rmse = {static_cast<double>(i), 1.0};
    }
    const auto m = mean_rmse(recs, 2);
    CHECK(m[0] == doctest::Approx(2.5));
    CHECK(m[1] == doctest::Approx(1.0));
}

TEST_CASE("twin experiment is deterministic")
{
    const CycleConfig cfg = small_kse();
    set_thread_count(1);
    const auto a = TwinExperiment(cfg).run();
    const auto b = TwinExperiment(cfg).run();
    check_same(a, b);
    CHECK(a.size() == 3);
    for (const auto& r : a) {
        CHECK(r.rmse.size() == 2);
        CHECK(std::isfinite(r.rmse[0]));
        CHECK(r.mesh.intervals() == 100);
        // Method B moves each member once onto the look-ahead mesh
        CHECK(r.interpolations == cfg.ne);
        CHECK(r.pre_steps.size() == static_cast<std::size_t>(cfg.nse));
        CHECK(r.steps.size() == static_cast<std::size_t>(cfg.ne));
    }
    CHECK(a[2].time == doctest::Approx(3.0 * cfg.dt_obs + cfg.truth_spinup));

    set_thread_count(3);
    const auto c = TwinExperiment(cfg).run();
    set_thread_count(1);
    check_same(a, c);
}

TEST_CASE("twin experiment variants run")
{
    CycleConfig cfg = small_kse();
    cfg.cycles = 2;
    SUBCASE("Method A")
    {
        cfg.method = Method::A;
        const auto recs = TwinExperiment(cfg).run();
        CHECK(recs.size() == 2);
        CHECK(std::isfinite(recs.back().rmse[1]));
    }
    SUBCASE("uniform mesh")
    {
        cfg.mesh = MeshMode::uniform;
        const auto recs = TwinExperiment(cfg).run();
        CHECK(recs.back().mesh == Mesh1D::uniform(0.0, 1.0, cfg.intervals));
        CHECK(recs.back().interpolations == 0);
    }
    SUBCASE("flow variant with moving nonlocal observations")
    {
        cfg.variant = LahVariant::flow;
        cfg.obs.kind = ObsKind::nonlocal;
        cfg.obs.moving = true;
        cfg.obs.layout = ObsLayout::range;
        const auto recs = TwinExperiment(cfg).run();
        CHECK(std::isfinite(recs.back().rmse[0]));
    }
}
