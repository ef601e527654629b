#include "lahda/letkf.hpp"
#include "lahda/parallel.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace lahda;

namespace {

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c, double scale = 1.0)
{
    std::normal_distribution<double> n(0.0, scale);
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
        for (Eigen::Index j = 0; j < c; ++j) {
            m(i, j) = n(rng);
        }
    }
    return m;
}

EnsembleState random_ensemble(std::mt19937_64& rng, const Mesh1D& mesh, int ne, int nc)
{
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<StateField> members;
    for (int i = 0; i < ne; ++i) {
        StateField s(mesh, nc);
        for (int c = 0; c < nc; ++c) {
            for (std::size_t j = 0; j < mesh.size(); ++j) {
                s.component(c)[j] = std::sin(6.0 * mesh[j] + c) + 0.3 * n(rng);
            }
        }
        members.push_back(std::move(s));
    }
    return EnsembleState(std::move(members));
}

ObservationSet point_obs(std::vector<std::vector<double>> locations, const Eigen::VectorXd& values, double r)
{
    ObservationSet obs;
    obs.locations = std::move(locations);
    obs.values = values;
    obs.r_diag = Eigen::VectorXd::Constant(values.size(), r);
    return obs;
}

double max_diff(const EnsembleState& a, const EnsembleState& b)
{
    double d = 0.0;
    for (int i = 0; i < a.size(); ++i) {
        for (int c = 0; c < a.components(); ++c) {
            d = std::max(d, (a[i].component(c) - b[i].component(c)).lpNorm<Eigen::Infinity>());
        }
    }
    return d;
}

} // namespace

TEST_CASE("forecast_stats")
{
    const Mesh1D m = Mesh1D::uniform(0.0, 1.0, 1);
    StateField a(m, 1), b(m, 1);
    a.component(0) << 0.0, 1.0;
    b.component(0) << 2.0, 1.0;
    const ForecastStats s = forecast_stats(EnsembleState({a, b}));
    CHECK(s.mean[0] == 1.0);
    CHECK(s.X(0, 0) == -1.0);
    CHECK(s.X(0, 1) == 1.0);
    CHECK((s.X * s.X.transpose())(0, 0) == doctest::Approx(2.0));
    CHECK(s.X.row(1).isZero(0.0));
    CHECK_THROWS(forecast_stats(EnsembleState({a})));

    std::mt19937_64 rng(1);
    const EnsembleState e = random_ensemble(rng, Mesh1D::uniform(0.0, 1.0, 9), 7, 2);
    const ForecastStats fs = forecast_stats(e);
    CHECK(fs.X.rowwise().sum().lpNorm<Eigen::Infinity>() < 1e-13);
}

TEST_CASE("etkf_weights agrees with the observation-space form")
{
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<int> ne_d(2, 10), ny_d(1, 50);
    std::uniform_real_distribution<double> r_d(0.01, 2.0);
    for (int trial = 0; trial < 100; ++trial) {
        const int ne = ne_d(rng);
        const int ny = ny_d(rng);
        const Eigen::MatrixXd y = random_matrix(rng, ny, ne);
        Eigen::VectorXd r(ny);
        for (int j = 0; j < ny; ++j) {
            r[j] = r_d(rng);
        }
        const Eigen::VectorXd d = random_matrix(rng, ny, 1).col(0);
        const Eigen::VectorXd w = etkf_weights(y, r, d);
        Eigen::MatrixXd s = y * y.transpose();
        s.diagonal() += r;
        const Eigen::VectorXd w2 = y.transpose() * s.ldlt().solve(d);
        CHECK((w - w2).norm() <= 1e-10 * std::max(1.0, w2.norm()));
    }
    const Eigen::MatrixXd y = random_matrix(rng, 4, 3);
    const Eigen::VectorXd r = Eigen::VectorXd::Ones(4);
    CHECK(etkf_weights(y, r, Eigen::VectorXd(Eigen::VectorXd::Zero(4))).isZero(0.0));
    CHECK(etkf_weights(Eigen::MatrixXd(Eigen::MatrixXd::Zero(4, 3)), r, Eigen::VectorXd(Eigen::VectorXd::Ones(4))).isZero(0.0));
    const Eigen::VectorXd d = Eigen::VectorXd::LinSpaced(4, -1.0, 2.0);
    CHECK((etkf_weights(y, r, Eigen::VectorXd(2.0 * d)) - 2.0 * etkf_weights(y, r, d)).norm() < 1e-14);
    CHECK_THROWS(etkf_weights(y, Eigen::VectorXd::Zero(4), d));
}

TEST_CASE("localization_radii")
{
    const Mesh1D m = Mesh1D::uniform(0.0, 1.0, 4);
    const std::vector<double> constant(5, 3.0);
    const Eigen::VectorXd r1 = localization_radii(MetricField::scalar(m, constant), 0.2);
    CHECK((r1.array() == 0.2).all());

    // d_min = 1, d_max = 3 so c = 2
    const std::vector<double> v{1.0, 2.0, 3.0, 1.5, 1.0};
    const Eigen::VectorXd r2 = localization_radii(MetricField::scalar(m, v), 1.0);
    CHECK(r2[0] == 1.0);
    CHECK(r2[1] == doctest::Approx(std::exp(-0.5)));
    CHECK(r2[2] == doctest::Approx(0.6065).epsilon(1e-4));
    CHECK(r2[3] == doctest::Approx(std::exp(-0.25)));
    CHECK((r2.array() >= std::exp(-0.5) - 1e-15).all());
    CHECK((r2.array() <= 1.0).all());
    CHECK_THROWS(localization_radii(MetricField::scalar(m, v), 0.0));
}

TEST_CASE("local_analysis scalar Kalman update")
{
    const Mesh1D m = Mesh1D::uniform(0.0, 1.0, 1);
    const std::vector<double> vals{1.0, 2.5, 0.2, 1.7};
    std::vector<StateField> members;
    for (double v : vals) {
        StateField s(m, 1);
        s.component(0) << v, 0.0;
        members.push_back(s);
    }
    const EnsembleState ens(members);
    const ObservationSet obs = point_obs({{0.0}}, Eigen::VectorXd::Constant(1, 1.9), 0.3);
    AnalysisConfig cfg;
    cfg.rho = 1.2;
    const Eigen::VectorXd radii = Eigen::VectorXd::Constant(2, 1e-3);
    AnalysisReport rep;
    const EnsembleState out = local_analysis(ens, obs, radii, cfg, &rep);

    double mean = 0.0;
    for (double v : vals) {
        mean += v;
    }
    mean /= 4.0;
    double var = 0.0;
    for (double v : vals) {
        var += (v - mean) * (v - mean);
    }
    const double p = cfg.rho * var / 3.0;
    for (int i = 0; i < 4; ++i) {
        const double expect = vals[i] + p / (p + 0.3) * (1.9 - vals[i]);
        CHECK(out[i].component(0)[0] == doctest::Approx(expect).epsilon(1e-10));
        CHECK(out[i].component(0)[1] == 0.0);
    }
    CHECK(rep.empty_updates == 1);
    CHECK(rep.total_updates == 2);
}

TEST_CASE("local_analysis with infinite radius equals the global ETKF")
{
    std::mt19937_64 rng(4);
    const Mesh1D m = Mesh1D::uniform(0.0, 1.0, 12);
    const int ne = 6;
    const EnsembleState ens = random_ensemble(rng, m, ne, 2);
    const std::vector<std::vector<double>> locs{{0.05, 0.31, 0.5, 0.93}, {0.2, 0.66}};
    ObservationSet obs = point_obs(locs, random_matrix(rng, 6, 1), 0.05);
    AnalysisConfig cfg;
    cfg.rho = 1.1;
    const Eigen::VectorXd radii = Eigen::VectorXd::Constant(13, std::numeric_limits<double>::infinity());
    const EnsembleState out = local_analysis(ens, obs, radii, cfg);

    // dense global computation
    const Eigen::Index n = 2 * 13;
    Eigen::MatrixXd u(n, ne), hu(6, ne);
    for (int i = 0; i < ne; ++i) {
        u.col(i) = ens[i].stacked();
        hu.col(i) = obs.apply(ens[i]);
    }
    const Eigen::VectorXd mean = u.rowwise().mean();
    const Eigen::VectorXd hmean = hu.rowwise().mean();
    const Eigen::MatrixXd x = std::sqrt(cfg.rho / (ne - 1)) * (u.colwise() - mean);
    const Eigen::MatrixXd y = std::sqrt(cfg.rho / (ne - 1)) * (hu.colwise() - hmean);
    Eigen::MatrixXd s = y * y.transpose();
    s.diagonal() += obs.r_diag;
    const Eigen::MatrixXd gain = x * y.transpose() * s.inverse();
    for (int i = 0; i < ne; ++i) {
        const Eigen::VectorXd expect = u.col(i) + gain * (obs.values - hu.col(i));
        CHECK((out[i].stacked() - expect).lpNorm<Eigen::Infinity>() < 1e-8);
    }
}

TEST_CASE("local_analysis limits and symmetries")
{
    std::mt19937_64 rng(5);
    const Mesh1D m = Mesh1D::uniform(0.0, 1.0, 40);
    const int ne = 8;
    const EnsembleState ens = random_ensemble(rng, m, ne, 2);
    std::vector<double> l0, l1;
    for (int k = 0; k < 20; ++k) {
        l0.push_back((k + 0.5) / 20.0);
        l1.push_back((k + 0.25) / 20.0);
    }
    ObservationSet obs = point_obs({l0, l1}, random_matrix(rng, 40, 1), 0.01);
    const Eigen::VectorXd radii = Eigen::VectorXd::Constant(41, 0.08);
    const AnalysisConfig cfg;

    SUBCASE("huge R leaves the forecast unchanged")
    {
        ObservationSet loose = obs;
        loose.r_diag *= 1e12;
        const EnsembleState out = local_analysis(ens, loose, radii, cfg);
        CHECK(max_diff(out, ens) <= 1e-6 * 2.0);
    }
    SUBCASE("permuting members permutes the analysis")
    {
        std::vector<StateField> perm(ens.members().rbegin(), ens.members().rend());
        const EnsembleState a = local_analysis(ens, obs, radii, cfg);
        const EnsembleState b = local_analysis(EnsembleState(perm), obs, radii, cfg);
        for (int i = 0; i < ne; ++i) {
            for (int c = 0; c < 2; ++c) {
                CHECK((a[i].component(c) - b[ne - 1 - i].component(c)).lpNorm<Eigen::Infinity>() < 1e-12);
            }
        }
    }
    SUBCASE("thread count does not change the result")
    {
        set_thread_count(1);
        const EnsembleState a = local_analysis(ens, obs, radii, cfg);
        set_thread_count(3);
        const EnsembleState b = local_analysis(ens, obs, radii, cfg);
        set_thread_count(1);
        CHECK(max_diff(a, b) == 0.0);
    }
    SUBCASE("perturbing a far observation leaves nodes out of reach unchanged")
    {
        const EnsembleState a = local_analysis(ens, obs, radii, cfg);
        ObservationSet moved = obs;
        moved.values[0] += 10.0; // component 0 at x = 0.025
        const EnsembleState b = local_analysis(ens, moved, radii, cfg);
        for (std::size_t j = 0; j < m.size(); ++j) {
            if (std::abs(m[j] - 0.025) > 0.08) {
                for (int i = 0; i < ne; ++i) {
                    CHECK(a[i].component(0)[j] == b[i].component(0)[j]);
                    CHECK(a[i].component(1)[j] == b[i].component(1)[j]);
                }
            }
        }
        CHECK(max_diff(a, b) > 1e-3);
    }
}

TEST_CASE("local_analysis zero innovation")
{
    const Mesh1D m = Mesh1D::uniform(0.0, 1.0, 10);
    std::vector<StateField> members;
    for (int i = 0; i < 5; ++i) {
        StateField s(m, 1);
        for (std::size_t j = 0; j < m.size(); ++j) {
            s.component(0)[j] = m[j] < 0.5 ? 1.0 : 1.0 + 0.1 * i * j;
        }
        members.push_back(s);
    }
    const EnsembleState ens(members);
    const ObservationSet obs = point_obs({{0.1, 0.2, 0.3}}, Eigen::VectorXd::Ones(3), 0.01);
    const EnsembleState out = local_analysis(ens, obs, Eigen::VectorXd::Constant(11, 0.5), AnalysisConfig{});
    CHECK(max_diff(out, ens) == 0.0);
}

TEST_CASE("coupled and uncoupled agree without cross-component covariance")
{
    const Mesh1D m = Mesh1D::uniform(0.0, 1.0, 30);
    // sign patterns with zero sum and zero mutual inner product
    const double a[4] = {1, 1, -1, -1};
    const double b[4] = {1, -1, 1, -1};
    std::vector<StateField> members;
    for (int i = 0; i < 4; ++i) {
        StateField s(m, 2);
        for (std::size_t j = 0; j < m.size(); ++j) {
            s.component(0)[j] = std::sin(3.0 * m[j]) + 0.5 * a[i] * std::cos(2.0 * m[j]);
            s.component(1)[j] = m[j] + 0.25 * b[i] * (1.0 + m[j]);
        }
        members.push_back(s);
    }
    const EnsembleState ens(members);
    std::mt19937_64 rng(6);
    std::vector<double> l0, l1;
    for (int k = 0; k < 10; ++k) {
        l0.push_back((k + 0.3) / 10.0);
        l1.push_back((k + 0.7) / 10.0);
    }
    const ObservationSet obs = point_obs({l0, l1}, random_matrix(rng, 20, 1), 0.02);
    const Eigen::VectorXd radii = Eigen::VectorXd::Constant(31, 0.15);
    AnalysisConfig coupled;
    AnalysisConfig uncoupled;
    uncoupled.coupling = Coupling::uncoupled;
    const EnsembleState x = local_analysis(ens, obs, radii, coupled);
    const EnsembleState y = local_analysis(ens, obs, radii, uncoupled);
    CHECK(max_diff(x, y) < 1e-12);
}
