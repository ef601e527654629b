#include "lahda/mesh_ops.hpp"
#include "lahda/observations.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace lahda;

TEST_CASE("GaussKernel integrates to one")
{
    const GaussKernel g{0.01, 1};
    double s = 0.0;
    const int n = 200000;
    const double h = 0.4 / n;
    for (int i = 0; i < n; ++i) {
        s += g(-0.2 + (i + 0.5) * h) * h;
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("obs_pointwise")
{
    const Mesh1D m({0.0, 0.1, 0.35, 0.6, 1.0});
    std::vector<double> u;
    for (double x : m.nodes()) {
        u.push_back(2.0 * x + 1.0);
    }
    const std::vector<double> at_nodes{0.1, 0.6};
    const Eigen::VectorXd v = obs_pointwise(u, m, at_nodes);
    CHECK(v[0] == u[1]);
    CHECK(v[1] == u[3]);
    const std::vector<double> locs{0.0, 0.05, 0.47, 0.99, 1.0};
    const Eigen::VectorXd w = obs_pointwise(u, m, locs);
    for (std::size_t i = 0; i < locs.size(); ++i) {
        CHECK(w[i] == doctest::Approx(2.0 * locs[i] + 1.0));
    }
    const Mesh1D uni = Mesh1D::uniform(0.0, 1.0, 10);
    std::vector<double> q;
    for (double x : uni.nodes()) {
        q.push_back(x * x);
    }
    const std::vector<double> mid{0.45};
    CHECK(obs_pointwise(q, uni, mid)[0] - 0.45 * 0.45 == doctest::Approx(0.01 / 4.0));
    const std::vector<double> out{1.2};
    CHECK_THROWS_AS(obs_pointwise(q, uni, out), std::out_of_range);
}

TEST_CASE("obs_nonlocal")
{
    const Mesh1D fine = Mesh1D::uniform(0.0, 1.0, 20000);
    const GaussKernel g{1e-3, 1};
    const std::vector<double> locs{0.3, 0.5123};
    std::vector<double> zero(fine.size(), 0.0), one(fine.size(), 1.0);
    const Eigen::VectorXd z = obs_nonlocal(zero, fine, locs, g, 2e-2);
    CHECK(z.isZero(0.0));
    const Eigen::VectorXd o = obs_nonlocal(one, fine, locs, g, 2e-2);
    CHECK(o[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(o[1] == doctest::Approx(1.0).epsilon(1e-6));

    // compare against a fine quadrature of the same truncated kernel integral
    auto f = [](double x) { return std::sin(3.0 * x) + x * x; };
    std::vector<double> u;
    for (double x : fine.nodes()) {
        u.push_back(f(x));
    }
    const Eigen::VectorXd h = obs_nonlocal(u, fine, locs, g, 2e-2);
    for (std::size_t i = 0; i < locs.size(); ++i) {
        const int n = 1000000;
        const double a = locs[i] - 2e-2;
        const double dx = 4e-2 / n;
        double s = 0.0;
        for (int k = 0; k < n; ++k) {
            const double x = a + (k + 0.5) * dx;
            s += g(locs[i] - x) * f(x) * dx;
        }
        CHECK(h[static_cast<Eigen::Index>(i)] == doctest::Approx(s).epsilon(1e-6));
    }

    // narrowing the kernel approaches the point value
    const Mesh1D m = Mesh1D::uniform(0.0, 1.0, 200000);
    std::vector<double> um;
    for (double x : m.nodes()) {
        um.push_back(f(x));
    }
    const std::vector<double> x0{0.4};
    double prev = 1.0;
    for (double delta : {4e-3, 2e-3, 1e-3}) {
        const GaussKernel k{delta, 1};
        const double err = std::abs(obs_nonlocal(um, m, x0, k, 20.0 * delta)[0] - f(0.4));
        // Taylor: δ²·|f″|/2
        CHECK(err <= delta * delta * 10.0);
        CHECK(err < prev);
        prev = err;
    }
}

TEST_CASE("obs_nonlocal linearity and locality")
{
    const Mesh1D m = Mesh1D::uniform(0.0, 1.0, 1000);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<double> a(m.size()), b(m.size()), c(m.size());
    for (std::size_t j = 0; j < m.size(); ++j) {
        a[j] = n(rng);
        b[j] = n(rng);
        c[j] = 2.0 * a[j] - 0.5 * b[j];
    }
    const GaussKernel g{1e-3, 1};
    const std::vector<double> locs{0.2, 0.5, 0.77};
    const Eigen::VectorXd ha = obs_nonlocal(a, m, locs, g, 2e-2);
    const Eigen::VectorXd hb = obs_nonlocal(b, m, locs, g, 2e-2);
    const Eigen::VectorXd hc = obs_nonlocal(c, m, locs, g, 2e-2);
    CHECK((hc - (2.0 * ha - 0.5 * hb)).norm() < 1e-12 * hc.norm());

    std::vector<double> d = a;
    for (std::size_t j = 0; j < m.size(); ++j) {
        bool near = false;
        for (double x : locs) {
            near = near || std::abs(m[j] - x) <= 2e-2 + 4e-3;
        }
        if (!near) {
            d[j] += 100.0;
        }
    }
    CHECK((obs_nonlocal(d, m, locs, g, 2e-2) - ha).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("moving_locations")
{
    std::vector<double> base;
    for (int k = 0; k < 5; ++k) {
        base.push_back(0.25 + 0.125 * k);
    }
    const auto at0 = moving_locations(0.0, base, 0.25, 750.0);
    for (std::size_t k = 0; k < base.size(); ++k) {
        CHECK(at0[k] == base[k]);
    }
    // sin(ωπt) = 1 at t = 1/(2ω)
    const auto peak = moving_locations(1.0 / 1500.0, base, 0.25, 750.0);
    CHECK(peak.front() == doctest::Approx(0.5));
    CHECK(peak.back() == doctest::Approx(1.0));
    const auto period = moving_locations(0.3 + 1.0 / 375.0, base, 0.25, 750.0);
    const auto start = moving_locations(0.3, base, 0.25, 750.0);
    CHECK(period[2] == doctest::Approx(start[2]).epsilon(1e-9));

    ObsNetwork net;
    net.base = {base};
    net.amplitude = 0.3;
    net.omega = 750.0;
    CHECK_THROWS(net.validate(0.0, 1.0));
    net.amplitude = 0.25;
    CHECK_NOTHROW(net.validate(0.0, 1.0));
}

TEST_CASE("synthesize_observations")
{
    const Mesh1D m = Mesh1D::uniform(0.0, 1.0, 100);
    StateField truth(m, 2);
    for (std::size_t j = 0; j < m.size(); ++j) {
        truth.component(0)[j] = std::sin(std::numbers::pi * m[j]);
        truth.component(1)[j] = m[j];
    }
    ObsNetwork net;
    net.base = {{0.1, 0.55, 0.9}, {0.2, 0.4}};
    net.variance = 1e-30;
    const ObservationSet exact = synthesize_observations(truth, net, 0.0, 1);
    CHECK(exact.size() == 5);
    const Eigen::VectorXd h = exact.apply(truth);
    CHECK((exact.values - h).lpNorm<Eigen::Infinity>() < 1e-14);
    CHECK(exact.values[3] == doctest::Approx(0.2));

    net.variance = 0.01;
    const ObservationSet a = synthesize_observations(truth, net, 0.0, 42);
    const ObservationSet b = synthesize_observations(truth, net, 0.0, 42);
    CHECK(a.values == b.values);
    CHECK(a.noise_seed == 42);

    // empirical noise variance
    ObsNetwork one;
    one.base = {{0.5}};
    one.variance = 0.04;
    double s = 0.0, s2 = 0.0;
    const int draws = 100000;
    const double hu = std::sin(std::numbers::pi * 0.5);
    for (int i = 0; i < draws; ++i) {
        const double e = synthesize_observations(truth, one, 0.0, 1000 + i).values[0] - hu;
        s += e;
        s2 += e * e;
    }
    const double var = s2 / draws - (s / draws) * (s / draws);
    CHECK(var == doctest::Approx(0.04).epsilon(0.02));
}
