#include "lahda/mesh_ops.hpp"
#include "lahda/metric.hpp"
#include "lahda/observations.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

using namespace lahda;

namespace {

SmallMatrix random_spd(std::mt19937_64& rng, int d)
{
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::MatrixXd g(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            g(i, j) = n(rng);
        }
    }
    Eigen::MatrixXd m = g * g.transpose() + 0.1 * Eigen::MatrixXd::Identity(d, d);
    return m;
}

// Intersection through the generalized eigenproblem B v = λ A v, which is a
// different route to the simultaneous diagonalization than the library's.
Eigen::MatrixXd intersect_oracle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b)
{
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(b, a);
    const Eigen::MatrixXd v = ges.eigenvectors(); // vᵀ A v = I, vᵀ B v = diag(λ)
    const Eigen::VectorXd lam = ges.eigenvalues().cwiseMax(1.0);
    const Eigen::MatrixXd vinv = v.inverse();
    return vinv.transpose() * lam.asDiagonal() * vinv;
}

} // namespace

TEST_CASE("spd_intersect examples")
{
    CHECK(spd_intersect(SpdMatrix::identity(2), SpdMatrix::identity(2)).matrix().isApprox(SmallMatrix::Identity(2, 2)));
    CHECK(spd_intersect(SpdMatrix::scalar(2.0), SpdMatrix::scalar(5.0))(0, 0) == doctest::Approx(5.0).epsilon(1e-14));
    Eigen::VectorXd a(2), b(2);
    a << 1, 4;
    b << 9, 1;
    const SpdMatrix r = spd_intersect(SpdMatrix::diagonal(a), SpdMatrix::diagonal(b));
    CHECK(r(0, 0) == doctest::Approx(9.0));
    CHECK(r(1, 1) == doctest::Approx(4.0));
    CHECK(std::abs(r(0, 1)) < 1e-12);
}

TEST_CASE("spd_intersect matches a generalized-eigenproblem oracle")
{
    std::mt19937_64 rng(11);
    for (int d = 1; d <= 3; ++d) {
        for (int trial = 0; trial < 50; ++trial) {
            const SmallMatrix a = random_spd(rng, d);
            const SmallMatrix b = random_spd(rng, d);
            const Eigen::MatrixXd expect = intersect_oracle(a, b);
            const SmallMatrix got = spd_intersect(SpdMatrix(a), SpdMatrix(b)).matrix();
            CHECK((got - expect).norm() <= 1e-9 * expect.norm());
        }
    }
}

TEST_CASE("spd_intersect properties on random pairs")
{
    std::mt19937_64 rng(5);
    for (int d = 1; d <= 3; ++d) {
        for (int trial = 0; trial < 300; ++trial) {
            const SpdMatrix a(random_spd(rng, d));
            const SpdMatrix b(random_spd(rng, d));
            const SpdMatrix ab = spd_intersect(a, b);
            const SpdMatrix ba = spd_intersect(b, a);
            const double scale = std::max(a.max_eigenvalue(), b.max_eigenvalue());
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ea(ab.matrix() - a.matrix());
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eb(ab.matrix() - b.matrix());
            CHECK(ab.min_eigenvalue() > 0.0);
            CHECK(ea.eigenvalues().minCoeff() >= -1e-10 * scale);
            CHECK(eb.eigenvalues().minCoeff() >= -1e-10 * scale);
            CHECK(ab.det() >= std::max(a.det(), b.det()) * (1.0 - 1e-10));
            CHECK((ab.matrix() - ba.matrix()).norm() <= 1e-8 * ab.matrix().norm());
            CHECK((spd_intersect(a, a).matrix() - a.matrix()).norm() <= 1e-10 * a.matrix().norm());
        }
    }
}

TEST_CASE("SpdMatrix rejects singular and asymmetric input")
{
    SmallMatrix sing(2, 2);
    sing << 1, 1, 1, 1;
    CHECK_THROWS_AS(SpdMatrix{sing}, std::invalid_argument);
    SmallMatrix asym(2, 2);
    asym << 2, 1, 0, 2;
    CHECK_THROWS_AS(SpdMatrix{asym}, std::invalid_argument);
    CHECK_THROWS_AS(SpdMatrix::scalar(-1.0), std::invalid_argument);
}

TEST_CASE("metric_intersect_field")
{
    const Mesh1D mesh = Mesh1D::uniform(0.0, 1.0, 4);
    const std::vector<double> m1{1, 3, 2, 5, 1};
    const std::vector<double> m2{2, 1, 4, 5, 0.5};
    const std::vector<MetricField> fields{MetricField::scalar(mesh, m1), MetricField::scalar(mesh, m2)};
    const MetricField r = metric_intersect_field(fields);
    for (std::size_t i = 0; i < m1.size(); ++i) {
        CHECK(r[i](0, 0) == doctest::Approx(std::max(m1[i], m2[i])));
    }
    const std::vector<MetricField> single{MetricField::scalar(mesh, m1)};
    CHECK(metric_intersect_field(single)[1](0, 0) == doctest::Approx(3.0));

    const std::vector<MetricField> mismatched{MetricField::identity(mesh), MetricField::identity(Mesh1D::uniform(0.0, 1.0, 5))};
    CHECK_THROWS_AS(metric_intersect_field(mismatched), std::invalid_argument);
}

TEST_CASE("hessian_metric")
{
    const Mesh1D mesh({0.0, 0.1, 0.25, 0.3, 0.55, 0.7, 1.0});
    std::vector<double> lin, quad;
    for (double x : mesh.nodes()) {
        lin.push_back(3.0 * x - 1.0);
        quad.push_back(0.5 * x * x);
    }
    const MetricField ml = hessian_metric(lin, mesh, 1.0);
    for (const auto& v : ml.values()) {
        CHECK(v(0, 0) == doctest::Approx(1.0).epsilon(1e-10));
    }
    const MetricField mq = hessian_metric(quad, mesh, 1.0);
    const double expect = std::pow(2.0, 0.8);
    for (const auto& v : mq.values()) {
        CHECK(v(0, 0) == doctest::Approx(expect).epsilon(1e-10));
    }
    CHECK(expect == doctest::Approx(1.7411).epsilon(1e-4));
    const Mesh1D tiny = Mesh1D::uniform(0.0, 1.0, 1);
    const std::vector<double> two{0.0, 1.0};
    CHECK_THROWS(hessian_metric(two, tiny, 1.0));
}

TEST_CASE("arclength_metric")
{
    const Mesh1D mesh({0.0, 0.2, 0.3, 0.8, 1.0});
    std::vector<double> c(5, 4.0), a, b;
    for (double x : mesh.nodes()) {
        a.push_back(x);
        b.push_back(2.0 * x);
    }
    for (const auto& v : arclength_metric(c, mesh).values()) {
        CHECK(v(0, 0) == doctest::Approx(1.0));
    }
    for (const auto& v : arclength_metric(a, mesh).values()) {
        CHECK(v(0, 0) == doctest::Approx(std::sqrt(2.0)));
    }
    for (const auto& v : arclength_metric(b, mesh).values()) {
        CHECK(v(0, 0) == doctest::Approx(std::sqrt(5.0)));
    }
}

TEST_CASE("adhoc_obs_metric")
{
    const Mesh1D mesh = Mesh1D::uniform(0.0, 1.0, 10);
    const std::vector<double> dens{1, 1, 4, 9, 16, 9, 4, 1, 1, 1, 1};
    const MetricField ens = MetricField::scalar(mesh, dens);
    // element averages of the metric are (1, 2.5, 6.5, 12.5, 12.5, ...), so D = √12.5
    const double big_d = std::sqrt(12.5);

    const std::vector<double> none;
    for (const auto& v : adhoc_obs_metric(none, mesh, 0.5, ens).values()) {
        CHECK(v(0, 0) == 1.0);
    }
    const std::vector<double> one{0.3};
    const MetricField m = adhoc_obs_metric(one, mesh, 0.05, ens);
    CHECK(m[3](0, 0) == doctest::Approx(1.0 + big_d / 2.0));
    // far away the bump has decayed
    CHECK(m[10](0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    // direct evaluation at a node off the observation
    const double w = 0.1;
    const double chi = 1.0 / (std::exp(w * w / (0.05 * 0.05)) - 1.0 + 2.0 / big_d);
    CHECK(m[4](0, 0) == doctest::Approx(1.0 + chi));
    CHECK_THROWS(adhoc_obs_metric(one, mesh, 0.0, ens));
}

TEST_CASE("nonlocal_obs_metric")
{
    const Mesh1D mesh = Mesh1D::uniform(0.0, 1.0, 20);
    std::vector<double> lin, quad;
    for (double x : mesh.nodes()) {
        lin.push_back(x);
        quad.push_back(0.5 * x * x);
    }
    const GaussKernel kernel{0.05, 1};
    const std::vector<double> obs{0.5};
    for (const auto& v : nonlocal_obs_metric(lin, mesh, obs, kernel, 1.0).values()) {
        CHECK(v(0, 0) == doctest::Approx(1.0).epsilon(1e-10));
    }
    const MetricField m = nonlocal_obs_metric(quad, mesh, obs, kernel, 1.0);
    CHECK(m.location() == Location::element);
    CHECK(m.size() == 20);
    for (int k = 0; k < 20; ++k) {
        const double g = kernel(0.5 - mesh.midpoint(k));
        CHECK(m[k](0, 0) == doctest::Approx(std::pow(1.0 + g, 2.0 / 3.0)).epsilon(1e-10));
    }
    // elements far from the observation are close to the identity
    CHECK(m[0](0, 0) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("smooth_metric")
{
    const Mesh1D mesh = Mesh1D::uniform(0.0, 1.0, 2);
    const std::vector<double> v{1, 9, 1};
    const MetricField m = MetricField::scalar(mesh, v);
    CHECK(smooth_metric(m, 0)[1](0, 0) == 9.0);
    const MetricField s = smooth_metric(m, 1);
    CHECK(s[1](0, 0) == doctest::Approx(5.0));
    CHECK(s[0](0, 0) == 1.0);
    CHECK(s[2](0, 0) == 1.0);

    const Mesh1D mesh8 = Mesh1D::uniform(0.0, 1.0, 8);
    const std::vector<double> c(9, 3.5);
    for (const auto& x : smooth_metric(MetricField::scalar(mesh8, c), 5).values()) {
        CHECK(x(0, 0) == doctest::Approx(3.5));
    }

    std::mt19937_64 rng(3);
    std::vector<SpdMatrix> vals;
    double lo = 1e300, hi = 0.0;
    for (int i = 0; i < 9; ++i) {
        vals.emplace_back(random_spd(rng, 2));
        lo = std::min(lo, vals.back().min_eigenvalue());
        hi = std::max(hi, vals.back().max_eigenvalue());
    }
    const MetricField sm = smooth_metric(MetricField(mesh8, Location::node, vals), 3);
    for (const auto& x : sm.values()) {
        CHECK(x.min_eigenvalue() >= lo * (1.0 - 1e-12));
        CHECK(x.max_eigenvalue() <= hi * (1.0 + 1e-12));
    }
}

TEST_CASE("mesh_energy")
{
    for (int n : {4, 10, 37}) {
        const Mesh1D mesh = Mesh1D::uniform(0.0, 2.0, n);
        // |K| = L/N, F' = L, M = 1: each term is (1/3)·L·L^(-3/2)
        const double expect = 2.0 / 3.0 / std::sqrt(2.0);
        CHECK(mesh_energy(mesh, MetricField::identity(mesh)) == doctest::Approx(expect).epsilon(1e-12));
    }

    // permuting element widths leaves the energy unchanged for a constant metric
    const Mesh1D a({0.0, 0.1, 0.4, 0.6, 1.0});
    const Mesh1D b({0.0, 0.4, 0.6, 0.7, 1.0});
    const std::vector<double> ca(5, 2.0);
    CHECK(mesh_energy(a, MetricField::scalar(a, ca)) == doctest::Approx(mesh_energy(b, MetricField::scalar(b, ca))));

    // the equidistributed mesh beats random perturbations of itself
    const Mesh1D fine = Mesh1D::uniform(0.0, 1.0, 400);
    std::vector<double> rho2;
    for (double x : fine.nodes()) {
        rho2.push_back(std::pow(1.0 + 20.0 * std::exp(-50.0 * (x - 0.4) * (x - 0.4)), 2.0));
    }
    const MetricField source = MetricField::scalar(fine, rho2);
    const Mesh1D eq = equidistribute(source, 16);
    const double e0 = mesh_energy(eq, source.interpolate_to(eq));
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-0.2, 0.2);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> x(eq.nodes().begin(), eq.nodes().end());
        for (std::size_t j = 1; j + 1 < x.size(); ++j) {
            const double h = std::min(x[j] - x[j - 1], x[j + 1] - x[j]);
            x[j] += u(rng) * h;
        }
        const Mesh1D pert(x);
        CHECK(mesh_energy(pert, source.interpolate_to(pert)) >= e0 * (1.0 - 1e-3));
    }
}
