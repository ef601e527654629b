#include "lahda/metric.hpp"

#include "lahda/fd.hpp"
#include "lahda/mesh_ops.hpp"
#include "lahda/observations.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace lahda {

namespace {

std::size_t expected_count(const Mesh1D& mesh, Location loc)
{
    return loc == Location::node ? mesh.size() : static_cast<std::size_t>(mesh.intervals());
}

// I + |h|/α raised to the given power of its determinant, d = 1.
SpdMatrix scaled_scalar_metric(double a, double det_exponent)
{
    return SpdMatrix::scalar(std::pow(a, 1.0 + det_exponent));
}

} // namespace

MetricField::MetricField(Mesh1D mesh, Location location, std::vector<SpdMatrix> values)
    : mesh_(std::move(mesh)), location_(location), values_(std::move(values))
{
    if (values_.size() != expected_count(mesh_, location_)) {
        std::ostringstream os;
        os << "MetricField: got " << values_.size() << " values, expected " << expected_count(mesh_, location_);
        throw std::invalid_argument(os.str());
    }
    const int d = values_.front().dim();
    for (const auto& v : values_) {
        if (v.dim() != d) {
            throw std::invalid_argument("MetricField: mixed metric dimensions");
        }
    }
}

MetricField MetricField::identity(const Mesh1D& mesh, int dim)
{
    return MetricField(mesh, Location::node, std::vector<SpdMatrix>(mesh.size(), SpdMatrix::identity(dim)));
}

MetricField MetricField::scalar(const Mesh1D& mesh, std::span<const double> values)
{
    std::vector<SpdMatrix> v;
    v.reserve(values.size());
    for (double a : values) {
        v.push_back(SpdMatrix::scalar(a));
    }
    const Location loc = values.size() == mesh.size() ? Location::node : Location::element;
    return MetricField(mesh, loc, std::move(v));
}

Eigen::VectorXd MetricField::determinants() const
{
    Eigen::VectorXd d(static_cast<Eigen::Index>(values_.size()));
    for (std::size_t i = 0; i < values_.size(); ++i) {
        d[static_cast<Eigen::Index>(i)] = values_[i].det();
    }
    return d;
}

Eigen::VectorXd MetricField::density() const
{
    return determinants().cwiseSqrt();
}

MetricField MetricField::to_nodes() const
{
    if (location_ == Location::node) {
        return *this;
    }
    const int n = mesh_.intervals();
    std::vector<SpdMatrix> out;
    out.reserve(mesh_.size());
    out.push_back(values_.front());
    for (int j = 1; j < n; ++j) {
        out.push_back(SpdMatrix::assume_spd(0.5 * (values_[j - 1].matrix() + values_[j].matrix())));
    }
    out.push_back(values_.back());
    return MetricField(mesh_, Location::node, std::move(out));
}

MetricField MetricField::interpolate_to(const Mesh1D& target) const
{
    if (location_ != Location::node) {
        return to_nodes().interpolate_to(target);
    }
    if (mesh_.same_as(target)) {
        return *this;
    }
    const auto br = locate_sorted(mesh_, target.nodes());
    std::vector<SpdMatrix> out;
    out.reserve(target.size());
    for (const auto& [k, t] : br) {
        out.push_back(SpdMatrix::assume_spd((1.0 - t) * values_[k].matrix() + t * values_[k + 1].matrix()));
    }
    return MetricField(target, Location::node, std::move(out));
}

MetricField metric_intersect(const MetricField& a, const MetricField& b)
{
    if (!(a.mesh() == b.mesh())) {
        throw std::invalid_argument("metric_intersect_field: fields live on different meshes");
    }
    if (a.location() != b.location()) {
        throw std::invalid_argument("metric_intersect_field: node and element fields cannot be mixed");
    }
    if (a.dim() != b.dim()) {
        throw std::invalid_argument("metric_intersect_field: metric dimensions differ");
    }
    std::vector<SpdMatrix> out;
    out.reserve(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        out.push_back(spd_intersect(a[i], b[i]));
    }
    return MetricField(a.mesh(), a.location(), std::move(out));
}

MetricField metric_intersect_field(std::span<const MetricField> fields)
{
    if (fields.empty()) {
        throw std::invalid_argument("metric_intersect_field: no fields given");
    }
    MetricField acc = fields.front();
    for (std::size_t i = 1; i < fields.size(); ++i) {
        acc = metric_intersect(acc, fields[i]);
    }
    return acc;
}

Eigen::VectorXd recovered_hessian(std::span<const double> u, const Mesh1D& mesh)
{
    if (mesh.size() < 3) {
        throw std::invalid_argument("recovered_hessian: need at least 3 nodes");
    }
    Eigen::VectorXd h = fd_apply(u, mesh, 2);
    const auto n = h.size();
    h[0] = h[1];
    h[n - 1] = h[n - 2];
    return h;
}

MetricField hessian_metric(std::span<const double> u, const Mesh1D& mesh, double alpha_h)
{
    if (!(alpha_h > 0.0)) {
        throw std::invalid_argument("hessian_metric: alpha_h must be positive");
    }
    const Eigen::VectorXd h = recovered_hessian(u, mesh);
    constexpr int d = 1;
    std::vector<SpdMatrix> out;
    out.reserve(mesh.size());
    for (Eigen::Index j = 0; j < h.size(); ++j) {
        out.push_back(scaled_scalar_metric(1.0 + std::abs(h[j]) / alpha_h, -1.0 / (d + 4)));
    }
    return MetricField(mesh, Location::node, std::move(out));
}

MetricField arclength_metric(std::span<const double> u, const Mesh1D& mesh)
{
    if (u.size() != mesh.size()) {
        throw std::invalid_argument("arclength_metric: field length does not match mesh");
    }
    const int n = mesh.intervals();
    std::vector<double> slope(n);
    for (int k = 0; k < n; ++k) {
        slope[k] = (u[k + 1] - u[k]) / mesh.width(k);
    }
    std::vector<SpdMatrix> out;
    out.reserve(mesh.size());
    for (int j = 0; j <= n; ++j) {
        double ux;
        if (j == 0) {
            ux = slope.front();
        } else if (j == n) {
            ux = slope.back();
        } else {
            ux = 0.5 * (slope[j - 1] + slope[j]);
        }
        out.push_back(SpdMatrix::scalar(std::sqrt(1.0 + ux * ux)));
    }
    return MetricField(mesh, Location::node, std::move(out));
}

MetricField adhoc_obs_metric(std::span<const double> obs_locations, const Mesh1D& mesh, double sigma,
                             const MetricField& ens_metric)
{
    if (!(sigma > 0.0)) {
        throw std::invalid_argument("adhoc_obs_metric: sigma must be positive");
    }
    const int d = ens_metric.dim();
    if (obs_locations.empty()) {
        return MetricField::identity(mesh, d);
    }
    // D = max over elements of √det 𝕄_K, 𝕄_K the element average
    double dmax = 0.0;
    if (ens_metric.location() == Location::element) {
        dmax = ens_metric.density().maxCoeff();
    } else {
        for (std::size_t k = 0; k + 1 < ens_metric.size(); ++k) {
            const SmallMatrix avg = 0.5 * (ens_metric[k].matrix() + ens_metric[k + 1].matrix());
            dmax = std::max(dmax, std::sqrt(SpdMatrix::assume_spd(avg).det()));
        }
    }
    const double floor = 2.0 / dmax;
    std::vector<double> sorted(obs_locations.begin(), obs_locations.end());
    std::sort(sorted.begin(), sorted.end());
    // beyond w²/σ² = 40 a term is below 5e-18 and is dropped
    const double reach = std::sqrt(40.0) * sigma;
    std::vector<SpdMatrix> out;
    out.reserve(mesh.size());
    for (double xi : mesh.nodes()) {
        double sum = 0.0;
        auto it = std::lower_bound(sorted.begin(), sorted.end(), xi - reach);
        for (; it != sorted.end() && *it <= xi + reach; ++it) {
            const double w2 = (xi - *it) * (xi - *it) / (sigma * sigma);
            sum += 1.0 / (std::expm1(w2) + floor);
        }
        out.push_back(SpdMatrix::assume_spd((1.0 + sum) * SmallMatrix::Identity(d, d)));
    }
    return MetricField(mesh, Location::node, std::move(out));
}

MetricField nonlocal_obs_metric(std::span<const double> u, const Mesh1D& mesh,
                                std::span<const double> obs_locations, const GaussKernel& kernel, double alpha_h)
{
    if (!(alpha_h > 0.0) || !(kernel.delta > 0.0)) {
        throw std::invalid_argument("nonlocal_obs_metric: alpha_h and kernel width must be positive");
    }
    const Eigen::VectorXd h = recovered_hessian(u, mesh);
    constexpr int d = 1;
    std::vector<SpdMatrix> out;
    out.reserve(mesh.intervals());
    for (int k = 0; k < mesh.intervals(); ++k) {
        const double xk = mesh.midpoint(k);
        double g = 0.0;
        for (double xo : obs_locations) {
            g += std::abs(kernel(xo - xk));
        }
        const double hk = 0.5 * (std::abs(h[k]) + std::abs(h[k + 1]));
        out.push_back(scaled_scalar_metric(1.0 + hk / alpha_h * g, -1.0 / (d + 2)));
    }
    return MetricField(mesh, Location::element, std::move(out));
}

MetricField smooth_metric(const MetricField& m, int sweeps)
{
    if (sweeps < 0) {
        throw std::invalid_argument("smooth_metric: sweeps must be non-negative");
    }
    if (sweeps == 0 || m.size() < 3) {
        return m;
    }
    std::vector<SmallMatrix> cur;
    cur.reserve(m.size());
    for (const auto& v : m.values()) {
        cur.push_back(v.matrix());
    }
    std::vector<SmallMatrix> next = cur;
    for (int s = 0; s < sweeps; ++s) {
        for (std::size_t i = 1; i + 1 < cur.size(); ++i) {
            next[i] = 0.25 * cur[i - 1] + 0.5 * cur[i] + 0.25 * cur[i + 1];
        }
        std::swap(cur, next);
        next.front() = cur.front();
        next.back() = cur.back();
    }
    std::vector<SpdMatrix> out;
    out.reserve(cur.size());
    for (const auto& c : cur) {
        out.push_back(SpdMatrix::assume_spd(c));
    }
    return MetricField(m.mesh(), m.location(), std::move(out));
}

double mesh_energy(const Mesh1D& mesh, const MetricField& m)
{
    const MetricField nodal = m.to_nodes();
    if (!(nodal.mesh() == mesh)) {
        throw std::invalid_argument("mesh_energy: metric must live on the mesh");
    }
    if (nodal.dim() != 1) {
        throw std::invalid_argument("mesh_energy: only 1D metrics are supported");
    }
    const int n = mesh.intervals();
    constexpr double d = 1.0;
    double first = 0.0;
    double second = 0.0;
    for (int k = 0; k < n; ++k) {
        const double vol = mesh.width(k);
        const double mk = 0.5 * (nodal[k](0, 0) + nodal[k + 1](0, 0));
        const double jac = vol * n; // F'_K for a reference element of length 1/N
        const double sqrt_det = std::sqrt(mk);
        const double trace = 1.0 / (jac * mk * jac);
        first += vol * sqrt_det * std::pow(trace, 3.0 * d / 4.0);
        second += vol * sqrt_det * std::pow(jac * sqrt_det, -1.5);
    }
    return first / 3.0 + std::pow(d, 3.0 * d / 4.0) * second / 3.0;
}

} // namespace lahda
