#include "lahda/mesh_ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace lahda {

namespace {

double clamp_to_domain(const Mesh1D& mesh, double x)
{
    const double tol = 1e-12 * mesh.length();
    if (x < mesh.lo() - tol || x > mesh.hi() + tol || std::isnan(x)) {
        std::ostringstream os;
        os << "point " << x << " outside mesh domain [" << mesh.lo() << ", " << mesh.hi() << "]";
        throw std::out_of_range(os.str());
    }
    return std::clamp(x, mesh.lo(), mesh.hi());
}

// Cumulative integral of the piecewise-linear density at nodes.
std::vector<double> cumulative(std::span<const double> x, const Eigen::VectorXd& rho)
{
    std::vector<double> phi(x.size(), 0.0);
    for (std::size_t j = 0; j + 1 < x.size(); ++j) {
        phi[j + 1] = phi[j] + 0.5 * (rho[j] + rho[j + 1]) * (x[j + 1] - x[j]);
    }
    return phi;
}

// Integral of the piecewise-linear density from x[0] up to point p.
double cumulative_at(std::span<const double> x, const Eigen::VectorXd& rho, const std::vector<double>& phi,
                     double p)
{
    auto it = std::upper_bound(x.begin(), x.end(), p);
    std::size_t j = it == x.begin() ? 0 : static_cast<std::size_t>(it - x.begin()) - 1;
    j = std::min(j, x.size() - 2);
    const double h = x[j + 1] - x[j];
    const double s = p - x[j];
    const double slope = (rho[j + 1] - rho[j]) / h;
    return phi[j] + rho[j] * s + 0.5 * slope * s * s;
}

} // namespace

Bracket locate(const Mesh1D& mesh, double x)
{
    x = clamp_to_domain(mesh, x);
    const auto nodes = mesh.nodes();
    auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
    int k = static_cast<int>(it - nodes.begin()) - 1;
    k = std::clamp(k, 0, mesh.intervals() - 1);
    return {k, (x - nodes[k]) / mesh.width(k)};
}

std::vector<Bracket> locate_sorted(const Mesh1D& mesh, std::span<const double> points)
{
    std::vector<Bracket> out;
    out.reserve(points.size());
    const auto nodes = mesh.nodes();
    int k = 0;
    double prev = -std::numeric_limits<double>::infinity();
    for (double p : points) {
        if (p < prev) {
            throw std::invalid_argument("locate_sorted: query points are not sorted");
        }
        prev = p;
        const double x = clamp_to_domain(mesh, p);
        while (k < mesh.intervals() - 1 && nodes[k + 1] <= x) {
            ++k;
        }
        out.push_back({k, (x - nodes[k]) / mesh.width(k)});
    }
    return out;
}

Mesh1D equidistribute(const MetricField& m, int intervals)
{
    if (intervals < 2) {
        throw std::invalid_argument("equidistribute: need at least 2 intervals");
    }
    const MetricField nodal = m.to_nodes();
    const Mesh1D& old = nodal.mesh();
    const auto x = old.nodes();
    const Eigen::VectorXd rho = nodal.density();
    for (Eigen::Index j = 0; j < rho.size(); ++j) {
        if (!(rho[j] > 0.0) || !std::isfinite(rho[j])) {
            std::ostringstream os;
            os << "equidistribute: density must be positive and finite, got " << rho[j] << " at node " << j;
            throw std::invalid_argument(os.str());
        }
    }
    const std::vector<double> phi = cumulative(x, rho);
    const double sigma = phi.back();

    std::vector<double> out(intervals + 1);
    out.front() = old.lo();
    out.back() = old.hi();
    std::size_t j = 0;
    for (int k = 1; k < intervals; ++k) {
        const double target = sigma * static_cast<double>(k) / intervals;
        while (j + 2 < x.size() && phi[j + 1] <= target) {
            ++j;
        }
        const double h = x[j + 1] - x[j];
        const double r = target - phi[j];
        const double a = 0.5 * (rho[j + 1] - rho[j]) / h;
        const double b = rho[j];
        // a s² + b s = r with the root that stays inside [0, h]
        const double disc = std::max(b * b + 4.0 * a * r, 0.0);
        const double s = 2.0 * r / (b + std::sqrt(disc));
        out[k] = x[j] + std::clamp(s, 0.0, h);
    }
    for (int k = 1; k <= intervals; ++k) {
        if (!(out[k] > out[k - 1])) {
            std::ostringstream os;
            os << "equidistribute: produced a degenerate element at index " << k - 1
               << " (density range too wide for double precision)";
            throw std::runtime_error(os.str());
        }
    }
    return Mesh1D(std::move(out));
}

Eigen::VectorXd interp_linear(const Mesh1D& source, std::span<const double> values, const Mesh1D& target)
{
    if (values.size() != source.size()) {
        throw std::invalid_argument("interp_linear: value count does not match source mesh");
    }
    Eigen::VectorXd out(static_cast<Eigen::Index>(target.size()));
    if (source.same_as(target)) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            out[static_cast<Eigen::Index>(i)] = values[i];
        }
        return out;
    }
    const auto br = locate_sorted(source, target.nodes());
    for (std::size_t i = 0; i < br.size(); ++i) {
        const auto [k, t] = br[i];
        out[static_cast<Eigen::Index>(i)] = (1.0 - t) * values[k] + t * values[k + 1];
    }
    return out;
}

StateField interp_linear(const StateField& u, const Mesh1D& target)
{
    std::vector<Eigen::VectorXd> comps;
    comps.reserve(u.components());
    for (int c = 0; c < u.components(); ++c) {
        comps.push_back(interp_linear(u.mesh(), as_span(u.component(c)), target));
    }
    return StateField(target, std::move(comps));
}

MeshQuality mesh_quality(const Mesh1D& mesh, const MetricField& m)
{
    const MetricField nodal = m.to_nodes();
    const int n = mesh.intervals();
    std::vector<double> mass(n);
    if (nodal.mesh() == mesh) {
        const Eigen::VectorXd rho = nodal.density();
        for (int k = 0; k < n; ++k) {
            mass[k] = 0.5 * (rho[k] + rho[k + 1]) * mesh.width(k);
        }
    } else {
        const auto x = nodal.mesh().nodes();
        const Eigen::VectorXd rho = nodal.density();
        const std::vector<double> phi = cumulative(x, rho);
        double prev = cumulative_at(x, rho, phi, clamp_to_domain(nodal.mesh(), mesh[0]));
        for (int k = 0; k < n; ++k) {
            const double next = cumulative_at(x, rho, phi, clamp_to_domain(nodal.mesh(), mesh[k + 1]));
            mass[k] = next - prev;
            prev = next;
        }
    }
    double sigma = 0.0;
    for (double v : mass) {
        sigma += v;
    }
    const double target = sigma / n;
    double residual = 0.0;
    for (double v : mass) {
        residual = std::max(residual, std::abs(v - target) / target);
    }

    MeshQuality q{};
    q.equidistribution_residual = residual;
    q.alignment_residual = 0.0;
    q.min_width = mesh.min_width();
    q.max_width = mesh.max_width();
    q.energy = mesh_energy(mesh, nodal.mesh() == mesh ? nodal : nodal.interpolate_to(mesh));
    return q;
}

} // namespace lahda
