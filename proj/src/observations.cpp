#include "lahda/observations.hpp"

#include "lahda/mesh_ops.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace lahda {

double GaussKernel::operator()(double r) const
{
    const double norm = std::pow(std::sqrt(2.0 * std::numbers::pi) * delta, -dim);
    return norm * std::exp(-r * r / (2.0 * delta * delta));
}

Eigen::VectorXd obs_pointwise(std::span<const double> u, const Mesh1D& mesh, std::span<const double> locations)
{
    if (u.size() != mesh.size()) {
        throw std::invalid_argument("obs_pointwise: field length does not match mesh");
    }
    Eigen::VectorXd out(static_cast<Eigen::Index>(locations.size()));
    for (std::size_t i = 0; i < locations.size(); ++i) {
        const auto [k, t] = locate(mesh, locations[i]);
        out[static_cast<Eigen::Index>(i)] = (1.0 - t) * u[k] + t * u[k + 1];
    }
    return out;
}

Eigen::VectorXd obs_nonlocal(std::span<const double> u, const Mesh1D& mesh, std::span<const double> locations,
                             const GaussKernel& kernel, double r_obs)
{
    if (u.size() != mesh.size()) {
        throw std::invalid_argument("obs_nonlocal: field length does not match mesh");
    }
    if (!(r_obs > 0.0) || !(kernel.delta > 0.0)) {
        throw std::invalid_argument("obs_nonlocal: r_obs and kernel width must be positive");
    }
    const auto x = mesh.nodes();
    std::vector<double> mid(mesh.intervals());
    for (int k = 0; k < mesh.intervals(); ++k) {
        mid[k] = mesh.midpoint(k);
    }
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(locations.size()));
    for (std::size_t i = 0; i < locations.size(); ++i) {
        const double xh = locations[i];
        auto first = std::lower_bound(mid.begin(), mid.end(), xh - r_obs);
        double sum = 0.0;
        bool any = false;
        for (auto it = first; it != mid.end() && *it <= xh + r_obs; ++it) {
            const int k = static_cast<int>(it - mid.begin());
            if (std::abs(*it - xh) > r_obs) {
                continue;
            }
            any = true;
            sum += (x[k + 1] - x[k]) * kernel(xh - *it) * 0.5 * (u[k] + u[k + 1]);
        }
        if (!any) {
            std::cerr << "warning: obs_nonlocal: no element midpoint within r_obs of " << xh << "\n";
        }
        out[static_cast<Eigen::Index>(i)] = sum;
    }
    return out;
}

std::vector<double> moving_locations(double t, std::span<const double> base, double amplitude, double omega)
{
    const double shift = amplitude * std::sin(omega * std::numbers::pi * t);
    std::vector<double> out(base.begin(), base.end());
    for (double& x : out) {
        x += shift;
    }
    return out;
}

std::vector<std::vector<double>> ObsNetwork::locations_at(double t) const
{
    if (!moving()) {
        return base;
    }
    std::vector<std::vector<double>> out;
    out.reserve(base.size());
    for (const auto& b : base) {
        out.push_back(moving_locations(t, b, amplitude, omega));
    }
    return out;
}

void ObsNetwork::validate(double lo, double hi) const
{
    if (!(variance > 0.0)) {
        throw std::invalid_argument("observation error variance must be positive");
    }
    const double reach = std::abs(amplitude);
    const double tol = 1e-12 * (hi - lo);
    for (std::size_t c = 0; c < base.size(); ++c) {
        for (double x : base[c]) {
            if (x - reach < lo - tol || x + reach > hi + tol) {
                std::ostringstream os;
                os << "observation at " << x << " (component " << c << ", excursion " << reach
                   << ") leaves the domain [" << lo << ", " << hi << "]";
                throw std::invalid_argument(os.str());
            }
        }
        if (!std::is_sorted(base[c].begin(), base[c].end())) {
            throw std::invalid_argument("observation locations must be sorted");
        }
    }
}

std::size_t ObsNetwork::size() const
{
    std::size_t n = 0;
    for (const auto& b : base) {
        n += b.size();
    }
    return n;
}

Eigen::VectorXd apply_operator(const ObsOperator& op, const StateField& u,
                               const std::vector<std::vector<double>>& locations)
{
    if (static_cast<int>(locations.size()) > u.components()) {
        throw std::invalid_argument("observation network has more components than the state");
    }
    std::size_t total = 0;
    for (const auto& l : locations) {
        total += l.size();
    }
    Eigen::VectorXd out(static_cast<Eigen::Index>(total));
    Eigen::Index offset = 0;
    for (std::size_t c = 0; c < locations.size(); ++c) {
        const auto comp = as_span(u.component(static_cast<int>(c)));
        Eigen::VectorXd part = op.kind == ObsKind::pointwise
                                   ? obs_pointwise(comp, u.mesh(), locations[c])
                                   : obs_nonlocal(comp, u.mesh(), locations[c], op.kernel, op.r_obs);
        out.segment(offset, part.size()) = part;
        offset += part.size();
    }
    return out;
}

Eigen::VectorXd ObservationSet::apply(const StateField& u) const
{
    return apply_operator(op, u, locations);
}

ObservationSet synthesize_observations(const StateField& truth, const ObsNetwork& network, double t,
                                       std::uint64_t seed)
{
    ObservationSet obs;
    obs.time = t;
    obs.op = network.op;
    obs.locations = network.locations_at(t);
    obs.noise_seed = seed;
    obs.values = obs.apply(truth);
    obs.r_diag = Eigen::VectorXd::Constant(obs.values.size(), network.variance);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index j = 0; j < obs.values.size(); ++j) {
        obs.values[j] += std::sqrt(obs.r_diag[j]) * normal(rng);
    }
    return obs;
}

} // namespace lahda
