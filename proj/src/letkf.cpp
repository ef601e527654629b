#include "lahda/letkf.hpp"

#include "lahda/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace lahda {

EnsembleState::EnsembleState(std::vector<StateField> members)
    : members_(std::move(members))
{
    if (members_.empty()) {
        throw std::invalid_argument("EnsembleState: no members");
    }
    for (const auto& m : members_) {
        if (!m.mesh().same_as(members_.front().mesh()) && !(m.mesh() == members_.front().mesh())) {
            throw std::invalid_argument("EnsembleState: members must share one mesh");
        }
        if (m.components() != members_.front().components()) {
            throw std::invalid_argument("EnsembleState: members have different component counts");
        }
    }
}

StateField EnsembleState::mean() const
{
    StateField out(mesh(), components());
    for (const auto& m : members_) {
        for (int c = 0; c < components(); ++c) {
            out.component(c) += m.component(c);
        }
    }
    for (int c = 0; c < components(); ++c) {
        out.component(c) /= static_cast<double>(members_.size());
    }
    return out;
}

void AnalysisConfig::validate() const
{
    if (!(rho >= 1.0)) {
        throw std::invalid_argument("analysis: inflation rho must be at least 1");
    }
    if (!(r0 > 0.0)) {
        throw std::invalid_argument("analysis: localization radius r0 must be positive");
    }
}

ForecastStats forecast_stats(const EnsembleState& ens)
{
    if (ens.size() < 2) {
        throw std::invalid_argument("forecast_stats: need at least 2 members");
    }
    const Eigen::VectorXd first = ens[0].stacked();
    Eigen::MatrixXd u(first.size(), ens.size());
    u.col(0) = first;
    for (int i = 1; i < ens.size(); ++i) {
        u.col(i) = ens[i].stacked();
    }
    ForecastStats s;
    s.mean = u.rowwise().mean();
    s.X = (u.colwise() - s.mean) / std::sqrt(static_cast<double>(ens.size() - 1));
    return s;
}

Eigen::MatrixXd etkf_weights(const Eigen::MatrixXd& Y, const Eigen::VectorXd& r_diag,
                             const Eigen::MatrixXd& innovations)
{
    if (Y.rows() != r_diag.size() || innovations.rows() != Y.rows()) {
        throw std::invalid_argument("etkf_weights: inconsistent observation dimensions");
    }
    if ((r_diag.array() <= 0.0).any()) {
        throw std::invalid_argument("etkf_weights: observation variances must be positive");
    }
    const Eigen::MatrixXd yr = Y.transpose() * r_diag.cwiseInverse().asDiagonal();
    Eigen::MatrixXd a = yr * Y;
    a.diagonal().array() += 1.0;
    const Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) {
        throw std::runtime_error("etkf_weights: weight system is not positive definite");
    }
    return llt.solve(yr * innovations);
}

Eigen::VectorXd etkf_weights(const Eigen::MatrixXd& Y, const Eigen::VectorXd& r_diag,
                             const Eigen::VectorXd& innovation)
{
    return etkf_weights(Y, r_diag, Eigen::MatrixXd(innovation));
}

Eigen::VectorXd localization_radii(const MetricField& m, double r0)
{
    if (!(r0 > 0.0)) {
        throw std::invalid_argument("localization_radii: r0 must be positive");
    }
    const Eigen::VectorXd det = m.to_nodes().determinants();
    const double dmin = det.minCoeff();
    const double dmax = det.maxCoeff();
    if (!(dmin > 0.0)) {
        throw std::invalid_argument("localization_radii: metric determinant must be positive");
    }
    const double cutoff = 0.5 * (dmax + dmin);
    Eigen::VectorXd r(det.size());
    for (Eigen::Index i = 0; i < det.size(); ++i) {
        const double d = std::min(det[i], cutoff);
        r[i] = r0 * std::exp(-(d - dmin) / (2.0 * dmin));
    }
    return r;
}

namespace {

struct ObsEntry {
    double x;
    int component;
    Eigen::Index row;
};

// Observation rows whose center lies within `reach` of x, restricted to one
// component when `component` ≥ 0. `sorted` is ordered by position.
void select(const std::vector<ObsEntry>& sorted, double x, double reach, int component,
            std::vector<Eigen::Index>& out)
{
    out.clear();
    auto it = std::lower_bound(sorted.begin(), sorted.end(), x - reach,
                               [](const ObsEntry& e, double v) { return e.x < v; });
    for (; it != sorted.end() && it->x <= x + reach; ++it) {
        if (std::abs(it->x - x) <= reach && (component < 0 || it->component == component)) {
            out.push_back(it->row);
        }
    }
}

} // namespace

EnsembleState local_analysis(const EnsembleState& ens, const ObservationSet& obs, const Eigen::VectorXd& radii,
                             const AnalysisConfig& cfg, AnalysisReport* report)
{
    cfg.validate();
    const Mesh1D& mesh = ens.mesh();
    const auto np = static_cast<Eigen::Index>(mesh.size());
    const int ne = ens.size();
    const int nc = ens.components();
    if (radii.size() != np) {
        throw std::invalid_argument("local_analysis: one radius per node required");
    }
    if (obs.r_diag.size() != obs.values.size()) {
        throw std::invalid_argument("local_analysis: observation covariance has the wrong size");
    }

    const ForecastStats fs = forecast_stats(ens);
    const double infl = std::sqrt(cfg.rho);
    const Eigen::MatrixXd X = infl * fs.X;

    const auto ny = static_cast<Eigen::Index>(obs.size());
    Eigen::MatrixXd hu(ny, ne);
    for (int i = 0; i < ne; ++i) {
        hu.col(i) = obs.apply(ens[i]);
    }
    const Eigen::VectorXd hmean = hu.rowwise().mean();
    const Eigen::MatrixXd Y = infl * (hu.colwise() - hmean) / std::sqrt(static_cast<double>(ne - 1));

    Eigen::MatrixXd innov = (-hu).colwise() + obs.values;
    if (cfg.perturbed_obs) {
        for (int i = 0; i < ne; ++i) {
            std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                              static_cast<std::uint32_t>(i)};
            std::mt19937_64 rng(seq);
            std::normal_distribution<double> normal(0.0, 1.0);
            for (Eigen::Index j = 0; j < ny; ++j) {
                innov(j, i) += std::sqrt(obs.r_diag[j]) * normal(rng);
            }
        }
    }

    std::vector<ObsEntry> entries;
    entries.reserve(static_cast<std::size_t>(ny));
    Eigen::Index row = 0;
    for (std::size_t c = 0; c < obs.locations.size(); ++c) {
        for (double x : obs.locations[c]) {
            entries.push_back({x, static_cast<int>(c), row++});
        }
    }
    if (row != ny) {
        throw std::invalid_argument("local_analysis: observation locations and values disagree in size");
    }
    std::stable_sort(entries.begin(), entries.end(), [](const ObsEntry& a, const ObsEntry& b) { return a.x < b.x; });

    const double support = obs.op.support();
    const int groups = cfg.coupling == Coupling::coupled ? 1 : nc;
    std::vector<Eigen::MatrixXd> out(nc, Eigen::MatrixXd(np, ne));
    std::vector<long> counts(static_cast<std::size_t>(np * groups), 0);

    parallel_for(static_cast<std::size_t>(np), [&](std::size_t node) {
        const auto k = static_cast<Eigen::Index>(node);
        std::vector<Eigen::Index> rows;
        for (int g = 0; g < groups; ++g) {
            const int only = cfg.coupling == Coupling::coupled ? -1 : g;
            select(entries, mesh[node], radii[k] + support, only, rows);
            counts[node * groups + g] = static_cast<long>(rows.size());
            const int c_begin = only < 0 ? 0 : only;
            const int c_end = only < 0 ? nc : only + 1;
            if (rows.empty()) {
                for (int c = c_begin; c < c_end; ++c) {
                    for (int i = 0; i < ne; ++i) {
                        out[c](k, i) = ens[i].component(c)[k];
                    }
                }
                continue;
            }
            const auto nl = static_cast<Eigen::Index>(rows.size());
            Eigen::MatrixXd yl(nl, ne);
            Eigen::VectorXd rl(nl);
            Eigen::MatrixXd dl(nl, ne);
            for (Eigen::Index j = 0; j < nl; ++j) {
                yl.row(j) = Y.row(rows[j]);
                rl[j] = obs.r_diag[rows[j]];
                dl.row(j) = innov.row(rows[j]);
            }
            const Eigen::MatrixXd w = etkf_weights(yl, rl, dl);
            for (int c = c_begin; c < c_end; ++c) {
                const Eigen::RowVectorXd incr = X.row(c * np + k) * w;
                for (int i = 0; i < ne; ++i) {
                    out[c](k, i) = ens[i].component(c)[k] + incr[i];
                }
            }
        }
    });

    if (report) {
        AnalysisReport r;
        long total = 0;
        for (long n : counts) {
            total += n;
            r.max_local_obs = std::max(r.max_local_obs, n);
            if (n == 0) {
                ++r.empty_updates;
            }
        }
        r.total_updates = static_cast<long>(counts.size());
        r.mean_local_obs = counts.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(counts.size());
        *report = r;
    }

    std::vector<StateField> members;
    members.reserve(ne);
    for (int i = 0; i < ne; ++i) {
        std::vector<Eigen::VectorXd> comps;
        comps.reserve(nc);
        for (int c = 0; c < nc; ++c) {
            comps.push_back(out[c].col(i));
        }
        members.emplace_back(mesh, std::move(comps));
    }
    return EnsembleState(std::move(members));
}

} // namespace lahda
