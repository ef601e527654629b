#pragma once

#include "lahda/mesh.hpp"
#include "lahda/metric.hpp"
#include "lahda/observations.hpp"

#include <cstdint>
#include <vector>

namespace lahda {

/// N_e members sharing one mesh and component count.
class EnsembleState {
public:
    explicit EnsembleState(std::vector<StateField> members);

    const Mesh1D& mesh() const { return members_.front().mesh(); }
    int size() const { return static_cast<int>(members_.size()); }
    int components() const { return members_.front().components(); }
    const StateField& operator[](int i) const { return members_[i]; }
    StateField& operator[](int i) { return members_[i]; }
    const std::vector<StateField>& members() const { return members_; }

    StateField mean() const;

private:
    std::vector<StateField> members_;
};

enum class Coupling { coupled, uncoupled };

struct AnalysisConfig {
    /// Multiplicative inflation applied to forecast perturbations.
    double rho = 1.1;
    double r0 = 0.01;
    Coupling coupling = Coupling::coupled;
    /// Add an N(0, R) draw to each member's copy of the observations.
    bool perturbed_obs = false;
    /// Seed for the perturbed-observation draws.
    std::uint64_t seed = 0;

    void validate() const;
};

/// Ensemble mean and perturbations X with columns (u⁽ⁱ⁾ − mean)/√(N_e − 1),
/// both in the component-major stacked layout.
struct ForecastStats {
    Eigen::VectorXd mean;
    Eigen::MatrixXd X;
};

ForecastStats forecast_stats(const EnsembleState& ens);

/// w = (I + YᵀR⁻¹Y)⁻¹ YᵀR⁻¹ d for every column d of `innovations`, using a
/// Cholesky factorization of the N_e×N_e system. R is diagonal.
Eigen::MatrixXd etkf_weights(const Eigen::MatrixXd& Y, const Eigen::VectorXd& r_diag,
                             const Eigen::MatrixXd& innovations);
Eigen::VectorXd etkf_weights(const Eigen::MatrixXd& Y, const Eigen::VectorXd& r_diag,
                             const Eigen::VectorXd& innovation);

/// Per-node radii r_i = r0·exp(−(d_i − d_min)/(2 d_min)) with
/// d_i = min(det 𝕄_i, c) and c = (d_max + d_min)/2.
Eigen::VectorXd localization_radii(const MetricField& m, double r0);

struct AnalysisReport {
    /// Node updates (per component group) that had no observations in reach.
    long empty_updates = 0;
    long total_updates = 0;
    double mean_local_obs = 0.0;
    long max_local_obs = 0;
};

/// Domain-localized LETKF. For node k an observation centered at x̂ is used
/// when |x_k − x̂| ≤ r_k + (support of the operator). Each member is updated
/// with its own innovation y − H(u⁽ⁱ⁾):
///   u⁽ⁱ⁾(x_k) += X_k·w⁽ⁱ⁾,  w⁽ⁱ⁾ = (I + YₗᵀRₗ⁻¹Yₗ)⁻¹YₗᵀRₗ⁻¹(yₗ − Hₗu⁽ⁱ⁾)
/// with X and Y = HX inflated by √ρ. Coupled mode uses all components'
/// observations for one set of weights per node; uncoupled mode solves per
/// component with that component's observations only.
EnsembleState local_analysis(const EnsembleState& ens, const ObservationSet& obs, const Eigen::VectorXd& radii,
                             const AnalysisConfig& cfg, AnalysisReport* report = nullptr);

} // namespace lahda
