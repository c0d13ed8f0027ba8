#include "nmrcage/model.hpp"

#include "nmrcage/error.hpp"

#include <cmath>

namespace nmrcage {

namespace {

double fold_angle(double theta)
{
    // cos^2 is even and pi-periodic, so any finite angle maps into [0, pi].
    double folded = std::fmod(std::abs(theta), kTwoPi);
    if (folded > std::numbers::pi) {
        folded = kTwoPi - folded;
    }
    return folded;
}

} // namespace

ContainerGeometry::ContainerGeometry(double gamma2hbar, double form_factor, double volume, double theta)
    : gamma2hbar_(gamma2hbar), form_factor_(form_factor), volume_(volume), theta_(0.0)
{
    require(std::isfinite(gamma2hbar) && gamma2hbar > 0.0, "gamma2hbar must be positive");
    require(std::isfinite(form_factor) && form_factor > 0.0, "form_factor must be positive");
    require(std::isfinite(volume) && volume > 0.0, "volume must be positive");
    require(std::isfinite(theta), "theta must be finite");
    theta_ = fold_angle(theta);
}

SpinEnsemble::SpinEnsemble(int n_spins) : n_spins_(n_spins)
{
    require(n_spins >= 2, "n_spins must be at least 2");
}

GaussianFluctuationModel::GaussianFluctuationModel(double mean_d, double variance, double tau_c,
                                                   CorrelationKind kind)
    : mean_d_(mean_d), variance_(variance), tau_c_(tau_c), kind_(kind)
{
    require(std::isfinite(mean_d), "mean_d must be finite");
    require(std::isfinite(variance) && variance >= 0.0, "variance must be non-negative");
    require(tau_c > 0.0 && !std::isnan(tau_c), "tau_c must be positive (or +inf)");
}

GaussianFluctuationModel GaussianFluctuationModel::from_alpha(double mean_d, double alpha, double tau_c)
{
    require(std::isfinite(alpha) && alpha >= 0.0, "alpha must be non-negative");
    return {mean_d, alpha * mean_d * mean_d, tau_c};
}

double GaussianFluctuationModel::alpha() const
{
    require(mean_d_ != 0.0, "alpha is undefined for mean_d = 0");
    return variance_ / (mean_d_ * mean_d_);
}

VibrationModel::VibrationModel(double mean_d, double epsilon, double omega)
    : mean_d_(mean_d), epsilon_(epsilon), omega_(omega)
{
    require(std::isfinite(mean_d), "mean_d must be finite");
    require(std::isfinite(epsilon) && epsilon >= 0.0 && epsilon < 1.0, "epsilon must lie in [0, 1)");
    require(std::isfinite(omega) && omega > 0.0, "vibration omega must be positive");
}

FrequencyDistribution::FrequencyDistribution(double omega0, double delta) : omega0_(omega0), delta_(delta)
{
    require(std::isfinite(omega0) && omega0 >= 0.0, "omega0 must be non-negative");
    require(std::isfinite(delta) && delta > 0.0, "delta must be positive");
}

double FrequencyDistribution::a0() const
{
    return 1.0 / (std::sqrt(std::numbers::pi) * delta_ * (0.5 * delta_ * delta_ + omega0_ * omega0_));
}

double coupling_from_geometry(const ContainerGeometry& geom)
{
    const double c = std::cos(geom.theta());
    return geom.gamma2hbar() * (geom.form_factor() / geom.volume()) * (3.0 * c * c - 1.0);
}

double nu(double mean_d, const SpinEnsemble& ens)
{
    return 3.0 * std::abs(mean_d) * std::sqrt(0.5 * ens.n_spins());
}

double second_moment(const SpinEnsemble& ens, const GaussianFluctuationModel& model)
{
    const double d = model.mean_d();
    return 2.25 * ens.n_spins() * (d * d + model.variance());
}

} // namespace nmrcage
