#include "nmrcage/fid.hpp"

#include "nmrcage/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

namespace nmrcage {

CouplingTrajectory::CouplingTrajectory(double t0, double dt, std::vector<double> d_values)
    : t0_(t0), dt_(dt), d_values_(std::move(d_values))
{
    require(std::isfinite(t0), "trajectory t0 must be finite");
    require(std::isfinite(dt) && dt > 0.0, "trajectory dt must be positive");
    require(d_values_.size() >= 2, "trajectory needs at least two samples");
}

std::vector<double> phase_shift(const CouplingTrajectory& traj)
{
    const auto& d = traj.d_values();
    std::vector<double> phi(d.size());
    phi[0] = 0.0;
    const double half_step = 0.25 * traj.dt();  // 1/2 (phase) * 1/2 (trapezoid)
    for (std::size_t k = 1; k < d.size(); ++k) {
        phi[k] = phi[k - 1] + half_step * (d[k - 1] + d[k]);
    }
    return phi;
}

double fid_exact(double phi, const SpinEnsemble& ens)
{
    return std::pow(std::cos(3.0 * phi), ens.n_spins() - 1);
}

double fid_large_n(double phi, const SpinEnsemble& ens)
{
    const double x = 3.0 * phi;
    return std::exp(-0.5 * ens.n_spins() * x * x);
}

double t2_correlation(double t, double tau_c)
{
    require(t >= 0.0, "t2_correlation: t must be non-negative");
    require(tau_c > 0.0, "t2_correlation: tau_c must be positive");
    if (tau_c == kInfinity) {
        return 0.5 * t * t;
    }
    const double x = t / tau_c;
    if (x < 0.1) {
        // exp(-x) + x - 1 = x^2 sum_k (-x)^k / (k + 2)!; expm1 would cancel here.
        double term = 0.5;
        double sum = 0.0;
        for (int k = 0; k < 12; ++k) {
            sum += term;
            term *= -x / (k + 3);
        }
        return t * t * sum;
    }
    return tau_c * tau_c * (std::expm1(-x) + x);
}

double fid_gaussian(double t, const SpinEnsemble& ens, const GaussianFluctuationModel& model)
{
    require(t >= 0.0, "fid_gaussian: t must be non-negative");
    const double n = ens.n_spins();
    const double d = model.mean_d();
    const double denom = 1.0 + 4.5 * n * model.variance() * t2_correlation(t, model.tau_c());
    return std::exp(-1.125 * n * d * d * t * t / denom) / std::sqrt(denom);
}

double fid_fast_fluct_regime(double t, double alpha, double tau_c, double nu)
{
    require(t >= 0.0, "fid_fast_fluct_regime: t must be non-negative");
    require(alpha > 0.0 && tau_c > 0.0 && std::isfinite(tau_c) && nu > 0.0,
            "fid_fast_fluct_regime: alpha, tau_c, nu must be positive and finite");
    return std::exp(-t / (4.0 * alpha * tau_c)) / std::sqrt(1.0 + alpha * tau_c * nu * nu * t);
}

double fid_static_disorder_regime(double t, double alpha, double nu)
{
    require(t >= 0.0, "fid_static_disorder_regime: t must be non-negative");
    require(alpha > 0.0 && nu > 0.0, "fid_static_disorder_regime: alpha and nu must be positive");
    return std::exp(-0.5 / alpha) / std::sqrt(1.0 + 0.5 * alpha * nu * nu * t * t);
}

double fid_vibration(double t, double nu, double epsilon, double omega)
{
    require(t >= 0.0, "fid_vibration: t must be non-negative");
    require(omega != 0.0 && std::isfinite(omega), "fid_vibration: omega must be non-zero");
    const double s = std::sin(omega * t);
    const double r = nu / (2.0 * omega);
    const double correction = 1.0 - epsilon * (nu * nu * t / (2.0 * omega)) * s - epsilon * epsilon * r * r * s * s;
    return std::exp(-0.25 * t * t * nu * nu) * correction;
}

double fid_vibration(double t, const SpinEnsemble& ens, const VibrationModel& vib)
{
    return fid_vibration(t, nu(vib.mean_d(), ens), vib.epsilon(), vib.omega());
}

double fid_vibration_ensemble(double t, double nu, double epsilon, const FrequencyDistribution& dist)
{
    require(t >= 0.0, "fid_vibration_ensemble: t must be non-negative");
    const double w0 = dist.omega0();
    const double d = dist.delta();
    const double weight = dist.a0() * std::sqrt(std::numbers::pi) * d;
    const double mean_sinc = weight * std::exp(-0.25 * d * d * t * t) *
                             (w0 * std::sin(w0 * t) + 0.5 * d * d * t * std::cos(w0 * t));
    const double mean_sin2 = 0.5 * weight * (1.0 - std::cos(2.0 * w0 * t) * std::exp(-d * d * t * t));
    const double correction = 1.0 - 0.5 * epsilon * nu * nu * t * mean_sinc - 0.25 * epsilon * epsilon * nu * nu * mean_sin2;
    return std::exp(-0.25 * t * t * nu * nu) * correction;
}

double vibration_phase(double t, const VibrationModel& vib)
{
    return 0.5 * vib.mean_d() * (t + vib.epsilon() / vib.omega() * std::sin(vib.omega() * t));
}

double max_time_step(double nu, double omega_vib, double tau_c)
{
    double dt = kInfinity;
    if (nu > 0.0 && std::isfinite(nu)) {
        dt = std::min(dt, 0.05 / nu);
    }
    if (omega_vib > 0.0 && std::isfinite(omega_vib)) {
        dt = std::min(dt, 0.05 * kTwoPi / omega_vib);
    }
    if (tau_c > 0.0 && std::isfinite(tau_c)) {
        dt = std::min(dt, 0.05 * tau_c);
    }
    return dt;
}

TimeGrid fid_horizon(const std::function<double(double)>& fid, double dt, const HorizonOptions& options)
{
    require(std::isfinite(dt) && dt > 0.0, "fid_horizon: dt must be positive and finite");
    require(options.max_samples >= 2, "fid_horizon: max_samples must be at least 2");
    std::size_t last_above = 0;
    std::size_t k = 0;
    for (; k < options.max_samples; ++k) {
        const double t = static_cast<double>(k) * dt;
        if (t > options.t_cap) {
            break;
        }
        if (std::abs(fid(t)) >= options.decay_tol) {
            last_above = k;
        } else if (k >= 2 * last_above + 16) {
            // Stayed below tolerance over a window as long as the signal itself.
            return {0.0, dt, std::min(last_above + 2, options.max_samples)};
        }
    }
    return {0.0, dt, std::max<std::size_t>(k, 2)};
}

TimeGrid default_fid_grid(const std::function<double(double)>& fid, double nu, double omega_vib, double tau_c)
{
    const double dt = max_time_step(nu, omega_vib, tau_c);
    require(std::isfinite(dt), "default_fid_grid: no finite time scale to derive a grid from");
    HorizonOptions options;
    if (nu > 0.0) {
        options.t_cap = 50.0 / nu;
    }
    return fid_horizon(fid, dt, options);
}

FidSeries tabulate(const std::function<double(double)>& fid, const TimeGrid& grid)
{
    require(grid.n >= 1, "tabulate: grid must have at least one sample");
    require(grid.dt > 0.0, "tabulate: grid dt must be positive");
    FidSeries series{grid.t0, grid.dt, std::vector<double>(grid.n)};
    for (std::size_t k = 0; k < grid.n; ++k) {
        series.values[k] = fid(grid.time(k));
    }
    return series;
}

} // namespace nmrcage
