#pragma once

// Time-domain signals: phase accumulation, exact and large-N FIDs, the
// Gaussian-noise average and the perturbative vibration FID.

#include "nmrcage/model.hpp"

#include <cstddef>
#include <functional>
#include <vector>

namespace nmrcage {

/// Samples of D(t) on a uniform grid, at least two of them.
class CouplingTrajectory {
public:
    CouplingTrajectory(double t0, double dt, std::vector<double> d_values);

    double t0() const { return t0_; }
    double dt() const { return dt_; }
    const std::vector<double>& d_values() const { return d_values_; }
    std::size_t size() const { return d_values_.size(); }

private:
    double t0_;
    double dt_;
    std::vector<double> d_values_;
};

/// Uniform time grid t_k = t0 + k dt, k < n.
struct TimeGrid {
    double t0 = 0.0;
    double dt = 1.0;
    std::size_t n = 0;

    double time(std::size_t k) const { return t0 + static_cast<double>(k) * dt; }
    double t_end() const { return n == 0 ? t0 : time(n - 1); }
};

/// phi(t_k) = 1/2 * integral of D from t0 to t_k (cumulative trapezoid).
std::vector<double> phase_shift(const CouplingTrajectory& traj);

/// cos(3 phi)^(N-1).
double fid_exact(double phi, const SpinEnsemble& ens);

/// exp(-(N/2) (3 phi)^2).
double fid_large_n(double phi, const SpinEnsemble& ens);

/// T^2(t) = tau_c^2 (exp(-t/tau_c) + t/tau_c - 1); t^2/2 when tau_c is +inf.
double t2_correlation(double t, double tau_c);

/// Gaussian-noise-averaged FID
///   exp(-(t^2 nu^2 / 4) / (1 + alpha nu^2 T^2)) / sqrt(1 + alpha nu^2 T^2),
/// written in terms of <D> and the variance so that <D> = 0 is allowed.
double fid_gaussian(double t, const SpinEnsemble& ens, const GaussianFluctuationModel& model);

/// Fast-fluctuation regime form exp(-t / (4 alpha tau_c)) / sqrt(1 + alpha tau_c nu^2 t).
double fid_fast_fluct_regime(double t, double alpha, double tau_c, double nu);

/// Frozen-disorder regime form exp(-1 / (2 alpha)) / sqrt(1 + alpha nu^2 t^2 / 2).
double fid_static_disorder_regime(double t, double alpha, double nu);

/// Second-order (in epsilon) FID of a harmonically vibrating container.
double fid_vibration(double t, const SpinEnsemble& ens, const VibrationModel& vib);

/// Same expression in terms of the rate nu; accepts any non-zero omega
/// (the result is even in omega) and any epsilon.
double fid_vibration(double t, double nu, double epsilon, double omega);

/// fid_vibration averaged over the vibration-frequency density:
///   exp(-nu^2 t^2 / 4) (1 - eps nu^2 t / 2 <sin(W t) / W> - eps^2 nu^2 / 4 <sin^2(W t) / W^2>)
/// with both averages in closed form.
double fid_vibration_ensemble(double t, double nu, double epsilon, const FrequencyDistribution& dist);

/// Phase of the analytic harmonic trajectory, <D>/2 (t + (eps / W) sin W t).
double vibration_phase(double t, const VibrationModel& vib);

// Series generation --------------------------------------------------------

/// Largest step allowed by the phase-integration rule
/// dt <= min(0.05 / nu, 0.05 * 2 pi / omega, 0.05 tau_c); any scale passed as
/// 0 or +inf is ignored.
double max_time_step(double nu, double omega_vib, double tau_c);

struct HorizonOptions {
    double decay_tol = 1e-10;
    double t_cap = kInfinity;
    std::size_t max_samples = 10'000'000;
};

/// Grid starting at 0 with step dt that extends until |F| < decay_tol for
/// the remainder (checked by doubling the horizon), t_cap, or max_samples,
/// whichever comes first.
TimeGrid fid_horizon(const std::function<double(double)>& fid, double dt, const HorizonOptions& options = {});

/// Default grid for FID output: decay to 1e-10 or t = 50 / nu.
TimeGrid default_fid_grid(const std::function<double(double)>& fid, double nu, double omega_vib, double tau_c);

FidSeries tabulate(const std::function<double(double)>& fid, const TimeGrid& grid);

} // namespace nmrcage
