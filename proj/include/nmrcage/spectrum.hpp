#pragma once

// Frequency-domain results. I(omega) = (1/pi) * integral_0^inf F(t) cos(omega t) dt,
// in seconds, for every closed form and for the numeric transform.

#include "nmrcage/model.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace nmrcage {

enum class Quadrature { TrapezoidDense, FilonCosine };

/// Discretization of the cosine transform. omegas() is the uniform grid
/// omega_min + j * (omega_max - omega_min) / (n_omega - 1).
struct TransformPlan {
    double omega_min = 0.0;
    double omega_max = 1.0;
    std::size_t n_omega = 2;
    double t_max = 0.0;
    Quadrature quadrature = Quadrature::FilonCosine;

    std::vector<double> omegas() const;
    void validate() const;
};

/// Builds a plan whose t_max is the first grid time after which |F| stays
/// below decay_tol. Throws DomainError if the series never decays that far.
TransformPlan make_plan(const FidSeries& fid, double omega_max, std::size_t n_omega,
                        Quadrature quadrature = Quadrature::FilonCosine, double decay_tol = 1e-10);

/// Numeric line shape of a sampled FID. TrapezoidDense is rejected for any
/// omega with omega * dt > 0.5. Evaluation is split over `threads` workers
/// (0 = hardware concurrency); each omega is independent, so the result does
/// not depend on the split.
Spectrum cosine_transform(const FidSeries& fid, const TransformPlan& plan, unsigned threads = 1);

/// Filon-Simpson approximation of integral f(t) cos(omega t) dt over the
/// samples f_k at t0 + k h. An odd interval count is closed with an exact
/// piecewise-linear panel.
double filon_cosine_integral(std::span<const double> f, double t0, double h, double omega);

/// Composite trapezoid approximation of the same integral.
double trapezoid_cosine_integral(std::span<const double> f, double t0, double h, double omega);

/// Trapezoid integral of the even extension of I over [-omega_max, omega_max];
/// equals F(0) up to discretization when the grid starts at omega = 0.
double spectrum_area(const Spectrum& spectrum);

/// Evaluates a closed-form line shape on a grid.
Spectrum evaluate_lineshape(const std::function<double(double)>& lineshape, std::span<const double> omegas);

// Gaussian fluctuations -----------------------------------------------------

/// Motionally narrowed Gaussian line exp(-omega^2 / nu^2) / (nu sqrt(pi)).
double gaussian_line(double omega, double nu);

/// Fast-fluctuation line shape in terms of exp(z) erfc(sqrt z),
/// z = (2 alpha tau_c nu)^-2 + i omega (alpha tau_c nu^2)^-1.
double lineshape_fast_fluct(double omega, double alpha, double tau_c, double nu);

/// Lorentzian (1/pi) G / (G^2 + omega^2) with G = 1 / (4 alpha tau_c).
double lorentzian_core(double omega, double alpha, double tau_c);

/// Far-wing asymptote (9N / 4 pi) omega^-4 variance / tau_c.
double wing_tail(double omega, const SpinEnsemble& ens, const GaussianFluctuationModel& model);

/// Frozen-disorder line shape exp(-1/(2 alpha)) / (pi nu) sqrt(2/alpha) K0(|omega| sqrt2 / (nu sqrt alpha)).
double lineshape_static_disorder(double omega, double alpha, double nu);

/// Small-omega form of lineshape_static_disorder (logarithm in place of K0).
double static_disorder_log_asymptote(double omega, double alpha, double nu);

/// Large-omega form of lineshape_static_disorder.
double static_disorder_exp_asymptote(double omega, double alpha, double nu);

// Vibrating containers -------------------------------------------------------

/// Line shape of a single vibration frequency: cosine transform of the
/// second-order vibration FID. Contains the central Gaussian (with its
/// epsilon^2 reduction) and satellite pairs at +-omega_vib, +-2 omega_vib.
/// May be negative at some omega.
double lineshape_satellites(double omega, const VibrationModel& vib, double nu);

/// Same, for raw parameters; omega_vib may have either sign and epsilon is unrestricted.
double lineshape_satellites(double omega, double epsilon, double omega_vib, double nu);

/// Order-n satellite pair I_n(omega) + I_n(-omega), n in {1, 2}.
double satellite_pair(int order, double omega, double epsilon, double omega_vib, double nu);

/// Normalized vibration-frequency density A0 W^2 exp(-(W - omega0)^2 / delta^2).
double frequency_density(double omega_vib, const FrequencyDistribution& dist);

/// Line shape averaged over the frequency density (closed form).
double lineshape_inhomogeneous(double omega, double epsilon, double nu, const FrequencyDistribution& dist);

/// Averaged order-n satellite pair G_n(omega) + G_n(-omega), n in {1, 2}.
double inhomogeneous_satellite_pair(int order, double omega, double epsilon, double nu,
                                    const FrequencyDistribution& dist);

} // namespace nmrcage
