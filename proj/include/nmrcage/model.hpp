#pragma once

// Domain types shared by every module.
//
// Unit convention: all frequencies and couplings are angular (rad/s), all
// times are seconds. Conversion from ordinary frequency happens once, at the
// command-line boundary (see hz_to_angular).

#include <cstddef>
#include <limits>
#include <numbers>
#include <vector>

namespace nmrcage {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

constexpr double hz_to_angular(double hz) { return kTwoPi * hz; }
constexpr double angular_to_hz(double rad_per_s) { return rad_per_s / kTwoPi; }

/// Shape, size and orientation of one container. The coupling scale is the
/// product gamma^2 * hbar, in rad s^-1 nm^3; the volume is in nm^3.
class ContainerGeometry {
public:
    ContainerGeometry(double gamma2hbar, double form_factor, double volume, double theta);

    double gamma2hbar() const { return gamma2hbar_; }
    double form_factor() const { return form_factor_; }
    double volume() const { return volume_; }
    /// Orientation relative to the static field, folded into [0, pi].
    double theta() const { return theta_; }

private:
    double gamma2hbar_;
    double form_factor_;
    double volume_;
    double theta_;
};

class SpinEnsemble {
public:
    explicit SpinEnsemble(int n_spins);
    int n_spins() const { return n_spins_; }

private:
    int n_spins_;
};

enum class CorrelationKind { Exponential };

/// Gaussian coupling noise D(t) = <D> + dD(t) with <dD> = 0 and
/// <dD(t1) dD(t2)> = variance * C(|t1 - t2|). tau_c may be +infinity
/// (frozen disorder).
class GaussianFluctuationModel {
public:
    GaussianFluctuationModel(double mean_d, double variance, double tau_c,
                             CorrelationKind kind = CorrelationKind::Exponential);

    /// Builds the model from the relative variance alpha = variance / <D>^2.
    static GaussianFluctuationModel from_alpha(double mean_d, double alpha, double tau_c);

    double mean_d() const { return mean_d_; }
    double variance() const { return variance_; }
    double tau_c() const { return tau_c_; }
    CorrelationKind correlation_kind() const { return kind_; }
    bool frozen() const { return tau_c_ == kInfinity; }

    /// variance / <D>^2. Throws DomainError when <D> == 0.
    double alpha() const;

private:
    double mean_d_;
    double variance_;
    double tau_c_;
    CorrelationKind kind_;
};

/// Harmonic modulation D(t) = <D> (1 + epsilon cos(omega t)).
class VibrationModel {
public:
    VibrationModel(double mean_d, double epsilon, double omega);

    double mean_d() const { return mean_d_; }
    double epsilon() const { return epsilon_; }
    double omega() const { return omega_; }

private:
    double mean_d_;
    double epsilon_;
    double omega_;
};

/// Density A0 * W^2 * exp(-(W - omega0)^2 / delta^2) of vibration frequencies W.
class FrequencyDistribution {
public:
    FrequencyDistribution(double omega0, double delta);

    double omega0() const { return omega0_; }
    double delta() const { return delta_; }
    double a0() const;

private:
    double omega0_;
    double delta_;
};

/// Real signal sampled at t_k = t0 + k * dt.
struct FidSeries {
    double t0 = 0.0;
    double dt = 1.0;
    std::vector<double> values;

    double time(std::size_t k) const { return t0 + static_cast<double>(k) * dt; }
    std::size_t size() const { return values.size(); }
};

/// Line shape I(omega), in seconds, on a uniform angular-frequency grid.
struct Spectrum {
    std::vector<double> omegas;
    std::vector<double> intensities;

    std::size_t size() const { return omegas.size(); }
};

/// D = gamma2hbar * (f / V) * (3 cos^2 theta - 1). Negative near theta = pi/2.
double coupling_from_geometry(const ContainerGeometry& geom);

/// Gaussian FID rate 3 |<D>| sqrt(N / 2).
double nu(double mean_d, const SpinEnsemble& ens);

/// Van Vleck second moment (9N/4) (<D>^2 + variance).
double second_moment(const SpinEnsemble& ens, const GaussianFluctuationModel& model);

} // namespace nmrcage
