#include "nmrcage/spectrum.hpp"

#include "nmrcage/error.hpp"
#include "nmrcage/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <thread>

namespace nmrcage {

namespace {

constexpr double kInvPi = std::numbers::inv_pi;
constexpr double kInvSqrtPi = std::numbers::inv_sqrtpi;

// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double x)
    {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

struct FilonWeights {
    double alpha;
    double beta;
    double gamma;
};

FilonWeights filon_weights(double theta)
{
    if (std::abs(theta) <= 0.5) {
        const double t2 = theta * theta;
        const double t3 = t2 * theta;
        const double alpha =
            t3 * (2.0 / 45 + t2 * (-2.0 / 315 + t2 * (2.0 / 4725 + t2 * (-8.0 / 467775 + t2 * (4.0 / 8513505 + t2 * (-2.0 / 212837625 + t2 * (2.0 / 13956067125.0)))))));
        const double beta =
            2.0 / 3 + t2 * (2.0 / 15 + t2 * (-4.0 / 105 + t2 * (2.0 / 567 + t2 * (-4.0 / 22275 + t2 * (4.0 / 675675 + t2 * (-8.0 / 58046625 + t2 * (2.0 / 834978375.0)))))));
        const double gamma =
            4.0 / 3 + t2 * (-2.0 / 15 + t2 * (1.0 / 210 + t2 * (-1.0 / 11340 + t2 * (1.0 / 997920 + t2 * (-1.0 / 129729600 + t2 * (1.0 / 23351328000.0 + t2 * (-1.0 / 5557616064000.0)))))));
        return {alpha, beta, gamma};
    }
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    const double t2 = theta * theta;
    const double t3 = t2 * theta;
    return {
        1.0 / theta + 2.0 * s * c / (2.0 * t2) - 2.0 * s * s / t3,
        2.0 * ((1.0 + c * c) / t2 - 2.0 * s * c / t3),
        4.0 * (s / t3 - c / t2),
    };
}

// g(z) = (e^z (z - 1) + 1) / z^2, so that integral_0^h u e^{i w u} du = h^2 g(i w h).
std::complex<double> linear_moment(std::complex<double> z)
{
    if (std::abs(z) < 0.5) {
        std::complex<double> term = 1.0;
        std::complex<double> sum = 0.5;
        for (int k = 1; k < 30; ++k) {
            term *= z / static_cast<double>(k);
            const std::complex<double> add = term / static_cast<double>(k + 2);
            sum += add;
            if (std::abs(add) < 1e-18) {
                break;
            }
        }
        return sum;
    }
    return (std::exp(z) * (z - 1.0) + 1.0) / (z * z);
}

// Exact integral over one panel [a, a + h] of the linear interpolant of (fa, fb) times cos(w t).
double linear_panel(double fa, double fb, double a, double h, double omega)
{
    const double half = 0.5 * omega * h;
    const double sinc = std::abs(half) < 1e-8 ? 1.0 - half * half / 6.0 : std::sin(half) / half;
    const double zeroth = h * std::cos(omega * (a + 0.5 * h)) * sinc;
    const std::complex<double> first = h * h * std::exp(std::complex<double>(0.0, omega * a)) *
                                       linear_moment(std::complex<double>(0.0, omega * h));
    return fa * zeroth + (fb - fa) / h * first.real();
}

double sat_exp(double x, double nu)
{
    return std::exp(-(x * x) / (nu * nu));
}

void require_order(int order)
{
    require(order == 1 || order == 2, "satellite order must be 1 or 2");
}

} // namespace

std::vector<double> TransformPlan::omegas() const
{
    std::vector<double> grid(n_omega);
    const double step = (omega_max - omega_min) / static_cast<double>(n_omega - 1);
    for (std::size_t j = 0; j < n_omega; ++j) {
        grid[j] = omega_min + static_cast<double>(j) * step;
    }
    grid.back() = omega_max;
    return grid;
}

void TransformPlan::validate() const
{
    require(n_omega >= 2, "plan: n_omega must be at least 2");
    require(std::isfinite(omega_max) && omega_max > 0.0, "plan: omega_max must be positive");
    require(std::isfinite(omega_min) && omega_min >= 0.0 && omega_min < omega_max,
            "plan: omega_min must lie in [0, omega_max)");
    require(std::isfinite(t_max) && t_max > 0.0, "plan: t_max must be positive");
}

TransformPlan make_plan(const FidSeries& fid, double omega_max, std::size_t n_omega, Quadrature quadrature,
                        double decay_tol)
{
    require(fid.size() >= 2, "make_plan: FID needs at least two samples");
    std::size_t last_above = 0;
    for (std::size_t k = 0; k < fid.size(); ++k) {
        if (std::abs(fid.values[k]) >= decay_tol) {
            last_above = k;
        }
    }
    require(last_above + 1 < fid.size(), "make_plan: FID does not decay below the tolerance on its grid");
    TransformPlan plan;
    plan.omega_max = omega_max;
    plan.n_omega = n_omega;
    plan.t_max = fid.time(last_above + 1);
    plan.quadrature = quadrature;
    plan.validate();
    return plan;
}

double filon_cosine_integral(std::span<const double> f, double t0, double h, double omega)
{
    require(f.size() >= 2, "filon: need at least two samples");
    require(h > 0.0, "filon: step must be positive");
    const std::size_t intervals = f.size() - 1;
    const std::size_t even = intervals - intervals % 2;
    double result = 0.0;
    if (even >= 2) {
        const auto w = filon_weights(omega * h);
        CompensatedSum c_even;
        CompensatedSum c_odd;
        for (std::size_t k = 0; k <= even; ++k) {
            const double term = f[k] * std::cos(omega * (t0 + static_cast<double>(k) * h));
            if (k % 2 == 0) {
                c_even.add(term);
            } else {
                c_odd.add(term);
            }
        }
        const double t_end = t0 + static_cast<double>(even) * h;
        const double ends = 0.5 * (f[even] * std::cos(omega * t_end) + f[0] * std::cos(omega * t0));
        result = h * (w.alpha * (f[even] * std::sin(omega * t_end) - f[0] * std::sin(omega * t0)) +
                      w.beta * (c_even.value() - ends) + w.gamma * c_odd.value());
    }
    if (even != intervals) {
        const double a = t0 + static_cast<double>(even) * h;
        result += linear_panel(f[even], f[even + 1], a, h, omega);
    }
    return result;
}

double trapezoid_cosine_integral(std::span<const double> f, double t0, double h, double omega)
{
    require(f.size() >= 2, "trapezoid: need at least two samples");
    CompensatedSum sum;
    const std::size_t last = f.size() - 1;
    for (std::size_t k = 0; k <= last; ++k) {
        const double weight = (k == 0 || k == last) ? 0.5 : 1.0;
        sum.add(weight * f[k] * std::cos(omega * (t0 + static_cast<double>(k) * h)));
    }
    return h * sum.value();
}

Spectrum cosine_transform(const FidSeries& fid, const TransformPlan& plan, unsigned threads)
{
    plan.validate();
    require(fid.size() >= 2 && fid.dt > 0.0, "cosine_transform: FID needs two or more samples on a positive step");
    const double span_len = (plan.t_max - fid.t0) / fid.dt;
    require(plan.t_max <= fid.time(fid.size() - 1) + 1e-9 * fid.dt, "cosine_transform: t_max lies beyond the FID grid");
    const auto n_intervals = static_cast<std::size_t>(std::floor(span_len + 1e-9));
    require(n_intervals >= 1, "cosine_transform: t_max must cover at least one FID interval");
    const std::span<const double> samples(fid.values.data(), n_intervals + 1);

    Spectrum out;
    out.omegas = plan.omegas();
    out.intensities.assign(plan.n_omega, 0.0);
    if (plan.quadrature == Quadrature::TrapezoidDense) {
        require(plan.omega_max * fid.dt <= 0.5, "cosine_transform: omega * dt > 0.5 requires the Filon rule");
    }

    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t j = begin; j < end; ++j) {
            const double omega = out.omegas[j];
            const double integral = plan.quadrature == Quadrature::FilonCosine
                                        ? filon_cosine_integral(samples, fid.t0, fid.dt, omega)
                                        : trapezoid_cosine_integral(samples, fid.t0, fid.dt, omega);
            out.intensities[j] = kInvPi * integral;
        }
    };

    unsigned n_threads = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
    n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, plan.n_omega));
    if (n_threads <= 1) {
        work(0, plan.n_omega);
        return out;
    }
    {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (plan.n_omega + n_threads - 1) / n_threads;
        for (unsigned i = 0; i < n_threads; ++i) {
            const std::size_t begin = i * chunk;
            const std::size_t end = std::min(plan.n_omega, begin + chunk);
            if (begin < end) {
                pool.emplace_back(work, begin, end);
            }
        }
    }
    return out;
}

double spectrum_area(const Spectrum& spectrum)
{
    require(spectrum.size() >= 2, "spectrum_area: need at least two points");
    CompensatedSum sum;
    for (std::size_t j = 1; j < spectrum.size(); ++j) {
        const double width = spectrum.omegas[j] - spectrum.omegas[j - 1];
        sum.add(0.5 * width * (spectrum.intensities[j] + spectrum.intensities[j - 1]));
    }
    return 2.0 * sum.value();
}

Spectrum evaluate_lineshape(const std::function<double(double)>& lineshape, std::span<const double> omegas)
{
    Spectrum out;
    out.omegas.assign(omegas.begin(), omegas.end());
    out.intensities.reserve(omegas.size());
    for (double w : omegas) {
        out.intensities.push_back(lineshape(w));
    }
    return out;
}

double gaussian_line(double omega, double nu)
{
    require(nu > 0.0, "gaussian_line: nu must be positive");
    return kInvSqrtPi / nu * sat_exp(omega, nu);
}

double lineshape_fast_fluct(double omega, double alpha, double tau_c, double nu)
{
    require(alpha > 0.0 && tau_c > 0.0 && nu > 0.0 && std::isfinite(tau_c),
            "lineshape_fast_fluct: alpha, tau_c and nu must be positive and finite");
    const double scale = alpha * tau_c * nu * nu;
    const double re = 1.0 / (4.0 * alpha * alpha * tau_c * tau_c * nu * nu);
    const std::complex<double> root = std::sqrt(std::complex<double>(re, omega / scale));
    const std::complex<double> value = specfun::erfcx(root) / root;
    return value.real() * kInvSqrtPi / scale;
}

double lorentzian_core(double omega, double alpha, double tau_c)
{
    require(alpha > 0.0 && tau_c > 0.0, "lorentzian_core: alpha and tau_c must be positive");
    const double gamma = 1.0 / (4.0 * alpha * tau_c);
    return kInvPi * gamma / (gamma * gamma + omega * omega);
}

double wing_tail(double omega, const SpinEnsemble& ens, const GaussianFluctuationModel& model)
{
    require(omega > 0.0, "wing_tail: omega must be positive");
    const double w2 = omega * omega;
    return 2.25 * ens.n_spins() * kInvPi * model.variance() / (model.tau_c() * w2 * w2);
}

double lineshape_static_disorder(double omega, double alpha, double nu)
{
    require(alpha > 0.0 && nu > 0.0, "lineshape_static_disorder: alpha and nu must be positive");
    require(omega != 0.0, "lineshape_static_disorder: the line shape diverges at omega = 0");
    const double x = std::abs(omega) * std::numbers::sqrt2 / (nu * std::sqrt(alpha));
    return std::exp(-0.5 / alpha) * kInvPi / nu * std::sqrt(2.0 / alpha) * specfun::bessel_k0(x);
}

double static_disorder_log_asymptote(double omega, double alpha, double nu)
{
    require(alpha > 0.0 && nu > 0.0 && omega != 0.0, "static_disorder_log_asymptote: invalid arguments");
    const double x = std::abs(omega) * std::numbers::sqrt2 / (nu * std::sqrt(alpha));
    return std::exp(-0.5 / alpha) * kInvPi / nu * std::sqrt(2.0 / alpha) * std::log(1.0 / x);
}

double static_disorder_exp_asymptote(double omega, double alpha, double nu)
{
    require(alpha > 0.0 && nu > 0.0 && omega != 0.0, "static_disorder_exp_asymptote: invalid arguments");
    const double w = std::abs(omega);
    const double pref = std::exp(-0.5 / alpha) / std::sqrt(std::numbers::pi * nu * std::sqrt(2.0 * alpha));
    return pref / std::sqrt(w) * std::exp(-w * std::numbers::sqrt2 / (nu * std::sqrt(alpha)));
}

double satellite_pair(int order, double omega, double epsilon, double omega_vib, double nu)
{
    require_order(order);
    require(nu > 0.0, "satellite_pair: nu must be positive");
    require(omega_vib != 0.0 && std::isfinite(omega_vib), "satellite_pair: vibration omega must be non-zero");
    const double pref = kInvSqrtPi / nu;
    if (order == 1) {
        auto one_side = [&](double w) {
            return -0.5 * epsilon * pref * (1.0 + w / omega_vib) * sat_exp(w + omega_vib, nu);
        };
        return one_side(omega) + one_side(-omega);
    }
    const double r = nu / (2.0 * omega_vib);
    const double amp = 0.25 * epsilon * epsilon * pref * r * r;
    return amp * (sat_exp(omega + 2.0 * omega_vib, nu) + sat_exp(omega - 2.0 * omega_vib, nu));
}

double lineshape_satellites(double omega, double epsilon, double omega_vib, double nu)
{
    require(nu > 0.0, "lineshape_satellites: nu must be positive");
    require(omega_vib != 0.0 && std::isfinite(omega_vib), "lineshape_satellites: vibration omega must be non-zero");
    const double r = nu / (2.0 * omega_vib);
    // The sin^2 term of the FID also removes weight from the central line.
    const double central = gaussian_line(omega, nu) * (1.0 - 0.5 * epsilon * epsilon * r * r);
    return central + satellite_pair(1, omega, epsilon, omega_vib, nu) + satellite_pair(2, omega, epsilon, omega_vib, nu);
}

double lineshape_satellites(double omega, const VibrationModel& vib, double nu)
{
    return lineshape_satellites(omega, vib.epsilon(), vib.omega(), nu);
}

double frequency_density(double omega_vib, const FrequencyDistribution& dist)
{
    const double x = (omega_vib - dist.omega0()) / dist.delta();
    return dist.a0() * omega_vib * omega_vib * std::exp(-x * x);
}

double inhomogeneous_satellite_pair(int order, double omega, double epsilon, double nu,
                                    const FrequencyDistribution& dist)
{
    require_order(order);
    require(nu > 0.0, "inhomogeneous_satellite_pair: nu must be positive");
    const double a0 = dist.a0();
    const double big_delta = dist.delta();
    const double w0 = dist.omega0();
    const double d2 = (big_delta / nu) * (big_delta / nu);
    if (order == 1) {
        const double pref = -0.5 * epsilon * a0 * big_delta * big_delta * big_delta / (nu * std::pow(1.0 + d2, 1.5));
        auto one_side = [&](double w) {
            const double bracket = 0.5 + (w0 - w * d2) * (w0 + w) / (big_delta * big_delta * (1.0 + d2));
            return pref * bracket * std::exp(-(w + w0) * (w + w0) / (nu * nu + big_delta * big_delta));
        };
        return one_side(omega) + one_side(-omega);
    }
    const double amp = epsilon * epsilon / 16.0 * a0 * nu * big_delta / std::sqrt(1.0 + 4.0 * d2);
    const double width2 = nu * nu + 4.0 * big_delta * big_delta;
    auto one_side = [&](double w) { return amp * std::exp(-(w + 2.0 * w0) * (w + 2.0 * w0) / width2); };
    return one_side(omega) + one_side(-omega);
}

double lineshape_inhomogeneous(double omega, double epsilon, double nu, const FrequencyDistribution& dist)
{
    require(nu > 0.0, "lineshape_inhomogeneous: nu must be positive");
    const double central_loss = epsilon * epsilon / 8.0 * dist.a0() * nu * dist.delta() * sat_exp(omega, nu);
    return gaussian_line(omega, nu) - central_loss + inhomogeneous_satellite_pair(1, omega, epsilon, nu, dist) +
           inhomogeneous_satellite_pair(2, omega, epsilon, nu, dist);
}

} // namespace nmrcage
