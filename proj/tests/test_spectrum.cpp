#include "nmrcage/error.hpp"
#include "nmrcage/fid.hpp"
#include "nmrcage/spectrum.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <gtest/gtest.h>

#include "oracle.hpp"

#include <cmath>
#include <numbers>
#include <vector>

using namespace nmrcage;
using boost::math::quadrature::gauss_kronrod;

namespace {

constexpr double kPi = std::numbers::pi;

// Antiderivative of (a + b t + c t^2) cos(w t).
double quadratic_cos_antiderivative(double a, double b, double c, double w, double t)
{
    const double s = std::sin(w * t), co = std::cos(w * t);
    return a * s / w + b * (co / (w * w) + t * s / w) + c * ((t * t / w - 2.0 / (w * w * w)) * s + 2.0 * t * co / (w * w));
}

std::vector<double> sample(double (*f)(double), double t0, double h, std::size_t n)
{
    std::vector<double> v(n);
    for (std::size_t k = 0; k < n; ++k) {
        v[k] = f(t0 + static_cast<double>(k) * h);
    }
    return v;
}

double quad(double t) { return 1.0 + 2.0 * t - 0.7 * t * t; }
double linear(double t) { return 0.3 - 1.5 * t; }

// (1/pi) int_0^inf F(t) cos(w t) dt by double-exponential Fourier quadrature.
template <class F>
double reference_transform(F f, double w)
{
    static boost::math::quadrature::ooura_fourier_cos<double> integrator(1e-14, 12);
    return integrator.integrate(f, w).first / kPi;
}

} // namespace

TEST(Filon, ExactForQuadraticsTimesCosine)
{
    const double h = 0.1;
    const auto f = sample(quad, 0.5, h, 21);  // 20 intervals
    for (double w : {0.3, 4.9, 5.1, 17.0, 250.0}) {  // omega h straddles the series switch at 0.5
        const double exact = quadratic_cos_antiderivative(1.0, 2.0, -0.7, w, 2.5) -
                             quadratic_cos_antiderivative(1.0, 2.0, -0.7, w, 0.5);
        EXPECT_NEAR(filon_cosine_integral(f, 0.5, h, w), exact, 1e-13) << w;
    }
}

TEST(Filon, ZeroFrequencyReducesToSimpson)
{
    const auto f = sample(quad, 0.0, 0.25, 9);
    const double exact = 2.0 + 4.0 - 0.7 * 8.0 / 3.0;
    EXPECT_NEAR(filon_cosine_integral(f, 0.0, 0.25, 0.0), exact, 1e-14);
}

TEST(Filon, OddIntervalCountClosesWithLinearPanel)
{
    const double h = 0.2;
    const auto f = sample(linear, 0.0, h, 8);  // 7 intervals
    for (double w : {0.0, 0.01, 3.0, 40.0}) {
        const double exact = gauss_kronrod<double, 61>::integrate(
            [w](double t) { return linear(t) * std::cos(w * t); }, 0.0, 1.4, 20, 1e-15);
        EXPECT_NEAR(filon_cosine_integral(f, 0.0, h, w), exact, 1e-14) << w;
    }
}

TEST(Filon, SmallThetaSeriesIsSmooth)
{
    const auto f = sample(quad, 0.0, 1.0, 5);
    const double below = filon_cosine_integral(f, 0.0, 1.0, std::nextafter(0.5, 0.0));
    const double above = filon_cosine_integral(f, 0.0, 1.0, 0.5);
    EXPECT_NEAR(below, above, 1e-14);
}

TEST(Trapezoid, ConstantAtZeroFrequency)
{
    const std::vector<double> ones(11, 1.0);
    EXPECT_NEAR(trapezoid_cosine_integral(ones, 0.0, 0.1, 0.0), 1.0, 1e-15);
    EXPECT_THROW(trapezoid_cosine_integral(std::vector<double>{1.0}, 0.0, 0.1, 0.0), DomainError);
}

TEST(CosineTransform, GaussianFidGivesGaussianLine)
{
    const double v = 2.0;
    auto max_error = [&](double h) {
        const auto n = static_cast<std::size_t>(20.0 / (v * h)) + 1;
        const auto series = tabulate([&](double t) { return std::exp(-0.25 * v * v * t * t); }, TimeGrid{0.0, h, n});
        const auto spec = cosine_transform(series, make_plan(series, 5.0 * v, 101));
        double err = 0.0;
        for (std::size_t j = 0; j < spec.size(); ++j) {
            err = std::max(err, std::abs(spec.intensities[j] - gaussian_line(spec.omegas[j], v)));
        }
        EXPECT_NEAR(spectrum_area(spec), 1.0, 1e-5);  // trapezoid on the omega grid
        return err;
    };
    const double coarse = max_error(0.1 / v);
    const double fine = max_error(0.05 / v);
    EXPECT_LT(fine, 5e-8);
    EXPECT_NEAR(coarse / fine, 16.0, 2.0);  // fourth-order convergence
}

TEST(CosineTransform, ThreadCountDoesNotChangeResult)
{
    const auto series = tabulate([](double t) { return std::exp(-t) * std::cos(3 * t); }, TimeGrid{0.0, 0.01, 3000});
    const auto plan = make_plan(series, 20.0, 57);
    const auto one = cosine_transform(series, plan, 1);
    const auto many = cosine_transform(series, plan, 5);
    EXPECT_EQ(one.intensities, many.intensities);
}

TEST(CosineTransform, TrapezoidRejectsCoarseSampling)
{
    const auto series = tabulate([](double t) { return std::exp(-t); }, TimeGrid{0.0, 0.1, 400});
    auto plan = make_plan(series, 10.0, 11, Quadrature::TrapezoidDense);
    EXPECT_THROW(cosine_transform(series, plan), DomainError);
    plan.omega_max = 5.0;
    EXPECT_NO_THROW(cosine_transform(series, plan));
}

TEST(CosineTransform, PlanNeedsDecay)
{
    const auto slow = tabulate([](double t) { return 1.0 / (1.0 + t); }, TimeGrid{0.0, 0.1, 100});
    EXPECT_THROW(make_plan(slow, 1.0, 11), DomainError);
    TransformPlan bad;
    bad.omega_min = 2.0;
    bad.omega_max = 1.0;
    EXPECT_THROW(bad.validate(), DomainError);
}

TEST(FastFluctuation, MatchesQuadratureOfRegimeFid)
{
    for (auto [alpha, tau, v] : {std::tuple{1.0, 0.1, 1.0}, std::tuple{0.3, 2.0, 1.5}, std::tuple{50.0, 0.01, 1.0}}) {
        auto f = [&](double t) { return fid_fast_fluct_regime(t, alpha, tau, v); };
        for (double w : {0.5, 1.0, 3.0, 10.0}) {
            const double ref = reference_transform(f, w);
            EXPECT_NEAR(lineshape_fast_fluct(w, alpha, tau, v), ref, 1e-9 * std::abs(ref))
                << alpha << " " << tau << " " << w;
        }
        const double area = gauss_kronrod<double, 61>::integrate(
            [&](double w) { return lineshape_fast_fluct(w, alpha, tau, v); }, 0.0, INFINITY, 20, 1e-12);
        EXPECT_NEAR(2.0 * area, 1.0, 1e-8);
    }
}

TEST(FastFluctuation, LorentzianCoreAndWings)
{
    const double alpha = 1.0, v = 1.0, tau = 0.01;
    const double gamma = 1.0 / (4.0 * alpha * tau);
    EXPECT_NEAR(lineshape_fast_fluct(0.0, alpha, tau, v) / lorentzian_core(0.0, alpha, tau), 1.0, 0.02);
    EXPECT_NEAR(lorentzian_core(gamma, alpha, tau), 0.5 / (kPi * gamma), 1e-15);

    const SpinEnsemble ens(500);
    const auto model = GaussianFluctuationModel::from_alpha(v / (3.0 * std::sqrt(250.0)), alpha, tau);
    const double w = 50.0;
    EXPECT_NEAR(wing_tail(w, ens, model), alpha * v * v / (2.0 * kPi * tau * std::pow(w, 4)), 1e-15);
}

TEST(StaticDisorder, ClosedFormIsK0)
{
    const double alpha = 2.0, v = 1.0;
    for (double w : {1e-3, 0.1, 1.0, 5.0}) {
        const double x = w * std::sqrt(2.0) / (v * std::sqrt(alpha));
        const double expected =
            std::exp(-0.25) / (kPi * v) * std::sqrt(2.0 / alpha) * boost::math::cyl_bessel_k(0, x);
        EXPECT_NEAR(lineshape_static_disorder(w, alpha, v), expected, 1e-14 * expected);
        EXPECT_NEAR(lineshape_static_disorder(-w, alpha, v), expected, 1e-14 * expected);
    }
    EXPECT_THROW(lineshape_static_disorder(0.0, alpha, v), DomainError);
}

TEST(StaticDisorder, MatchesQuadratureOfRegimeFid)
{
    const double alpha = 0.7, v = 1.3;
    auto f = [&](double t) { return fid_static_disorder_regime(t, alpha, v); };
    for (double w : {0.05, 0.4, 1.0, 3.0}) {
        const double ref = reference_transform(f, w);
        EXPECT_NEAR(lineshape_static_disorder(w, alpha, v), ref, 1e-9 * ref) << w;
    }
}

TEST(StaticDisorder, Asymptotes)
{
    const double alpha = 1.0, v = 1.0, scale = v * std::sqrt(alpha);
    EXPECT_NEAR(lineshape_static_disorder(1e-8 * scale, alpha, v) / static_disorder_log_asymptote(1e-8 * scale, alpha, v),
                1.0, 0.02);
    EXPECT_NEAR(lineshape_static_disorder(200 * scale, alpha, v) / static_disorder_exp_asymptote(200 * scale, alpha, v),
                1.0, 0.002);
}

TEST(Satellites, PairsMatchExplicitFormulas)
{
    const double eps = 0.3, big = 4.0, v = 1.2;
    const double pref = 1.0 / (v * std::sqrt(kPi));
    auto i1 = [&](double w) { return -0.5 * eps * pref * (1.0 + w / big) * std::exp(-(w + big) * (w + big) / (v * v)); };
    auto i2 = [&](double w) {
        return 0.25 * eps * eps * pref * std::pow(v / (2 * big), 2) * std::exp(-(w + 2 * big) * (w + 2 * big) / (v * v));
    };
    for (double w : {-9.0, -4.0, -1.0, 0.0, 2.5, 4.0, 8.0}) {
        EXPECT_NEAR(satellite_pair(1, w, eps, big, v), i1(w) + i1(-w), 1e-15);
        EXPECT_NEAR(satellite_pair(2, w, eps, big, v), i2(w) + i2(-w), 1e-15);
    }
    EXPECT_THROW(satellite_pair(3, 0.0, eps, big, v), DomainError);
}

TEST(Satellites, ExactTransformOfVibrationFid)
{
    for (auto [eps, big, v] : {std::tuple{0.5, 10.0, 1.0}, std::tuple{0.9, 1.5, 1.0}, std::tuple{2.0, -3.0, 0.7}}) {
        auto f = [&](double t) { return fid_vibration(t, v, eps, big); };
        for (double w : {0.0, 0.7, 1.5, 3.0, 10.0, 20.0}) {
            auto integrand = [&](double t) { return f(t) * std::cos(w * t); };
            const double ref = nmrcage::testing::panel_integral(integrand, 0.0, 14.0 / v, 400) / kPi;
            EXPECT_NEAR(lineshape_satellites(w, eps, big, v), ref, 1e-13) << eps << " " << big << " " << w;
        }
    }
}

TEST(Satellites, AreaIsUnity)
{
    const double eps = 0.6, big = 2.0, v = 1.0;
    const double area = gauss_kronrod<double, 61>::integrate(
        [&](double w) { return lineshape_satellites(w, eps, big, v); }, -40.0, 40.0, 30, 1e-15);
    EXPECT_NEAR(area, 1.0, 1e-12);
    const VibrationModel vib(1.0, eps, big);
    EXPECT_DOUBLE_EQ(lineshape_satellites(0.3, vib, v), lineshape_satellites(0.3, eps, big, v));
}

TEST(Inhomogeneous, EqualsFrequencyAverageOfSatellites)
{
    const double eps = 5.0, v = 1.0;
    const FrequencyDistribution dist(2.0 * kPi, 2.0);
    for (double w : {0.0, 1.0, 3.0, 6.0, 12.5, 20.0}) {
        auto integrand = [&](double big) { return frequency_density(big, dist) * lineshape_satellites(w, eps, big, v); };
        const double ref = gauss_kronrod<double, 61>::integrate(integrand, -25.0, 0.0, 30, 1e-15) +
                           gauss_kronrod<double, 61>::integrate(integrand, 0.0, 40.0, 30, 1e-15);
        EXPECT_NEAR(lineshape_inhomogeneous(w, eps, v, dist), ref, 1e-13) << w;
    }
}

TEST(Inhomogeneous, NarrowDistributionRecoversSingleFrequency)
{
    const double eps = 0.4, v = 1.0, big = 6.0;
    const FrequencyDistribution dist(big, 1e-4);
    for (double w : {0.0, 2.0, 5.5, 6.0, 12.0}) {
        EXPECT_NEAR(lineshape_inhomogeneous(w, eps, v, dist), lineshape_satellites(w, eps, big, v), 1e-7) << w;
    }
}

TEST(Inhomogeneous, DensityIsZeroAtOriginAndPeaksAboveMean)
{
    const FrequencyDistribution dist(3.0, 1.0);
    EXPECT_DOUBLE_EQ(frequency_density(0.0, dist), 0.0);
    // d/dW [W^2 exp(-(W - W0)^2 / D^2)] = 0 at W = (W0 + sqrt(W0^2 + 4 D^2)) / 2.
    const double peak = 0.5 * (3.0 + std::sqrt(9.0 + 4.0));
    EXPECT_GT(frequency_density(peak, dist), frequency_density(peak - 1e-3, dist));
    EXPECT_GT(frequency_density(peak, dist), frequency_density(peak + 1e-3, dist));
}
