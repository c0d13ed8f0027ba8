#include "nmrcage/error.hpp"
#include "nmrcage/fid.hpp"
#include "nmrcage/spectrum.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "oracle.hpp"

#include <cmath>
#include <numbers>

using namespace nmrcage;
using boost::math::quadrature::gauss_kronrod;

TEST(PhaseShift, ConstantCouplingIsLinear)
{
    const CouplingTrajectory traj(0.0, 0.01, std::vector<double>(101, 4.0));
    const auto phi = phase_shift(traj);
    for (std::size_t k = 0; k < phi.size(); ++k) {
        EXPECT_NEAR(phi[k], 0.5 * 4.0 * 0.01 * static_cast<double>(k), 1e-13);
    }
}

TEST(PhaseShift, TrapezoidIsExactForLinearCoupling)
{
    std::vector<double> d;
    for (int k = 0; k <= 50; ++k) {
        d.push_back(1.0 + 3.0 * 0.1 * k);
    }
    const auto phi = phase_shift(CouplingTrajectory(0.0, 0.1, d));
    const double t = 5.0;
    EXPECT_NEAR(phi.back(), 0.5 * (t + 1.5 * t * t), 1e-12);
}

TEST(PhaseShift, RejectsShortOrBadTrajectories)
{
    EXPECT_THROW(CouplingTrajectory(0.0, 0.1, {1.0}), DomainError);
    EXPECT_THROW(CouplingTrajectory(0.0, 0.0, {1.0, 2.0}), DomainError);
}

TEST(FidForms, ExactAndLargeNAgreeForSmallPhase)
{
    const SpinEnsemble ens(2000);
    // cos(x)^(N-1) = exp(-(N-1) x^2/2 - (N-1) x^4/12 ...); compare in the log domain.
    for (double phi : {1e-4, 1e-3, 5e-3}) {
        const double x = 3.0 * phi;
        EXPECT_NEAR(std::log(fid_exact(phi, ens)), -(1999.0) * (x * x / 2 + x * x * x * x / 12), 1e-9);
        EXPECT_NEAR(std::log(fid_large_n(phi, ens)), -1000.0 * x * x, 1e-12);
    }
    EXPECT_DOUBLE_EQ(fid_exact(0.0, ens), 1.0);
    EXPECT_DOUBLE_EQ(fid_large_n(0.0, ens), 1.0);
}

TEST(FidForms, ExactIsEvenAndPeriodic)
{
    const SpinEnsemble ens(5);
    for (double phi : {0.1, 0.37, 1.2}) {
        EXPECT_NEAR(fid_exact(phi, ens), fid_exact(-phi, ens), 1e-15);
        EXPECT_NEAR(fid_exact(phi + std::numbers::pi / 3.0, ens), fid_exact(phi, ens), 1e-12);
    }
}

TEST(T2Correlation, MatchesDoubleIntegralOfExponentialCorrelation)
{
    // T^2 = (1/2) int_0^t int_0^t exp(-|s1 - s2| / tau) ds1 ds2 = int_0^t (t - s) exp(-s / tau) ds.
    for (double tau : {0.01, 1.0, 30.0}) {
        for (double t : {1e-6, 1e-3, 0.2, 5.0, 80.0}) {
            auto integrand = [&](double s) { return (t - s) * std::exp(-s / tau); };
            const double ref = nmrcage::testing::panel_integral(integrand, 0.0, t, std::max<std::size_t>(8, static_cast<std::size_t>(t / tau)));
            EXPECT_NEAR(t2_correlation(t, tau), ref, 1e-12 * ref) << "tau=" << tau << " t=" << t;
        }
    }
}

TEST(T2Correlation, SeriesBranchIsContinuous)
{
    const double tau = 2.0;
    const double t_switch = 0.1 * tau;
    const double below = t2_correlation(std::nextafter(t_switch, 0.0), tau);
    const double above = t2_correlation(t_switch, tau);
    EXPECT_NEAR(below, above, 1e-14 * above);
}

TEST(T2Correlation, FrozenLimit)
{
    EXPECT_DOUBLE_EQ(t2_correlation(3.0, kInfinity), 4.5);
    EXPECT_NEAR(t2_correlation(3.0, 1e9), 4.5, 1e-7);
    EXPECT_THROW(t2_correlation(-1.0, 1.0), DomainError);
}

// Average of exp(-(9N/2) phi^2) over phi ~ Normal(<D> t / 2, variance T^2 / 2), by quadrature.
double gaussian_average_oracle(double t, int n, double d, double variance, double tau_c)
{
    const double m = 0.5 * d * t;
    const double s2 = 0.5 * variance * t2_correlation(t, tau_c);
    if (s2 == 0.0) {
        return std::exp(-4.5 * n * m * m);
    }
    const double s = std::sqrt(s2);
    auto integrand = [&](double z) {
        const double phi = m + s * z;
        return std::exp(-4.5 * n * phi * phi - 0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    };
    // Gaussian in z: centre and standard deviation follow from completing the square.
    const double centre = -9.0 * n * s * m / (1.0 + 9.0 * n * s2);
    const double width = 12.0 / std::sqrt(1.0 + 9.0 * n * s2);
    return nmrcage::testing::panel_integral(integrand, centre - width, centre + width, 24);
}

TEST(FidGaussian, EqualsNoiseAverageOfLargeNForm)
{
    struct Case {
        int n;
        double d, variance, tau_c;
    };
    for (const auto& c : {Case{500, 1.0, 1.0, 0.1}, Case{500, 1.0, 100.0, 0.3}, Case{12, -2.0, 0.5, kInfinity},
                          Case{50, 0.0, 2.0, 1.0}, Case{500, 3.0, 0.0, 1.0}}) {
        const SpinEnsemble ens(c.n);
        const GaussianFluctuationModel model(c.d, c.variance, c.tau_c);
        for (double t : {0.0, 0.003, 0.02, 0.1, 0.5}) {
            const double ref = gaussian_average_oracle(t, c.n, c.d, c.variance, c.tau_c);
            EXPECT_NEAR(fid_gaussian(t, ens, model), ref, 1e-12 + 1e-10 * ref)
                << "n=" << c.n << " d=" << c.d << " var=" << c.variance << " tau=" << c.tau_c << " t=" << t;
        }
    }
}

TEST(FidGaussian, NuAlphaParameterization)
{
    const SpinEnsemble ens(500);
    const double d = 0.7, alpha = 3.0, tau = 0.4;
    const auto model = GaussianFluctuationModel::from_alpha(d, alpha, tau);
    const double v = nu(d, ens);
    for (double t : {0.1, 1.0, 4.0}) {
        const double g = 1.0 + alpha * v * v * t2_correlation(t, tau);
        const double expected = std::exp(-(t * t * v * v / 4.0) / g) / std::sqrt(g);
        EXPECT_NEAR(fid_gaussian(t, ens, model), expected, 1e-14);
    }
}

TEST(FidGaussian, BoundedAndMonotoneForNonzeroVariance)
{
    const SpinEnsemble ens(100);
    const auto model = GaussianFluctuationModel::from_alpha(1.0, 1.0, 0.2);
    double prev = fid_gaussian(0.0, ens, model);
    EXPECT_DOUBLE_EQ(prev, 1.0);
    for (double t = 0.01; t < 10.0; t += 0.01) {
        const double f = fid_gaussian(t, ens, model);
        EXPECT_LE(f, prev);
        EXPECT_GE(f, 0.0);
        prev = f;
    }
}

TEST(RegimeFids, FastFluctuationLimitOfGaussianFid)
{
    // For t >> tau_c and alpha nu^2 tau_c t >> 1 the full FID approaches the regime form.
    const SpinEnsemble ens(500);
    const double alpha = 1e4, v = 1.0, tau = 1e-3;
    const auto model = GaussianFluctuationModel::from_alpha(v / (3.0 * std::sqrt(250.0)), alpha, tau);
    const double t = 40.0;  // t / tau = 4e4, alpha nu^2 tau t = 400, regime exponent 1
    const double full = fid_gaussian(t, ens, model);
    const double regime = fid_fast_fluct_regime(t, alpha, tau, v);
    // The regime form drops 1 against alpha nu^2 tau t in the exponent: relative shift ~ 1/400.
    EXPECT_NEAR(full / regime, 1.0, 5e-3);
}

TEST(RegimeFids, StaticDisorderIsFrozenGaussianFidAtLargeTime)
{
    const SpinEnsemble ens(500);
    const double alpha = 0.5, v = 2.0;
    const auto model = GaussianFluctuationModel::from_alpha(v / (3.0 * std::sqrt(250.0)), alpha, kInfinity);
    for (double t : {1e3, 1e5}) {
        EXPECT_NEAR(fid_gaussian(t, ens, model) / fid_static_disorder_regime(t, alpha, v), 1.0, 1e-5);
    }
}

TEST(FidVibration, AgreesWithLargeNFormToSecondOrder)
{
    // The large-N FID of the analytic phase differs from the perturbative form at O(eps^2):
    // halving eps must cut the difference by ~4.
    const SpinEnsemble ens(500);
    const double d = 0.05;
    const double t = 0.9 / nu(d, ens);
    auto diff = [&](double eps) {
        const VibrationModel vib(d, eps, 3.0);
        return std::abs(fid_large_n(vibration_phase(t, vib), ens) - fid_vibration(t, ens, vib));
    };
    const double ratio = diff(0.02) / diff(0.01);
    EXPECT_NEAR(ratio, 4.0, 0.1);
}

TEST(FidVibration, ZeroAmplitudeIsGaussian)
{
    for (double t : {0.0, 0.5, 2.0}) {
        EXPECT_DOUBLE_EQ(fid_vibration(t, 1.3, 0.0, 5.0), std::exp(-0.25 * 1.69 * t * t));
    }
    EXPECT_NEAR(fid_vibration(0.7, 1.0, 0.3, -4.0), fid_vibration(0.7, 1.0, 0.3, 4.0), 1e-15);
    EXPECT_THROW(fid_vibration(0.7, 1.0, 0.3, 0.0), DomainError);
}

TEST(FidVibrationEnsemble, EqualsFrequencyAverageOfSingleFrequencyFid)
{
    const double v = 1.0, eps = 5.0;
    const FrequencyDistribution dist(2.0 * std::numbers::pi, 2.0);
    for (double t : {0.0, 0.3, 1.1, 2.5, 5.0}) {
        auto integrand = [&](double w) { return frequency_density(w, dist) * fid_vibration(t, v, eps, w); };
        // Over the whole real axis; the density vanishes at 0, where the integrand is finite.
        const double ref = nmrcage::testing::panel_integral(integrand, -30.0, 0.0, 60) +
                           nmrcage::testing::panel_integral(integrand, 0.0, 60.0, 120);
        EXPECT_NEAR(fid_vibration_ensemble(t, v, eps, dist), ref, 1e-13) << t;
    }
}

TEST(Horizon, StopsAfterDecay)
{
    auto f = [](double t) { return std::exp(-t); };
    const auto grid = fid_horizon(f, 0.1);
    EXPECT_GE(std::exp(-grid.time(grid.n - 2)), 1e-10);
    EXPECT_LT(std::exp(-grid.t_end()), 1e-10);
}

TEST(Horizon, RespectsCapAndDefaultGrid)
{
    auto slow = [](double t) { return 1.0 / (1.0 + t); };
    HorizonOptions options;
    options.t_cap = 5.0;
    const auto capped = fid_horizon(slow, 0.5, options);
    EXPECT_LE(capped.t_end(), 5.0);
    const auto g = default_fid_grid(slow, 2.0, 0.0, kInfinity);
    EXPECT_DOUBLE_EQ(g.dt, 0.025);
    EXPECT_LE(g.t_end(), 25.0 + 1e-12);
    EXPECT_THROW(default_fid_grid(slow, 0.0, 0.0, kInfinity), DomainError);
}

TEST(Tabulate, SamplesOnGrid)
{
    const auto s = tabulate([](double t) { return t * t; }, TimeGrid{1.0, 0.5, 4});
    ASSERT_EQ(s.size(), 4u);
    EXPECT_DOUBLE_EQ(s.values[3], 6.25);
    EXPECT_DOUBLE_EQ(s.time(2), 2.0);
}
