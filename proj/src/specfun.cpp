#include "nmrcage/specfun.hpp"

#include "nmrcage/error.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace nmrcage::specfun {

namespace {

constexpr int kWeidemanTerms = 40;

struct WeidemanTable {
    double L = 0.0;
    std::array<double, kWeidemanTerms> c{};  // c[n-1] multiplies Z^(n-1)
};

// Coefficients of the expansion of (L^2 + t^2) exp(-t^2) in the Takenaka-
// Malmquist basis, from a 4N-point cosine sum over t = L tan(theta / 2).
WeidemanTable make_weideman_table()
{
    constexpr int n = kWeidemanTerms;
    constexpr int m = 2 * n;
    constexpr int m2 = 2 * m;
    WeidemanTable table;
    table.L = std::sqrt(n / std::numbers::sqrt2);
    const double l2 = table.L * table.L;

    std::array<double, m> g{};
    g[0] = l2;
    for (int k = 1; k < m; ++k) {
        const double t = table.L * std::tan(0.5 * k * std::numbers::pi / m);
        g[k] = std::exp(-t * t) * (l2 + t * t);
    }
    for (int j = 1; j <= n; ++j) {
        double sum = g[0];
        for (int k = 1; k < m; ++k) {
            sum += 2.0 * g[k] * std::cos(2.0 * std::numbers::pi * k * j / m2);
        }
        table.c[j - 1] = sum / m2;
    }
    return table;
}

const WeidemanTable& weideman_table()
{
    static const WeidemanTable table = make_weideman_table();
    return table;
}

// erfcx(z) = w(iz) for Re z >= 0.
std::complex<double> erfcx_right_half(std::complex<double> z)
{
    const auto& table = weideman_table();
    const std::complex<double> denom = table.L + z;
    const std::complex<double> big_z = (table.L - z) / denom;
    std::complex<double> p = table.c[kWeidemanTerms - 1];
    for (int j = kWeidemanTerms - 2; j >= 0; --j) {
        p = p * big_z + table.c[j];
    }
    return 2.0 * p / (denom * denom) + std::numbers::inv_sqrtpi / denom;
}

constexpr double kEulerGamma = std::numbers::egamma;

double k0_series(double x)
{
    const double y = 0.25 * x * x;
    double term = 1.0;
    double i0 = 1.0;
    double harmonic = 0.0;
    double tail = 0.0;
    for (int k = 1; k < 100; ++k) {
        term *= y / (static_cast<double>(k) * k);
        harmonic += 1.0 / k;
        i0 += term;
        tail += term * harmonic;
        if (term < 1e-18 * i0) {
            break;
        }
    }
    return -(std::log(0.5 * x) + kEulerGamma) * i0 + tail;
}

// Steed's evaluation of Temme's second continued fraction; returns exp(x) K0(x).
double k0_scaled_cf(double x)
{
    double b = 2.0 * (1.0 + x);
    double d = 1.0 / b;
    double delh = d;
    double h = d;
    double q1 = 0.0;
    double q2 = 1.0;
    const double a1 = 0.25;
    double q = a1;
    double c = a1;
    double a = -a1;
    double s = 1.0 + q * delh;
    for (int i = 2; i < 10000; ++i) {
        a -= 2.0 * (i - 1);
        c = -a * c / i;
        const double qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        const double dels = q * delh;
        s += dels;
        if (std::abs(dels / s) < 1e-17) {
            break;
        }
    }
    return std::sqrt(std::numbers::pi / (2.0 * x)) / s;
}

// K0(700) ~ 5e-306; beyond this the value drifts into subnormals.
constexpr double kK0UnderflowArg = 700.0;

void require_positive_finite(double x)
{
    require(std::isfinite(x), "bessel_k0: argument must be finite");
    require(x > 0.0, "bessel_k0: argument must be positive");
}

} // namespace

std::complex<double> erfcx(std::complex<double> z)
{
    require(std::isfinite(z.real()) && std::isfinite(z.imag()), "erfcx: argument must be finite");
    if (z.real() >= 0.0) {
        return erfcx_right_half(z);
    }
    return 2.0 * std::exp(z * z) - erfcx_right_half(-z);
}

double erfcx(double x)
{
    return erfcx(std::complex<double>(x, 0.0)).real();
}

K0Value bessel_k0_checked(double x)
{
    require_positive_finite(x);
    if (x <= 2.0) {
        return {k0_series(x), false};
    }
    if (x > kK0UnderflowArg) {
        return {0.0, true};
    }
    return {k0_scaled_cf(x) * std::exp(-x), false};
}

double bessel_k0(double x)
{
    return bessel_k0_checked(x).value;
}

double bessel_k0_scaled(double x)
{
    require_positive_finite(x);
    if (x <= 2.0) {
        return k0_series(x) * std::exp(x);
    }
    return k0_scaled_cf(x);
}

} // namespace nmrcage::specfun
