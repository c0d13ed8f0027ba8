#pragma once

#include <complex>

namespace nmrcage::specfun {

/// Scaled complementary error function exp(z^2) erfc(z) for complex z.
///
/// Evaluated through the Faddeeva function w(iz) with Weideman's rational
/// expansion (40 terms) in the right half plane; the left half plane uses
/// erfcx(z) = 2 exp(z^2) - erfcx(-z), which overflows once Re(z^2) > ~709.
/// Relative error is below 1e-14 for Re z >= 0, |z| <= 1e3.
/// Throws DomainError for non-finite input.
std::complex<double> erfcx(std::complex<double> z);

/// Real-argument convenience overload.
double erfcx(double x);

struct K0Value {
    double value = 0.0;
    bool underflow = false;
};

/// Modified Bessel function K0(x) for x > 0 with an underflow indicator.
/// Power series for x <= 2, Temme/Steed continued fraction above. For
/// x > 700 the value is reported as 0 with underflow = true.
K0Value bessel_k0_checked(double x);

/// K0(x); throws DomainError for x <= 0 or non-finite x.
double bessel_k0(double x);

/// exp(x) K0(x), which stays representable for large x.
double bessel_k0_scaled(double x);

} // namespace nmrcage::specfun
