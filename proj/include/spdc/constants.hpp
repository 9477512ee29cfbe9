#pragma once

namespace spdc {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 6.28318530717958647692;
inline constexpr double kLn2 = 0.69314718055994530942;

// x solving sinc^2(x) = 1/2; maps a sinc^2 envelope FWHM onto its argument scale.
inline constexpr double kSincSqHalfArg = 1.39155737825151;

// FWHM = kGaussFwhmPerSigma * sigma for a Gaussian.
inline constexpr double kGaussFwhmPerSigma = 2.35482004503094938202;

inline constexpr double kPicosecond = 1e-12;

}  // namespace spdc
