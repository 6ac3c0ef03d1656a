#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace ctsim {

// Units used throughout: frequencies and energies (E/h) in MHz, times in
// microseconds, angles in radians.  Angular quantities carry an explicit
// 2*pi, so omega (rad/us) = two_pi * f (MHz).
inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

// h * 1 MHz / k_B in kelvin: converts an energy in MHz to a temperature.
// Boltzmann weights are exp(-boltzmann_k_per_mhz * E_mhz / T_k).
inline constexpr double boltzmann_k_per_mhz = 4.799243e-5;

using cplx = std::complex<double>;
inline constexpr cplx iu{0.0, 1.0};

// All recoverable failures (bad input, violated preconditions, infeasible
// numeric requests) surface as this type with a human-readable message.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

[[noreturn]] inline void fail(const std::string& msg) { throw Error(msg); }

}  // namespace ctsim
