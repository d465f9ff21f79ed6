#pragma once

// Centralized numeric tolerances and defaults. Kernel tolerances keep at
// least four digits of headroom below the TEBD truncation cutoff.

namespace kz::tol {

inline constexpr double svd_reconstruction = 1e-12;
inline constexpr double hermiticity = 1e-12;
inline constexpr double kernel_unitarity = 1e-12;
inline constexpr double gate_unitarity = 1e-10;
inline constexpr double isometry = 1e-10;
inline constexpr double state_norm = 1e-10;
inline constexpr double expectation_imag = 1e-10;

} // namespace kz::tol

namespace kz::defaults {

inline constexpr double trunc_cutoff = 1e-8;
inline constexpr int chi_max = 256;
inline constexpr double dt = 0.05;
inline constexpr double ramp_start = 5.0;

} // namespace kz::defaults
