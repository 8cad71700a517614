#pragma once

namespace nvrotor {

// 2018 CODATA reduced Planck constant, J s
inline constexpr double hbar = 1.054571817e-34;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

} // namespace nvrotor
