#pragma once

#include "dicke/model.hpp"

#include <random>

namespace fixtures {

inline constexpr double kG = dicke::kTwoPi * 0.935;

inline dicke::ModelParams params(int n, double delta_khz, int n_max = -1,
                                 dicke::SpinNormalization norm = dicke::SpinNormalization::FullPauli,
                                 double transverse_factor = 2.0) {
    return dicke::params_from_lab_units(n, 0.935, delta_khz, 7.0, 0.0, 0.0, 0.0, n_max, norm, transverse_factor);
}

// Spin-half operators with a unit transverse coefficient.
inline dicke::ModelParams textbook(int n, double delta_khz, int n_max = -1) {
    return params(n, delta_khz, n_max, dicke::SpinNormalization::HalfSpin, 1.0);
}

inline dicke::QuantumState random_state(std::size_t dim, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> nd;
    dicke::QuantumState v(static_cast<Eigen::Index>(dim));
    for (auto& x : v) x = {nd(rng), nd(rng)};
    return v.normalized();
}

} // namespace fixtures
