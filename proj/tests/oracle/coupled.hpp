#pragma once

#include <utility>

#include "fd_fluxonium.hpp"

namespace oracle {

// Dressed resonator frequencies (omega_r0, omega_r1) from exact
// diagonalisation of qubit (x) resonator with H_int = g n (a + a^dagger),
// states labelled by largest overlap with the bare product states.
std::pair<double, double> coupled_dressed_frequencies(const FdSpectrum& qubit, double g, double omega_r,
                                                      int photons = 6);

}  // namespace oracle
