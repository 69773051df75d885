// Flat h on a box: the spectrum piles up at J = k + ½, with edge states in between.
#include <cstdio>

#include "geoq/quantum_reduction.hpp"

using namespace geoq;

int main() {
    const double hbar = 0.1;
    const auto op = build_hamiltonian(GridSpec{2.0, 127}, models::constant(1), hbar);
    const auto s = spectrum_below(op, 2.0, 1);
    std::printf("%zu eigenvalues up to %.4f in %d windows\n", s.values.size(), s.values.back(), s.windows);
    const auto levels = degenerate_levels(s.values, 1e-3, 5);
    for (std::size_t k = 0; k < levels.size(); ++k) std::printf("level %zu: %.6f  (k + 1/2 = %.1f)\n", k, levels[k], k + 0.5);
}
