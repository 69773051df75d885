// Shifted harmonic h: lowest two bands against the effective prediction (k + ½)·spec(ĥ).
#include <cstdio>

#include "geoq/quantum_reduction.hpp"

using namespace geoq;

int main() {
    const double hbar = 0.1;
    const auto h = models::shifted_harmonic(1);
    const auto op = build_hamiltonian(GridSpec{4.0, 127}, h, hbar);
    const auto s = ladder_to_band(op, 1, 1);
    const auto rep = band_analysis(s, hbar);

    for (std::size_t i = 0; i < s.values.size(); ++i)
        std::printf("%3zu  %.6f  J=%.4f  band %d\n", i, s.values[i], s.fast_action[i], s.labels[i]);

    const auto oracle = oracle_h_spectrum(h, hbar, 8);
    const auto cmp = compare_bands(rep, {effective_prediction(oracle, 0), effective_prediction(oracle, 1)});
    std::printf("gap %.4f  max splitting %.4f  ratio %.2f\n", rep.gap, rep.max_splitting, rep.ratio);
    std::printf("worst level error %.2e  worst splitting error %.2e  gap error %.2e\n", cmp.max_level_error,
                cmp.max_splitting_error, cmp.gap_rel_error);
    for (const auto& w : cmp.warnings) std::printf("warning: %s\n", w.c_str());
}
