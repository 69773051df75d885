// Geometric sanity: dθ = ω for each gauge, integral periods, and the CCR on a Gaussian section.
#include <cstdio>

#include "geoq/phase_space.hpp"
#include "geoq/prequantum.hpp"

using namespace geoq;

int main() {
    const auto pts = random_points(1, 500, 7);
    const std::vector<std::pair<const char*, GaugePotential>> gs{
        {"canonical", gauges::canonical(1)},
        {"symmetric", gauges::symmetric(1)},
        {"shifted", gauge_transform(gauges::symmetric(1), qp_gauge_function(1))}};
    for (const auto& [name, th] : gs)
        std::printf("%-10s max |dθ - ω| = %.2e\n", name, gauge_check(th, pts, 1e-10).max_residual);

    const auto torus = kostant_flux(surfaces::flat_torus(2 * std::sqrt(std::numbers::pi)));
    std::printf("torus of area 4π: flux/2π = %.10f\n", torus.flux_over_2pi);
    const auto s2 = kostant_flux(surfaces::sphere(2, {0, 1, 2}));
    std::printf("sphere through (q¹, q², p₁): flux/2π = %.3e\n", s2.flux_over_2pi);

    for (int n : {64, 128, 256})
        std::printf("CCR residual on %d² nodes: %.3e\n", n, ccr_residual(gaussian_section(probe_grid(n), kProbeGaussian), 0.1));
}
