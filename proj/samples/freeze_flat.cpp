// Constant h: the guiding center X must not move while ξ circles it.
#include <cstdio>

#include "geoq/extended_dynamics.hpp"

using namespace geoq;

int main() {
    const double hbar = 0.05;
    const auto model = make_model(models::constant(1));
    Vec xi0(2);
    xi0 << 0.3, -0.2;
    ClassicalScenario sc;
    sc.model = model;
    sc.xi0 = xi0;
    const ExtendedState s0 = initial_state(sc, hbar);
    const double T = 100 * cyclotron_period(model, s0.xi, hbar);

    const auto traj = integrate_extended(s0, T, model, hbar, {});
    std::printf("steps %ld  energy drift %.2e\n", traj.stats.steps, traj.stats.max_energy_drift);
    std::printf("guiding center drift over 100 periods: %.3e\n", guiding_center_drift(traj));
    std::printf("gyroradius %.6f (sqrt(2 hbar J0) = %.6f)\n", (traj.states.back().xi - traj.guiding.back().X).norm(),
                std::sqrt(2 * hbar));
}
