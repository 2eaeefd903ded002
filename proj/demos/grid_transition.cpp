// One-dimensional phase transition: minimized grid energy against the closed form
// of a single optimal transition and the sharp-interface line tension.

#include <cstdio>

#include "mesomem/minimize.hpp"

int main() {
    using namespace mesomem;
    ModelParams p;
    p.c = 1.0;
    SweepOptions so;
    const SweepReport rep = epsilon_sweep(PhaseShape::half(), {0.04, 0.01, 0.0025}, p, {}, so);
    std::printf("%-8s %-10s %-12s %-12s %-10s %s\n", "eps", "nodes", "minimized", "closed form", "limit", "gap");
    for (const auto& r : rep.records)
        std::printf("%-8g %-10zu %-12.7f %-12.7f %-10.7f %.3f%%\n", r.eps, r.nodes_per_axis, r.min_energy,
                    transition_energy(p.with_eps(r.eps)), r.limit_energy, 100.0 * r.gap);
}
