// Two concentric circles as a family: energies, masses and the sampled overlap test.

#include <cstdio>
#include <vector>

#include "mesomem/energy.hpp"

int main() {
    using namespace mesomem;
    ModelParams p;
    p.c = 1.0;
    p.eps = 0.05;
    std::vector<Configuration> family;
    for (double R : {1.0, 3.0}) {
        PeriodicCurve c = make_circle(R, 1024);
        const std::size_t n = c.size();
        family.push_back(Configuration::normal_rays(std::move(c), std::vector<Phase>(n, 1), std::vector<double>(n, 1.0)));
    }
    const FamilyReport fr = family_energy(family, p, {0.0, 8.0 * 3.14159265358979});
    std::printf("family energy %.8f  (P %.8f, G %.8f)\n", fr.value, fr.separation, fr.bending);
    std::printf("masses m1 %.8f m2 %.8f  residuals %.2e %.2e\n", fr.masses.m1, fr.masses.m2, fr.residuals.m1,
                fr.residuals.m2);
    std::printf("overlap (sampled): %s\n", fr.overlap.pass ? "none" : fr.overlap.witness->reason.c_str());
}
