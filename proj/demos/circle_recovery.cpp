// Recovery sequence for the unit circle split into two half arcs.

#include <cstdio>
#include <numbers>

#include "mesomem/recovery.hpp"

int main() {
    using namespace mesomem;
    const PeriodicCurve circle = make_circle(1.0, 16384);
    const PhaseCurve pc = PhaseCurve::from_arcs(circle, {{0.0, std::numbers::pi}});
    ModelParams p;
    p.c = 1.0;
    const RecoveryReport rep = limsup_report(pc, {1e-1, 1e-2, 1e-3}, p, default_targets(pc));
    std::printf("limit: quarter %.7f  half %.7f\n", rep.limit.quarter_total(), rep.limit.half_total());
    for (const auto& r : rep.records)
        std::printf("eps %-6g r %+.4e t %+.4e  E %.6f  G %.6f  total %.6f  gap %.2f%%  %s\n", r.eps, r.r, r.t,
                    r.E_part, r.G_part, r.total, 100.0 * r.gap, r.converged ? "" : r.message.c_str());
}
