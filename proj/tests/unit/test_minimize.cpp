#include <gtest/gtest.h>

#include <cmath>

#include "mesomem/minimize.hpp"
#include "oracles.hpp"

using namespace mesomem;

namespace {

ModelParams params(double c, double eps) {
    ModelParams p;
    p.c = c;
    p.eps = eps;
    return p;
}

}  // namespace

TEST(MinimizeOptions, Validates) {
    MinimizeOptions o;
    o.max_iters = 0;
    EXPECT_THROW(o.validate(), DomainError);
    o.max_iters = 1;
    o.grad_tol = 0.0;
    EXPECT_THROW(o.validate(), DomainError);
}

TEST(MinimizeFixedPhase, PurePhaseIsGlobalMinimum) {
    const Grid g = Grid::line(256);
    const auto r = minimize_fixed_phase(PhaseMap(g, 1), params(1.0, 0.04));
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.energy, 0.0, 1e-12);
    for (double v : r.M.values) EXPECT_NEAR(v, 1.0, 1e-12);
}

TEST(MinimizeFixedPhase, HalfIntervalMatchesTransitionEnergy) {
    for (auto [eps, n] : {std::pair{0.04, std::size_t{4096}}, std::pair{0.01, std::size_t{16384}}}) {
        const auto p = params(1.0, eps);
        const Grid g = Grid::line(n);
        const auto r = minimize_fixed_phase(rasterize(g, PhaseShape::half()), p);
        EXPECT_TRUE(r.converged);
        const double expected = oracle::transition_energy_quadrature(1.0, eps);
        EXPECT_NEAR(r.energy, expected, 0.01 * expected) << eps;
    }
}

TEST(MinimizeFixedPhase, EnergyNeverIncreases) {
    oracle::Random rng(4);
    const auto p = params(1.0, 0.04);
    const Grid g = Grid::line(128);
    const PhaseMap chi = rasterize(g, PhaseShape::half());
    GridField M = oracle::random_field(g, rng);
    double prev = grid_energy(M, chi, p);
    for (int k = 0; k < 30; ++k) {
        MinimizeOptions o;
        o.max_iters = 1;
        const auto r = minimize_fixed_phase(chi, M, p, o);
        EXPECT_LE(r.energy, prev);
        prev = r.energy;
        M = r.M;
    }
}

TEST(MinimizeFixedPhase, FixedStepRuleAlsoDescends) {
    const auto p = params(1.0, 0.04);
    const Grid g = Grid::line(128);
    const PhaseMap chi = rasterize(g, PhaseShape::half());
    MinimizeOptions o;
    o.step_rule = StepRule::fixed;
    o.max_iters = 200;
    const GridField M0 = well_bottoms(chi, p);
    const auto r = minimize_fixed_phase(chi, M0, p, o);
    EXPECT_LT(r.energy, grid_energy(M0, chi, p));
}

TEST(MinimizeFixedPhase, IterationCapIsFlagged) {
    const auto p = params(1.0, 0.04);
    const Grid g = Grid::line(512);
    MinimizeOptions o;
    o.max_iters = 2;
    o.grad_tol = 1e-14;
    const auto r = minimize_fixed_phase(rasterize(g, PhaseShape::half()), p, o);
    EXPECT_FALSE(r.converged);
    EXPECT_EQ(r.iterations, 2);
    EXPECT_FALSE(r.warnings.empty());
}

TEST(MinimizeFixedPhase, UnderResolvedGridWarns) {
    const auto p = params(1.0, 0.04);
    const auto r = minimize_fixed_phase(rasterize(Grid::line(16), PhaseShape::half()), p);
    bool found = false;
    for (const auto& w : r.warnings) found |= w.find("exceeds eps/4") != std::string::npos;
    EXPECT_TRUE(found);
}

TEST(WellBottoms, PerPhaseValues) {
    const Grid g = Grid::line(64);
    const GridField M = well_bottoms(rasterize(g, PhaseShape::half()), params(1.0, 0.04));
    EXPECT_NEAR(M[0], 0.8, 1e-15);
    EXPECT_EQ(M[63], 1.0);
}

TEST(MinimizeAlternating, PurePhases) {
    const Grid g = Grid::line(128);
    const auto p = params(1.0, 0.04);
    const auto one = minimize_alternating(GridField(g, 1.0), p);
    EXPECT_NEAR(one.energy, 0.0, 1e-12);
    for (Phase v : one.chi.values) EXPECT_EQ(v, 1);
    const auto zero = minimize_alternating(GridField(g, 0.8), p);
    EXPECT_NEAR(zero.energy, 0.0, 1e-12);
    for (Phase v : zero.chi.values) EXPECT_EQ(v, 0);
    for (double v : zero.M.values) EXPECT_NEAR(v, 0.8, 1e-12);
}

TEST(MinimizeAlternating, ProfileInitialSplitsAtTheMiddle) {
    const auto p = params(1.0, 0.04);
    const Grid g = Grid::line(4096);
    const GridField M0 = profile_field(signed_distance(g, PhaseShape::half()), p);
    const auto r = minimize_alternating(M0, p);
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.chi.values, rasterize(g, PhaseShape::half()).values);
    EXPECT_NEAR(r.energy, 0.3928371, 0.01 * 0.3928371);
}

TEST(MinimizeAlternating, ThresholdIsOptimalForFinalField) {
    oracle::Random rng(8);
    const auto p = params(1.0, 0.04);
    const Grid g = Grid::line(256);
    const auto r = minimize_alternating(oracle::random_field(g, rng), p);
    for (int k = 0; k < 200; ++k) EXPECT_LE(r.energy, grid_energy(r.M, oracle::random_phase(g, rng), p));
}

TEST(EpsilonSweep, PurePhaseHasZeroGaps) {
    SweepOptions so;
    const Grid g = Grid::line(128);
    const auto rep = epsilon_sweep(PhaseShape::from_map(PhaseMap(g, 1)), {0.04, 0.01}, params(1.0, 0.04), {}, so);
    for (const auto& r : rep.records) {
        EXPECT_NEAR(r.min_energy, 0.0, 1e-12);
        EXPECT_EQ(r.limit_energy, 0.0);
        EXPECT_NEAR(r.gap, 0.0, 1e-12);
    }
}

TEST(EpsilonSweep, HalfIntervalGapShrinks) {
    SweepOptions so;
    const auto rep = epsilon_sweep(PhaseShape::half(), {0.04, 0.01, 0.0025}, params(1.0, 0.04), {}, so);
    ASSERT_EQ(rep.records.size(), 3u);
    for (std::size_t k = 1; k < 3; ++k) EXPECT_LT(rep.records[k].gap, rep.records[k - 1].gap);
    EXPECT_LE(rep.records.back().gap, 0.03);
    for (const auto& r : rep.records) {
        EXPECT_LE(r.min_energy, r.profile_energy + 1e-12);
        EXPECT_GE(static_cast<double>(r.nodes_per_axis) * r.eps, 4.0 - 1e-9);
    }
}

TEST(EpsilonSweep, ProfileGapDecreasesInEps) {
    SweepOptions so;
    const auto rep = epsilon_sweep(PhaseShape::half(), {0.04, 0.02, 0.01, 0.005}, params(1.0, 0.04), {}, so);
    for (std::size_t k = 1; k < rep.records.size(); ++k) {
        const double g0 = energy_gap(rep.records[k - 1].profile_energy, rep.records[k - 1].limit_energy);
        const double g1 = energy_gap(rep.records[k].profile_energy, rep.records[k].limit_energy);
        EXPECT_LT(g1, g0);
    }
}

TEST(EpsilonSweep, RejectsNonDecreasingList) {
    EXPECT_THROW(epsilon_sweep(PhaseShape::half(), {0.01, 0.04}, params(1.0, 0.04)), DomainError);
}

TEST(EpsilonSweep, DeterministicTimingsAreZero) {
    SweepOptions so;
    so.deterministic = true;
    const auto rep = epsilon_sweep(PhaseShape::half(), {0.04}, params(1.0, 0.04), {}, so);
    EXPECT_EQ(rep.records[0].seconds, 0.0);
}
