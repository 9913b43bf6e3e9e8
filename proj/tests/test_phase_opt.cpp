/**
 * @file test_phase_opt.cpp
 * @brief RIS phase design: gain matrices, the penalized SDP, extraction and
 * the benchmark phase rules.
 */
#include "xlris/phase_opt.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

using namespace xlris;

namespace {

ChannelSet make_channels(std::uint64_t seed, const SystemConfig &cfg = desk_profile())
{
    Rng rng(seed);
    ChannelSet ch = build_channels(cfg, draw_geometry(cfg, rng));
    ch.theta = random_phases(ch.N, rng);
    return ch;
}

/// Random Hermitian PSD matrix of rank @p r.
CMat random_psd(int n, int r, Rng &rng)
{
    CMat G(n, r);
    for (int j = 0; j < r; ++j)
        for (int i = 0; i < n; ++i) G(i, j) = rng.cn();
    return G * G.adjoint();
}

/// Best min_k v^H R_k v over a uniform grid of @p levels phases, first phase fixed at 0.
double grid_optimum(const std::vector<CMat> &R, int levels)
{
    const int N = static_cast<int>(R[0].rows());
    RVec theta = RVec::Zero(N);
    double best = 0.0;
    int total = 1;
    for (int n = 1; n < N; ++n) total *= levels;
    for (int idx = 0; idx < total; ++idx) {
        int rest = idx;
        for (int n = 1; n < N; ++n) {
            theta(n) = 2.0 * kPi * (rest % levels) / levels;
            rest /= levels;
        }
        best = std::max(best, min_gain(R, theta));
    }
    return best;
}

} // namespace

TEST(GainMatrix, HermitianAndPositiveSemidefinite)
{
    const ChannelSet ch = make_channels(1);
    for (int k = 0; k < ch.Kf(); ++k) {
        const CMat R = build_Rk(ch, k, {0, 2, 3});
        EXPECT_LE((R - R.adjoint()).cwiseAbs().maxCoeff(), 1e-12 * R.cwiseAbs().maxCoeff());
        Eigen::SelfAdjointEigenSolver<CMat> es(R);
        EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10 * es.eigenvalues().maxCoeff());
    }
}

TEST(GainMatrix, SingleElementLineOfSight)
{
    SystemConfig cfg = desk_profile();
    cfg.N1 = 1;
    cfg.N2 = 1;
    ChannelSet ch = make_channels(2, cfg);
    ch.alpha2 = std::sqrt(cfg.zeta());
    ch.beta2 = 0.0;
    const CMat R = build_Rk(ch, 0, {0, 1, 2, 3});
    // |Hbar entries| = 1, so alpha^2 ||Hbar row||^2 = zeta M and |h|^2 = varsigma.
    EXPECT_NEAR(R(0, 0).real(), cfg.varsigma() * cfg.zeta() * cfg.M(), 1e-12 * R(0, 0).real());
}

TEST(GainMatrix, ScatteredPartCountsActiveAntennas)
{
    const SystemConfig cfg = desk_profile();
    ChannelSet ch = make_channels(3, cfg);
    ch.alpha2 = 0.0;
    const std::vector<int> set{1, 3};
    const CMat R = build_Rk(ch, 1, set);
    const double trDD = static_cast<double>(ch.Mstar * set.size());
    const CMat expect = ch.beta2 * ch.beta2 * trDD * ch.h.col(1).cwiseAbs2().asDiagonal().toDenseMatrix().cast<cd>();
    EXPECT_LT((R - expect).norm(), 1e-12 * expect.norm());
}

TEST(GainMatrix, QuadraticFormIsExpectedMaskedGain)
{
    SystemConfig cfg = desk_profile();
    cfg.Mx = 4;
    cfg.My = 4;
    const ChannelSet ch = make_channels(4, cfg);
    const std::vector<int> set{0, 3};
    const CVec v = phase_vector(ch.theta);
    const double f = std::real(v.dot(build_Rk(ch, 0, set) * v));
    Rng rng(40);
    const int draws = 10000;
    double sum = 0.0, sum2 = 0.0;
    for (int n = 0; n < draws; ++n) {
        const CMat H2 = compose_h2(ch, sample_nlos(ch.N, ch.M, rng));
        double g = 0.0;
        for (int s : set) g += cascaded_channel(ch, H2, 0, s).squaredNorm();
        sum += g;
        sum2 += g * g;
    }
    const double mean = sum / draws;
    const double se = std::sqrt((sum2 / draws - mean * mean) / draws);
    EXPECT_LE(std::abs(mean - f), 3.0 * se);
}

TEST(GainMatrix, InvalidInputsRejected)
{
    const ChannelSet ch = make_channels(5);
    EXPECT_THROW(build_Rk(ch, 0, {}), ConfigError);
    EXPECT_THROW(build_Rk(ch, ch.Kf(), {0}), InputError);
}

TEST(InnerSdp, SingleElementIsForced)
{
    std::vector<CMat> R{CMat::Constant(1, 1, cd(2.5, 0.0)), CMat::Constant(1, 1, cd(1.5, 0.0))};
    const InnerSolution s = solve_inner(R, CMat::Ones(1, 1), 0.0);
    EXPECT_NEAR(s.V(0, 0).real(), 1.0, 1e-12);
    EXPECT_NEAR(s.t, 1.5, 1e-7);
}

TEST(InnerSdp, RelaxationBoundsRankOnePoints)
{
    Rng rng(6);
    std::vector<CMat> R{random_psd(5, 2, rng), random_psd(5, 3, rng)};
    const InnerSolution s = solve_inner(R, CMat::Identity(5, 5), 0.0);
    ASSERT_TRUE(s.status == conic::SolveStatus::Optimal || s.status == conic::SolveStatus::NearOptimal);
    for (int i = 0; i < s.V.rows(); ++i) EXPECT_NEAR(s.V(i, i).real(), 1.0, 1e-12);
    for (int trial = 0; trial < 200; ++trial)
        EXPECT_GE(s.t, min_gain(R, random_phases(5, rng)) * (1.0 - 1e-9));
}

TEST(InnerSdp, SingleUserWithinTwoPercentOfPhaseGrid)
{
    Rng rng(7);
    const std::vector<CMat> R{random_psd(3, 3, rng)};
    const double grid = grid_optimum(R, 16);
    const InnerSolution s = solve_inner(R, CMat::Identity(3, 3), 0.0);
    EXPECT_GE(s.t, grid * (1.0 - 1e-9));
    EXPECT_LE(s.t, 1.02 * grid);
    PhaseProblem p;
    p.R = R;
    const PhaseSolution sol = run_penalty(p, CMat::Identity(3, 3));
    EXPECT_NEAR(sol.t_phases, grid, 0.02 * grid);
}

TEST(Penalty, RankOneStartNeedsNoScaling)
{
    Rng rng(8);
    PhaseProblem p;
    p.R = {random_psd(4, 2, rng), random_psd(4, 2, rng)};
    const CVec v = phase_vector(random_phases(4, rng));
    const CMat V0 = v * v.adjoint();
    EXPECT_LT(rank_one_residual(V0), 1e-12);
    const PhaseSolution sol = run_penalty(p, V0);
    EXPECT_EQ(sol.outer_scalings, 0);
    EXPECT_TRUE(sol.rank_one);
}

class PenaltyOnDeskChannels : public ::testing::TestWithParam<std::uint64_t> {
protected:
    void SetUp() override
    {
        SystemConfig cfg = desk_profile();
        cfg.N1 = 2;
        cfg.N2 = 4; // N = 8, Kf = 2
        ChannelSet ch = make_channels(GetParam(), cfg);
        problem.tol = cfg.tol;
        for (int k = 0; k < ch.Kf(); ++k) problem.R.push_back(build_Rk(ch, k, {0, 1, 2, 3}));
        Rng rng(GetParam() + 1000);
        // Random Hermitian PSD start with unit diagonal.
        CMat G = random_psd(8, 8, rng);
        RVec d = G.diagonal().real().cwiseSqrt().cwiseInverse();
        V0 = d.asDiagonal() * G * d.asDiagonal();
        sol = run_penalty(problem, V0);
    }
    PhaseProblem problem;
    CMat V0;
    PhaseSolution sol;
};

TEST_P(PenaltyOnDeskChannels, ConvergesToRankOne)
{
    EXPECT_TRUE(sol.rank_one);
    EXPECT_LE(sol.residual, 1e-4);
    EXPECT_LE(sol.outer_scalings, 7);
    Eigen::SelfAdjointEigenSolver<CMat> es(sol.V);
    const auto ev = es.eigenvalues();
    EXPECT_LE(ev(ev.size() - 2) / ev(ev.size() - 1), 1e-3);
}

TEST_P(PenaltyOnDeskChannels, InnerObjectiveNonDecreasing)
{
    for (std::size_t i = 1; i < sol.trace.size(); ++i) {
        if (sol.trace[i].outer != sol.trace[i - 1].outer) continue;
        EXPECT_GE(sol.trace[i].objective, sol.trace[i - 1].objective - 1e-8) << "row " << i;
    }
}

TEST_P(PenaltyOnDeskChannels, IteratesStayFeasible)
{
    for (const auto &row : sol.trace) EXPECT_GE(row.min_eig, -1e-7);
    for (int i = 0; i < sol.V.rows(); ++i) EXPECT_EQ(sol.V(i, i), cd(1.0, 0.0));
}

TEST_P(PenaltyOnDeskChannels, GainNonIncreasingAsPenaltyGrows)
{
    double last = std::numeric_limits<double>::infinity();
    int outer = -1;
    for (const auto &row : sol.trace) {
        if (row.outer == outer) {
            last = row.t;
            continue;
        }
        // First row of a new penalty value against the final row of the previous one.
        if (outer >= 0) EXPECT_LE(row.t, last * (1.0 + 1e-6)) << "outer " << row.outer;
        outer = row.outer;
        last = row.t;
    }
}

TEST_P(PenaltyOnDeskChannels, ExtractionKeepsMostOfTheSdpValue)
{
    EXPECT_GE(sol.t_phases, 0.95 * sol.t_sdp);
    for (int n = 0; n < sol.theta.size(); ++n) {
        EXPECT_GE(sol.theta(n), 0.0);
        EXPECT_LT(sol.theta(n), 2.0 * kPi);
    }
}

INSTANTIATE_TEST_SUITE_P(Seeds, PenaltyOnDeskChannels, ::testing::Values(1u, 2u, 3u));

TEST(Penalty, OptimizedPhasesBeatRandomStart)
{
    const ChannelSet ch = make_channels(9);
    const VrAssignment vr = VrAssignment::full(ch.S, ch.Kn(), ch.Kf());
    const PhaseSolution sol = optimize_phases(ch, vr, desk_profile().tol);
    std::vector<CMat> R;
    for (int k = 0; k < ch.Kf(); ++k) R.push_back(build_Rk(ch, k, vr.ff[k]));
    EXPECT_GE(sol.t_phases, min_gain(R, ch.theta) * (1.0 - 1e-9));
    EXPECT_GT(sol.solves, 0);
}

TEST(Residual, RankOneAndIdentity)
{
    const CVec v = CVec::Ones(4);
    EXPECT_NEAR(rank_one_residual(v * v.adjoint()), 0.0, 1e-12);
    EXPECT_NEAR(rank_one_residual(CMat::Identity(4, 4)), 3.0, 1e-12);
}

TEST(Heuristic, ZeroAnglesGiveZeroPhases)
{
    SystemConfig cfg = desk_profile();
    cfg.ris_aoa_az = 0.0;
    cfg.ris_aoa_el = 0.0;
    cfg.ff_azimuths = {0.0, 0.0};
    cfg.ff_elevation = 0.0;
    const ChannelSet ch = make_channels(10, cfg);
    const RVec theta = heuristic_phases(ch, 0);
    EXPECT_LT(theta.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Heuristic, AlignmentReachesTriangleBound)
{
    ChannelSet ch = make_channels(11);
    for (int k = 0; k < ch.Kf(); ++k) {
        ch.theta = heuristic_phases(ch, k);
        const cd sum = ch.ris_vector(k).dot(ch.b_ris); // h_k^H Theta b_N
        EXPECT_NEAR(std::abs(sum), std::sqrt(ch.varsigma[k]) * ch.N, 1e-12 * std::sqrt(ch.varsigma[k]) * ch.N);
    }
}

TEST(Heuristic, OtherUsersSeeSmallerGain)
{
    SystemConfig cfg = desk_profile();
    Rng rng(12);
    int strictly_smaller = 0;
    for (int trial = 0; trial < 100; ++trial) {
        cfg.ff_azimuths = {rng.uniform(-kPi / 2, kPi / 2), rng.uniform(-kPi / 2, kPi / 2)};
        cfg.ff_elevation = rng.uniform(-0.3, 0.3);
        ChannelSet ch = make_channels(100 + trial, cfg);
        ch.theta = heuristic_phases(ch, 0);
        const double own = std::abs(ch.ris_vector(0).dot(ch.b_ris));
        const double other = std::abs(ch.ris_vector(1).dot(ch.b_ris));
        strictly_smaller += other < own;
    }
    EXPECT_EQ(strictly_smaller, 100);
}

TEST(Heuristic, InvalidUserRejected)
{
    const ChannelSet ch = make_channels(13);
    EXPECT_THROW(heuristic_phases(ch, -1), InputError);
    EXPECT_THROW(heuristic_phases(ch, ch.Kf()), InputError);
}
