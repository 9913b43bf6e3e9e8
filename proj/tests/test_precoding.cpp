/**
 * @file test_precoding.cpp
 * @brief VR assignments, MRT/CZF/LZF precoders, power constants, the power
 * constraint and equal power allocation.
 */
#include "xlris/analytics.hpp"
#include "xlris/precoding.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace xlris;

namespace {

ChannelSet desk_channels(std::uint64_t seed, SystemConfig cfg = desk_profile())
{
    Rng rng(seed);
    ChannelSet ch = build_channels(cfg, draw_geometry(cfg, rng));
    ch.theta = random_phases(ch.N, rng);
    return ch;
}

CMat ff_draw(const ChannelSet &ch, std::uint64_t seed)
{
    Rng rng(seed);
    return cascaded_channels(ch, compose_h2(ch, sample_nlos(ch.N, ch.M, rng)));
}

CMat random_matrix(int rows, int cols, std::uint64_t seed)
{
    Rng rng(seed);
    CMat X(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) X(i, j) = rng.cn();
    return X;
}

VrAssignment partial_vr()
{
    VrAssignment vr;
    vr.S = 4;
    vr.nf = {{0, 1}, {1, 2, 3}};
    vr.ff = {{0, 2, 3}, {3}};
    return vr;
}

/// Largest |H^H W - I| entry relative to the largest entry of H^H W.
double zf_residual(const CMat &H, const CMat &W)
{
    const CMat P = H.adjoint() * W;
    return (P - CMat::Identity(P.rows(), P.cols())).cwiseAbs().maxCoeff() / P.cwiseAbs().maxCoeff();
}

} // namespace

TEST(VrAssignment, FullAndMasks)
{
    const VrAssignment vr = VrAssignment::full(4, 2, 3);
    EXPECT_NO_THROW(vr.validate());
    EXPECT_TRUE(vr.nf_mask().isApprox(RMat::Ones(4, 2)));
    EXPECT_TRUE(vr.ff_mask().isApprox(RMat::Ones(4, 3)));
    const VrAssignment p = partial_vr();
    EXPECT_TRUE(p.nf_active(1, 0));
    EXPECT_FALSE(p.nf_active(2, 0));
    EXPECT_EQ(p.ff_mask().col(1).sum(), 1.0);
}

TEST(VrAssignment, InvalidSetsRejected)
{
    VrAssignment vr = partial_vr();
    vr.nf[0] = {};
    EXPECT_THROW(vr.validate(), ConfigError);
    vr = partial_vr();
    vr.ff[1] = {4};
    EXPECT_THROW(vr.validate(), ConfigError);
    vr = partial_vr();
    vr.ff[0] = {2, 2};
    EXPECT_THROW(vr.validate(), ConfigError);
}

TEST(Mrt, SingleSubarraySingleUserCopiesChannel)
{
    const CMat H = random_matrix(6, 1, 1);
    const CMat W = precoder_matrix(Precoder::MRT, H, 1, {{0}}, "NFUE");
    EXPECT_EQ(W, H);
    EXPECT_NEAR(std::abs((H.adjoint() * W)(0, 0) - H.squaredNorm()), 0.0, 1e-12);
}

TEST(Mrt, MaskedSubarrayIsZeroAndActiveMatchesChannel)
{
    const ChannelSet ch = desk_channels(2);
    const CMat G = ff_draw(ch, 3);
    const VrAssignment vr = partial_vr();
    const PrecoderSet p = build_precoders(Precoder::MRT, ch, G, vr);
    for (int k = 0; k < ch.Kn(); ++k)
        for (int s = 0; s < ch.S; ++s) {
            if (vr.nf_active(s, k)) {
                EXPECT_EQ(p.nf_block(s, k), ch.gbar(s, k));
                EXPECT_NEAR(p.nf_block(s, k).norm(), ch.gbar(s, k).norm(), 1e-15);
            } else {
                EXPECT_EQ(p.nf_block(s, k).norm(), 0.0);
            }
        }
    for (int k = 0; k < ch.Kf(); ++k)
        for (int s = 0; s < ch.S; ++s)
            if (!vr.ff_active(s, k)) EXPECT_EQ(p.ff_block(s, k).norm(), 0.0);
}

TEST(Czf, SingleUserIsScaledChannel)
{
    const CMat g = random_matrix(8, 1, 4);
    const CMat W = precoder_matrix(Precoder::CZF, g, 2, {{0, 1}}, "NFUE");
    EXPECT_LT((W - g / g.squaredNorm()).norm(), 1e-14 * W.norm());
}

TEST(Czf, ZeroForcingIdentityOnDeskChannels)
{
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const ChannelSet ch = desk_channels(seed);
        const CMat G = ff_draw(ch, seed + 100);
        const PrecoderSet p = build_precoders(Precoder::CZF, ch, G, VrAssignment::full(ch.S, ch.Kn(), ch.Kf()));
        EXPECT_LE(zf_residual(ch.H1, p.nf), 1e-10);
        EXPECT_LE(zf_residual(G, p.ff), 1e-10);
    }
}

TEST(Czf, OrthogonalUsersReduceToScaledMrt)
{
    CMat H = CMat::Zero(8, 2);
    const CMat a = random_matrix(4, 1, 9);
    const CMat b = random_matrix(4, 1, 10);
    H.block(0, 0, 4, 1) = a;
    H.block(4, 1, 4, 1) = b;
    ASSERT_NEAR(std::abs((H.col(0).adjoint() * H.col(1))(0, 0)), 0.0, 1e-15);
    const CMat W = precoder_matrix(Precoder::CZF, H, 2, {{0, 1}, {0, 1}}, "NFUE");
    for (int k = 0; k < 2; ++k)
        EXPECT_LT((W.col(k) - H.col(k) / H.col(k).squaredNorm()).norm(), 1e-13 * W.col(k).norm());
}

TEST(Czf, RankDeficientGramRaises)
{
    CMat H = random_matrix(8, 2, 5);
    H.col(1) = H.col(0) * cd(0.0, 2.0);
    try {
        precoder_matrix(Precoder::CZF, H, 2, {{0, 1}, {0, 1}}, "FFUE");
        FAIL() << "expected SingularityError";
    } catch (const SingularityError &e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("FFUE CZF Gram matrix"), std::string::npos) << msg;
        EXPECT_NE(msg.find("condition"), std::string::npos) << msg;
    }
}

TEST(Czf, MoreUsersThanAntennasRaises)
{
    EXPECT_THROW(zf_matrix(random_matrix(2, 3, 1), "test"), SingularityError);
}

TEST(Lzf, SingleUserOnSubarrayFollowsMrtDirection)
{
    const CMat H = random_matrix(8, 2, 11);
    // user 0 alone on subarray 0, both users on subarray 1
    const CMat W = precoder_matrix(Precoder::LZF, H, 2, {{0, 1}, {1}}, "NFUE");
    const CVec w = W.block(0, 0, 4, 1);
    const CVec g = H.block(0, 0, 4, 1);
    EXPECT_LT((w - g / g.squaredNorm()).norm(), 1e-14 * w.norm());
    EXPECT_EQ(W.block(0, 1, 4, 1).norm(), 0.0);
}

TEST(Lzf, PerSubarrayZeroForcingIdentity)
{
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const ChannelSet ch = desk_channels(seed);
        const CMat G = ff_draw(ch, seed + 200);
        const VrAssignment vr = VrAssignment::full(ch.S, ch.Kn(), ch.Kf());
        const PrecoderSet p = build_precoders(Precoder::LZF, ch, G, vr);
        for (int s = 0; s < ch.S; ++s) {
            const auto rows = Eigen::seqN(s * ch.Mstar, ch.Mstar);
            EXPECT_LE(zf_residual(ch.H1(rows, Eigen::all), p.nf(rows, Eigen::all)), 1e-10) << "s=" << s;
            EXPECT_LE(zf_residual(G(rows, Eigen::all), p.ff(rows, Eigen::all)), 1e-10) << "s=" << s;
        }
    }
}

TEST(Lzf, SingleSubarrayCoincidesWithCzf)
{
    const CMat H = random_matrix(6, 3, 13);
    const std::vector<std::vector<int>> sets{{0}, {0}, {0}};
    const CMat L = precoder_matrix(Precoder::LZF, H, 1, sets, "NFUE");
    const CMat C = precoder_matrix(Precoder::CZF, H, 1, sets, "NFUE");
    EXPECT_LT((L - C).norm(), 1e-13 * C.norm());
}

TEST(Lzf, TooManyUsersOnSubarrayNamesIt)
{
    const CMat H = random_matrix(4, 3, 2);
    try {
        precoder_matrix(Precoder::LZF, H, 2, {{0, 1}, {1}, {1}}, "FFUE");
        FAIL() << "expected SingularityError";
    } catch (const SingularityError &e) {
        EXPECT_NE(std::string(e.what()).find("subarray 1"), std::string::npos) << e.what();
    }
}

TEST(PowerConstants, MrtNearFieldIsSubarrayChannelNorm)
{
    const ChannelSet ch = desk_channels(7);
    const VrAssignment vr = partial_vr();
    const PowerConstants c = power_constants(Precoder::MRT, ch, vr, 10, 1);
    for (int k = 0; k < ch.Kn(); ++k)
        for (int s = 0; s < ch.S; ++s) {
            if (vr.nf_active(s, k))
                EXPECT_NEAR(c.nf(s, k), ch.gbar(s, k).squaredNorm(), 1e-15 * c.nf(s, k));
            else
                EXPECT_EQ(c.nf(s, k), 0.0);
        }
    for (int k = 0; k < ch.Kf(); ++k)
        for (int s = 0; s < ch.S; ++s)
            if (!vr.ff_active(s, k)) EXPECT_EQ(c.ff(s, k), 0.0);
}

TEST(PowerConstants, MrtFarFieldMatchesExpectedNorm)
{
    const ChannelSet ch = desk_channels(8);
    const VrAssignment vr = VrAssignment::full(ch.S, ch.Kn(), ch.Kf());
    const PowerConstants c = power_constants(Precoder::MRT, ch, vr, 10000, 5);
    // Subarray slices use disjoint NLoS columns, so their estimates are
    // independent and the standard errors add in quadrature.
    for (int k = 0; k < ch.Kf(); ++k) {
        double est = 0.0, exact = 0.0, var = 0.0;
        for (int s = 0; s < ch.S; ++s) {
            est += c.ff(s, k);
            exact += mrt_psi_ff(ch, k, s);
            var += c.ff_se(s, k) * c.ff_se(s, k);
        }
        EXPECT_LE(std::abs(est - exact), 3.0 * std::sqrt(var)) << "k=" << k;
    }
}

TEST(PowerConstants, ZeroSamplesRejected)
{
    const ChannelSet ch = desk_channels(1);
    EXPECT_THROW(power_constants(Precoder::MRT, ch, VrAssignment::full(ch.S, ch.Kn(), ch.Kf()), 0, 1), InputError);
}

TEST(PowerCheck, ZeroAllocationLeavesFullMargin)
{
    const ChannelSet ch = desk_channels(1);
    const VrAssignment vr = VrAssignment::full(ch.S, ch.Kn(), ch.Kf());
    const PowerConstants c = power_constants(Precoder::CZF, ch, vr, 50, 2);
    PowerAllocation a;
    a.nf = RMat::Zero(ch.S, ch.Kn());
    a.ff = RMat::Zero(ch.S, ch.Kf());
    const PowerBudget b{5.0, 5.0, 5.0};
    const PowerCheck r = check_power(a, c, vr, b);
    EXPECT_TRUE(r.feasible);
    EXPECT_DOUBLE_EQ(r.margin, 5.0);
}

TEST(PowerCheck, EqualPowerBindsBudget)
{
    const ChannelSet ch = desk_channels(3);
    const PowerBudget b = PowerBudget::from_config(desk_profile());
    for (Precoder p : {Precoder::MRT, Precoder::CZF, Precoder::LZF}) {
        const VrAssignment vr = partial_vr();
        const PowerConstants c = power_constants(p, ch, vr, 100, 4);
        const PowerAllocation a = equal_power(p, c, vr, b);
        const PowerCheck r = check_power(a, c, vr, b);
        EXPECT_TRUE(r.feasible);
        EXPECT_LE(std::abs(r.margin), 1e-9 * b.P) << to_string(p);
    }
}

TEST(PowerCheck, EqualPowerIsEqualAcrossSubarraysAndUsers)
{
    PowerConstants c;
    c.nf = RMat::Constant(2, 2, 3.0);
    c.ff = RMat::Constant(2, 2, 3.0);
    const VrAssignment vr = VrAssignment::full(2, 2, 2);
    const PowerAllocation a = equal_power(Precoder::CZF, c, vr, PowerBudget{12.0, 12.0, 12.0});
    // Each of the 4 users radiates P / K = 3 = Px eta (3 + 3), so eta = 1 / 24.
    EXPECT_TRUE(a.nf.isApprox(RMat::Constant(2, 2, 1.0 / 24.0)));
    EXPECT_TRUE(a.ff.isApprox(RMat::Constant(2, 2, 1.0 / 24.0)));
}

TEST(PowerCheck, RandomFeasibleAllocationsHaveNonNegativeMargin)
{
    const ChannelSet ch = desk_channels(4);
    const VrAssignment vr = partial_vr();
    const PowerConstants c = power_constants(Precoder::MRT, ch, vr, 200, 6);
    const PowerBudget b = PowerBudget::from_config(desk_profile());
    std::mt19937_64 eng(12);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const PowerAllocation eq = equal_power(Precoder::MRT, c, vr, b);
    int accepted = 0;
    for (int i = 0; i < 2000; ++i) {
        PowerAllocation a = eq;
        for (int j = 0; j < a.nf.size(); ++j) a.nf(j) *= 2.0 * u(eng);
        for (int j = 0; j < a.ff.size(); ++j) a.ff(j) *= 2.0 * u(eng);
        const PowerCheck r = check_power(a, c, vr, b);
        const double lhs = b.Pn * a.nf.cwiseProduct(c.nf).cwiseProduct(vr.nf_mask()).sum() +
                           b.Pf * a.ff.cwiseProduct(c.ff).cwiseProduct(vr.ff_mask()).sum();
        if (lhs > b.P) continue;
        ++accepted;
        EXPECT_TRUE(r.feasible);
        EXPECT_GE(r.margin, 0.0);
    }
    EXPECT_GT(accepted, 100);
}

TEST(PowerCheck, NegativeCoefficientIsInfeasible)
{
    PowerConstants c;
    c.nf = RMat::Ones(1, 1);
    c.ff = RMat::Ones(1, 1);
    PowerAllocation a;
    a.nf = RMat::Constant(1, 1, -0.1);
    a.ff = RMat::Zero(1, 1);
    EXPECT_FALSE(check_power(a, c, VrAssignment::full(1, 1, 1), PowerBudget{}).feasible);
}

TEST(PowerCheck, EqualPowerRejectsZeroConstants)
{
    PowerConstants c;
    c.nf = RMat::Zero(2, 1);
    c.ff = RMat::Ones(2, 1);
    EXPECT_THROW(equal_power(Precoder::MRT, c, VrAssignment::full(2, 1, 1), PowerBudget{}), InputError);
}
