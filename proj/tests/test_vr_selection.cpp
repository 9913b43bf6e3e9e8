/**
 * @file test_vr_selection.cpp
 * @brief Greedy visibility-region pruning and the VR-efficiency metric.
 */
#include "xlris/vr_selection.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace xlris;

namespace {

ChannelSet make_channels(std::uint64_t seed, const SystemConfig &cfg = desk_profile())
{
    Rng rng(seed);
    ChannelSet ch = build_channels(cfg, draw_geometry(cfg, rng));
    ch.theta = random_phases(ch.N, rng);
    return ch;
}

ExpectationCache selection_cache(Precoder p, const ChannelSet &ch)
{
    return build_cache(p, ch, VrAssignment::full(ch.S, ch.Kn(), ch.Kf()), 300, 17);
}

/// One NFUE, no FFUEs, MRT statistics with per-subarray gains c_s.
ExpectationCache single_user_cache(const std::vector<double> &gains)
{
    const int S = static_cast<int>(gains.size());
    ExpectationCache c;
    c.scheme = Precoder::MRT;
    c.S = S;
    c.Kn = 1;
    c.Kf = 0;
    c.closed_form = true;
    CVec nn(S);
    c.cbar = RMat(S, 1);
    for (int s = 0; s < S; ++s) {
        nn(s) = gains[s];
        c.cbar(s, 0) = gains[s];
    }
    c.nn = {nn};
    c.ctilde = RMat::Zero(S, 0);
    c.ctilde_se = RMat::Zero(S, 0);
    c.ff_mean = CMat::Zero(S, 0);
    c.ff_var = RMat::Zero(S, 0);
    return c;
}

} // namespace

TEST(VrScheme, LzfReusesCzfRegions)
{
    EXPECT_EQ(vr_scheme(Precoder::LZF), Precoder::CZF);
    EXPECT_EQ(vr_scheme(Precoder::CZF), Precoder::CZF);
    EXPECT_EQ(vr_scheme(Precoder::MRT), Precoder::MRT);
}

TEST(SelectVrs, TinyRatioLeavesSingleSubarray)
{
    const ChannelSet ch = make_channels(1);
    const PowerBudget b = PowerBudget::from_config(desk_profile());
    for (Precoder p : {Precoder::MRT, Precoder::CZF}) {
        const VrSelection sel = select_vrs(selection_cache(p, ch), b, 1e-12);
        for (const auto &s : sel.vr.nf) EXPECT_EQ(s.size(), 1u) << to_string(p);
        for (const auto &s : sel.vr.ff) EXPECT_EQ(s.size(), 1u) << to_string(p);
        EXPECT_DOUBLE_EQ(vr_efficiency(sel.vr), 1.0 / ch.S);
    }
}

TEST(SelectVrs, UnitRatioKeepsStrictlyContributingSubarrays)
{
    // Under MRT an NFUE's own regions do not change its interference while
    // every subarray adds c_s to the desired power, so none can be removed.
    const ChannelSet ch = make_channels(2);
    const PowerBudget b = PowerBudget::from_config(desk_profile());
    const VrSelection sel = select_vrs(selection_cache(Precoder::MRT, ch), b, 1.0);
    for (const auto &s : sel.vr.nf) EXPECT_EQ(static_cast<int>(s.size()), ch.S);
    for (std::size_t k = 0; k < sel.selected_ff.size(); ++k) EXPECT_GE(sel.selected_ff[k], sel.baseline_ff[k]);
}

TEST(SelectVrs, TwoSubarrayToyMatchesExhaustiveSearch)
{
    const ExpectationCache c = single_user_cache({1.0, 0.1});
    const PowerBudget b{1.0, 1.0, 1.0};
    const double delta = 0.8;
    const VrSelection sel = select_vrs(c, b, delta);
    ASSERT_EQ(sel.vr.nf[0], (std::vector<int>{0}));

    // DS = (P / K) sum_{s in set} c_s, so the full array gives 1.1.
    EXPECT_NEAR(sel.baseline_nf[0], 1.1, 1e-12);
    const double gamma = delta * sel.baseline_nf[0];
    std::vector<int> best;
    for (int mask = 1; mask < 4; ++mask) {
        std::vector<int> set;
        for (int s = 0; s < 2; ++s)
            if (mask & (1 << s)) set.push_back(s);
        if (vr_user_sinr(c, b, true, 0, set) >= gamma && (best.empty() || set.size() < best.size())) best = set;
    }
    EXPECT_EQ(sel.vr.nf[0], best);
}

TEST(SelectVrs, CumulativeRemovalInAscendingOrder)
{
    // Gains 0.05, 0.05, 1, 0.05 with delta = 0.8: subarrays 0, 1 and 3 go.
    const ExpectationCache c = single_user_cache({0.05, 0.05, 1.0, 0.05});
    const VrSelection sel = select_vrs(c, PowerBudget{}, 0.8);
    EXPECT_EQ(sel.vr.nf[0], (std::vector<int>{2}));
    EXPECT_FALSE(sel.fallback_nf[0]);
}

TEST(SelectVrs, PostSelectionSinrMeetsThreshold)
{
    const PowerBudget b = PowerBudget::from_config(desk_profile());
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        const ChannelSet ch = make_channels(seed);
        for (Precoder p : {Precoder::MRT, Precoder::CZF}) {
            const ExpectationCache c = selection_cache(p, ch);
            for (double delta : {0.5, 0.7, 0.8, 0.9}) {
                const VrSelection sel = select_vrs(c, b, delta);
                for (int k = 0; k < ch.Kn(); ++k) {
                    const double again = vr_user_sinr(c, b, true, k, sel.vr.nf[k]);
                    EXPECT_DOUBLE_EQ(again, sel.selected_nf[k]);
                    EXPECT_GE(again, delta * sel.baseline_nf[k]);
                }
                for (int k = 0; k < ch.Kf(); ++k) {
                    const double again = vr_user_sinr(c, b, false, k, sel.vr.ff[k]);
                    EXPECT_DOUBLE_EQ(again, sel.selected_ff[k]);
                    EXPECT_GE(again, delta * sel.baseline_ff[k]);
                }
            }
        }
    }
}

TEST(SelectVrs, RerunOnSelectionIsNoOp)
{
    const PowerBudget b = PowerBudget::from_config(desk_profile());
    for (std::uint64_t seed = 5; seed <= 7; ++seed) {
        const ChannelSet ch = make_channels(seed);
        for (Precoder p : {Precoder::MRT, Precoder::CZF}) {
            const ExpectationCache c = selection_cache(p, ch);
            const VrSelection sel = select_vrs(c, b, 0.7);
            EXPECT_EQ(refine_vrs(c, b, sel.vr, sel.threshold_nf, sel.threshold_ff), sel.vr);
            for (const auto &s : sel.vr.nf) EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
        }
    }
}

TEST(SelectVrs, ExactlySEvaluationsPerUser)
{
    const ChannelSet ch = make_channels(8);
    const VrSelection sel = select_vrs(selection_cache(Precoder::MRT, ch), PowerBudget{1e13, 1e13, 1e13}, 0.6);
    for (int e : sel.evaluations_nf) EXPECT_EQ(e, ch.S);
    for (int e : sel.evaluations_ff) EXPECT_EQ(e, ch.S);
}

TEST(SelectVrs, InvalidInputsRejected)
{
    const ChannelSet ch = make_channels(9);
    const ExpectationCache c = selection_cache(Precoder::MRT, ch);
    EXPECT_THROW(select_vrs(c, PowerBudget{}, 0.0), DomainError);
    EXPECT_THROW(select_vrs(c, PowerBudget{}, 1.5), DomainError);
    ExpectationCache lzf = c;
    lzf.scheme = Precoder::LZF;
    EXPECT_THROW(select_vrs(lzf, PowerBudget{}, 0.8), InputError);
}

TEST(SelectVrs, ZeroBaselineSinrIsDiagnosed)
{
    ExpectationCache c = single_user_cache({1.0, 1.0});
    c.nn[0].setZero();
    try {
        select_vrs(c, PowerBudget{}, 0.8);
        FAIL() << "expected DomainError";
    } catch (const DomainError &e) {
        EXPECT_NE(std::string(e.what()).find("NFUE 0"), std::string::npos) << e.what();
    }
}

TEST(VrEfficiency, FullAssignmentIsOne)
{
    EXPECT_DOUBLE_EQ(vr_efficiency(VrAssignment::full(4, 2, 2)), 1.0);
}

TEST(VrEfficiency, HalfOfTheSubarrays)
{
    VrAssignment vr;
    vr.S = 4;
    vr.nf = {{0, 1}, {2, 3}};
    vr.ff = {{1, 3}, {0, 2}};
    EXPECT_DOUBLE_EQ(vr_efficiency(vr), 0.5);
}

TEST(VrEfficiency, MixedAssignmentByCounting)
{
    VrAssignment vr;
    vr.S = 4;
    vr.nf = {{0}, {0, 1, 2}};
    vr.ff = {{0, 1, 2, 3}, {3}};
    // (1 + 3 + 4 + 1) / (4 users x 4 subarrays)
    EXPECT_DOUBLE_EQ(vr_efficiency(vr), 9.0 / 16.0);
}
