/**
 * @file test_system_model.cpp
 * @brief Geometry, near-field and RIS channel synthesis, configuration I/O.
 */
#include "xlris/channel.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

using namespace xlris;

namespace {

SystemConfig small_config()
{
    SystemConfig c = desk_profile();
    c.Mx = 5;
    c.My = 5;
    c.S = 5;
    return c;
}

ChannelSet desk_channels(std::uint64_t seed, SystemConfig cfg = desk_profile())
{
    Rng rng(seed);
    return build_channels(cfg, draw_geometry(cfg, rng));
}

} // namespace

TEST(AntennaCoords, FirstElement)
{
    const auto [mx, my] = antenna_coords(1, 5, 3);
    EXPECT_EQ(mx, -2.0);
    EXPECT_EQ(my, 1.0);
}

TEST(AntennaCoords, LastElement)
{
    const auto [mx, my] = antenna_coords(15, 5, 3);
    EXPECT_EQ(mx, 2.0);
    EXPECT_EQ(my, -1.0);
}

TEST(AntennaCoords, BijectiveOverGrid)
{
    std::set<std::pair<double, double>> seen;
    for (int m = 1; m <= 25; ++m) {
        const auto c = antenna_coords(m, 5, 5);
        EXPECT_GE(c.first, -2.0);
        EXPECT_LE(c.first, 2.0);
        EXPECT_GE(c.second, -2.0);
        EXPECT_LE(c.second, 2.0);
        seen.insert(c);
    }
    EXPECT_EQ(seen.size(), 25u);
}

TEST(AntennaCoords, EvenGridIsCentred)
{
    double sx = 0.0, sy = 0.0;
    for (int m = 1; m <= 100; ++m) {
        const auto [mx, my] = antenna_coords(m, 10, 10);
        sx += mx;
        sy += my;
    }
    EXPECT_DOUBLE_EQ(sx, 0.0);
    EXPECT_DOUBLE_EQ(sy, 0.0);
}

TEST(AntennaCoords, OutOfRangeIndexRejected)
{
    EXPECT_THROW(antenna_coords(0, 5, 3), InputError);
    EXPECT_THROW(antenna_coords(16, 5, 3), InputError);
}

TEST(NearField, BroadsideGainCollapsesToFreeSpace)
{
    const double lambda = 0.06;
    const double z = 10.0;
    const double A = lambda * lambda / (4.0 * kPi);
    const double eta = nf_gain(Eigen::Vector3d(0, 0, z), 0.0, 0.0, lambda / 2.0, lambda);
    EXPECT_NEAR(eta, A / (4.0 * kPi * z * z), 1e-20);
    EXPECT_NEAR(eta, 2.2797e-7, 1e-11);
}

TEST(NearField, LosOnlyMagnitudeIsSqrtGain)
{
    const Eigen::Vector3d u(1.5, -2.0, 7.0);
    const double lambda = 0.06;
    const cd g = nf_element_channel(u, 2.0, -1.0, lambda / 2.0, lambda);
    EXPECT_NEAR(std::abs(g), std::sqrt(nf_gain(u, 2.0, -1.0, lambda / 2.0, lambda)), 1e-16);
}

TEST(NearField, PropagationPhaseSign)
{
    const double lambda = 0.06;
    const double z = 10.01;
    const cd g = nf_element_channel(Eigen::Vector3d(0, 0, z), 0.0, 0.0, lambda / 2.0, lambda);
    EXPECT_NEAR(std::arg(g), std::arg(std::polar(1.0, -2.0 * kPi * z / lambda)), 1e-9);
}

TEST(NearField, NonPositiveHeightRejected)
{
    EXPECT_THROW(nf_gain(Eigen::Vector3d(0, 0, 0), 0, 0, 0.03, 0.06), DomainError);
    EXPECT_THROW(nf_element_channel(Eigen::Vector3d(1, 1, -2), 0, 0, 0.03, 0.06), DomainError);
}

TEST(NearField, SingleAntennaVectorMatchesElement)
{
    SystemConfig c = desk_profile();
    c.Mx = 1;
    c.My = 1;
    c.S = 1;
    const Eigen::Vector3d u(3.0, 4.0, 5.0);
    const CVec g = nf_channel_vector(u, c);
    ASSERT_EQ(g.size(), 1);
    EXPECT_EQ(g(0), nf_element_channel(u, 0.0, 0.0, c.spacing(), c.wavelength()));
}

TEST(NearField, NormEqualsSumOfElementGains)
{
    const SystemConfig c = small_config();
    const Eigen::Vector3d u(4.0, 2.0, 3.0);
    double sum = 0.0;
    for (int m = 1; m <= c.M(); ++m) {
        const auto [mx, my] = antenna_coords(m, c.Mx, c.My);
        sum += nf_gain(u, mx, my, c.spacing(), c.wavelength());
    }
    EXPECT_NEAR(nf_channel_vector(u, c).squaredNorm(), sum, 1e-12 * sum);
}

TEST(NearField, SubarraySlicesConcatenate)
{
    const ChannelSet ch = desk_channels(3);
    for (int k = 0; k < ch.Kn(); ++k) {
        CVec stacked(ch.M);
        for (int s = 0; s < ch.S; ++s) stacked.segment(s * ch.Mstar, ch.Mstar) = ch.gbar(s, k);
        EXPECT_EQ(stacked, ch.H1.col(k));
    }
}

TEST(NearField, ScattererAddsReflectedPath)
{
    const Eigen::Vector3d u(0.0, 0.0, 5.0);
    Scatterer sc{Eigen::Vector3d(2.0, 0.0, 4.0), cd(0.0, 0.3)};
    const double lambda = 0.06, d = 0.03;
    const cd with = nf_element_channel(u, 1.0, 0.0, d, lambda, {sc});
    const cd without = nf_element_channel(u, 1.0, 0.0, d, lambda);
    const cd reflected = nf_element_channel(sc.position, 1.0, 0.0, d, lambda);
    EXPECT_NEAR(std::abs(with - without - sc.coeff * reflected), 0.0, 1e-18);
}

TEST(ArrayResponse, ZeroAnglesGiveOnes)
{
    const CVec a = array_response(0.0, 0.0, 4, 3, 0.03, 0.06);
    EXPECT_TRUE(a.isApprox(CVec::Ones(12)));
}

TEST(ArrayResponse, UnitModulusAndNorm)
{
    const CVec b = array_response(0.7, -0.3, 4, 4, 0.03, 0.06);
    for (int n = 0; n < b.size(); ++n) EXPECT_NEAR(std::abs(b(n)), 1.0, 1e-14);
    EXPECT_NEAR(b.squaredNorm(), 16.0, 1e-12);
}

TEST(ArrayResponse, KroneckerStructure)
{
    const double az = 0.4, el = 0.2, d = 0.03, lambda = 0.06;
    const CVec a = array_response(az, el, 3, 2, d, lambda);
    // The first factor carries index i, the second l: entry i * n2 + l.
    for (int i = 0; i < 3; ++i)
        for (int l = 0; l < 2; ++l) {
            const double ph = 2.0 * kPi * d / lambda * (i * std::cos(el) * std::sin(az) + l * std::sin(el));
            EXPECT_NEAR(std::abs(a(i * 2 + l) - std::polar(1.0, ph)), 0.0, 1e-12);
        }
}

TEST(BsRisChannel, RiceanSplitAtFactorTwo)
{
    SystemConfig c = desk_profile();
    c.pathloss_ref = 1.0;
    c.d_mr = 1.0; // zeta = 1
    const ChannelSet ch = desk_channels(1, c);
    EXPECT_NEAR(ch.alpha2 * ch.alpha2, 2.0 / 3.0, 1e-14);
    EXPECT_NEAR(ch.beta2 * ch.beta2, 1.0 / 3.0, 1e-14);
}

TEST(BsRisChannel, RiceanPowersSumToPathLoss)
{
    const SystemConfig c = desk_profile();
    const ChannelSet ch = desk_channels(1, c);
    EXPECT_NEAR(ch.alpha2 * ch.alpha2 + ch.beta2 * ch.beta2, c.zeta(), 1e-12 * c.zeta());
}

TEST(BsRisChannel, LargeRiceanFactorRemovesScattering)
{
    SystemConfig c = desk_profile();
    c.ricean = 1e12;
    const ChannelSet ch = desk_channels(1, c);
    Rng rng(9);
    const CMat H2 = compose_h2(ch, sample_nlos(ch.N, ch.M, rng));
    EXPECT_LT((H2 - std::sqrt(c.zeta()) * ch.H2_los).norm(), 1e-5 * std::sqrt(c.zeta()) * ch.H2_los.norm());
}

TEST(BsRisChannel, LosColumnsHaveNormN)
{
    const ChannelSet ch = desk_channels(2);
    for (int m = 0; m < ch.M; ++m) EXPECT_NEAR(ch.H2_los.col(m).squaredNorm(), ch.N, 1e-10);
}

TEST(BsRisChannel, NlosEntryVarianceIsOne)
{
    Rng rng(17);
    const int N = 16, M = 100, draws = 10000;
    double sum = 0.0;
    for (int i = 0; i < draws; ++i) sum += sample_nlos(N, M, rng).squaredNorm() / (N * M);
    EXPECT_NEAR(sum / draws, 1.0, 0.02);
}

TEST(BsRisChannel, SecondMomentMatchesRiceanIdentity)
{
    SystemConfig c = desk_profile();
    c.Mx = 4;
    c.My = 2;
    c.S = 2;
    c.N1 = 2;
    c.N2 = 2;
    const ChannelSet ch = desk_channels(5, c);
    const int draws = 10000;
    Rng rng(23);
    const int N = ch.N;
    CMat mean = CMat::Zero(N, N);
    RMat sq = RMat::Zero(N, N), sqi = RMat::Zero(N, N);
    for (int i = 0; i < draws; ++i) {
        const CMat H2 = compose_h2(ch, sample_nlos(N, ch.M, rng));
        const CMat G = H2 * H2.adjoint();
        mean += G;
        sq += G.real().cwiseAbs2();
        sqi += G.imag().cwiseAbs2();
    }
    mean /= draws;
    const CMat expect = ch.alpha2 * ch.alpha2 * ch.H2_los * ch.H2_los.adjoint() +
                        ch.beta2 * ch.beta2 * ch.M * CMat::Identity(N, N);
    for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b) {
            const double se_re = std::sqrt((sq(a, b) / draws - std::pow(mean(a, b).real(), 2)) / draws);
            const double se_im = std::sqrt((sqi(a, b) / draws - std::pow(mean(a, b).imag(), 2)) / draws);
            EXPECT_LE(std::abs(mean(a, b).real() - expect(a, b).real()), 3.0 * se_re + 1e-18) << a << "," << b;
            EXPECT_LE(std::abs(mean(a, b).imag() - expect(a, b).imag()), 3.0 * se_im + 1e-18) << a << "," << b;
        }
}

TEST(RisUserChannel, BroadsideIsScaledOnes)
{
    const SystemConfig c = desk_profile();
    const CVec h = ris_user_channel(c.varsigma(), 0.0, 0.0, c);
    EXPECT_TRUE(h.isApprox(std::sqrt(c.varsigma()) * CVec::Ones(c.N())));
}

TEST(RisUserChannel, NormIsPathLossTimesN)
{
    const SystemConfig c = desk_profile();
    const CVec h = ris_user_channel(c.varsigma(), 1.1, 0.2, c);
    EXPECT_NEAR(h.squaredNorm(), c.varsigma() * c.N(), 1e-15);
}

TEST(RisUserChannel, DefaultPathLossAtTwentyMetres)
{
    EXPECT_NEAR(desk_profile().varsigma(), 1e-3 / 400.0, 1e-18);
}

TEST(Cascade, SingleElementZeroPhaseIsScalarProduct)
{
    SystemConfig c = desk_profile();
    c.N1 = 1;
    c.N2 = 1;
    const ChannelSet ch = desk_channels(4, c);
    Rng rng(3);
    const CMat H2 = compose_h2(ch, sample_nlos(1, ch.M, rng));
    const CMat G = cascaded_channels(ch, H2);
    for (int k = 0; k < ch.Kf(); ++k) {
        const CVec expect = (std::conj(ch.h(0, k)) * H2.row(0)).adjoint();
        EXPECT_LT((G.col(k) - expect).norm(), 1e-15);
    }
}

TEST(Cascade, SubarraySlicesConcatenate)
{
    ChannelSet ch = desk_channels(6);
    Rng rng(8);
    ch.theta = random_phases(ch.N, rng);
    const CMat H2 = compose_h2(ch, sample_nlos(ch.N, ch.M, rng));
    const CMat G = cascaded_channels(ch, H2);
    for (int k = 0; k < ch.Kf(); ++k)
        for (int s = 0; s < ch.S; ++s)
            EXPECT_LT((cascaded_channel(ch, H2, k, s) - G.block(s * ch.Mstar, k, ch.Mstar, 1)).norm(),
                      1e-12 * G.col(k).norm());
}

TEST(Cascade, MagnitudeInvariantToCommonPhase)
{
    ChannelSet ch = desk_channels(6);
    Rng rng(12);
    ch.theta = random_phases(ch.N, rng);
    const CMat H2 = compose_h2(ch, sample_nlos(ch.N, ch.M, rng));
    CVec x(ch.M);
    for (int m = 0; m < ch.M; ++m) x(m) = rng.cn();
    const CMat G0 = cascaded_channels(ch, H2);
    for (int n = 0; n < ch.N; ++n) ch.theta(n) = wrap_phase(ch.theta(n) + 1.234);
    const CMat G1 = cascaded_channels(ch, H2);
    for (int k = 0; k < ch.Kf(); ++k)
        EXPECT_NEAR(std::abs(G0.col(k).dot(x)), std::abs(G1.col(k).dot(x)), 1e-12 * std::abs(G0.col(k).dot(x)));
}

TEST(Cascade, InvalidIndicesRejected)
{
    const ChannelSet ch = desk_channels(1);
    const CMat H2 = ch.H2_los;
    EXPECT_THROW(cascaded_channel(ch, H2, 0, ch.S), InputError);
    EXPECT_THROW(cascaded_channel(ch, H2, ch.Kf(), 0), InputError);
}

TEST(Phases, SeedReproducibleAndInRange)
{
    Rng a(42), b(42);
    const RVec ta = random_phases(64, a);
    const RVec tb = random_phases(64, b);
    EXPECT_EQ(ta, tb);
    for (int n = 0; n < ta.size(); ++n) {
        EXPECT_GE(ta(n), 0.0);
        EXPECT_LT(ta(n), 2.0 * kPi);
    }
}

TEST(Phases, PhasorMeanVanishes)
{
    Rng rng(77);
    const int total = 100000;
    const RVec t = random_phases(total, rng);
    cd mean = 0.0;
    for (int n = 0; n < total; ++n) mean += std::polar(1.0, t(n));
    mean /= double(total);
    // Each component has variance 1/2, so the standard error is sqrt(0.5 / n).
    const double se = std::sqrt(0.5 / total);
    EXPECT_LE(std::abs(mean.real()), 3.0 * se);
    EXPECT_LE(std::abs(mean.imag()), 3.0 * se);
}

TEST(Phases, WrapIntoPrincipalRange)
{
    EXPECT_NEAR(wrap_phase(-0.5), 2.0 * kPi - 0.5, 1e-15);
    EXPECT_NEAR(wrap_phase(2.0 * kPi + 0.25), 0.25, 1e-14);
    EXPECT_EQ(wrap_phase(0.0), 0.0);
}

TEST(Geometry, DrawRespectsRangesAndSemicircle)
{
    const SystemConfig c = desk_profile();
    Rng rng(31);
    const UserGeometry g = draw_geometry(c, rng);
    ASSERT_EQ(static_cast<int>(g.nfue.size()), c.Kn);
    for (const auto &u : g.nfue) {
        EXPECT_GE(u.x(), c.nf_x[0]);
        EXPECT_LE(u.x(), c.nf_x[1]);
        EXPECT_GT(u.z(), 0.0);
    }
    ASSERT_EQ(static_cast<int>(g.ff_az.size()), c.Kf);
    for (double a : g.ff_az) EXPECT_LE(std::abs(a), kPi);
    for (const auto &s : g.scatterers) EXPECT_TRUE(s.empty());
}

TEST(Geometry, SameSeedSameChannels)
{
    const ChannelSet a = desk_channels(99);
    const ChannelSet b = desk_channels(99);
    EXPECT_EQ(a.H1, b.H1);
    EXPECT_EQ(a.h, b.h);
    EXPECT_EQ(a.H2_los, b.H2_los);
}

TEST(Config, DefaultsValidate)
{
    EXPECT_NO_THROW(desk_profile().validate());
    EXPECT_NO_THROW(paper_profile().validate());
    EXPECT_EQ(desk_profile().Mstar(), 25);
}

TEST(Config, InvariantViolationsRejected)
{
    SystemConfig c = desk_profile();
    c.S = 3;
    EXPECT_THROW(c.validate(), ConfigError);
    c = desk_profile();
    c.delta = 0.0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = desk_profile();
    c.w_n = 0.0;
    c.w_f = 0.0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = desk_profile();
    c.nf_z = {0.0, 5.0};
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Config, YamlRoundTrip)
{
    SystemConfig c = desk_profile();
    c.Mx = 8;
    c.S = 2;
    c.ff_azimuths = {0.3, -0.7};
    c.delta = 0.65;
    c.seed = 12345;
    c.tol.eps1 = 2.5e-4;
    const SystemConfig back = load_config_string(dump_config(c), desk_profile());
    EXPECT_EQ(dump_config(back), dump_config(c));
    EXPECT_EQ(config_hash(back), config_hash(c));
}

TEST(Config, PartialOverlayKeepsOtherKeys)
{
    const SystemConfig c = load_config_string("vr:\n  delta: 0.7\n", desk_profile());
    EXPECT_DOUBLE_EQ(c.delta, 0.7);
    EXPECT_EQ(c.Mx, desk_profile().Mx);
}

TEST(Config, MalformedYamlRejected)
{
    EXPECT_THROW(load_config_string("array: [1, 2", desk_profile()), ConfigError);
    EXPECT_THROW(load_config("/nonexistent/xlris.yaml", desk_profile()), ConfigError);
    EXPECT_THROW(profile_by_name("huge"), InputError);
}

TEST(Config, PowerNormalization)
{
    const SystemConfig c = desk_profile();
    // 30 dBm over -104 dBm noise is 134 dB.
    EXPECT_NEAR(c.rho(), std::pow(10.0, 13.4), 1e-3 * c.rho());
}

TEST(Config, SeedMixingIsDeterministicAndSpreads)
{
    EXPECT_EQ(mix_seed(1, 2), mix_seed(1, 2));
    EXPECT_NE(mix_seed(1, 2), mix_seed(1, 3));
    EXPECT_NE(mix_seed(1, 2), mix_seed(2, 2));
}
