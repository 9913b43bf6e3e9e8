/**
 * @file analytics.hpp
 * @brief SINR and SE evaluation: MRT closed forms, Monte-Carlo estimates of
 * the statistical terms used by CZF and LZF, and a direct simulation oracle.
 *
 * All SINR evaluations share one representation. Power enters through the
 * amplitudes a_sk = sqrt(eta_sk) on the user's VR (zero elsewhere), and the
 * per-scheme statistics are kept in an ExpectationCache:
 *
 *   NFUE k:  DS  = Pn |sum_s a_sk nn_kk(s)|^2
 *            UI  = Pn sum_{i != k} |sum_s a_si nn_ki(s)|^2
 *                + Pf sum_j a_j^T Rnf_kj a_j
 *   FFUE k:  DS  = Pf |sum_s a_sk m_k(s)|^2,   BU = Pf sum_s a_sk^2 v_k(s)
 *            UI  = Pf sum_{j != k} a_j^T Q_kj a_j + Pn sum_i a_i^T Tff_ki a_i
 */
#ifndef XLRIS_ANALYTICS_HPP
#define XLRIS_ANALYTICS_HPP

#include "xlris/precoding.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace xlris {

/// Signal and interference powers of one user (noise normalized to 1).
struct SinrTerms {
    double ds = 0.0;       ///< desired signal power
    double bu = 0.0;       ///< beamforming-gain uncertainty (FFUEs only)
    double ui_intra = 0.0; ///< interference from the user's own group
    double ui_inter = 0.0; ///< interference from the other group
    double noise = 1.0;

    double denominator() const { return bu + ui_intra + ui_inter + noise; }
    double sinr() const { return ds / denominator(); }
};

struct SinrSet {
    std::vector<SinrTerms> nf;
    std::vector<SinrTerms> ff;
};

// ---------------------------------------------------------------------------
// MRT closed-form building blocks
// ---------------------------------------------------------------------------

/// E{H_{2,s} H_{2,s}^H} = alpha^2 Hbar_s Hbar_s^H + beta^2 M* I_N.
CMat ris_gram_mean(const ChannelSet &ch, int s);

/**
 * E{g~_sk g~_s'k^H} = alpha^2 Hbar_s^H M_kk Hbar_s' + [s = s'] varsigma_k beta^2 N I,
 * the M* x M* cross-covariance of two subarray slices of FFUE k's cascaded channel.
 */
CMat cascade_cross_cov(const ChannelSet &ch, int k, int s, int s2);

/// Psi~_k^s = E{||g~_sk||^2} = x_k^H E{H_s H_s^H} x_k.
double mrt_psi_ff(const ChannelSet &ch, int k, int s);

/// a~_k^s, the variance of ||g~_sk||^2.
double mrt_a(const ChannelSet &ch, int k, int s);

/// C_sj = E{H_s H_s^H M_jj H_s H_s^H}.
CMat mrt_C(const ChannelSet &ch, int s, int j);

/// D_j^{ss'} = E{H_s H_s^H} M_jj E{H_s' H_s'^H} (s != s').
CMat mrt_D(const ChannelSet &ch, int s, int s2, int j);

/// b~_kj^{ss'} = Re x_k^H (C_sj or D_j^{ss'}) x_k.
double mrt_b(const ChannelSet &ch, int k, int j, int s, int s2);

/// Xi~_kj^{ss'}: NFUE k, interfering FFUE j.
double mrt_xi_nf(const ChannelSet &ch, int k, int j, int s, int s2);

/// Xi-bar_ki^{ss'}: FFUE k, interfering NFUE i (MRT NF precoders).
double mrt_xi_ff(const ChannelSet &ch, int k, int i, int s, int s2);

// ---------------------------------------------------------------------------
// Expectation cache
// ---------------------------------------------------------------------------

/**
 * Statistical terms of one precoding scheme for one ChannelSet. Matrices
 * indexed by user pairs are stored row-major: entry [k * K2 + j]. Real parts
 * of the S x S second-moment matrices are stored since SINRs only use
 * a^T Re(X) a. MRT and CZF terms do not depend on the VRs; LZF terms do.
 */
struct ExpectationCache {
    Precoder scheme = Precoder::MRT;
    int S = 0;
    int Kn = 0;
    int Kf = 0;
    int samples = 0; ///< 0 for closed-form caches
    bool closed_form = false;

    std::vector<CVec> nn;        ///< [k*Kn+i](s) = gbar_sk^H wbar_si
    std::vector<RMat> rnf;       ///< [k*Kf+j] Re E{(gbar_sk^H w~_sj)(gbar_s'k^H w~_s'j)^*}
    std::vector<RMat> rnf_se;
    CMat ff_mean;                ///< (s, k) E{g~_sk^H w~_sk}
    RMat ff_mean_se;             ///< standard error of the real part
    RMat ff_var;                 ///< (s, k) variance of g~_sk^H w~_sk
    RMat ff_var_se;
    std::vector<RMat> q;         ///< [k*Kf+j], j != k: Re E{(g~_sk^H w~_sj)(g~_s'k^H w~_s'j)^*}
    std::vector<RMat> q_se;
    std::vector<RMat> tff;       ///< [k*Kn+i] Re E{(g~_sk^H wbar_si)(g~_s'k^H wbar_s'i)^*}
    RMat cbar;                   ///< (s, k) ||wbar_sk||^2
    RMat ctilde;                 ///< (s, k) E{||w~_sk||^2}
    RMat ctilde_se;

    /// Power constants restricted to the VRs.
    PowerConstants constants(const VrAssignment &vr) const;
};

/// Exact MRT cache from the closed forms (no sampling).
ExpectationCache mrt_closed_form(const ChannelSet &ch);

/**
 * Monte-Carlo cache from @p n_mc draws of the NLoS part of H2. Precoders of
 * the FFUEs are recomputed for every draw. Standard errors come from
 * @p batches batch means. Deterministic for a given seed.
 */
ExpectationCache estimate_expectations(Precoder scheme, const ChannelSet &ch, const VrAssignment &vr, int n_mc,
                                       std::uint64_t seed, int batches = 20);

/// Scheme-appropriate cache: closed form for MRT, sampling for CZF and LZF.
ExpectationCache build_cache(Precoder scheme, const ChannelSet &ch, const VrAssignment &vr, int n_mc,
                             std::uint64_t seed);

/// SINR terms for amplitudes a_nf (S x Kn) and a_ff (S x Kf).
SinrSet evaluate_sinr(const ExpectationCache &c, const RMat &a_nf, const RMat &a_ff, const PowerBudget &b);

/// SINR terms for a power allocation restricted to the VRs.
SinrSet evaluate_sinr(const ExpectationCache &c, const PowerAllocation &alloc, const VrAssignment &vr,
                      const PowerBudget &b);

// ---------------------------------------------------------------------------
// Direct simulation oracle
// ---------------------------------------------------------------------------

struct Estimate {
    double value = 0.0;
    double se = 0.0;
};

struct OracleTerms {
    Estimate ds;
    Estimate bu;
    Estimate ui_intra;
    Estimate ui_inter;
    double sinr = 0.0;
};

struct OracleResult {
    std::vector<OracleTerms> nf;
    std::vector<OracleTerms> ff;
    int samples = 0;
};

/**
 * Average the signal-model quantities over @p n_mc fresh NLoS draws:
 * DS = |E{d}|^2, BU = Var{d}, UI = E{|.|^2}. NFUE desired and intra-group
 * terms involve no expectation and are computed once.
 */
OracleResult oracle_sinr(Precoder scheme, const ChannelSet &ch, const VrAssignment &vr,
                         const PowerAllocation &alloc, const PowerBudget &b, int n_mc, std::uint64_t seed,
                         int batches = 32);

// ---------------------------------------------------------------------------
// Spectral efficiency
// ---------------------------------------------------------------------------

struct SeReport {
    std::vector<double> nf; ///< per-NFUE SE (bit/s/Hz)
    std::vector<double> ff; ///< per-FFUE SE
    double min_nf = 0.0;
    double min_ff = 0.0;
    double objective = 0.0; ///< w_n min_nf + w_f min_ff
    std::string method;     ///< closed-form, statistical or oracle
};

inline double se_from_sinr(double sinr) { return std::log2(1.0 + std::max(sinr, 0.0)); }

SeReport se_report(const SinrSet &sinrs, double w_n, double w_f, const std::string &method);

} // namespace xlris

#endif
