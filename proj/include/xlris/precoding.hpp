/**
 * @file precoding.hpp
 * @brief Visibility-region assignments, VR-masked MRT/CZF/LZF precoders,
 * power-normalization constants and power allocations.
 */
#ifndef XLRIS_PRECODING_HPP
#define XLRIS_PRECODING_HPP

#include "xlris/channel.hpp"

#include <string>
#include <vector>

namespace xlris {

/// Active-subarray sets of every user (0-based subarray ids, ascending).
struct VrAssignment {
    int S = 0;
    std::vector<std::vector<int>> nf; ///< per NFUE
    std::vector<std::vector<int>> ff; ///< per FFUE

    /// Every user served by every subarray.
    static VrAssignment full(int S, int Kn, int Kf);

    int Kn() const { return static_cast<int>(nf.size()); }
    int Kf() const { return static_cast<int>(ff.size()); }
    bool nf_active(int s, int k) const;
    bool ff_active(int s, int k) const;
    /// S x Kn matrix with 1 where NFUE k uses subarray s.
    RMat nf_mask() const;
    /// S x Kf matrix with 1 where FFUE k uses subarray s.
    RMat ff_mask() const;
    /// Throws ConfigError on empty sets, duplicates or out-of-range ids.
    void validate() const;
    bool operator==(const VrAssignment &o) const = default;
};

/// Stacked precoders: column k holds [w_{1k}; ...; w_{Sk}], zero outside the VR.
struct PrecoderSet {
    Precoder scheme = Precoder::MRT;
    int S = 0;
    int Mstar = 0;
    CMat nf; ///< M x Kn
    CMat ff; ///< M x Kf

    auto nf_block(int s, int k) const { return nf.block(s * Mstar, k, Mstar, 1); }
    auto ff_block(int s, int k) const { return ff.block(s * Mstar, k, Mstar, 1); }
};

/// Condition number above which a Gram matrix is treated as singular.
inline constexpr double kGramConditionLimit = 1e8;

/**
 * Zero-forcing matrix H (H^H H)^{-1}. Throws SingularityError naming @p what
 * and the condition estimate when the Gram matrix is too ill-conditioned.
 */
CMat zf_matrix(const CMat &H, const std::string &what);

/**
 * Unmasked precoder matrix for channel columns H (M x K) split into S
 * subarrays. MRT returns H, CZF the global zero-forcing matrix, LZF the
 * per-subarray pseudo-inverse over the users whose set contains s (the
 * others get zero blocks on s).
 */
CMat precoder_matrix(Precoder scheme, const CMat &H, int S, const std::vector<std::vector<int>> &sets,
                     const std::string &group);

/// Zero the subarray blocks outside each user's set.
CMat apply_mask(const CMat &W, int S, const std::vector<std::vector<int>> &sets);

/**
 * Build VR-masked precoders for one realization. @p Gff is the M x Kf
 * matrix of cascaded FFUE channels for the current H2 draw.
 */
PrecoderSet build_precoders(Precoder scheme, const ChannelSet &ch, const CMat &Gff, const VrAssignment &vr);

/// Power-normalization constants c_sk (zero outside the VR).
struct PowerConstants {
    RMat nf;    ///< S x Kn, exact
    RMat ff;    ///< S x Kf, sample means over H2 draws
    RMat ff_se; ///< standard errors of ff
    int samples = 0;
};

/// Per-(subarray, user) power coefficients eta_sk. CZF keeps rows equal per user.
struct PowerAllocation {
    Precoder scheme = Precoder::MRT;
    RMat nf; ///< S x Kn
    RMat ff; ///< S x Kf

    /// sqrt(eta_sk) restricted to the VR.
    RMat nf_amplitudes(const VrAssignment &vr) const;
    RMat ff_amplitudes(const VrAssignment &vr) const;
};

/// Transmit powers normalized to unit noise.
struct PowerBudget {
    double P = 1.0;
    double Pn = 1.0;
    double Pf = 1.0;

    static PowerBudget from_config(const SystemConfig &cfg);
};

/**
 * Constants for one realization set: NF exact, FF from @p n_mc draws of the
 * NLoS part seeded by @p seed.
 */
PowerConstants power_constants(Precoder scheme, const ChannelSet &ch, const VrAssignment &vr, int n_mc,
                               std::uint64_t seed);

struct PowerCheck {
    bool feasible = false;
    double lhs = 0.0;    ///< total radiated power
    double margin = 0.0; ///< P - lhs
};

/// Evaluate the total-power constraint; feasible when margin >= -tol * P.
PowerCheck check_power(const PowerAllocation &alloc, const PowerConstants &c, const VrAssignment &vr,
                       const PowerBudget &budget, double tol = 1e-9);

/**
 * Equal split of the budget: each of the K users gets P/K, spread with a
 * common coefficient over its VR, so the constraint binds.
 */
PowerAllocation equal_power(Precoder scheme, const PowerConstants &c, const VrAssignment &vr,
                            const PowerBudget &budget);

} // namespace xlris

#endif
