/**
 * @file vr_selection.hpp
 * @brief Greedy subarray pruning that assigns each user its visibility
 * region, and the VR-efficiency metric.
 */
#ifndef XLRIS_VR_SELECTION_HPP
#define XLRIS_VR_SELECTION_HPP

#include "xlris/analytics.hpp"

#include <vector>

namespace xlris {

/// Outcome of one selection run.
struct VrSelection {
    Precoder scheme = Precoder::MRT; ///< scheme whose SINRs drove the selection
    VrAssignment vr;
    std::vector<double> baseline_nf;  ///< full-array SINR per NFUE
    std::vector<double> baseline_ff;  ///< full-array SINR per FFUE
    std::vector<double> threshold_nf; ///< delta * baseline
    std::vector<double> threshold_ff;
    std::vector<double> selected_nf;  ///< SINR with the selected set, others at full array
    std::vector<double> selected_ff;
    std::vector<int> evaluations_nf;  ///< SINR evaluations spent per NFUE
    std::vector<int> evaluations_ff;
    std::vector<bool> fallback_nf;    ///< true when the best solo subarray was kept
    std::vector<bool> fallback_ff;
};

/**
 * Scheme whose SINRs select the VRs: LZF reuses the CZF regions, the other
 * schemes use their own.
 */
Precoder vr_scheme(Precoder scheme);

/**
 * SINR of one user when it uses @p set and every other user keeps the full
 * array. Power is the equal split renormalized to these regions.
 *
 * @param nf true for an NFUE, false for an FFUE
 */
double vr_user_sinr(const ExpectationCache &cache, const PowerBudget &b, bool nf, int k, const std::vector<int> &set);

/**
 * Greedy pruning for every user: scan s = 0..S-1 in ascending order and drop
 * s from the current set when the SINR without it still reaches
 * delta * baseline. Removals are cumulative and other users stay at the full
 * array. Exactly S evaluations are spent per user.
 *
 * @param cache statistics of the selecting scheme at the full-array assignment
 *        (MRT or CZF; both are VR-independent)
 * @throws DomainError if a user has zero baseline SINR or delta is outside (0, 1]
 */
VrSelection select_vrs(const ExpectationCache &cache, const PowerBudget &b, double delta);

/**
 * Re-run the pruning starting from the sets in @p start with given
 * thresholds. Used to check that a selected assignment is a fixed point.
 */
VrAssignment refine_vrs(const ExpectationCache &cache, const PowerBudget &b, const VrAssignment &start,
                        const std::vector<double> &threshold_nf, const std::vector<double> &threshold_ff);

/// Average fraction of active subarrays over all users, in (0, 1].
double vr_efficiency(const VrAssignment &vr);

} // namespace xlris

#endif
