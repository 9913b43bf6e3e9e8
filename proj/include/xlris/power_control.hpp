/**
 * @file power_control.hpp
 * @brief Max-min power control by successive convex approximation for MRT,
 * CZF and LZF.
 *
 * Optimization variables are normalized so that the total-power constraint
 * reads ||z||^2 <= 1 (MRT, LZF: z_sk = sqrt(P_x eta_sk c_sk / P)) or
 * sum_k p_k <= K (CZF: p_k = K P_x eta_k sum_s c_sk / P), where P_x is the
 * group power of the user and K the number of users.
 */
#ifndef XLRIS_POWER_CONTROL_HPP
#define XLRIS_POWER_CONTROL_HPP

#include "xlris/analytics.hpp"
#include "xlris/bounds.hpp"
#include "xlris/conic.hpp"

#include <string>
#include <vector>

namespace xlris {

/// One user in the normalized variable layout.
struct PcUser {
    bool nf = true;
    int k = 0;                  ///< index within the group
    int offset = 0;             ///< first variable
    int count = 0;              ///< number of variables (|VR| or 1 for CZF)
    std::vector<int> subarrays; ///< active subarrays
};

/**
 * SINRs of all users as functions of the normalized variables, built from an
 * ExpectationCache. Users are ordered NFUEs first, then FFUEs.
 */
class PowerModel {
public:
    PowerModel(const ExpectationCache &cache, const VrAssignment &vr, const PowerBudget &budget);

    Precoder scheme() const { return scheme_; }
    int num_vars() const { return nz_; }
    int num_users() const { return static_cast<int>(users_.size()); }
    int Kn() const { return Kn_; }
    int Kf() const { return Kf_; }
    const PcUser &user(int u) const { return users_.at(u); }
    /// True when power is one coefficient per user (CZF).
    bool per_user() const { return scheme_ == Precoder::CZF; }

    /// Equal split of the budget scaled by @p fraction (1 binds the budget).
    RVec equal_point(double fraction) const;
    /// Share of the budget in use: ||z||^2 or sum p / K.
    double power_fraction(const RVec &z) const;
    PowerAllocation allocation(const RVec &z) const;
    RVec point(const PowerAllocation &alloc) const;

    double signal(int u, const RVec &z) const;
    /// Interference plus beamforming uncertainty plus noise.
    double interference(int u, const RVec &z) const;
    double sinr(int u, const RVec &z) const { return signal(u, z) / interference(u, z); }
    RVec sinrs(const RVec &z) const;

    /// MRT/LZF: DS = |d_u^T z_u|^2 with d_u returned in the full variable space.
    CVec signal_vector(int u) const;
    /**
     * MRT/LZF: convex upper bound of interference(u, .) tangent at z0. The
     * variables occupy the first num_vars() entries of @p z0, and the bound is
     * returned in dimension z0.size().
     */
    ConvexQuadratic interference_upper(int u, const RVec &z0) const;

    /// CZF: DS = D_u p_u.
    double signal_coeff(int u) const;
    /// CZF: interference = 1 + e_u^T p.
    RVec interference_coeffs(int u) const;
    /**
     * CZF: convex upper bound of T_ref tau (1 + e_u^T p) tangent at x0, where
     * p occupies the first num_vars() entries of @p x0 and tau sits at
     * @p tau_index. Returned in dimension x0.size().
     */
    ConvexQuadratic product_upper(int u, double T_ref, const RVec &x0, int tau_index) const;

    /// Largest single-user SNR of each group when the whole budget serves that user.
    double max_single_user_snr(bool nf) const;

private:
    struct Term {
        int v = 0;  ///< interfering user (may equal the user for the BU term)
        RMat X;     ///< MRT/LZF: quadratic form in z_v
        double e = 0.0; ///< CZF: coefficient of p_v
    };

    Precoder scheme_;
    int Kn_ = 0;
    int Kf_ = 0;
    int nz_ = 0;
    double P_ = 0.0;
    std::vector<PcUser> users_;
    std::vector<std::vector<Term>> terms_;
    std::vector<CVec> d_;       ///< MRT/LZF signal vectors, local to the user's block
    std::vector<double> D_;     ///< CZF signal coefficients
    std::vector<RVec> eta_per_var_; ///< eta_s = f_s z_s^2 (MRT/LZF) or eta = f_0 p (CZF)
    int S_ = 0;
};

/// Relative tolerance on SINR_u / gamma_u >= 1 when deciding that the QoS floors hold.
inline constexpr double kFloorTol = 1e-6;

/// Equal power with 10% slack, the SCA starting point.
RVec feasible_init(const PowerModel &m);

struct ScaOptions {
    double w_n = 0.5;
    double w_f = 0.5;
    bool enforce_qos = false;
    std::vector<double> qos_nf; ///< SE floors (bit/s/Hz) per NFUE
    std::vector<double> qos_ff; ///< SE floors per FFUE
    double eps1 = 1e-3;
    int max_iter = 30;
};

/// Variable layout of one convex subproblem.
struct SubproblemSpec {
    conic::ConicProgram program{1};
    int nz = 0;
    int tau_n = -1; ///< index of T_n / T_ref_n, -1 when the group is empty
    int tau_f = -1;
    int t_n = -1;
    int t_f = -1;
    double T_ref_n = 0.0;
    double T_ref_f = 0.0;
};

/**
 * Convex surrogate at anchor z0 whose group SINR targets are expressed
 * relative to T_ref_n and T_ref_f. With @p qos the per-user SE floors are
 * added as convex constraints. When @p anchor_sinr is given, each SINR floor
 * is capped at the anchor SINR so that the anchor stays feasible.
 */
SubproblemSpec build_subproblem(const PowerModel &m, const RVec &z0, double T_ref_n, double T_ref_f,
                                const ScaOptions &opt, bool qos, const RVec *anchor_sinr = nullptr);

/**
 * Floor-restoration surrogate: maximize beta subject to
 * SINR_u >= beta_ref beta gamma_u for every user with gamma_u > 0 and the
 * power budget. beta sits at index tau_n of the returned layout.
 */
SubproblemSpec build_restoration(const PowerModel &m, const RVec &z0, const std::vector<double> &gamma,
                                 double beta_ref);

struct ScaTraceRow {
    int iter = 0;
    std::string phase;                ///< init, restore (reaching the QoS floors) or main
    double objective = 0.0;           ///< exact objective at the accepted point
    double candidate_objective = 0.0; ///< exact objective at the subproblem solution
    double t_n = 0.0;                 ///< exact min NFUE SE
    double t_f = 0.0;                 ///< exact min FFUE SE
    double declared_T_n = 0.0;        ///< T_n returned by the subproblem
    double declared_T_f = 0.0;
    double power_margin = 0.0;        ///< 1 - used budget fraction
    double max_violation = 0.0;       ///< largest QoS shortfall in bit/s/Hz (0 when met or disabled)
    bool qos = false;                 ///< QoS constraints were part of the subproblem
    bool anchor_qos_ok = true;        ///< the anchor met every QoS floor
    bool accepted = true;
    std::string status;
};

struct ScaResult {
    PowerAllocation alloc;
    RVec z;
    SinrSet sinr;
    SeReport report;
    int iterations = 0;             ///< main-phase subproblems solved
    int restoration_iterations = 0; ///< subproblems spent reaching the QoS floors
    bool converged = false;
    bool qos_enforced = false;   ///< final point was computed with the QoS floors
    bool qos_infeasible = false; ///< floors could not be met and were dropped
    double qos_violation = 0.0;  ///< largest SE shortfall of the final point in bit/s/Hz
    double declared_T_n = 0.0;
    double declared_T_f = 0.0;
    double initial_objective = 0.0; ///< objective at the equal-power start
    double start_objective = 0.0;   ///< objective where the main phase started
    double upper_bound = 0.0;    ///< w_n log2(1 + max NF SNR) + w_f log2(1 + max FF SNR)
    std::vector<ScaTraceRow> trace;
};

/**
 * Alternate convex subproblems until the fractional objective increase is
 * below eps1 or max_iter subproblems were solved. With QoS floors enabled and
 * violated at the equal-power start, a restoration phase first raises
 * min_u SINR_u / gamma_u until every floor holds. If that fails the floors
 * are dropped and flagged, and the main phase runs without them.
 */
ScaResult sca_solve(const ExpectationCache &cache, const VrAssignment &vr, const PowerBudget &budget,
                    const ScaOptions &opt);

} // namespace xlris

#endif
