/**
 * @file phase_opt.hpp
 * @brief RIS phase design: max-min FFUE channel gain through a penalized
 * SDP with a linearized spectral-norm term, plus benchmark phase rules.
 */
#ifndef XLRIS_PHASE_OPT_HPP
#define XLRIS_PHASE_OPT_HPP

#include "xlris/conic.hpp"
#include "xlris/precoding.hpp"

#include <string>
#include <vector>

namespace xlris {

/**
 * R_k = B_k A_k B_k^H with B_k = diag(h_k^H) and
 * A_k = alpha^2 Hbar D_k D_k^H Hbar^H + beta^2 tr(D_k D_k^H) I_N, so that
 * v^H R_k v = E{||g~_k masked||^2} for v = e^{-j theta}.
 *
 * @param set active subarrays of FFUE k
 */
CMat build_Rk(const ChannelSet &ch, int k, const std::vector<int> &set);

/// v = e^{-j theta} as used in v^H R_k v.
CVec phase_vector(const RVec &theta);

/// ||V||_* - ||V||_2 for a Hermitian PSD matrix (sum of all but the largest eigenvalue).
double rank_one_residual(const CMat &V);

struct PhaseProblem {
    std::vector<CMat> R; ///< one Hermitian PSD matrix per FFUE
    SolverTolerances tol;
};

/// Solution of one penalized subproblem.
struct InnerSolution {
    CMat V;                  ///< unit-diagonal Hermitian PSD
    double t = 0.0;          ///< min_k tr(R_k V) in normalized units
    double objective = 0.0;  ///< t - rho (||V||_* - ||V||_2) at V
    double surrogate = 0.0;  ///< optimal value of the linearized subproblem
    double dual_gap = 0.0;   ///< |primal - dual| of the conic solve
    conic::SolveStatus status = conic::SolveStatus::CapReached;
};

/**
 * Solve max t - rho(||V||_* - Vbar) s.t. t <= tr(R_k V), V_nn = 1, V >= 0
 * with Vbar the linearization of ||V||_2 at @p anchor. The problem is
 * solved through its dual, whose LMI is 2N x 2N after realification, and V
 * is read from the dual matrix.
 *
 * @param R normalized gain matrices
 * @throws SolverError if the conic solver fails
 */
InnerSolution solve_inner(const std::vector<CMat> &R, const CMat &anchor, double rho);

struct PhaseTraceRow {
    int outer = 0;
    int inner = 0;
    double rho = 0.0;
    double t = 0.0;        ///< min_k tr(R_k V), original units
    double objective = 0.0; ///< penalized objective, normalized units
    double residual = 0.0;
    double min_eig = 0.0;
};

struct PhaseSolution {
    CMat V;
    RVec theta;            ///< extracted phases in [0, 2pi)
    double residual = 0.0; ///< ||V||_* - ||V||_2
    double t_sdp = 0.0;    ///< min_k tr(R_k V) at the final V (original units)
    double t_phases = 0.0; ///< min_k v^H R_k v at the extracted phases
    bool rank_one = false; ///< residual <= eps
    int outer_scalings = 0; ///< number of penalty increases
    int solves = 0;
    std::vector<PhaseTraceRow> trace;
};

/**
 * Penalty loop: inner SCA iterations at fixed rho until the residual drops
 * below eps, the penalized objective stalls or I2 is hit, then rho <- l rho
 * until the residual is below eps or I1 penalty values were tried.
 * Extraction takes theta_n = -arg(u_n) of the leading eigenvector u.
 *
 * @param V0 unit-diagonal PSD start, typically v0 v0^H from random phases
 */
PhaseSolution run_penalty(const PhaseProblem &problem, const CMat &V0);

/// Phases that co-phase h_k^H Theta b_N for FFUE @p k.
RVec heuristic_phases(const ChannelSet &ch, int k);

/// min_k v^H R_k v for phases theta.
double min_gain(const std::vector<CMat> &R, const RVec &theta);

/**
 * Optimized phases for the current VRs, started from the phases stored in
 * @p ch. Returns the full solution; the caller copies theta into the channel.
 */
PhaseSolution optimize_phases(const ChannelSet &ch, const VrAssignment &vr, const SolverTolerances &tol);

} // namespace xlris

#endif
