/**
 * @file phase_opt.cpp
 * @brief Penalized SDP phase design and benchmark phase rules.
 */
#include "xlris/phase_opt.hpp"

#include <fmt/format.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

namespace xlris {

namespace {

using conic::SpMat;

SpMat to_sparse(const RMat &M)
{
    return M.sparseView(1.0, 0.0);
}

Eigen::SelfAdjointEigenSolver<CMat> eig(const CMat &V)
{
    return Eigen::SelfAdjointEigenSolver<CMat>(0.5 * (V + V.adjoint()));
}

double min_trace(const std::vector<CMat> &R, const CMat &V)
{
    double t = std::numeric_limits<double>::infinity();
    for (const auto &Rk : R) t = std::min(t, std::real((Rk * V).trace()));
    return t;
}

CMat unit_diagonal(const CMat &V)
{
    const auto n = V.rows();
    RVec d(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double v = std::real(V(i, i));
        if (!(v > 0.0)) throw SolverError("phase SDP returned a matrix with a nonpositive diagonal entry");
        d(i) = 1.0 / std::sqrt(v);
    }
    CMat W = d.asDiagonal() * V * d.asDiagonal();
    W = 0.5 * (W + W.adjoint());
    for (Eigen::Index i = 0; i < n; ++i) W(i, i) = 1.0;
    return W;
}

} // namespace

CMat build_Rk(const ChannelSet &ch, int k, const std::vector<int> &set)
{
    if (k < 0 || k >= ch.Kf()) throw InputError(fmt::format("FFUE index {} outside [0, {})", k, ch.Kf()));
    if (set.empty()) throw ConfigError(fmt::format("FFUE {} has an empty visibility region", k));
    const int N = ch.N;
    CMat HD(N, static_cast<int>(set.size()) * ch.Mstar);
    for (std::size_t i = 0; i < set.size(); ++i) {
        const int s = set[i];
        if (s < 0 || s >= ch.S) throw ConfigError(fmt::format("subarray id {} outside [0, {})", s, ch.S));
        HD.middleCols(static_cast<int>(i) * ch.Mstar, ch.Mstar) = ch.H2_los_sub(s);
    }
    const double a2 = ch.alpha2 * ch.alpha2;
    const double b2 = ch.beta2 * ch.beta2;
    CMat A = a2 * HD * HD.adjoint();
    A.diagonal().array() += b2 * static_cast<double>(HD.cols());
    const CVec h = ch.h.col(k);
    CMat R = h.conjugate().asDiagonal() * A * h.asDiagonal();
    return 0.5 * (R + R.adjoint());
}

CVec phase_vector(const RVec &theta)
{
    CVec v(theta.size());
    for (Eigen::Index n = 0; n < theta.size(); ++n) v(n) = std::polar(1.0, -theta(n));
    return v;
}

double rank_one_residual(const CMat &V)
{
    const RVec ev = eig(V).eigenvalues();
    double sum = 0.0;
    for (Eigen::Index i = 0; i + 1 < ev.size(); ++i) sum += std::max(ev(i), 0.0);
    return sum;
}

double min_gain(const std::vector<CMat> &R, const RVec &theta)
{
    const CVec v = phase_vector(theta);
    double t = std::numeric_limits<double>::infinity();
    for (const auto &Rk : R) t = std::min(t, std::real(v.dot(Rk * v)));
    return t;
}

InnerSolution solve_inner(const std::vector<CMat> &R, const CMat &anchor, double rho)
{
    if (R.empty()) throw InputError("phase SDP needs at least one FFUE");
    const int N = static_cast<int>(R[0].rows());
    const int K = static_cast<int>(R.size());
    const int nvar = N + K;

    const auto es = eig(anchor);
    const CVec u = es.eigenvectors().col(N - 1);
    const CMat U = u * u.adjoint();

    conic::ConicProgram prog(nvar);
    RVec c = RVec::Zero(nvar);
    c.head(N).setOnes();
    prog.set_objective(c);

    // Dual LMI: Diag(y) - rho u u^H - sum_k lambda_k R_k >= 0.
    std::vector<std::pair<int, SpMat>> Fi;
    for (int n = 0; n < N; ++n) {
        SpMat E(2 * N, 2 * N);
        E.insert(n, n) = 1.0;
        E.insert(N + n, N + n) = 1.0;
        Fi.emplace_back(n, E);
    }
    double rmax = 0.0;
    for (int k = 0; k < K; ++k) {
        Fi.emplace_back(N + k, to_sparse(-conic::realify_hermitian(R[k])));
        rmax = std::max(rmax, eig(R[k]).eigenvalues().maxCoeff());
    }
    prog.add_psd(conic::realify_hermitian(-rho * U), std::move(Fi), "phase-lmi");

    RMat Fl = RMat::Zero(K + 1, nvar);
    RVec fl = RVec::Zero(K + 1);
    for (int k = 0; k < K; ++k) {
        Fl(k, N + k) = 1.0;
        Fl(K, N + k) = 1.0;
    }
    fl(K) = -1.0;
    prog.add_nonneg(Fl, fl, "lambda");

    RVec x0(nvar);
    x0.head(N).setConstant(rho + 2.0 * rmax + 1.0);
    x0.tail(K).setConstant(2.0 / K);
    prog.set_warm_start(x0);

    const conic::SolveResult res = conic::solve(prog);
    if (res.status != conic::SolveStatus::Optimal && res.status != conic::SolveStatus::NearOptimal)
        throw SolverError(fmt::format("phase SDP failed ({}): {}; rho={:.3e}, gap={:.3e}, newton={}",
                                      conic::to_string(res.status), res.message, rho, res.gap, res.newton_steps));

    InnerSolution sol;
    sol.status = res.status;
    sol.V = unit_diagonal(2.0 * conic::complexify(res.psd_duals.at(0)));
    sol.t = min_trace(R, sol.V);
    const double lmax = eig(sol.V).eigenvalues().maxCoeff();
    sol.objective = sol.t - rho * (static_cast<double>(N) - lmax);
    sol.surrogate = res.objective - rho * N;
    const double primal = sol.t + rho * std::real(u.dot(sol.V * u)) - rho * N;
    sol.dual_gap = std::abs(primal - sol.surrogate);
    return sol;
}

PhaseSolution run_penalty(const PhaseProblem &problem, const CMat &V0)
{
    if (problem.R.empty()) throw InputError("phase problem has no FFUEs");
    const int N = static_cast<int>(problem.R[0].rows());
    if (V0.rows() != N || V0.cols() != N) throw InputError("initial V has the wrong size");
    const auto &tol = problem.tol;

    // Normalize gains so that the penalty scale is comparable across instances.
    double scale = 0.0;
    for (const auto &Rk : problem.R) scale = std::max(scale, std::real(Rk.trace()) / N);
    if (!(scale > 0.0)) throw DomainError("all FFUE gain matrices are zero");
    std::vector<CMat> R;
    for (const auto &Rk : problem.R) R.push_back(Rk / scale);

    PhaseSolution out;
    CMat V = unit_diagonal(V0);
    double rho = tol.rho0;
    out.residual = rank_one_residual(V);
    for (int outer = 0; outer < tol.I1; ++outer) {
        double prev = min_trace(R, V) - rho * out.residual;
        for (int inner = 1; inner <= tol.I2; ++inner) {
            const InnerSolution s = solve_inner(R, V, rho);
            ++out.solves;
            V = s.V;
            out.residual = rank_one_residual(V);
            const auto ev = eig(V).eigenvalues();
            out.trace.push_back({outer, inner, rho, s.t * scale, s.objective, out.residual, ev.minCoeff()});
            if (out.residual <= tol.eps) break;
            if (std::abs(s.objective - prev) <= 1e-9 * std::max(1.0, std::abs(prev))) break;
            prev = s.objective;
        }
        if (out.residual <= tol.eps) break;
        if (outer + 1 < tol.I1) {
            rho *= tol.scale;
            ++out.outer_scalings;
        }
    }
    out.rank_one = out.residual <= tol.eps;
    out.V = V;
    out.t_sdp = min_trace(R, V) * scale;
    const CVec u = eig(V).eigenvectors().col(N - 1);
    out.theta.resize(N);
    for (int n = 0; n < N; ++n) out.theta(n) = wrap_phase(-std::arg(u(n)));
    out.t_phases = min_gain(problem.R, out.theta);
    return out;
}

RVec heuristic_phases(const ChannelSet &ch, int k)
{
    if (k < 0 || k >= ch.Kf()) throw InputError(fmt::format("FFUE index {} outside [0, {})", k, ch.Kf()));
    RVec theta(ch.N);
    for (int n = 0; n < ch.N; ++n) theta(n) = wrap_phase(-std::arg(std::conj(ch.h(n, k)) * ch.b_ris(n)));
    return theta;
}

PhaseSolution optimize_phases(const ChannelSet &ch, const VrAssignment &vr, const SolverTolerances &tol)
{
    if (ch.Kf() == 0) throw InputError("phase optimization needs at least one FFUE");
    PhaseProblem p;
    p.tol = tol;
    for (int k = 0; k < ch.Kf(); ++k) p.R.push_back(build_Rk(ch, k, vr.ff.at(k)));
    const CVec v0 = phase_vector(ch.theta);
    return run_penalty(p, v0 * v0.adjoint());
}

} // namespace xlris
