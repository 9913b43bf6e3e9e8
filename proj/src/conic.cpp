/**
 * @file conic.cpp
 * @brief Log-barrier interior-point method for mixed conic programs.
 *
 * The solver follows the classic barrier scheme: a phase I program finds a
 * strictly feasible point along the cone identity direction, then damped
 * Newton centering is repeated while the barrier weight grows by mu. Equality
 * constraints are kept satisfied exactly by restricting every Newton step to
 * the null space of the equality rows.
 */
#include "xlris/conic.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace xlris::conic {

std::string to_string(ConeKind k)
{
    switch (k) {
    case ConeKind::Nonneg: return "nonneg";
    case ConeKind::Soc: return "soc";
    case ConeKind::Psd: return "psd";
    case ConeKind::Exp: return "exp";
    }
    return "?";
}

std::string to_string(SolveStatus s)
{
    switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::NearOptimal: return "near-optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::CapReached: return "cap-reached";
    }
    return "?";
}

double ConeBlock::nu() const
{
    switch (kind) {
    case ConeKind::Nonneg: return static_cast<double>(dim);
    case ConeKind::Soc: return 2.0;
    case ConeKind::Psd: return static_cast<double>(dim);
    case ConeKind::Exp: return 3.0;
    }
    return 0.0;
}

ConicProgram::ConicProgram(int nvar) : nvar_(nvar), c_(RVec::Zero(nvar)), A_(0, nvar), b_(0)
{
    if (nvar < 1) throw InputError("conic program needs at least one variable");
}

void ConicProgram::set_objective(const RVec &c)
{
    if (c.size() != nvar_) throw InputError("objective length does not match the variable count");
    c_ = c;
}

namespace {

void check_vector_block(const RMat &F, const RVec &f, int nvar, const char *what)
{
    if (F.cols() != nvar) throw InputError(fmt::format("{} block has {} columns, expected {}", what, F.cols(), nvar));
    if (F.rows() != f.size()) throw InputError(fmt::format("{} block offset length mismatch", what));
    if (F.rows() < 1) throw InputError(fmt::format("{} block is empty", what));
}

} // namespace

int ConicProgram::add_nonneg(const RMat &F, const RVec &f, std::string label)
{
    check_vector_block(F, f, nvar_, "nonneg");
    blocks_.push_back({ConeKind::Nonneg, static_cast<int>(F.rows()), F, f, {}, {}, std::move(label)});
    return static_cast<int>(blocks_.size()) - 1;
}

int ConicProgram::add_soc(const RMat &F, const RVec &f, std::string label)
{
    check_vector_block(F, f, nvar_, "soc");
    blocks_.push_back({ConeKind::Soc, static_cast<int>(F.rows()), F, f, {}, {}, std::move(label)});
    return static_cast<int>(blocks_.size()) - 1;
}

int ConicProgram::add_exp(const RMat &F, const RVec &f, std::string label)
{
    check_vector_block(F, f, nvar_, "exp");
    if (F.rows() != 3) throw InputError("exp block must have exactly three rows");
    blocks_.push_back({ConeKind::Exp, 3, F, f, {}, {}, std::move(label)});
    return static_cast<int>(blocks_.size()) - 1;
}

int ConicProgram::add_psd(const RMat &F0, std::vector<std::pair<int, SpMat>> Fi, std::string label)
{
    const auto n = F0.rows();
    if (n < 1 || F0.cols() != n) throw InputError("psd block constant term must be square and nonempty");
    if ((F0 - F0.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + F0.cwiseAbs().maxCoeff()))
        throw InputError("psd block constant term must be symmetric");
    for (const auto &[i, M] : Fi) {
        if (i < 0 || i >= nvar_) throw InputError(fmt::format("psd coefficient for variable {} out of range", i));
        if (M.rows() != n || M.cols() != n) throw InputError("psd coefficient has the wrong order");
        const RMat D = RMat(M);
        if ((D - D.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + D.cwiseAbs().maxCoeff()))
            throw InputError(fmt::format("psd coefficient for variable {} is not symmetric", i));
    }
    ConeBlock b;
    b.kind = ConeKind::Psd;
    b.dim = static_cast<int>(n);
    b.F0 = F0;
    b.Fi = std::move(Fi);
    b.label = std::move(label);
    blocks_.push_back(std::move(b));
    return static_cast<int>(blocks_.size()) - 1;
}

void ConicProgram::add_equality(const RMat &A, const RVec &b)
{
    if (A.cols() != nvar_ || A.rows() != b.size()) throw InputError("equality block dimension mismatch");
    RMat A2(A_.rows() + A.rows(), nvar_);
    A2 << A_, A;
    RVec b2(b_.size() + b.size());
    b2 << b_, b;
    A_ = std::move(A2);
    b_ = std::move(b2);
}

void ConicProgram::set_warm_start(const RVec &x)
{
    if (x.size() != nvar_) throw InputError("warm start length does not match the variable count");
    x0_ = x;
}

double ConicProgram::nu() const
{
    double v = 0.0;
    for (const auto &b : blocks_) v += b.nu();
    return v;
}

void ConicProgram::validate() const
{
    if (!c_.allFinite()) throw InputError("objective has non-finite entries");
    if (blocks_.empty()) throw InputError("conic program has no cone blocks");
    for (const auto &b : blocks_) {
        if (b.kind == ConeKind::Psd) {
            if (!b.F0.allFinite()) throw InputError("psd block '" + b.label + "' has non-finite entries");
        } else if (!b.F.allFinite() || !b.f.allFinite()) {
            throw InputError("block '" + b.label + "' has non-finite entries");
        }
    }
    if (!A_.allFinite() || !b_.allFinite()) throw InputError("equality constraints have non-finite entries");
}

std::string ConicProgram::dump() const
{
    std::ostringstream os;
    os.precision(17);
    os << "conic " << nvar_ << ' ' << blocks_.size() << ' ' << A_.rows() << '\n';
    os << "objective";
    for (Eigen::Index i = 0; i < c_.size(); ++i) os << ' ' << c_(i);
    os << '\n';
    for (const auto &b : blocks_) {
        os << "block " << to_string(b.kind) << ' ' << b.dim << ' ' << (b.label.empty() ? "-" : b.label) << '\n';
        if (b.kind == ConeKind::Psd) {
            os << "F0";
            for (Eigen::Index r = 0; r < b.F0.rows(); ++r)
                for (Eigen::Index c = r; c < b.F0.cols(); ++c)
                    if (b.F0(r, c) != 0.0) os << ' ' << r << ',' << c << '=' << b.F0(r, c);
            os << '\n';
            for (const auto &[i, M] : b.Fi) {
                os << "F" << i;
                for (int k = 0; k < M.outerSize(); ++k)
                    for (SpMat::InnerIterator it(M, k); it; ++it)
                        if (it.row() <= it.col()) os << ' ' << it.row() << ',' << it.col() << '=' << it.value();
                os << '\n';
            }
        } else {
            for (Eigen::Index r = 0; r < b.F.rows(); ++r) {
                os << "row";
                for (Eigen::Index c = 0; c < b.F.cols(); ++c) os << ' ' << b.F(r, c);
                os << " | " << b.f(r) << '\n';
            }
        }
    }
    for (Eigen::Index r = 0; r < A_.rows(); ++r) {
        os << "eq";
        for (Eigen::Index c = 0; c < A_.cols(); ++c) os << ' ' << A_(r, c);
        os << " | " << b_(r) << '\n';
    }
    return os.str();
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

RMat psd_matrix(const ConeBlock &b, const RVec &x)
{
    RMat S = b.F0;
    for (const auto &[i, M] : b.Fi)
        if (x(i) != 0.0) S += x(i) * M;
    return S;
}

/// Barrier value of one block, +inf outside the interior.
double block_value(const ConeBlock &b, const RVec &x)
{
    switch (b.kind) {
    case ConeKind::Nonneg: {
        const RVec s = b.F * x + b.f;
        if ((s.array() <= 0.0).any()) return kInf;
        return -s.array().log().sum();
    }
    case ConeKind::Soc: {
        const RVec s = b.F * x + b.f;
        const double t = s(0);
        const double D = t * t - s.tail(s.size() - 1).squaredNorm();
        if (t <= 0.0 || D <= 0.0) return kInf;
        return -std::log(D);
    }
    case ConeKind::Exp: {
        const RVec s = b.F * x + b.f;
        const double y = s(1), z = s(2);
        if (y <= 0.0 || z <= 0.0) return kInf;
        const double psi = y * std::log(z / y) - s(0);
        if (psi <= 0.0) return kInf;
        return -std::log(psi) - std::log(y) - std::log(z);
    }
    case ConeKind::Psd: {
        Eigen::LLT<RMat> llt(psd_matrix(b, x));
        if (llt.info() != Eigen::Success) return kInf;
        const RMat &L = llt.matrixLLT();
        double v = 0.0;
        for (Eigen::Index i = 0; i < L.rows(); ++i) {
            if (!(L(i, i) > 0.0)) return kInf;
            v -= 2.0 * std::log(L(i, i));
        }
        return v;
    }
    }
    return kInf;
}

double barrier_value(const std::vector<ConeBlock> &blocks, const RVec &x)
{
    double v = 0.0;
    for (const auto &b : blocks) {
        const double bv = block_value(b, x);
        if (!std::isfinite(bv)) return kInf;
        v += bv;
    }
    return v;
}

/// Gradient and Hessian of the barrier with respect to the slack s of a vector block.
void vector_block_derivs(const ConeBlock &b, const RVec &s, RVec &gs, RMat &Hs)
{
    const auto m = s.size();
    gs.resize(m);
    Hs.setZero(m, m);
    switch (b.kind) {
    case ConeKind::Nonneg:
        gs = -s.cwiseInverse();
        Hs.diagonal() = s.cwiseInverse().cwiseAbs2();
        break;
    case ConeKind::Soc: {
        const double D = s(0) * s(0) - s.tail(m - 1).squaredNorm();
        RVec Js = -s;
        Js(0) = s(0);
        gs = -2.0 * Js / D;
        Hs = 4.0 * Js * Js.transpose() / (D * D);
        Hs(0, 0) -= 2.0 / D;
        for (Eigen::Index i = 1; i < m; ++i) Hs(i, i) += 2.0 / D;
        break;
    }
    case ConeKind::Exp: {
        const double y = s(1), z = s(2);
        const double psi = y * std::log(z / y) - s(0);
        Eigen::Vector3d dpsi(-1.0, std::log(z / y) - 1.0, y / z);
        Eigen::Matrix3d d2psi = Eigen::Matrix3d::Zero();
        d2psi(1, 1) = -1.0 / y;
        d2psi(1, 2) = d2psi(2, 1) = 1.0 / z;
        d2psi(2, 2) = -y / (z * z);
        gs = -dpsi / psi;
        gs(1) -= 1.0 / y;
        gs(2) -= 1.0 / z;
        Hs = dpsi * dpsi.transpose() / (psi * psi) - d2psi / psi;
        Hs(1, 1) += 1.0 / (y * y);
        Hs(2, 2) += 1.0 / (z * z);
        break;
    }
    case ConeKind::Psd: break;
    }
}

/// Accumulate the x-space gradient and Hessian of all blocks.
void barrier_derivs(const std::vector<ConeBlock> &blocks, const RVec &x, RVec &g, RMat &H)
{
    const auto n = x.size();
    g.setZero(n);
    H.setZero(n, n);
    for (const auto &b : blocks) {
        if (b.kind == ConeKind::Psd) {
            const RMat S = psd_matrix(b, x);
            const RMat W = S.llt().solve(RMat::Identity(S.rows(), S.cols()));
            std::vector<RMat> WF(b.Fi.size());
            for (std::size_t a = 0; a < b.Fi.size(); ++a) {
                WF[a] = W * b.Fi[a].second;
                g(b.Fi[a].first) -= WF[a].trace();
            }
            for (std::size_t a = 0; a < b.Fi.size(); ++a)
                for (std::size_t c = a; c < b.Fi.size(); ++c) {
                    const double h = WF[a].cwiseProduct(WF[c].transpose()).sum();
                    H(b.Fi[a].first, b.Fi[c].first) += h;
                    if (c != a) H(b.Fi[c].first, b.Fi[a].first) += h;
                }
        } else {
            const RVec s = b.F * x + b.f;
            RVec gs;
            RMat Hs;
            vector_block_derivs(b, s, gs, Hs);
            g.noalias() += b.F.transpose() * gs;
            H.noalias() += b.F.transpose() * Hs * b.F;
        }
    }
}

/// Smallest alpha such that s(x) + alpha e is interior, for the block's identity e.
double required_shift(const ConeBlock &b, const RVec &x)
{
    switch (b.kind) {
    case ConeKind::Nonneg: return -(b.F * x + b.f).minCoeff();
    case ConeKind::Soc: {
        const RVec s = b.F * x + b.f;
        return s.tail(s.size() - 1).norm() - s(0);
    }
    case ConeKind::Psd: {
        Eigen::SelfAdjointEigenSolver<RMat> es(psd_matrix(b, x), Eigen::EigenvaluesOnly);
        return -es.eigenvalues().minCoeff();
    }
    case ConeKind::Exp: {
        const RVec s = b.F * x + b.f;
        auto interior = [&](double a) {
            const double y = s(1) + a, z = s(2) + a;
            if (y <= 0.0 || z <= 0.0) return false;
            return y * std::log(z / y) - (s(0) - a) > 0.0;
        };
        if (interior(0.0)) return -1e-3;
        double a = 1.0;
        while (!interior(a)) a *= 2.0;
        return a;
    }
    }
    return 0.0;
}

/**
 * Solve H d = -g after symmetric diagonal scaling, which keeps the Newton
 * system accurate when slacks of different blocks differ by many orders of
 * magnitude near the boundary.
 */
RVec solve_scaled(const RMat &H, const RVec &g)
{
    RVec d = H.diagonal().cwiseAbs();
    for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = d(i) > 0.0 ? 1.0 / std::sqrt(d(i)) : 1.0;
    const RMat Hs = d.asDiagonal() * H * d.asDiagonal();
    Eigen::LDLT<RMat> ldlt(Hs);
    RVec y = ldlt.solve(-d.cwiseProduct(g));
    if (ldlt.info() != Eigen::Success || !y.allFinite()) {
        const RMat Hreg = Hs + 1e-12 * RMat::Identity(Hs.rows(), Hs.cols());
        y = Hreg.ldlt().solve(-d.cwiseProduct(g));
    }
    return d.cwiseProduct(y);
}

struct Centering {
    int steps = 0;
    bool capped = false;
};

/// Result of the barrier loop on a program that already has a strictly feasible point.
struct BarrierRun {
    RVec x;
    double t = 1.0;
    int newton = 0;
    bool capped = false;
    bool stopped_early = false;
};

class BarrierSolver {
public:
    BarrierSolver(const ConicProgram &p, const SolverSettings &s) : p_(p), s_(s)
    {
        const RMat &A = p.eq_matrix();
        const int n = p.num_vars();
        if (A.rows() == 0) {
            null_ = RMat::Identity(n, n);
        } else {
            Eigen::JacobiSVD<RMat> svd(A, Eigen::ComputeFullV);
            const double tol = 1e-12 * std::max(1.0, svd.singularValues().maxCoeff()) * n;
            int rank = 0;
            for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
                if (svd.singularValues()(i) > tol) ++rank;
            if (rank == n) throw InputError("equality constraints leave no degrees of freedom");
            null_ = svd.matrixV().rightCols(n - rank);
        }
    }

    /**
     * Run the barrier method from strictly feasible x. When early_stop is set
     * the loop exits as soon as it returns true for the current iterate.
     */
    template <typename Stop>
    BarrierRun run(RVec x, Stop early_stop, int newton_budget)
    {
        BarrierRun r;
        const double nu = p_.nu();
        const auto &c = p_.objective();
        double t = 1.0;
        {
            // Pick t so that the start is as close to centered as possible:
            // minimize the Newton decrement of t c + g over t.
            RVec g;
            RMat H;
            barrier_derivs(p_.blocks(), x, g, H);
            const double cn = c.norm();
            if (cn > 0.0) {
                const RVec hc = solve_scaled(H, -c);
                const RVec hg = solve_scaled(H, -g);
                const double chc = c.dot(hc);
                const double est = chc > 0.0 ? -c.dot(hg) / chc : 0.0;
                const double fallback = 1e-3 * g.norm() / cn;
                t = std::clamp(est > 0.0 && std::isfinite(est) ? est : fallback, 1e-8, 1e8);
            }
        }
        while (true) {
            Centering ce = center(x, t, newton_budget - r.newton, early_stop, r.stopped_early);
            r.newton += ce.steps;
            if (r.stopped_early) break;
            if (ce.capped) {
                r.capped = true;
                break;
            }
            const double gap = nu / t;
            const double target = std::max(s_.gap_abs, s_.gap_rel * std::abs(c.dot(x)));
            if (gap <= target) break;
            t *= s_.mu;
        }
        r.x = std::move(x);
        r.t = t;
        return r;
    }

    /// Newton direction of the centering problem at x for barrier weight t.
    RVec newton_direction(const RVec &x, double t) const
    {
        RVec g;
        RMat H;
        barrier_derivs(p_.blocks(), x, g, H);
        g += t * p_.objective();
        const bool reduced = null_.cols() != x.size();
        const RMat Hr = reduced ? RMat(null_.transpose() * H * null_) : H;
        const RVec gr = reduced ? RVec(null_.transpose() * g) : g;
        const RVec dz = solve_scaled(Hr, gr);
        return reduced ? RVec(null_ * dz) : dz;
    }

private:
    template <typename Stop>
    Centering center(RVec &x, double t, int budget, Stop early_stop, bool &stopped)
    {
        Centering ce;
        const auto &c = p_.objective();
        const bool reduced = null_.cols() != x.size();
        double phi = barrier_value(p_.blocks(), x);
        for (int it = 0; it < s_.max_center; ++it) {
            if (ce.steps >= budget) {
                ce.capped = true;
                return ce;
            }
            RVec g;
            RMat H;
            barrier_derivs(p_.blocks(), x, g, H);
            g += t * c;
            // Newton step restricted to the null space of the equality rows.
            const RMat Hr = reduced ? RMat(null_.transpose() * H * null_) : H;
            const RVec gr = reduced ? RVec(null_.transpose() * g) : g;
            RVec dz = solve_scaled(Hr, gr);
            const RVec dx = reduced ? RVec(null_ * dz) : dz;
            const double dec2 = -g.dot(dx);
            ++ce.steps;
            if (!dx.allFinite()) return ce;
            if (dec2 / 2.0 <= 1e-11) return ce;
            // Backtracking: stay interior, then require sufficient decrease.
            double alpha = 1.0;
            double phi_new = kInf;
            int halvings = 0;
            while (halvings < 80) {
                const RVec xn = x + alpha * dx;
                phi_new = barrier_value(p_.blocks(), xn);
                if (std::isfinite(phi_new)) {
                    const double delta = t * alpha * c.dot(dx) + (phi_new - phi);
                    if (delta <= 0.25 * alpha * g.dot(dx) + 1e-13 * (1.0 + std::abs(phi))) break;
                }
                alpha *= 0.5;
                ++halvings;
            }
            if (halvings >= 80) return ce;
            x += alpha * dx;
            phi = phi_new;
            if (early_stop(x)) {
                stopped = true;
                return ce;
            }
            if (alpha * alpha * dec2 / 2.0 <= 1e-14) return ce;
        }
        return ce;
    }

    const ConicProgram &p_;
    const SolverSettings &s_;
    RMat null_;
};

RVec project_equalities(const ConicProgram &p, RVec x)
{
    const RMat &A = p.eq_matrix();
    if (A.rows() == 0) return x;
    const RVec r = p.eq_rhs() - A * x;
    const RVec w = (A * A.transpose()).completeOrthogonalDecomposition().solve(r);
    return x + A.transpose() * w;
}

/// Phase I: minimize sigma subject to s(x) + sigma e in K and sigma >= -1.
bool phase_one(const ConicProgram &p, RVec &x, const SolverSettings &settings, int &newton)
{
    const int n = p.num_vars();
    double shift = -kInf;
    for (const auto &b : p.blocks()) shift = std::max(shift, required_shift(b, x));
    if (shift < 0.0 && std::isfinite(barrier_value(p.blocks(), x))) return true;

    ConicProgram aux(n + 1);
    RVec c = RVec::Zero(n + 1);
    c(n) = 1.0;
    aux.set_objective(c);
    for (const auto &b : p.blocks()) {
        switch (b.kind) {
        case ConeKind::Nonneg:
        case ConeKind::Soc:
        case ConeKind::Exp: {
            RMat F(b.F.rows(), n + 1);
            F.leftCols(n) = b.F;
            RVec e = RVec::Zero(b.F.rows());
            if (b.kind == ConeKind::Nonneg) e.setOnes();
            else if (b.kind == ConeKind::Soc) e(0) = 1.0;
            else e << -1.0, 1.0, 1.0;
            F.col(n) = e;
            if (b.kind == ConeKind::Nonneg) aux.add_nonneg(F, b.f, b.label);
            else if (b.kind == ConeKind::Soc) aux.add_soc(F, b.f, b.label);
            else aux.add_exp(F, b.f, b.label);
            break;
        }
        case ConeKind::Psd: {
            auto Fi = b.Fi;
            SpMat I(b.dim, b.dim);
            I.setIdentity();
            Fi.emplace_back(n, I);
            aux.add_psd(b.F0, std::move(Fi), b.label);
            break;
        }
        }
    }
    RMat lb = RMat::Zero(1, n + 1);
    lb(0, n) = 1.0;
    aux.add_nonneg(lb, RVec::Ones(1), "phase1-bound");
    if (p.eq_matrix().rows() > 0) {
        RMat A = RMat::Zero(p.eq_matrix().rows(), n + 1);
        A.leftCols(n) = p.eq_matrix();
        aux.add_equality(A, p.eq_rhs());
    }
    RVec z(n + 1);
    z.head(n) = x;
    z(n) = std::max(shift, 0.0) + 1.0;
    while (!std::isfinite(barrier_value(aux.blocks(), z))) z(n) *= 2.0;

    SolverSettings s1 = settings;
    s1.gap_abs = 1e-9;
    s1.gap_rel = 0.0;
    BarrierSolver solver(aux, s1);
    auto stop = [n](const RVec &v) { return v(n) < -1e-6; };
    BarrierRun r = solver.run(z, stop, settings.max_newton);
    newton += r.newton;
    x = r.x.head(n);
    return r.x(n) < 0.0 && std::isfinite(barrier_value(p.blocks(), x));
}

} // namespace

SolveResult solve(const ConicProgram &prog, const SolverSettings &settings)
{
    prog.validate();
    SolveResult res;
    const int n = prog.num_vars();
    RVec x = prog.warm_start().size() == n ? prog.warm_start() : RVec::Zero(n);
    x = project_equalities(prog, x);

    int newton = 0;
    if (!phase_one(prog, x, settings, newton)) {
        res.status = SolveStatus::Infeasible;
        res.x = x;
        res.objective = prog.objective().dot(x);
        res.newton_steps = newton;
        res.message = "phase I found no strictly feasible point";
        return res;
    }

    BarrierSolver solver(prog, settings);
    BarrierRun r = solver.run(x, [](const RVec &) { return false; }, settings.max_newton - newton);
    newton += r.newton;
    x = r.x;

    // Dual variables from the Newton-corrected barrier gradient at the final
    // point, which satisfies stationarity to first order.
    const auto &c = prog.objective();
    RVec dx = solver.newton_direction(x, r.t);
    if (!dx.allFinite()) dx.setZero();
    RVec Fz = RVec::Zero(n);
    double gap = 0.0;
    double fz = 0.0;
    for (const auto &b : prog.blocks()) {
        if (b.kind == ConeKind::Psd) {
            const RMat S = psd_matrix(b, x);
            const RMat W = S.llt().solve(RMat::Identity(b.dim, b.dim));
            RMat dS = RMat::Zero(b.dim, b.dim);
            for (const auto &[i, M] : b.Fi) dS += dx(i) * M;
            const RMat Z = (W - W * dS * W) / r.t;
            for (const auto &[i, M] : b.Fi) Fz(i) += Z.cwiseProduct(RMat(M)).sum();
            gap += Z.cwiseProduct(S).sum();
            fz += Z.cwiseProduct(b.F0).sum();
            res.psd_duals.push_back(Z);
            res.vec_duals.emplace_back();
        } else {
            const RVec s = b.F * x + b.f;
            RVec gs;
            RMat Hs;
            vector_block_derivs(b, s, gs, Hs);
            const RVec z = -(gs + Hs * (b.F * dx)) / r.t;
            Fz += b.F.transpose() * z;
            gap += z.dot(s);
            fz += z.dot(b.f);
            res.vec_duals.push_back(z);
            res.psd_duals.emplace_back();
        }
    }
    const RMat &A = prog.eq_matrix();
    RVec y = RVec::Zero(A.rows());
    RVec rd = c - Fz;
    if (A.rows() > 0) {
        y = A.transpose().completeOrthogonalDecomposition().solve(rd);
        rd -= A.transpose() * y;
    }
    res.x = x;
    res.objective = c.dot(x);
    res.dual_objective = -fz + prog.eq_rhs().dot(y);
    res.gap = gap;
    res.primal_residual = A.rows() > 0 ? (A * x - prog.eq_rhs()).cwiseAbs().maxCoeff() : 0.0;
    res.dual_residual = rd.size() ? rd.cwiseAbs().maxCoeff() : 0.0;
    res.eq_duals = y;
    res.newton_steps = newton;

    const double target = std::max(settings.gap_abs, settings.gap_rel * std::abs(res.objective));
    const double scale = 1.0 + c.cwiseAbs().maxCoeff();
    if (r.capped) {
        res.status = SolveStatus::CapReached;
        res.message = fmt::format("Newton step cap {} reached", settings.max_newton);
    } else if (gap <= 1.5 * target && res.primal_residual <= 1e-7 && res.dual_residual <= 1e-7 * scale) {
        res.status = SolveStatus::Optimal;
    } else if (gap <= settings.near_factor * target) {
        res.status = SolveStatus::NearOptimal;
    } else {
        res.status = SolveStatus::CapReached;
        res.message = "barrier loop stalled before reaching the gap target";
    }
    return res;
}

RMat realify_hermitian(const CMat &H, double tol)
{
    if (H.rows() != H.cols()) throw InputError("realify: matrix must be square");
    const double scale = 1.0 + H.cwiseAbs().maxCoeff();
    if ((H - H.adjoint()).cwiseAbs().maxCoeff() > tol * scale) throw InputError("realify: matrix is not Hermitian");
    const auto n = H.rows();
    RMat R(2 * n, 2 * n);
    R.topLeftCorner(n, n) = H.real();
    R.topRightCorner(n, n) = -H.imag();
    R.bottomLeftCorner(n, n) = H.imag();
    R.bottomRightCorner(n, n) = H.real();
    return R;
}

CMat complexify(const RMat &R)
{
    if (R.rows() != R.cols() || R.rows() % 2 != 0) throw InputError("complexify: expects an even square matrix");
    const auto n = R.rows() / 2;
    CMat H(n, n);
    H.real() = 0.5 * (R.topLeftCorner(n, n) + R.bottomRightCorner(n, n));
    H.imag() = 0.5 * (R.bottomLeftCorner(n, n) - R.topRightCorner(n, n));
    return H;
}

} // namespace xlris::conic
