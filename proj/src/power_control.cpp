/**
 * @file power_control.cpp
 * @brief SCA max-min power control.
 */
#include "xlris/power_control.hpp"

#include <fmt/format.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace xlris {

namespace {

/// Smallest anchor SINR used as a reference, keeps every division well defined.
constexpr double kMinTref = 1e-9;

RMat restrict_sym(const RMat &X, const std::vector<int> &set)
{
    const int m = static_cast<int>(set.size());
    RMat out(m, m);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) out(a, b) = X(set[a], set[b]);
    return 0.5 * (out + out.transpose());
}

RMat outer_real(const CVec &n, const std::vector<int> &set)
{
    const int m = static_cast<int>(set.size());
    RMat out(m, m);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) out(a, b) = std::real(n(set[a]) * std::conj(n(set[b])));
    return out;
}

std::vector<int> global_indices(const PcUser &u)
{
    std::vector<int> idx(u.count);
    std::iota(idx.begin(), idx.end(), u.offset);
    return idx;
}

double group_min(const RVec &sinr, int from, int count)
{
    double m = std::numeric_limits<double>::infinity();
    for (int u = from; u < from + count; ++u) m = std::min(m, sinr(u));
    return m;
}

/// SOC rows [w + 1; 2 L^T x; w - 1] encoding x^T P x <= w(x) for affine w = a^T x + a0.
void add_quadratic_soc(conic::ConicProgram &prog, const RMat &P, const RVec &a, double a0, const std::string &label)
{
    const int n = static_cast<int>(a.size());
    Eigen::SelfAdjointEigenSolver<RMat> es(0.5 * (P + P.transpose()));
    const RVec lam = es.eigenvalues();
    const double lmax = lam.size() > 0 ? std::max(lam.maxCoeff(), 0.0) : 0.0;
    std::vector<int> keep;
    for (Eigen::Index i = 0; i < lam.size(); ++i)
        if (lam(i) > 1e-13 * lmax && lam(i) > 0.0) keep.push_back(static_cast<int>(i));
    const int r = static_cast<int>(keep.size());
    RMat F = RMat::Zero(r + 2, n);
    RVec f = RVec::Zero(r + 2);
    F.row(0) = a.transpose();
    f(0) = a0 + 1.0;
    for (int i = 0; i < r; ++i)
        F.row(1 + i) = 2.0 * std::sqrt(lam(keep[i])) * es.eigenvectors().col(keep[i]).transpose();
    F.row(r + 1) = a.transpose();
    f(r + 1) = a0 - 1.0;
    prog.add_soc(F, f, label);
}

double weighted_objective(const PowerModel &m, const RVec &sinr, const ScaOptions &opt)
{
    double obj = 0.0;
    if (m.Kn() > 0) obj += opt.w_n * se_from_sinr(group_min(sinr, 0, m.Kn()));
    if (m.Kf() > 0) obj += opt.w_f * se_from_sinr(group_min(sinr, m.Kn(), m.Kf()));
    return obj;
}

std::vector<double> sinr_floors(const PowerModel &m, const ScaOptions &opt)
{
    std::vector<double> g(m.num_users(), 0.0);
    if (!opt.enforce_qos) return g;
    if (static_cast<int>(opt.qos_nf.size()) != m.Kn() || static_cast<int>(opt.qos_ff.size()) != m.Kf())
        throw InputError(fmt::format("QoS floors need {} NFUE and {} FFUE entries, got {} and {}", m.Kn(), m.Kf(),
                                     opt.qos_nf.size(), opt.qos_ff.size()));
    for (int u = 0; u < m.num_users(); ++u) {
        const double r = u < m.Kn() ? opt.qos_nf[u] : opt.qos_ff[u - m.Kn()];
        if (!std::isfinite(r) || r < 0.0) throw InputError(fmt::format("QoS floor {} is not a nonnegative SE", r));
        g[u] = std::pow(2.0, r) - 1.0;
    }
    return g;
}

double qos_shortfall(const RVec &sinr, const std::vector<double> &gamma)
{
    double worst = 0.0;
    for (int u = 0; u < sinr.size(); ++u)
        if (gamma[u] > 0.0) worst = std::max(worst, se_from_sinr(gamma[u]) - se_from_sinr(sinr(u)));
    return worst;
}

} // namespace

// ---------------------------------------------------------------------------
// PowerModel
// ---------------------------------------------------------------------------

PowerModel::PowerModel(const ExpectationCache &cache, const VrAssignment &vr, const PowerBudget &budget)
    : scheme_(cache.scheme), Kn_(vr.Kn()), Kf_(vr.Kf()), P_(budget.P), S_(vr.S)
{
    vr.validate();
    if (cache.Kn != Kn_ || cache.Kf != Kf_ || cache.S != vr.S)
        throw InputError("expectation cache does not match the VR assignment");
    if (Kn_ + Kf_ == 0) throw InputError("power control needs at least one user");
    if (!(budget.P > 0.0 && budget.Pn > 0.0 && budget.Pf > 0.0)) throw DomainError("powers must be positive");

    const PowerConstants pc = cache.constants(vr);
    const int K = Kn_ + Kf_;
    int offset = 0;
    for (int u = 0; u < K; ++u) {
        PcUser pu;
        pu.nf = u < Kn_;
        pu.k = pu.nf ? u : u - Kn_;
        pu.subarrays = pu.nf ? vr.nf[pu.k] : vr.ff[pu.k];
        pu.offset = offset;
        pu.count = per_user() ? 1 : static_cast<int>(pu.subarrays.size());
        offset += pu.count;
        users_.push_back(pu);
    }
    nz_ = offset;

    // Power constants of each user on its VR.
    std::vector<RVec> c(K);
    for (int u = 0; u < K; ++u) {
        const PcUser &pu = users_[u];
        const RMat &cm = pu.nf ? pc.nf : pc.ff;
        c[u].resize(pu.subarrays.size());
        for (std::size_t a = 0; a < pu.subarrays.size(); ++a) {
            c[u](a) = cm(pu.subarrays[a], pu.k);
            if (!(c[u](a) > 0.0))
                throw DomainError(fmt::format("{} {} has a zero power constant on subarray {}",
                                              pu.nf ? "NFUE" : "FFUE", pu.k, pu.subarrays[a]));
        }
        const double Px = pu.nf ? budget.Pn : budget.Pf;
        if (per_user()) {
            eta_per_var_.push_back(RVec::Constant(1, P_ / (K * Px * c[u].sum())));
        } else {
            eta_per_var_.push_back((P_ / Px) * c[u].cwiseInverse());
        }
    }

    auto raw_term = [&](int u, int v) -> RMat {
        const PcUser &a = users_[u];
        const PcUser &b = users_[v];
        if (a.nf) {
            if (b.nf) return outer_real(cache.nn[a.k * Kn_ + b.k], b.subarrays);
            return restrict_sym(cache.rnf[a.k * Kf_ + b.k], b.subarrays);
        }
        if (b.nf) return restrict_sym(cache.tff[a.k * Kn_ + b.k], b.subarrays);
        if (a.k == b.k) {
            RMat d = RMat::Zero(b.subarrays.size(), b.subarrays.size());
            for (std::size_t s = 0; s < b.subarrays.size(); ++s) d(s, s) = cache.ff_var(b.subarrays[s], a.k);
            return d;
        }
        return restrict_sym(cache.q[a.k * Kf_ + b.k], b.subarrays);
    };

    terms_.resize(K);
    for (int u = 0; u < K; ++u) {
        const PcUser &pu = users_[u];
        CVec m(pu.subarrays.size());
        for (std::size_t a = 0; a < pu.subarrays.size(); ++a) {
            const int s = pu.subarrays[a];
            m(a) = pu.nf ? cache.nn[pu.k * Kn_ + pu.k](s) : cache.ff_mean(s, pu.k);
        }
        if (per_user()) {
            D_.push_back(P_ / (K * c[u].sum()) * std::norm(m.sum()));
            d_.emplace_back();
        } else {
            CVec d(m.size());
            for (Eigen::Index a = 0; a < m.size(); ++a) d(a) = std::sqrt(P_ / c[u](a)) * m(a);
            d_.push_back(d);
            D_.push_back(0.0);
        }
        for (int v = 0; v < K; ++v) {
            const bool self_bu = (v == u) && !pu.nf;
            if (v == u && !self_bu) continue;
            Term t;
            t.v = v;
            const RMat X = raw_term(u, v);
            if (per_user()) {
                t.e = P_ / (K * c[v].sum()) * X.sum();
            } else {
                const RVec isq = c[v].cwiseSqrt().cwiseInverse();
                t.X = P_ * isq.asDiagonal() * X * isq.asDiagonal();
            }
            terms_[u].push_back(std::move(t));
        }
    }
}

RVec PowerModel::equal_point(double fraction) const
{
    if (!(fraction > 0.0 && fraction <= 1.0)) throw DomainError("equal-power fraction must lie in (0, 1]");
    RVec z(nz_);
    const int K = num_users();
    for (const auto &pu : users_) {
        if (per_user()) {
            z(pu.offset) = fraction;
            continue;
        }
        // z_s^2 = c_s / (K sum c): a common eta over the VR, as in equal_power.
        const RVec &f = eta_per_var_[&pu - users_.data()];
        const RVec c = f.cwiseInverse();
        for (int a = 0; a < pu.count; ++a) z(pu.offset + a) = std::sqrt(fraction * c(a) / (K * c.sum()));
    }
    return z;
}

RVec feasible_init(const PowerModel &m)
{
    return m.equal_point(0.9);
}

double PowerModel::power_fraction(const RVec &z) const
{
    if (z.size() < nz_) throw InputError("power point has too few entries");
    return per_user() ? z.head(nz_).sum() / num_users() : z.head(nz_).squaredNorm();
}

PowerAllocation PowerModel::allocation(const RVec &z) const
{
    if (z.size() < nz_) throw InputError("power point has too few entries");
    PowerAllocation a;
    a.scheme = scheme_;
    a.nf = RMat::Zero(S_, Kn_);
    a.ff = RMat::Zero(S_, Kf_);
    for (int u = 0; u < num_users(); ++u) {
        const PcUser &pu = users_[u];
        RMat &eta = pu.nf ? a.nf : a.ff;
        for (std::size_t s = 0; s < pu.subarrays.size(); ++s) {
            const int sid = pu.subarrays[s];
            if (per_user()) {
                eta(sid, pu.k) = std::max(z(pu.offset), 0.0) * eta_per_var_[u](0);
            } else {
                const double zs = std::max(z(pu.offset + static_cast<int>(s)), 0.0);
                eta(sid, pu.k) = zs * zs * eta_per_var_[u](static_cast<Eigen::Index>(s));
            }
        }
    }
    return a;
}

RVec PowerModel::point(const PowerAllocation &alloc) const
{
    if (alloc.nf.rows() != S_ || alloc.nf.cols() != Kn_ || alloc.ff.rows() != S_ || alloc.ff.cols() != Kf_)
        throw InputError("power allocation does not match the model dimensions");
    RVec z(nz_);
    for (int u = 0; u < num_users(); ++u) {
        const PcUser &pu = users_[u];
        const RMat &eta = pu.nf ? alloc.nf : alloc.ff;
        if (per_user()) {
            z(pu.offset) = eta(pu.subarrays[0], pu.k) / eta_per_var_[u](0);
            continue;
        }
        for (int s = 0; s < pu.count; ++s)
            z(pu.offset + s) = std::sqrt(std::max(eta(pu.subarrays[s], pu.k), 0.0) / eta_per_var_[u](s));
    }
    return z;
}

double PowerModel::signal(int u, const RVec &z) const
{
    const PcUser &pu = users_.at(u);
    if (per_user()) return D_[u] * z(pu.offset);
    return std::norm(d_[u].dot(z.segment(pu.offset, pu.count).cast<cd>().eval()));
}

double PowerModel::interference(int u, const RVec &z) const
{
    double f = 1.0;
    for (const Term &t : terms_.at(u)) {
        const PcUser &pv = users_[t.v];
        if (per_user()) {
            f += t.e * z(pv.offset);
        } else {
            const RVec zv = z.segment(pv.offset, pv.count);
            f += zv.dot(t.X * zv);
        }
    }
    return f;
}

RVec PowerModel::sinrs(const RVec &z) const
{
    RVec out(num_users());
    for (int u = 0; u < num_users(); ++u) out(u) = sinr(u, z);
    return out;
}

CVec PowerModel::signal_vector(int u) const
{
    if (per_user()) throw InputError("signal_vector applies to per-subarray power variables");
    CVec d = CVec::Zero(nz_);
    d.segment(users_.at(u).offset, users_[u].count) = d_[u];
    return d;
}

ConvexQuadratic PowerModel::interference_upper(int u, const RVec &z0) const
{
    if (per_user()) throw InputError("interference_upper applies to per-subarray power variables");
    const int n = static_cast<int>(z0.size());
    if (n < nz_) throw InputError("anchor has too few entries");
    ConvexQuadratic q = ConvexQuadratic::zero(n);
    q.c0 = 1.0;
    for (const Term &t : terms_.at(u)) q += quadratic_form_upper(t.X, global_indices(users_[t.v]), z0, n);
    return q;
}

double PowerModel::signal_coeff(int u) const
{
    if (!per_user()) throw InputError("signal_coeff applies to per-user power variables");
    return D_.at(u);
}

RVec PowerModel::interference_coeffs(int u) const
{
    if (!per_user()) throw InputError("interference_coeffs applies to per-user power variables");
    RVec e = RVec::Zero(nz_);
    for (const Term &t : terms_.at(u)) e(users_[t.v].offset) += t.e;
    return e;
}

ConvexQuadratic PowerModel::product_upper(int u, double T_ref, const RVec &x0, int tau_index) const
{
    if (!per_user()) throw InputError("product_upper applies to per-user power variables");
    const int n = static_cast<int>(x0.size());
    if (n < nz_ || tau_index < nz_ || tau_index >= n) throw InputError("bad layout for the product bound");
    ConvexQuadratic q = ConvexQuadratic::zero(n);
    q.l(tau_index) = T_ref;
    const RVec e = interference_coeffs(u);
    for (int v = 0; v < nz_; ++v) q.add_product(T_ref * e(v), tau_index, v, x0);
    return q;
}

double PowerModel::max_single_user_snr(bool nf) const
{
    double best = 0.0;
    for (int u = 0; u < num_users(); ++u) {
        if (users_[u].nf != nf) continue;
        best = std::max(best, per_user() ? D_[u] * num_users() : d_[u].squaredNorm());
    }
    return best;
}

// ---------------------------------------------------------------------------
// Subproblem
// ---------------------------------------------------------------------------

namespace {

void add_power_constraint(conic::ConicProgram &prog, const PowerModel &m, int n)
{
    const int nz = m.num_vars();
    if (m.per_user()) {
        RMat F = RMat::Zero(1, n);
        F.row(0).head(nz).setConstant(-1.0);
        prog.add_nonneg(F, RVec::Constant(1, m.num_users()), "power");
    } else {
        RMat F = RMat::Zero(nz + 1, n);
        RVec f = RVec::Zero(nz + 1);
        f(0) = 1.0;
        F.bottomLeftCorner(nz, nz).setIdentity();
        prog.add_soc(F, f, "power");
    }
}

/**
 * SINR_u >= T_ref x(tau) in convex inner form around x0 (x0(tau) = 1). The
 * constraint is divided by its interference at the anchor to keep rows O(1).
 */
void add_sinr_constraint(conic::ConicProgram &prog, const PowerModel &m, int u, const RVec &x0, int tau,
                         double T_ref, const std::string &label)
{
    const int n = static_cast<int>(x0.size());
    const int nz = m.num_vars();
    const RVec z0 = x0.head(nz);
    const double F0 = m.interference(u, z0);
    const PcUser &pu = m.user(u);
    if (m.per_user()) {
        // D_u p_u >= T_ref tau (1 + e^T p) with the products bounded pairwise.
        ConvexQuadratic q = m.product_upper(u, T_ref, x0, tau);
        q.l(pu.offset) -= m.signal_coeff(u);
        q *= 1.0 / (T_ref * F0);
        add_quadratic_soc(prog, q.P, -q.l, -q.c0, label);
        return;
    }
    // |x|^2 / T >= (2 Re(x0^* x) - |x0|^2 tau) / T_ref with x = d^T z and T = T_ref tau.
    const CVec d = m.signal_vector(u);
    const cd xs = (d.array() * z0.cast<cd>().array()).sum();
    RVec a = RVec::Zero(n);
    a.head(nz) = 2.0 * (std::conj(xs) * d).real() / T_ref;
    a(tau) -= std::norm(xs) / T_ref;
    const ConvexQuadratic F = m.interference_upper(u, x0);
    a -= F.l;
    const double s = 1.0 / F0;
    add_quadratic_soc(prog, s * F.P, s * a, -s * F.c0, label);
}

/// SINR_u >= gamma in convex inner form around z0.
void add_qos_constraint(conic::ConicProgram &prog, const PowerModel &m, int u, const RVec &x0, double gamma,
                        const std::string &label)
{
    const int n = static_cast<int>(x0.size());
    const int nz = m.num_vars();
    const RVec z0 = x0.head(nz);
    const double F0 = m.interference(u, z0);
    const PcUser &pu = m.user(u);
    if (m.per_user()) {
        RMat F = RMat::Zero(1, n);
        F.row(0).head(nz) = -gamma * m.interference_coeffs(u).transpose();
        F(0, pu.offset) += m.signal_coeff(u);
        prog.add_nonneg(F / (gamma * F0), RVec::Constant(1, -1.0 / F0), label);
        return;
    }
    // 2 Re(x0^* d^T z) - |x0|^2 >= gamma F_ub(z).
    const CVec d = m.signal_vector(u);
    const cd xs = (d.array() * z0.cast<cd>().array()).sum();
    const ConvexQuadratic F = m.interference_upper(u, x0);
    RVec a = RVec::Zero(n);
    a.head(nz) = 2.0 * (std::conj(xs) * d).real();
    a -= gamma * F.l;
    const double s = 1.0 / (gamma * F0);
    add_quadratic_soc(prog, s * gamma * F.P, s * a, s * (-std::norm(xs) - gamma * F.c0), label);
}

std::string user_tag(const PcUser &pu)
{
    return fmt::format("{}{}", pu.nf ? "nf" : "ff", pu.k);
}

RVec warm_power(const RVec &z0)
{
    RVec w = z0;
    for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = std::max(z0(i), 1e-9) * (1.0 - 1e-4);
    return w;
}

} // namespace

SubproblemSpec build_subproblem(const PowerModel &m, const RVec &z0, double T_ref_n, double T_ref_f,
                                const ScaOptions &opt, bool qos, const RVec *anchor_sinr)
{
    const int nz = m.num_vars();
    if (z0.size() != nz) throw InputError("anchor size does not match the power model");
    SubproblemSpec spec;
    spec.nz = nz;
    int n = nz;
    if (m.Kn() > 0) {
        if (!(T_ref_n > 0.0)) throw DomainError("NFUE anchor SINR must be positive");
        spec.tau_n = n++;
        spec.t_n = n++;
        spec.T_ref_n = T_ref_n;
    }
    if (m.Kf() > 0) {
        if (!(T_ref_f > 0.0)) throw DomainError("FFUE anchor SINR must be positive");
        spec.tau_f = n++;
        spec.t_f = n++;
        spec.T_ref_f = T_ref_f;
    }
    conic::ConicProgram prog(n);

    RVec c = RVec::Zero(n);
    if (spec.t_n >= 0) c(spec.t_n) = -opt.w_n;
    if (spec.t_f >= 0) c(spec.t_f) = -opt.w_f;
    prog.set_objective(c);

    // Anchor in the full variable space: tau = 1 stands for T = T_ref.
    RVec x0 = RVec::Zero(n);
    x0.head(nz) = z0;
    if (spec.tau_n >= 0) x0(spec.tau_n) = 1.0;
    if (spec.tau_f >= 0) x0(spec.tau_f) = 1.0;

    prog.add_nonneg(RMat::Identity(n, n), RVec::Zero(n), "nonneg");
    add_power_constraint(prog, m, n);

    const std::vector<double> gamma = sinr_floors(m, opt);
    for (int u = 0; u < m.num_users(); ++u) {
        const PcUser &pu = m.user(u);
        const std::string tag = user_tag(pu);
        add_sinr_constraint(prog, m, u, x0, pu.nf ? spec.tau_n : spec.tau_f, pu.nf ? T_ref_n : T_ref_f,
                            "sinr-" + tag);
        if (qos && gamma[u] > 0.0) {
            // A floor met only within tolerance at the anchor is held at the anchor value.
            const double g = anchor_sinr ? std::min(gamma[u], (*anchor_sinr)(u)) : gamma[u];
            add_qos_constraint(prog, m, u, x0, g, "qos-" + tag);
        }
    }

    // 2^t <= 1 + T_ref tau as (t ln2 - ln T_ref, 1, tau + 1 / T_ref) in the exponential cone.
    auto add_rate = [&](int t, int tau, double T_ref, const char *label) {
        RMat F = RMat::Zero(3, n);
        RVec f = RVec::Zero(3);
        F(0, t) = std::log(2.0);
        f(0) = -std::log(T_ref);
        f(1) = 1.0;
        F(2, tau) = 1.0;
        f(2) = 1.0 / T_ref;
        prog.add_exp(F, f, label);
    };
    if (spec.t_n >= 0) add_rate(spec.t_n, spec.tau_n, T_ref_n, "rate-nf");
    if (spec.t_f >= 0) add_rate(spec.t_f, spec.tau_f, T_ref_f, "rate-ff");

    // Warm start just inside the anchor.
    RVec w = x0;
    w.head(nz) = warm_power(z0);
    if (spec.tau_n >= 0) {
        w(spec.tau_n) = 0.98;
        w(spec.t_n) = 0.5 * se_from_sinr(0.98 * T_ref_n);
    }
    if (spec.tau_f >= 0) {
        w(spec.tau_f) = 0.98;
        w(spec.t_f) = 0.5 * se_from_sinr(0.98 * T_ref_f);
    }
    prog.set_warm_start(w);
    spec.program = std::move(prog);
    return spec;
}

SubproblemSpec build_restoration(const PowerModel &m, const RVec &z0, const std::vector<double> &gamma,
                                 double beta_ref)
{
    const int nz = m.num_vars();
    if (z0.size() != nz) throw InputError("anchor size does not match the power model");
    if (static_cast<int>(gamma.size()) != m.num_users()) throw InputError("one SINR floor per user expected");
    if (!(beta_ref > 0.0)) throw DomainError("restoration reference must be positive");
    SubproblemSpec spec;
    spec.nz = nz;
    const int n = nz + 1;
    const int beta = nz;
    conic::ConicProgram prog(n);
    RVec c = RVec::Zero(n);
    c(beta) = -1.0;
    prog.set_objective(c);

    RVec x0 = RVec::Zero(n);
    x0.head(nz) = z0;
    x0(beta) = 1.0;
    prog.add_nonneg(RMat::Identity(n, n), RVec::Zero(n), "nonneg");
    add_power_constraint(prog, m, n);
    bool any = false;
    for (int u = 0; u < m.num_users(); ++u) {
        if (!(gamma[u] > 0.0)) continue;
        any = true;
        add_sinr_constraint(prog, m, u, x0, beta, gamma[u] * beta_ref, "floor-" + user_tag(m.user(u)));
    }
    if (!any) throw InputError("restoration needs at least one positive floor");
    // The ratio is bounded by the budget, but an explicit cap keeps the problem compact.
    RMat F = RMat::Zero(1, n);
    F(0, beta) = -1.0;
    prog.add_nonneg(F, RVec::Constant(1, 1e6), "beta-cap");

    RVec w = x0;
    w.head(nz) = warm_power(z0);
    w(beta) = 0.98;
    prog.set_warm_start(w);
    spec.program = std::move(prog);
    spec.tau_n = beta;
    return spec;
}

// ---------------------------------------------------------------------------
// Driver
// ---------------------------------------------------------------------------

namespace {

bool usable_solution(const conic::SolveResult &sol)
{
    if (sol.status == conic::SolveStatus::Optimal || sol.status == conic::SolveStatus::NearOptimal) return true;
    // A capped barrier run still returns a strictly feasible point of the
    // surrogate, which is feasible for the exact constraints as well.
    return sol.status == conic::SolveStatus::CapReached && sol.x.allFinite();
}

RVec clip_to_budget(const PowerModel &m, RVec z)
{
    z = z.cwiseMax(0.0);
    // Keep the budget exact against round-off of the interior-point solution.
    const double pf = m.power_fraction(z);
    if (pf > 1.0) z *= m.per_user() ? 1.0 / pf : 1.0 / std::sqrt(pf);
    return z;
}

double floor_ratio(const RVec &sinr, const std::vector<double> &gamma)
{
    double r = std::numeric_limits<double>::infinity();
    for (int u = 0; u < sinr.size(); ++u)
        if (gamma[u] > 0.0) r = std::min(r, sinr(u) / gamma[u]);
    return r;
}

} // namespace

ScaResult sca_solve(const ExpectationCache &cache, const VrAssignment &vr, const PowerBudget &budget,
                    const ScaOptions &opt)
{
    if (opt.max_iter < 1) throw InputError("SCA needs at least one iteration");
    if (!(opt.eps1 > 0.0)) throw InputError("SCA tolerance must be positive");
    const PowerModel m(cache, vr, budget);
    const std::vector<double> gamma = sinr_floors(m, opt);
    const bool floors = std::any_of(gamma.begin(), gamma.end(), [](double g) { return g > 0.0; });

    ScaResult res;
    if (m.Kn() > 0) res.upper_bound += opt.w_n * se_from_sinr(m.max_single_user_snr(true));
    if (m.Kf() > 0) res.upper_bound += opt.w_f * se_from_sinr(m.max_single_user_snr(false));

    RVec z = feasible_init(m);
    RVec sinr = m.sinrs(z);
    double obj = weighted_objective(m, sinr, opt);
    res.initial_objective = obj;

    auto make_row = [&](int iter, const std::string &phase, const RVec &zz, const RVec &s, double objective) {
        ScaTraceRow row;
        row.iter = iter;
        row.phase = phase;
        row.objective = objective;
        row.candidate_objective = objective;
        row.t_n = m.Kn() > 0 ? se_from_sinr(group_min(s, 0, m.Kn())) : 0.0;
        row.t_f = m.Kf() > 0 ? se_from_sinr(group_min(s, m.Kn(), m.Kf())) : 0.0;
        row.power_margin = 1.0 - m.power_fraction(zz);
        row.max_violation = floors ? qos_shortfall(s, gamma) : 0.0;
        return row;
    };
    {
        ScaTraceRow row = make_row(0, "init", z, sinr, obj);
        row.status = "init";
        res.trace.push_back(row);
    }

    // Restoration: raise min_u SINR_u / gamma_u until every floor holds.
    bool qos_on = floors;
    if (floors && floor_ratio(sinr, gamma) < 1.0 - kFloorTol) {
        bool restored = false;
        double beta = floor_ratio(sinr, gamma);
        for (int it = 1; it <= opt.max_iter && !restored; ++it) {
            ++res.restoration_iterations;
            const SubproblemSpec spec = build_restoration(m, z, gamma, std::max(beta, kMinTref));
            const conic::SolveResult sol = conic::solve(spec.program);
            if (!usable_solution(sol)) {
                ScaTraceRow row = make_row(it, "restore", z, sinr, obj);
                row.accepted = false;
                row.status = "solver-" + conic::to_string(sol.status);
                res.trace.push_back(row);
                break;
            }
            const RVec zn = clip_to_budget(m, sol.x.head(m.num_vars()));
            const RVec sn = m.sinrs(zn);
            const double bn = floor_ratio(sn, gamma);
            const bool improved = bn > beta;
            if (improved) {
                z = zn;
                sinr = sn;
                obj = weighted_objective(m, sinr, opt);
            }
            ScaTraceRow row = make_row(it, "restore", z, sinr, obj);
            row.accepted = improved;
            row.status = improved ? "ok" : "stalled";
            res.trace.push_back(row);
            if (!improved) break;
            // Stop when the step closes a negligible part of the remaining gap.
            const double closed = (bn - beta) / (1.0 - beta);
            beta = bn;
            if (beta >= 1.0 - kFloorTol) restored = true;
            else if (closed < opt.eps1) break;
        }
        if (!restored) {
            // Floors out of reach: continue from the equal-power start without them.
            qos_on = false;
            res.qos_infeasible = true;
            z = feasible_init(m);
            sinr = m.sinrs(z);
            obj = weighted_objective(m, sinr, opt);
        }
    }
    res.start_objective = obj;

    int iter = 0;
    while (iter < opt.max_iter) {
        ++iter;
        const double Tn = m.Kn() > 0 ? std::max(group_min(sinr, 0, m.Kn()), kMinTref) : 0.0;
        const double Tf = m.Kf() > 0 ? std::max(group_min(sinr, m.Kn(), m.Kf()), kMinTref) : 0.0;
        const bool anchor_ok = !qos_on || qos_shortfall(sinr, gamma) <= 0.0;
        const SubproblemSpec spec = build_subproblem(m, z, Tn, Tf, opt, qos_on, &sinr);
        const conic::SolveResult sol = conic::solve(spec.program);
        const bool solved = sol.status == conic::SolveStatus::Optimal || sol.status == conic::SolveStatus::NearOptimal;

        if (!usable_solution(sol)) {
            ScaTraceRow row = make_row(iter, "main", z, sinr, obj);
            row.qos = qos_on;
            row.anchor_qos_ok = anchor_ok;
            row.accepted = false;
            if (qos_on) {
                // Retry the same anchor without the floors.
                row.status = "qos-infeasible-dropped";
                qos_on = false;
                res.qos_infeasible = true;
                res.trace.push_back(row);
                continue;
            }
            row.status = "solver-" + conic::to_string(sol.status);
            res.trace.push_back(row);
            break;
        }

        const RVec zn = clip_to_budget(m, sol.x.head(m.num_vars()));
        const RVec sn = m.sinrs(zn);
        const double on = weighted_objective(m, sn, opt);

        ScaTraceRow row = make_row(iter, "main", zn, sn, on);
        row.qos = qos_on;
        row.anchor_qos_ok = anchor_ok;
        row.declared_T_n = spec.tau_n >= 0 ? sol.x(spec.tau_n) * Tn : 0.0;
        row.declared_T_f = spec.tau_f >= 0 ? sol.x(spec.tau_f) * Tf : 0.0;
        const double tol = 1e-10 * std::max(1.0, std::abs(obj));
        if (on < obj - tol) {
            // The surrogate guarantees no decrease; a drop means the solve was inaccurate.
            row.accepted = false;
            row.objective = obj;
            row.status = "rejected";
            res.trace.push_back(row);
            res.converged = solved;
            break;
        }
        const double gain = (on - obj) / std::max(std::abs(obj), 1e-12);
        z = zn;
        sinr = sn;
        obj = on;
        res.declared_T_n = row.declared_T_n;
        res.declared_T_f = row.declared_T_f;
        row.status = solved ? "ok" : "inexact";
        res.trace.push_back(row);
        if (gain < opt.eps1) {
            res.converged = true;
            break;
        }
    }

    res.iterations = iter;
    res.z = z;
    res.qos_enforced = qos_on;
    res.qos_violation = floors ? qos_shortfall(sinr, gamma) : 0.0;
    res.alloc = m.allocation(z);
    res.sinr = evaluate_sinr(cache, res.alloc, vr, budget);
    res.report = se_report(res.sinr, opt.w_n, opt.w_f, cache.closed_form ? "closed-form" : "statistical");
    return res;
}

} // namespace xlris
