/**
 * @file precoding.cpp
 * @brief MRT, CZF and LZF precoders and the power-constraint bookkeeping.
 */
#include "xlris/precoding.hpp"

#include <fmt/format.h>

#include <Eigen/SVD>
#include <algorithm>
#include <limits>

namespace xlris {

VrAssignment VrAssignment::full(int S, int Kn, int Kf)
{
    VrAssignment vr;
    vr.S = S;
    std::vector<int> all(S);
    for (int s = 0; s < S; ++s) all[s] = s;
    vr.nf.assign(Kn, all);
    vr.ff.assign(Kf, all);
    return vr;
}

namespace {

bool contains(const std::vector<int> &set, int s)
{
    return std::binary_search(set.begin(), set.end(), s);
}

RMat mask_of(const std::vector<std::vector<int>> &sets, int S)
{
    RMat m = RMat::Zero(S, static_cast<int>(sets.size()));
    for (std::size_t k = 0; k < sets.size(); ++k)
        for (int s : sets[k]) m(s, static_cast<int>(k)) = 1.0;
    return m;
}

void check_sets(const std::vector<std::vector<int>> &sets, int S, const char *group)
{
    for (std::size_t k = 0; k < sets.size(); ++k) {
        const auto &v = sets[k];
        if (v.empty()) throw ConfigError(fmt::format("{} {} has an empty visibility region", group, k));
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (v[i] < 0 || v[i] >= S)
                throw ConfigError(fmt::format("{} {}: subarray id {} outside [0, {})", group, k, v[i], S));
            if (i > 0 && v[i] <= v[i - 1])
                throw ConfigError(fmt::format("{} {}: subarray ids must be strictly ascending", group, k));
        }
    }
}

} // namespace

bool VrAssignment::nf_active(int s, int k) const { return contains(nf.at(k), s); }
bool VrAssignment::ff_active(int s, int k) const { return contains(ff.at(k), s); }
RMat VrAssignment::nf_mask() const { return mask_of(nf, S); }
RMat VrAssignment::ff_mask() const { return mask_of(ff, S); }

void VrAssignment::validate() const
{
    if (S < 1) throw ConfigError("visibility-region assignment needs S >= 1");
    check_sets(nf, S, "NFUE");
    check_sets(ff, S, "FFUE");
}

CMat zf_matrix(const CMat &H, const std::string &what)
{
    if (H.cols() == 0) return CMat(H.rows(), 0);
    if (H.cols() > H.rows())
        throw SingularityError(fmt::format("{}: {} users exceed {} antennas", what, H.cols(), H.rows()));
    const CMat gram = H.adjoint() * H;
    Eigen::JacobiSVD<CMat> svd(gram);
    const auto &sv = svd.singularValues();
    const double smax = sv(0);
    const double smin = sv(sv.size() - 1);
    const double cond = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
    if (!(cond <= kGramConditionLimit))
        throw SingularityError(fmt::format("{}: Gram matrix is singular (condition estimate {:.3e})", what, cond));
    return H * gram.ldlt().solve(CMat::Identity(H.cols(), H.cols()));
}

CMat precoder_matrix(Precoder scheme, const CMat &H, int S, const std::vector<std::vector<int>> &sets,
                     const std::string &group)
{
    const int M = static_cast<int>(H.rows());
    const int K = static_cast<int>(H.cols());
    if (S < 1 || M % S != 0) throw InputError("precoder: antenna count not divisible by subarray count");
    switch (scheme) {
    case Precoder::MRT: return H;
    case Precoder::CZF: return zf_matrix(H, group + " CZF Gram matrix H^H H");
    case Precoder::LZF: break;
    }
    if (static_cast<int>(sets.size()) != K) throw InputError("precoder: one visibility set per user required");
    const int Ms = M / S;
    CMat W = CMat::Zero(M, K);
    for (int s = 0; s < S; ++s) {
        std::vector<int> users;
        for (int k = 0; k < K; ++k)
            if (contains(sets[k], s)) users.push_back(k);
        if (users.empty()) continue;
        if (static_cast<int>(users.size()) > Ms)
            throw SingularityError(fmt::format("{} LZF on subarray {}: {} users exceed {} antennas", group, s,
                                               users.size(), Ms));
        CMat Hs(Ms, static_cast<int>(users.size()));
        for (std::size_t u = 0; u < users.size(); ++u) Hs.col(static_cast<int>(u)) = H.block(s * Ms, users[u], Ms, 1);
        const CMat Ws = zf_matrix(Hs, fmt::format("{} LZF Gram matrix on subarray {}", group, s));
        for (std::size_t u = 0; u < users.size(); ++u)
            W.block(s * Ms, users[u], Ms, 1) = Ws.col(static_cast<int>(u));
    }
    return W;
}

CMat apply_mask(const CMat &W, int S, const std::vector<std::vector<int>> &sets)
{
    const int Ms = static_cast<int>(W.rows()) / S;
    CMat out = W;
    for (int k = 0; k < W.cols(); ++k)
        for (int s = 0; s < S; ++s)
            if (!contains(sets[k], s)) out.block(s * Ms, k, Ms, 1).setZero();
    return out;
}

PrecoderSet build_precoders(Precoder scheme, const ChannelSet &ch, const CMat &Gff, const VrAssignment &vr)
{
    vr.validate();
    if (vr.S != ch.S || vr.Kn() != ch.Kn() || vr.Kf() != ch.Kf())
        throw InputError("visibility regions do not match the channel dimensions");
    PrecoderSet p;
    p.scheme = scheme;
    p.S = ch.S;
    p.Mstar = ch.Mstar;
    p.nf = apply_mask(precoder_matrix(scheme, ch.H1, ch.S, vr.nf, "NFUE"), ch.S, vr.nf);
    p.ff = apply_mask(precoder_matrix(scheme, Gff, ch.S, vr.ff, "FFUE"), ch.S, vr.ff);
    return p;
}

RMat PowerAllocation::nf_amplitudes(const VrAssignment &vr) const
{
    return nf.cwiseMax(0.0).cwiseSqrt().cwiseProduct(vr.nf_mask());
}

RMat PowerAllocation::ff_amplitudes(const VrAssignment &vr) const
{
    return ff.cwiseMax(0.0).cwiseSqrt().cwiseProduct(vr.ff_mask());
}

PowerBudget PowerBudget::from_config(const SystemConfig &cfg)
{
    return {cfg.rho(), cfg.rho_n(), cfg.rho_f()};
}

PowerConstants power_constants(Precoder scheme, const ChannelSet &ch, const VrAssignment &vr, int n_mc,
                               std::uint64_t seed)
{
    if (n_mc < 1) throw InputError("power constants need at least one sample");
    vr.validate();
    const int S = ch.S;
    const int Ms = ch.Mstar;
    PowerConstants c;
    c.samples = n_mc;
    c.nf = RMat::Zero(S, ch.Kn());
    const CMat Wn = apply_mask(precoder_matrix(scheme, ch.H1, S, vr.nf, "NFUE"), S, vr.nf);
    for (int k = 0; k < ch.Kn(); ++k)
        for (int s = 0; s < S; ++s) c.nf(s, k) = Wn.block(s * Ms, k, Ms, 1).squaredNorm();

    RMat sum = RMat::Zero(S, ch.Kf());
    RMat sum2 = RMat::Zero(S, ch.Kf());
    Rng rng(seed);
    for (int n = 0; n < n_mc && ch.Kf() > 0; ++n) {
        const CMat H2 = compose_h2(ch, sample_nlos(ch.N, ch.M, rng));
        const CMat G = cascaded_channels(ch, H2);
        const CMat W = apply_mask(precoder_matrix(scheme, G, S, vr.ff, "FFUE"), S, vr.ff);
        for (int k = 0; k < ch.Kf(); ++k)
            for (int s = 0; s < S; ++s) {
                const double v = W.block(s * Ms, k, Ms, 1).squaredNorm();
                sum(s, k) += v;
                sum2(s, k) += v * v;
            }
    }
    c.ff = sum / n_mc;
    c.ff_se = RMat::Zero(S, ch.Kf());
    if (n_mc > 1) {
        const RMat var = ((sum2 / n_mc) - c.ff.cwiseAbs2()).cwiseMax(0.0) * (n_mc / (n_mc - 1.0));
        c.ff_se = (var / n_mc).cwiseSqrt();
    }
    return c;
}

PowerCheck check_power(const PowerAllocation &alloc, const PowerConstants &c, const VrAssignment &vr,
                       const PowerBudget &budget, double tol)
{
    const double nf = alloc.nf.cwiseProduct(c.nf).cwiseProduct(vr.nf_mask()).sum();
    const double ff = alloc.ff.cwiseProduct(c.ff).cwiseProduct(vr.ff_mask()).sum();
    PowerCheck r;
    r.lhs = budget.Pn * nf + budget.Pf * ff;
    r.margin = budget.P - r.lhs;
    r.feasible = r.margin >= -tol * budget.P && (alloc.nf.array() >= 0.0).all() && (alloc.ff.array() >= 0.0).all();
    return r;
}

PowerAllocation equal_power(Precoder scheme, const PowerConstants &c, const VrAssignment &vr,
                            const PowerBudget &budget)
{
    const int K = vr.Kn() + vr.Kf();
    if (K == 0) throw InputError("equal power needs at least one user");
    PowerAllocation a;
    a.scheme = scheme;
    a.nf = RMat::Zero(vr.S, vr.Kn());
    a.ff = RMat::Zero(vr.S, vr.Kf());
    auto fill = [&](RMat &eta, const RMat &cons, const RMat &mask, double Px, const char *group) {
        for (int k = 0; k < eta.cols(); ++k) {
            const double sc = cons.col(k).cwiseProduct(mask.col(k)).sum();
            if (!(sc > 0.0))
                throw InputError(fmt::format("equal power: {} {} has zero power constants", group, k));
            const double v = budget.P / (K * Px * sc);
            for (int s = 0; s < vr.S; ++s) eta(s, k) = mask(s, k) > 0.0 ? v : 0.0;
        }
    };
    fill(a.nf, c.nf, vr.nf_mask(), budget.Pn, "NFUE");
    fill(a.ff, c.ff, vr.ff_mask(), budget.Pf, "FFUE");
    return a;
}

} // namespace xlris
