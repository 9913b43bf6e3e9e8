/**
 * @file analytics.cpp
 * @brief MRT closed forms, sampled expectation caches, SINR evaluation and
 * the simulation oracle.
 */
#include "xlris/analytics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace xlris {

namespace {

void check_ff(const ChannelSet &ch, int k, int s)
{
    if (k < 0 || k >= ch.Kf()) throw InputError(fmt::format("FFUE index {} outside [0, {})", k, ch.Kf()));
    if (s < 0 || s >= ch.S) throw InputError(fmt::format("subarray index {} outside [0, {})", s, ch.S));
}

/// x^H Hbar_s w for every subarray slice of a stacked vector w.
CVec los_projections(const ChannelSet &ch, const CVec &x, const CVec &w)
{
    CVec p(ch.S);
    const CVec xh = ch.H2_los.adjoint() * x; // Hbar^H x, length M
    for (int s = 0; s < ch.S; ++s) p(s) = xh.segment(s * ch.Mstar, ch.Mstar).dot(w.segment(s * ch.Mstar, ch.Mstar));
    return p;
}

/**
 * Re w_s^H E{g~_sk g~_s'k^H} v_s' for all (s, s'), with w and v stacked
 * precoders. This is the second moment of (g~_sk^H w_s)(g~_s'k^H v_s')^*.
 */
RMat cross_form(const ChannelSet &ch, int k, const CVec &w, const CVec &v)
{
    const CVec x = ch.ris_vector(k);
    const CVec pw = los_projections(ch, x, w);
    const CVec pv = los_projections(ch, x, v);
    const double a2 = ch.alpha2 * ch.alpha2;
    const double b2 = ch.beta2 * ch.beta2;
    const double trM = x.squaredNorm();
    RMat out(ch.S, ch.S);
    for (int s = 0; s < ch.S; ++s)
        for (int t = 0; t < ch.S; ++t) {
            double val = a2 * std::real(std::conj(pw(s)) * pv(t));
            if (s == t)
                val += b2 * trM * std::real(w.segment(s * ch.Mstar, ch.Mstar).dot(v.segment(s * ch.Mstar, ch.Mstar)));
            out(s, t) = val;
        }
    return out;
}

/**
 * Sample accumulator split into equal-size batches so that standard errors
 * of nonlinear functions of the means can be taken from the batch spread.
 */
class BatchSums {
public:
    BatchSums(int dim, int n, int batches) : n_(n), B_(std::clamp(batches, 2, std::max(2, n)))
    {
        sums_ = RMat::Zero(dim, B_);
        counts_ = RVec::Zero(B_);
    }
    int batch_of(int i) const { return static_cast<int>((static_cast<long long>(i) * B_) / n_); }
    void add(int i, const RVec &x)
    {
        const int b = batch_of(i);
        sums_.col(b) += x;
        counts_(b) += 1.0;
    }
    int batches() const { return B_; }
    RVec mean() const { return sums_.rowwise().sum() / counts_.sum(); }
    RVec batch_mean(int b) const { return counts_(b) > 0 ? RVec(sums_.col(b) / counts_(b)) : RVec(sums_.col(b)); }
    double count(int b) const { return counts_(b); }
    double total() const { return counts_.sum(); }

    /// Standard error of the linear statistics from the batch means.
    RVec linear_se() const
    {
        const RVec m = mean();
        RVec acc = RVec::Zero(m.size());
        int used = 0;
        for (int b = 0; b < B_; ++b) {
            if (counts_(b) <= 0) continue;
            acc += (batch_mean(b) - m).cwiseAbs2();
            ++used;
        }
        if (used < 2) return RVec::Zero(m.size());
        return (acc / (used * (used - 1.0))).cwiseSqrt();
    }

    /// Standard error of a scalar function of the batch means.
    template <typename F>
    double se_of(F f) const
    {
        std::vector<double> vals;
        for (int b = 0; b < B_; ++b)
            if (counts_(b) > 1) vals.push_back(f(batch_mean(b), counts_(b)));
        if (vals.size() < 2) return 0.0;
        double mu = 0.0;
        for (double v : vals) mu += v;
        mu /= vals.size();
        double acc = 0.0;
        for (double v : vals) acc += (v - mu) * (v - mu);
        return std::sqrt(acc / (vals.size() * (vals.size() - 1.0)));
    }

private:
    int n_;
    int B_;
    RMat sums_;
    RVec counts_;
};

/// Unbiased variance of a complex variable from sample moments.
double complex_variance(double re, double im, double abs2, double n)
{
    const double v = abs2 - (re * re + im * im);
    return n > 1.0 ? std::max(v, 0.0) * n / (n - 1.0) : std::max(v, 0.0);
}

void tff_terms(const ChannelSet &ch, const CMat &Wn, ExpectationCache &c)
{
    c.tff.assign(static_cast<std::size_t>(c.Kf) * c.Kn, RMat::Zero(c.S, c.S));
    for (int k = 0; k < c.Kf; ++k)
        for (int i = 0; i < c.Kn; ++i) {
            const CVec w = Wn.col(i);
            c.tff[k * c.Kn + i] = cross_form(ch, k, w, w);
        }
}

void nn_terms(const ChannelSet &ch, const CMat &Wn, ExpectationCache &c)
{
    c.nn.assign(static_cast<std::size_t>(c.Kn) * c.Kn, CVec::Zero(c.S));
    c.cbar = RMat::Zero(c.S, c.Kn);
    const int Ms = ch.Mstar;
    for (int k = 0; k < c.Kn; ++k)
        for (int i = 0; i < c.Kn; ++i)
            for (int s = 0; s < c.S; ++s)
                c.nn[k * c.Kn + i](s) = ch.H1.block(s * Ms, k, Ms, 1).col(0).dot(Wn.block(s * Ms, i, Ms, 1).col(0));
    for (int k = 0; k < c.Kn; ++k)
        for (int s = 0; s < c.S; ++s) c.cbar(s, k) = Wn.block(s * Ms, k, Ms, 1).squaredNorm();
}

double quad(const RVec &a, const RMat &X) { return a.dot(X * a); }

} // namespace

CMat ris_gram_mean(const ChannelSet &ch, int s)
{
    if (s < 0 || s >= ch.S) throw InputError(fmt::format("subarray index {} outside [0, {})", s, ch.S));
    const CMat Hs = ch.H2_los_sub(s);
    return ch.alpha2 * ch.alpha2 * Hs * Hs.adjoint() +
           ch.beta2 * ch.beta2 * ch.Mstar * CMat::Identity(ch.N, ch.N);
}

CMat cascade_cross_cov(const ChannelSet &ch, int k, int s, int s2)
{
    check_ff(ch, k, s);
    check_ff(ch, k, s2);
    const CVec x = ch.ris_vector(k);
    const CVec u = ch.H2_los_sub(s).adjoint() * x;
    const CVec v = ch.H2_los_sub(s2).adjoint() * x;
    CMat R = ch.alpha2 * ch.alpha2 * u * v.adjoint();
    if (s == s2) R += ch.varsigma[k] * ch.beta2 * ch.beta2 * ch.N * CMat::Identity(ch.Mstar, ch.Mstar);
    return R;
}

double mrt_psi_ff(const ChannelSet &ch, int k, int s)
{
    check_ff(ch, k, s);
    const CVec x = ch.ris_vector(k);
    return std::real(x.dot(ris_gram_mean(ch, s) * x));
}

double mrt_a(const ChannelSet &ch, int k, int s)
{
    check_ff(ch, k, s);
    const CVec x = ch.ris_vector(k);
    const double a2 = ch.alpha2 * ch.alpha2;
    const double b2 = ch.beta2 * ch.beta2;
    const double vs = ch.varsigma[k];
    const double N = ch.N;
    const double Ms = ch.Mstar;
    const CMat Hs = ch.H2_los_sub(s);
    const double xHHx = (Hs.adjoint() * x).squaredNorm();
    const double bMb = std::norm(ch.b_ris.dot(x)); // b^H M_kk b = |b^H x|^2
    return vs * a2 * b2 * N * xHHx + (a2 * b2 * Ms * bMb + vs * b2 * b2 * N * Ms) * x.squaredNorm();
}

CMat mrt_C(const ChannelSet &ch, int s, int j)
{
    check_ff(ch, j, s);
    const CVec x = ch.ris_vector(j);
    const CMat Mjj = x * x.adjoint();
    const CMat Hs = ch.H2_los_sub(s);
    const CMat E = Hs * Hs.adjoint();
    const double a2 = ch.alpha2 * ch.alpha2;
    const double b2 = ch.beta2 * ch.beta2;
    const double Ms = ch.Mstar;
    const cd trM = Mjj.trace();
    const cd trHMH = (Hs.adjoint() * Mjj * Hs).trace();
    const CMat I = CMat::Identity(ch.N, ch.N);
    CMat inner = a2 * Ms * E * Mjj + a2 * trM * E + a2 * trHMH * I + a2 * Ms * Mjj * E + b2 * Ms * Ms * Mjj +
                 b2 * Ms * trM * I;
    return a2 * a2 * E * Mjj * E + b2 * inner;
}

CMat mrt_D(const ChannelSet &ch, int s, int s2, int j)
{
    check_ff(ch, j, s);
    check_ff(ch, j, s2);
    const CVec x = ch.ris_vector(j);
    return ris_gram_mean(ch, s) * (x * x.adjoint()) * ris_gram_mean(ch, s2);
}

double mrt_b(const ChannelSet &ch, int k, int j, int s, int s2)
{
    check_ff(ch, k, s);
    const CVec x = ch.ris_vector(k);
    const CMat X = s == s2 ? mrt_C(ch, s, j) : mrt_D(ch, s, s2, j);
    return std::real(x.dot(X * x));
}

double mrt_xi_nf(const ChannelSet &ch, int k, int j, int s, int s2)
{
    if (k < 0 || k >= ch.Kn()) throw InputError(fmt::format("NFUE index {} outside [0, {})", k, ch.Kn()));
    const CVec g1 = ch.gbar(s, k);
    const CVec g2 = ch.gbar(s2, k);
    return std::real(g1.dot(cascade_cross_cov(ch, j, s, s2) * g2));
}

double mrt_xi_ff(const ChannelSet &ch, int k, int i, int s, int s2)
{
    if (i < 0 || i >= ch.Kn()) throw InputError(fmt::format("NFUE index {} outside [0, {})", i, ch.Kn()));
    const CVec g1 = ch.gbar(s, i);
    const CVec g2 = ch.gbar(s2, i);
    return std::real(g1.dot(cascade_cross_cov(ch, k, s, s2) * g2));
}

PowerConstants ExpectationCache::constants(const VrAssignment &vr) const
{
    PowerConstants c;
    c.nf = cbar.cwiseProduct(vr.nf_mask());
    c.ff = ctilde.cwiseProduct(vr.ff_mask());
    c.ff_se = ctilde_se.cwiseProduct(vr.ff_mask());
    c.samples = samples;
    return c;
}

ExpectationCache mrt_closed_form(const ChannelSet &ch)
{
    ExpectationCache c;
    c.scheme = Precoder::MRT;
    c.S = ch.S;
    c.Kn = ch.Kn();
    c.Kf = ch.Kf();
    c.closed_form = true;
    const int S = c.S;
    nn_terms(ch, ch.H1, c);
    tff_terms(ch, ch.H1, c);

    c.rnf.assign(static_cast<std::size_t>(c.Kn) * c.Kf, RMat::Zero(S, S));
    for (int k = 0; k < c.Kn; ++k)
        for (int j = 0; j < c.Kf; ++j) {
            const CVec g = ch.H1.col(k);
            c.rnf[k * c.Kf + j] = cross_form(ch, j, g, g);
        }
    c.rnf_se.assign(c.rnf.size(), RMat::Zero(S, S));

    c.ff_mean = CMat::Zero(S, c.Kf);
    c.ff_var = RMat::Zero(S, c.Kf);
    c.ctilde = RMat::Zero(S, c.Kf);
    for (int k = 0; k < c.Kf; ++k)
        for (int s = 0; s < S; ++s) {
            const double psi = mrt_psi_ff(ch, k, s);
            c.ff_mean(s, k) = psi;
            c.ctilde(s, k) = psi;
            c.ff_var(s, k) = mrt_a(ch, k, s);
        }
    c.ff_mean_se = RMat::Zero(S, c.Kf);
    c.ff_var_se = RMat::Zero(S, c.Kf);
    c.ctilde_se = RMat::Zero(S, c.Kf);

    c.q.assign(static_cast<std::size_t>(c.Kf) * c.Kf, RMat::Zero(S, S));
    for (int k = 0; k < c.Kf; ++k) {
        const CVec x = ch.ris_vector(k);
        for (int j = 0; j < c.Kf; ++j) {
            if (j == k) continue;
            RMat Q(S, S);
            for (int s = 0; s < S; ++s) {
                Q(s, s) = std::real(x.dot(mrt_C(ch, s, j) * x));
                for (int t = s + 1; t < S; ++t) {
                    Q(s, t) = std::real(x.dot(mrt_D(ch, s, t, j) * x));
                    Q(t, s) = Q(s, t);
                }
            }
            c.q[k * c.Kf + j] = Q;
        }
    }
    c.q_se.assign(c.q.size(), RMat::Zero(S, S));
    return c;
}

ExpectationCache estimate_expectations(Precoder scheme, const ChannelSet &ch, const VrAssignment &vr, int n_mc,
                                       std::uint64_t seed, int batches)
{
    if (n_mc < 2) throw InputError("expectation estimates need at least two samples");
    vr.validate();
    ExpectationCache c;
    c.scheme = scheme;
    c.S = ch.S;
    c.Kn = ch.Kn();
    c.Kf = ch.Kf();
    c.samples = n_mc;
    const int S = c.S;
    const int Kn = c.Kn;
    const int Kf = c.Kf;
    const int Ms = ch.Mstar;

    const CMat Wn = precoder_matrix(scheme, ch.H1, S, vr.nf, "NFUE");
    nn_terms(ch, Wn, c);
    tff_terms(ch, Wn, c);

    const int off_r = 0;
    const int off_m = off_r + Kn * Kf * S * S;
    const int off_v = off_m + 2 * Kf * S;
    const int off_q = off_v + Kf * S;
    const int off_c = off_q + Kf * Kf * S * S;
    const int dim = off_c + Kf * S;
    BatchSums acc(dim, n_mc, batches);

    Rng rng(seed);
    RVec x(dim);
    std::vector<CMat> Y(S), Z(S);
    for (int n = 0; n < n_mc && Kf > 0; ++n) {
        const CMat H2 = compose_h2(ch, sample_nlos(ch.N, ch.M, rng));
        const CMat G = cascaded_channels(ch, H2);
        const CMat Wf = precoder_matrix(scheme, G, S, vr.ff, "FFUE");
        for (int s = 0; s < S; ++s) {
            const auto Wfs = Wf.middleRows(s * Ms, Ms);
            Y[s] = ch.H1.middleRows(s * Ms, Ms).adjoint() * Wfs; // Kn x Kf
            Z[s] = G.middleRows(s * Ms, Ms).adjoint() * Wfs;     // Kf x Kf
        }
        x.setZero();
        for (int k = 0; k < Kn; ++k)
            for (int j = 0; j < Kf; ++j)
                for (int s = 0; s < S; ++s)
                    for (int t = 0; t < S; ++t)
                        x(off_r + ((k * Kf + j) * S + s) * S + t) = std::real(Y[s](k, j) * std::conj(Y[t](k, j)));
        for (int k = 0; k < Kf; ++k)
            for (int s = 0; s < S; ++s) {
                const cd d = Z[s](k, k);
                x(off_m + 2 * (k * S + s)) = d.real();
                x(off_m + 2 * (k * S + s) + 1) = d.imag();
                x(off_v + k * S + s) = std::norm(d);
                x(off_c + k * S + s) = Wf.block(s * Ms, k, Ms, 1).squaredNorm();
            }
        for (int k = 0; k < Kf; ++k)
            for (int j = 0; j < Kf; ++j)
                for (int s = 0; s < S; ++s)
                    for (int t = 0; t < S; ++t)
                        x(off_q + ((k * Kf + j) * S + s) * S + t) = std::real(Z[s](k, j) * std::conj(Z[t](k, j)));
        acc.add(n, x);
    }

    const RVec mean = Kf > 0 ? acc.mean() : RVec::Zero(dim);
    const RVec se = Kf > 0 ? acc.linear_se() : RVec::Zero(dim);
    const double total = std::max(acc.total(), 1.0);
    auto square = [&](int off, int idx, const RVec &v) {
        RMat m(S, S);
        for (int s = 0; s < S; ++s)
            for (int t = 0; t < S; ++t) m(s, t) = v(off + (idx * S + s) * S + t);
        return RMat(0.5 * (m + m.transpose()));
    };
    c.rnf.resize(static_cast<std::size_t>(Kn) * Kf);
    c.rnf_se.resize(c.rnf.size());
    for (int idx = 0; idx < Kn * Kf; ++idx) {
        c.rnf[idx] = square(off_r, idx, mean);
        c.rnf_se[idx] = square(off_r, idx, se);
    }
    c.q.assign(static_cast<std::size_t>(Kf) * Kf, RMat::Zero(S, S));
    c.q_se.assign(c.q.size(), RMat::Zero(S, S));
    for (int k = 0; k < Kf; ++k)
        for (int j = 0; j < Kf; ++j) {
            if (j == k) continue;
            c.q[k * Kf + j] = square(off_q, k * Kf + j, mean);
            c.q_se[k * Kf + j] = square(off_q, k * Kf + j, se);
        }
    c.ff_mean = CMat::Zero(S, Kf);
    c.ff_mean_se = RMat::Zero(S, Kf);
    c.ff_var = RMat::Zero(S, Kf);
    c.ff_var_se = RMat::Zero(S, Kf);
    c.ctilde = RMat::Zero(S, Kf);
    c.ctilde_se = RMat::Zero(S, Kf);
    for (int k = 0; k < Kf; ++k)
        for (int s = 0; s < S; ++s) {
            const int im = off_m + 2 * (k * S + s);
            const int iv = off_v + k * S + s;
            c.ff_mean(s, k) = cd(mean(im), mean(im + 1));
            c.ff_mean_se(s, k) = se(im);
            c.ff_var(s, k) = complex_variance(mean(im), mean(im + 1), mean(iv), total);
            c.ff_var_se(s, k) =
                acc.se_of([&](const RVec &bm, double cnt) { return complex_variance(bm(im), bm(im + 1), bm(iv), cnt); });
            c.ctilde(s, k) = mean(off_c + k * S + s);
            c.ctilde_se(s, k) = se(off_c + k * S + s);
        }
    return c;
}

ExpectationCache build_cache(Precoder scheme, const ChannelSet &ch, const VrAssignment &vr, int n_mc,
                             std::uint64_t seed)
{
    if (scheme == Precoder::MRT) return mrt_closed_form(ch);
    return estimate_expectations(scheme, ch, vr, n_mc, seed);
}

SinrSet evaluate_sinr(const ExpectationCache &c, const RMat &a_nf, const RMat &a_ff, const PowerBudget &b)
{
    if (a_nf.rows() != c.S || a_nf.cols() != c.Kn || a_ff.rows() != c.S || a_ff.cols() != c.Kf)
        throw InputError("amplitude matrices do not match the expectation cache");
    SinrSet out;
    out.nf.resize(c.Kn);
    out.ff.resize(c.Kf);
    for (int k = 0; k < c.Kn; ++k) {
        SinrTerms &t = out.nf[k];
        t.ds = b.Pn * std::norm(a_nf.col(k).cast<cd>().dot(c.nn[k * c.Kn + k]));
        for (int i = 0; i < c.Kn; ++i)
            if (i != k) t.ui_intra += b.Pn * std::norm(a_nf.col(i).cast<cd>().dot(c.nn[k * c.Kn + i]));
        for (int j = 0; j < c.Kf; ++j) t.ui_inter += b.Pf * quad(a_ff.col(j), c.rnf[k * c.Kf + j]);
        t.ui_inter = std::max(t.ui_inter, 0.0);
    }
    for (int k = 0; k < c.Kf; ++k) {
        SinrTerms &t = out.ff[k];
        t.ds = b.Pf * std::norm(a_ff.col(k).cast<cd>().dot(c.ff_mean.col(k)));
        t.bu = b.Pf * a_ff.col(k).cwiseAbs2().dot(c.ff_var.col(k));
        for (int j = 0; j < c.Kf; ++j)
            if (j != k) t.ui_intra += b.Pf * quad(a_ff.col(j), c.q[k * c.Kf + j]);
        for (int i = 0; i < c.Kn; ++i) t.ui_inter += b.Pn * quad(a_nf.col(i), c.tff[k * c.Kn + i]);
        t.ui_intra = std::max(t.ui_intra, 0.0);
        t.ui_inter = std::max(t.ui_inter, 0.0);
    }
    return out;
}

SinrSet evaluate_sinr(const ExpectationCache &c, const PowerAllocation &alloc, const VrAssignment &vr,
                      const PowerBudget &b)
{
    return evaluate_sinr(c, alloc.nf_amplitudes(vr), alloc.ff_amplitudes(vr), b);
}

OracleResult oracle_sinr(Precoder scheme, const ChannelSet &ch, const VrAssignment &vr,
                         const PowerAllocation &alloc, const PowerBudget &b, int n_mc, std::uint64_t seed,
                         int batches)
{
    if (n_mc < 2) throw InputError("the oracle needs at least two samples");
    vr.validate();
    const int S = ch.S;
    const int Kn = ch.Kn();
    const int Kf = ch.Kf();
    const int Ms = ch.Mstar;
    const RMat an = alloc.nf_amplitudes(vr);
    const RMat af = alloc.ff_amplitudes(vr);

    auto scale = [&](CMat W, const RMat &a) {
        for (int k = 0; k < W.cols(); ++k)
            for (int s = 0; s < S; ++s) W.block(s * Ms, k, Ms, 1) *= a(s, k);
        return W;
    };
    const CMat Wn = scale(apply_mask(precoder_matrix(scheme, ch.H1, S, vr.nf, "NFUE"), S, vr.nf), an);
    const CMat Dn = ch.H1.adjoint() * Wn; // Kn x Kn, deterministic

    OracleResult r;
    r.samples = n_mc;
    r.nf.resize(Kn);
    r.ff.resize(Kf);
    for (int k = 0; k < Kn; ++k) {
        r.nf[k].ds.value = b.Pn * std::norm(Dn(k, k));
        for (int i = 0; i < Kn; ++i)
            if (i != k) r.nf[k].ui_intra.value += b.Pn * std::norm(Dn(k, i));
    }

    // Layout: NF inter (Kn), then per FFUE: Re d, Im d, |d|^2, intra, inter.
    const int dim = Kn + 5 * Kf;
    BatchSums acc(dim, n_mc, batches);
    Rng rng(seed);
    RVec x(dim);
    for (int n = 0; n < n_mc; ++n) {
        const CMat H2 = compose_h2(ch, sample_nlos(ch.N, ch.M, rng));
        const CMat G = cascaded_channels(ch, H2);
        const CMat Wf = scale(apply_mask(precoder_matrix(scheme, G, S, vr.ff, "FFUE"), S, vr.ff), af);
        const CMat Yn = ch.H1.adjoint() * Wf; // Kn x Kf
        const CMat Zf = G.adjoint() * Wf;     // Kf x Kf
        const CMat Zn = G.adjoint() * Wn;     // Kf x Kn
        x.setZero();
        for (int k = 0; k < Kn; ++k) x(k) = Yn.row(k).squaredNorm();
        for (int k = 0; k < Kf; ++k) {
            const cd d = Zf(k, k);
            x(Kn + 5 * k) = d.real();
            x(Kn + 5 * k + 1) = d.imag();
            x(Kn + 5 * k + 2) = std::norm(d);
            x(Kn + 5 * k + 3) = Zf.row(k).squaredNorm() - std::norm(d);
            x(Kn + 5 * k + 4) = Zn.row(k).squaredNorm();
        }
        acc.add(n, x);
    }
    const RVec mean = acc.mean();
    const RVec se = acc.linear_se();
    const double total = acc.total();
    for (int k = 0; k < Kn; ++k) {
        r.nf[k].ui_inter = {b.Pf * mean(k), b.Pf * se(k)};
        const auto &t = r.nf[k];
        r.nf[k].sinr = t.ds.value / (t.ui_intra.value + t.ui_inter.value + 1.0);
    }
    for (int k = 0; k < Kf; ++k) {
        const int o = Kn + 5 * k;
        auto &t = r.ff[k];
        t.ds.value = b.Pf * (mean(o) * mean(o) + mean(o + 1) * mean(o + 1));
        t.ds.se = b.Pf * acc.se_of([&](const RVec &m, double) { return m(o) * m(o) + m(o + 1) * m(o + 1); });
        t.bu.value = b.Pf * complex_variance(mean(o), mean(o + 1), mean(o + 2), total);
        t.bu.se = b.Pf * acc.se_of([&](const RVec &m, double cnt) {
            return complex_variance(m(o), m(o + 1), m(o + 2), cnt);
        });
        t.ui_intra = {b.Pf * mean(o + 3), b.Pf * se(o + 3)};
        t.ui_inter = {b.Pn * mean(o + 4), b.Pn * se(o + 4)};
        t.sinr = t.ds.value / (t.bu.value + t.ui_intra.value + t.ui_inter.value + 1.0);
    }
    return r;
}

SeReport se_report(const SinrSet &sinrs, double w_n, double w_f, const std::string &method)
{
    SeReport r;
    r.method = method;
    for (const auto &t : sinrs.nf) r.nf.push_back(se_from_sinr(t.sinr()));
    for (const auto &t : sinrs.ff) r.ff.push_back(se_from_sinr(t.sinr()));
    r.min_nf = r.nf.empty() ? 0.0 : *std::min_element(r.nf.begin(), r.nf.end());
    r.min_ff = r.ff.empty() ? 0.0 : *std::min_element(r.ff.begin(), r.ff.end());
    r.objective = w_n * r.min_nf + w_f * r.min_ff;
    return r;
}

} // namespace xlris
