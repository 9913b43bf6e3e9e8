/**
 * @file vr_selection.cpp
 * @brief Greedy visibility-region selection.
 */
#include "xlris/vr_selection.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace xlris {

Precoder vr_scheme(Precoder scheme)
{
    return scheme == Precoder::LZF ? Precoder::CZF : scheme;
}

namespace {

double sinr_with(const ExpectationCache &cache, const PowerBudget &b, const VrAssignment &vr, bool nf, int k)
{
    const PowerConstants c = cache.constants(vr);
    const PowerAllocation alloc = equal_power(cache.scheme, c, vr, b);
    const SinrSet s = evaluate_sinr(cache, alloc, vr, b);
    return nf ? s.nf[k].sinr() : s.ff[k].sinr();
}

struct UserPass {
    std::vector<int> set;
    double sinr = 0.0;
    int evaluations = 0;
    bool fallback = false;
};

UserPass prune(const ExpectationCache &cache, const PowerBudget &b, bool nf, int k, std::vector<int> set,
               double threshold)
{
    UserPass out;
    const int S = cache.S;
    for (int s = 0; s < S; ++s) {
        auto it = std::find(set.begin(), set.end(), s);
        if (it == set.end()) {
            ++out.evaluations; // nothing to remove; the SINR is unchanged
            continue;
        }
        std::vector<int> trial = set;
        trial.erase(trial.begin() + (it - set.begin()));
        ++out.evaluations;
        if (trial.empty()) continue;
        if (vr_user_sinr(cache, b, nf, k, trial) >= threshold) set = trial;
    }
    if (set.empty()) {
        // Unreachable while the threshold is positive, kept as a guard.
        double best = -1.0;
        int arg = 0;
        for (int s = 0; s < S; ++s) {
            const double v = vr_user_sinr(cache, b, nf, k, {s});
            if (v > best) {
                best = v;
                arg = s;
            }
        }
        set = {arg};
        out.fallback = true;
    }
    out.sinr = vr_user_sinr(cache, b, nf, k, set);
    out.set = set;
    return out;
}

} // namespace

double vr_user_sinr(const ExpectationCache &cache, const PowerBudget &b, bool nf, int k, const std::vector<int> &set)
{
    VrAssignment vr = VrAssignment::full(cache.S, cache.Kn, cache.Kf);
    (nf ? vr.nf : vr.ff).at(k) = set;
    return sinr_with(cache, b, vr, nf, k);
}

VrSelection select_vrs(const ExpectationCache &cache, const PowerBudget &b, double delta)
{
    if (!(delta > 0.0 && delta <= 1.0)) throw DomainError(fmt::format("VR ratio delta={} outside (0, 1]", delta));
    if (cache.scheme == Precoder::LZF)
        throw InputError("VR selection runs on MRT or CZF statistics; LZF reuses the CZF regions");
    VrSelection r;
    r.scheme = cache.scheme;
    const VrAssignment full = VrAssignment::full(cache.S, cache.Kn, cache.Kf);
    r.vr = full;
    const SinrSet base = evaluate_sinr(cache, equal_power(cache.scheme, cache.constants(full), full, b), full, b);

    auto run_group = [&](bool nf) {
        const auto &terms = nf ? base.nf : base.ff;
        auto &baseline = nf ? r.baseline_nf : r.baseline_ff;
        auto &threshold = nf ? r.threshold_nf : r.threshold_ff;
        auto &selected = nf ? r.selected_nf : r.selected_ff;
        auto &evals = nf ? r.evaluations_nf : r.evaluations_ff;
        auto &fallback = nf ? r.fallback_nf : r.fallback_ff;
        auto &sets = nf ? r.vr.nf : r.vr.ff;
        for (std::size_t k = 0; k < terms.size(); ++k) {
            const double s0 = terms[k].sinr();
            if (!(s0 > 0.0))
                throw DomainError(fmt::format("{} {} has zero full-array SINR; VR thresholds are undefined",
                                              nf ? "NFUE" : "FFUE", k));
            baseline.push_back(s0);
            threshold.push_back(delta * s0);
            const UserPass p = prune(cache, b, nf, static_cast<int>(k), sets[k], delta * s0);
            sets[k] = p.set;
            selected.push_back(p.sinr);
            evals.push_back(p.evaluations);
            fallback.push_back(p.fallback);
        }
    };
    run_group(true);
    run_group(false);
    return r;
}

VrAssignment refine_vrs(const ExpectationCache &cache, const PowerBudget &b, const VrAssignment &start,
                        const std::vector<double> &threshold_nf, const std::vector<double> &threshold_ff)
{
    start.validate();
    VrAssignment out = start;
    for (int k = 0; k < start.Kn(); ++k) out.nf[k] = prune(cache, b, true, k, start.nf[k], threshold_nf.at(k)).set;
    for (int k = 0; k < start.Kf(); ++k) out.ff[k] = prune(cache, b, false, k, start.ff[k], threshold_ff.at(k)).set;
    return out;
}

double vr_efficiency(const VrAssignment &vr)
{
    const int K = vr.Kn() + vr.Kf();
    if (K == 0 || vr.S < 1) throw InputError("VR efficiency needs at least one user and one subarray");
    double active = 0.0;
    for (const auto &s : vr.nf) active += static_cast<double>(s.size());
    for (const auto &s : vr.ff) active += static_cast<double>(s.size());
    return active / (static_cast<double>(K) * vr.S);
}

} // namespace xlris
