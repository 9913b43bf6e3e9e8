/**
 * @file harness.cpp
 * @brief Per-trial pipeline, sweeps and report writers.
 */
#include "xlris/harness.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

namespace xlris {

namespace {

std::string lower(std::string s)
{
    for (auto &c : s) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (c == '_') c = '-';
    }
    return s;
}

// Stream ids for the seeds derived from a trial seed.
constexpr std::uint64_t kSelectionStream = 10;
constexpr std::uint64_t kRpsStream = 20;
constexpr std::uint64_t kHpsStream = 30;
constexpr std::uint64_t kOpsStream = 40;

std::uint64_t stream(std::uint64_t base, Precoder p)
{
    return base + static_cast<std::uint64_t>(p);
}

} // namespace

std::string to_string(Scheme s)
{
    switch (s) {
    case Scheme::OpsOpc: return "OPS-OPC";
    case Scheme::RpsEpc: return "RPS-EPC";
    case Scheme::HpsEpc: return "HPS-EPC";
    }
    return "?";
}

Scheme parse_scheme(const std::string &s)
{
    const std::string l = lower(s);
    if (l == "ops-opc") return Scheme::OpsOpc;
    if (l == "rps-epc") return Scheme::RpsEpc;
    if (l == "hps-epc") return Scheme::HpsEpc;
    throw InputError("unknown scheme '" + s + "' (expected OPS-OPC, RPS-EPC or HPS-EPC)");
}

std::string to_string(SweepAxis a)
{
    switch (a) {
    case SweepAxis::None: return "none";
    case SweepAxis::M: return "M";
    case SweepAxis::Delta: return "delta";
    case SweepAxis::Weights: return "weights";
    case SweepAxis::Power: return "P";
    }
    return "?";
}

SweepAxis parse_sweep_axis(const std::string &s)
{
    const std::string l = lower(s);
    if (l == "none" || l.empty()) return SweepAxis::None;
    if (l == "m") return SweepAxis::M;
    if (l == "delta") return SweepAxis::Delta;
    if (l == "weights" || l == "w") return SweepAxis::Weights;
    if (l == "p" || l == "power") return SweepAxis::Power;
    throw InputError("unknown sweep axis '" + s + "' (expected none, M, delta, weights or P)");
}

void ExperimentPlan::validate() const
{
    if (schemes.empty()) throw InputError("experiment plan has no schemes");
    if (precoders.empty()) throw InputError("experiment plan has no precoders");
    if (trials < 1) throw InputError("experiment plan needs at least one trial");
    if (threads < 1) throw InputError("experiment plan needs at least one thread");
    if (hps_user < 0) throw InputError("HPS-EPC user index must be nonnegative");
    if (axis != SweepAxis::None && values.empty()) throw InputError("sweep axis " + to_string(axis) + " has no values");
    if (axis == SweepAxis::None && !values.empty()) throw InputError("sweep values given without a sweep axis");
}

std::vector<const TrialRecord *> ExperimentResult::select(Scheme s, Precoder p) const
{
    std::vector<const TrialRecord *> out;
    for (const auto &r : records)
        if (r.scheme == s && r.precoder == p) out.push_back(&r);
    return out;
}

std::vector<double> ExperimentResult::objective_samples(Scheme s, Precoder p) const
{
    std::vector<double> v;
    for (const auto *r : select(s, p))
        if (r->ok) v.push_back(r->report.objective);
    std::sort(v.begin(), v.end());
    return v;
}

double ExperimentResult::mean_vr_efficiency(Scheme s, Precoder p) const
{
    double sum = 0.0;
    int n = 0;
    for (const auto *r : select(s, p)) {
        if (!r->ok) continue;
        sum += r->vr_efficiency;
        ++n;
    }
    if (n == 0) throw InputError(fmt::format("no successful {} {} records", to_string(s), to_string(p)));
    return sum / n;
}

int ExperimentResult::failures() const
{
    return static_cast<int>(std::count_if(records.begin(), records.end(), [](const TrialRecord &r) { return !r.ok; }));
}

SystemConfig apply_sweep(const SystemConfig &cfg, SweepAxis axis, double value)
{
    SystemConfig c = cfg;
    switch (axis) {
    case SweepAxis::None: break;
    case SweepAxis::M: {
        const int M = static_cast<int>(std::lround(value));
        if (M < 1 || std::abs(value - M) > 1e-9) throw InputError(fmt::format("M = {} is not a positive integer", value));
        int mx = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(M)) - 1e-9));
        while (M % mx != 0) ++mx;
        c.Mx = mx;
        c.My = M / mx;
        break;
    }
    case SweepAxis::Delta: c.delta = value; break;
    case SweepAxis::Weights:
        c.w_n = value;
        c.w_f = 1.0 - value;
        break;
    case SweepAxis::Power: c.tx_power_dbm = value; break;
    }
    c.validate();
    return c;
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

namespace {

struct Selected {
    VrAssignment vr;
    double min_ratio = 0.0;
    ExpectationCache cache; ///< statistics of the selecting scheme at the full array
    std::string error;
};

double min_selection_ratio(const VrSelection &sel)
{
    double r = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < sel.baseline_nf.size(); ++k) r = std::min(r, sel.selected_nf[k] / sel.baseline_nf[k]);
    for (std::size_t k = 0; k < sel.baseline_ff.size(); ++k) r = std::min(r, sel.selected_ff[k] / sel.baseline_ff[k]);
    return r;
}

double margin_fraction(const PowerAllocation &alloc, const ExpectationCache &cache, const VrAssignment &vr,
                       const PowerBudget &b)
{
    return check_power(alloc, cache.constants(vr), vr, b).margin / b.P;
}

/// Equal-power evaluation of one precoder for the phases in @p ch.
void equal_power_record(TrialRecord &rec, const ChannelSet &ch, const Selected &sel, const SystemConfig &cfg,
                        const PowerBudget &b, std::uint64_t seed)
{
    const Precoder p = rec.precoder;
    const ExpectationCache cache = build_cache(p, ch, sel.vr, cfg.mc_samples, seed);
    const PowerAllocation alloc = equal_power(p, cache.constants(sel.vr), sel.vr, b);
    const SinrSet s = evaluate_sinr(cache, alloc, sel.vr, b);
    rec.report = se_report(s, cfg.w_n, cfg.w_f, cache.closed_form ? "closed-form" : "statistical");
    rec.power_margin = margin_fraction(alloc, cache, sel.vr, b);
}

template <typename F>
void timed(TrialRecord &rec, F &&body)
{
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body();
        rec.ok = true;
    } catch (const std::exception &e) {
        rec.ok = false;
        rec.error = e.what();
    }
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

std::vector<TrialRecord> run_trial(const SystemConfig &cfg, const ExperimentPlan &plan, int trial)
{
    plan.validate();
    cfg.validate();
    const std::uint64_t seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(trial));
    const PowerBudget b = PowerBudget::from_config(cfg);

    std::vector<TrialRecord> out;
    for (Scheme s : plan.schemes) {
        for (Precoder p : plan.precoders) {
            TrialRecord r;
            r.trial = trial;
            r.scheme = s;
            r.precoder = p;
            out.push_back(std::move(r));
        }
    }
    auto fail_all = [&](const std::string &why) {
        for (auto &r : out) {
            r.ok = false;
            r.error = why;
        }
        return out;
    };

    ChannelSet ch;
    try {
        Rng rng(seed);
        const UserGeometry geom = draw_geometry(cfg, rng);
        ch = build_channels(cfg, geom);
        ch.theta = random_phases(ch.N, rng);
    } catch (const std::exception &e) {
        return fail_all(std::string("channel generation: ") + e.what());
    }

    const bool want_ops = std::find(plan.schemes.begin(), plan.schemes.end(), Scheme::OpsOpc) != plan.schemes.end();
    const bool qos = want_ops && cfg.enforce_qos;
    // QoS floors need the RPS-EPC SEs of every precoder.
    std::vector<Precoder> needed = plan.precoders;
    if (qos) needed = {Precoder::MRT, Precoder::CZF, Precoder::LZF};

    // VR selection per selecting scheme under random phases and equal power.
    std::map<Precoder, Selected> selected;
    const VrAssignment full = VrAssignment::full(cfg.S, cfg.Kn, cfg.Kf);
    for (Precoder p : needed) {
        const Precoder vs = vr_scheme(p);
        if (selected.count(vs)) continue;
        Selected sel;
        try {
            sel.cache = build_cache(vs, ch, full, cfg.mc_samples, mix_seed(seed, stream(kSelectionStream, vs)));
            const VrSelection vsel = select_vrs(sel.cache, b, cfg.delta);
            sel.vr = vsel.vr;
            sel.min_ratio = min_selection_ratio(vsel);
        } catch (const std::exception &e) {
            sel.error = std::string("VR selection: ") + e.what();
        }
        selected.emplace(vs, std::move(sel));
    }
    auto selection = [&](Precoder p) -> const Selected & {
        const Selected &s = selected.at(vr_scheme(p));
        if (!s.error.empty()) throw SolverError(s.error);
        return s;
    };
    auto fill_vr = [&](TrialRecord &r) {
        const Selected &s = selection(r.precoder);
        r.vr = s.vr;
        r.vr_efficiency = vr_efficiency(s.vr);
        r.min_vr_ratio = s.min_ratio;
    };

    // RPS-EPC for every needed precoder.
    std::map<Precoder, TrialRecord> rps;
    for (Precoder p : needed) {
        TrialRecord r;
        r.trial = trial;
        r.scheme = Scheme::RpsEpc;
        r.precoder = p;
        timed(r, [&] {
            fill_vr(r);
            equal_power_record(r, ch, selection(p), cfg, b, mix_seed(seed, stream(kRpsStream, p)));
        });
        rps.emplace(p, std::move(r));
    }

    ScaOptions sca;
    sca.w_n = cfg.w_n;
    sca.w_f = cfg.w_f;
    sca.eps1 = cfg.tol.eps1;
    sca.max_iter = cfg.tol.I3;
    sca.enforce_qos = qos;
    if (qos) {
        sca.qos_nf.assign(cfg.Kn, std::numeric_limits<double>::infinity());
        sca.qos_ff.assign(cfg.Kf, std::numeric_limits<double>::infinity());
        for (const auto &[p, r] : rps) {
            if (!r.ok) continue;
            for (int k = 0; k < cfg.Kn; ++k) sca.qos_nf[k] = std::min(sca.qos_nf[k], r.report.nf[k]);
            for (int k = 0; k < cfg.Kf; ++k) sca.qos_ff[k] = std::min(sca.qos_ff[k], r.report.ff[k]);
        }
        // No successful baseline leaves no floor to enforce.
        for (auto &v : sca.qos_nf)
            if (!std::isfinite(v)) v = 0.0;
        for (auto &v : sca.qos_ff)
            if (!std::isfinite(v)) v = 0.0;
    }

    // Optimized phases depend on the FFUE regions only, so they are shared by precoders with equal regions.
    std::vector<std::pair<std::vector<std::vector<int>>, PhaseSolution>> phase_memo;
    auto phases_for = [&](const VrAssignment &vr) -> const PhaseSolution & {
        for (const auto &[sets, sol] : phase_memo)
            if (sets == vr.ff) return sol;
        phase_memo.emplace_back(vr.ff, optimize_phases(ch, vr, cfg.tol));
        return phase_memo.back().second;
    };

    for (auto &r : out) {
        const Precoder p = r.precoder;
        switch (r.scheme) {
        case Scheme::RpsEpc: {
            const double wall = r.wall_seconds;
            r = rps.at(p);
            r.wall_seconds += wall;
            break;
        }
        case Scheme::HpsEpc:
            timed(r, [&] {
                fill_vr(r);
                if (cfg.Kf > 0 && plan.hps_user >= cfg.Kf)
                    throw InputError(fmt::format("HPS-EPC user {} outside [0, {})", plan.hps_user, cfg.Kf));
                ChannelSet chh = ch;
                if (cfg.Kf > 0) chh.theta = heuristic_phases(ch, plan.hps_user);
                equal_power_record(r, chh, selection(p), cfg, b, mix_seed(seed, stream(kHpsStream, p)));
            });
            break;
        case Scheme::OpsOpc:
            timed(r, [&] {
                fill_vr(r);
                const Selected &sel = selection(p);
                ChannelSet cho = ch;
                if (cfg.Kf > 0) {
                    const PhaseSolution &ps = phases_for(sel.vr);
                    cho.theta = ps.theta;
                    r.phase_solves = ps.solves;
                    r.phase_residual = ps.residual;
                    r.phase_trace = ps.trace;
                }
                const ExpectationCache cache =
                    build_cache(p, cho, sel.vr, cfg.mc_samples, mix_seed(seed, stream(kOpsStream, p)));
                const ScaResult res = sca_solve(cache, sel.vr, b, sca);
                r.report = res.report;
                r.power_margin = margin_fraction(res.alloc, cache, sel.vr, b);
                r.sca_iterations = res.iterations;
                r.sca_restoration_iterations = res.restoration_iterations;
                r.sca_converged = res.converged;
                r.qos_infeasible = res.qos_infeasible;
                r.qos_violation = res.qos_violation;
                r.sca_trace = res.trace;
            });
            break;
        }
    }
    return out;
}

ExperimentResult run_pipeline(const SystemConfig &cfg, const ExperimentPlan &plan)
{
    plan.validate();
    cfg.validate();
    std::vector<std::vector<TrialRecord>> per_trial(plan.trials);
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int t = next++; t < plan.trials; t = next++) per_trial[t] = run_trial(cfg, plan, t);
    };
    const int nthreads = std::min(plan.threads, plan.trials);
    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
        for (auto &th : pool) th.join();
    }
    ExperimentResult res;
    res.config = cfg;
    for (auto &v : per_trial)
        for (auto &r : v) res.records.push_back(std::move(r));
    return res;
}

std::vector<ExperimentResult> sweep(const SystemConfig &cfg, const ExperimentPlan &plan)
{
    plan.validate();
    std::vector<ExperimentResult> out;
    if (plan.axis == SweepAxis::None) {
        out.push_back(run_pipeline(cfg, plan));
        return out;
    }
    for (double v : plan.values) {
        ExperimentResult r = run_pipeline(apply_sweep(cfg, plan.axis, v), plan);
        r.sweep_value = v;
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<std::pair<double, double>> empirical_cdf(std::vector<double> samples)
{
    std::sort(samples.begin(), samples.end());
    std::vector<std::pair<double, double>> out;
    const double n = static_cast<double>(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) out.emplace_back(samples[i], static_cast<double>(i + 1) / n);
    return out;
}

SystemConfig oracle_check_config(const SystemConfig &base)
{
    SystemConfig c = base;
    c.Mx = 8;
    c.My = 8;
    c.S = 4;
    c.N1 = 4;
    c.N2 = 4;
    c.Kn = 2;
    c.Kf = 2;
    c.ff_azimuths.clear();
    c.validate();
    return c;
}

std::vector<OracleCheckRow> mrt_oracle_check(const SystemConfig &cfg, int n_mc, std::uint64_t seed)
{
    cfg.validate();
    Rng rng(seed);
    const UserGeometry geom = draw_geometry(cfg, rng);
    ChannelSet ch = build_channels(cfg, geom);
    ch.theta = random_phases(ch.N, rng);
    const VrAssignment vr = VrAssignment::full(cfg.S, cfg.Kn, cfg.Kf);
    const PowerBudget b = PowerBudget::from_config(cfg);
    const ExpectationCache cache = mrt_closed_form(ch);
    const PowerAllocation alloc = equal_power(Precoder::MRT, cache.constants(vr), vr, b);
    const SinrSet closed = evaluate_sinr(cache, alloc, vr, b);
    const OracleResult orc = oracle_sinr(Precoder::MRT, ch, vr, alloc, b, n_mc, mix_seed(seed, 1));

    std::vector<OracleCheckRow> out;
    auto add = [&](const std::string &user, const char *term, double c, const Estimate &e) {
        OracleCheckRow r;
        r.user = user;
        r.term = term;
        r.closed = c;
        r.oracle = e.value;
        r.se = e.se;
        r.tol = std::max(0.02 * std::abs(c), 3.0 * e.se);
        r.pass = std::abs(c - e.value) <= r.tol;
        out.push_back(r);
    };
    auto add_user = [&](const std::string &user, const SinrTerms &c, const OracleTerms &o) {
        add(user, "ds", c.ds, o.ds);
        add(user, "bu", c.bu, o.bu);
        add(user, "ui_intra", c.ui_intra, o.ui_intra);
        add(user, "ui_inter", c.ui_inter, o.ui_inter);
    };
    for (int k = 0; k < cfg.Kn; ++k) add_user(fmt::format("nf{}", k), closed.nf[k], orc.nf[k]);
    for (int k = 0; k < cfg.Kf; ++k) add_user(fmt::format("ff{}", k), closed.ff[k], orc.ff[k]);
    return out;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

namespace {

std::string num(double v)
{
    return fmt::format("{:.12g}", v);
}

std::string quoted(const std::string &s)
{
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += (c == '\n' ? ' ' : c);
    }
    return out + "\"";
}

std::string join(const std::vector<double> &v)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + num(v[i]);
    return s;
}

std::string join(const std::vector<int> &v)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + std::to_string(v[i]);
    return s;
}

class CsvFile {
public:
    CsvFile(const std::filesystem::path &path, const std::string &header) : path_(path), out_(path, std::ios::binary)
    {
        if (!out_) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
        out_ << header << '\n';
    }
    void row(const std::string &line) { out_ << line << '\n'; }
    void close()
    {
        out_.close();
        if (!out_) throw std::runtime_error("failed to write '" + path_.string() + "'");
    }

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

} // namespace

std::string file_hash(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "' for hashing");
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[4096];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    return fmt::format("{:016x}", h);
}

void emit_reports(const std::vector<ExperimentResult> &results, const SystemConfig &cfg, const ExperimentPlan &plan,
                  const std::string &out_dir)
{
    namespace fs = std::filesystem;
    const fs::path dir(out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory '" + out_dir + "': " + ec.message());
    const std::string axis = to_string(plan.axis);

    CsvFile summary(dir / "summary.csv",
                    "sweep_axis,sweep_value,trial,scheme,precoder,status,objective,min_nf,min_ff,se_nf,se_ff,"
                    "vr_efficiency,min_vr_ratio,power_margin,phase_solves,phase_residual,sca_iterations,"
                    "sca_restoration_iterations,sca_converged,qos_infeasible,qos_violation,method,error");
    CsvFile cdf(dir / "cdf.csv", "sweep_axis,sweep_value,scheme,precoder,metric,index,value,probability");
    CsvFile sca(dir / "sca_trace.csv", "sweep_value,trial,precoder,phase,iter,objective,candidate_objective,t_n,t_f,"
                                       "power_margin,max_violation,qos,accepted,status");
    CsvFile phase(dir / "phase_trace.csv", "sweep_value,trial,precoder,outer,inner,rho,t,objective,residual,min_eig");
    CsvFile vr(dir / "vr.csv", "sweep_value,trial,precoder,group,user,subarrays");

    for (const auto &res : results) {
        const std::string sv = num(res.sweep_value);
        std::vector<std::pair<int, Precoder>> vr_done;
        for (const auto &r : res.records) {
            summary.row(fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}", axis, sv,
                                    r.trial, to_string(r.scheme), to_string(r.precoder), r.ok ? "ok" : "failed",
                                    num(r.report.objective), num(r.report.min_nf), num(r.report.min_ff),
                                    join(r.report.nf), join(r.report.ff), num(r.vr_efficiency), num(r.min_vr_ratio),
                                    num(r.power_margin), r.phase_solves, num(r.phase_residual), r.sca_iterations,
                                    r.sca_restoration_iterations, r.sca_converged ? 1 : 0, r.qos_infeasible ? 1 : 0,
                                    num(r.qos_violation), r.report.method, quoted(r.error)));
            for (const auto &t : r.sca_trace)
                sca.row(fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{}", sv, r.trial, to_string(r.precoder),
                                    t.phase, t.iter, num(t.objective), num(t.candidate_objective), num(t.t_n),
                                    num(t.t_f), num(t.power_margin), num(t.max_violation), t.qos ? 1 : 0,
                                    t.accepted ? 1 : 0, t.status));
            for (const auto &t : r.phase_trace)
                phase.row(fmt::format("{},{},{},{},{},{},{},{},{},{}", sv, r.trial, to_string(r.precoder), t.outer,
                                      t.inner, num(t.rho), num(t.t), num(t.objective), num(t.residual),
                                      num(t.min_eig)));
            const std::pair<int, Precoder> key{r.trial, r.precoder};
            if (r.ok && std::find(vr_done.begin(), vr_done.end(), key) == vr_done.end()) {
                vr_done.push_back(key);
                for (int k = 0; k < r.vr.Kn(); ++k)
                    vr.row(fmt::format("{},{},{},nf,{},{}", sv, r.trial, to_string(r.precoder), k, join(r.vr.nf[k])));
                for (int k = 0; k < r.vr.Kf(); ++k)
                    vr.row(fmt::format("{},{},{},ff,{},{}", sv, r.trial, to_string(r.precoder), k, join(r.vr.ff[k])));
            }
        }
        for (Scheme s : plan.schemes) {
            for (Precoder p : plan.precoders) {
                std::vector<double> obj, mn, mf;
                for (const auto *r : res.select(s, p)) {
                    if (!r->ok) continue;
                    obj.push_back(r->report.objective);
                    mn.push_back(r->report.min_nf);
                    mf.push_back(r->report.min_ff);
                }
                const std::pair<const char *, std::vector<double> *> metrics[] = {
                    {"objective", &obj}, {"min_nf", &mn}, {"min_ff", &mf}};
                for (const auto &[name, samples] : metrics) {
                    const auto c = empirical_cdf(*samples);
                    for (std::size_t i = 0; i < c.size(); ++i)
                        cdf.row(fmt::format("{},{},{},{},{},{},{},{}", axis, sv, to_string(s), to_string(p), name, i,
                                            num(c[i].first), num(c[i].second)));
                }
            }
        }
    }
    summary.close();
    cdf.close();
    sca.close();
    phase.close();
    vr.close();

    // Manifest: plan, config and output hashes.
    std::string m;
    m += "tool: xlris\n";
    m += fmt::format("config_hash: {}\n", config_hash(cfg));
    m += "plan:\n";
    std::string schemes, precoders, values;
    for (std::size_t i = 0; i < plan.schemes.size(); ++i) schemes += (i ? ", " : "") + to_string(plan.schemes[i]);
    for (std::size_t i = 0; i < plan.precoders.size(); ++i) precoders += (i ? ", " : "") + to_string(plan.precoders[i]);
    for (std::size_t i = 0; i < plan.values.size(); ++i) values += (i ? ", " : "") + fmt::format("{:.17g}", plan.values[i]);
    m += fmt::format("  schemes: [{}]\n  precoders: [{}]\n  trials: {}\n", schemes, precoders, plan.trials);
    m += fmt::format("  sweep_axis: {}\n  sweep_values: [{}]\n  hps_user: {}\n", axis, values, plan.hps_user);
    m += "files:\n";
    for (const char *f : {"summary.csv", "cdf.csv", "sca_trace.csv", "phase_trace.csv", "vr.csv"})
        m += fmt::format("  {}: \"{}\"\n", f, file_hash((dir / f).string()));
    m += "config:\n";
    std::istringstream cs(dump_config(cfg));
    for (std::string line; std::getline(cs, line);) m += "  " + line + "\n";
    std::ofstream mf(dir / "manifest.yaml", std::ios::binary);
    if (!mf) throw std::runtime_error("cannot write manifest in '" + out_dir + "'");
    mf << m;
    mf.close();
    if (!mf) throw std::runtime_error("failed to write manifest in '" + out_dir + "'");
}

Manifest load_manifest(const std::string &path)
{
    YAML::Node root;
    try {
        root = YAML::LoadFile(path);
    } catch (const YAML::Exception &e) {
        throw ConfigError("cannot read manifest '" + path + "': " + e.what());
    }
    if (!root["config"] || !root["plan"]) throw ConfigError("manifest '" + path + "' lacks config or plan");
    Manifest out;
    YAML::Emitter em;
    em << root["config"];
    out.config = load_config_string(em.c_str(), SystemConfig{});
    try {
        const auto p = root["plan"];
        out.plan.schemes.clear();
        for (const auto &s : p["schemes"]) out.plan.schemes.push_back(parse_scheme(s.as<std::string>()));
        out.plan.precoders.clear();
        for (const auto &s : p["precoders"]) out.plan.precoders.push_back(parse_precoder(s.as<std::string>()));
        out.plan.trials = p["trials"].as<int>();
        out.plan.axis = parse_sweep_axis(p["sweep_axis"].as<std::string>());
        out.plan.values = p["sweep_values"].as<std::vector<double>>();
        out.plan.hps_user = p["hps_user"].as<int>();
        if (root["files"])
            for (const auto &kv : root["files"]) out.files.emplace_back(kv.first.as<std::string>(), kv.second.as<std::string>());
    } catch (const YAML::Exception &e) {
        throw ConfigError("malformed manifest '" + path + "': " + e.what());
    }
    if (config_hash(out.config) != root["config_hash"].as<std::string>(""))
        throw ConfigError("manifest '" + path + "' config hash does not match its config");
    out.plan.validate();
    return out;
}

} // namespace xlris
