/**
 * @file xlris_cli.cpp
 * @brief Command-line front end: simulate, sweep, validate and dump-config.
 */
#include "xlris/harness.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>

namespace {

using namespace xlris;

struct Common {
    std::string config;
    std::string profile = "desk";
    std::vector<std::string> schemes;
    std::vector<std::string> precoders;
    int trials = 1;
    long long seed = -1;
    std::string out_dir = "xlris_out";
    std::string manifest;
    int threads = 1;
    bool strict = false;
};

void add_common(CLI::App *cmd, Common &c, bool with_run_flags)
{
    cmd->add_option("--config", c.config, "YAML file overlaid on the profile");
    cmd->add_option("--profile", c.profile, "Base profile")->check(CLI::IsMember({"desk", "paper"}));
    cmd->add_option("--seed", c.seed, "Override the configuration seed");
    if (!with_run_flags) return;
    cmd->add_option("--scheme", c.schemes, "OPS-OPC, RPS-EPC and/or HPS-EPC (default: all)");
    cmd->add_option("--precoder", c.precoders, "MRT, CZF and/or LZF (default: all)");
    cmd->add_option("--trials", c.trials, "Number of trials")->check(CLI::PositiveNumber);
    cmd->add_option("--out-dir", c.out_dir, "Output directory for CSVs and the manifest");
    cmd->add_option("--manifest", c.manifest, "Re-run the experiment recorded in a manifest");
    cmd->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
    cmd->add_flag("--strict", c.strict, "Exit with status 1 if any trial fails");
}

SystemConfig resolve_config(const Common &c)
{
    SystemConfig cfg = profile_by_name(c.profile);
    if (!c.config.empty()) cfg = load_config(c.config, cfg);
    if (c.seed >= 0) cfg.seed = static_cast<std::uint64_t>(c.seed);
    cfg.validate();
    return cfg;
}

ExperimentPlan resolve_plan(const Common &c)
{
    ExperimentPlan plan;
    if (!c.schemes.empty()) {
        plan.schemes.clear();
        for (const auto &s : c.schemes) plan.schemes.push_back(parse_scheme(s));
    }
    if (!c.precoders.empty()) {
        plan.precoders.clear();
        for (const auto &p : c.precoders) plan.precoders.push_back(parse_precoder(p));
    }
    plan.trials = c.trials;
    plan.threads = c.threads;
    return plan;
}

/// Parse "axis=v1,v2,..." into the plan.
void parse_sweep(const std::string &spec, ExperimentPlan &plan)
{
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw InputError("sweep must look like axis=v1,v2,... (got '" + spec + "')");
    plan.axis = parse_sweep_axis(spec.substr(0, eq));
    plan.values.clear();
    std::string rest = spec.substr(eq + 1);
    std::size_t pos = 0;
    while (pos <= rest.size()) {
        const auto comma = rest.find(',', pos);
        const std::string tok = rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        try {
            std::size_t used = 0;
            plan.values.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception &) {
            throw InputError("bad sweep value '" + tok + "'");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
}

int run_and_report(const SystemConfig &cfg, const ExperimentPlan &plan, const Common &c)
{
    const auto results = sweep(cfg, plan);
    emit_reports(results, cfg, plan, c.out_dir);
    int failures = 0;
    for (const auto &res : results) {
        failures += res.failures();
        if (plan.axis != SweepAxis::None) fmt::print("{} = {}\n", to_string(plan.axis), res.sweep_value);
        fmt::print("{:<8} {:<4} {:>4} {:>10} {:>10} {:>10} {:>8}\n", "scheme", "prec", "ok", "objective", "min_nf",
                   "min_ff", "vr_eff");
        for (Scheme s : plan.schemes) {
            for (Precoder p : plan.precoders) {
                int ok = 0;
                double obj = 0.0, mn = 0.0, mf = 0.0, vr = 0.0;
                for (const auto *r : res.select(s, p)) {
                    if (!r->ok) {
                        fmt::print(stderr, "trial {} {} {} failed: {}\n", r->trial, to_string(s), to_string(p),
                                   r->error);
                        continue;
                    }
                    ++ok;
                    obj += r->report.objective;
                    mn += r->report.min_nf;
                    mf += r->report.min_ff;
                    vr += r->vr_efficiency;
                }
                const double n = ok > 0 ? ok : 1;
                fmt::print("{:<8} {:<4} {:>4} {:>10.4f} {:>10.4f} {:>10.4f} {:>8.3f}\n", to_string(s), to_string(p), ok,
                           obj / n, mn / n, mf / n, vr / n);
            }
        }
    }
    fmt::print("reports written to {}\n", c.out_dir);
    if (failures > 0) fmt::print(stderr, "{} (scheme, precoder, trial) runs failed\n", failures);
    return (c.strict && failures > 0) ? 1 : 0;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"RIS-assisted XL-MIMO downlink simulation and optimization"};
    app.require_subcommand(1);

    Common sim;
    auto *simulate = app.add_subcommand("simulate", "Run the per-trial pipeline and write reports");
    add_common(simulate, sim, true);

    Common swp;
    std::string sweep_spec;
    auto *sweep_cmd = app.add_subcommand("sweep", "Repeat the pipeline over a parameter axis");
    add_common(sweep_cmd, swp, true);
    sweep_cmd->add_option("--sweep", sweep_spec, "Axis and values, e.g. M=64,128,256 or delta=0.7,0.8")->required();

    Common val;
    int samples = 20000;
    auto *validate = app.add_subcommand("validate", "Compare MRT closed forms with the simulation oracle");
    add_common(validate, val, false);
    validate->add_option("--samples", samples, "NLoS draws of the oracle")->check(CLI::Range(2, 100000000));

    Common dump;
    auto *dump_cmd = app.add_subcommand("dump-config", "Print the resolved configuration as YAML");
    add_common(dump_cmd, dump, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*simulate || *sweep_cmd) {
            Common &c = *simulate ? sim : swp;
            SystemConfig cfg;
            ExperimentPlan plan;
            if (!c.manifest.empty()) {
                const Manifest m = load_manifest(c.manifest);
                cfg = m.config;
                plan = m.plan;
                plan.threads = c.threads;
            } else {
                cfg = resolve_config(c);
                plan = resolve_plan(c);
                if (*sweep_cmd) parse_sweep(sweep_spec, plan);
            }
            plan.validate();
            return run_and_report(cfg, plan, c);
        }
        if (*validate) {
            const SystemConfig cfg = oracle_check_config(resolve_config(val));
            const auto rows = mrt_oracle_check(cfg, samples, cfg.seed);
            int failed = 0;
            fmt::print("{:<5} {:<9} {:>14} {:>14} {:>12} {:>12}  result\n", "user", "term", "closed", "oracle", "se",
                       "tol");
            for (const auto &r : rows) {
                fmt::print("{:<5} {:<9} {:>14.6e} {:>14.6e} {:>12.3e} {:>12.3e}  {}\n", r.user, r.term, r.closed,
                           r.oracle, r.se, r.tol, r.pass ? "PASS" : "FAIL");
                if (!r.pass) ++failed;
            }
            fmt::print("{} of {} terms within tolerance\n", rows.size() - failed, rows.size());
            return failed > 0 ? 1 : 0;
        }
        if (*dump_cmd) {
            fmt::print("{}", dump_config(resolve_config(dump)));
            return 0;
        }
    } catch (const std::exception &e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 2;
    }
    return 0;
}
