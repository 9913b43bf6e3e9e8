/**
 * @file harness.hpp
 * @brief Experiment orchestration: the per-trial pipeline (VR selection,
 * phases, power), benchmark schemes, parameter sweeps, CSV reports and run
 * manifests.
 *
 * Every benchmark of a trial shares one channel realization, and every trial
 * draws its randomness from mix_seed(config seed, trial index), so results
 * do not depend on the number of worker threads.
 */
#ifndef XLRIS_HARNESS_HPP
#define XLRIS_HARNESS_HPP

#include "xlris/phase_opt.hpp"
#include "xlris/power_control.hpp"
#include "xlris/vr_selection.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace xlris {

/// Phase and power design of one benchmark.
enum class Scheme {
    OpsOpc, ///< optimized phases, optimized power
    RpsEpc, ///< random phases, equal power
    HpsEpc  ///< phases aligned to one FFUE, equal power
};

std::string to_string(Scheme s);
/// Accepts OPS-OPC, RPS-EPC, HPS-EPC (case-insensitive, '-' or '_').
Scheme parse_scheme(const std::string &s);

enum class SweepAxis {
    None,
    M,       ///< number of BS antennas
    Delta,   ///< VR selection ratio
    Weights, ///< w_n, with w_f = 1 - w_n
    Power    ///< transmit power in dBm
};

std::string to_string(SweepAxis a);
/// Accepts none, M, delta, weights, P.
SweepAxis parse_sweep_axis(const std::string &s);

struct ExperimentPlan {
    std::vector<Scheme> schemes{Scheme::OpsOpc, Scheme::RpsEpc, Scheme::HpsEpc};
    std::vector<Precoder> precoders{Precoder::MRT, Precoder::CZF, Precoder::LZF};
    int trials = 1;
    SweepAxis axis = SweepAxis::None;
    std::vector<double> values; ///< sweep points, empty when axis is None
    int threads = 1;            ///< worker threads; outputs do not depend on it
    int hps_user = 0;           ///< FFUE the HPS-EPC phases are aligned to

    /// Throws InputError on an empty scheme or precoder list, trials < 1 or
    /// a sweep axis without values.
    void validate() const;
};

/// Outcome of one (scheme, precoder) pair of one trial.
struct TrialRecord {
    int trial = 0;
    Scheme scheme = Scheme::RpsEpc;
    Precoder precoder = Precoder::MRT;
    bool ok = false;
    std::string error; ///< reason when the pair was skipped
    SeReport report;
    VrAssignment vr;
    double vr_efficiency = 0.0;
    double min_vr_ratio = 0.0; ///< min over users of selected / baseline SINR
    double power_margin = 0.0; ///< 1 - used budget fraction of the final allocation
    // Phase design (OPS-OPC only)
    int phase_solves = 0;
    double phase_residual = 0.0;
    std::vector<PhaseTraceRow> phase_trace;
    // Power control (OPS-OPC only)
    int sca_iterations = 0;
    int sca_restoration_iterations = 0;
    bool sca_converged = false;
    bool qos_infeasible = false;
    double qos_violation = 0.0;
    std::vector<ScaTraceRow> sca_trace;
    double wall_seconds = 0.0; ///< not written to the deterministic reports
};

/// Records of one configuration (one sweep point).
struct ExperimentResult {
    SystemConfig config;
    double sweep_value = 0.0;
    std::vector<TrialRecord> records; ///< ordered by trial, then scheme and precoder as in the plan

    /// Records of one pair, in trial order.
    std::vector<const TrialRecord *> select(Scheme s, Precoder p) const;
    /// Sorted objective samples of the successful records of one pair.
    std::vector<double> objective_samples(Scheme s, Precoder p) const;
    /// Average VR efficiency of the successful records of one pair.
    double mean_vr_efficiency(Scheme s, Precoder p) const;
    int failures() const;
};

/// Config with the sweep value applied. M picks Mx as the smallest divisor of M not below sqrt(M).
SystemConfig apply_sweep(const SystemConfig &cfg, SweepAxis axis, double value);

/**
 * Run every (scheme, precoder) pair of one trial. The pipeline draws the
 * geometry and random phases, selects VRs per precoder under equal power and
 * random phases, evaluates RPS-EPC for every precoder (its SEs give the QoS
 * floors of OPS-OPC, the minimum over precoders per user), then HPS-EPC and
 * OPS-OPC. A failing pair is recorded with its reason and the others proceed.
 */
std::vector<TrialRecord> run_trial(const SystemConfig &cfg, const ExperimentPlan &plan, int trial);

/// All trials of one configuration, spread over plan.threads workers.
ExperimentResult run_pipeline(const SystemConfig &cfg, const ExperimentPlan &plan);

/// One result per sweep value, every point reusing the same trial seeds.
std::vector<ExperimentResult> sweep(const SystemConfig &cfg, const ExperimentPlan &plan);

/// Empirical CDF: sorted values with probabilities i / n, i = 1..n.
std::vector<std::pair<double, double>> empirical_cdf(std::vector<double> samples);

/**
 * Write summary.csv, cdf.csv, sca_trace.csv, phase_trace.csv, vr.csv and
 * manifest.yaml into @p out_dir (created if needed). The manifest embeds the
 * configuration, its hash, the plan and an FNV-1a hash of each CSV.
 *
 * @throws std::runtime_error on I/O failure
 */
void emit_reports(const std::vector<ExperimentResult> &results, const SystemConfig &cfg,
                  const ExperimentPlan &plan, const std::string &out_dir);

/// Configuration and plan stored in a manifest written by emit_reports.
struct Manifest {
    SystemConfig config;
    ExperimentPlan plan;
    std::vector<std::pair<std::string, std::string>> files; ///< (name, hash)
};

Manifest load_manifest(const std::string &path);

/// One term of the closed-form versus simulation comparison.
struct OracleCheckRow {
    std::string user; ///< nf<k> or ff<k>
    std::string term; ///< ds, bu, ui_intra or ui_inter
    double closed = 0.0;
    double oracle = 0.0;
    double se = 0.0;  ///< standard error of the oracle estimate
    double tol = 0.0; ///< max(2% of the closed form, 3 standard errors)
    bool pass = false;
};

/// Scenario of the oracle check: M = 64, S = 4, N = 16, two users per group.
SystemConfig oracle_check_config(const SystemConfig &base);

/**
 * Compare every MRT closed-form SINR term under equal power and full VRs
 * with the direct-simulation oracle over @p n_mc NLoS draws.
 */
std::vector<OracleCheckRow> mrt_oracle_check(const SystemConfig &cfg, int n_mc, std::uint64_t seed);

/// 64-bit FNV-1a hash of a file's bytes as 16 hex digits.
std::string file_hash(const std::string &path);

} // namespace xlris

#endif
