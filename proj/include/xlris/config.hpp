/**
 * @file config.hpp
 * @brief Scenario configuration, profiles, YAML load/dump and seeding helpers.
 */
#ifndef XLRIS_CONFIG_HPP
#define XLRIS_CONFIG_HPP

#include "xlris/types.hpp"

#include <array>
#include <cstdint>
#include <random>
#include <string>

namespace xlris {

/// Iteration limits and thresholds of the three optimization stages.
struct SolverTolerances {
    double eps = 1e-4;   ///< rank-one residual threshold of the penalty loop
    double eps1 = 1e-3;  ///< fractional objective increase that stops SCA
    double rho0 = 1e-6;  ///< initial penalty factor
    double scale = 10.0; ///< penalty growth factor l
    int I1 = 30;         ///< outer penalty iterations
    int I2 = 30;         ///< inner SCA iterations per penalty value
    int I3 = 30;         ///< power-control SCA iterations
};

/**
 * All scenario parameters. Powers are stored in dBm and converted to the
 * noise-normalized transmit SNR rho = P / sigma^2 through rho().
 */
struct SystemConfig {
    // Array geometry
    int Mx = 10;
    int My = 10;
    int S = 4;
    int N1 = 4;
    int N2 = 4;

    // Users
    int Kn = 2;
    int Kf = 2;
    std::array<double, 2> nf_x{0.0, 20.0};
    std::array<double, 2> nf_y{0.0, 20.0};
    std::array<double, 2> nf_z{2.0, 20.0};
    std::vector<double> ff_azimuths; ///< empty: uniform spacing on the semicircle
    double ff_elevation = 0.0;
    int scatterers_per_nfue = 0;
    double scatterer_gain = 0.1; ///< magnitude of each scatterer coefficient

    // Propagation
    double carrier_freq = 5e9;
    double ricean = 2.0;
    double d_mr = 100.0;
    double d_ru = 20.0;
    double pathloss_ref = 1e-3;
    double pathloss_exp_mr = 2.5;
    double pathloss_exp_ru = 2.0;
    double bs_aod_az = kPi / 4.0;
    double bs_aod_el = kPi / 12.0;
    double ris_aoa_az = -kPi / 6.0;
    double ris_aoa_el = kPi / 18.0;

    // Power
    double tx_power_dbm = 30.0;
    double noise_power_dbm = -104.0;
    double pn_fraction = 1.0;
    double pf_fraction = 1.0;

    // Objective and selection
    double w_n = 0.5;
    double w_f = 0.5;
    bool enforce_qos = true;
    double delta = 0.8;

    // Monte Carlo
    int mc_samples = 1000;
    std::uint64_t seed = 1;

    SolverTolerances tol;

    int M() const { return Mx * My; }
    int Mstar() const { return M() / S; }
    int N() const { return N1 * N2; }
    double wavelength() const { return kSpeedOfLight / carrier_freq; }
    double spacing() const { return wavelength() / 2.0; }
    double aperture() const { return wavelength() * wavelength() / (4.0 * kPi); }
    double zeta() const { return pathloss_ref * std::pow(d_mr, -pathloss_exp_mr); }
    double varsigma() const { return pathloss_ref * std::pow(d_ru, -pathloss_exp_ru); }
    /// Transmit SNR P / sigma^2 (linear).
    double rho() const { return db_to_linear(tx_power_dbm - noise_power_dbm); }
    double rho_n() const { return pn_fraction * rho(); }
    double rho_f() const { return pf_fraction * rho(); }

    /// Throws ConfigError when an invariant is violated.
    void validate() const;
};

/// Small desk-scale scenario used by tests and the default CLI profile.
SystemConfig desk_profile();
/// Full-size scenario matching the published simulation setup (slow).
SystemConfig paper_profile();
/// Profile by name ("desk" or "paper").
SystemConfig profile_by_name(const std::string &name);

/// Overlay the keys present in a YAML file on top of @p base.
SystemConfig load_config(const std::string &path, SystemConfig base);
/// Overlay the keys present in a YAML document string on top of @p base.
SystemConfig load_config_string(const std::string &yaml, SystemConfig base);
/// Canonical YAML rendering (fixed key order, round-trip precision).
std::string dump_config(const SystemConfig &cfg);
/// 64-bit FNV-1a hash of dump_config, as 16 hex digits.
std::string config_hash(const SystemConfig &cfg);

/// Deterministic 64-bit mixer used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// Seeded random source with the draws the models need.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}
    /// Circularly-symmetric complex Gaussian with unit variance.
    cd cn()
    {
        const double re = normal_(eng_);
        const double im = normal_(eng_);
        return {re * kInvSqrt2, im * kInvSqrt2};
    }
    double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(eng_); }
    std::mt19937_64 &engine() { return eng_; }

private:
    static constexpr double kInvSqrt2 = 0.70710678118654752440;
    std::mt19937_64 eng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

} // namespace xlris

#endif
