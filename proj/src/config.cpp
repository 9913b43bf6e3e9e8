/**
 * @file config.cpp
 * @brief Profiles and YAML round-trip of SystemConfig.
 */
#include "xlris/config.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <fstream>
#include <sstream>

namespace xlris {

void SystemConfig::validate() const
{
    auto fail = [](const std::string &msg) { throw ConfigError("invalid configuration: " + msg); };
    if (Mx < 1 || My < 1) fail("Mx and My must be positive");
    if (S < 1) fail("S must be positive");
    if (M() % S != 0) fail(fmt::format("M = {} is not divisible by S = {}", M(), S));
    if (N1 < 1 || N2 < 1) fail("N1 and N2 must be positive");
    if (Kn < 0 || Kf < 0 || Kn + Kf == 0) fail("need at least one user");
    if (nf_z[0] <= 0.0 || nf_z[1] < nf_z[0]) fail("NFUE z-range must be positive and ordered");
    if (nf_x[1] < nf_x[0] || nf_y[1] < nf_y[0]) fail("NFUE x/y ranges must be ordered");
    if (!ff_azimuths.empty() && static_cast<int>(ff_azimuths.size()) != Kf)
        fail("ff_azimuths must be empty or hold Kf entries");
    if (scatterers_per_nfue < 0) fail("scatterers_per_nfue must be nonnegative");
    if (carrier_freq <= 0.0) fail("carrier frequency must be positive");
    if (ricean < 0.0) fail("Ricean factor must be nonnegative");
    if (d_mr <= 0.0 || d_ru <= 0.0) fail("link distances must be positive");
    if (pathloss_ref <= 0.0) fail("path-loss reference must be positive");
    if (pn_fraction <= 0.0 || pf_fraction <= 0.0) fail("power fractions must be positive");
    if (w_n < 0.0 || w_f < 0.0 || w_n + w_f <= 0.0) fail("weights must be nonnegative with positive sum");
    if (!(delta > 0.0 && delta <= 1.0)) fail("delta must lie in (0, 1]");
    if (mc_samples < 1) fail("mc_samples must be positive");
    if (tol.eps <= 0.0 || tol.eps1 <= 0.0 || tol.rho0 <= 0.0) fail("tolerances must be positive");
    if (tol.scale <= 1.0) fail("penalty scale must exceed 1");
    if (tol.I1 < 1 || tol.I2 < 1 || tol.I3 < 1) fail("iteration caps must be positive");
}

SystemConfig desk_profile()
{
    return SystemConfig{};
}

SystemConfig paper_profile()
{
    SystemConfig c;
    c.Mx = 40;
    c.My = 10;
    c.S = 8;
    c.N1 = 10;
    c.N2 = 10;
    c.Kn = 5;
    c.Kf = 5;
    c.mc_samples = 1000;
    return c;
}

SystemConfig profile_by_name(const std::string &name)
{
    if (name == "desk") return desk_profile();
    if (name == "paper") return paper_profile();
    throw InputError("unknown profile '" + name + "' (expected desk or paper)");
}

namespace {

template <typename T>
void read(const YAML::Node &node, const char *key, T &dst)
{
    if (node && node[key]) dst = node[key].as<T>();
}

void read_range(const YAML::Node &node, const char *key, std::array<double, 2> &dst)
{
    if (!node || !node[key]) return;
    const auto v = node[key].as<std::vector<double>>();
    if (v.size() != 2) throw ConfigError(std::string("range '") + key + "' needs two entries");
    dst = {v[0], v[1]};
}

void read_angle_pair(const YAML::Node &node, const char *key, double &az, double &el)
{
    if (!node || !node[key]) return;
    const auto v = node[key].as<std::vector<double>>();
    if (v.size() != 2) throw ConfigError(std::string("angle pair '") + key + "' needs two entries");
    az = v[0];
    el = v[1];
}

SystemConfig overlay(const YAML::Node &root, SystemConfig c)
{
    if (!root || root.IsNull()) return c;
    if (!root.IsMap()) throw ConfigError("configuration root must be a mapping");
    const auto array = root["array"];
    read(array, "Mx", c.Mx);
    read(array, "My", c.My);
    read(array, "subarrays", c.S);
    const auto ris = root["ris"];
    read(ris, "N1", c.N1);
    read(ris, "N2", c.N2);
    const auto users = root["users"];
    read(users, "Kn", c.Kn);
    read(users, "Kf", c.Kf);
    if (users && users["nf_region"]) {
        const auto reg = users["nf_region"];
        read_range(reg, "x", c.nf_x);
        read_range(reg, "y", c.nf_y);
        read_range(reg, "z", c.nf_z);
    }
    read(users, "ff_azimuths", c.ff_azimuths);
    read(users, "ff_elevation", c.ff_elevation);
    read(users, "scatterers_per_nfue", c.scatterers_per_nfue);
    read(users, "scatterer_gain", c.scatterer_gain);
    const auto prop = root["propagation"];
    read(prop, "carrier_freq_hz", c.carrier_freq);
    read(prop, "ricean_factor", c.ricean);
    read(prop, "d_mr", c.d_mr);
    read(prop, "d_ru", c.d_ru);
    read(prop, "pathloss_ref", c.pathloss_ref);
    read(prop, "pathloss_exp_mr", c.pathloss_exp_mr);
    read(prop, "pathloss_exp_ru", c.pathloss_exp_ru);
    read_angle_pair(prop, "bs_aod", c.bs_aod_az, c.bs_aod_el);
    read_angle_pair(prop, "ris_aoa", c.ris_aoa_az, c.ris_aoa_el);
    const auto power = root["power"];
    read(power, "tx_dbm", c.tx_power_dbm);
    read(power, "noise_dbm", c.noise_power_dbm);
    read(power, "pn_fraction", c.pn_fraction);
    read(power, "pf_fraction", c.pf_fraction);
    const auto obj = root["objective"];
    read(obj, "w_n", c.w_n);
    read(obj, "w_f", c.w_f);
    read(obj, "enforce_qos", c.enforce_qos);
    const auto vr = root["vr"];
    read(vr, "delta", c.delta);
    const auto mc = root["monte_carlo"];
    read(mc, "samples", c.mc_samples);
    read(mc, "seed", c.seed);
    const auto sol = root["solver"];
    read(sol, "eps", c.tol.eps);
    read(sol, "eps1", c.tol.eps1);
    read(sol, "rho0", c.tol.rho0);
    read(sol, "scale", c.tol.scale);
    read(sol, "I1", c.tol.I1);
    read(sol, "I2", c.tol.I2);
    read(sol, "I3", c.tol.I3);
    return c;
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

} // namespace

SystemConfig load_config_string(const std::string &yaml, SystemConfig base)
{
    SystemConfig c;
    try {
        c = overlay(YAML::Load(yaml), std::move(base));
    } catch (const YAML::Exception &e) {
        throw ConfigError(std::string("configuration parse error: ") + e.what());
    }
    c.validate();
    return c;
}

SystemConfig load_config(const std::string &path, SystemConfig base)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open configuration file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return load_config_string(ss.str(), std::move(base));
}

std::string dump_config(const SystemConfig &c)
{
    std::string az = "[";
    for (std::size_t i = 0; i < c.ff_azimuths.size(); ++i) az += (i ? ", " : "") + num(c.ff_azimuths[i]);
    az += "]";
    std::string out;
    out += "array:\n";
    out += fmt::format("  Mx: {}\n  My: {}\n  subarrays: {}\n", c.Mx, c.My, c.S);
    out += "ris:\n";
    out += fmt::format("  N1: {}\n  N2: {}\n", c.N1, c.N2);
    out += "users:\n";
    out += fmt::format("  Kn: {}\n  Kf: {}\n", c.Kn, c.Kf);
    out += "  nf_region:\n";
    out += fmt::format("    x: [{}, {}]\n    y: [{}, {}]\n    z: [{}, {}]\n", num(c.nf_x[0]), num(c.nf_x[1]),
                       num(c.nf_y[0]), num(c.nf_y[1]), num(c.nf_z[0]), num(c.nf_z[1]));
    out += fmt::format("  ff_azimuths: {}\n  ff_elevation: {}\n", az, num(c.ff_elevation));
    out += fmt::format("  scatterers_per_nfue: {}\n  scatterer_gain: {}\n", c.scatterers_per_nfue,
                       num(c.scatterer_gain));
    out += "propagation:\n";
    out += fmt::format("  carrier_freq_hz: {}\n  ricean_factor: {}\n  d_mr: {}\n  d_ru: {}\n", num(c.carrier_freq),
                       num(c.ricean), num(c.d_mr), num(c.d_ru));
    out += fmt::format("  pathloss_ref: {}\n  pathloss_exp_mr: {}\n  pathloss_exp_ru: {}\n", num(c.pathloss_ref),
                       num(c.pathloss_exp_mr), num(c.pathloss_exp_ru));
    out += fmt::format("  bs_aod: [{}, {}]\n  ris_aoa: [{}, {}]\n", num(c.bs_aod_az), num(c.bs_aod_el),
                       num(c.ris_aoa_az), num(c.ris_aoa_el));
    out += "power:\n";
    out += fmt::format("  tx_dbm: {}\n  noise_dbm: {}\n  pn_fraction: {}\n  pf_fraction: {}\n", num(c.tx_power_dbm),
                       num(c.noise_power_dbm), num(c.pn_fraction), num(c.pf_fraction));
    out += "objective:\n";
    out += fmt::format("  w_n: {}\n  w_f: {}\n  enforce_qos: {}\n", num(c.w_n), num(c.w_f),
                       c.enforce_qos ? "true" : "false");
    out += "vr:\n";
    out += fmt::format("  delta: {}\n", num(c.delta));
    out += "monte_carlo:\n";
    out += fmt::format("  samples: {}\n  seed: {}\n", c.mc_samples, c.seed);
    out += "solver:\n";
    out += fmt::format("  eps: {}\n  eps1: {}\n  rho0: {}\n  scale: {}\n  I1: {}\n  I2: {}\n  I3: {}\n", num(c.tol.eps),
                       num(c.tol.eps1), num(c.tol.rho0), num(c.tol.scale), c.tol.I1, c.tol.I2, c.tol.I3);
    return out;
}

std::string config_hash(const SystemConfig &cfg)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : dump_config(cfg)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return fmt::format("{:016x}", h);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream)
{
    // splitmix64 finalizer applied to a stream-offset seed
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace xlris
