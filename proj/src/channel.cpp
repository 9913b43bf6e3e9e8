/**
 * @file channel.cpp
 * @brief Channel synthesis for the XL-MIMO/RIS scenario.
 */
#include "xlris/channel.hpp"

#include <fmt/format.h>

#include <cmath>

namespace xlris {

std::pair<double, double> antenna_coords(int m, int Mx, int My)
{
    if (Mx < 1 || My < 1) throw InputError("array dimensions must be positive");
    if (m < 1 || m > Mx * My)
        throw InputError(fmt::format("antenna index {} outside [1, {}]", m, Mx * My));
    const double mx = -0.5 * (Mx - 1) + static_cast<double>((m - 1) % Mx);
    const double my = 0.5 * (My - 1) - static_cast<double>((m - 1) / Mx);
    return {mx, my};
}

double nf_gain(const Eigen::Vector3d &u, double mx, double my, double d, double lambda)
{
    if (!(u.z() > 0.0)) throw DomainError("near-field point must have positive z");
    const double A = lambda * lambda / (4.0 * kPi);
    const double dx = u.x() - mx * d;
    const double dy = u.y() - my * d;
    const double r2 = dx * dx + dy * dy + u.z() * u.z();
    return A / (4.0 * kPi) * u.z() * (dx * dx + u.z() * u.z()) / std::pow(r2, 2.5);
}

namespace {

cd los_term(const Eigen::Vector3d &u, double mx, double my, double d, double lambda)
{
    const double dx = u.x() - mx * d;
    const double dy = u.y() - my * d;
    const double r = std::sqrt(dx * dx + dy * dy + u.z() * u.z());
    return std::sqrt(nf_gain(u, mx, my, d, lambda)) * std::polar(1.0, -2.0 * kPi * r / lambda);
}

} // namespace

cd nf_element_channel(const Eigen::Vector3d &u, double mx, double my, double d, double lambda,
                      const std::vector<Scatterer> &scatterers)
{
    cd g = los_term(u, mx, my, d, lambda);
    for (const auto &sc : scatterers) g += sc.coeff * los_term(sc.position, mx, my, d, lambda);
    return g;
}

CVec nf_channel_vector(const Eigen::Vector3d &u, const SystemConfig &cfg, const std::vector<Scatterer> &scatterers)
{
    const int M = cfg.M();
    const double d = cfg.spacing();
    const double lambda = cfg.wavelength();
    CVec g(M);
    for (int m = 1; m <= M; ++m) {
        const auto [mx, my] = antenna_coords(m, cfg.Mx, cfg.My);
        g(m - 1) = nf_element_channel(u, mx, my, d, lambda, scatterers);
    }
    return g;
}

CVec array_response(double az, double el, int n1, int n2, double spacing, double lambda)
{
    const double kx = 2.0 * kPi * spacing * std::cos(el) * std::sin(az) / lambda;
    const double ky = 2.0 * kPi * spacing * std::sin(el) / lambda;
    CVec v(n1 * n2);
    for (int i = 0; i < n1; ++i)
        for (int l = 0; l < n2; ++l) v(i * n2 + l) = std::polar(1.0, kx * i + ky * l);
    return v;
}

CVec ChannelSet::phasors() const
{
    CVec v(theta.size());
    for (Eigen::Index n = 0; n < theta.size(); ++n) v(n) = std::polar(1.0, theta(n));
    return v;
}

CVec ChannelSet::ris_vector(int k) const
{
    return phasors().conjugate().cwiseProduct(h.col(k));
}

UserGeometry draw_geometry(const SystemConfig &cfg, Rng &rng)
{
    UserGeometry g;
    for (int k = 0; k < cfg.Kn; ++k) {
        const double x = rng.uniform(cfg.nf_x[0], cfg.nf_x[1]);
        const double y = rng.uniform(cfg.nf_y[0], cfg.nf_y[1]);
        const double z = rng.uniform(cfg.nf_z[0], cfg.nf_z[1]);
        g.nfue.emplace_back(x, y, z);
    }
    for (int k = 0; k < cfg.Kf; ++k) {
        const double az = cfg.ff_azimuths.empty() ? -kPi / 2.0 + kPi * (k + 0.5) / cfg.Kf : cfg.ff_azimuths[k];
        g.ff_az.push_back(az);
        g.ff_el.push_back(cfg.ff_elevation);
    }
    g.scatterers.resize(cfg.Kn);
    for (int k = 0; k < cfg.Kn; ++k) {
        for (int l = 0; l < cfg.scatterers_per_nfue; ++l) {
            Scatterer sc;
            sc.position = Eigen::Vector3d(rng.uniform(cfg.nf_x[0], cfg.nf_x[1]), rng.uniform(cfg.nf_y[0], cfg.nf_y[1]),
                                          rng.uniform(cfg.nf_z[0], cfg.nf_z[1]));
            // phase uniform on (-pi, pi]
            const double ph = -rng.uniform(-kPi, kPi);
            sc.coeff = std::polar(cfg.scatterer_gain, ph);
            g.scatterers[k].push_back(sc);
        }
    }
    return g;
}

CVec ris_user_channel(double varsigma, double az, double el, const SystemConfig &cfg)
{
    return std::sqrt(varsigma) * array_response(az, el, cfg.N1, cfg.N2, cfg.spacing(), cfg.wavelength());
}

ChannelSet build_channels(const SystemConfig &cfg, const UserGeometry &geom)
{
    cfg.validate();
    if (static_cast<int>(geom.nfue.size()) != cfg.Kn || static_cast<int>(geom.ff_az.size()) != cfg.Kf)
        throw InputError("geometry does not match the configured user counts");
    ChannelSet ch;
    ch.M = cfg.M();
    ch.S = cfg.S;
    ch.Mstar = cfg.Mstar();
    ch.N = cfg.N();
    ch.H1.resize(ch.M, cfg.Kn);
    for (int k = 0; k < cfg.Kn; ++k) {
        static const std::vector<Scatterer> none;
        const auto &sc = geom.scatterers.empty() ? none : geom.scatterers[k];
        ch.H1.col(k) = nf_channel_vector(geom.nfue[k], cfg, sc);
    }
    ch.a_bs = array_response(cfg.bs_aod_az, cfg.bs_aod_el, cfg.Mx, cfg.My, cfg.spacing(), cfg.wavelength());
    ch.b_ris = array_response(cfg.ris_aoa_az, cfg.ris_aoa_el, cfg.N1, cfg.N2, cfg.spacing(), cfg.wavelength());
    ch.H2_los = ch.b_ris * ch.a_bs.adjoint();
    const double zeta = cfg.zeta();
    ch.alpha2 = std::sqrt(cfg.ricean * zeta / (cfg.ricean + 1.0));
    ch.beta2 = std::sqrt(zeta / (cfg.ricean + 1.0));
    ch.h.resize(ch.N, cfg.Kf);
    for (int k = 0; k < cfg.Kf; ++k) {
        ch.varsigma.push_back(cfg.varsigma());
        ch.h.col(k) = ris_user_channel(cfg.varsigma(), geom.ff_az[k], geom.ff_el[k], cfg);
    }
    ch.theta = RVec::Zero(ch.N);
    return ch;
}

CMat sample_nlos(int N, int M, Rng &rng)
{
    CMat X(N, M);
    for (int j = 0; j < M; ++j)
        for (int i = 0; i < N; ++i) X(i, j) = rng.cn();
    return X;
}

CMat compose_h2(const ChannelSet &ch, const CMat &nlos)
{
    return ch.alpha2 * ch.H2_los + ch.beta2 * nlos;
}

CMat cascaded_channels(const ChannelSet &ch, const CMat &H2)
{
    CMat X(ch.N, ch.Kf());
    for (int k = 0; k < ch.Kf(); ++k) X.col(k) = ch.ris_vector(k);
    return H2.adjoint() * X;
}

CVec cascaded_channel(const ChannelSet &ch, const CMat &H2, int k, int s)
{
    if (s < 0 || s >= ch.S) throw InputError(fmt::format("subarray index {} outside [0, {})", s, ch.S));
    if (k < 0 || k >= ch.Kf()) throw InputError(fmt::format("FFUE index {} outside [0, {})", k, ch.Kf()));
    return H2.middleCols(s * ch.Mstar, ch.Mstar).adjoint() * ch.ris_vector(k);
}

RVec random_phases(int N, Rng &rng)
{
    RVec t(N);
    for (int n = 0; n < N; ++n) t(n) = rng.uniform(0.0, 2.0 * kPi);
    return t;
}

double wrap_phase(double a)
{
    double w = std::fmod(a, 2.0 * kPi);
    if (w < 0.0) w += 2.0 * kPi;
    if (w >= 2.0 * kPi) w = 0.0;
    return w;
}

} // namespace xlris
