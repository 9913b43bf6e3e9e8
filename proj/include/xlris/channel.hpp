/**
 * @file channel.hpp
 * @brief Array geometry and synthesis of the near-field, BS-RIS and RIS-user
 * channels for one realization.
 */
#ifndef XLRIS_CHANNEL_HPP
#define XLRIS_CHANNEL_HPP

#include "xlris/config.hpp"

#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace xlris {

/// One single-bounce scatterer seen by a near-field user.
struct Scatterer {
    Eigen::Vector3d position;
    cd coeff; ///< reflection coefficient including the scatterer-to-user gain
};

/// Positions and angles of all users for one trial.
struct UserGeometry {
    std::vector<Eigen::Vector3d> nfue;              ///< NFUE positions u_k (m)
    std::vector<double> ff_az;                      ///< FFUE azimuth AoDs at the RIS (rad)
    std::vector<double> ff_el;                      ///< FFUE elevation AoDs at the RIS (rad)
    std::vector<std::vector<Scatterer>> scatterers; ///< per NFUE, possibly empty
};

/**
 * Coordinates (m_x, m_y) of the 1-based antenna index m on an Mx x My grid,
 * centred on the array. Even dimensions yield half-integer coordinates.
 */
std::pair<double, double> antenna_coords(int m, int Mx, int My);

/// Free-space gain of one element at grid position (mx, my) seen from point u.
double nf_gain(const Eigen::Vector3d &u, double mx, double my, double d, double lambda);

/// Near-field channel of one element, including the scatterer sum.
cd nf_element_channel(const Eigen::Vector3d &u, double mx, double my, double d, double lambda,
                      const std::vector<Scatterer> &scatterers = {});

/// Near-field channel vector of length M ordered by subarray slices.
CVec nf_channel_vector(const Eigen::Vector3d &u, const SystemConfig &cfg,
                       const std::vector<Scatterer> &scatterers = {});

/**
 * Uniform planar array response with n1 x n2 elements,
 * [e^{j2pi i d cos(el) sin(az)/lambda}]_i kron [e^{j2pi l d sin(el)/lambda}]_l.
 */
CVec array_response(double az, double el, int n1, int n2, double spacing, double lambda);

/// One realization of every deterministic link plus the RIS phases.
struct ChannelSet {
    int M = 0;
    int S = 0;
    int Mstar = 0;
    int N = 0;
    CMat H1;      ///< M x Kn, column k is the NF channel g_k
    CMat H2_los;  ///< N x M line-of-sight part b_N a_M^H
    double alpha2 = 0.0;
    double beta2 = 0.0;
    CMat h;       ///< N x Kf, column k is h_k (so h_k^H is the RIS-user row)
    std::vector<double> varsigma;
    CVec a_bs;    ///< XL-MIMO response towards the RIS
    CVec b_ris;   ///< RIS response towards the XL-MIMO
    RVec theta;   ///< RIS phases in [0, 2pi)

    int Kn() const { return static_cast<int>(H1.cols()); }
    int Kf() const { return static_cast<int>(h.cols()); }
    /// e^{j theta_n} for all elements.
    CVec phasors() const;
    /// x_k = Theta^H h_k, the effective RIS-side vector of FFUE k.
    CVec ris_vector(int k) const;
    /// Subarray slice of the NF channel of user k.
    auto gbar(int s, int k) const { return H1.block(s * Mstar, k, Mstar, 1); }
    /// Columns of the LoS matrix that belong to subarray s.
    auto H2_los_sub(int s) const { return H2_los.middleCols(s * Mstar, Mstar); }
};

/// Draw NFUE positions, FFUE angles and scatterers for one trial.
UserGeometry draw_geometry(const SystemConfig &cfg, Rng &rng);

/// Build all deterministic links of a trial; phases start at zero.
ChannelSet build_channels(const SystemConfig &cfg, const UserGeometry &geom);

/// RIS-to-FFUE vector h_k = sqrt(varsigma) b_N(az, el).
CVec ris_user_channel(double varsigma, double az, double el, const SystemConfig &cfg);

/// Fresh i.i.d. CN(0,1) NLoS matrix of size N x M.
CMat sample_nlos(int N, int M, Rng &rng);

/// H2 = alpha2 H2_los + beta2 H2_nlos.
CMat compose_h2(const ChannelSet &ch, const CMat &nlos);

/**
 * Cascaded channels of all FFUEs for a given H2: column k is g~_k where
 * g~_k^H = h_k^H Theta H2.
 */
CMat cascaded_channels(const ChannelSet &ch, const CMat &H2);

/// Cascaded channel of FFUE k restricted to subarray s (length M*).
CVec cascaded_channel(const ChannelSet &ch, const CMat &H2, int k, int s);

/// Uniform random phases on [0, 2pi).
RVec random_phases(int N, Rng &rng);

/// Wrap an angle into [0, 2pi).
double wrap_phase(double a);

} // namespace xlris

#endif
