// SPDX-License-Identifier: Apache-2.0
//
// BS -> RIS transmission vector g[n] (Rayleigh-Sommerfeld near-field model)
// and RIS -> UE line-of-sight channels: spherical-wavefront narrowband (NF)
// and planar-wavefront wideband OFDM (FF).
//
// Sign conventions are kept as in the source model: the NF steering vector
// uses exp(-j k (r_m - r)), the FF steering vector exp(+j k (m-1) delta cos t),
// and g[n] carries exp(+j 2 pi d_m / lambda). Cross-scenario comparisons are
// therefore only meaningful up to a global phase.
#pragma once

#include "bdloc/geometry.hpp"

#include <Eigen/Core>

#include <complex>

namespace bdloc {

using cplx = std::complex<double>;

// [g[n]]_m = (A cos chi_m / d_m) (1/(2 pi d_m) - j/lambda) exp(j 2 pi d_m (1/lambda - n df / c))
// with A = (lambda/2)^2, d_m = sqrt(d_c^2 + (y_m delta)^2) and cos chi_m = d_c / d_m.
Eigen::VectorXcd bs_ris_channel(const SystemGeometry& geom, int n, double delta_f);

// Distances r_m(r, theta) from the UE to every cell.
Eigen::VectorXd nf_cell_distances(const SystemGeometry& geom, double r, double theta);

// r_m - r, evaluated without cancellation.
Eigen::VectorXd nf_path_differences(const SystemGeometry& geom, double r, double theta);

// a_1(r, theta), unit norm, entries (1/sqrt(M)) exp(-j 2pi/lambda (r_m - r)).
Eigen::VectorXcd nf_steering(const SystemGeometry& geom, double r, double theta);

// a_2(theta), unit norm, entries (1/sqrt(M)) exp(j 2pi (m-1) delta/lambda cos theta).
Eigen::VectorXcd ff_steering(const SystemGeometry& geom, double theta);

// beta_1 = lambda/(4 pi r) exp(-j 2 pi r / lambda)
cplx nf_gain(const SystemGeometry& geom, double r);
// beta_2 = lambda/(4 pi r) exp(j phi)
cplx ff_gain(const SystemGeometry& geom, double r, double phi);

struct NearFieldChannel
{
    Eigen::RowVectorXcd h; // beta_1 a_1^H
    cplx beta;
    Region region;         // callers may warn when not FresnelNear
};

NearFieldChannel nf_channel(const SystemGeometry& geom, double r, double theta);

struct FarFieldChannel
{
    Eigen::RowVectorXcd h; // beta_2 exp(-j 2 pi tau n df) a_2^H
    cplx beta;
    double tau;            // r / c [s]
};

FarFieldChannel ff_channel(const SystemGeometry& geom, int n, double delta_f, double r, double theta, double phi);

} // namespace bdloc
