// SPDX-License-Identifier: Apache-2.0
//
// Spatial layout of a base station whose single active antenna radiates
// through a linear transmissive RIS. The RIS lies on the y-axis, centered at
// p_ris; the BS antenna sits at distance d_c behind it on the negative x side.
// Angles are measured from the +y axis, so a UE at p_ris + r*(sin t, cos t)
// has polar coordinates (r, t) with t in [0, pi] for the swept half-plane
// x >= x_ris.
#pragma once

#include <Eigen/Core>

#include <string_view>

namespace bdloc {

using Vec2 = Eigen::Vector2d;

// Rounded value used throughout; the carrier wavelength is derived from it.
inline constexpr double kSpeedOfLight = 3.0e8;

struct SystemGeometry
{
    int M = 0;          // number of RIS cells (element pairs)
    double delta = 0;   // inter-element spacing [m]
    double lambda = 0;  // carrier wavelength [m]
    double f_c = 0;     // carrier frequency [Hz]
    double d_c = 0;     // BS antenna to RIS center [m]
    Vec2 p_ris = Vec2::Zero();
    Vec2 p_bs = Vec2::Zero();

    // Builds a validated geometry; spacing and d_c are given in wavelengths.
    static SystemGeometry make(int M, double f_c, double delta_wl, double d_c_wl,
                               const Vec2& p_ris = Vec2::Zero());

    // Throws ValidationError when an invariant does not hold.
    void validate() const;

    // D = (M - 1) * delta
    double aperture() const;
    // 0.62 * sqrt(D^3 / lambda), inner edge of the radiative near field.
    double fresnel_inner() const;
    // 2 D^2 / lambda, Fraunhofer distance.
    double fraunhofer() const;

    // Signed offset y_m * delta of cell m (1-based) along the RIS axis.
    double cell_offset(int m) const;
};

Vec2 cell_position(const SystemGeometry& geom, int m);

enum class Region
{
    ReactiveNear,
    FresnelNear,
    Far
};

std::string_view to_string(Region region);

// Points exactly on a boundary fall into the nearer-field class.
Region classify_region(const SystemGeometry& geom, double r);

struct PolarPosition
{
    double r = 0;
    double theta = 0;
};

// r = |p_ue - p_ris|, theta = atan2(dx, dy). Requires dx >= 0.
PolarPosition ue_polar(const SystemGeometry& geom, const Vec2& p_ue);

Vec2 position_from_polar(const SystemGeometry& geom, const PolarPosition& polar);

} // namespace bdloc
