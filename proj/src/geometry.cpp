// SPDX-License-Identifier: Apache-2.0

#include "bdloc/geometry.hpp"
#include "bdloc/errors.hpp"

#include <cmath>
#include <string>

namespace bdloc {

SystemGeometry SystemGeometry::make(int M, double f_c, double delta_wl, double d_c_wl, const Vec2& p_ris)
{
    if (!(f_c > 0.0))
        throw ValidationError("f_c must be positive");
    SystemGeometry g;
    g.M = M;
    g.f_c = f_c;
    g.lambda = kSpeedOfLight / f_c;
    g.delta = delta_wl * g.lambda;
    g.d_c = d_c_wl * g.lambda;
    g.p_ris = p_ris;
    g.p_bs = p_ris + Vec2(-g.d_c, 0.0);
    g.validate();
    return g;
}

void SystemGeometry::validate() const
{
    if (M < 2)
        throw ValidationError("M must be >= 2 (got " + std::to_string(M) + ")");
    if (!(delta > 0.0))
        throw ValidationError("delta must be positive");
    if (!(lambda > 0.0))
        throw ValidationError("lambda must be positive");
    if (!(d_c > 0.0))
        throw ValidationError("d_c must be positive");
    if (std::abs(lambda * f_c - kSpeedOfLight) > 1e-9 * kSpeedOfLight)
        throw ValidationError("lambda * f_c must equal the speed of light");
    if (p_bs != p_ris + Vec2(-d_c, 0.0))
        throw ValidationError("p_bs must equal p_ris + (-d_c, 0)");
}

double SystemGeometry::aperture() const { return (M - 1) * delta; }

double SystemGeometry::fresnel_inner() const
{
    const double D = aperture();
    return 0.62 * std::sqrt(D * D * D / lambda);
}

double SystemGeometry::fraunhofer() const
{
    const double D = aperture();
    return 2.0 * D * D / lambda;
}

double SystemGeometry::cell_offset(int m) const
{
    return (m - 0.5 * (M + 1)) * delta;
}

Vec2 cell_position(const SystemGeometry& geom, int m)
{
    if (m < 1 || m > geom.M)
        throw ValidationError("cell index " + std::to_string(m) + " outside 1.." + std::to_string(geom.M));
    return geom.p_ris + Vec2(0.0, geom.cell_offset(m));
}

std::string_view to_string(Region region)
{
    switch (region)
    {
    case Region::ReactiveNear:
        return "reactive-near";
    case Region::FresnelNear:
        return "fresnel-near";
    case Region::Far:
        return "far";
    }
    return "unknown";
}

Region classify_region(const SystemGeometry& geom, double r)
{
    if (!(r > 0.0) || !std::isfinite(r))
        throw ValidationError("range must be positive and finite");
    if (r <= geom.fresnel_inner())
        return Region::ReactiveNear;
    if (r <= geom.fraunhofer())
        return Region::FresnelNear;
    return Region::Far;
}

PolarPosition ue_polar(const SystemGeometry& geom, const Vec2& p_ue)
{
    const Vec2 d = p_ue - geom.p_ris;
    const double r = d.norm();
    if (r == 0.0)
        throw ValidationError("UE position coincides with the RIS center");
    if (d.x() < 0.0)
        throw ValidationError("UE must lie in the half-plane x >= x_ris");
    return {r, std::atan2(d.x(), d.y())};
}

Vec2 position_from_polar(const SystemGeometry& geom, const PolarPosition& polar)
{
    return geom.p_ris + polar.r * Vec2(std::sin(polar.theta), std::cos(polar.theta));
}

} // namespace bdloc
