// SPDX-License-Identifier: Apache-2.0

#include "bdloc/channel.hpp"
#include "bdloc/errors.hpp"

#include <cmath>
#include <numbers>

namespace bdloc {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr cplx kJ{0.0, 1.0};

void require_positive_range(double r)
{
    if (!(r > 0.0))
        throw ValidationError("range r must be positive");
}

} // namespace

Eigen::VectorXcd bs_ris_channel(const SystemGeometry& geom, int n, double delta_f)
{
    if (!(geom.d_c > 0.0))
        throw ValidationError("d_c must be positive");
    if (!(delta_f > 0.0))
        throw ValidationError("subcarrier spacing must be positive");

    const double lambda = geom.lambda;
    const double area = 0.25 * lambda * lambda;
    const double wavenumber_offset = 1.0 / lambda - n * delta_f / kSpeedOfLight;

    Eigen::VectorXcd g(geom.M);
    for (int m = 1; m <= geom.M; ++m)
    {
        const double y = geom.cell_offset(m);
        const double d = std::sqrt(geom.d_c * geom.d_c + y * y);
        const double cos_chi = geom.d_c / d;
        const cplx near_term = cplx(1.0 / (2.0 * kPi * d), -1.0 / lambda);
        g(m - 1) = (area * cos_chi / d) * near_term * std::exp(kJ * (2.0 * kPi * d * wavenumber_offset));
    }
    return g;
}

Eigen::VectorXd nf_cell_distances(const SystemGeometry& geom, double r, double theta)
{
    require_positive_range(r);
    // theta is measured from the RIS axis (y), hence the cos pairing.
    const double c = std::cos(theta);
    Eigen::VectorXd rm(geom.M);
    for (int m = 1; m <= geom.M; ++m)
    {
        const double y = geom.cell_offset(m);
        rm(m - 1) = std::sqrt(r * r + y * y - 2.0 * r * y * c);
    }
    return rm;
}

Eigen::VectorXd nf_path_differences(const SystemGeometry& geom, double r, double theta)
{
    const Eigen::VectorXd rm = nf_cell_distances(geom, r, theta);
    const double c = std::cos(theta);
    Eigen::VectorXd diff(geom.M);
    for (int m = 1; m <= geom.M; ++m)
    {
        const double y = geom.cell_offset(m);
        diff(m - 1) = y * (y - 2.0 * r * c) / (rm(m - 1) + r);
    }
    return diff;
}

Eigen::VectorXcd nf_steering(const SystemGeometry& geom, double r, double theta)
{
    const Eigen::VectorXd diff = nf_path_differences(geom, r, theta);
    const double k = 2.0 * kPi / geom.lambda;
    const double scale = 1.0 / std::sqrt(static_cast<double>(geom.M));
    Eigen::VectorXcd a(geom.M);
    for (int i = 0; i < geom.M; ++i)
        a(i) = scale * std::exp(-kJ * (k * diff(i)));
    return a;
}

Eigen::VectorXcd ff_steering(const SystemGeometry& geom, double theta)
{
    const double step = 2.0 * kPi * (geom.delta / geom.lambda) * std::cos(theta);
    const double scale = 1.0 / std::sqrt(static_cast<double>(geom.M));
    Eigen::VectorXcd a(geom.M);
    for (int i = 0; i < geom.M; ++i)
        a(i) = scale * std::exp(kJ * (step * i));
    return a;
}

cplx nf_gain(const SystemGeometry& geom, double r)
{
    require_positive_range(r);
    return geom.lambda / (4.0 * kPi * r) * std::exp(-kJ * (2.0 * kPi * r / geom.lambda));
}

cplx ff_gain(const SystemGeometry& geom, double r, double phi)
{
    require_positive_range(r);
    return geom.lambda / (4.0 * kPi * r) * std::exp(kJ * phi);
}

NearFieldChannel nf_channel(const SystemGeometry& geom, double r, double theta)
{
    const cplx beta = nf_gain(geom, r);
    return {beta * nf_steering(geom, r, theta).adjoint(), beta, classify_region(geom, r)};
}

FarFieldChannel ff_channel(const SystemGeometry& geom, int n, double delta_f, double r, double theta, double phi)
{
    const cplx beta = ff_gain(geom, r, phi);
    const double tau = r / kSpeedOfLight;
    const cplx rotation = std::exp(-kJ * (2.0 * kPi * tau * n * delta_f));
    return {beta * rotation * ff_steering(geom, theta).adjoint(), beta, tau};
}

} // namespace bdloc
