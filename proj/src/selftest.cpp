// SPDX-License-Identifier: Apache-2.0

#include "bdloc/selftest.hpp"
#include "bdloc/channel.hpp"
#include "bdloc/codebook.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace bdloc {

namespace {

Eigen::VectorXcd random_unit(std::mt19937_64& rng, int M)
{
    std::normal_distribution<double> normal;
    Eigen::VectorXcd v(M);
    for (int m = 0; m < M; ++m)
        v(m) = cplx(normal(rng), normal(rng));
    return v / v.norm();
}

double relative_error(cplx analytic, cplx numeric)
{
    const double scale = std::max(std::abs(analytic), std::abs(numeric));
    return scale == 0.0 ? 0.0 : std::abs(analytic - numeric) / scale;
}

cplx mu_nf(const SystemGeometry& geom, double r, double theta, cplx beta, const Eigen::VectorXcd& zeta)
{
    return beta * nf_steering(geom, r, theta).dot(zeta);
}

cplx mu_ff(const SystemGeometry& geom, double tau, double theta, cplx beta, int n, double delta_f,
           const Eigen::VectorXcd& zeta)
{
    const cplx e = std::polar(1.0, -2.0 * std::numbers::pi * tau * n * delta_f);
    return beta * e * ff_steering(geom, theta).dot(zeta);
}

} // namespace

bool SelftestReport::passed() const
{
    return std::all_of(checks.begin(), checks.end(), [](const SelftestCheck& c) { return c.passed; });
}

std::array<double, 8> derivative_errors(const SystemGeometry& geom, const DerivativeCheckOptions& options)
{
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> angle(0.1, std::numbers::pi - 0.1);
    std::uniform_real_distribution<double> range(1.05 * geom.fresnel_inner(), 0.95 * geom.fraunhofer());
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::uniform_int_distribution<int> subcarrier(-250, 250);
    const double delta_f = 120e3;

    std::array<double, 8> worst{};
    for (int i = 0; i < options.configs; ++i)
    {
        const double r = range(rng);
        const double theta = angle(rng);
        const Eigen::VectorXcd u_T = random_unit(rng, geom.M);
        const Eigen::VectorXcd u_R = random_unit(rng, geom.M);
        const PhaseShiftMatrix omega = (i % 2 == 0) ? takagi_codeword(u_T, u_R) : dris_codeword(u_T, u_R);

        // Near field.
        {
            const Eigen::VectorXcd zeta = omega.omega() * bs_ris_channel(geom, 0, delta_f);
            const ChannelParams p{Scenario::NearField, r, theta, nf_gain(geom, r)};
            const SignalGradient g = signal_derivatives_nf(geom, p, zeta);
            const double hr = 1e-3, ht = 1e-6, hb = 1e-3 * std::abs(p.beta);
            const cplx fd[4] = {
                (mu_nf(geom, r + hr, theta, p.beta, zeta) - mu_nf(geom, r - hr, theta, p.beta, zeta)) / (2 * hr),
                (mu_nf(geom, r, theta + ht, p.beta, zeta) - mu_nf(geom, r, theta - ht, p.beta, zeta)) / (2 * ht),
                (mu_nf(geom, r, theta, p.beta + hb, zeta) - mu_nf(geom, r, theta, p.beta - hb, zeta)) / (2 * hb),
                (mu_nf(geom, r, theta, p.beta + cplx(0, hb), zeta) - mu_nf(geom, r, theta, p.beta - cplx(0, hb), zeta)) /
                    (2 * hb)};
            for (int k = 0; k < 4; ++k)
                worst[k] = std::max(worst[k], relative_error(g[k], fd[k]));
        }
        // Far field, one subcarrier.
        {
            int n = subcarrier(rng);
            if (n == 0)
                n = 1;
            const double tau = r / kSpeedOfLight;
            const Eigen::VectorXcd zeta = omega.omega() * bs_ris_channel(geom, n, delta_f);
            const ChannelParams p{Scenario::FarField, tau, theta, ff_gain(geom, r, phase(rng))};
            const SignalGradient g = signal_derivatives_ff(geom, p, n, delta_f, zeta, options.ff_form);
            const double htau = 1e-4 / (2.0 * std::numbers::pi * std::abs(n) * delta_f);
            const double ht = 1e-7, hb = 1e-3 * std::abs(p.beta);
            auto mu = [&](double t, double th, cplx b) { return mu_ff(geom, t, th, b, n, delta_f, zeta); };
            const cplx fd[4] = {(mu(tau + htau, theta, p.beta) - mu(tau - htau, theta, p.beta)) / (2 * htau),
                                (mu(tau, theta + ht, p.beta) - mu(tau, theta - ht, p.beta)) / (2 * ht),
                                (mu(tau, theta, p.beta + hb) - mu(tau, theta, p.beta - hb)) / (2 * hb),
                                (mu(tau, theta, p.beta + cplx(0, hb)) - mu(tau, theta, p.beta - cplx(0, hb))) /
                                    (2 * hb)};
            for (int k = 0; k < 4; ++k)
                worst[4 + k] = std::max(worst[4 + k], relative_error(g[k], fd[k]));
        }
    }
    return worst;
}

std::vector<SelftestCheck> derivative_checks(const SystemGeometry& geom, const DerivativeCheckOptions& options)
{
    static const char* names[8] = {"nf d/dr",   "nf d/dtheta", "nf d/dRe(beta)", "nf d/dIm(beta)",
                                   "ff d/dtau", "ff d/dtheta", "ff d/dRe(beta)", "ff d/dIm(beta)"};
    const auto worst = derivative_errors(geom, options);
    std::vector<SelftestCheck> out;
    for (int k = 0; k < 8; ++k)
        out.push_back({std::string("derivative ") + names[k], worst[k] < options.tolerance, worst[k],
                       options.tolerance});
    return out;
}

std::vector<SelftestCheck> codebook_checks(const SystemGeometry& geom, int threads)
{
    std::vector<SelftestCheck> out;
    for (Scenario sc : {Scenario::NearField, Scenario::FarField})
    {
        const GridSpec grid;
        const Codebook bd = build_codebook(geom, sc, Architecture::BdRis, grid, threads);
        double unitary = 0, symmetric = 0;
        for (const PhaseShiftMatrix& m : bd.matrices)
        {
            unitary = std::max(unitary, m.unitarity_error());
            symmetric = std::max(symmetric, m.symmetry_error());
        }
        const std::string tag(to_string(sc));
        out.push_back({tag + " bd-ris unitarity", unitary < 1e-10, unitary, 1e-10});
        out.push_back({tag + " bd-ris symmetry", symmetric < 1e-12, symmetric, 1e-12});

        const Codebook d = build_codebook(geom, sc, Architecture::DRis, grid, threads);
        double modulus = 0;
        for (const PhaseShiftMatrix& m : d.matrices)
            modulus = std::max(modulus, m.diagonal_unit_modulus_error());
        out.push_back({tag + " d-ris unit modulus", modulus < 1e-12, modulus, 1e-12});
    }
    return out;
}

SelftestReport run_selftest(const SystemGeometry& geom, int threads)
{
    SelftestReport report;
    report.checks = derivative_checks(geom);
    for (auto& c : codebook_checks(geom, threads))
        report.checks.push_back(std::move(c));
    return report;
}

} // namespace bdloc
