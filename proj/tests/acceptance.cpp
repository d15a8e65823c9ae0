// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite. Prints one PASS/FAIL line per criterion; with an argument
// N only criterion N runs. Exit status is nonzero if any selected criterion fails.

#include "bdloc/channel.hpp"
#include "bdloc/codebook.hpp"
#include "bdloc/experiments.hpp"
#include "bdloc/fisher.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <random>
#include <string>

using namespace bdloc;

namespace {

constexpr double kPi = std::numbers::pi;
const cplx J{0.0, 1.0};

// Pinned tolerances and limits.
constexpr double kDerivativeTol = 1e-5;
constexpr int kDerivativeConfigs = 50;
constexpr double kDerivativeSeconds = 10.0;
constexpr double kUnitaryTol = 1e-10;
constexpr double kSymmetryTol = 1e-12;
constexpr double kUnitModulusTol = 1e-12;
constexpr double kCodebookSeconds = 30.0;
constexpr double kScalingTol = 1e-9;
constexpr double kOrderingSeconds = 120.0;
constexpr double kOrderingGapFactor = 2.0;
constexpr double kFlatThetaTol = 1e-9;
constexpr double kPhiSpreadTol = 1e-6;
constexpr double kTakagiGainTol = 1e-8;
constexpr double kGainOrderingSlack = 1e-12;
constexpr double kFresnelTol = 1e-12;
constexpr double kNfCrlbSeconds = 5.0;
constexpr double kFfCrlbSeconds = 60.0;
constexpr double kHeatmapSeconds = 600.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome
{
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, double a)
{
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string sci(double v) { return fmt("%.3e", v); }

ExperimentConfig reference(Scenario sc) { return ExperimentConfig::defaults(sc); }

// Models built on the reference geometry with a given d_c, cached across criteria.
const ArchitectureModel& model(Scenario sc, Architecture arch, double d_c_wl = 0.5)
{
    static std::map<std::tuple<int, int, double>, std::unique_ptr<ArchitectureModel>> cache;
    auto key = std::make_tuple(static_cast<int>(sc), static_cast<int>(arch), d_c_wl);
    auto it = cache.find(key);
    if (it == cache.end())
    {
        const ExperimentConfig base = reference(sc);
        const auto targets = sweep_grid(base.geometry.build(), sc, base.scenario.grid);
        GeometrySpec spec = base.geometry;
        spec.d_c_wl = d_c_wl;
        it = cache.emplace(key, std::make_unique<ArchitectureModel>(spec.build(), base.scenario, arch, targets)).first;
    }
    return *it->second;
}

double reference_peb(Scenario sc, Architecture arch, double d_c_wl = 0.5)
{
    const ExperimentConfig base = reference(sc);
    const ArchitectureModel& m = model(sc, arch, d_c_wl);
    return m.evaluate(base.scenario.p_ue, draw_phase(base.scenario.seed), m.engine().prefactor()).peb;
}

const Codebook& reference_codebook(Scenario sc, Architecture arch) { return model(sc, arch).codebook(); }

Eigen::VectorXcd random_unit(std::mt19937_64& rng, int M)
{
    std::normal_distribution<double> n;
    Eigen::VectorXcd v(M);
    for (int i = 0; i < M; ++i)
        v(i) = cplx(n(rng), n(rng));
    return v / v.norm();
}

double rel(cplx a, cplx b)
{
    const double s = std::max(std::abs(a), std::abs(b));
    return s == 0 ? 0 : std::abs(a - b) / s;
}

// 1. Derivatives against central differences of signals built from Euclidean cell distances.
Outcome derivative_oracle()
{
    const auto t0 = Clock::now();
    const SystemGeometry g = reference(Scenario::NearField).geometry.build();
    const double df = 120e3, k = 2 * kPi / g.lambda, s = 1.0 / std::sqrt(double(g.M));
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> angle(0.1, kPi - 0.1);
    std::uniform_real_distribution<double> range(g.fresnel_inner(), g.fraunhofer());
    std::uniform_real_distribution<double> phase(0, 2 * kPi);
    std::uniform_int_distribution<int> sub(-250, 250);

    // Evaluated in extended precision: |dmu/dr| can be 1e-8 |beta|, far below the
    // cancellation error of |p - c_m| - r in double.
    using lcplx = std::complex<long double>;
    auto mu_nf = [&](long double r, long double th, cplx b, const Eigen::VectorXcd& z) {
        const long double x = r * std::sin(th), y = r * std::cos(th);
        const long double kl = 2 * std::numbers::pi_v<long double> / static_cast<long double>(g.lambda);
        lcplx acc = 0;
        for (int m = 1; m <= g.M; ++m)
        {
            const long double ym = (m - (g.M + 1) / 2.0L) * static_cast<long double>(g.delta);
            const long double rm = std::sqrt(x * x + (y - ym) * (y - ym));
            acc += std::exp(lcplx(0, kl * (rm - r))) * lcplx(z(m - 1));
        }
        return lcplx(b) * static_cast<long double>(s) * acc;
    };
    // Fourth-order central difference.
    auto diff5 = [](auto f, long double h) {
        const lcplx d = (f(-2 * h) - 8.0L * f(-h) + 8.0L * f(h) - f(2 * h)) / (12.0L * h);
        return cplx(static_cast<double>(d.real()), static_cast<double>(d.imag()));
    };

    auto mu_ff = [&](double tau, double th, cplx b, int n, const Eigen::VectorXcd& z) {
        cplx acc = 0;
        for (int m = 0; m < g.M; ++m)
            acc += std::exp(-J * (k * m * g.delta * std::cos(th))) * z(m);
        return b * s * std::exp(-J * (2 * kPi * tau * n * df)) * acc;
    };

    std::array<double, 8> worst{};
    for (int i = 0; i < kDerivativeConfigs; ++i)
    {
        const double r = range(rng), th = angle(rng);
        const Eigen::VectorXcd u_T = random_unit(rng, g.M), u_R = random_unit(rng, g.M);
        const Eigen::MatrixXcd omega = (i % 2 ? dris_codeword(u_T, u_R) : takagi_codeword(u_T, u_R)).omega();

        const Eigen::VectorXcd z0 = omega * bs_ris_channel(g, 0, df);
        const ChannelParams pn{Scenario::NearField, r, th, nf_gain(g, r)};
        const SignalGradient dn = signal_derivatives_nf(g, pn, z0);
        const long double hr = 1e-2L, htn = 1e-4L;
        const double ht = 1e-6, hb = 1e-6 * std::abs(pn.beta);
        const cplx fdn[4] = {diff5([&](long double e) { return mu_nf(r + e, th, pn.beta, z0); }, hr),
                             diff5([&](long double e) { return mu_nf(r, th + e, pn.beta, z0); }, htn),
                             diff5([&](long double e) { return mu_nf(r, th, pn.beta + static_cast<double>(e), z0); },
                                   hb),
                             diff5([&](long double e) { return mu_nf(r, th, pn.beta + J * static_cast<double>(e), z0); },
                                   hb)};

        int n = sub(rng);
        if (n == 0)
            n = 1;
        const Eigen::VectorXcd zn = omega * bs_ris_channel(g, n, df);
        const double tau = r / kSpeedOfLight;
        const ChannelParams pf{Scenario::FarField, tau, th, ff_gain(g, r, phase(rng))};
        const SignalGradient dfv = signal_derivatives_ff(g, pf, n, df, zn);
        const double htau = 1e-6 * tau, hbf = 1e-6 * std::abs(pf.beta);
        const cplx fdf[4] = {(mu_ff(tau + htau, th, pf.beta, n, zn) - mu_ff(tau - htau, th, pf.beta, n, zn)) / (2 * htau),
                             (mu_ff(tau, th + ht, pf.beta, n, zn) - mu_ff(tau, th - ht, pf.beta, n, zn)) / (2 * ht),
                             (mu_ff(tau, th, pf.beta + hbf, n, zn) - mu_ff(tau, th, pf.beta - hbf, n, zn)) / (2 * hbf),
                             (mu_ff(tau, th, pf.beta + J * hbf, n, zn) - mu_ff(tau, th, pf.beta - J * hbf, n, zn)) /
                                 (2 * hbf)};
        for (int q = 0; q < 4; ++q)
        {
            worst[q] = std::max(worst[q], rel(dn[q], fdn[q]));
            worst[4 + q] = std::max(worst[4 + q], rel(dfv[q], fdf[q]));
        }
    }
    const double max_err = *std::max_element(worst.begin(), worst.end());
    const double t = seconds_since(t0);
    return {max_err < kDerivativeTol && t < kDerivativeSeconds,
            "8 derivatives x " + std::to_string(kDerivativeConfigs) + " configs, worst rel err " + sci(max_err) +
                " (tol " + sci(kDerivativeTol) + "), " + fmt("%.2f s", t)};
}

// 2. Structural constraints of every reference codeword.
Outcome codeword_invariants()
{
    const auto t0 = Clock::now();
    double unitary = 0, symmetric = 0, modulus = 0;
    std::size_t count = 0;
    for (Scenario sc : {Scenario::NearField, Scenario::FarField})
    {
        for (const PhaseShiftMatrix& m : reference_codebook(sc, Architecture::BdRis).matrices)
        {
            unitary = std::max(unitary, m.unitarity_error());
            symmetric = std::max(symmetric, m.symmetry_error());
            ++count;
        }
        for (const PhaseShiftMatrix& m : reference_codebook(sc, Architecture::DRis).matrices)
            modulus = std::max(modulus, m.diagonal_unit_modulus_error());
    }
    const double t = seconds_since(t0);
    return {unitary < kUnitaryTol && symmetric < kSymmetryTol && modulus < kUnitModulusTol && t < kCodebookSeconds,
            std::to_string(count) + " bd-ris codewords: unitarity " + sci(unitary) + ", symmetry " + sci(symmetric) +
                "; d-ris unit modulus " + sci(modulus) + ", " + fmt("%.2f s", t)};
}

// 3. PEB(P 10^(x/10)) = PEB(P) 10^(-x/20), with the information matrix rebuilt at each power.
Outcome scaling_law()
{
    double worst = 0;
    for (Scenario sc : {Scenario::NearField, Scenario::FarField})
    {
        const ExperimentConfig base = reference(sc);
        const SystemGeometry g = base.geometry.build();
        const double phi = draw_phase(base.scenario.seed);
        const ChannelParams params = channel_params_at(g, sc, base.scenario.p_ue, phi);
        const Eigen::Matrix4d Jm = jacobian(g, sc, base.scenario.p_ue);
        for (Architecture arch : kAllArchitectures)
        {
            const Codebook& cb = reference_codebook(sc, arch);
            const double p0 = make_report(sc, fim_channel(g, base.scenario.signal_setup(), cb, params), Jm).peb;
            for (double x : {3.0, 10.0})
            {
                ScenarioConfig hi = base.scenario;
                hi.P_dbm += x;
                const double p1 = make_report(sc, fim_channel(g, hi.signal_setup(), cb, params), Jm).peb;
                worst = std::max(worst, std::abs(p1 / (p0 * std::pow(10.0, -x / 20.0)) - 1.0));
            }
        }
    }
    return {worst < kScalingTol, "worst relative deviation " + sci(worst) + " over 2 scenarios x 3 architectures x {3, 10} dB (tol " + sci(kScalingTol) + ")"};
}

// 4. PEB(AAA) <= PEB(BD-RIS) < PEB(D-RIS) at the reference points.
Outcome architecture_ordering()
{
    const auto t0 = Clock::now();
    bool ok = true;
    std::string detail;
    double gap_nf = 0;
    for (Scenario sc : {Scenario::NearField, Scenario::FarField})
    {
        const double bd = reference_peb(sc, Architecture::BdRis);
        const double d = reference_peb(sc, Architecture::DRis);
        const double aaa = reference_peb(sc, Architecture::Aaa);
        ok = ok && aaa <= bd && bd < d;
        if (sc == Scenario::NearField)
        {
            gap_nf = (d / aaa) / (bd / aaa);
            ok = ok && gap_nf >= kOrderingGapFactor;
        }
        detail += std::string(to_string(sc)) + ": aaa " + sci(aaa) + " bd " + sci(bd) + " d " + sci(d) + " m; ";
    }
    const double t = seconds_since(t0);
    ok = ok && t < kOrderingSeconds;
    return {ok, detail + "nf (d/aaa)/(bd/aaa) = " + fmt("%.1f", gap_nf) + " (need >= 2), " + fmt("%.2f s", t)};
}

// 5. Behaviour over d_c in {0.5, 5, 50} wavelengths.
Outcome dc_behaviour()
{
    const double dcs[3] = {0.5, 5.0, 50.0};
    bool ok = true;
    std::string detail;
    for (Scenario sc : {Scenario::NearField, Scenario::FarField})
    {
        double aaa[3], bd[3], d[3];
        for (int i = 0; i < 3; ++i)
        {
            aaa[i] = reference_peb(sc, Architecture::Aaa, dcs[i]);
            bd[i] = reference_peb(sc, Architecture::BdRis, dcs[i]);
            d[i] = reference_peb(sc, Architecture::DRis, dcs[i]);
        }
        const bool aaa_const = aaa[0] == aaa[1] && aaa[1] == aaa[2];
        const bool bd_mono = bd[0] <= bd[1] && bd[1] <= bd[2];
        const bool d_penalty = d[0] > std::min({d[0], d[1], d[2]});
        ok = ok && aaa_const && bd_mono && d_penalty;
        detail += std::string(to_string(sc)) + ": aaa " + (aaa_const ? "constant" : "NOT constant") + ", bd " + sci(bd[0]) +
                  "/" + sci(bd[1]) + "/" + sci(bd[2]) + ", d " + sci(d[0]) + "/" + sci(d[1]) + "/" + sci(d[2]) + "; ";
    }
    return {ok, detail};
}

SweepResult subcarrier_sweep(NoiseMode mode)
{
    return sweep_subcarriers(reference(Scenario::FarField), {1, 51, 501}, mode);
}

double theta_spread(const std::vector<SeriesPoint>& s)
{
    double lo = s[0].eta_theta, hi = s[0].eta_theta;
    for (const SeriesPoint& p : s)
    {
        lo = std::min(lo, p.eta_theta);
        hi = std::max(hi, p.eta_theta);
    }
    return (hi - lo) / lo;
}

// 6. Fixed noise: eta_theta flat in N and eta_tau strictly decreasing.
Outcome subcarrier_behaviour()
{
    const SweepResult s = subcarrier_sweep(NoiseMode::Fixed);
    bool ok = true;
    std::string detail = "fixed noise, N = 1/51/501: ";
    for (std::size_t a = 0; a < s.architectures.size(); ++a)
    {
        const auto& v = s.series[a];
        const double spread = theta_spread(v);
        const bool flat = spread <= kFlatThetaTol;
        const bool tau_dec = v[0].eta_first > v[1].eta_first && v[1].eta_first > v[2].eta_first;
        ok = ok && flat && tau_dec;
        detail += std::string(to_string(s.architectures[a])) + " eta_theta spread " + sci(spread) +
                  (tau_dec ? ", eta_tau decreasing; " : ", eta_tau NOT decreasing; ");
    }
    return {ok, detail + "(tol " + sci(kFlatThetaTol) + ")"};
}

std::string subcarrier_tracking_info()
{
    const SweepResult s = subcarrier_sweep(NoiseMode::TrackBandwidth);
    std::string detail = "noise tracking bandwidth, N = 1/51/501: ";
    for (std::size_t a = 0; a < s.architectures.size(); ++a)
        detail += std::string(to_string(s.architectures[a])) + " eta_theta spread " + sci(theta_spread(s.series[a])) + "; ";
    return detail;
}

// 7. FF PEB across 10 seeded gain phases.
Outcome phi_invariance()
{
    const ExperimentConfig base = reference(Scenario::FarField);
    double worst = 0;
    for (Architecture arch : kAllArchitectures)
    {
        const ArchitectureModel& m = model(Scenario::FarField, arch);
        double lo = INFINITY, hi = 0;
        for (std::uint64_t seed = 1; seed <= 10; ++seed)
        {
            const double p = m.evaluate(base.scenario.p_ue, draw_phase(seed), m.engine().prefactor()).peb;
            lo = std::min(lo, p);
            hi = std::max(hi, p);
        }
        worst = std::max(worst, (hi - lo) / lo);
    }
    return {worst < kPhiSpreadTol, "worst relative spread over 10 seeds " + sci(worst) + " (tol " + sci(kPhiSpreadTol) + ")"};
}

// 8. Beam-matching gain of every reference codeword at its own target.
Outcome takagi_gain()
{
    const SystemGeometry g = reference(Scenario::NearField).geometry.build();
    const Eigen::VectorXcd u_T = transmit_direction(g);
    double min_gain = INFINITY, worst_margin = INFINITY;
    for (Scenario sc : {Scenario::NearField, Scenario::FarField})
    {
        const Codebook& bd = reference_codebook(sc, Architecture::BdRis);
        const Codebook& d = reference_codebook(sc, Architecture::DRis);
        for (std::size_t t = 0; t < bd.size(); ++t)
        {
            const Eigen::VectorXcd u_R = target_steering(g, sc, bd.targets[t]);
            const double gb = std::abs(u_R.dot(bd.matrices[t].omega() * u_T));
            const double gd = std::abs(u_R.dot(d.matrices[t].omega() * u_T));
            min_gain = std::min(min_gain, gb);
            worst_margin = std::min(worst_margin, gb - gd);
        }
    }
    return {min_gain >= 1.0 - kTakagiGainTol && worst_margin >= -kGainOrderingSlack,
            "min bd-ris gain " + fmt("%.15f", min_gain) + " (need >= 1 - 1e-8), min(bd - d) gain margin " + sci(worst_margin)};
}

// 9. Region boundaries of the reference geometry.
Outcome fresnel_bounds()
{
    const SystemGeometry g = reference(Scenario::NearField).geometry.build();
    const double lambda = 3e8 / 28e9;
    const double D = 100 * lambda / 2;
    const double inner = 0.62 * std::sqrt(D * D * D / lambda);
    const double outer = 2 * D * D / lambda;
    const double e1 = std::abs(g.fresnel_inner() / inner - 1), e2 = std::abs(g.fraunhofer() / outer - 1);
    const GridSpec grid;
    const bool inside = inner < grid.rho_min && grid.rho_min < outer && inner < grid.rho_max && grid.rho_max < outer;
    return {e1 < kFresnelTol && e2 < kFresnelTol && inside,
            "inner " + fmt("%.6f", g.fresnel_inner()) + " m, outer " + fmt("%.6f", g.fraunhofer()) +
                " m, rel err " + sci(std::max(e1, e2)) + ", rho 5 and 45 m " + (inside ? "inside" : "NOT inside")};
}

// 10. Wall-clock budget of full runs, codebooks built from scratch.
Outcome runtime()
{
    auto t0 = Clock::now();
    run_crlb(reference(Scenario::NearField));
    const double nf = seconds_since(t0);

    t0 = Clock::now();
    run_crlb(reference(Scenario::FarField));
    const double ff = seconds_since(t0);

    t0 = Clock::now();
    const HeatmapResult h = peb_heatmap(reference(Scenario::NearField), HeatmapSpec::defaults(Scenario::NearField));
    const double hm = seconds_since(t0);

    return {nf < kNfCrlbSeconds && ff < kFfCrlbSeconds && hm < kHeatmapSeconds,
            "nf crlb " + fmt("%.2f s", nf) + " (< 5), ff crlb " + fmt("%.2f s", ff) + " (< 60), nf heatmap " +
                std::to_string(h.x.size()) + "x" + std::to_string(h.y.size()) + " x 3 archs " + fmt("%.1f s", hm) +
                " (< 600)"};
}

} // namespace

int main(int argc, char** argv)
{
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"derivative oracle", derivative_oracle},
        {"codeword invariants", codeword_invariants},
        {"exact power scaling", scaling_law},
        {"architecture ordering", architecture_ordering},
        {"d_c behaviour", dc_behaviour},
        {"subcarrier behaviour", subcarrier_behaviour},
        {"phi invariance", phi_invariance},
        {"Takagi gain", takagi_gain},
        {"Fresnel bounds", fresnel_bounds},
        {"desk-scale runtime", runtime},
    };

    int only = 0;
    if (argc > 1)
    {
        only = std::atoi(argv[1]);
        if (only < 1 || only > static_cast<int>(criteria.size()))
        {
            std::fprintf(stderr, "usage: %s [criterion 1-%zu]\n", argv[0], criteria.size());
            return 2;
        }
    }

    int failed = 0;
    for (int i = 1; i <= static_cast<int>(criteria.size()); ++i)
    {
        if (only && i != only)
            continue;
        Outcome o{false, ""};
        try
        {
            o = criteria[static_cast<std::size_t>(i - 1)].second();
        }
        catch (const std::exception& e)
        {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("criterion %2d %s  %s: %s\n", i, o.pass ? "PASS" : "FAIL", criteria[static_cast<std::size_t>(i - 1)].first,
                    o.detail.c_str());
        if (i == 6)
            std::printf("criterion  6 INFO  %s\n", subcarrier_tracking_info().c_str());
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
