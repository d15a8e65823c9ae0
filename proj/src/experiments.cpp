// SPDX-License-Identifier: Apache-2.0

#include "bdloc/experiments.hpp"
#include "bdloc/channel.hpp"
#include "bdloc/errors.hpp"
#include "parallel.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <ostream>
#include <random>

namespace bdloc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_architectures(const ExperimentConfig& config)
{
    if (config.architectures.empty())
        throw ValidationError("arch: at least one architecture is required");
}

SeriesPoint to_point(const FisherReport& rep)
{
    return {rep.crlb(0), rep.crlb(1), rep.peb};
}

SweepResult make_sweep(const ExperimentConfig& config, std::string axis, std::string unit, std::vector<double> values)
{
    SweepResult res;
    res.axis_name = std::move(axis);
    res.axis_unit = std::move(unit);
    res.scenario = config.scenario.scenario;
    res.axis = std::move(values);
    res.architectures = config.architectures;
    res.series.assign(res.architectures.size(), std::vector<SeriesPoint>(res.axis.size()));
    res.seed = config.scenario.seed;
    res.phi = draw_phase(config.scenario.seed);
    return res;
}

} // namespace

SystemGeometry GeometrySpec::build() const
{
    return SystemGeometry::make(M, f_c, delta_wl, d_c_wl);
}

ScenarioConfig ScenarioConfig::defaults(Scenario scenario)
{
    ScenarioConfig c;
    c.scenario = scenario;
    if (scenario == Scenario::NearField)
    {
        c.N = 1;
        c.p_ue = Vec2(12.0, 8.0);
    }
    else
    {
        c.N = 501;
        c.p_ue = Vec2(60.0, 40.0);
    }
    c.grid.truncate_to = reference_codebook_size(scenario);
    return c;
}

double ScenarioConfig::effective_noise_dbm() const
{
    return noise_dbm ? *noise_dbm : noise_power_dbm(bandwidth());
}

SignalSetup ScenarioConfig::signal_setup() const
{
    SignalSetup s;
    s.num_subcarriers = N;
    s.delta_f = delta_f;
    s.power_mw = dbm_to_mw(P_dbm);
    s.noise_mw = dbm_to_mw(effective_noise_dbm());
    s.ff_form = ff_form;
    return s;
}

ExperimentConfig ExperimentConfig::defaults(Scenario scenario)
{
    ExperimentConfig c;
    c.scenario = ScenarioConfig::defaults(scenario);
    return c;
}

double noise_power_dbm(double bandwidth_hz)
{
    if (!(bandwidth_hz > 0.0))
        throw ValidationError("bandwidth must be positive");
    return -174.0 + 10.0 * std::log10(bandwidth_hz);
}

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

double draw_phase(std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(0.0, 2.0 * std::numbers::pi);
    return uniform(rng);
}

// ---------------------------------------------------------------------------

BeamPattern beam_pattern(const SystemGeometry& geom, const Eigen::VectorXcd& zeta, const std::vector<double>& thetas,
                         double reference_power)
{
    if (zeta.size() != geom.M)
        throw ValidationError("beam_pattern: zeta has wrong length");
    if (zeta.norm() == 0.0)
        throw ValidationError("beam_pattern: zeta is zero");
    if (!(reference_power > 0.0))
        throw ValidationError("beam_pattern: reference power must be positive");

    BeamPattern bp;
    bp.theta = thetas;
    for (double th : thetas)
    {
        const double g = std::norm(ff_steering(geom, th).dot(zeta));
        const double gn = g / reference_power;
        bp.gain.push_back(g);
        bp.gain_normalized.push_back(gn);
        bp.gain_db.push_back(10.0 * std::log10(g));
        bp.gain_normalized_db.push_back(10.0 * std::log10(gn));
    }
    return bp;
}

PatternResult run_beam_pattern(const ExperimentConfig& config, double target_theta, std::size_t points)
{
    require_architectures(config);
    if (points < 2)
        throw ValidationError("pattern.points must be >= 2");

    const SystemGeometry geom = config.geometry.build();
    std::vector<double> thetas(points);
    for (std::size_t i = 0; i < points; ++i)
        thetas[i] = std::numbers::pi * static_cast<double>(i) / static_cast<double>(points - 1);

    const Eigen::VectorXcd g0 = bs_ris_channel(geom, 0, config.scenario.delta_f);
    const Eigen::VectorXcd u_T = g0 / g0.norm();
    const Eigen::VectorXcd u_R = ff_steering(geom, target_theta);

    PatternResult res;
    res.target_theta = target_theta;
    res.architectures = config.architectures;
    for (Architecture arch : config.architectures)
    {
        switch (arch)
        {
        case Architecture::BdRis:
            res.patterns.push_back(beam_pattern(geom, takagi_codeword(u_T, u_R).omega() * g0, thetas, g0.squaredNorm()));
            break;
        case Architecture::DRis:
            res.patterns.push_back(beam_pattern(geom, dris_codeword(u_T, u_R).omega() * g0, thetas, g0.squaredNorm()));
            break;
        case Architecture::Aaa: {
            const Eigen::VectorXcd f = aaa_codeword(u_R);
            res.patterns.push_back(beam_pattern(geom, f, thetas, f.squaredNorm()));
            break;
        }
        }
    }
    return res;
}

// ---------------------------------------------------------------------------

ArchitectureModel::ArchitectureModel(const SystemGeometry& geom, const ScenarioConfig& scenario, Architecture arch,
                                     const std::vector<SweepTarget>& targets, int threads)
    : geom_(geom),
      scenario_(scenario),
      codebook_(build_codebook(geom, scenario.scenario, arch, targets, threads)),
      engine_(geom, codebook_, scenario.signal_setup())
{
}

FisherReport ArchitectureModel::evaluate(const Vec2& p_ue, double phi, double prefactor, InversionPolicy policy) const
{
    const ChannelParams params = channel_params_at(geom_, scenario_.scenario, p_ue, phi);
    const Eigen::Matrix4d F = prefactor * engine_.information(params);
    const Eigen::Matrix4d J = jacobian(geom_, scenario_.scenario, p_ue, scenario_.jacobian_sign);
    return make_report(scenario_.scenario, F, J, policy);
}

CrlbResult run_crlb(const ExperimentConfig& config)
{
    require_architectures(config);
    const SystemGeometry geom = config.geometry.build();
    const auto targets = sweep_grid(geom, config.scenario.scenario, config.scenario.grid);

    CrlbResult res;
    res.architectures = config.architectures;
    res.phi = draw_phase(config.scenario.seed);
    for (Architecture arch : config.architectures)
    {
        const ArchitectureModel model(geom, config.scenario, arch, targets, config.threads);
        res.reports.push_back(model.evaluate(config.scenario.p_ue, res.phi, model.engine().prefactor()));
    }
    return res;
}

// ---------------------------------------------------------------------------

SweepResult sweep_power(const ExperimentConfig& config, const std::vector<double>& p_dbm)
{
    require_architectures(config);
    if (p_dbm.empty())
        throw ValidationError("sweep.p: list must not be empty");

    const SystemGeometry geom = config.geometry.build();
    const auto targets = sweep_grid(geom, config.scenario.scenario, config.scenario.grid);
    SweepResult res = make_sweep(config, "P", "dBm", p_dbm);

    // Power only scales the information matrix; one engine per architecture.
    const double noise_mw = dbm_to_mw(config.scenario.effective_noise_dbm());
    for (std::size_t a = 0; a < res.architectures.size(); ++a)
    {
        const ArchitectureModel model(geom, config.scenario, res.architectures[a], targets, config.threads);
        const ChannelParams params = channel_params_at(geom, config.scenario.scenario, config.scenario.p_ue, res.phi);
        const Eigen::Matrix4d info = model.engine().information(params);
        const Eigen::Matrix4d J = jacobian(geom, config.scenario.scenario, config.scenario.p_ue, config.scenario.jacobian_sign);
        for (std::size_t i = 0; i < p_dbm.size(); ++i)
        {
            const double prefactor = 2.0 * dbm_to_mw(p_dbm[i]) / noise_mw;
            res.series[a][i] = to_point(make_report(config.scenario.scenario, prefactor * info, J));
        }
    }
    return res;
}

SweepResult sweep_dc(const ExperimentConfig& config, const std::vector<double>& d_c_wl)
{
    require_architectures(config);
    if (d_c_wl.empty())
        throw ValidationError("sweep.dc_wl: list must not be empty");

    // Targets come from the base geometry and stay fixed along the axis.
    const SystemGeometry base = config.geometry.build();
    const auto targets = sweep_grid(base, config.scenario.scenario, config.scenario.grid);
    SweepResult res = make_sweep(config, "d_c", "lambda", d_c_wl);

    const std::size_t A = res.architectures.size();
    const std::size_t items = A * d_c_wl.size();

    // The active array never reads d_c: evaluate it once and replicate.
    std::vector<std::optional<SeriesPoint>> aaa(A);
    for (std::size_t a = 0; a < A; ++a)
        if (res.architectures[a] == Architecture::Aaa)
        {
            const ArchitectureModel model(base, config.scenario, Architecture::Aaa, targets, config.threads);
            aaa[a] = to_point(model.evaluate(config.scenario.p_ue, res.phi, model.engine().prefactor()));
        }

    detail::parallel_for(items, config.threads, [&](std::size_t item) {
        const std::size_t i = item / A;
        const std::size_t a = item % A;
        if (aaa[a])
        {
            res.series[a][i] = *aaa[a];
            return;
        }
        GeometrySpec spec = config.geometry;
        spec.d_c_wl = d_c_wl[i];
        const SystemGeometry geom = spec.build();
        const ArchitectureModel model(geom, config.scenario, res.architectures[a], targets);
        res.series[a][i] = to_point(model.evaluate(config.scenario.p_ue, res.phi, model.engine().prefactor()));
    });
    return res;
}

SweepResult sweep_subcarriers(const ExperimentConfig& config, const std::vector<int>& counts, NoiseMode mode)
{
    require_architectures(config);
    if (counts.empty())
        throw ValidationError("sweep.n: list must not be empty");
    for (int n : counts)
        if (n < 1 || n % 2 == 0)
            throw ValidationError("sweep.n: subcarrier counts must be odd and >= 1 (got " + std::to_string(n) + ")");
    if (config.scenario.scenario == Scenario::NearField)
        throw ValidationError("sweep.n: the near-field scenario is narrowband (N = 1); use scenario=ff");

    const SystemGeometry geom = config.geometry.build();
    const auto targets = sweep_grid(geom, config.scenario.scenario, config.scenario.grid);

    std::vector<double> axis(counts.begin(), counts.end());
    SweepResult res = make_sweep(config, "N", "subcarriers", axis);
    res.variant = mode == NoiseMode::TrackBandwidth ? "noise-tracks-bandwidth" : "fixed-noise";
    const double fixed_noise_dbm = config.scenario.effective_noise_dbm();

    const std::size_t A = res.architectures.size();
    std::vector<Codebook> codebooks;
    for (Architecture arch : res.architectures)
        codebooks.push_back(build_codebook(geom, config.scenario.scenario, arch, targets, config.threads));

    detail::parallel_for(A * counts.size(), config.threads, [&](std::size_t item) {
        const std::size_t i = item / A;
        const std::size_t a = item % A;
        ScenarioConfig sc = config.scenario;
        sc.N = counts[i];
        sc.noise_dbm = mode == NoiseMode::Fixed ? std::optional<double>(fixed_noise_dbm) : std::nullopt;
        const FisherEngine engine(geom, codebooks[a], sc.signal_setup());
        const ChannelParams params = channel_params_at(geom, sc.scenario, sc.p_ue, res.phi);
        const Eigen::Matrix4d F = engine.prefactor() * engine.information(params);
        const Eigen::Matrix4d J = jacobian(geom, sc.scenario, sc.p_ue, sc.jacobian_sign);
        res.series[a][i] = to_point(make_report(sc.scenario, F, J, InversionPolicy::StructuralZerosInfinite));
    });
    return res;
}

// ---------------------------------------------------------------------------

HeatmapSpec HeatmapSpec::defaults(Scenario scenario)
{
    HeatmapSpec s;
    if (scenario == Scenario::FarField)
    {
        s.x_min = 0;
        s.x_max = 100;
        s.y_min = -50;
        s.y_max = 50;
        s.resolution = 1.0;
        s.delta_theta_deg = 5.0;
    }
    return s;
}

HeatmapResult peb_heatmap(const ExperimentConfig& config, const HeatmapSpec& spec)
{
    require_architectures(config);
    if (!(spec.resolution > 0.0))
        throw ValidationError("heatmap.resolution must be positive");
    if (spec.x_max < spec.x_min || spec.y_max < spec.y_min)
        throw ValidationError("heatmap window is empty");

    ScenarioConfig sc = config.scenario;
    if (spec.delta_theta_deg)
        sc.grid.delta_theta_deg = *spec.delta_theta_deg;

    const SystemGeometry geom = config.geometry.build();
    const auto targets = sweep_grid(geom, sc.scenario, sc.grid);

    HeatmapResult res;
    res.scenario = sc.scenario;
    res.x = inclusive_range(spec.x_min, spec.resolution, spec.x_max);
    res.y = inclusive_range(spec.y_min, spec.resolution, spec.y_max);
    res.architectures = config.architectures;
    res.seed = sc.seed;
    res.phi = draw_phase(sc.seed);

    const auto nx = static_cast<Eigen::Index>(res.x.size());
    const auto ny = static_cast<Eigen::Index>(res.y.size());
    for (Architecture arch : res.architectures)
    {
        const ArchitectureModel model(geom, sc, arch, targets, config.threads);
        const double prefactor = model.engine().prefactor();
        Eigen::MatrixXd grid(ny, nx);
        detail::parallel_for(static_cast<std::size_t>(nx * ny), config.threads, [&](std::size_t cell) {
            const auto iy = static_cast<Eigen::Index>(cell) / nx;
            const auto ix = static_cast<Eigen::Index>(cell) % nx;
            const Vec2 p(res.x[static_cast<std::size_t>(ix)], res.y[static_cast<std::size_t>(iy)]);
            const Vec2 d = p - geom.p_ris;
            double value = kNaN;
            if (d.norm() >= spec.exclusion_radius && d.x() > 0.0)
            {
                try
                {
                    value = 10.0 * std::log10(model.evaluate(p, res.phi, prefactor).peb);
                }
                catch (const NumericalError&)
                {
                    value = kNaN;
                }
            }
            grid(iy, ix) = value;
        });
        res.peb_db.push_back(std::move(grid));
    }
    return res;
}

// ---------------------------------------------------------------------------

std::string format_number(double value)
{
    if (std::isnan(value))
        return "nan";
    if (std::isinf(value))
        return value > 0 ? "inf" : "-inf";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, r.ptr);
}

void write_sweep_csv(std::ostream& os, const SweepResult& result)
{
    os << "axis,arch,eta_first,eta_theta,peb\n";
    for (std::size_t i = 0; i < result.axis.size(); ++i)
        for (std::size_t a = 0; a < result.architectures.size(); ++a)
        {
            const SeriesPoint& p = result.series[a][i];
            os << format_number(result.axis[i]) << ',' << to_string(result.architectures[a]) << ','
               << format_number(p.eta_first) << ',' << format_number(p.eta_theta) << ',' << format_number(p.peb)
               << '\n';
        }
}

void write_heatmap_csv(std::ostream& os, const HeatmapResult& result)
{
    os << "x,y,arch,peb_db\n";
    for (std::size_t iy = 0; iy < result.y.size(); ++iy)
        for (std::size_t ix = 0; ix < result.x.size(); ++ix)
            for (std::size_t a = 0; a < result.architectures.size(); ++a)
                os << format_number(result.x[ix]) << ',' << format_number(result.y[iy]) << ','
                   << to_string(result.architectures[a]) << ','
                   << format_number(result.peb_db[a](static_cast<Eigen::Index>(iy), static_cast<Eigen::Index>(ix)))
                   << '\n';
}

void write_pattern_csv(std::ostream& os, const PatternResult& result)
{
    os << "theta_deg,arch,gain_db,gain_norm_db\n";
    if (result.patterns.empty())
        return;
    const std::size_t points = result.patterns.front().theta.size();
    for (std::size_t i = 0; i < points; ++i)
        for (std::size_t a = 0; a < result.architectures.size(); ++a)
        {
            const BeamPattern& bp = result.patterns[a];
            os << format_number(bp.theta[i] * 180.0 / std::numbers::pi) << ',' << to_string(result.architectures[a])
               << ',' << format_number(bp.gain_db[i]) << ',' << format_number(bp.gain_normalized_db[i]) << '\n';
        }
}

} // namespace bdloc
