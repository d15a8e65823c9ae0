// SPDX-License-Identifier: Apache-2.0
//
// Figure-style studies built on the fisher module: beam patterns, CRLB/PEB
// sweeps over transmit power, BS-RIS distance and subcarrier count, and PEB
// heatmaps over a window of UE positions. Work items are independent and may
// run on several threads; results are always in input order.
#pragma once

#include "bdloc/codebook.hpp"
#include "bdloc/fisher.hpp"
#include "bdloc/geometry.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace bdloc {

struct GeometrySpec
{
    int M = 101;
    double f_c = 28e9;
    double delta_wl = 0.5;  // element spacing [wavelengths]
    double d_c_wl = 0.5;    // BS-RIS distance [wavelengths]

    SystemGeometry build() const;
};

enum class NoiseMode
{
    TrackBandwidth,  // sigma^2 = -174 + 10 log10(N delta_f) dBm
    Fixed            // sigma^2 held at one value for every axis point
};

struct ScenarioConfig
{
    Scenario scenario = Scenario::NearField;
    int N = 1;
    double delta_f = 120e3;   // [Hz]
    double P_dbm = 20.0;
    std::optional<double> noise_dbm;
    GridSpec grid;
    Vec2 p_ue{12.0, 8.0};
    std::uint64_t seed = 1;
    FfDerivativeForm ff_form = FfDerivativeForm::Analytic;
    JacobianSign jacobian_sign = JacobianSign::Reference;

    // Reference parameter set for one scenario.
    static ScenarioConfig defaults(Scenario scenario);

    double bandwidth() const { return N * delta_f; }
    double effective_noise_dbm() const;
    // The only place where dBm quantities become milliwatts.
    SignalSetup signal_setup() const;
};

struct ExperimentConfig
{
    GeometrySpec geometry;
    ScenarioConfig scenario;
    std::vector<Architecture> architectures{kAllArchitectures[0], kAllArchitectures[1], kAllArchitectures[2]};
    int threads = 1;

    static ExperimentConfig defaults(Scenario scenario);
};

// -174 + 10 log10(B) dBm
double noise_power_dbm(double bandwidth_hz);
double dbm_to_mw(double dbm);
double mw_to_dbm(double mw);

// Random phase phi ~ U(0, 2 pi) of the far-field gain, one draw per seed.
double draw_phase(std::uint64_t seed);

struct BeamPattern
{
    std::vector<double> theta;
    std::vector<double> gain;             // |a_2^H(theta) zeta|^2
    std::vector<double> gain_normalized;  // gain / reference_power
    std::vector<double> gain_db;
    std::vector<double> gain_normalized_db;
};

BeamPattern beam_pattern(const SystemGeometry& geom, const Eigen::VectorXcd& zeta, const std::vector<double>& thetas,
                         double reference_power);

struct PatternResult
{
    double target_theta = 0;
    std::vector<Architecture> architectures;
    std::vector<BeamPattern> patterns;
};

// One codeword per architecture aimed (far-field steering) at target_theta;
// RIS patterns are normalized by |g[0]|^2, the active array by |f|^2 = 1.
PatternResult run_beam_pattern(const ExperimentConfig& config, double target_theta, std::size_t points);

// Codebook plus precomputed Fisher engine for one architecture.
class ArchitectureModel
{
public:
    ArchitectureModel(const SystemGeometry& geom, const ScenarioConfig& scenario, Architecture arch,
                      const std::vector<SweepTarget>& targets, int threads = 1);

    Architecture architecture() const { return codebook_.architecture; }
    const Codebook& codebook() const { return codebook_; }
    const FisherEngine& engine() const { return engine_; }

    // Report at p_ue with the given 2P/sigma^2 factor.
    FisherReport evaluate(const Vec2& p_ue, double phi, double prefactor,
                          InversionPolicy policy = InversionPolicy::Strict) const;

private:
    SystemGeometry geom_;
    ScenarioConfig scenario_;
    Codebook codebook_;
    FisherEngine engine_;
};

struct CrlbResult
{
    std::vector<Architecture> architectures;
    std::vector<FisherReport> reports;
    double phi = 0;
};

CrlbResult run_crlb(const ExperimentConfig& config);

struct SeriesPoint
{
    double eta_first = 0;  // r [m] or tau [s]
    double eta_theta = 0;  // [rad]
    double peb = 0;        // [m]
};

struct SweepResult
{
    std::string axis_name;
    std::string axis_unit;
    std::string variant;
    Scenario scenario = Scenario::NearField;
    std::vector<double> axis;
    std::vector<Architecture> architectures;
    std::vector<std::vector<SeriesPoint>> series;  // [architecture][axis]
    std::uint64_t seed = 0;
    double phi = 0;
};

SweepResult sweep_power(const ExperimentConfig& config, const std::vector<double>& p_dbm);
SweepResult sweep_dc(const ExperimentConfig& config, const std::vector<double>& d_c_wl);
// N = 1 leaves tau unidentified: eta_first and peb are reported as +inf.
SweepResult sweep_subcarriers(const ExperimentConfig& config, const std::vector<int>& counts, NoiseMode mode);

struct HeatmapSpec
{
    double x_min = 0, x_max = 20;
    double y_min = -5, y_max = 10;
    double resolution = 0.25;
    double exclusion_radius = 0.5;
    std::optional<double> delta_theta_deg;  // codebook angular step override

    static HeatmapSpec defaults(Scenario scenario);
};

struct HeatmapResult
{
    Scenario scenario = Scenario::NearField;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<Architecture> architectures;
    std::vector<Eigen::MatrixXd> peb_db;  // [architecture](y index, x index); NaN = masked
    std::uint64_t seed = 0;
    double phi = 0;
};

// Masks cells closer than the exclusion radius, on or behind the array line
// (x <= x_ris, where the angle is unidentifiable), or with a singular
// information matrix.
HeatmapResult peb_heatmap(const ExperimentConfig& config, const HeatmapSpec& spec);

// Shortest round-trip decimal; "inf" / "nan" for non-finite values.
std::string format_number(double value);

void write_sweep_csv(std::ostream& os, const SweepResult& result);
void write_heatmap_csv(std::ostream& os, const HeatmapResult& result);
void write_pattern_csv(std::ostream& os, const PatternResult& result);

} // namespace bdloc
