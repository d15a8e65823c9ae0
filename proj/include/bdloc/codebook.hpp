// SPDX-License-Identifier: Apache-2.0
//
// Beam-sweeping codebooks for three transmitter architectures:
//   bd-ris  fully-connected RIS, symmetric unitary Omega from a Takagi
//           factorization of u_R u_T^H + (u_R u_T^H)^T
//   d-ris   single-connected RIS, diagonal unit-modulus Omega
//   aaa     active antenna array, beamformer f = u_R
// where u_T = g[0]/|g[0]| and u_R is the steering vector toward each target.
#pragma once

#include "bdloc/geometry.hpp"

#include <Eigen/Core>
#include <json.hpp>

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bdloc {

enum class Architecture
{
    BdRis,
    DRis,
    Aaa
};

enum class Scenario
{
    NearField,
    FarField
};

std::string_view to_string(Architecture arch);
std::string_view to_string(Scenario scenario);
Architecture parse_architecture(std::string_view text);
Scenario parse_scenario(std::string_view text);

inline constexpr Architecture kAllArchitectures[] = {Architecture::BdRis, Architecture::DRis, Architecture::Aaa};

class PhaseShiftMatrix
{
public:
    static PhaseShiftMatrix fully_connected(Eigen::MatrixXcd omega);
    static PhaseShiftMatrix diagonal(const Eigen::VectorXcd& entries, std::size_t defaulted_phases = 0);

    const Eigen::MatrixXcd& omega() const { return omega_; }
    Architecture architecture() const { return arch_; }

    // max |Omega^H Omega - I|
    double unitarity_error() const;
    // max |Omega - Omega^T|
    double symmetry_error() const;
    // Largest deviation from a diagonal matrix with unit-modulus diagonal.
    double diagonal_unit_modulus_error() const;

    // Diagonal entries whose phase was undefined (zero input) and set to 0.
    std::size_t defaulted_phases() const { return defaulted_phases_; }

private:
    PhaseShiftMatrix(Eigen::MatrixXcd omega, Architecture arch, std::size_t defaulted);

    Eigen::MatrixXcd omega_;
    Architecture arch_;
    std::size_t defaulted_phases_ = 0;
};

struct SweepTarget
{
    double theta = 0;             // [rad]
    std::optional<double> range;  // [m], near-field targets only
};

enum class GridMode
{
    Literal,  // every grid point, endpoints included
    Truncate  // first T points of the literal grid, range-major order
};

struct GridSpec
{
    double rho_min = 5.0;
    double rho_max = 45.0;
    double delta_r = 10.0;
    double delta_theta_deg = 1.8;
    GridMode mode = GridMode::Literal;
    std::size_t truncate_to = 0; // used when mode == Truncate
};

// Codebook sizes quoted with the reference parameter set (T1, T2).
std::size_t reference_codebook_size(Scenario scenario);

// Inclusive arithmetic sequence [first : step : last].
std::vector<double> inclusive_range(double first, double step, double last);

// NF: ranges [rho_min : delta_r : rho_max] x angles [0 : delta_theta : 180 deg],
// range-major. FF: angles only. NF range limits must sit strictly inside the
// radiative near-field window of the geometry.
std::vector<SweepTarget> sweep_grid(const SystemGeometry& geom, Scenario scenario, const GridSpec& spec);

// Intermediate factors of the Takagi construction, exposed for verification.
struct TakagiFactors
{
    Eigen::MatrixXcd A;
    Eigen::VectorXd sigma;
    Eigen::MatrixXcd Q; // A = Q diag(sigma) Q^T
};

TakagiFactors takagi_factors(const Eigen::VectorXcd& u_T, const Eigen::VectorXcd& u_R);

// Omega = Q Q^T, symmetric and unitary.
PhaseShiftMatrix takagi_codeword(const Eigen::VectorXcd& u_T, const Eigen::VectorXcd& u_R);

// Omega = diag(exp(-j arg(u_T .* conj(u_R))))
PhaseShiftMatrix dris_codeword(const Eigen::VectorXcd& u_T, const Eigen::VectorXcd& u_R);

// f = u_R
Eigen::VectorXcd aaa_codeword(const Eigen::VectorXcd& u_R);

// u_R for one target: NF spherical or FF planar steering vector.
Eigen::VectorXcd target_steering(const SystemGeometry& geom, Scenario scenario, const SweepTarget& target);

// u_T = g[0] / |g[0]|
Eigen::VectorXcd transmit_direction(const SystemGeometry& geom);

struct Codebook
{
    Architecture architecture = Architecture::BdRis;
    Scenario scenario = Scenario::NearField;
    int M = 0;
    std::vector<SweepTarget> targets;
    std::vector<PhaseShiftMatrix> matrices;  // bd-ris, d-ris
    std::vector<Eigen::VectorXcd> beams;     // aaa

    std::size_t size() const { return targets.size(); }
    std::size_t defaulted_phases() const;
};

Codebook build_codebook(const SystemGeometry& geom, Scenario scenario, Architecture arch,
                        const std::vector<SweepTarget>& targets, int threads = 1);

Codebook build_codebook(const SystemGeometry& geom, Scenario scenario, Architecture arch, const GridSpec& spec,
                        int threads = 1);

// Targets plus row-major complex matrices (or vectors) as [re, im] pairs.
nlohmann::json codebook_to_json(const Codebook& codebook);

} // namespace bdloc
