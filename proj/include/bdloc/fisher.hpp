// SPDX-License-Identifier: Apache-2.0
//
// Fisher information for the channel parameters
//   NF: (r,   theta, Re beta, Im beta)
//   FF: (tau, theta, Re beta, Im beta)
// via the Slepian-Bangs formula F = (2P/sigma^2) sum_t sum_n Re{grad mu grad mu^H},
// channel-parameter CRLBs, the Jacobian to (x, y, Re beta, Im beta), the
// positional FIM F_po = J^T F J and the position error bound.
#pragma once

#include "bdloc/channel.hpp"
#include "bdloc/codebook.hpp"
#include "bdloc/geometry.hpp"

#include <Eigen/Core>
#include <json.hpp>

#include <array>
#include <cstdint>

namespace bdloc {

struct ChannelParams
{
    Scenario scenario = Scenario::NearField;
    double first = 0;  // r [m] (NF) or tau [s] (FF)
    double theta = 0;  // [rad]
    cplx beta{};
};

// Channel parameters of a UE at p_ue. NF uses beta_1 (phase -2 pi r/lambda),
// FF uses beta_2 with the given random phase phi.
ChannelParams channel_params_at(const SystemGeometry& geom, Scenario scenario, const Vec2& p_ue, double phi = 0.0);

// d mu / d(first, theta, Re beta, Im beta)
using SignalGradient = std::array<cplx, 4>;

// Derivative of the FF steering vector with respect to theta.
enum class FfDerivativeForm
{
    Analytic,  // -j 2pi (delta/lambda) sin(theta) diag(0..M-1) a_2
    Cosine     // same with cos(theta) in place of sin(theta), for comparison
};

// mu = h Omega g
cplx noiseless_signal(const Eigen::RowVectorXcd& h, const Eigen::MatrixXcd& omega, const Eigen::VectorXcd& g);
// mu = h f (active array)
cplx noiseless_signal(const Eigen::RowVectorXcd& h, const Eigen::VectorXcd& f);

SignalGradient signal_derivatives_nf(const SystemGeometry& geom, const ChannelParams& params,
                                     const Eigen::VectorXcd& zeta);

SignalGradient signal_derivatives_ff(const SystemGeometry& geom, const ChannelParams& params, int n, double delta_f,
                                     const Eigen::VectorXcd& zeta_n,
                                     FfDerivativeForm form = FfDerivativeForm::Analytic);

Eigen::VectorXcd ff_steering_derivative(const SystemGeometry& geom, double theta,
                                        FfDerivativeForm form = FfDerivativeForm::Analytic);

// Waveform settings shared by every slot. Powers are linear milliwatts.
struct SignalSetup
{
    int num_subcarriers = 1;  // N = 2K + 1
    double delta_f = 120e3;   // [Hz]
    double power_mw = 100.0;
    double noise_mw = 0.0;
    FfDerivativeForm ff_form = FfDerivativeForm::Analytic;

    int half_band() const { return (num_subcarriers - 1) / 2; }
    void validate(Scenario scenario) const;
};

// Precomputes the effective beamforming vectors zeta_t[n] of a codebook so
// that information matrices for many UE positions are cheap to evaluate.
class FisherEngine
{
public:
    FisherEngine(const SystemGeometry& geom, const Codebook& codebook, const SignalSetup& setup);

    // sum_t sum_n Re{grad mu grad mu^H}, without the 2P/sigma^2 prefactor.
    Eigen::Matrix4d information(const ChannelParams& params) const;

    // 2P / sigma^2
    double prefactor() const;

    Scenario scenario() const { return scenario_; }
    std::size_t slots() const { return slots_; }

private:
    SystemGeometry geom_;
    SignalSetup setup_;
    Scenario scenario_;
    std::size_t slots_ = 0;
    bool frequency_flat_ = false;   // aaa: zeta does not depend on n
    Eigen::MatrixXcd zeta_;         // M x (T*N), or M x T when frequency flat / NF
};

Eigen::Matrix4d fim_channel(const SystemGeometry& geom, const SignalSetup& setup, const Codebook& codebook,
                            const ChannelParams& params);

enum class InversionPolicy
{
    Strict,                    // any singular direction is an error
    StructuralZerosInfinite    // exactly-zero rows/cols get an infinite bound
};

inline constexpr double kConditionLimit = 1e14;

// Inverse of a symmetric information matrix. Parameters with an exactly-zero
// row/column carry +inf on the diagonal under the relaxed policy.
struct InverseInformation
{
    Eigen::Matrix4d inverse;
    std::array<bool, 4> unidentified{};
};

InverseInformation invert_information(const Eigen::Matrix4d& F, const std::array<const char*, 4>& names,
                                      InversionPolicy policy = InversionPolicy::Strict);

std::array<const char*, 4> channel_parameter_names(Scenario scenario);

// eta_l = sqrt([F^-1]_ll)
Eigen::Vector4d crlb_channel(const Eigen::Matrix4d& F_ch, Scenario scenario = Scenario::NearField,
                             InversionPolicy policy = InversionPolicy::Strict);

enum class JacobianSign
{
    Reference, // d theta/dx = -dy/r^2, d theta/dy = dx/r^2
    Geometric  // derivative of theta = atan2(dx, dy)
};

// Rows (r|tau, theta, Re beta, Im beta), columns (x, y, Re beta, Im beta).
Eigen::Matrix4d jacobian(const SystemGeometry& geom, Scenario scenario, const Vec2& p_ue,
                         JacobianSign sign = JacobianSign::Reference);

Eigen::Matrix4d fim_positional(const Eigen::Matrix4d& F_ch, const Eigen::Matrix4d& J);

// sqrt(tr([F_po^-1]_{1:2,1:2}))
double peb(const Eigen::Matrix4d& F_po);

struct FisherReport
{
    Scenario scenario = Scenario::NearField;
    Eigen::Matrix4d F_ch;
    Eigen::Vector4d crlb;
    Eigen::Matrix4d J;
    Eigen::Matrix4d F_po;
    double peb = 0;
};

FisherReport make_report(Scenario scenario, const Eigen::Matrix4d& F_ch, const Eigen::Matrix4d& J,
                         InversionPolicy policy = InversionPolicy::Strict);

nlohmann::json report_to_json(const FisherReport& report);

// y_t[n] = sqrt(P) mu_t[n] + w_t[n], w ~ CN(0, sigma^2). Rows t, columns n = -K..K.
Eigen::MatrixXcd received_signal(const SystemGeometry& geom, const SignalSetup& setup, const Codebook& codebook,
                                 const ChannelParams& params, std::uint64_t seed);

} // namespace bdloc
