// SPDX-License-Identifier: Apache-2.0

#include "bdloc/fisher.hpp"
#include "bdloc/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace bdloc {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr cplx kJ{0.0, 1.0};

// Re{v v^H}, accumulated into F.
inline void accumulate_outer(Eigen::Matrix4d& F, const SignalGradient& v)
{
    for (int i = 0; i < 4; ++i)
        for (int k = i; k < 4; ++k)
            F(i, k) += (v[i] * std::conj(v[k])).real();
}

inline void mirror_upper(Eigen::Matrix4d& F)
{
    for (int i = 0; i < 4; ++i)
        for (int k = 0; k < i; ++k)
            F(i, k) = F(k, i);
}

// Columns a, d_r .* a, d_theta .* a of the near-field derivative vectors.
Eigen::MatrixXcd nf_derivative_basis(const SystemGeometry& geom, double r, double theta)
{
    const Eigen::VectorXd rm = nf_cell_distances(geom, r, theta);
    if ((rm.array() == 0.0).any())
        throw ValidationError("UE coincides with a RIS cell");
    const Eigen::VectorXcd a = nf_steering(geom, r, theta);
    const double k = 2.0 * kPi / geom.lambda;
    const double c = std::cos(theta);
    const double s = std::sin(theta);

    Eigen::MatrixXcd W(geom.M, 3);
    for (int m = 1; m <= geom.M; ++m)
    {
        const int i = m - 1;
        const double y = geom.cell_offset(m);
        // d r_m/dr - 1 = -(y s)^2 / (r_m (r - y c + r_m))
        const cplx d_r = kJ * (k * (y * s) * (y * s) / (rm(i) * (r - y * c + rm(i))));
        const cplx d_theta = -kJ * (k * (r * y * s) / rm(i));
        W(i, 0) = a(i);
        W(i, 1) = d_r * a(i);
        W(i, 2) = d_theta * a(i);
    }
    return W;
}

std::string describe_direction(const Eigen::VectorXd& v, const std::vector<int>& idx,
                               const std::array<const char*, 4>& names)
{
    std::ostringstream os;
    os << std::setprecision(3);
    bool first = true;
    for (Eigen::Index i = 0; i < v.size(); ++i)
    {
        if (std::abs(v(i)) < 1e-3)
            continue;
        os << (first ? (v(i) < 0 ? "-" : "") : (v(i) < 0 ? " - " : " + ")) << std::abs(v(i)) << "*"
           << names[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
        first = false;
    }
    return os.str();
}

} // namespace

ChannelParams channel_params_at(const SystemGeometry& geom, Scenario scenario, const Vec2& p_ue, double phi)
{
    const PolarPosition polar = ue_polar(geom, p_ue);
    ChannelParams p;
    p.scenario = scenario;
    p.theta = polar.theta;
    if (scenario == Scenario::NearField)
    {
        p.first = polar.r;
        p.beta = nf_gain(geom, polar.r);
    }
    else
    {
        p.first = polar.r / kSpeedOfLight;
        p.beta = ff_gain(geom, polar.r, phi);
    }
    return p;
}

cplx noiseless_signal(const Eigen::RowVectorXcd& h, const Eigen::MatrixXcd& omega, const Eigen::VectorXcd& g)
{
    if (omega.rows() != h.size() || omega.cols() != g.size())
        throw ValidationError("noiseless_signal: shape mismatch between h, Omega and g");
    return (h * (omega * g))(0);
}

cplx noiseless_signal(const Eigen::RowVectorXcd& h, const Eigen::VectorXcd& f)
{
    if (f.size() != h.size())
        throw ValidationError("noiseless_signal: shape mismatch between h and f");
    return (h * f)(0);
}

SignalGradient signal_derivatives_nf(const SystemGeometry& geom, const ChannelParams& params,
                                     const Eigen::VectorXcd& zeta)
{
    if (zeta.size() != geom.M)
        throw ValidationError("signal_derivatives_nf: zeta has wrong length");
    const Eigen::MatrixXcd W = nf_derivative_basis(geom, params.first, params.theta);
    const Eigen::Vector3cd s = W.adjoint() * zeta;
    return {params.beta * s(1), params.beta * s(2), s(0), kJ * s(0)};
}

Eigen::VectorXcd ff_steering_derivative(const SystemGeometry& geom, double theta, FfDerivativeForm form)
{
    const double trig = form == FfDerivativeForm::Analytic ? std::sin(theta) : std::cos(theta);
    const cplx scale = -kJ * (2.0 * kPi * (geom.delta / geom.lambda) * trig);
    Eigen::VectorXcd a = ff_steering(geom, theta);
    for (Eigen::Index i = 0; i < a.size(); ++i)
        a(i) *= scale * static_cast<double>(i);
    return a;
}

SignalGradient signal_derivatives_ff(const SystemGeometry& geom, const ChannelParams& params, int n, double delta_f,
                                     const Eigen::VectorXcd& zeta_n, FfDerivativeForm form)
{
    if (zeta_n.size() != geom.M)
        throw ValidationError("signal_derivatives_ff: zeta has wrong length");
    const Eigen::VectorXcd a = ff_steering(geom, params.theta);
    const Eigen::VectorXcd ad = ff_steering_derivative(geom, params.theta, form);
    const double omega_n = 2.0 * kPi * n * delta_f;
    const cplx rot = std::exp(-kJ * (omega_n * params.first));
    const cplx s = rot * a.dot(zeta_n);
    const cplx sd = rot * ad.dot(zeta_n);
    return {-kJ * omega_n * params.beta * s, params.beta * sd, s, kJ * s};
}

// ---------------------------------------------------------------------------

void SignalSetup::validate(Scenario scenario) const
{
    if (num_subcarriers < 1 || num_subcarriers % 2 == 0)
        throw ValidationError("N must be odd and >= 1 (got " + std::to_string(num_subcarriers) + ")");
    if (scenario == Scenario::NearField && num_subcarriers != 1)
        throw ValidationError("N must be 1 in the near-field scenario (got " + std::to_string(num_subcarriers) + ")");
    if (!(delta_f > 0.0))
        throw ValidationError("delta_f must be positive");
    if (!(power_mw > 0.0))
        throw ValidationError("transmit power must be positive");
    if (!(noise_mw >= 0.0))
        throw ValidationError("noise power must be non-negative");
}

FisherEngine::FisherEngine(const SystemGeometry& geom, const Codebook& codebook, const SignalSetup& setup)
    : geom_(geom), setup_(setup), scenario_(codebook.scenario), slots_(codebook.size())
{
    setup_.validate(scenario_);
    if (!(setup_.noise_mw > 0.0))
        throw ValidationError("noise power must be positive for Fisher information");
    if (codebook.size() == 0)
        throw ValidationError("empty codebook");
    if (codebook.M != geom.M)
        throw ValidationError("codebook size M does not match the geometry");

    const auto T = static_cast<Eigen::Index>(slots_);
    const Eigen::Index M = geom.M;

    if (codebook.architecture == Architecture::Aaa)
    {
        frequency_flat_ = true;
        zeta_.resize(M, T);
        for (Eigen::Index t = 0; t < T; ++t)
            zeta_.col(t) = codebook.beams[static_cast<std::size_t>(t)];
        return;
    }

    const int N = setup_.num_subcarriers;
    const int K = setup_.half_band();
    Eigen::MatrixXcd G(M, N);
    for (int k = 0; k < N; ++k)
        G.col(k) = bs_ris_channel(geom, k - K, setup_.delta_f);

    zeta_.resize(M, T * N);
    for (Eigen::Index t = 0; t < T; ++t)
        zeta_.middleCols(t * N, N).noalias() = codebook.matrices[static_cast<std::size_t>(t)].omega() * G;
}

double FisherEngine::prefactor() const { return 2.0 * setup_.power_mw / setup_.noise_mw; }

Eigen::Matrix4d FisherEngine::information(const ChannelParams& params) const
{
    if (params.scenario != scenario_)
        throw ValidationError("channel parameters and codebook belong to different scenarios");

    Eigen::Matrix4d F = Eigen::Matrix4d::Zero();
    const cplx beta = params.beta;

    if (scenario_ == Scenario::NearField)
    {
        const Eigen::MatrixXcd W = nf_derivative_basis(geom_, params.first, params.theta);
        const Eigen::MatrixXcd S = W.adjoint() * zeta_;
        for (Eigen::Index t = 0; t < S.cols(); ++t)
            accumulate_outer(F, {beta * S(1, t), beta * S(2, t), S(0, t), kJ * S(0, t)});
        mirror_upper(F);
        return F;
    }

    Eigen::MatrixXcd W(geom_.M, 2);
    W.col(0) = ff_steering(geom_, params.theta);
    W.col(1) = ff_steering_derivative(geom_, params.theta, setup_.ff_form);
    const Eigen::MatrixXcd S = W.adjoint() * zeta_;

    const int N = setup_.num_subcarriers;
    const int K = setup_.half_band();
    const auto T = static_cast<Eigen::Index>(slots_);
    for (Eigen::Index t = 0; t < T; ++t)
    {
        for (int k = 0; k < N; ++k)
        {
            const int n = k - K;
            const Eigen::Index col = frequency_flat_ ? t : t * N + k;
            const double omega_n = 2.0 * kPi * n * setup_.delta_f;
            const cplx rot = std::exp(-kJ * (omega_n * params.first));
            const cplx s = rot * S(0, col);
            const cplx sd = rot * S(1, col);
            accumulate_outer(F, {-kJ * omega_n * beta * s, beta * sd, s, kJ * s});
        }
    }
    mirror_upper(F);
    return F;
}

Eigen::Matrix4d fim_channel(const SystemGeometry& geom, const SignalSetup& setup, const Codebook& codebook,
                            const ChannelParams& params)
{
    const FisherEngine engine(geom, codebook, setup);
    return engine.prefactor() * engine.information(params);
}

// ---------------------------------------------------------------------------

std::array<const char*, 4> channel_parameter_names(Scenario scenario)
{
    if (scenario == Scenario::NearField)
        return {"r", "theta", "re_beta", "im_beta"};
    return {"tau", "theta", "re_beta", "im_beta"};
}

InverseInformation invert_information(const Eigen::Matrix4d& F, const std::array<const char*, 4>& names,
                                      InversionPolicy policy)
{
    if (!F.allFinite())
        throw NumericalError("information matrix has non-finite entries");
    const Eigen::Matrix4d Fs = 0.5 * (F + F.transpose());

    InverseInformation out;
    out.inverse.setZero();
    std::vector<int> idx;
    for (int i = 0; i < 4; ++i)
    {
        out.unidentified[static_cast<std::size_t>(i)] = (Fs.row(i).array() == 0.0).all();
        if (out.unidentified[static_cast<std::size_t>(i)])
        {
            if (policy == InversionPolicy::Strict)
                throw NumericalError(std::string("unidentifiable parameter set: ") +
                                     names[static_cast<std::size_t>(i)] + " carries no information");
            out.inverse(i, i) = std::numeric_limits<double>::infinity();
        }
        else
        {
            idx.push_back(i);
        }
    }
    if (idx.empty())
        return out;

    const auto n = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd R(n, n);
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b)
            R(a, b) = Fs(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);

    Eigen::VectorXd scale(n);
    for (Eigen::Index a = 0; a < n; ++a)
    {
        if (!(R(a, a) > 0.0))
            throw NumericalError(std::string("unidentifiable parameter set: non-positive information for ") +
                                 names[static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])]);
        scale(a) = 1.0 / std::sqrt(R(a, a));
    }
    const Eigen::MatrixXd Rs = scale.asDiagonal() * R * scale.asDiagonal();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Rs);
    if (eig.info() != Eigen::Success)
        throw NumericalError("eigen-decomposition of the information matrix failed");
    const Eigen::VectorXd& lam = eig.eigenvalues();
    const double lmin = lam(0);
    const double lmax = lam(n - 1);
    if (!(lmin > 0.0) || lmax / lmin > kConditionLimit)
    {
        std::ostringstream os;
        os << "unidentifiable parameter set: information matrix is singular or ill-conditioned (condition "
           << (lmin > 0.0 ? lmax / lmin : std::numeric_limits<double>::infinity()) << "); near-null direction "
           << describe_direction(eig.eigenvectors().col(0), idx, names);
        throw NumericalError(os.str());
    }

    const Eigen::MatrixXd inv_scaled = eig.eigenvectors() * lam.cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
    const Eigen::MatrixXd inv = scale.asDiagonal() * inv_scaled * scale.asDiagonal();
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b)
            out.inverse(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]) = inv(a, b);
    return out;
}

Eigen::Vector4d crlb_channel(const Eigen::Matrix4d& F_ch, Scenario scenario, InversionPolicy policy)
{
    const InverseInformation inv = invert_information(F_ch, channel_parameter_names(scenario), policy);
    return inv.inverse.diagonal().cwiseSqrt();
}

Eigen::Matrix4d jacobian(const SystemGeometry& geom, Scenario scenario, const Vec2& p_ue, JacobianSign sign)
{
    const Vec2 d = p_ue - geom.p_ris;
    const double r = d.norm();
    if (r == 0.0)
        throw ValidationError("UE position coincides with the RIS center");

    const double range_scale = scenario == Scenario::FarField ? 1.0 / kSpeedOfLight : 1.0;
    const double angle_sign = sign == JacobianSign::Reference ? 1.0 : -1.0;

    Eigen::Matrix4d J = Eigen::Matrix4d::Zero();
    J(0, 0) = range_scale * d.x() / r;
    J(0, 1) = range_scale * d.y() / r;
    J(1, 0) = angle_sign * -d.y() / (r * r);
    J(1, 1) = angle_sign * d.x() / (r * r);
    J(2, 2) = 1.0;
    J(3, 3) = 1.0;
    return J;
}

Eigen::Matrix4d fim_positional(const Eigen::Matrix4d& F_ch, const Eigen::Matrix4d& J)
{
    return J.transpose() * F_ch * J;
}

double peb(const Eigen::Matrix4d& F_po)
{
    const InverseInformation inv = invert_information(F_po, {"x", "y", "re_beta", "im_beta"});
    return std::sqrt(inv.inverse(0, 0) + inv.inverse(1, 1));
}

FisherReport make_report(Scenario scenario, const Eigen::Matrix4d& F_ch, const Eigen::Matrix4d& J,
                         InversionPolicy policy)
{
    FisherReport rep;
    rep.scenario = scenario;
    rep.F_ch = F_ch;
    rep.J = J;
    rep.F_po = fim_positional(F_ch, J);

    const InverseInformation inv = invert_information(F_ch, channel_parameter_names(scenario), policy);
    rep.crlb = inv.inverse.diagonal().cwiseSqrt();
    if (inv.unidentified[0] || inv.unidentified[1])
        rep.peb = std::numeric_limits<double>::infinity();
    else
        rep.peb = peb(rep.F_po);
    return rep;
}

nlohmann::json report_to_json(const FisherReport& report)
{
    using nlohmann::json;
    auto matrix = [](const Eigen::Matrix4d& m) {
        json rows = json::array();
        for (int i = 0; i < 4; ++i)
            rows.push_back(json::array({m(i, 0), m(i, 1), m(i, 2), m(i, 3)}));
        return rows;
    };
    auto finite_or_null = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };

    const auto names = channel_parameter_names(report.scenario);
    json crlb = json::object();
    for (int i = 0; i < 4; ++i)
        crlb[names[static_cast<std::size_t>(i)]] = finite_or_null(report.crlb(i));

    return json{{"scenario", to_string(report.scenario)},
                {"parameters", json::array({names[0], names[1], names[2], names[3]})},
                {"F_ch", matrix(report.F_ch)},
                {"crlb", crlb},
                {"J", matrix(report.J)},
                {"F_po", matrix(report.F_po)},
                {"peb_m", finite_or_null(report.peb)}};
}

Eigen::MatrixXcd received_signal(const SystemGeometry& geom, const SignalSetup& setup, const Codebook& codebook,
                                 const ChannelParams& params, std::uint64_t seed)
{
    setup.validate(params.scenario);
    if (codebook.scenario != params.scenario)
        throw ValidationError("channel parameters and codebook belong to different scenarios");

    const int N = setup.num_subcarriers;
    const int K = setup.half_band();
    const auto T = static_cast<Eigen::Index>(codebook.size());

    Eigen::VectorXcd a;
    if (params.scenario == Scenario::NearField)
        a = nf_steering(geom, params.first, params.theta);
    else
        a = ff_steering(geom, params.theta);

    std::vector<Eigen::VectorXcd> g(static_cast<std::size_t>(N));
    if (codebook.architecture != Architecture::Aaa)
        for (int k = 0; k < N; ++k)
            g[static_cast<std::size_t>(k)] = bs_ris_channel(geom, k - K, setup.delta_f);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double amp = std::sqrt(setup.power_mw);
    const double noise_std = std::sqrt(0.5 * setup.noise_mw);

    Eigen::MatrixXcd y(T, N);
    for (Eigen::Index t = 0; t < T; ++t)
    {
        const auto ts = static_cast<std::size_t>(t);
        for (int k = 0; k < N; ++k)
        {
            const int n = k - K;
            const Eigen::VectorXcd zeta = codebook.architecture == Architecture::Aaa
                                              ? codebook.beams[ts]
                                              : Eigen::VectorXcd(codebook.matrices[ts].omega() * g[static_cast<std::size_t>(k)]);
            cplx mu = params.beta * a.dot(zeta);
            if (params.scenario == Scenario::FarField)
                mu *= std::exp(-kJ * (2.0 * kPi * params.first * n * setup.delta_f));
            const double wr = normal(rng);
            const double wi = normal(rng);
            y(t, k) = amp * mu + noise_std * cplx(wr, wi);
        }
    }
    return y;
}

} // namespace bdloc
