// SPDX-License-Identifier: Apache-2.0

#include "bdloc/codebook.hpp"
#include "bdloc/channel.hpp"
#include "bdloc/errors.hpp"
#include "parallel.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>
#include <numbers>
#include <string>

namespace bdloc {

namespace {

constexpr cplx kJ{0.0, 1.0};

// Relative gap below which neighbouring singular values are treated as one
// cluster, and relative level below which a singular value counts as zero.
constexpr double kClusterTolerance = 1e-8;
constexpr double kRankTolerance = 1e-12;

constexpr double kUnitNormTolerance = 1e-10;
constexpr double kUnitaryTolerance = 1e-10;
constexpr double kSymmetryTolerance = 1e-12;

void require_unit_norm(const Eigen::VectorXcd& v, const char* name)
{
    if (std::abs(v.norm() - 1.0) > kUnitNormTolerance)
        throw ValidationError(std::string(name) + " must have unit norm (|" + name + "| = " +
                              std::to_string(v.norm()) + ")");
}

void require_same_size(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b)
{
    if (a.size() != b.size() || a.size() == 0)
        throw ValidationError("u_T and u_R must be non-empty and of equal length");
}

double max_abs(const Eigen::MatrixXcd& m)
{
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

// Symmetric unitary W = P P^T with P unitary. Re W and Im W are real symmetric
// and commute, so one real orthogonal basis diagonalizes both.
Eigen::MatrixXcd symmetric_unitary_root(const Eigen::MatrixXcd& W)
{
    const Eigen::MatrixXcd Ws = 0.5 * (W + W.transpose());
    const Eigen::MatrixXd mix = Ws.real() + (1.0 / std::numbers::sqrt3 + 0.1234) * Ws.imag();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(mix);
    if (eig.info() != Eigen::Success)
        throw NumericalError("eigen-decomposition failed in Takagi cluster");
    const Eigen::MatrixXcd O = eig.eigenvectors().cast<cplx>();
    const Eigen::MatrixXcd D = O.transpose() * Ws * O;
    Eigen::VectorXcd half(D.rows());
    for (Eigen::Index i = 0; i < D.rows(); ++i)
        half(i) = std::exp(kJ * (0.5 * std::arg(D(i, i))));
    return O * half.asDiagonal();
}

// Takagi factorization K = Q diag(sigma) Q^T of a small complex symmetric
// matrix from its SVD. Singular vectors are phase-aligned one by one; clusters
// of equal singular values take a symmetric unitary root of U_c^H conj(V_c).
void dense_takagi(const Eigen::MatrixXcd& K, Eigen::VectorXd& sigma, Eigen::MatrixXcd& Q)
{
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(K, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::MatrixXcd& U = svd.matrixU();
    const Eigen::MatrixXcd& V = svd.matrixV();
    sigma = svd.singularValues();

    const Eigen::Index n = K.rows();
    const double top = sigma(0);
    if (!(top > 0.0))
        throw NumericalError("Takagi construction on a zero matrix");

    Q = U;
    Eigen::Index i = 0;
    while (i < n)
    {
        Eigen::Index j = i + 1;
        if (sigma(i) > kRankTolerance * top)
            while (j < n && sigma(j) > kRankTolerance * top && sigma(i) - sigma(j) <= kClusterTolerance * top)
                ++j;

        if (j - i == 1)
        {
            // nu_i = [U^H V^*]_ii, phi_i = arg(nu_i)/2, with arg(0) = 0
            const cplx nu = U.col(i).dot(V.col(i).conjugate());
            const double phi = nu == cplx(0.0) ? 0.0 : 0.5 * std::arg(nu);
            Q.col(i) = U.col(i) * std::exp(kJ * phi);
        }
        else
        {
            const Eigen::MatrixXcd W = U.middleCols(i, j - i).adjoint() * V.middleCols(i, j - i).conjugate();
            Q.middleCols(i, j - i) = U.middleCols(i, j - i) * symmetric_unitary_root(W);
        }
        i = j;
    }
}

} // namespace

std::string_view to_string(Architecture arch)
{
    switch (arch)
    {
    case Architecture::BdRis:
        return "bd-ris";
    case Architecture::DRis:
        return "d-ris";
    case Architecture::Aaa:
        return "aaa";
    }
    return "unknown";
}

std::string_view to_string(Scenario scenario)
{
    return scenario == Scenario::NearField ? "nf" : "ff";
}

Architecture parse_architecture(std::string_view text)
{
    for (Architecture a : kAllArchitectures)
        if (text == to_string(a))
            return a;
    throw ValidationError("unknown architecture '" + std::string(text) + "' (expected bd-ris, d-ris or aaa)");
}

Scenario parse_scenario(std::string_view text)
{
    if (text == "nf")
        return Scenario::NearField;
    if (text == "ff")
        return Scenario::FarField;
    throw ValidationError("unknown scenario '" + std::string(text) + "' (expected nf or ff)");
}

// ---------------------------------------------------------------------------

PhaseShiftMatrix::PhaseShiftMatrix(Eigen::MatrixXcd omega, Architecture arch, std::size_t defaulted)
    : omega_(std::move(omega)), arch_(arch), defaulted_phases_(defaulted)
{
}

PhaseShiftMatrix PhaseShiftMatrix::fully_connected(Eigen::MatrixXcd omega)
{
    if (omega.rows() != omega.cols() || omega.rows() == 0)
        throw ValidationError("phase shift matrix must be square and non-empty");
    return PhaseShiftMatrix(std::move(omega), Architecture::BdRis, 0);
}

PhaseShiftMatrix PhaseShiftMatrix::diagonal(const Eigen::VectorXcd& entries, std::size_t defaulted_phases)
{
    if (entries.size() == 0)
        throw ValidationError("phase shift matrix must be non-empty");
    Eigen::MatrixXcd omega = entries.asDiagonal();
    return PhaseShiftMatrix(std::move(omega), Architecture::DRis, defaulted_phases);
}

double PhaseShiftMatrix::unitarity_error() const
{
    const auto n = omega_.rows();
    return max_abs(omega_.adjoint() * omega_ - Eigen::MatrixXcd::Identity(n, n));
}

double PhaseShiftMatrix::symmetry_error() const
{
    return max_abs(omega_ - omega_.transpose());
}

double PhaseShiftMatrix::diagonal_unit_modulus_error() const
{
    double err = 0.0;
    for (Eigen::Index i = 0; i < omega_.rows(); ++i)
        for (Eigen::Index k = 0; k < omega_.cols(); ++k)
            err = std::max(err, i == k ? std::abs(std::abs(omega_(i, k)) - 1.0) : std::abs(omega_(i, k)));
    return err;
}

// ---------------------------------------------------------------------------

std::size_t reference_codebook_size(Scenario scenario)
{
    return scenario == Scenario::NearField ? 500 : 100;
}

std::vector<double> inclusive_range(double first, double step, double last)
{
    if (!(step > 0.0))
        throw ValidationError("grid step must be positive");
    if (last < first)
        throw ValidationError("grid end lies before grid start");
    const auto intervals = static_cast<long>(std::floor((last - first) / step + 1e-9));
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(intervals) + 1);
    for (long k = 0; k <= intervals; ++k)
        values.push_back(first + static_cast<double>(k) * step);
    return values;
}

std::vector<SweepTarget> sweep_grid(const SystemGeometry& geom, Scenario scenario, const GridSpec& spec)
{
    if (!(spec.delta_theta_deg > 0.0))
        throw ValidationError("codebook.delta_theta_deg must be positive");
    const std::vector<double> angles_deg = inclusive_range(0.0, spec.delta_theta_deg, 180.0);

    std::vector<SweepTarget> targets;
    if (scenario == Scenario::NearField)
    {
        if (!(spec.rho_min > geom.fresnel_inner()))
            throw ValidationError("codebook.rho_min must exceed 0.62 sqrt(D^3/lambda) = " +
                                  std::to_string(geom.fresnel_inner()) + " m");
        if (!(spec.rho_max < geom.fraunhofer()))
            throw ValidationError("codebook.rho_max must be below 2 D^2/lambda = " +
                                  std::to_string(geom.fraunhofer()) + " m");
        if (!(spec.delta_r > 0.0))
            throw ValidationError("codebook.delta_r must be positive");
        for (double r : inclusive_range(spec.rho_min, spec.delta_r, spec.rho_max))
            for (double a : angles_deg)
                targets.push_back({a * std::numbers::pi / 180.0, r});
    }
    else
    {
        for (double a : angles_deg)
            targets.push_back({a * std::numbers::pi / 180.0, std::nullopt});
    }

    if (spec.mode == GridMode::Truncate)
    {
        if (spec.truncate_to == 0)
            throw ValidationError("codebook.T must be positive in truncate mode");
        if (spec.truncate_to < targets.size())
            targets.resize(spec.truncate_to);
    }
    return targets;
}

// ---------------------------------------------------------------------------

TakagiFactors takagi_factors(const Eigen::VectorXcd& u_T, const Eigen::VectorXcd& u_R)
{
    require_same_size(u_T, u_R);
    require_unit_norm(u_T, "u_T");
    require_unit_norm(u_R, "u_R");

    const Eigen::MatrixXcd outer = u_R * u_T.adjoint();
    TakagiFactors out;
    out.A = outer + outer.transpose();

    // A = B S B^T with B = [u_R, conj(u_T)] and S = [[0, 1], [1, 0]]. With
    // B = H [R; 0] the problem reduces to the 2x2 matrix K = R S R^T, and the
    // remaining columns of H complete Q to a unitary basis of the null space.
    const Eigen::Index n = out.A.rows();
    Eigen::MatrixXcd B(n, 2);
    B.col(0) = u_R;
    B.col(1) = u_T.conjugate();
    const Eigen::HouseholderQR<Eigen::MatrixXcd> qr(B);
    const Eigen::Index k = std::min<Eigen::Index>(n, 2);
    const Eigen::MatrixXcd R = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    Eigen::Matrix2cd S;
    S << 0.0, 1.0, 1.0, 0.0;
    const Eigen::MatrixXcd K = R * S * R.transpose();

    Eigen::VectorXd sigma_k;
    Eigen::MatrixXcd V;
    dense_takagi(K, sigma_k, V);

    out.sigma = Eigen::VectorXd::Zero(n);
    out.sigma.head(k) = sigma_k;
    out.Q = Eigen::MatrixXcd::Identity(n, n);
    out.Q.topLeftCorner(k, k) = V;
    out.Q.applyOnTheLeft(qr.householderQ());

    const double q_err = max_abs(out.Q.adjoint() * out.Q - Eigen::MatrixXcd::Identity(n, n));
    if (q_err > kUnitaryTolerance)
        throw NumericalError("Takagi factor Q lost unitarity (error " + std::to_string(q_err) + ")");
    return out;
}

PhaseShiftMatrix takagi_codeword(const Eigen::VectorXcd& u_T, const Eigen::VectorXcd& u_R)
{
    const TakagiFactors f = takagi_factors(u_T, u_R);
    PhaseShiftMatrix omega = PhaseShiftMatrix::fully_connected(f.Q * f.Q.transpose());
    if (omega.unitarity_error() > kUnitaryTolerance || omega.symmetry_error() > kSymmetryTolerance)
        throw NumericalError("Takagi codeword violates the unitary/symmetric constraints");
    return omega;
}

PhaseShiftMatrix dris_codeword(const Eigen::VectorXcd& u_T, const Eigen::VectorXcd& u_R)
{
    require_same_size(u_T, u_R);
    require_unit_norm(u_T, "u_T");
    require_unit_norm(u_R, "u_R");

    Eigen::VectorXcd diag(u_T.size());
    std::size_t defaulted = 0;
    for (Eigen::Index m = 0; m < u_T.size(); ++m)
    {
        const cplx p = u_T(m) * std::conj(u_R(m));
        if (p == cplx(0.0))
        {
            diag(m) = 1.0;
            ++defaulted;
        }
        else
        {
            diag(m) = std::exp(-kJ * std::arg(p));
        }
    }
    return PhaseShiftMatrix::diagonal(diag, defaulted);
}

Eigen::VectorXcd aaa_codeword(const Eigen::VectorXcd& u_R)
{
    require_unit_norm(u_R, "u_R");
    return u_R;
}

Eigen::VectorXcd target_steering(const SystemGeometry& geom, Scenario scenario, const SweepTarget& target)
{
    if (scenario == Scenario::NearField)
    {
        if (!target.range)
            throw ValidationError("near-field target needs a range");
        return nf_steering(geom, *target.range, target.theta);
    }
    return ff_steering(geom, target.theta);
}

Eigen::VectorXcd transmit_direction(const SystemGeometry& geom)
{
    const Eigen::VectorXcd g0 = bs_ris_channel(geom, 0, 1.0);
    return g0 / g0.norm();
}

std::size_t Codebook::defaulted_phases() const
{
    std::size_t total = 0;
    for (const auto& m : matrices)
        total += m.defaulted_phases();
    return total;
}

Codebook build_codebook(const SystemGeometry& geom, Scenario scenario, Architecture arch,
                        const std::vector<SweepTarget>& targets, int threads)
{
    if (targets.empty())
        throw ValidationError("codebook needs at least one target");

    Codebook cb;
    cb.architecture = arch;
    cb.scenario = scenario;
    cb.M = geom.M;
    cb.targets = targets;

    if (arch == Architecture::Aaa)
    {
        cb.beams.resize(targets.size());
        detail::parallel_for(targets.size(), threads, [&](std::size_t t) {
            cb.beams[t] = aaa_codeword(target_steering(geom, scenario, targets[t]));
        });
        return cb;
    }

    const Eigen::VectorXcd u_T = transmit_direction(geom);
    std::vector<std::optional<PhaseShiftMatrix>> slots(targets.size());
    detail::parallel_for(targets.size(), threads, [&](std::size_t t) {
        const Eigen::VectorXcd u_R = target_steering(geom, scenario, targets[t]);
        slots[t] = arch == Architecture::BdRis ? takagi_codeword(u_T, u_R) : dris_codeword(u_T, u_R);
    });
    cb.matrices.reserve(slots.size());
    for (auto& s : slots)
        cb.matrices.push_back(std::move(*s));
    return cb;
}

Codebook build_codebook(const SystemGeometry& geom, Scenario scenario, Architecture arch, const GridSpec& spec,
                        int threads)
{
    return build_codebook(geom, scenario, arch, sweep_grid(geom, scenario, spec), threads);
}

nlohmann::json codebook_to_json(const Codebook& codebook)
{
    using nlohmann::json;
    json targets = json::array();
    for (const auto& t : codebook.targets)
    {
        json entry = {{"theta_rad", t.theta}, {"theta_deg", t.theta * 180.0 / std::numbers::pi}};
        entry["range_m"] = t.range ? json(*t.range) : json(nullptr);
        targets.push_back(std::move(entry));
    }

    auto pair = [](const cplx& z) { return json::array({z.real(), z.imag()}); };

    json codewords = json::array();
    if (codebook.architecture == Architecture::Aaa)
    {
        for (const auto& f : codebook.beams)
        {
            json v = json::array();
            for (Eigen::Index i = 0; i < f.size(); ++i)
                v.push_back(pair(f(i)));
            codewords.push_back(std::move(v));
        }
    }
    else
    {
        for (const auto& m : codebook.matrices)
        {
            json rows = json::array();
            for (Eigen::Index r = 0; r < m.omega().rows(); ++r)
            {
                json row = json::array();
                for (Eigen::Index c = 0; c < m.omega().cols(); ++c)
                    row.push_back(pair(m.omega()(r, c)));
                rows.push_back(std::move(row));
            }
            codewords.push_back(std::move(rows));
        }
    }

    return json{{"architecture", to_string(codebook.architecture)},
                {"scenario", to_string(codebook.scenario)},
                {"M", codebook.M},
                {"size", codebook.size()},
                {"layout", codebook.architecture == Architecture::Aaa ? "vector" : "row-major"},
                {"defaulted_phases", codebook.defaulted_phases()},
                {"targets", std::move(targets)},
                {"codewords", std::move(codewords)}};
}

} // namespace bdloc
