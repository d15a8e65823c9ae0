// SPDX-License-Identifier: Apache-2.0

#include "bdloc/channel.hpp"
#include "bdloc/codebook.hpp"
#include "bdloc/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace bdloc;

namespace {

constexpr double kPi = std::numbers::pi;

SystemGeometry table_geometry() { return SystemGeometry::make(101, 28e9, 0.5, 0.5); }

Eigen::VectorXcd random_unit(std::mt19937_64& rng, int M)
{
    std::normal_distribution<double> n;
    Eigen::VectorXcd v(M);
    for (int i = 0; i < M; ++i)
        v(i) = cplx(n(rng), n(rng));
    return v / v.norm();
}

double gain(const Eigen::VectorXcd& u_R, const Eigen::MatrixXcd& omega, const Eigen::VectorXcd& u_T)
{
    return std::abs(u_R.dot(omega * u_T));
}

} // namespace

TEST_SUITE("codebook")
{
    TEST_CASE("sweep grids")
    {
        const SystemGeometry g = table_geometry();
        GridSpec spec;
        const auto nf = sweep_grid(g, Scenario::NearField, spec);
        CHECK(nf.size() == 505);
        CHECK(*nf.front().range == 5.0);
        CHECK(nf.front().theta == 0.0);
        CHECK(*nf[101].range == 15.0);
        CHECK(nf[100].theta == doctest::Approx(kPi));
        CHECK(*nf.back().range == 45.0);

        const auto ff = sweep_grid(g, Scenario::FarField, spec);
        CHECK(ff.size() == 101);
        CHECK_FALSE(ff.front().range.has_value());

        spec.delta_theta_deg = 90.0;
        const auto three = sweep_grid(g, Scenario::FarField, spec);
        REQUIRE(three.size() == 3);
        CHECK(three[1].theta == doctest::Approx(kPi / 2));
        CHECK(three[2].theta == doctest::Approx(kPi));

        GridSpec trunc;
        trunc.mode = GridMode::Truncate;
        trunc.truncate_to = reference_codebook_size(Scenario::NearField);
        const auto t = sweep_grid(g, Scenario::NearField, trunc);
        CHECK(t.size() == 500);
        CHECK(*t.back().range == 45.0);
        trunc.truncate_to = reference_codebook_size(Scenario::FarField);
        CHECK(sweep_grid(g, Scenario::FarField, trunc).size() == 100);

        GridSpec bad;
        bad.rho_min = 2.0;
        CHECK_THROWS_AS(sweep_grid(g, Scenario::NearField, bad), ValidationError);
        bad = GridSpec{};
        bad.rho_max = 60.0;
        CHECK_THROWS_AS(sweep_grid(g, Scenario::NearField, bad), ValidationError);
        bad = GridSpec{};
        bad.delta_theta_deg = 0.0;
        CHECK_THROWS_AS(sweep_grid(g, Scenario::FarField, bad), ValidationError);
    }

    TEST_CASE("Takagi codeword on random inputs")
    {
        std::mt19937_64 rng(11);
        for (int trial = 0; trial < 20; ++trial)
        {
            const int M = trial < 10 ? 101 : 2 + trial;
            const Eigen::VectorXcd u_T = random_unit(rng, M);
            const Eigen::VectorXcd u_R = random_unit(rng, M);
            const TakagiFactors f = takagi_factors(u_T, u_R);
            const Eigen::MatrixXcd rebuilt = f.Q * f.sigma.cast<cplx>().asDiagonal() * f.Q.transpose();
            CHECK((rebuilt - f.A).cwiseAbs().maxCoeff() < 1e-9);

            const Eigen::MatrixXcd outer = u_R * u_T.adjoint();
            CHECK((f.A - outer - outer.transpose()).cwiseAbs().maxCoeff() < 1e-15);

            const PhaseShiftMatrix w = takagi_codeword(u_T, u_R);
            const Eigen::MatrixXcd& O = w.omega();
            CHECK((O.adjoint() * O - Eigen::MatrixXcd::Identity(M, M)).cwiseAbs().maxCoeff() < 1e-10);
            CHECK((O - O.transpose()).cwiseAbs().maxCoeff() < 1e-12);
            CHECK(gain(u_R, O, u_T) >= 1.0 - 1e-8);
            CHECK(gain(u_R, O, u_T) >= gain(u_R, dris_codeword(u_T, u_R).omega(), u_T) - 1e-12);

            for (int k = 0; k < 5; ++k)
            {
                const Eigen::VectorXcd x = random_unit(rng, M) * 3.0;
                CHECK((O * x).norm() == doctest::Approx(x.norm()).epsilon(1e-10));
            }
        }
    }

    TEST_CASE("Takagi codeword with equal inputs")
    {
        const int M = 101;
        const Eigen::VectorXcd u = Eigen::VectorXcd::Constant(M, 1.0 / std::sqrt(double(M)));
        const PhaseShiftMatrix w = takagi_codeword(u, u);
        CHECK(gain(u, w.omega(), u) == doctest::Approx(1.0).epsilon(1e-10));
    }

    TEST_CASE("Takagi codeword, two elements")
    {
        Eigen::VectorXcd e1(2), e2(2);
        e1 << 1.0, 0.0;
        e2 << 0.0, 1.0;
        const Eigen::MatrixXcd O = takagi_codeword(e1, e2).omega();
        // A = [[0, 1], [1, 0]]: Omega must send e1 onto e2 with a unit-modulus factor.
        CHECK(std::abs(O(1, 0)) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(O(0, 0)) < 1e-12);
        CHECK(std::abs(O(1, 1)) < 1e-12);
    }

    TEST_CASE("Takagi codeword, degenerate singular values")
    {
        std::mt19937_64 rng(5);
        const Eigen::VectorXcd u_T = random_unit(rng, 16);
        // u_R = conj(u_T) makes A rank one.
        const PhaseShiftMatrix w = takagi_codeword(u_T, u_T.conjugate());
        CHECK(w.unitarity_error() < 1e-10);
        CHECK(gain(u_T.conjugate(), w.omega(), u_T) >= 1.0 - 1e-8);

        // u_R orthogonal to conj(u_T) in the bilinear sense gives two equal singular values.
        Eigen::VectorXcd a = Eigen::VectorXcd::Zero(4), b = Eigen::VectorXcd::Zero(4);
        a(0) = 1.0;
        b(1) = 1.0;
        const PhaseShiftMatrix w2 = takagi_codeword(a, b);
        CHECK(w2.unitarity_error() < 1e-10);
        CHECK(gain(b, w2.omega(), a) >= 1.0 - 1e-8);
    }

    TEST_CASE("non-unit inputs are rejected")
    {
        const Eigen::VectorXcd u = Eigen::VectorXcd::Ones(4);
        CHECK_THROWS_AS(takagi_codeword(u, u), ValidationError);
        CHECK_THROWS_AS(dris_codeword(u, u), ValidationError);
        CHECK_THROWS_AS(aaa_codeword(u), ValidationError);
    }

    TEST_CASE("D-RIS codeword")
    {
        std::mt19937_64 rng(2);
        const Eigen::VectorXcd u = random_unit(rng, 31);
        const PhaseShiftMatrix same = dris_codeword(u, u);
        CHECK((same.omega() - Eigen::MatrixXcd::Identity(31, 31)).cwiseAbs().maxCoeff() < 1e-12);

        const Eigen::VectorXcd v = random_unit(rng, 31);
        const PhaseShiftMatrix w = dris_codeword(u, v);
        CHECK(w.diagonal_unit_modulus_error() < 1e-12);
        for (int m = 0; m < 31; ++m)
            CHECK(std::abs(w.omega()(m, m) - std::exp(cplx(0, -std::arg(u(m) * std::conj(v(m)))))) < 1e-12);
        CHECK(w.defaulted_phases() == 0);

        Eigen::VectorXcd z = u;
        z(3) = 0.0;
        z(7) = 0.0;
        z /= z.norm();
        const PhaseShiftMatrix d = dris_codeword(z, v);
        CHECK(d.defaulted_phases() == 2);
        CHECK(d.omega()(3, 3) == cplx(1.0));
    }

    TEST_CASE("active array codeword")
    {
        const SystemGeometry g = table_geometry();
        const Eigen::VectorXcd f = aaa_codeword(ff_steering(g, kPi / 2));
        CHECK(f.norm() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK((f - Eigen::VectorXcd::Constant(101, 1.0 / std::sqrt(101.0))).cwiseAbs().maxCoeff() < 1e-14);

        const double target = 1.1;
        const Eigen::VectorXcd beam = aaa_codeword(ff_steering(g, target));
        double best = -1, best_theta = 0;
        const int points = 20001;
        for (int i = 0; i < points; ++i)
        {
            const double th = kPi * i / (points - 1);
            const double p = std::norm(ff_steering(g, th).dot(beam));
            if (p > best)
            {
                best = p;
                best_theta = th;
            }
        }
        CHECK(std::abs(best_theta - target) <= kPi / (points - 1));
    }

    TEST_CASE("reference codebooks")
    {
        const SystemGeometry g = table_geometry();
        const GridSpec spec;
        const Codebook bd = build_codebook(g, Scenario::FarField, Architecture::BdRis, spec);
        const Codebook d = build_codebook(g, Scenario::FarField, Architecture::DRis, spec);
        REQUIRE(bd.size() == 101);
        REQUIRE(bd.matrices.size() == 101);
        REQUIRE(d.size() == bd.size());
        const Eigen::VectorXcd g0 = bs_ris_channel(g, 0, 1.0);
        const Eigen::VectorXcd u_T = g0 / g0.norm();
        for (std::size_t t = 0; t < bd.size(); ++t)
        {
            CHECK(bd.targets[t].theta == d.targets[t].theta);
            CHECK(bd.matrices[t].unitarity_error() < 1e-10);
            CHECK(bd.matrices[t].symmetry_error() < 1e-12);
            const Eigen::VectorXcd u_R = ff_steering(g, bd.targets[t].theta);
            CHECK(gain(u_R, bd.matrices[t].omega(), u_T) >= gain(u_R, d.matrices[t].omega(), u_T) - 1e-12);
        }

        SystemGeometry far = SystemGeometry::make(101, 28e9, 0.5, 50.0);
        const Codebook a1 = build_codebook(g, Scenario::FarField, Architecture::Aaa, spec);
        const Codebook a2 = build_codebook(far, Scenario::FarField, Architecture::Aaa, spec);
        for (std::size_t t = 0; t < a1.size(); ++t)
            CHECK((a1.beams[t] - a2.beams[t]).cwiseAbs().maxCoeff() == 0.0);
    }

    TEST_CASE("parallel build matches serial build")
    {
        const SystemGeometry g = SystemGeometry::make(21, 28e9, 0.5, 0.5);
        GridSpec spec;
        spec.delta_theta_deg = 15.0;
        const Codebook a = build_codebook(g, Scenario::FarField, Architecture::BdRis, spec, 1);
        const Codebook b = build_codebook(g, Scenario::FarField, Architecture::BdRis, spec, 3);
        REQUIRE(a.size() == b.size());
        for (std::size_t t = 0; t < a.size(); ++t)
            CHECK((a.matrices[t].omega() - b.matrices[t].omega()).cwiseAbs().maxCoeff() == 0.0);
    }

    TEST_CASE("JSON export")
    {
        const SystemGeometry g = SystemGeometry::make(4, 28e9, 0.5, 0.5);
        GridSpec spec;
        spec.delta_theta_deg = 90.0;
        const Codebook cb = build_codebook(g, Scenario::FarField, Architecture::BdRis, spec);
        const nlohmann::json j = codebook_to_json(cb);
        CHECK(j["architecture"] == "bd-ris");
        CHECK(j["scenario"] == "ff");
        CHECK(j["size"] == 3);
        REQUIRE(j["codewords"].size() == 3);
        const auto& first = j["codewords"][0];
        REQUIRE(first.size() == 4);
        REQUIRE(first[1].size() == 4);
        CHECK(first[1][2][0].get<double>() == cb.matrices[0].omega()(1, 2).real());
        CHECK(first[1][2][1].get<double>() == cb.matrices[0].omega()(1, 2).imag());
        CHECK(j["targets"][1]["theta_deg"].get<double>() == doctest::Approx(90.0));
        CHECK(j["targets"][1]["range_m"].is_null());

        const Codebook aaa = build_codebook(g, Scenario::FarField, Architecture::Aaa, spec);
        const nlohmann::json ja = codebook_to_json(aaa);
        CHECK(ja["codewords"][2].size() == 4);
    }
}
