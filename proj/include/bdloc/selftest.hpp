// SPDX-License-Identifier: Apache-2.0
//
// Built-in verification: analytical signal derivatives against central finite
// differences, and structural checks on the reference codebooks.
#pragma once

#include "bdloc/fisher.hpp"
#include "bdloc/geometry.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace bdloc {

struct SelftestCheck
{
    std::string name;
    bool passed = false;
    double worst = 0;      // largest observed error
    double tolerance = 0;
};

struct SelftestReport
{
    std::vector<SelftestCheck> checks;
    bool passed() const;
};

struct DerivativeCheckOptions
{
    int configs = 50;
    std::uint64_t seed = 2024;
    double tolerance = 1e-5;  // relative
    FfDerivativeForm ff_form = FfDerivativeForm::Analytic;
};

// Worst relative error per parameter: NF (r, theta, Re beta, Im beta) then
// FF (tau, theta, Re beta, Im beta), over randomized angles, ranges inside the
// radiative near-field window, subcarrier indices and codewords.
std::array<double, 8> derivative_errors(const SystemGeometry& geom, const DerivativeCheckOptions& options);

std::vector<SelftestCheck> derivative_checks(const SystemGeometry& geom, const DerivativeCheckOptions& options = {});

// Unitarity/symmetry of every BD-RIS codeword and unit modulus of every D-RIS
// codeword for the reference NF and FF grids.
std::vector<SelftestCheck> codebook_checks(const SystemGeometry& geom, int threads = 1);

SelftestReport run_selftest(const SystemGeometry& geom, int threads = 1);

} // namespace bdloc
