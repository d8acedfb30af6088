// SPDX-License-Identifier: Apache-2.0
//
// nuvdoa: sparse Bayesian direction-of-arrival estimation for uniform linear arrays
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "nuvdoa/superres.hpp"
#include "nuvdoa/parallel.hpp"

#include <cmath>
#include <mutex>
#include <sstream>

namespace nuvdoa
{

SubBandPlan plan_subbands(double scan_lo, double scan_hi, double fine_step, double alpha,
                          const UlaGeometry & /*geometry*/)
{
    if (!(fine_step > 0.0))
        throw DomainError("plan_subbands: fine_step must be positive");
    if (alpha < fine_step)
        throw DomainError("plan_subbands: alpha must be >= fine_step");

    SubBandPlan plan;
    plan.scan_grid = build_band_grid(scan_lo, scan_hi, fine_step);
    plan.alpha = alpha;

    const long half = std::lround(alpha / fine_step);
    plan.bands.reserve(plan.scan_grid.size());
    for (double center : plan.scan_grid.values()) {
        long lo = -half;
        while (center + static_cast<double>(lo) * fine_step < -kHalfPi)
            ++lo;
        long hi = half;
        while (center + static_cast<double>(hi) * fine_step >= kHalfPi)
            --hi;
        SubBand band;
        band.center = center;
        band.half_width = alpha;
        band.grid = AngleGrid(center + static_cast<double>(lo) * fine_step, fine_step,
                              static_cast<std::size_t>(hi - lo + 1));
        band.center_index = static_cast<std::size_t>(-lo);
        plan.bands.push_back(std::move(band));
    }
    return plan;
}

double solve_subband(const SubBand &band, const SufficientStatistic &stat, const SolverConfig &config,
                     const UlaGeometry &geometry)
{
    const auto dict = build_dictionary(band.grid, geometry);
    try {
        const auto result = solve(dict, stat, config);
        return std::abs(result.moments.mean[static_cast<Eigen::Index>(band.center_index)]);
    } catch (const NumericalError &e) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "sub-band centred at " << rad_to_deg(band.center) << " deg: " << e.what();
        throw NumericalError(msg.str());
    }
}

Spectrum superres_scan(const SubBandPlan &plan, const SufficientStatistic &stat,
                       const SolverConfig &config, const UlaGeometry &geometry, int workers)
{
    if (plan.bands.size() != plan.scan_grid.size())
        throw DomainError("superres_scan: plan has one band per scan point");

    Spectrum out{std::vector<double>(plan.bands.size(), 0.0), plan.scan_grid};
    std::vector<std::string> errors(plan.bands.size());
    parallel_for(plan.bands.size(), workers, [&](std::size_t i) {
        try {
            out.values[i] = solve_subband(plan.bands[i], stat, config, geometry);
        } catch (const NumericalError &e) {
            errors[i] = e.what();
        }
    });

    std::vector<double> failed;
    std::ostringstream msg;
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (errors[i].empty())
            continue;
        failed.push_back(plan.bands[i].center);
        msg << (failed.size() == 1 ? "" : "; ") << errors[i];
    }
    if (!failed.empty())
        throw SubBandFailure(std::move(failed), "superres_scan: " + msg.str());
    return out;
}

} // namespace nuvdoa
