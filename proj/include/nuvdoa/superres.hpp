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

// Super-resolution by spatial filtering: every output angle of a fine scan
// gets its own small sparse-recovery problem over the +-alpha neighbourhood
// around it, and only the centre atom of that local solution is kept.

#ifndef NUVDOA_SUPERRES_HPP
#define NUVDOA_SUPERRES_HPP

#include "nuvdoa/nuv_ssr.hpp"

#include <string>
#include <vector>

namespace nuvdoa
{

struct SubBand
{
    double center = 0.0;
    double half_width = 0.0;
    AngleGrid grid;
    std::size_t center_index = 0;
};

struct SubBandPlan
{
    AngleGrid scan_grid;
    double alpha = 0.0;
    std::vector<SubBand> bands;
};

/// Thrown by superres_scan; carries every band that failed, not just the first.
class SubBandFailure : public NumericalError
{
public:
    SubBandFailure(std::vector<double> centers, const std::string &what)
        : NumericalError(what), centers_(std::move(centers))
    {
    }

    const std::vector<double> &centers() const { return centers_; }

private:
    std::vector<double> centers_;
};

/// One band per scan point; band grids are center + k*fine_step for
/// |k| <= round(alpha/fine_step), truncated (not wrapped) at the azimuth ends.
SubBandPlan plan_subbands(double scan_lo, double scan_hi, double fine_step, double alpha,
                          const UlaGeometry &geometry);

/// Solves the band-local problem and returns |E x| at the band centre.
double solve_subband(const SubBand &band, const SufficientStatistic &stat,
                     const SolverConfig &config, const UlaGeometry &geometry);

/// Assembles the fine spectrum over plan.scan_grid. Bands are independent and
/// are spread over `workers` threads; the result does not depend on scheduling.
Spectrum superres_scan(const SubBandPlan &plan, const SufficientStatistic &stat,
                       const SolverConfig &config, const UlaGeometry &geometry, int workers = 1);

inline PeakSelection detect_fine(const Spectrum &spec, const PeakRule &rule)
{
    return select_peaks(spec, rule);
}

} // namespace nuvdoa

#endif
