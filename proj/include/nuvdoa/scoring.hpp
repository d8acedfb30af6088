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

#ifndef NUVDOA_SCORING_HPP
#define NUVDOA_SCORING_HPP

#include <cstddef>
#include <vector>

namespace nuvdoa
{

struct MatchResult
{
    /// errors[i] = matched estimate - truth[i], degrees.
    std::vector<double> errors_deg;
    /// assignment[i] = index of the estimate matched to truth[i].
    std::vector<std::size_t> assignment;
    double rmse_deg = 0.0;
};

/// Exhaustive minimum over permutations of the summed squared differences.
/// Angles are not wrapped. Throws DomainError on length mismatch or K > 8.
MatchResult match_and_score(const std::vector<double> &estimates_deg, const std::vector<double> &truth_deg);

double median(std::vector<double> values);

} // namespace nuvdoa

#endif
