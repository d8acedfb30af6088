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

#include "nuvdoa/scoring.hpp"
#include "nuvdoa/common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace nuvdoa
{

MatchResult match_and_score(const std::vector<double> &estimates_deg, const std::vector<double> &truth_deg)
{
    const auto k = truth_deg.size();
    if (estimates_deg.size() != k)
        throw DomainError("match_and_score: estimate and truth counts differ");
    if (k > 8)
        throw DomainError("match_and_score: at most 8 sources");

    for (std::size_t i = 0; i < k; ++i)
        if (!std::isfinite(estimates_deg[i]) || !std::isfinite(truth_deg[i]))
            throw DomainError("match_and_score: angles must be finite");

    MatchResult out;
    if (k == 0)
        return out;

    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double cost = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            const double d = estimates_deg[perm[i]] - truth_deg[i];
            cost += d * d;
        }
        if (cost < best) {
            best = cost;
            out.assignment = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));

    out.errors_deg.resize(k);
    for (std::size_t i = 0; i < k; ++i)
        out.errors_deg[i] = estimates_deg[out.assignment[i]] - truth_deg[i];
    out.rmse_deg = std::sqrt(best / static_cast<double>(k));
    return out;
}

double median(std::vector<double> values)
{
    if (values.empty())
        return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    const auto n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

} // namespace nuvdoa
