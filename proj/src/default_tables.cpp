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

// Calibrated for N = 16, L = 100 and one noncoherent source with DoA uniform
// in [-75, 75] deg:
//   epsilon: coarse stage, 0.1 deg grid, 200 trials per SNR
//            (configs/calibrate_epsilon.json -> data/error_table.json);
//   sigma2:  nuv_ssr_flat on the 1800-cell grid, 40 trials per SNR
//            (configs/calibrate_sigma2.json -> data/sigma2_table.json).
// Regenerate with `nuvdoa calibrate`.

#include "nuvdoa/harness.hpp"

namespace nuvdoa
{

const ErrorStdTable &default_error_table()
{
    static const ErrorStdTable table(std::vector<ErrorStdEntry>{
        // snr_db, epsilon (rad), trials, low_confidence
        {-10.0, deg_to_rad(52.702140391179626), 200, false},
        {-5.0, deg_to_rad(40.88113054810816), 200, false},
        {0.0, deg_to_rad(29.373715105158812), 200, false},
        {5.0, deg_to_rad(17.438194834823072), 200, false},
        {10.0, deg_to_rad(0.03694786906408656), 200, false},
        {15.0, deg_to_rad(0.020757756848098673), 200, false},
        {20.0, deg_to_rad(0.011673918673252827), 200, false},
        {25.0, deg_to_rad(0.006566298790363489), 200, false},
        {30.0, deg_to_rad(0.00369322203535353), 200, false},
    });
    return table;
}

const Sigma2Table &default_sigma2_table()
{
    static const Sigma2Table table(std::vector<Sigma2Entry>{
        // snr_db, sigma2
        {-10.0, 10000.0},
        {-5.0, 10000.0},
        {0.0, 300.0},
        {5.0, 10000.0},
        {10.0, 100.0},
        {15.0, 800.0},
        {20.0, 100.0},
    });
    return table;
}

} // namespace nuvdoa
