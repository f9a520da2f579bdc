// Copyright (c) 2026 The Karaoker Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

// Independent reference computations used to check library results.

#include <torch/torch.h>

#include <functional>
#include <vector>

namespace karaoker::testing {

// Max |analytic - numeric| over all inputs, divided by max |numeric|
// (floored at 1e-6). Central differences with step `h` at double precision;
// `f` maps the listed inputs to a scalar.
using ScalarFn = std::function<torch::Tensor(const std::vector<torch::Tensor>&)>;
double GradientRelativeError(const ScalarFn& f, std::vector<torch::Tensor> inputs, double h = 1e-6);

// Hard DTW by enumerating every monotonic path (steps right, down, diagonal).
double BruteForceDtw(const std::vector<double>& a, const std::vector<double>& b);
// -gamma * log(sum over every path of exp(-cost / gamma)).
double BruteForceSoftDtw(const std::vector<double>& a, const std::vector<double>& b, double gamma);

}  // namespace karaoker::testing
