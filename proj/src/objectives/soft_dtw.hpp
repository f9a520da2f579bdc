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

#include <torch/torch.h>

namespace karaoker::objectives {

struct SoftDtwOptions {
  double gamma = 0.1;
  // Sakoe-Chiba half-width as a fraction of the longer sequence; the
  // effective width is never below |n - m|. 0 disables the band.
  double band = 0.0;
};

// Soft-DTW over a precomputed cost matrix D [n, m]. Differentiable in D;
// the DP runs in double regardless of the input dtype.
torch::Tensor SoftDtwFromCost(const torch::Tensor& cost, const SoftDtwOptions& opts = {});

// Squared-Euclidean cost between a [n] or [n, d] and b [m] or [m, d].
torch::Tensor SquaredDistance(const torch::Tensor& a, const torch::Tensor& b);

// soft_dtw(a, b) with the squared-distance kernel.
torch::Tensor SoftDtw(const torch::Tensor& a, const torch::Tensor& b, const SoftDtwOptions& opts = {});

// soft_dtw(a, b) - (soft_dtw(a, a) + soft_dtw(b, b)) / 2, nonnegative.
torch::Tensor SoftDtwDivergence(const torch::Tensor& a, const torch::Tensor& b,
                                const SoftDtwOptions& opts = {});

// Effective half-width for lengths n, m (n + m when unbanded).
int64_t SoftDtwBandWidth(int64_t n, int64_t m, double band);

}  // namespace karaoker::objectives
