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


#include "objectives/soft_dtw.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "common/error.hpp"

namespace karaoker::objectives {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double SoftMin3(double a, double b, double c, double gamma) {
  const double lo = std::min({a, b, c});
  if (lo == kInf) return kInf;
  const double s = std::exp(-(a - lo) / gamma) + std::exp(-(b - lo) / gamma) +
                   std::exp(-(c - lo) / gamma);
  return lo - gamma * std::log(s);
}

// R is (n + 1) x (m + 1), row-major, R[0][0] = 0.
struct Table {
  int64_t n, m, width;
  std::vector<double> r;
  double& at(int64_t i, int64_t j) { return r[static_cast<size_t>(i * (m + 1) + j)]; }
  bool in_band(int64_t i, int64_t j) const { return std::abs(i - j) <= width; }
};

Table Forward(const double* d, int64_t n, int64_t m, double gamma, int64_t width) {
  Table t{n, m, width, std::vector<double>(static_cast<size_t>((n + 1) * (m + 1)), kInf)};
  t.at(0, 0) = 0.0;
  for (int64_t i = 1; i <= n; ++i) {
    for (int64_t j = 1; j <= m; ++j) {
      if (!t.in_band(i, j)) continue;
      t.at(i, j) = d[(i - 1) * m + (j - 1)] +
                   SoftMin3(t.at(i - 1, j - 1), t.at(i - 1, j), t.at(i, j - 1), gamma);
    }
  }
  return t;
}

class SoftDtwFunction : public torch::autograd::Function<SoftDtwFunction> {
 public:
  static torch::Tensor forward(torch::autograd::AutogradContext* ctx, torch::Tensor cost,
                               double gamma, int64_t width) {
    auto d = cost.detach().to(torch::kCPU, torch::kFloat64).contiguous();
    const int64_t n = d.size(0);
    const int64_t m = d.size(1);
    auto table = Forward(d.data_ptr<double>(), n, m, gamma, width);
    const double value = table.at(n, m);
    Require(std::isfinite(value), "soft-DTW produced a non-finite cost", ErrorCode::kNumeric);
    auto r = torch::from_blob(table.r.data(), {n + 1, m + 1}, torch::kFloat64).clone();
    ctx->save_for_backward({d, r});
    ctx->saved_data["gamma"] = gamma;
    ctx->saved_data["width"] = width;
    ctx->saved_data["dtype"] = static_cast<int64_t>(cost.scalar_type());
    return torch::tensor(value, torch::kFloat64).to(cost.options());
  }

  static torch::autograd::variable_list backward(torch::autograd::AutogradContext* ctx,
                                                 torch::autograd::variable_list grad_out) {
    const auto saved = ctx->get_saved_variables();
    const auto& d = saved[0];
    const auto& r_t = saved[1];
    const double gamma = ctx->saved_data["gamma"].toDouble();
    const int64_t width = ctx->saved_data["width"].toInt();
    const int64_t n = d.size(0);
    const int64_t m = d.size(1);
    const double* dp = d.data_ptr<double>();
    const double* rp = r_t.data_ptr<double>();
    auto R = [&](int64_t i, int64_t j) { return rp[i * (m + 1) + j]; };
    auto D = [&](int64_t i, int64_t j) { return dp[(i - 1) * m + (j - 1)]; };
    auto in_band = [&](int64_t i, int64_t j) { return std::abs(i - j) <= width; };

    // E[i][j] = dR[n][m] / dR[i][j], 1-based.
    std::vector<double> e(static_cast<size_t>((n + 2) * (m + 2)), 0.0);
    auto E = [&](int64_t i, int64_t j) -> double& { return e[static_cast<size_t>(i * (m + 2) + j)]; };
    E(n, m) = 1.0;
    for (int64_t i = n; i >= 1; --i) {
      for (int64_t j = m; j >= 1; --j) {
        if ((i == n && j == m) || !in_band(i, j) || !std::isfinite(R(i, j))) continue;
        double acc = 0.0;
        auto pull = [&](int64_t i2, int64_t j2) {
          if (i2 > n || j2 > m || !in_band(i2, j2) || E(i2, j2) == 0.0) return;
          acc += E(i2, j2) * std::exp((R(i2, j2) - R(i, j) - D(i2, j2)) / gamma);
        };
        pull(i + 1, j);
        pull(i, j + 1);
        pull(i + 1, j + 1);
        E(i, j) = acc;
      }
    }
    auto grad = torch::empty({n, m}, torch::kFloat64);
    double* gp = grad.data_ptr<double>();
    for (int64_t i = 1; i <= n; ++i) {
      for (int64_t j = 1; j <= m; ++j) gp[(i - 1) * m + (j - 1)] = E(i, j);
    }
    const auto dtype = static_cast<c10::ScalarType>(ctx->saved_data["dtype"].toInt());
    grad = grad.to(grad_out[0].device(), dtype) * grad_out[0];
    return {grad, torch::Tensor(), torch::Tensor()};
  }
};

torch::Tensor AsMatrix(const torch::Tensor& x) {
  Require(x.dim() == 1 || x.dim() == 2, "soft-DTW: sequences must be [n] or [n, d]");
  Require(x.size(0) > 0, "soft-DTW: empty input");
  return x.dim() == 1 ? x.unsqueeze(1) : x;
}

}  // namespace

int64_t SoftDtwBandWidth(int64_t n, int64_t m, double band) {
  if (band <= 0.0) return n + m;
  const auto w = static_cast<int64_t>(std::ceil(band * static_cast<double>(std::max(n, m))));
  return std::max(w, std::abs(n - m));
}

torch::Tensor SoftDtwFromCost(const torch::Tensor& cost, const SoftDtwOptions& opts) {
  Require(cost.dim() == 2 && cost.size(0) > 0 && cost.size(1) > 0, "soft-DTW: empty input");
  Require(opts.gamma > 0.0, "soft-DTW: gamma must be positive");
  return SoftDtwFunction::apply(cost, opts.gamma,
                                SoftDtwBandWidth(cost.size(0), cost.size(1), opts.band));
}

torch::Tensor SquaredDistance(const torch::Tensor& a, const torch::Tensor& b) {
  const auto x = AsMatrix(a);
  const auto y = AsMatrix(b);
  Require(x.size(1) == y.size(1), "soft-DTW: feature dimensions differ");
  return (x.unsqueeze(1) - y.unsqueeze(0)).pow(2).sum(-1);
}

torch::Tensor SoftDtw(const torch::Tensor& a, const torch::Tensor& b, const SoftDtwOptions& opts) {
  return SoftDtwFromCost(SquaredDistance(a, b), opts);
}

torch::Tensor SoftDtwDivergence(const torch::Tensor& a, const torch::Tensor& b,
                                const SoftDtwOptions& opts) {
  return SoftDtw(a, b, opts) - 0.5 * (SoftDtw(a, a, opts) + SoftDtw(b, b, opts));
}

}  // namespace karaoker::objectives
