// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "fblab/dataset.hpp"
#include "fblab/model.hpp"

namespace fblab::testing {

/// A tiny MLP over random gaussian features with random labels.
struct NetFixture {
  ModelSpec spec;
  std::shared_ptr<const Dataset> data;
  std::unique_ptr<MlpObjective> obj;
  ParamVector params;
  std::vector<std::size_t> all;
};

NetFixture make_net(std::uint64_t seed, std::vector<std::size_t> widths, std::size_t n,
                    Activation act = Activation::tanh,
                    Normalization norm = Normalization::none, LossConfig loss = {});

/// Five or more varied nets, every one at most 512 parameters.
std::vector<NetFixture> tiny_net_suite(std::uint64_t seed, std::size_t count = 6);

Dataset random_dataset(std::uint64_t seed, std::size_t n, std::size_t dim, std::size_t classes);

struct QuadFixture {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> a;  // rows x cols
  std::vector<double> b;
  std::unique_ptr<QuadraticObjective> obj;
  std::vector<double> theta;
  std::vector<std::size_t> all;
};

QuadFixture make_quadratic(std::uint64_t seed, std::size_t rows, std::size_t cols);

}  // namespace fblab::testing
