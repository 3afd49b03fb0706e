// SPDX-License-Identifier: Apache-2.0
#include "fixtures.hpp"

#include <random>

namespace fblab::testing {

Dataset random_dataset(std::uint64_t seed, std::size_t n, std::size_t dim, std::size_t classes) {
  std::mt19937_64 rng(seed * 7919 + 17);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> label(0, static_cast<int>(classes) - 1);
  Dataset ds;
  ds.dim = dim;
  ds.classes = classes;
  ds.features.resize(n * dim);
  ds.labels.resize(n);
  for (auto& v : ds.features) v = normal(rng);
  for (auto& l : ds.labels) l = label(rng);
  ds.source_seed = seed;
  return ds;
}

NetFixture make_net(std::uint64_t seed, std::vector<std::size_t> widths, std::size_t n,
                    Activation act, Normalization norm, LossConfig loss) {
  NetFixture f;
  f.spec.layer_widths = std::move(widths);
  f.spec.activation = act;
  f.spec.normalization = norm;
  f.spec.init_seed = seed;
  f.data = std::make_shared<const Dataset>(
      random_dataset(seed, n, f.spec.input_dim(), f.spec.classes()));
  Mlp model(f.spec);
  f.params = model.init();
  f.obj = std::make_unique<MlpObjective>(std::move(model), f.data, loss);
  f.all = all_indices(n);
  return f;
}

std::vector<NetFixture> tiny_net_suite(std::uint64_t seed, std::size_t count) {
  const std::vector<std::vector<std::size_t>> shapes{
      {2, 4, 2}, {3, 5, 3}, {2, 6, 4, 2}, {4, 8, 3}, {5, 10, 10, 4}, {3, 7, 2}};
  std::vector<NetFixture> out;
  for (std::size_t i = 0; i < count; ++i) {
    const auto act = i % 2 == 0 ? Activation::tanh : Activation::relu;
    out.push_back(make_net(seed + i, shapes[i % shapes.size()], 8 + 2 * i, act));
  }
  return out;
}

QuadFixture make_quadratic(std::uint64_t seed, std::size_t rows, std::size_t cols) {
  QuadFixture q;
  q.rows = rows;
  q.cols = cols;
  std::mt19937_64 rng(seed + 101);
  std::normal_distribution<double> normal(0.0, 1.0);
  q.a.resize(rows * cols);
  q.b.resize(rows);
  q.theta.resize(cols);
  for (auto& v : q.a) v = normal(rng);
  for (auto& v : q.b) v = normal(rng);
  for (auto& v : q.theta) v = normal(rng);
  q.obj = std::make_unique<QuadraticObjective>(rows, cols, q.a, q.b);
  q.all = all_indices(rows);
  return q;
}

}  // namespace fblab::testing
