#include <doctest.h>

#include <cmath>
#include <fstream>

#include "daa/model.hpp"
#include "unit/test_support.hpp"

using namespace daa;
using daa::test::close;
using daa::test::random_classifier;
using daa::test::random_labels;
using daa::test::random_tensor;

namespace {

// Straight-line evaluation, independent of the library's batched kernels.
std::vector<double> reference_logits(const Classifier& c, std::span<const double> x) {
  std::vector<double> a(x.begin(), x.end());
  for (const auto& layer : c.layers()) {
    std::vector<double> z(layer.out);
    for (std::size_t u = 0; u < layer.out; ++u) {
      double s = layer.bias[u];
      for (std::size_t i = 0; i < layer.in; ++i) s += layer.weights[u * layer.in + i] * a[i];
      z[u] = layer.activation == Activation::relu ? std::max(0.0, s) : s;
    }
    a = std::move(z);
  }
  return a;
}

Classifier identity_classifier(std::size_t k) {
  DenseLayer l(k, k, Activation::identity);
  for (std::size_t i = 0; i < k; ++i) l.weights[i * k + i] = 1.0;
  return Classifier({l});
}

void check_close_tensor(const Tensor& analytic, const Tensor& numeric, double rel, double abs) {
  REQUIRE(analytic.same_shape(numeric));
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    CAPTURE(i);
    CHECK(close(analytic[i], numeric[i], rel, abs));
  }
}

}  // namespace

TEST_CASE("forward") {
  SUBCASE("zero network gives zero logits") {
    Classifier c({DenseLayer(4, 3, Activation::relu), DenseLayer(3, 2, Activation::identity)});
    CHECK(forward(c, random_tensor({5, 4}, 1)) == Tensor({5, 2}));
  }
  SUBCASE("identity architecture passes inputs through") {
    const Tensor x = random_tensor({3, 4}, 2);
    CHECK(forward(identity_classifier(4), x) == x);
  }
  SUBCASE("random two-layer net matches a straight-line reference") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto c = random_classifier(13, {9}, 4, seed);
      const Tensor x = random_tensor({7, 13}, 100 + seed);
      const Tensor z = forward(c, x);
      for (std::size_t r = 0; r < 7; ++r) {
        const auto ref = reference_logits(c, x.row(r));
        for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(z.at(r, k) - ref[k]) <= 1e-12);
      }
    }
  }
  SUBCASE("rows are evaluated independently of their batch") {
    const auto c = random_classifier(10, {8, 6}, 3, 9);
    const Tensor x = random_tensor({9, 10}, 10);
    const Tensor z = forward(c, x);
    for (std::size_t r = 0; r < 9; ++r) {
      const std::size_t idx[1] = {r};
      CHECK(forward(c, x.gather_rows(idx)).row(0)[0] == z.at(r, 0));
    }
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(forward(random_classifier(4, {3}, 2, 1), Tensor({2, 5})), std::invalid_argument);
  }
}

TEST_CASE("predict is argmax of logits") {
  const auto c = random_classifier(6, {5}, 4, 3);
  const Tensor x = random_tensor({20, 6}, 4);
  CHECK(predict(c, x) == argmax_rows(forward(c, x)));
  CHECK(argmax_rows(Tensor({1, 3}, {1.0, 2.0, 2.0})) == std::vector<int>{1});
}

TEST_CASE("loss_per_sample") {
  SUBCASE("uniform logits give ln K") {
    const auto l = loss_per_sample(Tensor({2, 5}, 0.7), std::vector<int>{0, 3}, LossKind::cross_entropy());
    CHECK(l[0] == doctest::Approx(std::log(5.0)).epsilon(1e-14));
    CHECK(l[1] == doctest::Approx(std::log(5.0)).epsilon(1e-14));
  }
  SUBCASE("cw margin clamps at -kappa") {
    const Tensor z({1, 2}, {5.0, 0.0});
    CHECK(loss_per_sample(z, std::vector<int>{0}, LossKind::cw(0.0))[0] == 0.0);
    CHECK(loss_per_sample(z, std::vector<int>{0}, LossKind::cw(2.0))[0] == -2.0);
    CHECK(loss_per_sample(z, std::vector<int>{0}, LossKind::cw(5.0))[0] == -5.0);
    CHECK(loss_per_sample(z, std::vector<int>{0}, LossKind::cw(9.0))[0] == -5.0);
    CHECK(loss_per_sample(z, std::vector<int>{1}, LossKind::cw(0.0))[0] == 5.0);
  }
  SUBCASE("cross entropy equals -z_y + logsumexp(z)") {
    const Tensor z = random_tensor({10, 6}, 5, -4.0, 4.0);
    const auto y = random_labels(10, 6, 5);
    const auto l = loss_per_sample(z, y, LossKind::cross_entropy());
    for (std::size_t r = 0; r < 10; ++r) {
      double s = 0.0;
      for (double v : z.row(r)) s += std::exp(v);
      CHECK(std::abs(l[r] - (std::log(s) - z.at(r, static_cast<std::size_t>(y[r])))) <= 1e-10);
    }
  }
  SUBCASE("cross entropy stays finite for logits near 1e3") {
    const Tensor z({2, 3}, {1000.0, -1000.0, 0.0, -1000.0, 1000.0, 999.0});
    const auto l = loss_per_sample(z, std::vector<int>{1, 0}, LossKind::cross_entropy());
    CHECK(std::isfinite(l[0]));
    CHECK(std::isfinite(l[1]));
    CHECK(l[0] == doctest::Approx(2000.0));
  }
  SUBCASE("label out of range") {
    CHECK_THROWS_AS(loss_per_sample(Tensor({1, 3}), std::vector<int>{3}, LossKind::cross_entropy()),
                    std::out_of_range);
    CHECK_THROWS_AS(loss_per_sample(Tensor({1, 3}), std::vector<int>{-1}, LossKind::cw()), std::out_of_range);
  }
}

TEST_CASE("input_gradient") {
  SUBCASE("zero network has zero gradient") {
    Classifier c({DenseLayer(4, 3, Activation::relu), DenseLayer(3, 2, Activation::identity)});
    CHECK(input_gradient(c, random_tensor({3, 4}, 1), std::vector<int>{0, 1, 1}, LossKind::cross_entropy()) ==
          Tensor({3, 4}));
  }
  SUBCASE("cw gradient is the difference of the two selected logit gradients") {
    // Linear model: d z_k / d x = W_k, so the gradient must be W_runnerup - W_label.
    DenseLayer l(3, 4, Activation::identity);
    CounterRng rng(RngSeed{8}, 0);
    for (double& w : l.weights) w = 2.0 * rng.next_unit() - 1.0;
    const Classifier c({l});
    const Tensor x({1, 3}, {0.2, -0.4, 0.9});
    const auto z = forward(c, x);
    const int label = 2;
    int ru = -1;
    for (int k = 0; k < 4; ++k) {
      if (k != label && (ru < 0 || z.at(0, static_cast<std::size_t>(k)) > z.at(0, static_cast<std::size_t>(ru)))) ru = k;
    }
    const Tensor g = input_gradient(c, x, std::vector<int>{label}, LossKind::cw(100.0));
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(g.at(0, i) == doctest::Approx(l.weights[static_cast<std::size_t>(ru) * 3 + i] - l.weights[2 * 3 + i]));
    }
  }
  SUBCASE("cw runner-up ties break toward the lowest index") {
    const Tensor x({1, 3}, {1.0, 1.0, 0.0});
    const Tensor g = input_gradient(identity_classifier(3), x, std::vector<int>{2}, LossKind::cw());
    CHECK(g == Tensor({1, 3}, {1.0, 0.0, -1.0}));
  }
  SUBCASE("both losses match central differences on random networks") {
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
      for (auto kind : {LossKind::cross_entropy(), LossKind::cw(0.5)}) {
        const auto c = random_classifier(6, {7, 5}, 4, seed);
        const Tensor x = random_tensor({3, 6}, 50 + seed);
        const auto y = random_labels(3, 4, seed);
        const Tensor g = input_gradient(c, x, y, kind);
        for (std::size_t r = 0; r < 3; ++r) {
          const std::size_t idx[1] = {r};
          const std::vector<int> yr = {y[r]};
          const auto f = [&](const Tensor& row) { return loss_per_sample(forward(c, row), yr, kind)[0]; };
          const Tensor num = finite_difference_gradient(f, x.gather_rows(idx), 1e-6);
          check_close_tensor(g.gather_rows(idx), num, 1e-4, 1e-7);
        }
      }
    }
  }
}

TEST_CASE("parameter_gradient") {
  SUBCASE("zero inputs and zero biases give zero first-layer weight gradient") {
    auto c = random_classifier(5, {4}, 3, 2);
    auto p = c.parameters();
    for (std::size_t i = 20; i < 24; ++i) p[i] = 0.0;  // first-layer bias
    c.set_parameters(p);
    const auto g = parameter_gradient(c, Tensor({3, 5}), std::vector<int>{0, 1, 2}, LossKind::cross_entropy());
    for (std::size_t i = 0; i < 20; ++i) CHECK(g[i] == 0.0);
  }
  SUBCASE("matches central differences on every parameter") {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      for (auto kind : {LossKind::cross_entropy(), LossKind::cw(0.25)}) {
        const auto c = random_classifier(4, {5}, 3, 10 + seed);
        const Tensor x = random_tensor({4, 4}, 60 + seed);
        const auto y = random_labels(4, 3, seed + 3);
        const auto g = parameter_gradient(c, x, y, kind);
        const auto mean_loss = [&](const Tensor& flat) {
          Classifier probe = c;
          probe.set_parameters(flat.values());
          const auto l = loss_per_sample(forward(probe, x), y, kind);
          double s = 0.0;
          for (double v : l) s += v;
          return s / static_cast<double>(l.size());
        };
        const auto p = c.parameters();
        const Tensor num = finite_difference_gradient(mean_loss, Tensor({p.size()}, p), 1e-6);
        check_close_tensor(Tensor({g.size()}, g), num, 1e-4, 1e-7);
      }
    }
  }
  SUBCASE("duplicated rows give the same mean gradient") {
    const auto c = random_classifier(6, {5}, 3, 4);
    const Tensor x = random_tensor({1, 6}, 70);
    const std::size_t twice[2] = {0, 0};
    const auto g1 = parameter_gradient(c, x, std::vector<int>{1}, LossKind::cross_entropy());
    const auto g2 = parameter_gradient(c, x.gather_rows(twice), std::vector<int>{1, 1}, LossKind::cross_entropy());
    CHECK(g1 == g2);
  }
}

TEST_CASE("classifier construction") {
  CHECK_THROWS_AS(Classifier({DenseLayer(4, 3, Activation::relu), DenseLayer(2, 2, Activation::identity)}),
                  std::invalid_argument);
  DenseLayer bad(2, 2, Activation::identity);
  bad.weights[0] = NAN;
  CHECK_THROWS_AS(Classifier({bad}), std::invalid_argument);
  const std::size_t hidden[2] = {256, 128};
  const auto ref = Classifier::make_mlp(784, hidden, 10, RngSeed{1});
  CHECK(ref.input_dim() == 784);
  CHECK(ref.num_classes() == 10);
  CHECK(ref.parameter_count() == 784 * 256 + 256 + 256 * 128 + 128 + 128 * 10 + 10);
}

TEST_CASE("checkpoints") {
  const auto c = random_classifier(9, {7, 5}, 3, 21);
  const auto path = daa::test::temp_path("model.daaf");
  save_checkpoint(c, path);

  SUBCASE("round trip is bit exact") {
    const auto back = load_checkpoint(path);
    CHECK(back == c);
    const Tensor probe = random_tensor({6, 9}, 22);
    CHECK(forward(back, probe) == forward(c, probe));
    CHECK(encode_checkpoint(back) == encode_checkpoint(c));
  }
  SUBCASE("corrupted magic") {
    auto bytes = encode_checkpoint(c);
    bytes[1] = 'X';
    try {
      decode_checkpoint(bytes);
      FAIL("expected an error");
    } catch (const CheckpointError& e) {
      CHECK(e.kind() == CheckpointError::Kind::bad_magic);
    }
  }
  SUBCASE("version bump") {
    auto bytes = encode_checkpoint(c);
    bytes[4] = static_cast<std::uint8_t>(kCheckpointVersion + 1);
    try {
      decode_checkpoint(bytes);
      FAIL("expected an error");
    } catch (const CheckpointError& e) {
      CHECK(e.kind() == CheckpointError::Kind::version_mismatch);
    }
  }
  SUBCASE("truncation at every length is an error, never a crash") {
    const auto bytes = encode_checkpoint(c);
    for (std::size_t len = 0; len < bytes.size(); len += 7) {
      CHECK_THROWS_AS(decode_checkpoint(std::span(bytes).first(len)), CheckpointError);
    }
  }
  SUBCASE("architecture mismatch") {
    const auto other = random_classifier(9, {6, 5}, 3, 21);
    try {
      load_checkpoint(path, other);
      FAIL("expected an error");
    } catch (const CheckpointError& e) {
      CHECK(e.kind() == CheckpointError::Kind::architecture_mismatch);
    }
    auto bytes = encode_checkpoint(c);
    bytes[12] = 8;  // input width no longer matches the parameter count
    try {
      decode_checkpoint(bytes);
      FAIL("expected an error");
    } catch (const CheckpointError& e) {
      CHECK(e.kind() == CheckpointError::Kind::architecture_mismatch);
    }
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(load_checkpoint(daa::test::temp_path("absent.daaf")), CheckpointError); }
}
