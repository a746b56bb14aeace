#include <doctest.h>

#include "gsn/diffgraph.hpp"
#include "gsn/numeric.hpp"
#include "oracles.hpp"

#include <numbers>

using namespace gsn;

TEST_CASE("forward: tanh of zero input is zero") {
  ParameterStore store;
  Graph g(store);
  const NodeId x = g.input("x");
  const NodeId y = g.tanh(x);
  Rng rng(0);
  g.forward({{"x", Matrix::Zero(3, 2)}}, rng);
  CHECK(g.value(y).isZero());
}

TEST_CASE("forward: unbound input and backward-before-forward are errors") {
  ParameterStore store;
  Graph g(store);
  const NodeId x = g.input("x");
  const NodeId loss = g.bernoulli_nll(g.sigmoid(x), x);
  Rng rng(0);
  CHECK_THROWS_AS(g.backward(loss), StateError);
  CHECK_THROWS_AS(g.forward({}, rng), GraphError);
}

TEST_CASE("forward: zero-sigma noise equals the deterministic network; seeds reproduce") {
  ParameterStore store;
  Rng init(3);
  store.add("W", gaussian_noise(init, 4, 3, 1.0));
  store.add("b", gaussian_noise(init, 4, 1, 1.0));
  const Matrix x = gaussian_noise(init, 3, 5, 1.0);

  auto build = [&](double sigma, Graph& g) {
    const NodeId a = g.affine({{g.parameter("W"), g.input("x")}}, g.parameter("b"));
    return g.add_noise(g.tanh(g.add_noise(a, sigma)), sigma);
  };
  Graph quiet(store), plain(store);
  const NodeId q = build(0.0, quiet);
  const NodeId p = plain.tanh(plain.affine({{plain.parameter("W"), plain.input("x")}}, plain.parameter("b")));
  Rng r1(1), r2(2);
  quiet.forward({{"x", x}}, r1);
  plain.forward({{"x", x}}, r2);
  CHECK(quiet.value(q) == plain.value(p));

  Graph n1(store), n2(store);
  const NodeId o1 = build(2.0, n1), o2 = build(2.0, n2);
  Rng s1(77), s2(77);
  n1.forward({{"x", x}}, s1);
  n2.forward({{"x", x}}, s2);
  CHECK(n1.value(o1) == n2.value(o2));
  // Recorded noise replays bit-exactly.
  const Matrix first = n1.value(o1);
  n1.replay({{"x", x}});
  CHECK(n1.value(o1) == first);
}

TEST_CASE("backward: half squared error gives (Wx - y) x^T") {
  ParameterStore store;
  Matrix w(2, 3), x(3, 1), y(2, 1);
  w << 1, -2, 0.5, 0.3, 0.1, -1;
  x << 0.2, -0.7, 1.5;
  y << 0.4, -0.1;
  store.add("W", w);
  Graph g(store);
  const NodeId out = g.affine({{g.parameter("W"), g.input("x")}});
  const NodeId loss = g.gaussian_nll(out, g.input("y"), 1.0);
  Rng rng(0);
  g.forward({{"x", x}, {"y", y}}, rng);
  const auto grads = g.backward(loss);
  const Matrix expected = (w * x - y) * x.transpose();
  CHECK((grads.at("W") - expected).cwiseAbs().maxCoeff() < 1e-14);
  // The loss carries the Gaussian normalizer on top of the half squared error.
  CHECK(g.scalar(loss) == doctest::Approx(0.5 * (w * x - y).squaredNorm() + std::log(2.0 * std::numbers::pi)));
}

namespace {

// Two noisy layers with a tied decoder, a sampled intermediate and two losses.
struct NoisyNet {
  ParameterStore store;
  Matrix x;

  NoisyNet() {
    Rng rng(5);
    store.add("W1", gaussian_noise(rng, 5, 6, 0.4));
    store.add("W2", gaussian_noise(rng, 4, 5, 0.4));
    store.add("b0", gaussian_noise(rng, 6, 1, 0.1));
    store.add("b1", gaussian_noise(rng, 5, 1, 0.1));
    store.add("b2", gaussian_noise(rng, 4, 1, 0.1));
    store.tie_transpose("W1^T", "W1");
    store.tie_transpose("W2^T", "W2");
    x = bernoulli_sample(rng, Matrix::Constant(6, 3, 0.5));
  }

  NodeId build(Graph& g) const {
    const NodeId in = g.input("x");
    const NodeId w1 = g.parameter("W1"), w2 = g.parameter("W2"), w1t = g.parameter("W1^T"), w2t = g.parameter("W2^T");
    const NodeId b0 = g.parameter("b0"), b1 = g.parameter("b1"), b2 = g.parameter("b2");
    const NodeId h1 = g.tanh(g.affine({{w1, g.salt_and_pepper(in, 0.3)}}, b1));
    const NodeId h2 = g.add_noise(g.tanh(g.add_noise(g.affine({{w2, h1}}, b2), 2.0)), 2.0);
    const NodeId h1b = g.tanh(g.affine({{w1, in}, {w2t, h2}}, b1));
    const NodeId p1 = g.sigmoid(g.affine({{w1t, h1b}}, b0));
    const NodeId sample = g.sample_bernoulli(p1);
    const NodeId h1c = g.tanh(g.affine({{w1, sample}, {w2t, h2}}, b1));
    const NodeId p2 = g.sigmoid(g.affine({{w1t, h1c}}, b0));
    return g.sum({g.bernoulli_nll(p1, in), g.bernoulli_nll(p2, in)});
  }
};

}  // namespace

TEST_CASE("backward: every parameter matches central differences with noise frozen") {
  NoisyNet net;
  Graph g(net.store);
  const NodeId loss = net.build(g);
  Rng rng(9);
  g.forward({{"x", net.x}}, rng);
  const auto grads = g.backward(loss);

  for (const auto& name : net.store.names()) {
    Matrix& param = net.store.owned(name);
    const Matrix numeric = oracle::central_difference(param, [&] {
      g.replay({{"x", net.x}});
      return g.scalar(loss);
    });
    CAPTURE(name);
    CHECK(oracle::max_relative_error(grads.at(name), numeric) < 1e-4);
  }
}

TEST_CASE("backward: tied transpose equals the summed gradients of an untied copy") {
  ParameterStore tied, untied;
  Rng rng(12);
  const Matrix w = gaussian_noise(rng, 3, 4, 0.5);
  const Matrix x = gaussian_noise(rng, 4, 2, 1.0);
  const Matrix target = bernoulli_sample(rng, Matrix::Constant(4, 2, 0.5));
  tied.add("W", w);
  tied.tie_transpose("Wt", "W");
  untied.add("W", w);
  untied.add("V", w.transpose());

  auto build = [&](Graph& g, const char* down) {
    const NodeId in = g.input("x");
    const NodeId h = g.tanh(g.affine({{g.parameter("W"), in}}));
    return g.bernoulli_nll(g.sigmoid(g.affine({{g.parameter(down), h}})), g.input("t"));
  };
  Graph gt(tied), gu(untied);
  const NodeId lt = build(gt, "Wt"), lu = build(gu, "V");
  Rng r(0);
  gt.forward({{"x", x}, {"t", target}}, r);
  gu.forward({{"x", x}, {"t", target}}, r);
  const auto grad_tied = gt.backward(lt);
  const auto grad_untied = gu.backward(lu);
  CHECK(grad_tied.count("Wt") == 0);
  const Matrix summed = grad_untied.at("W") + grad_untied.at("V").transpose();
  CHECK((grad_tied.at("W") - summed).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("sample-detach blocks gradients entirely") {
  ParameterStore store;
  store.add("W", Matrix::Constant(2, 2, 0.3));
  Graph g(store);
  const NodeId x = g.input("x");
  const NodeId a = g.affine({{g.parameter("W"), x}});
  const NodeId p = g.sigmoid(a);
  const NodeId s = g.detach(p);
  const NodeId loss = g.bernoulli_nll(g.sigmoid(s), g.input("t"));
  Rng rng(0);
  g.forward({{"x", Matrix::Ones(2, 1)}, {"t", Matrix::Zero(2, 1)}}, rng);
  const auto grads = g.backward(loss);
  CHECK(g.gradient(p).isZero());
  CHECK(g.gradient(a).isZero());
  CHECK(grads.at("W").isZero());
  CHECK_FALSE(g.gradient(s).isZero());
}

TEST_CASE("bernoulli_nll after a sigmoid: logit gradient is sigmoid(a) - t, also when saturated") {
  ParameterStore store;
  store.add("a", Matrix::Zero(4, 1));
  Matrix a(4, 1), t(4, 1);
  a << -0.7, 1.3, 50.0, -60.0;
  t << 1.0, 0.0, 0.0, 1.0;
  store.owned("a") = a;
  Graph g(store);
  const NodeId loss = g.bernoulli_nll(g.sigmoid(g.parameter("a")), g.input("t"));
  Rng rng(0);
  g.forward({{"t", t}}, rng);
  const Matrix grad = g.backward(loss).at("a");
  // d/da of softplus(a) - t a.
  for (Index i = 0; i < 4; ++i) CHECK(std::abs(grad(i, 0) - (1.0 / (1.0 + std::exp(-a(i, 0))) - t(i, 0))) < 1e-12);
  CHECK(grad(2, 0) == doctest::Approx(1.0));
  CHECK(grad(3, 0) == doctest::Approx(-1.0));

  // Away from the clamp it is the derivative of the loss as evaluated.
  Matrix inner = a.topRows(2);
  ParameterStore small;
  small.add("a", inner);
  Graph h(small);
  const NodeId l2 = h.bernoulli_nll(h.sigmoid(h.parameter("a")), h.input("t"));
  const InputMap in{{"t", t.topRows(2)}};
  h.forward(in, rng);
  const Matrix analytic = h.backward(l2).at("a");
  const Matrix numeric = oracle::central_difference(small.owned("a"), [&] {
    h.replay(in);
    return h.scalar(l2);
  });
  CHECK(oracle::max_relative_error(analytic, numeric) < 1e-7);
}

TEST_CASE("bernoulli_nll: n log 2, clamp floor, direct-sum oracle, shape errors") {
  ParameterStore store;
  {
    Graph g(store);
    const NodeId loss = g.bernoulli_nll(g.input("p"), g.input("t"));
    Rng rng(0);
    g.forward({{"p", Matrix::Constant(7, 1, 0.5)}, {"t", Matrix::Constant(7, 1, 0.5)}}, rng);
    CHECK(g.scalar(loss) == doctest::Approx(7.0 * std::log(2.0)).epsilon(1e-14));

    Matrix p(2, 1), t(2, 1);
    p << 0.0, 1.0;
    t << 1.0, 0.0;
    g.forward({{"p", p}, {"t", t}}, rng);
    CHECK(std::isfinite(g.scalar(loss)));
    CHECK(g.scalar(loss) == doctest::Approx(-2.0 * std::log(kLogClamp)));
    g.forward({{"p", t}, {"t", t}}, rng);
    CHECK(g.scalar(loss) == doctest::Approx(-2.0 * std::log1p(-kLogClamp)));
  }
  {
    Rng rng(31);
    const Matrix p = (gaussian_noise(rng, 6, 4, 1.0).array().abs() / 4.0).min(0.99).max(0.01).matrix();
    Matrix t(6, 4);
    for (Index i = 0; i < t.size(); ++i) t.data()[i] = rng.uniform();
    Graph g(store);
    const NodeId loss = g.bernoulli_nll(g.input("p"), g.input("t"));
    g.forward({{"p", p}, {"t", t}}, rng);
    CHECK(std::abs(g.scalar(loss) - oracle::bernoulli_nll_direct(p, t)) < 1e-12);

    Graph bad(store);
    const NodeId l2 = bad.bernoulli_nll(bad.input("p"), bad.input("t"));
    CHECK_THROWS_AS(bad.forward({{"p", p}, {"t", Matrix::Zero(2, 2)}}, rng), ShapeError);
    (void)l2;
  }
}

TEST_CASE("parameter store: aliases, duplicates, unknown names") {
  ParameterStore store;
  store.add("W", Matrix::Identity(2, 3));
  store.tie_transpose("Wt", "W");
  CHECK(store.value("Wt").rows() == 3);
  CHECK(store.owner_of("Wt") == "W");
  CHECK(store.names().size() == 1);
  CHECK_THROWS_AS(store.add("W", Matrix::Zero(1, 1)), GraphError);
  CHECK_THROWS_AS(store.tie_transpose("X", "missing"), GraphError);
  Graph g(store);
  CHECK_THROWS_AS(g.parameter("missing"), GraphError);
}
