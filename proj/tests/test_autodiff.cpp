#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "eigengraph/autodiff.hpp"
#include "oracles.hpp"

using namespace eg;

namespace {

// Central finite differences over a tape-building closure for one leaf.
double fd_loss(const std::function<double(const Matrix&)>& loss, Matrix x, std::size_t idx,
               double h) {
  x.v[idx] += h;
  const double up = loss(x);
  x.v[idx] -= 2 * h;
  const double down = loss(x);
  return (up - down) / (2 * h);
}

}  // namespace

TEST_CASE("cross entropy of uniform logits is ln(classes)") {
  Tape tape;
  const Tape::NodeId logits = tape.constant(Matrix(1, 5, 0.7));
  const Tape::NodeId loss = tape.softmax_cross_entropy(logits, {2});
  REQUIRE(tape.value(loss)(0, 0) == Catch::Approx(std::log(5.0)).margin(1e-12));
}

TEST_CASE("cross entropy gradient sums to zero per sample") {
  Rng rng(41);
  Tape tape;
  const Tape::NodeId logits = tape.leaf(oracle::random_matrix(4, 6, rng, 2.0));
  const Tape::NodeId loss = tape.softmax_cross_entropy(logits, {0, 3, 5, 1});
  tape.backward(loss);
  const Matrix& g = tape.grad(logits);
  for (std::size_t r = 0; r < 4; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < 6; ++c) s += g(r, c);
    REQUIRE(std::abs(s) < 1e-12);
  }
}

TEST_CASE("relu routes no gradient through negative inputs") {
  Matrix x(1, 3);
  x(0, 0) = -2.0;
  x(0, 1) = 3.0;
  x(0, 2) = -0.5;
  Tape tape;
  const Tape::NodeId xid = tape.leaf(x);
  const Tape::NodeId r = tape.relu(xid);
  const Tape::NodeId ones = tape.constant(Matrix(3, 1, 1.0));
  const Tape::NodeId s = tape.linear(r, ones);
  tape.backward(s);
  const Matrix& g = tape.grad(xid);
  REQUIRE(g(0, 0) == 0.0);
  REQUIRE(g(0, 1) == 1.0);
  REQUIRE(g(0, 2) == 0.0);
}

TEST_CASE("linear backward equals the transpose action exactly") {
  Rng rng(42);
  const Matrix x = oracle::random_matrix(5, 4, rng);
  const Matrix w = oracle::random_matrix(4, 3, rng);
  Tape t2;
  const Tape::NodeId x2 = t2.leaf(x);
  const Tape::NodeId w2 = t2.leaf(w);
  const Tape::NodeId y2 = t2.linear(x2, w2);
  const Tape::NodeId loss = t2.softmax_cross_entropy(y2, {0, 1, 2, 0, 1});
  t2.backward(loss);
  // dX must equal dY * W^T exactly (same multiply order as the implementation)
  const Matrix& gy = t2.grad(y2);
  const Matrix expected_gx = matmul(gy, transpose(w));
  const Matrix expected_gw = matmul(transpose(x), gy);
  REQUIRE(t2.grad(x2) == expected_gx);
  REQUIRE(t2.grad(w2) == expected_gw);
}

TEST_CASE("max pool routes gradient to the lowest index on exact ties") {
  Matrix x(4, 2);
  x(0, 0) = 1.0;
  x(1, 0) = 1.0;  // tie in column 0 within group 0
  x(2, 0) = 0.5;
  x(3, 0) = 2.0;
  x(0, 1) = -1.0;
  x(1, 1) = 3.0;
  x(2, 1) = 3.0;  // not a tie: group 1 rows are 2,3
  x(3, 1) = 1.0;
  Tape tape;
  const Tape::NodeId xid = tape.leaf(x);
  const Tape::NodeId pooled = tape.max_pool_rows(xid, 2);  // two groups
  const Tape::NodeId loss = tape.softmax_cross_entropy(pooled, {0, 1});
  tape.backward(loss);
  const Matrix& g = tape.grad(xid);
  REQUIRE(g(0, 0) != 0.0);  // tie winner: row 0, not row 1
  REQUIRE(g(1, 0) == 0.0);
  REQUIRE(g(3, 0) != 0.0);
  REQUIRE(g(2, 0) == 0.0);
}

TEST_CASE("max pool output is invariant to in-group permutation") {
  Rng rng(43);
  Matrix x = oracle::random_matrix(12, 5, rng);
  Tape t1;
  const Matrix a = t1.value(t1.max_pool_rows(t1.constant(x), 4));
  // permute rows within each group of 4
  Matrix shuffled = x;
  for (std::size_t g = 0; g < 3; ++g)
    for (std::size_t c = 0; c < 5; ++c) {
      std::swap(shuffled(g * 4 + 0, c), shuffled(g * 4 + 3, c));
      std::swap(shuffled(g * 4 + 1, c), shuffled(g * 4 + 2, c));
    }
  Tape t2;
  const Matrix b = t2.value(t2.max_pool_rows(t2.constant(shuffled), 4));
  REQUIRE(a == b);
}

TEST_CASE("dropout at rate zero is the identity forward and backward") {
  Rng rng(44);
  const Matrix x = oracle::random_matrix(3, 4, rng);
  Tape tape;
  const Tape::NodeId xid = tape.leaf(x);
  const Tape::NodeId d = tape.dropout(xid, 0.0, 123);
  REQUIRE(tape.value(d) == x);
  const Tape::NodeId loss = tape.softmax_cross_entropy(d, {0, 1, 2});
  tape.backward(loss);
  const Matrix& gd = tape.grad(d);
  REQUIRE(tape.grad(xid) == gd);
}

TEST_CASE("dropout keeps roughly the right fraction and scales survivors") {
  Tape tape;
  const Tape::NodeId xid = tape.constant(Matrix(100, 100, 1.0));
  const Tape::NodeId d = tape.dropout(xid, 0.5, 7);
  const Matrix& v = tape.value(d);
  std::size_t kept = 0;
  for (double x : v.v) {
    REQUIRE((x == 0.0 || x == 2.0));
    if (x != 0.0) ++kept;
  }
  REQUIRE(std::abs(double(kept) / double(v.v.size()) - 0.5) < 0.02);
}

TEST_CASE("gather/subtract/concat backward matches finite differences") {
  Rng rng(45);
  const Matrix x = oracle::random_matrix(6, 3, rng);
  const std::vector<std::size_t> idx{3, 0, 5, 0, 2, 2};
  auto build = [&](const Matrix& input) {
    Tape tape;
    const Tape::NodeId xid = tape.leaf(input);
    const Tape::NodeId gathered = tape.gather_rows(xid, idx);
    const Tape::NodeId diff = tape.subtract(gathered, xid);
    const Tape::NodeId cat = tape.concat_cols({diff, gathered});
    const Tape::NodeId pooled = tape.max_pool_rows(cat, 2);
    const Tape::NodeId loss = tape.softmax_cross_entropy(pooled, {0, 4, 2});
    return std::pair<Tape, std::pair<Tape::NodeId, Tape::NodeId>>(std::move(tape),
                                                                  {xid, loss});
  };
  auto [tape, ids] = build(x);
  tape.backward(ids.second);
  const Matrix& g = tape.grad(ids.first);
  for (std::size_t i = 0; i < x.v.size(); ++i) {
    const double fd = fd_loss(
        [&](const Matrix& m) {
          auto [t, id2] = build(m);
          return t.value(id2.second)(0, 0);
        },
        x, i, 1e-6);
    REQUIRE(std::abs(fd - g.v[i]) < 1e-6 * std::max({1.0, std::abs(fd), std::abs(g.v[i])}));
  }
}

TEST_CASE("random composite graph gradient matches central differences") {
  Rng rng(46);
  const Matrix x = oracle::random_matrix(8, 4, rng);
  const Matrix w1 = oracle::random_matrix(8, 6, rng);
  const Matrix b1 = oracle::random_matrix(1, 6, rng, 0.3);
  const Matrix w2 = oracle::random_matrix(6, 3, rng);

  auto forward = [&](const Matrix& xv, const Matrix& w1v, const Matrix& b1v,
                     const Matrix& w2v) {
    Tape tape;
    const auto xid = tape.leaf(xv);
    const auto w1id = tape.leaf(w1v);
    const auto b1id = tape.leaf(b1v);
    const auto w2id = tape.leaf(w2v);
    const auto g = tape.gather_rows(xid, {1, 5, 0, 2, 7, 7, 3, 4});
    const auto e = tape.concat_cols({tape.subtract(g, xid), g});
    const auto h = tape.relu(tape.bias_add(tape.linear(e, w1id), b1id));
    const auto p = tape.max_pool_rows(h, 2);
    const auto q = tape.mean_pool_rows(p, 2);
    const auto z = tape.linear(q, w2id);
    const auto loss = tape.softmax_cross_entropy(z, {2, 0});
    return std::tuple<Tape, Tape::NodeId, std::array<Tape::NodeId, 4>>(
        std::move(tape), loss, {xid, w1id, b1id, w2id});
  };

  auto [tape, loss, ids] = forward(x, w1, b1, w2);
  tape.backward(loss);
  const Matrix* inputs[4] = {&x, &w1, &b1, &w2};
  for (int which = 0; which < 4; ++which) {
    const Matrix& base = *inputs[which];
    const Matrix& g = tape.grad(ids[std::size_t(which)]);
    for (std::size_t i = 0; i < base.v.size(); ++i) {
      Matrix xs = x, w1s = w1, b1s = b1, w2s = w2;
      Matrix* mut[4] = {&xs, &w1s, &b1s, &w2s};
      const double h = 1e-5;
      mut[which]->v[i] += h;
      auto [tu, lu, iu] = forward(xs, w1s, b1s, w2s);
      const double up = tu.value(lu)(0, 0);
      mut[which]->v[i] -= 2 * h;
      auto [td, ld, idn] = forward(xs, w1s, b1s, w2s);
      const double down = td.value(ld)(0, 0);
      const double fd = (up - down) / (2 * h);
      const double ad = g.v[i];
      REQUIRE(std::abs(fd - ad) / std::max({std::abs(fd), std::abs(ad), 1e-6}) < 1e-4);
    }
  }
}

TEST_CASE("interp_rows backward matches finite differences") {
  Rng rng(47);
  const PointCloud sources = oracle::random_cloud(7, rng);
  const PointCloud targets = oracle::random_cloud(4, rng);
  auto plan = std::make_shared<const InterpolationPlan>(plan_interpolation(targets, sources));
  const Matrix x = oracle::random_matrix(7, 3, rng);
  auto loss_of = [&](const Matrix& input) {
    Tape tape;
    const auto xid = tape.leaf(input);
    const auto y = tape.interp_rows(xid, plan);
    const auto loss = tape.softmax_cross_entropy(y, {0, 2, 1, 0});
    return std::pair<double, Matrix>(tape.value(loss)(0, 0), [&] {
      tape.backward(loss);
      return tape.grad(xid);
    }());
  };
  const auto [base, grad] = loss_of(x);
  (void)base;
  for (std::size_t i = 0; i < x.v.size(); ++i) {
    const double fd =
        fd_loss([&](const Matrix& m) { return loss_of(m).first; }, x, i, 1e-6);
    REQUIRE(std::abs(fd - grad.v[i]) < 1e-6);
  }
}

TEST_CASE("shape mismatches name the operation") {
  Tape tape;
  const auto a = tape.constant(Matrix(2, 3));
  const auto b = tape.constant(Matrix(2, 4));
  try {
    tape.subtract(a, b);
    FAIL("expected invalid_argument");
  } catch (const invalid_argument& e) {
    REQUIRE(std::string(e.what()).find("subtract") != std::string::npos);
  }
  try {
    tape.linear(a, b);
    FAIL("expected invalid_argument");
  } catch (const invalid_argument& e) {
    REQUIRE(std::string(e.what()).find("linear") != std::string::npos);
  }
}

TEST_CASE("ParamStore: duplicate names rejected, iteration ordered") {
  ParamStore store;
  store.create("b", 1, 2);
  store.create("a", 2, 2);
  REQUIRE_THROWS_AS(store.create("a", 1, 1), invalid_argument);
  REQUIRE(store.names() == std::vector<std::string>{"a", "b"});
  REQUIRE(store.total_scalars() == 6);
}

TEST_CASE("apply_update: lr=0 leaves parameters bitwise unchanged") {
  Rng rng(48);
  ParamStore store;
  store.create("w", 3, 3) = oracle::random_matrix(3, 3, rng);
  const Matrix before = store.at("w");
  GradMap grads;
  grads["w"] = oracle::random_matrix(3, 3, rng);
  OptimizerConfig opt;
  opt.lr = 0.0;
  apply_update(store, grads, opt);
  REQUIRE(store.at("w") == before);
  opt.kind = OptimizerConfig::Kind::SgdMomentum;
  apply_update(store, grads, opt);
  REQUIRE(store.at("w") == before);
}

TEST_CASE("train_step: deterministic per seed and diverges loudly") {
  Rng rng(49);
  const Matrix x = oracle::random_matrix(4, 3, rng);
  auto run = [&]() {
    ParamStore params;
    Rng wrng(99);
    params.create("w", 3, 2) = oracle::random_matrix(3, 2, wrng);
    OptimizerConfig opt;
    std::vector<double> losses;
    for (std::size_t step = 0; step < 5; ++step) {
      const LossValue lv = train_step(
          2,
          [&](std::size_t s) {
            Tape tape;
            const auto xid = tape.constant(x);
            const auto wid = tape.leaf(params.at("w"));
            const auto logits = tape.linear(xid, wid);
            const auto loss =
                tape.softmax_cross_entropy(logits, {int(s), 1, 0, int(1 - s)});
            tape.backward(loss);
            return SampleGrad{tape.value(loss)(0, 0), false, {{"w", tape.grad(wid)}}};
          },
          params, opt, step);
      losses.push_back(lv.loss);
    }
    return losses;
  };
  REQUIRE(run() == run());

  ParamStore params;
  params.create("w", 1, 1);
  OptimizerConfig opt;
  try {
    train_step(
        1,
        [&](std::size_t) {
          return SampleGrad{std::nan(""), false, {}};
        },
        params, opt, 17);
    FAIL("expected numeric_error");
  } catch (const numeric_error& e) {
    REQUIRE(e.step == 17);
    REQUIRE(std::string(e.what()).find("17") != std::string::npos);
  }
}

TEST_CASE("train_step: overfits a tiny problem") {
  Rng rng(50);
  const Matrix x = oracle::random_matrix(1, 6, rng);
  ParamStore params;
  params.create("w1", 6, 8) = oracle::random_matrix(6, 8, rng, 0.5);
  params.create("b1", 1, 8);
  params.create("w2", 8, 3) = oracle::random_matrix(8, 3, rng, 0.5);
  OptimizerConfig opt;
  opt.lr = 1e-2;
  double last = 0.0;
  for (std::size_t step = 0; step < 200; ++step) {
    last = train_step(
               1,
               [&](std::size_t) {
                 Tape tape;
                 const auto xid = tape.constant(x);
                 const auto w1 = tape.leaf(params.at("w1"));
                 const auto b1 = tape.leaf(params.at("b1"));
                 const auto w2 = tape.leaf(params.at("w2"));
                 const auto h = tape.relu(tape.bias_add(tape.linear(xid, w1), b1));
                 const auto z = tape.linear(h, w2);
                 const auto loss = tape.softmax_cross_entropy(z, {2});
                 tape.backward(loss);
                 SampleGrad sg;
                 sg.loss = tape.value(loss)(0, 0);
                 sg.grads = {{"w1", tape.grad(w1)}, {"b1", tape.grad(b1)}, {"w2", tape.grad(w2)}};
                 return sg;
               },
               params, opt, step)
               .loss;
  }
  REQUIRE(last < 0.01);
}

TEST_CASE("grad_check: exact for a lone linear layer") {
  Rng rng(51);
  const Matrix x = oracle::random_matrix(3, 4, rng);
  ParamStore params;
  params.create("w", 4, 2) = oracle::random_matrix(4, 2, rng);
  auto loss_fn = [&](const ParamStore& p) {
    Tape tape;
    const auto logits = tape.linear(tape.constant(x), tape.leaf(p.at("w")));
    return tape.value(tape.softmax_cross_entropy(logits, {0, 1, 1}))(0, 0);
  };
  auto grad_fn = [&](const ParamStore& p) {
    Tape tape;
    const auto wid = tape.leaf(p.at("w"));
    const auto logits = tape.linear(tape.constant(x), wid);
    const auto loss = tape.softmax_cross_entropy(logits, {0, 1, 1});
    tape.backward(loss);
    return GradMap{{"w", tape.grad(wid)}};
  };
  const GradCheckReport report = grad_check(params, loss_fn, grad_fn, 1e-8);
  REQUIRE(report.passed);
  REQUIRE(report.max_rel_err < 1e-8);
  REQUIRE(report.params.size() == 1);
  REQUIRE(report.params[0].name == "w");
}

TEST_CASE("grad_check detects a non-deterministic forward") {
  ParamStore params;
  params.create("w", 1, 1);
  int counter = 0;
  auto loss_fn = [&](const ParamStore&) { return double(counter++); };
  auto grad_fn = [&](const ParamStore&) { return GradMap{}; };
  REQUIRE_THROWS_AS(grad_check(params, loss_fn, grad_fn, 1e-4), contract_violation);
}
