#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gradcheck.hpp"
#include "lfs/autograd.hpp"

using namespace lfs;
using lfs::test::gradcheck;
using lfs::test::random_tensor;

namespace {
constexpr double kTol = 1e-4;
}

TEST_CASE("elementwise op gradients") {
    Rng rng(1);
    ag::Var a = ag::param(random_tensor({3, 4}, rng));
    ag::Var b = ag::param(random_tensor({3, 4}, rng));

    CHECK(gradcheck([&] { return ag::sum_all(ag::mul(a, b)); }, a) < kTol);
    CHECK(gradcheck([&] { return ag::sum_all(ag::mul(a, b)); }, b) < kTol);
    CHECK(gradcheck([&] { return ag::sum_all(ag::sub(a, b)); }, b) < kTol);
    CHECK(gradcheck([&] { return ag::sum_all(ag::smul(a, -2.5)); }, a) < kTol);
    CHECK(gradcheck([&] { return ag::sum_all(ag::tanh_(a)); }, a) < kTol);
    CHECK(gradcheck([&] { return ag::sum_all(ag::sigmoid_(a)); }, a) < kTol);
    CHECK(gradcheck([&] { return ag::sum_all(ag::softplus_(a)); }, a) < kTol);
    CHECK(gradcheck([&] { return ag::sum_all(ag::pow_(ag::sadd(ag::square(a), 1.0), -0.5)); }, a) < kTol);
    CHECK(gradcheck([&] { return ag::mse(a, b); }, a) < kTol);
}

TEST_CASE("leaky relu gradient away from the kink") {
    Rng rng(2);
    Tensor t = random_tensor({4, 4}, rng);
    for (int64_t i = 0; i < t.size(); ++i)
        if (std::abs(t[i]) < 0.05) t[i] = 0.1;  // keep FD away from x=0
    ag::Var a = ag::param(t);
    CHECK(gradcheck([&] { return ag::sum_all(ag::leaky_relu(a, 0.2)); }, a) < kTol);
}

TEST_CASE("linear algebra op gradients") {
    Rng rng(3);
    ag::Var w = ag::param(random_tensor({5, 7}, rng));
    ag::Var x = ag::param(random_tensor({7}, rng));
    ag::Var g = ag::param(random_tensor({5}, rng));

    CHECK(gradcheck([&] { return ag::sum_all(ag::square(ag::matvec(w, x))); }, w) < kTol);
    CHECK(gradcheck([&] { return ag::sum_all(ag::square(ag::matvec(w, x))); }, x) < kTol);
    CHECK(gradcheck([&] { return ag::sum_all(ag::square(ag::matvec_t(w, g))); }, w) < kTol);
    CHECK(gradcheck([&] { return ag::sum_all(ag::square(ag::matvec_t(w, g))); }, g) < kTol);
    CHECK(gradcheck([&] { return ag::sum_all(ag::square(ag::outer(g, x))); }, g) < kTol);
    CHECK(gradcheck([&] { return ag::sum_all(ag::square(ag::outer(g, x))); }, x) < kTol);
}

TEST_CASE("convolution gradients, stride 1 and 2, k 1 and 3") {
    Rng rng(4);
    ag::Var x = ag::param(random_tensor({2, 4, 4}, rng));

    ag::Var w3 = ag::param(random_tensor({3, 2, 3, 3}, rng));
    CHECK(gradcheck([&] { return ag::sum_all(ag::square(ag::conv2d(x, w3, 1, 1))); }, x) < kTol);
    CHECK(gradcheck([&] { return ag::sum_all(ag::square(ag::conv2d(x, w3, 1, 1))); }, w3) < kTol);
    CHECK(gradcheck([&] { return ag::sum_all(ag::square(ag::conv2d(x, w3, 2, 1))); }, x) < kTol);
    CHECK(gradcheck([&] { return ag::sum_all(ag::square(ag::conv2d(x, w3, 2, 1))); }, w3) < kTol);

    ag::Var w1 = ag::param(random_tensor({3, 2, 1, 1}, rng));
    CHECK(gradcheck([&] { return ag::sum_all(ag::square(ag::conv2d(x, w1, 1, 0))); }, x) < kTol);
    CHECK(gradcheck([&] { return ag::sum_all(ag::square(ag::conv2d(x, w1, 1, 0))); }, w1) < kTol);
}

TEST_CASE("resampling and reduction gradients") {
    Rng rng(5);
    ag::Var x = ag::param(random_tensor({2, 4, 4}, rng));
    ag::Var v = ag::param(random_tensor({3}, rng));

    CHECK(gradcheck([&] { return ag::sum_all(ag::square(ag::avgpool2(x))); }, x) < kTol);
    CHECK(gradcheck([&] { return ag::sum_all(ag::square(ag::upsample2(x))); }, x) < kTol);
    CHECK(gradcheck([&] { return ag::sum_all(ag::square(ag::row_sum(x, 2, 16))); }, x) < kTol);
    CHECK(gradcheck([&] { return ag::sum_all(ag::square(ag::row_broadcast(v, 5))); }, v) < kTol);
    CHECK(gradcheck([&] { return ag::sum_all(ag::square(ag::mid_sum(x, 2, 4, 4))); }, x) < kTol);
    CHECK(gradcheck([&] { return ag::sum_all(ag::square(ag::mid_broadcast(v, 2, 4))); }, v) < kTol);
    CHECK(gradcheck([&] { return ag::square(ag::sum_all(x)); }, x) < kTol);
    CHECK(gradcheck([&] {
              return ag::sum_all(ag::square(ag::broadcast_full(ag::sum_all(v), {2, 3})));
          }, v) < kTol);
    CHECK(gradcheck([&] { return ag::sum_all(ag::square(ag::reshape(x, {4, 8}))); }, x) < kTol);
}

TEST_CASE("second derivatives: gradient-of-gradient matches finite differences") {
    // p(w) = || d/dx sum(tanh(conv(x, w))) ||^2 exercises the same
    // machinery the R1 penalty relies on.
    Rng rng(6);
    ag::Var x = ag::param(random_tensor({1, 3, 3}, rng));
    ag::Var w = ag::param(random_tensor({2, 1, 3, 3}, rng));

    auto build = [&] {
        ag::Var y = ag::sum_all(ag::tanh_(ag::conv2d(x, w, 1, 1)));
        ag::GradMap grads = ag::backward(y);
        return ag::sum_all(ag::square(grads.at(x.get())));
    };
    CHECK(gradcheck(build, w, 1e-4) < kTol);
}

TEST_CASE("detach cuts the gradient") {
    Rng rng(7);
    ag::Var a = ag::param(random_tensor({4}, rng));
    ag::Var loss = ag::sum_all(ag::mul(ag::detach(a), a));
    ag::GradMap grads = ag::backward(loss);
    // d/da of detach(a)*a is detach(a), not 2a.
    const Tensor& g = grads.at(a.get())->value;
    for (int i = 0; i < 4; ++i) CHECK(g[i] == doctest::Approx(a->value[i]));
}

TEST_CASE("no-grad forward records nothing") {
    ag::Var c = ag::constant(Tensor::ones({2, 2}));
    ag::Var y = ag::mul(c, c);
    CHECK_FALSE(y->requires_grad);
    CHECK(y->inputs.empty());
}

TEST_CASE("shape mismatches throw") {
    ag::Var a = ag::constant(Tensor::ones({2, 2}));
    ag::Var b = ag::constant(Tensor::ones({3}));
    CHECK_THROWS_AS(ag::add(a, b), ShapeMismatch);
    CHECK_THROWS_AS(ag::matvec(a, b), ShapeMismatch);
}
