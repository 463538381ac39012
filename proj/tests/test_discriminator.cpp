#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gradcheck.hpp"
#include "lfs/discriminator.hpp"

using namespace lfs;
using lfs::test::gradcheck;
using lfs::test::random_tensor;

namespace {

struct Fixture {
    nn::ParamStore ps;
    Rng rng{31};
    Discriminator disc;
    static constexpr int kC = 8;
    static constexpr int kCodeLen = 30;

    Fixture() : disc(ps, "disc", kC, kCodeLen, rng) {}

    void zero(const std::string& name) {
        Tensor& t = ps.find(name)->value;
        std::fill(t.data(), t.data() + t.size(), 0.0);
    }
};

}  // namespace

TEST_CASE("logit is a finite scalar, deterministic") {
    Fixture f;
    Tensor img = random_tensor({3, 32, 32}, f.rng);
    Tensor z = random_tensor({Fixture::kCodeLen}, f.rng);
    ag::Var l1 = f.disc(ag::constant(img), ag::constant(z));
    ag::Var l2 = f.disc(ag::constant(img), ag::constant(z));
    REQUIRE(l1->value.size() == 1);
    CHECK(std::isfinite(l1->value[0]));
    CHECK(l1->value[0] == l2->value[0]);
}

TEST_CASE("zero projection head removes the conditioning exactly") {
    Fixture f;
    f.zero("disc.u.w");
    f.zero("disc.u.b");
    Tensor img = random_tensor({3, 16, 16}, f.rng);
    ag::Var phi = f.disc.features(ag::constant(img));
    // logit must equal b(phi) and be independent of the code
    Tensor z1 = random_tensor({Fixture::kCodeLen}, f.rng);
    Tensor z2 = random_tensor({Fixture::kCodeLen}, f.rng);
    const double l1 = ag::scalar_of(f.disc(ag::constant(img), ag::constant(z1)));
    const double l2 = ag::scalar_of(f.disc(ag::constant(img), ag::constant(z2)));
    CHECK(l1 == l2);
    const ag::Var b_w = f.ps.find("disc.b.w");
    const ag::Var b_b = f.ps.find("disc.b.b");
    double expect = b_b->value[0];
    for (int i = 0; i < Fixture::kC; ++i) expect += b_w->value[i] * phi->value[i];
    CHECK(l1 == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("logit minus unconditional head is linear in u(z)") {
    Fixture f;
    Tensor img = random_tensor({3, 16, 16}, f.rng);
    Tensor z = random_tensor({Fixture::kCodeLen}, f.rng);
    const double with_u = ag::scalar_of(f.disc(ag::constant(img), ag::constant(z)));

    // doubling u's parameters doubles the projection term
    for (const char* name : {"disc.u.w", "disc.u.b"}) {
        Tensor& t = f.ps.find(name)->value;
        for (int64_t i = 0; i < t.size(); ++i) t[i] *= 2.0;
    }
    const double with_2u = ag::scalar_of(f.disc(ag::constant(img), ag::constant(z)));

    f.zero("disc.u.w");
    f.zero("disc.u.b");
    const double base = ag::scalar_of(f.disc(ag::constant(img), ag::constant(z)));
    CHECK(with_2u - base == doctest::Approx(2.0 * (with_u - base)).epsilon(1e-10));
}

TEST_CASE("gradient w.r.t. image pixels matches finite differences on 8x8 input") {
    Fixture f;
    ag::Var img = ag::param(random_tensor({3, 8, 8}, f.rng));
    ag::Var z = ag::constant(random_tensor({Fixture::kCodeLen}, f.rng));
    CHECK(gradcheck([&] { return f.disc(img, z); }, img) < 1e-4);
}

TEST_CASE("shape checks") {
    Fixture f;
    CHECK_THROWS_AS(f.disc(ag::constant(Tensor::ones({1, 8, 8})),
                           ag::constant(Tensor::ones({Fixture::kCodeLen}))),
                    ShapeMismatch);
    CHECK_THROWS_AS(f.disc(ag::constant(Tensor::ones({3, 8, 8})),
                           ag::constant(Tensor::ones({7}))),
                    ShapeMismatch);
}
