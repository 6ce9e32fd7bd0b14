#include "fuzzyduo/error.hpp"
#include "fuzzyduo/membership.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace fuzzyduo;
using testsupport::rel_err;

namespace {

// Central differences of the closed forms, evaluated in extended precision so
// cancellation in f(p + h) - f(p - h) stays well below the tolerance.
using Ld = long double;
Ld ml_ld(Ld x, Ld m, Ld w) { return std::exp(-w * std::fabs(x - m)); }
Ld gauss_ld(Ld x, Ld m, Ld w) { return std::exp(-(x - m) * (x - m) / (2 * w * w)); }

template <typename F>
double central(F f, double at, double h)
{
    return static_cast<double>((f(static_cast<Ld>(at) + h) - f(static_cast<Ld>(at) - h)) / (2 * static_cast<Ld>(h)));
}

} // namespace

TEST_SUITE("membership") {

TEST_CASE("modified-laplace values")
{
    CHECK(eval_ml(0.5, 0.5, 3.0) == 1.0);
    CHECK(eval_ml(1.0, 0.0, 1.0) == doctest::Approx(0.367879).epsilon(1e-6));
    CHECK(eval_ml(-1.0, 0.0, 2.0) == doctest::Approx(0.135335).epsilon(1e-6));
    CHECK(eval_ml(1.0, 0.0, 1.0) == std::exp(-1.0));
}

TEST_CASE("gaussian values")
{
    CHECK(eval_gaussian(2.0, 2.0, 0.1) == 1.0);
    CHECK(eval_gaussian(1.0, 0.0, 1.0) == doctest::Approx(0.606531).epsilon(1e-6));
    CHECK(std::abs(eval_gaussian(1.0, 0.0, 1000.0) - 1.0) < 1e-6);
}

TEST_CASE("width derivatives")
{
    CHECK(d_ml_d_lambda(0.3, 0.3, 7.0) == 0.0);
    CHECK(d_ml_d_lambda(1.0, 0.0, 1.0) == doctest::Approx(-0.367879).epsilon(1e-6));
    CHECK(d_ml_d_lambda(2.0, 0.0, 0.5) == doctest::Approx(-0.735759).epsilon(1e-6));
    CHECK(d_gauss_d_sigma(-4.0, -4.0, 2.0) == 0.0);
    CHECK(d_gauss_d_sigma(1.0, 0.0, 1.0) == doctest::Approx(0.606531).epsilon(1e-6));
    CHECK(d_gauss_d_sigma(2.0, 0.0, 1.0) == doctest::Approx(4.0 * std::exp(-2.0)).epsilon(1e-12));
}

TEST_CASE("center derivatives")
{
    CHECK(d_ml_d_center(0.25, 0.25, 2.0) == 0.0);
    CHECK(d_ml_d_center(1.0, 0.0, 1.0) == doctest::Approx(0.367879).epsilon(1e-6));
    CHECK(d_ml_d_center(-1.0, 0.0, 1.0) == doctest::Approx(-0.367879).epsilon(1e-6));
    CHECK(d_gauss_d_center(0.0, 0.0, 1.0) == 0.0);
    CHECK(d_gauss_d_center(1.0, 0.0, 2.0) == doctest::Approx(0.25 * std::exp(-0.125)).epsilon(1e-12));
}

TEST_CASE("invalid parameters are rejected")
{
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double inf = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(eval_ml(0.0, 0.0, 0.0), InvalidParameter);
    CHECK_THROWS_AS(eval_ml(0.0, 0.0, -1.0), InvalidParameter);
    CHECK_THROWS_AS(eval_ml(nan, 0.0, 1.0), InvalidParameter);
    CHECK_THROWS_AS(eval_ml(0.0, inf, 1.0), InvalidParameter);
    CHECK_THROWS_AS(eval_gaussian(0.0, 0.0, 0.0), InvalidParameter);
    CHECK_THROWS_AS(d_gauss_d_sigma(0.0, 0.0, -2.0), InvalidParameter);
    CHECK_THROWS_AS(d_ml_d_lambda(1.0, 0.0, 0.0), InvalidParameter);
    CHECK_THROWS_AS(d_ml_d_center(1.0, 0.0, nan), InvalidParameter);
    CHECK_THROWS_AS(parse_mf_family("triangular"), InvalidParameter);
}

TEST_CASE("family names round-trip")
{
    for (auto f : {MfFamily::ModifiedLaplace, MfFamily::Gaussian})
        CHECK(parse_mf_family(to_string(f)) == f);
    CHECK(parse_mf_family("ml") == MfFamily::ModifiedLaplace);
    CHECK(parse_mf_family("gauss") == MfFamily::Gaussian);
}

TEST_CASE("range, peak and symmetry over random draws")
{
    std::mt19937_64 rng(11);
    // Dyadic centers and offsets so m + d and m - d are exact in floating point.
    std::uniform_int_distribution<int> pos(-3072, 3072);
    std::uniform_int_distribution<int> delta(1, 4096);
    std::uniform_real_distribution<double> width(0.05, 5.0);
    for (int i = 0; i < 1000; ++i) {
        const double m = pos(rng) / 1024.0;
        const double d = delta(rng) / 1024.0;
        const double w = width(rng);
        CHECK(eval_ml(m, m, w) == 1.0);
        CHECK(eval_gaussian(m, m, w) == 1.0);
        CHECK(eval_ml(m + d, m, w) == eval_ml(m - d, m, w));
        CHECK(eval_gaussian(m + d, m, w) == eval_gaussian(m - d, m, w));
        const double ml = eval_ml(m + d, m, w);
        const double g = eval_gaussian(m + d, m, w);
        CHECK(ml > 0.0);
        CHECK(ml < 1.0);
        CHECK(g > 0.0);
        CHECK(g < 1.0);
    }
}

TEST_CASE("monotone in the width")
{
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> delta(0.05, 3.0);
    std::uniform_real_distribution<double> width(0.1, 3.0);
    for (int i = 0; i < 500; ++i) {
        const double d = delta(rng);
        const double w = width(rng);
        CHECK(eval_ml(d, 0.0, w * 1.1) < eval_ml(d, 0.0, w));
        CHECK(eval_gaussian(d, 0.0, w * 1.1) > eval_gaussian(d, 0.0, w));
    }
}

TEST_CASE("derivative signs")
{
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    std::uniform_real_distribution<double> width(0.01, 10.0);
    for (int i = 0; i < 1000; ++i) {
        const double x = u(rng);
        const double m = u(rng);
        const double w = width(rng);
        CHECK(d_ml_d_lambda(x, m, w) <= 0.0);
        CHECK(d_gauss_d_sigma(x, m, w) >= 0.0);
    }
}

TEST_CASE("analytic derivatives match central differences")
{
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    std::uniform_real_distribution<double> width(0.2, 3.0);
    const double h = 1e-6;
    int checked = 0;
    for (int i = 0; i < 1000; ++i) {
        const double x = u(rng);
        const double m = u(rng);
        const double w = width(rng);
        if (std::abs(x - m) < 1e-4)
            continue;
        ++checked;
        const double fd_lambda = central([&](Ld v) { return ml_ld(x, m, v); }, w, h);
        const double fd_sigma = central([&](Ld v) { return gauss_ld(x, m, v); }, w, h);
        const double fd_mc = central([&](Ld v) { return ml_ld(x, v, w); }, m, h);
        const double fd_gc = central([&](Ld v) { return gauss_ld(x, v, w); }, m, h);
        CHECK(rel_err(d_ml_d_lambda(x, m, w), fd_lambda) <= 1e-5);
        CHECK(rel_err(d_gauss_d_sigma(x, m, w), fd_sigma) <= 1e-5);
        CHECK(rel_err(d_ml_d_center(x, m, w), fd_mc) <= 1e-5);
        CHECK(rel_err(d_gauss_d_center(x, m, w), fd_gc) <= 1e-5);
    }
    CHECK(checked > 990);
}

TEST_CASE("log-domain forms agree with direct evaluation")
{
    std::mt19937_64 rng(15);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    std::uniform_real_distribution<double> raw(-1.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const double x = u(rng);
        MfParams ml{u(rng), raw(rng), MfFamily::ModifiedLaplace};
        MfParams g{u(rng), raw(rng), MfFamily::Gaussian};
        CHECK(std::exp(ml.log_eval(x)) == doctest::Approx(eval_ml(x, ml.center, ml.width())).epsilon(1e-14));
        CHECK(std::exp(g.log_eval(x)) == doctest::Approx(eval_gaussian(x, g.center, g.width())).epsilon(1e-14));
        CHECK(ml.eval(x) == doctest::Approx(eval_ml(x, ml.center, ml.width())).epsilon(1e-14));
    }
}

TEST_CASE("effective width is exp of the raw parameter")
{
    CHECK(MfParams{0.0, 0.0, MfFamily::Gaussian}.width() == 1.0);
    CHECK(MfParams{0.0, -50.0, MfFamily::Gaussian}.width() > 0.0);
    CHECK(MfParams{0.0, std::log(2.5), MfFamily::ModifiedLaplace}.width() == doctest::Approx(2.5).epsilon(1e-15));
}

}
