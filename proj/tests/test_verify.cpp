#include "doctest.h"

#include "ddr/meshgen.hpp"
#include "ddr/verify.hpp"

#include <cmath>

using namespace ddr;

TEST_CASE("verify: test forms have the stated derivatives")
{
    const double h = 1e-6;
    for (mesh m : {gen_torus(2), gen_sphere(0.3)}) {
        test_forms t = smooth_test_forms(m);
        for (int chart = 0; chart < int(m.charts.charts.size()); ++chart)
            for (Eigen::Vector2d x : {Eigen::Vector2d(0.31, 0.12), Eigen::Vector2d(-0.4, 0.55)}) {
                auto fd = [&](const form_field& f, int i) {
                    Eigen::Vector2d e = Eigen::Vector2d::Unit(i) * h;
                    return Eigen::VectorXd((f(chart, x + e).c - f(chart, x - e).c) / (2 * h));
                };
                Eigen::Vector2d g(fd(t.w[0], 0)[0], fd(t.w[0], 1)[0]);
                CHECK((g - t.dw[0](chart, x).c).norm() < 1e-6);
                double curl = fd(t.w[1], 0)[1] - fd(t.w[1], 1)[0];
                CHECK(std::abs(curl - t.dw[1](chart, x).c[0]) < 1e-6);
            }
    }
}

TEST_CASE("verify: complex checks and commutation")
{
    mesh m = gen_torus(3);
    auto k = check_complex(de_rham_complex(m, 1));
    CHECK(k.max() < 1e-12);
    for (const auto& cc : check_commutation(m, 1))
        CHECK(cc.ok());
    commutation_check bad;
    bad.residual = 1e-3;
    bad.residual_fine = 1e-3;
    CHECK_FALSE(bad.ok());
}

TEST_CASE("verify: rates")
{
    std::vector<double> h{1, 0.5, 0.25}, e{1, 0.25, 0.0625};
    CHECK(fit_rate(h, e) == doctest::Approx(2));
    auto p = pairwise_rates(h, e);
    REQUIRE(p.size() == 2);
    CHECK(p[1] == doctest::Approx(2));
    CHECK(std::isnan(fit_rate({1}, {1})));
    CHECK(std::isnan(fit_rate({1, 1}, {1, 2})));
    // non-positive errors are skipped
    CHECK(fit_rate({1, 0.5, 0.25}, {1, 0, 0.0625}) == doctest::Approx(2));
}
