#include "doctest.h"

#include "ddr/geometry.hpp"

#include <cmath>
#include <numbers>

using namespace ddr;
using std::numbers::pi;

namespace {

double integrate(const quad_rule& q, int a, int b)
{
    double s = 0;
    for (int i = 0; i < q.size(); ++i)
        s += q.weights[i] * std::pow(q.points(0, i), a) * (q.dim > 1 ? std::pow(q.points(1, i), b) : 1.0);
    return s;
}

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

alt_value constant_form(int k, std::vector<double> c)
{
    alt_value v(2, k);
    for (std::size_t i = 0; i < c.size(); ++i)
        v.c[i] = c[i];
    return v;
}

chart_sampler constant_sampler(int k, std::vector<double> c)
{
    return [=](const Eigen::Vector2d&) { return constant_form(k, c); };
}

json unit_square()
{
    return json{{"vertices", {{0, 0}, {1, 0}, {1, 1}, {0, 1}}}, {"box", true}};
}

} // namespace

TEST_CASE("tensor quadrature")
{
    quad_rule q1 = make_quadrature(1, 1);
    CHECK(q1.size() == 1);
    CHECK(integrate(q1, 1, 0) == doctest::Approx(0.5).epsilon(1e-15));
    quad_rule q3 = make_quadrature(1, 3);
    CHECK(q3.size() == 2);
    CHECK(std::abs(integrate(q3, 3, 0) - 0.25) < 1e-15);
    quad_rule q5 = make_quadrature(2, 5);
    CHECK(q5.size() == 9);
    CHECK(std::abs(integrate(q5, 2, 3) - 1.0 / 12) < 1e-14);
    CHECK_THROWS_AS(make_quadrature(1, 61), error);
    for (int n = 1; n <= 20; ++n) {
        quad_rule g = gauss_legendre(n);
        for (int k = 0; k <= 2 * n - 1; ++k)
            CHECK(std::abs(integrate(g, k, 0) - 1.0 / (k + 1)) < 1e-14);
    }
}

TEST_CASE("polygon quadrature")
{
    ref_domain tri = ref_domain::polygon({{0, 0}, {1, 0}, {0, 1}});
    ref_domain sq = ref_domain::polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
    for (int deg = 0; deg <= 12; ++deg) {
        quad_rule qt = domain_quadrature(tri, deg), qs = domain_quadrature(sq, deg);
        for (int a = 0; a <= deg; ++a) {
            int b = deg - a;
            double exact = factorial(a) * factorial(b) / factorial(a + b + 2);
            CHECK(std::abs(integrate(qt, a, b) - exact) < 1e-14);
            CHECK(std::abs(integrate(qs, a, b) - 1.0 / ((a + 1) * (b + 1))) < 1e-14);
        }
    }
}

TEST_CASE("integrate_pair examples")
{
    atlas flat = atlas::torus();
    cell_geometry g(make_parametrization("flat_polygon", unit_square()), &flat, 0);
    quad_rule q = g.rule(4);
    CHECK(integrate_pair(g, q, constant_sampler(1, {1, 0}), constant_sampler(1, {0, 1}), pair_mode::wedge)
        == doctest::Approx(1.0));
    CHECK(integrate_pair(g, q, constant_sampler(1, {1, 0}), constant_sampler(1, {1, 0}), pair_mode::wedge_star)
        == doctest::Approx(1.0));

    // quarter of the ring 1 < rho < 2 in a stereographic chart has area pi (4/5 - 1/2) / ... on the sphere
    atlas sph = atlas::sphere();
    json cone{{"variant", "polar"}, {"g1", {2.0}}, {"g3", {1.0}}, {"h", {0.0, pi / 2}}};
    cell_geometry c(make_parametrization("cone_section", cone), &sph, 0);
    double area = integrate_pair(c, c.rule(16), constant_sampler(0, {1}), constant_sampler(0, {1}),
        pair_mode::wedge_star);
    CHECK(area == doctest::Approx(pi * (4.0 / 5 - 1.0 / 2)).epsilon(1e-10));
    CHECK(c.measure(16) == doctest::Approx(pi * 0.3).epsilon(1e-10));

    // wedge pairings do not see the metric
    cell_geometry cf(make_parametrization("cone_section", cone), &flat, 0);
    auto a = [](const Eigen::Vector2d& x) { return constant_form(1, {x[1], x[0] * x[0]}); };
    auto b = [](const Eigen::Vector2d& x) { return constant_form(1, {1.0 + x[0], x[1]}); };
    double w1 = integrate_pair(c, c.rule(16), a, b, pair_mode::wedge);
    double w2 = integrate_pair(cf, cf.rule(16), a, b, pair_mode::wedge);
    CHECK(w1 == doctest::Approx(w2).epsilon(1e-13));
    // 1-forms are conformally invariant in 2D, 0-forms are not
    auto z = [](const Eigen::Vector2d& x) { return constant_form(0, {x[0]}); };
    double s1 = integrate_pair(c, c.rule(16), z, z, pair_mode::wedge_star);
    double s2 = integrate_pair(cf, cf.rule(16), z, z, pair_mode::wedge_star);
    CHECK(std::abs(s1 - s2) > 1e-3);
}

TEST_CASE("gram matrices and projection")
{
    atlas flat = atlas::torus();
    json seg{{"curve", "line"}, {"a", {0, 0}}, {"b", {1, 0}}};
    cell_geometry e(make_parametrization("parametrized_segment", seg), &flat, 0);
    Eigen::MatrixXd G = gram_matrix(e, e.rule(6), basis_full(1, 1, 0), basis_full(1, 1, 0), pair_mode::wedge_star);
    CHECK(G(0, 0) == doctest::Approx(1.0));
    CHECK(G(0, 1) == doctest::Approx(0.5));
    CHECK(G(1, 1) == doctest::Approx(1.0 / 3));
    CHECK(gram_matrix(e, e.rule(2), basis_trimmed(1, 0, 1), basis_trimmed(1, 0, 1), pair_mode::wedge_star).size()
        == 0);

    cell_geometry sq(make_parametrization("flat_polygon", unit_square()), &flat, 0);
    Eigen::MatrixXd I = gram_matrix(sq, sq.rule(2), basis_full(2, 0, 1), basis_full(2, 0, 1), pair_mode::wedge_star);
    CHECK((I - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-14);

    auto t = [](const Eigen::Vector2d& x) { return constant_form(0, {x[0]}); };
    Eigen::VectorXd c = l2_project(e, e.rule(6), basis_full(1, 0, 0), t);
    CHECK(c[0] == doctest::Approx(0.5));
    Eigen::VectorXd c2 = l2_project(e, e.rule(6), basis_full(1, 2, 0), t);
    CHECK(std::abs(c2[0]) < 1e-12);
    CHECK(c2[1] == doctest::Approx(1.0));
    CHECK(std::abs(c2[2]) < 1e-12);
}

TEST_CASE("curved cell constructions")
{
    atlas flat = atlas::torus();
    // polar cone: edges in polar coordinates
    json cone{{"variant", "polar"}, {"g1", {2.0, 0.5, -0.3}}, {"g3", {1.0, 0.2, -0.2}}, {"h", {0.1, 0.8, 0.1}}};
    auto pc = make_parametrization("cone_section", cone);
    poly1 g1{{2.0, 0.5, -0.3}}, g3{{1.0, 0.2, -0.2}}, h{{0.1, 0.8, 0.1}};
    for (double t : {0.0, 0.3, 0.7, 1.0}) {
        Eigen::Vector2d e3 = g3(t) * Eigen::Vector2d(std::cos(h(t)), std::sin(h(t)));
        Eigen::Vector2d e1 = g1(t) * Eigen::Vector2d(std::cos(h(t)), std::sin(h(t)));
        CHECK((pc->point(Eigen::Vector2d(t, 0)) - e3).norm() < 1e-14);
        CHECK((pc->point(Eigen::Vector2d(t, 1)) - e1).norm() < 1e-14);
        Eigen::Vector2d e2 = (t + 1) * Eigen::Vector2d(std::cos(0.1), std::sin(0.1));
        CHECK((pc->point(Eigen::Vector2d(0, t)) - e2).norm() < 1e-14);
        Eigen::Vector2d x = pc->point(Eigen::Vector2d(t, 0.4));
        CHECK((pc->inverse(x) - Eigen::Vector2d(t, 0.4)).norm() < 1e-12);
    }
    CHECK_THROWS_AS(make_parametrization("cone_section",
                        json{{"variant", "polar"}, {"g1", {1.0}}, {"g3", {1.0}}, {"h", {0.0, 1.0}}}),
        error);

    // triangle with two curved edges
    json tri{{"h1", {0.0, 1.0}}, {"g1", {0.0, 0.2, -0.2}}, {"h2", {0.0, 0.8, 0.2}}, {"g2", {1.0, -1.0}}};
    auto tc = make_parametrization("triangle_two_curved", tri);
    poly1 h1{{0.0, 1.0}}, G1{{0.0, 0.2, -0.2}}, h2{{0.0, 0.8, 0.2}}, G2{{1.0, -1.0}};
    for (double t : {0.0, 0.25, 0.5, 1.0}) {
        CHECK((tc->inverse(Eigen::Vector2d(h1(t), G1(t))) - Eigen::Vector2d(t, 0)).norm() < 1e-13);
        CHECK((tc->inverse(Eigen::Vector2d(h2(t), G2(t))) - Eigen::Vector2d(t, 1 - t)).norm() < 1e-13);
        CHECK((tc->inverse(Eigen::Vector2d(0, t)) - Eigen::Vector2d(0, t)).norm() < 1e-13);
    }
    Eigen::Vector2d u(0.3, 0.2);
    CHECK((tc->inverse(tc->point(u)) - u).norm() < 1e-13);
    Eigen::MatrixXd J = tc->jacobian(u);
    double hh = 1e-6;
    Eigen::Vector2d fd = (tc->point(u + Eigen::Vector2d(hh, 0)) - tc->point(u - Eigen::Vector2d(hh, 0))) / (2 * hh);
    CHECK((J.col(0) - fd).norm() < 1e-7);
    // straight-sided case is the identity
    json flat_tri{{"h1", {0.0, 1.0}}, {"g1", {0.0}}, {"h2", {0.0, 1.0}}, {"g2", {1.0, -1.0}}};
    auto ft = make_parametrization("triangle_two_curved", flat_tri);
    CHECK((ft->point(u) - u).norm() < 1e-14);

    // quadrilateral with four curved edges
    json quad{{"h1", {0.0, 1.0}}, {"g1", {0.0, 0.1, -0.1}}, {"h2", {1.0, 0.1}}, {"g2", {0.0, 1.1}}, {"h3", {0.0, 1.1}},
        {"g3", {1.0, 0.1}}, {"h4", {0.0, -0.1, 0.1}}, {"g4", {0.0, 1.0}}, {"a", 1.1}, {"b", 1.1}};
    auto qc = make_parametrization("quad_four_curved", quad);
    poly1 qh1{{0.0, 1.0}}, qg1{{0.0, 0.1, -0.1}}, qh2{{1.0, 0.1}}, qg2{{0.0, 1.1}};
    for (double t : {0.0, 0.3, 1.0}) {
        CHECK((qc->point(Eigen::Vector2d(t, 0)) - Eigen::Vector2d(qh1(t), qg1(t))).norm() < 1e-14);
        CHECK((qc->point(Eigen::Vector2d(1, t)) - Eigen::Vector2d(qh2(t), qg2(t))).norm() < 1e-14);
    }
    CHECK((qc->inverse(qc->point(u)) - u).norm() < 1e-12);
}

TEST_CASE("atlas transitions")
{
    atlas s = atlas::sphere();
    Eigen::Vector2d hint(0, 0);
    CHECK((s.transition(0, 1, Eigen::Vector2d(1, 0), hint) - Eigen::Vector2d(1, 0)).norm() < 1e-15);
    CHECK((s.transition(0, 1, Eigen::Vector2d(2, 0), hint) - Eigen::Vector2d(0.5, 0)).norm() < 1e-15);
    atlas t = atlas::torus();
    CHECK((t.transition(0, 0, Eigen::Vector2d(0, 0.3), Eigen::Vector2d(0.9, 0.3)) - Eigen::Vector2d(1, 0.3)).norm()
        < 1e-15);
    // the stereographic metric is invariant under inversion
    Eigen::Vector2d x(0.3, -1.7);
    Eigen::Matrix2d Jt = s.transition_jacobian(0, 1, x);
    Eigen::Matrix2d pulled = Jt.transpose() * s.metric(1, s.transition(0, 1, x, hint)) * Jt;
    CHECK((pulled - s.metric(0, x)).norm() < 1e-14);
}
