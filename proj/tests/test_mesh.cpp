#include "doctest.h"

#include "ddr/meshgen.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

using namespace ddr;
using std::numbers::pi;

namespace {

Eigen::VectorXd u1(double t) { return Eigen::VectorXd::Constant(1, t); }

void require_valid(const mesh& m)
{
    auto rep = validate_mesh(m);
    for (const auto& p : rep.problems)
        MESSAGE(p);
    REQUIRE(rep.ok);
}

json cone_params()
{
    return json{{"g1", {2.0, -0.5}}, {"g3", {1.0}}, {"h", {0.2, 0.8}}};
}

json tri_params()
{
    return json{{"h1", {0.0, 1.0}}, {"g1", {0.0, -0.2, 0.2}}, {"h2", {0.0, 1.0}}, {"g2", {1.0, -0.9, -0.1}}};
}

json quad_params()
{
    return json{{"h1", {0.0, 1.0}}, {"g1", {0.0, 0.1, -0.1}}, {"h2", {1.0, 0.2}}, {"g2", {0.0, 1.1}},
        {"h3", {0.0, 1.2}}, {"g3", {1.0, 0.1}}, {"h4", {0.0}}, {"g4", {0.0, 1.0}}, {"a", 1.2}, {"b", 1.1}};
}

} // namespace

TEST_CASE("torus counts")
{
    mesh m = gen_torus(2);
    CHECK(m.count(2) == 4);
    CHECK(m.count(1) == 8);
    CHECK(m.count(0) == 4);
    CHECK(m.euler_characteristic() == 0);
    require_valid(m);
    CHECK_THROWS_AS(gen_torus(1), error);
}

TEST_CASE("torus traces exactly affine")
{
    mesh m = gen_torus(4);
    auto rep = validate_mesh(m);
    REQUIRE(rep.ok);
    CHECK(rep.affine_residual == 0.0);
    CHECK(rep.map_mismatch == 0.0);
    CHECK(gen_torus(8).meshsize() == doctest::Approx(0.125));
    CHECK(gen_torus(8).mean_meshsize() == doctest::Approx(0.125));
}

TEST_CASE("torus boundary signs")
{
    mesh m = gen_torus(4);
    // bottom, right forward; top, left reversed
    const auto& b = m.at(2, 5).boundary;
    REQUIRE(b.size() == 4);
    CHECK(b[0].sign == 1);
    CHECK(b[1].sign == 1);
    CHECK(b[2].sign == -1);
    CHECK(b[3].sign == -1);
    // wrapped face at the corner of the grid
    const auto& c = m.at(2, 15).boundary;
    CHECK(c[1].T.b[0] == 1.0);
    CHECK(c[2].T.b[1] == 1.0);
}

TEST_CASE("sphere census at r_s = 0.3")
{
    mesh m = gen_sphere(0.3);
    auto c = census(m);
    CHECK(c.boundary == 28);
    CHECK(c.triangles == 16);
    CHECK(c.quads == 4);
    CHECK(c.pentagons == 12);
    CHECK(c.other == 0);
    CHECK(m.euler_characteristic() == 2);
    require_valid(m);
    double area = 0;
    for (std::size_t f = 0; f < m.count(2); ++f)
        area += m.geometry(2, int(f)).measure(20);
    CHECK(area == doctest::Approx(4 * pi).epsilon(1e-10));
}

TEST_CASE("sphere sequence")
{
    double hprev = 0;
    for (double rs : sphere_sequence(3)) {
        mesh m = gen_sphere(rs);
        CHECK(m.euler_characteristic() == 2);
        require_valid(m);
        double h = m.mean_meshsize();
        if (hprev > 0) {
            CHECK(h / hprev >= 0.4);
            CHECK(h / hprev <= 0.6);
        }
        hprev = h;
    }
}

TEST_CASE("sphere generator errors")
{
    CHECK_THROWS_WITH_AS(gen_sphere(0.9), doctest::Contains("segment count < 3"), error);
    CHECK_THROWS_AS(gen_sphere(0.0), error);
    CHECK_THROWS_AS(gen_sphere(-0.1), error);
    CHECK_THROWS_AS(gen_sphere(0.5), error);
    CHECK_NOTHROW(gen_sphere(0.45));
}

TEST_CASE("equator shared across charts")
{
    mesh m = gen_sphere(0.3);
    const auto& ef = m.edge_faces();
    int interfaces = 0;
    for (std::size_t e = 0; e < m.count(1); ++e) {
        const auto& fs = ef[e];
        if (m.at(2, fs[0]).chart == m.at(2, fs[1]).chart)
            continue;
        ++interfaces;
        auto north = chart_transition_edge(m, int(e), 0, 1);
        for (double t : {0.0, 0.5, 1.0}) {
            Eigen::Vector2d x = m.at(1, int(e)).param->point(u1(t));
            CHECK((north(t) - x).norm() < 1e-13);
        }
    }
    CHECK(interfaces == 14);
    CHECK_THROWS_AS(chart_transition_edge(m, int(m.count(1)) - 1, 0, 1), error);
}

TEST_CASE("atlas inversion examples")
{
    atlas A = atlas::sphere();
    Eigen::Vector2d y = A.transition(0, 1, {1, 0}, {0, 0});
    CHECK((y - Eigen::Vector2d(1, 0)).norm() < 1e-15);
    y = A.transition(0, 1, {2, 0}, {0, 0});
    CHECK((y - Eigen::Vector2d(0.5, 0)).norm() < 1e-15);
}

TEST_CASE("torus seam transition")
{
    mesh m = gen_torus(4);
    // vertical edge at X = 0, seen as X = 1 from the last column
    int e = 16 + 0;
    auto f = chart_transition_edge(m, e, 0, 0);
    CHECK(f(0.5)[0] == doctest::Approx(1.0));
    CHECK_THROWS_AS(chart_transition_edge(m, 16 + 1, 0, 0), error);
}

TEST_CASE("cone cell")
{
    mesh m = cone_cell(cone_params());
    require_valid(m);
    const auto& p = *m.at(2, 0).param;
    for (double s : {0.0, 0.3, 1.0}) {
        Eigen::Vector2d x = p.point(Eigen::Vector2d(0, s));
        CHECK((x - (s + 1) * Eigen::Vector2d(std::cos(0.2), std::sin(0.2))).norm() < 1e-14);
    }
    Eigen::Vector2d x = p.point(Eigen::Vector2d(0.4, 0));
    double th = 0.2 + 0.8 * 0.4;
    CHECK((x - Eigen::Vector2d(std::cos(th), std::sin(th))).norm() < 1e-14);
    CHECK(m.at(2, 0).orientation == -1);
    auto rep = validate_mesh(m);
    CHECK(rep.affine_residual < 1e-12);

    json bad = cone_params();
    bad["g1"] = {0.5};
    CHECK_THROWS_AS(cone_cell(bad), error);
}

TEST_CASE("triangle with two curved edges")
{
    mesh flat = tri_two_curved(json{{"h1", {0.0, 1.0}}, {"g1", {0.0}}, {"h2", {0.0, 1.0}}, {"g2", {1.0, -1.0}}});
    auto rf = validate_mesh(flat);
    CHECK(rf.ok);
    CHECK(rf.affine_residual < 1e-14);

    mesh m = tri_two_curved(tri_params());
    require_valid(m);
    const auto& p = *m.at(2, 0).param;
    for (double t : {0.0, 0.25, 0.5}) {
        Eigen::Vector2d x(t, 1 - t - 0.1 * t * (t - 1));
        Eigen::VectorXd u = p.inverse(x);
        CHECK(std::abs(u[0] - t) < 1e-13);
        CHECK(std::abs(u[1] - (1 - t)) < 1e-13);
        u = p.inverse(Eigen::Vector2d(0, t));
        CHECK(std::abs(u[0]) < 1e-13);
        CHECK(std::abs(u[1] - t) < 1e-13);
    }
    json bad = tri_params();
    bad["g2"] = {1.0, -0.5};
    CHECK_THROWS_AS(tri_two_curved(bad), error);
}

TEST_CASE("quadrilateral with four curved edges")
{
    mesh m = quad_four_curved(quad_params());
    require_valid(m);
    const auto& p = *m.at(2, 0).param;
    for (double t : {0.0, 0.3, 1.0}) {
        Eigen::Vector2d x = p.point(Eigen::Vector2d(t, 0));
        CHECK((x - Eigen::Vector2d(t, 0.1 * t * (1 - t))).norm() < 1e-14);
        x = p.point(Eigen::Vector2d(1, t));
        CHECK((x - Eigen::Vector2d(1 + 0.2 * t, 1.1 * t)).norm() < 1e-14);
    }
    json bad = quad_params();
    bad["a"] = 1.5;
    CHECK_THROWS_AS(quad_four_curved(bad), error);
}

TEST_CASE("mesh file round trip")
{
    mesh m = gen_sphere(0.3);
    std::string path = "ddr_test_mesh.json";
    save_mesh(m, path);
    mesh r = load_mesh(path);
    std::remove(path.c_str());
    for (int d = 0; d <= 2; ++d)
        REQUIRE(r.count(d) == m.count(d));
    CHECK(r.charts.manifold == "sphere");
    CHECK(mesh_to_json(r) == mesh_to_json(m));
    require_valid(r);

    json j = mesh_to_json(gen_torus(2));
    j["format"] = 2;
    CHECK_THROWS_AS(mesh_from_json(j), error);
    CHECK_THROWS_AS(load_mesh("/nonexistent/mesh.json"), error);
}

TEST_CASE("validation catches a flipped sign")
{
    mesh m = gen_torus(3);
    m.at_mut(2, 0).boundary[0].sign *= -1;
    m.finalize();
    auto rep = validate_mesh(m);
    CHECK_FALSE(rep.ok);
}
