#include "doctest.h"

#include "ddr/ddr.hpp"
#include "ddr/meshgen.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <random>

using namespace ddr;
using std::numbers::pi;

namespace {

Eigen::VectorXd random_vector(int n, unsigned seed)
{
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> U(-1, 1);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i)
        v[i] = U(gen);
    return v;
}

alt_value value0(double f)
{
    alt_value a(2, 0);
    a.c[0] = f;
    return a;
}

alt_value value1(double fx, double fy)
{
    alt_value a(2, 1);
    a.c << fx, fy;
    return a;
}

alt_value value2(double f)
{
    alt_value a(2, 2);
    a.c[0] = f;
    return a;
}

// torus fields
alt_value t0(int, const Eigen::Vector2d& x) { return value0(std::sin(2 * pi * x[0]) * std::cos(2 * pi * x[1])); }
alt_value dt0(int, const Eigen::Vector2d& x)
{
    return value1(2 * pi * std::cos(2 * pi * x[0]) * std::cos(2 * pi * x[1]),
        -2 * pi * std::sin(2 * pi * x[0]) * std::sin(2 * pi * x[1]));
}
alt_value t1(int, const Eigen::Vector2d& x)
{
    return value1(std::sin(2 * pi * x[0]) * std::cos(2 * pi * x[1]), std::cos(2 * pi * x[0]));
}
alt_value dt1(int, const Eigen::Vector2d& x)
{
    double s = std::sin(2 * pi * x[0]);
    return value2(-2 * pi * s + 2 * pi * s * std::sin(2 * pi * x[1]));
}

// sphere fields through the embedding; chart 1 flips the height
struct embed_val {
    double v, dX, dY;
};
embed_val height(int chart, const Eigen::Vector2d& x)
{
    double s = 1 + x.squaredNorm();
    double sg = chart == 0 ? 1 : -1;
    return {sg * (2 - s) / s, -sg * 4 * x[0] / (s * s), -sg * 4 * x[1] / (s * s)};
}
embed_val first(int, const Eigen::Vector2d& x)
{
    double s = 1 + x.squaredNorm();
    return {2 * x[0] / s, 2 * (s - 2 * x[0] * x[0]) / (s * s), -4 * x[0] * x[1] / (s * s)};
}
alt_value s0(int c, const Eigen::Vector2d& x) { return value0(height(c, x).v); }
alt_value ds0(int c, const Eigen::Vector2d& x)
{
    auto h = height(c, x);
    return value1(h.dX, h.dY);
}
// z dx
alt_value s1(int c, const Eigen::Vector2d& x)
{
    auto h = height(c, x);
    auto f = first(c, x);
    return value1(h.v * f.dX, h.v * f.dY);
}
alt_value ds1(int c, const Eigen::Vector2d& x)
{
    auto h = height(c, x);
    auto f = first(c, x);
    return value2(h.dX * f.dY - h.dY * f.dX);
}

double commutation_residual(const de_rham_complex& c, int k, const form_field& w, const form_field& dw)
{
    Eigen::VectorXd a = c.derivative(k) * c.interpolate(k, w);
    Eigen::VectorXd b = c.interpolate(k + 1, dw);
    return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

void check_identities(const de_rham_complex& c)
{
    const mesh& m = c.get_mesh();
    double proj = 0, link = 0, stokes = 0;
    for (int k = 0; k <= 2; ++k) {
        Eigen::VectorXd x = random_vector(c.ndofs(k), 11 + k);
        for (int d = k; d <= 2; ++d)
            for (std::size_t id = 0; id < m.count(d); ++id)
                proj = std::max(proj, c.projection_residual(k, d, int(id), x));
        if (k >= 1) {
            Eigen::VectorXd y = random_vector(c.ndofs(k - 1), 23 + k);
            for (int d = k; d <= 2; ++d)
                for (std::size_t id = 0; id < m.count(d); ++id)
                    link = std::max(link, c.link_residual(k, d, int(id), y));
        }
    }
    Eigen::VectorXd x0 = random_vector(c.ndofs(0), 5);
    for (std::size_t id = 0; id < m.count(2); ++id)
        stokes = std::max(stokes, c.stokes_residual(int(id), x0));
    CHECK(proj < 1e-10);
    CHECK(link < 1e-10);
    CHECK(stokes < 1e-10);
}

double min_eigenvalue(const sparse& M)
{
    Eigen::MatrixXd A(M);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    return es.eigenvalues()[0];
}

} // namespace

TEST_CASE("ddr: lowest order torus layout")
{
    mesh m = gen_torus(2);
    de_rham_complex c(m, 0);
    CHECK(c.ndofs(0) == 4);
    CHECK(c.ndofs(1) == 8);
    CHECK(c.ndofs(2) == 4);
    CHECK(c.derivative(0).rows() == 8);
    CHECK(c.derivative(0).cols() == 4);
    CHECK(c.derivative(1).rows() == 4);
    CHECK(c.derivative(1).cols() == 8);
    // dofs are metric proxies: d0 rows are endpoint differences over the edge length 1/2
    Eigen::MatrixXd D0(c.derivative(0));
    for (int e = 0; e < 8; ++e) {
        CHECK(std::abs(D0.row(e).sum()) < 1e-13);
        CHECK(D0.row(e).cwiseAbs().maxCoeff() == doctest::Approx(2));
        CHECK(D0.row(e).cwiseAbs().sum() == doctest::Approx(4));
    }
}

TEST_CASE("ddr: block sizes follow the trimmed dimensions")
{
    mesh m = gen_torus(2);
    for (int r = 0; r <= 2; ++r) {
        de_rham_complex c(m, r);
        for (int k = 0; k <= 2; ++k)
            for (int d = k; d <= 2; ++d)
                CHECK(c.block_size(k, d) == trimmed_dimension(d, r, d - k));
    }
    de_rham_complex c1(m, 1);
    CHECK(c1.ndofs(0) == 4 * 1 + 8 * int(trimmed_dimension(1, 1, 1)) + 4 * int(trimmed_dimension(2, 1, 2)));
}

TEST_CASE("ddr: complex property d1 d0 = 0")
{
    for (int r = 0; r <= 2; ++r) {
        mesh m = gen_torus(3);
        de_rham_complex c(m, r);
        sparse P = c.derivative(1) * c.derivative(0);
        double nd = Eigen::MatrixXd(c.derivative(0)).cwiseAbs().maxCoeff();
        CHECK(Eigen::MatrixXd(P).cwiseAbs().maxCoeff() < 1e-11 * nd);
    }
    for (int r = 0; r <= 1; ++r) {
        mesh m = gen_sphere(0.3);
        de_rham_complex c(m, r);
        sparse P = c.derivative(1) * c.derivative(0);
        double nd = Eigen::MatrixXd(c.derivative(0)).cwiseAbs().maxCoeff();
        CHECK(Eigen::MatrixXd(P).cwiseAbs().maxCoeff() < 1e-10 * nd);
    }
}

TEST_CASE("ddr: projection, link and Stokes identities")
{
    for (int r = 0; r <= 2; ++r) {
        CAPTURE(r);
        check_identities(de_rham_complex(gen_torus(3), r));
    }
    for (int r = 0; r <= 1; ++r) {
        CAPTURE(r);
        check_identities(de_rham_complex(gen_sphere(0.3), r));
    }
}

TEST_CASE("ddr: single curved cells")
{
    json cone{{"g1", {2.0, -0.5}}, {"g3", {1.0}}, {"h", {0.2, 0.8}}};
    json tri{{"h1", {0.0, 1.0}}, {"g1", {0.0, -0.2, 0.2}}, {"h2", {0.0, 1.0}}, {"g2", {1.0, -0.9, -0.1}}};
    json quad{{"h1", {0.0, 1.0}}, {"g1", {0.0, 0.1, -0.1}}, {"h2", {1.0, 0.2}}, {"g2", {0.0, 1.1}},
        {"h3", {0.0, 1.2}}, {"g3", {1.0, 0.1}}, {"h4", {0.0}}, {"g4", {0.0, 1.0}}, {"a", 1.2}, {"b", 1.1}};
    for (int r = 0; r <= 2; ++r) {
        CAPTURE(r);
        check_identities(de_rham_complex(cone_cell(cone), r));
        check_identities(de_rham_complex(tri_two_curved(tri), r));
        check_identities(de_rham_complex(quad_four_curved(quad), r));
    }
}

TEST_CASE("ddr: interpolation commutes with d up to quadrature")
{
    mesh tm = gen_torus(4);
    mesh sm = gen_sphere(0.3);
    for (int r = 0; r <= 1; ++r) {
        CAPTURE(r);
        de_rham_complex a(tm, r), b(tm, r, a.quad_degree() + 4);
        double ra0 = commutation_residual(a, 0, t0, dt0), rb0 = commutation_residual(b, 0, t0, dt0);
        double ra1 = commutation_residual(a, 1, t1, dt1), rb1 = commutation_residual(b, 1, t1, dt1);
        CHECK(ra0 <= 10 * std::abs(ra0 - rb0) + 1e-12);
        CHECK(ra1 <= 10 * std::abs(ra1 - rb1) + 1e-12);

        de_rham_complex sa(sm, r), sb(sm, r, sa.quad_degree() + 4);
        double sa0 = commutation_residual(sa, 0, s0, ds0), sb0 = commutation_residual(sb, 0, s0, ds0);
        double sa1 = commutation_residual(sa, 1, s1, ds1), sb1 = commutation_residual(sb, 1, s1, ds1);
        CHECK(sa0 <= 10 * std::abs(sa0 - sb0) + 1e-12);
        CHECK(sa1 <= 10 * std::abs(sa1 - sb1) + 1e-12);
    }
}

TEST_CASE("ddr: Betti numbers")
{
    for (int r = 0; r <= 1; ++r) {
        CAPTURE(r);
        auto bt = cohomology_betti(de_rham_complex(gen_torus(3), r));
        CHECK(bt.betti == std::array<int, 3>{1, 2, 1});
        CHECK(bt.gap_ok);
        auto bs = cohomology_betti(de_rham_complex(gen_sphere(0.3), r));
        CHECK(bs.betti == std::array<int, 3>{1, 0, 1});
        CHECK(bs.gap_ok);
    }
}

TEST_CASE("ddr: interpolation basics")
{
    mesh m = gen_torus(3);
    de_rham_complex c(m, 1);
    auto zero0 = [](int, const Eigen::Vector2d&) { return value0(0); };
    auto zero1 = [](int, const Eigen::Vector2d&) { return value1(0, 0); };
    CHECK(c.interpolate(0, zero0).cwiseAbs().maxCoeff() == 0);
    CHECK(c.interpolate(1, zero1).cwiseAbs().maxCoeff() == 0);
    // linear in the field
    auto two = [](int ch, const Eigen::Vector2d& x) {
        auto v = t1(ch, x);
        v.c *= 2;
        return v;
    };
    Eigen::VectorXd a = c.interpolate(1, t1), b = c.interpolate(1, two);
    CHECK((b - 2 * a).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("ddr: polynomial consistency away from the seam")
{
    // affine boxes: chart polynomials of degree <= r are reproduced exactly
    const int n = 4;
    mesh m = gen_torus(n);
    for (int r = 0; r <= 2; ++r) {
        CAPTURE(r);
        de_rham_complex c(m, r);
        auto p0 = [r](int, const Eigen::Vector2d& x) { return value0(1 + (r >= 1 ? x[0] - 2 * x[1] : 0) + (r >= 2 ? x[0] * x[1] : 0)); };
        auto p1 = [r](int, const Eigen::Vector2d& x) {
            return value1(1 + (r >= 1 ? x[1] : 0) + (r >= 2 ? x[0] * x[0] : 0), -2 + (r >= 1 ? x[0] : 0));
        };
        auto p2 = [r](int, const Eigen::Vector2d& x) { return value2(3 + (r >= 1 ? x[0] + x[1] : 0) + (r >= 2 ? x[1] * x[1] : 0)); };
        std::array<form_field, 3> fields{p0, p1, p2};
        for (int k = 0; k <= 2; ++k) {
            Eigen::VectorXd x = c.interpolate(k, fields[k]);
            double err = 0;
            for (int j = 0; j + 1 < n; ++j)
                for (int i = 0; i + 1 < n; ++i) {
                    int f = j * n + i;
                    cell_geometry g = m.geometry(2, f);
                    for (double s : {0.1, 0.5, 0.8})
                        for (double t : {0.2, 0.7}) {
                            Eigen::VectorXd u(2);
                            u << s, t;
                            frame fr = g.at(u);
                            alt_value v = c.potential_value(k, f, c.restrict(k, 2, f, x), u);
                            alt_value w = pullback_sample(fr, fields[k](0, fr.x));
                            err = std::max(err, (v.c - w.c).cwiseAbs().maxCoeff());
                        }
                }
            CAPTURE(k);
            CHECK(err < 1e-11);
        }
    }
}

TEST_CASE("ddr: mass matrices")
{
    mesh m = gen_torus(3);
    for (int r = 0; r <= 1; ++r) {
        de_rham_complex c(m, r);
        for (int k = 0; k <= 2; ++k) {
            const sparse& M = c.mass(k);
            CHECK(Eigen::MatrixXd(M - sparse(M.transpose())).cwiseAbs().maxCoeff() < 1e-14);
            CHECK(min_eigenvalue(M) > 0);
        }
        auto one = [](int, const Eigen::Vector2d&) { return value0(1); };
        auto vol = [](int, const Eigen::Vector2d&) { return value2(1); };
        Eigen::VectorXd a = c.interpolate(0, one), v = c.interpolate(2, vol);
        CHECK(a.dot(c.mass(0) * a) == doctest::Approx(1).epsilon(1e-12));
        CHECK(v.dot(c.mass(2) * v) == doctest::Approx(1).epsilon(1e-12));
    }
    // the metric enters the potential, so constants are only approximated on the sphere
    auto one = [](int, const Eigen::Vector2d&) { return value0(1); };
    std::vector<double> err;
    for (double rs : {0.3, 0.15}) {
        de_rham_complex c(gen_sphere(rs), 1);
        Eigen::VectorXd a = c.interpolate(0, one);
        err.push_back(std::abs(a.dot(c.mass(0) * a) - 4 * pi));
        MESSAGE("sphere area error ", err.back());
        CHECK(min_eigenvalue(c.mass(1)) > 0);
    }
    CHECK(err[1] < err[0] / 3);
}

TEST_CASE("ddr: potential error decreases under refinement")
{
    std::vector<double> e;
    for (int n : {4, 8}) {
        de_rham_complex c(gen_torus(n), 1);
        e.push_back(c.potential_error(1, c.interpolate(1, t1), t1));
    }
    // second order expected for r = 1
    CHECK(std::log2(e[0] / e[1]) > 1.7);
}

TEST_CASE("ddr: load functional")
{
    form_field one = [](int, const Eigen::Vector2d&) {
        alt_value v(2, 0);
        v.c[0] = 1;
        return v;
    };
    // flat cells: potentials reproduce constants, so <1, P I 1> is the area
    for (int r = 0; r <= 1; ++r) {
        de_rham_complex c(gen_torus(3), r);
        CHECK(c.load(0, one).dot(c.interpolate(0, one)) == doctest::Approx(1).epsilon(1e-12));
    }
    // curved cells only reproduce *^{-1} of polynomials; the gap to 4 pi shrinks with r
    mesh s = gen_sphere(0.3);
    double last = 1;
    for (int r = 0; r <= 2; ++r) {
        de_rham_complex c(s, r);
        double gap = std::abs(c.load(0, one).dot(c.interpolate(0, one)) - 4 * pi) / (4 * pi);
        CHECK(gap < last / 5);
        last = gap;
    }
    de_rham_complex t(gen_torus(3), 1);
    form_field dx = [](int, const Eigen::Vector2d&) {
        alt_value v(2, 1);
        v.c[0] = 1;
        return v;
    };
    Eigen::VectorXd Ix = t.interpolate(1, dx);
    CHECK(t.load(1, dx).dot(Ix) == doctest::Approx(1).epsilon(1e-12));
    // linear in the field
    form_field two = [&](int ch, const Eigen::Vector2d& x) {
        alt_value v = dx(ch, x);
        v.c *= 2;
        return v;
    };
    CHECK((t.load(1, two) - 2 * t.load(1, dx)).norm() < 1e-12);
}

TEST_CASE("ddr: interpolation averages across chart interfaces")
{
    mesh s = gen_sphere(0.3);
    de_rham_complex c(s, 0);
    form_field w = [](int chart, const Eigen::Vector2d&) {
        alt_value v(2, 0);
        v.c[0] = chart == 0 ? 1 : 3;
        return v;
    };
    Eigen::VectorXd x = c.interpolate(0, w);
    int equator = 0;
    for (int v = 0; v < int(s.count(0)); ++v) {
        const cell& p = s.at(0, v);
        double want = std::abs(p.center.norm() - 1) < 1e-12 ? 2 : (p.chart == 0 ? 1 : 3);
        equator += want == 2;
        CHECK(x[c.offset(0, 0, v)] == doctest::Approx(want));
    }
    CHECK(equator > 0);
}
