#include "doctest.h"

#include "ddr/maxwell.hpp"
#include "ddr/meshgen.hpp"

#include <cmath>
#include <random>

using namespace ddr;

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

// points inside the unit disk, away from the origin
std::vector<Eigen::Vector2d> disk_points()
{
    return {{0.3, 0.1}, {-0.5, 0.4}, {0.05, -0.7}, {0.6, 0.6}, {-0.2, -0.3}};
}

} // namespace

TEST_CASE("exact: point values")
{
    auto sm = make_exact_case("sphere_smooth");
    Eigen::Vector2d o(0, 0);
    CHECK(sm->eval(field::Bp, 0, o, 0).c[0] == doctest::Approx(4));
    CHECK(sm->eval(field::E, 0, Eigen::Vector2d(0.5, 0), 0).c.norm() == 0);
    // dE at the pole: 8 sin(sqrt2 t)/sqrt2
    CHECK(sm->eval(field::dE, 1, o, 1.0).c[0] == doctest::Approx(8 * std::sin(std::sqrt(2.0)) / std::sqrt(2.0)));

    auto to = make_exact_case("torus_c0");
    CHECK(to->eval(field::E, 0, Eigen::Vector2d(0.25, 0.9), 0).c[1] == doctest::Approx(0.0625));
    CHECK(to->eval(field::J, 0, Eigen::Vector2d(0.1, 0.75), 0).c[0] == doctest::Approx(0.5));
    CHECK(to->eval(field::Bp, 0, Eigen::Vector2d(0.5, 0.5), 0.5).c[0] == doctest::Approx(2));
    // nearest image: X - t = 0.8 is the same as -0.2
    CHECK(to->eval(field::dE, 0, Eigen::Vector2d(0.9, 0.2), 0.1).c[0] == doctest::Approx(-0.4));
    auto lit = make_exact_case("torus_c0_literal");
    CHECK(lit->eval(field::dE, 0, Eigen::Vector2d(0.9, 0.2), 0.1).c[0] == doctest::Approx(1.6));

    CHECK_THROWS_AS(make_exact_case("nope"), error);
    CHECK_THROWS_AS(sm->eval(field::E, 2, o, 0), error);
    CHECK(exact_case_names().size() == 5);
}

TEST_CASE("exact: equations hold for the corrected cases")
{
    for (std::string name : {"sphere_smooth", "sphere_c0"}) {
        auto ex = make_exact_case(name);
        for (int chart : {0, 1})
            for (const auto& x : disk_points())
                for (double t : {0.0, 0.7, 2.3}) {
                    auto r = check_equations(*ex, chart, x, t);
                    CHECK(r.faraday < 1e-6);
                    CHECK(r.ampere < 1e-6);
                    CHECK(r.gauss < 1e-6);
                }
    }
    auto to = make_exact_case("torus_c0");
    for (const auto& x : std::vector<Eigen::Vector2d>{{0.3, 0.2}, {0.7, 0.9}, {0.45, 0.05}})
        for (double t : {0.0, 0.1}) {
            auto r = check_equations(*to, 0, x, t);
            CHECK(r.faraday < 1e-6);
            CHECK(r.ampere < 1e-6);
            CHECK(r.gauss < 1e-6);
        }
}

TEST_CASE("exact: printed C0 formulas fail the equations")
{
    auto ex = make_exact_case("sphere_c0_printed");
    double worst_f = 0, worst_a = 0;
    for (const auto& x : disk_points())
        for (double t : {0.0, 0.7}) {
            auto r = check_equations(*ex, 0, x, t);
            worst_f = std::max(worst_f, r.faraday);
            worst_a = std::max(worst_a, r.ampere);
        }
    CHECK(worst_f > 1e-2);
    CHECK(worst_a > 1e-2);
}

TEST_CASE("exact: fields agree across the equator")
{
    // inversion x -> x/|x|^2 is the reflection I - 2 x x^T on the unit circle
    for (std::string name : {"sphere_smooth", "sphere_c0"}) {
        auto ex = make_exact_case(name);
        for (double a : {0.1, 1.3, 2.9, 4.4}) {
            Eigen::Vector2d x(std::cos(a), std::sin(a));
            Eigen::Matrix2d R = Eigen::Matrix2d::Identity() - 2 * x * x.transpose();
            for (double t : {0.2, 1.9}) {
                Eigen::VectorXd en = ex->eval(field::E, 0, x, t).c;
                Eigen::VectorXd es = ex->eval(field::E, 1, x, t).c;
                CHECK((en - R.transpose() * es).norm() < 1e-12);
                double bn = ex->eval(field::Bp, 0, x, t).c[0];
                double bs = ex->eval(field::Bp, 1, x, t).c[0];
                CHECK(std::abs(bn + bs) < 1e-12);
            }
        }
    }
}

TEST_CASE("maxwell: operators")
{
    de_rham_complex c(gen_sphere(0.3), 0);
    auto o = assemble_maxwell(c);
    CHECK(o.M1.rows() == c.ndofs(1));
    CHECK(o.M2.rows() == c.ndofs(2));
    CHECK((sparse(o.M1.transpose()) - o.M1).norm() < 1e-12 * o.M1.norm());
    Eigen::MatrixXd KD = Eigen::MatrixXd(o.K * o.D0);
    CHECK(KD.cwiseAbs().maxCoeff() < 1e-11);
    CHECK(parse_time_scheme("cn") == time_scheme::crank_nicolson);
    CHECK(parse_time_scheme("implicit_euler") == time_scheme::implicit_euler);
    CHECK(to_string(time_scheme::implicit_euler) == "implicit_euler");
    CHECK_THROWS_AS(parse_time_scheme("rk4"), error);
    CHECK_THROWS_AS(maxwell_stepper(o, 0.0, time_scheme::crank_nicolson), error);
}

TEST_CASE("maxwell: zero data stays zero")
{
    de_rham_complex c(gen_torus(3), 1);
    auto o = assemble_maxwell(c);
    maxwell_stepper st(o, 0.1, time_scheme::crank_nicolson);
    maxwell_state s{Eigen::VectorXd::Zero(c.ndofs(1)), Eigen::VectorXd::Zero(c.ndofs(2)), 0};
    for (int i = 0; i < 5; ++i)
        st.step(s, Eigen::VectorXd());
    CHECK(s.E.norm() == 0);
    CHECK(s.B.norm() == 0);
    CHECK(s.t == doctest::Approx(0.5));
}

TEST_CASE("maxwell: energy")
{
    de_rham_complex c(gen_sphere(0.3), 1);
    auto o = assemble_maxwell(c);
    maxwell_state s0{random_vector(c.ndofs(1), 1), random_vector(c.ndofs(2), 2), 0};

    maxwell_stepper cn(o, 0.05, time_scheme::crank_nicolson);
    maxwell_state s = s0;
    double e0 = cn.energy(s);
    for (int i = 0; i < 20; ++i) {
        cn.step(s, Eigen::VectorXd());
        CHECK(std::abs(cn.energy(s) - e0) < 1e-13 * e0);
    }

    maxwell_stepper ie(o, 0.05, time_scheme::implicit_euler);
    s = s0;
    double prev = ie.energy(s);
    for (int i = 0; i < 20; ++i) {
        ie.step(s, Eigen::VectorXd());
        double e = ie.energy(s);
        CHECK(e <= prev * (1 + 1e-14));
        prev = e;
    }
    CHECK(prev < e0);
}

TEST_CASE("maxwell: discrete constraint")
{
    de_rham_complex c(gen_torus(3), 1);
    auto o = assemble_maxwell(c);
    const double dt = 0.02;
    maxwell_stepper st(o, dt, time_scheme::crank_nicolson);
    maxwell_state s{random_vector(c.ndofs(1), 3), random_vector(c.ndofs(2), 4), 0};
    constraint_monitor cm(o, s.E);
    CHECK(cm.residual(s.E) == 0);
    for (int i = 0; i < 30; ++i) {
        Eigen::VectorXd J = random_vector(c.ndofs(1), 10 + i);
        cm.add_source(dt, J);
        st.step(s, J);
    }
    CHECK(cm.residual(s.E) < 1e-12);
}

TEST_CASE("maxwell: constraint monitor catches a broken complex")
{
    de_rham_complex c(gen_torus(3), 0);
    auto o = assemble_maxwell(c);
    // perturb D1 so that D1 D0 != 0
    sparse P = o.D1;
    for (int j = 0; j < P.outerSize(); ++j)
        for (sparse::InnerIterator it(P, j); it; ++it)
            it.valueRef() *= 1 + 1e-3 * ((it.row() + 3 * it.col()) % 5);
    o.D1 = P;
    o.K = o.M2 * o.D1;
    maxwell_stepper st(o, 0.02, time_scheme::crank_nicolson);
    maxwell_state s{random_vector(c.ndofs(1), 5), random_vector(c.ndofs(2), 6), 0};
    constraint_monitor cm(o, s.E);
    for (int i = 0; i < 30; ++i)
        st.step(s, Eigen::VectorXd());
    CHECK(cm.residual(s.E) > 1e-6);
}

TEST_CASE("maxwell: separable interpolation matches direct interpolation")
{
    de_rham_complex c(gen_sphere(0.3), 1);
    for (std::string name : {"sphere_smooth", "sphere_c0"}) {
        auto ex = make_exact_case(name);
        field_interpolator I(c, *ex, field::E);
        const double t = 1.234;
        Eigen::VectorXd direct = c.interpolate(1, [&](int ch, const Eigen::Vector2d& x) { return ex->eval(field::E, ch, x, t); });
        CHECK((I.at(t) - direct).cwiseAbs().maxCoeff() < 1e-11);
    }
}

TEST_CASE("maxwell: short runs")
{
    run_config cfg;
    cfg.dt = 0.01;
    cfg.tmax = 0.5;
    cfg.series_every = 10;
    {
        de_rham_complex c(gen_sphere(0.3), 0);
        auto rep = run_case(c, *make_exact_case("sphere_smooth"), cfg);
        CHECK(rep.steps == 50);
        CHECK(rep.energy_drift < 1e-12);
        CHECK(rep.constraint_max < 1e-12);
        CHECK(rep.err_E > 0);
        CHECK(rep.series_t.size() == 6);
        CHECK(rep.h == doctest::Approx(c.get_mesh().meshsize()));
    }
    {
        de_rham_complex c(gen_torus(4), 0);
        auto rep = run_case(c, *make_exact_case("torus_c0"), cfg);
        CHECK(rep.constraint_max < 1e-12);
        CHECK(std::isfinite(rep.err_B));
        CHECK_THROWS_AS(run_case(c, *make_exact_case("sphere_smooth"), cfg), error);
    }
    // tmax not a multiple of dt: the step shrinks
    cfg.tmax = 0.055;
    de_rham_complex c(gen_torus(2), 0);
    auto rep = run_case(c, *make_exact_case("torus_c0"), cfg);
    CHECK(rep.steps == 6);
    CHECK(rep.dt * rep.steps == doctest::Approx(0.055));
}
