#include "ddr/exact.hpp"

#include <cmath>

namespace ddr {

namespace {

alt_value v0(double a)
{
    alt_value r(2, 0);
    r.c[0] = a;
    return r;
}
alt_value v1(double a, double b)
{
    alt_value r(2, 1);
    r.c << a, b;
    return r;
}
alt_value v2(double a)
{
    alt_value r(2, 2);
    r.c[0] = a;
    return r;
}

void check_chart(int chart, int n)
{
    if (chart < 0 || chart >= n)
        throw error("exact solution: unknown chart " + std::to_string(chart));
}

double stereo_factor(const Eigen::Vector2d& x)
{
    double s = 1 + x.squaredNorm();
    return 4 / (s * s);
}

class sphere_smooth final : public exact_case {
public:
    std::string name() const override { return "sphere_smooth"; }
    std::string manifold() const override { return "sphere"; }
    bool vacuum() const override { return true; }
    double metric_factor(int, const Eigen::Vector2d& x) const override { return stereo_factor(x); }

    alt_value eval(field f, int chart, const Eigen::Vector2d& x, double t) const override
    {
        check_chart(chart, 2);
        const double w = std::sqrt(2.0);
        double s = 1 + x.squaredNorm();
        double lam = 4 / (s * s);
        double a = std::sin(w * t) / w;
        switch (f) {
        case field::E:
            return v1(-x[1] * a * lam, x[0] * a * lam);
        case field::Bp:
            return v2(std::cos(w * t) * (2 - s) / s * lam);
        case field::dE:
            return v2(8 * a * (2 - s) / (s * s * s));
        case field::J:
            return v1(0, 0);
        case field::rho:
            return v0(0);
        }
        throw error("exact solution: bad field");
    }

    std::vector<std::function<double(double)>> time_basis(field f) const override
    {
        const double w = std::sqrt(2.0);
        if (f == field::E || f == field::dE)
            return {[w](double t) { return std::sin(w * t); }};
        if (f == field::Bp)
            return {[w](double t) { return std::cos(w * t); }};
        return {[](double) { return 1.0; }};
    }
};

// Piecewise definition in the two stereographic maps, continuous across the
// equator. The printed variant keeps a factor X on the cos term of E_Y and the
// constant 1/2 in J; those do not satisfy the equations.
class sphere_c0 final : public exact_case {
public:
    explicit sphere_c0(bool printed) : printed_(printed) { }

    std::string name() const override { return printed_ ? "sphere_c0_printed" : "sphere_c0"; }
    std::string manifold() const override { return "sphere"; }
    double metric_factor(int, const Eigen::Vector2d& x) const override { return stereo_factor(x); }

    alt_value eval(field f, int chart, const Eigen::Vector2d& x, double t) const override
    {
        check_chart(chart, 2);
        const double X = x[0], Y = x[1], s = X * X + Y * Y;
        const double sn = std::sin(t);
        // the south map is the north one with cos t -> -cos t; B' and J also flip sign
        const double cs = chart == 0 ? std::cos(t) : -std::cos(t);
        const double sg = chart == 0 ? 1 : -1;
        const double k = printed_ ? 0.5 : 1.5;
        switch (f) {
        case field::E: {
            double ex = Y / 4 * ((2 - s) * sn - 2 * X * cs);
            double ey = X / 4 * (s - 2) * sn + (printed_ ? X : 1.0) * (3 * X * X + Y * Y - 3) * cs / 4;
            return v1(ex, ey);
        }
        case field::dE: {
            double dyex = ((2 - s) * sn - 2 * X * cs) / 4 - Y * Y * sn / 2;
            double dxey = (s - 2) * sn / 4 + X * X * sn / 2;
            if (printed_)
                dxey += ((3 * X * X + Y * Y - 3) + 6 * X * X) * cs / 4;
            else
                dxey += 6 * X * cs / 4;
            return v2(dxey - dyex);
        }
        case field::Bp:
            return v2(sg * ((s - 1) * cs + s + 1 - 2 * X * sn));
        case field::J: {
            double q = 1.5 * s * s * (1 + cs) + s * (3 + 1.25 * cs) + k - cs;
            double jx = Y * q - X * Y * (2 * s + 2.5) * sn;
            double jy = -X * q + (10 * X * X * X * X + 12 * X * X * Y * Y + 15 * X * X + 2 * Y * Y * Y * Y + 5 * Y * Y - 1) * sn / 4;
            return v1(sg * jx, sg * jy);
        }
        case field::rho:
            return v0(0);
        }
        throw error("exact solution: bad field");
    }

    std::vector<std::function<double(double)>> time_basis(field) const override
    {
        return {[](double) { return 1.0; }, [](double t) { return std::sin(t); }, [](double t) { return std::cos(t); }};
    }

private:
    bool printed_;
};

// Flat torus with unit period. The default uses the periodic (nearest image)
// offset so that the fields are continuous; the literal variant uses the chart
// coordinate reduced to [0,1) as is.
class torus_c0 final : public exact_case {
public:
    explicit torus_c0(bool literal) : literal_(literal) { }

    std::string name() const override { return literal_ ? "torus_c0_literal" : "torus_c0"; }
    std::string manifold() const override { return "torus"; }
    double metric_factor(int, const Eigen::Vector2d&) const override { return 1; }

    alt_value eval(field f, int chart, const Eigen::Vector2d& x, double t) const override
    {
        check_chart(chart, 1);
        double dx = offset(x[0] - t, x[0]);
        double dy = offset(x[1] - 0.5, x[1]);
        switch (f) {
        case field::E:
            return v1(0, dx * dx);
        case field::dE:
            return v2(2 * dx);
        case field::Bp:
            return v2(2 + dx * dx + dy * dy);
        case field::J:
            return v1(2 * dy, 0);
        case field::rho:
            return v0(0);
        }
        throw error("exact solution: bad field");
    }

    std::vector<std::function<double(double)>> time_basis(field f) const override
    {
        if (f == field::J || f == field::rho)
            return {[](double) { return 1.0; }};
        return {};
    }

private:
    double offset(double d, double coord) const
    {
        if (!literal_)
            return d - std::round(d);
        return d - std::floor(coord);
    }

    bool literal_;
};

} // namespace

std::vector<std::string> exact_case_names()
{
    return {"sphere_smooth", "sphere_c0", "sphere_c0_printed", "torus_c0", "torus_c0_literal"};
}

std::unique_ptr<exact_case> make_exact_case(const std::string& name)
{
    if (name == "sphere_smooth")
        return std::make_unique<sphere_smooth>();
    if (name == "sphere_c0")
        return std::make_unique<sphere_c0>(false);
    if (name == "sphere_c0_printed")
        return std::make_unique<sphere_c0>(true);
    if (name == "torus_c0")
        return std::make_unique<torus_c0>(false);
    if (name == "torus_c0_literal")
        return std::make_unique<torus_c0>(true);
    throw error("unknown exact case '" + name + "'");
}

equation_residual check_equations(const exact_case& c, int chart, const Eigen::Vector2d& x, double t, double h)
{
    auto ev = [&](field f, const Eigen::Vector2d& p, double s) { return c.eval(f, chart, p, s).c; };
    auto ex = [&](int i) {
        Eigen::Vector2d e = Eigen::Vector2d::Zero();
        e[i] = h;
        return e;
    };
    // spatial partials of E and of B = B'/lambda
    auto dE = [&](int i) { return Eigen::Vector2d((ev(field::E, x + ex(i), t) - ev(field::E, x - ex(i), t)) / (2 * h)); };
    auto B = [&](const Eigen::Vector2d& p) { return ev(field::Bp, p, t)[0] / c.metric_factor(chart, p); };
    auto dB = [&](int i) { return (B(x + ex(i)) - B(x - ex(i))) / (2 * h); };
    Eigen::Vector2d dEx = dE(0), dEy = dE(1);
    double lam = c.metric_factor(chart, x);
    Eigen::VectorXd Et = (ev(field::E, x, t + h) - ev(field::E, x, t - h)) / (2 * h);
    double Bt = (ev(field::Bp, x, t + h)[0] - ev(field::Bp, x, t - h)[0]) / (2 * h);
    Eigen::VectorXd J = ev(field::J, x, t);

    equation_residual r;
    double curl = dEx[1] - dEy[0];
    r.faraday = std::max(std::abs(curl + Bt), std::abs(curl - ev(field::dE, x, t)[0]));
    r.ampere = std::max(std::abs(dB(1) - J[0] - Et[0]), std::abs(-dB(0) - J[1] - Et[1]));
    r.gauss = std::abs((dEx[0] + dEy[1]) / lam - ev(field::rho, x, t)[0]);
    return r;
}

} // namespace ddr
