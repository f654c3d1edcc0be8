#include "ddr/geometry.hpp"

#include <unsupported/Eigen/AutoDiff>

#include <cmath>
#include <numbers>

namespace ddr {

using std::numbers::pi;

// ---- quadrature ----

namespace {

// Legendre P_n and its derivative at x.
std::pair<double, double> legendre(int n, double x)
{
    double p0 = 1, p1 = x;
    for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    return {p1, n * (x * p1 - p0) / (x * x - 1)};
}

} // namespace

quad_rule gauss_legendre(int n)
{
    if (n < 1 || n > 31)
        throw error("gauss_legendre: unsupported number of points");
    quad_rule q;
    q.dim = 1;
    q.points.resize(1, n);
    q.weights.resize(n);
    q.exactness = 2 * n - 1;
    for (int i = 0; i < n; ++i) {
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            auto [p, dp] = legendre(n, x);
            double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
                break;
        }
        double dp = legendre(n, x).second;
        q.points(0, n - 1 - i) = 0.5 * (1 + x);
        q.weights[n - 1 - i] = 1.0 / ((1 - x * x) * dp * dp);
    }
    return q;
}

quad_rule make_quadrature(int d, int degree)
{
    if (degree < 0 || degree > 60)
        throw error("make_quadrature: unsupported degree (cap 60)");
    int n = degree / 2 + 1;
    quad_rule g = gauss_legendre(n);
    quad_rule q;
    q.dim = d;
    q.exactness = 2 * n - 1;
    int total = 1;
    for (int i = 0; i < d; ++i)
        total *= n;
    q.points.resize(d, total);
    q.weights.resize(total);
    for (int idx = 0; idx < total; ++idx) {
        int r = idx;
        double w = 1;
        for (int i = 0; i < d; ++i) {
            q.points(i, idx) = g.points(0, r % n);
            w *= g.weights[r % n];
            r /= n;
        }
        q.weights[idx] = w;
    }
    return q;
}

double ref_domain::measure() const
{
    switch (type) {
    case shape::point: return 1;
    case shape::interval: return b - a;
    default: break;
    }
    double s = 0;
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        const auto& p = vertices[i];
        const auto& q = vertices[(i + 1) % vertices.size()];
        s += p.x() * q.y() - q.x() * p.y();
    }
    return 0.5 * s;
}

Eigen::VectorXd ref_domain::centroid() const
{
    if (type == shape::point)
        return Eigen::VectorXd(0);
    if (type == shape::interval)
        return Eigen::VectorXd::Constant(1, 0.5 * (a + b));
    Eigen::Vector2d c = Eigen::Vector2d::Zero();
    for (const auto& v : vertices)
        c += v;
    return c / double(vertices.size());
}

ref_domain ref_domain::point() { return ref_domain{}; }

ref_domain ref_domain::interval(double a, double b)
{
    ref_domain D;
    D.type = shape::interval;
    D.a = a;
    D.b = b;
    return D;
}

ref_domain ref_domain::rectangle(Eigen::Vector2d lo, Eigen::Vector2d hi)
{
    ref_domain D;
    D.type = shape::polygon;
    D.vertices = {lo, {hi.x(), lo.y()}, hi, {lo.x(), hi.y()}};
    D.box = true;
    return D;
}

ref_domain ref_domain::polygon(std::vector<Eigen::Vector2d> v)
{
    ref_domain D;
    D.type = shape::polygon;
    D.vertices = std::move(v);
    if (D.measure() <= 0)
        throw error("ref_domain: polygon must be counter-clockwise and non-degenerate");
    return D;
}

namespace {

void append_triangle(const Eigen::Vector2d& v0, const Eigen::Vector2d& v1, const Eigen::Vector2d& v2, int degree,
    std::vector<Eigen::Vector2d>& pts, std::vector<double>& w)
{
    quad_rule ga = gauss_legendre((degree + 1) / 2 + 1);
    quad_rule gb = gauss_legendre(degree / 2 + 1);
    Eigen::Vector2d e1 = v1 - v0, e2 = v2 - v0;
    double jac = std::abs(e1.x() * e2.y() - e1.y() * e2.x());
    for (int i = 0; i < ga.size(); ++i)
        for (int j = 0; j < gb.size(); ++j) {
            double a = ga.points(0, i), b = gb.points(0, j);
            pts.push_back(v0 + a * ((1 - b) * e1 + b * e2));
            w.push_back(ga.weights[i] * gb.weights[j] * a * jac);
        }
}

} // namespace

quad_rule domain_quadrature(const ref_domain& D, int degree)
{
    if (degree < 0 || degree > 60)
        throw error("domain_quadrature: unsupported degree (cap 60)");
    quad_rule q;
    q.dim = D.dim();
    q.exactness = degree;
    if (D.type == ref_domain::shape::point) {
        q.points.resize(0, 1);
        q.weights = Eigen::VectorXd::Ones(1);
        return q;
    }
    if (D.type == ref_domain::shape::interval) {
        quad_rule g = gauss_legendre(degree / 2 + 1);
        q.points = (D.a + (D.b - D.a) * g.points.array()).matrix();
        q.weights = (D.b - D.a) * g.weights;
        return q;
    }
    if (D.box) {
        quad_rule t = make_quadrature(2, degree);
        Eigen::Vector2d lo = D.vertices[0], hi = D.vertices[2];
        q.points.resize(2, t.size());
        for (int i = 0; i < t.size(); ++i)
            q.points.col(i) = lo.array() + (hi - lo).array() * t.points.col(i).array();
        q.weights = (hi - lo).prod() * t.weights;
        return q;
    }
    std::vector<Eigen::Vector2d> pts;
    std::vector<double> w;
    if (D.vertices.size() == 3)
        append_triangle(D.vertices[0], D.vertices[1], D.vertices[2], degree, pts, w);
    else {
        Eigen::Vector2d c = D.centroid();
        for (std::size_t i = 0; i < D.vertices.size(); ++i)
            append_triangle(c, D.vertices[i], D.vertices[(i + 1) % D.vertices.size()], degree, pts, w);
    }
    q.points.resize(2, pts.size());
    q.weights.resize(w.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        q.points.col(i) = pts[i];
        q.weights[i] = w[i];
    }
    return q;
}

// ---- one-variable polynomials ----

double poly1::derivative(double t) const
{
    double r = 0;
    for (std::size_t i = c.size(); i-- > 1;)
        r = r * t + double(i) * c[i];
    return r;
}

double poly1::inverse(double y, double lo, double hi) const
{
    double flo = (*this)(lo) - y, fhi = (*this)(hi) - y;
    if (flo == 0)
        return lo;
    if (fhi == 0)
        return hi;
    double t = 0.5 * (lo + hi);
    if (flo * fhi > 0) {
        // outside the bracket: plain Newton from the nearer end
        t = std::abs(flo) < std::abs(fhi) ? lo : hi;
        for (int it = 0; it < 60; ++it) {
            double dt = ((*this)(t) - y) / derivative(t);
            t -= dt;
            if (std::abs(dt) < 1e-15)
                break;
        }
        return t;
    }
    for (int it = 0; it < 200; ++it) {
        double f = (*this)(t) - y;
        if (f == 0)
            return t;
        if ((f < 0) == (flo < 0))
            lo = t;
        else
            hi = t;
        double dt = f / derivative(t);
        double tn = t - dt;
        if (!(tn > lo && tn < hi))
            tn = 0.5 * (lo + hi);
        if (std::abs(tn - t) < 1e-16)
            return tn;
        t = tn;
    }
    return t;
}

poly1 poly1_from_json(const json& j)
{
    poly1 p;
    if (j.is_number())
        p.c = {j.get<double>()};
    else
        p.c = j.get<std::vector<double>>();
    if (p.c.empty())
        p.c = {0.0};
    return p;
}

// ---- parametrizations ----

namespace {

using ad = Eigen::AutoDiffScalar<Eigen::Vector2d>;

// h^{-1}(x) with the derivative propagated through the inverse function rule.
double poly_inverse(const poly1& h, double x) { return h.inverse(x); }
ad poly_inverse(const poly1& h, const ad& x)
{
    double v = h.inverse(x.value());
    return ad(v, x.derivatives() / h.derivative(v));
}

struct placement {
    Eigen::Matrix2d A = Eigen::Matrix2d::Identity();
    Eigen::Vector2d b = Eigen::Vector2d::Zero();

    static placement from(const json& p)
    {
        placement pl;
        if (p.contains("placement")) {
            const auto& j = p["placement"];
            for (int i = 0; i < 2; ++i) {
                for (int k = 0; k < 2; ++k)
                    pl.A(i, k) = j["A"][i][k].get<double>();
                pl.b[i] = j["b"][i].get<double>();
            }
        }
        return pl;
    }

    template <class T>
    void apply(const T& x, const T& y, T* out) const
    {
        out[0] = A(0, 0) * x + A(0, 1) * y + b[0];
        out[1] = A(1, 0) * x + A(1, 1) * y + b[1];
    }
    Eigen::Vector2d unapply(const Eigen::Vector2d& x) const { return A.inverse() * (x - b); }
};

Eigen::Vector2d vec2(const json& j) { return {j[0].get<double>(), j[1].get<double>()}; }

template <class Derived>
class smooth_param : public parametrization {
public:
    Eigen::Vector2d point(const Eigen::VectorXd& u) const override
    {
        double uu[2] = {u.size() > 0 ? u[0] : 0.0, u.size() > 1 ? u[1] : 0.0};
        double x[2];
        static_cast<const Derived*>(this)->eval(uu, x);
        return {x[0], x[1]};
    }

    Eigen::MatrixXd jacobian(const Eigen::VectorXd& u) const override
    {
        int d = dim();
        ad uu[2];
        for (int i = 0; i < 2; ++i)
            uu[i] = ad(i < d ? u[i] : 0.0, Eigen::Vector2d::Unit(i));
        ad x[2];
        static_cast<const Derived*>(this)->eval(uu, x);
        Eigen::MatrixXd J(2, d);
        for (int i = 0; i < 2; ++i)
            for (int k = 0; k < d; ++k)
                J(i, k) = x[i].derivatives()[k];
        return J;
    }
};

class vertex_param : public parametrization {
public:
    explicit vertex_param(const json& p)
    {
        params_ = p;
        x_ = vec2(p.at("x"));
        domain_ = ref_domain::point();
    }
    std::string kind() const override { return "vertex"; }
    Eigen::Vector2d point(const Eigen::VectorXd&) const override { return x_; }
    Eigen::MatrixXd jacobian(const Eigen::VectorXd&) const override { return Eigen::MatrixXd(2, 0); }
    Eigen::VectorXd inverse(const Eigen::Vector2d&) const override { return Eigen::VectorXd(0); }

private:
    Eigen::Vector2d x_;
};

class segment_param : public smooth_param<segment_param> {
public:
    explicit segment_param(const json& p)
    {
        params_ = p;
        domain_ = ref_domain::interval(0, 1);
        curve_ = p.at("curve").get<std::string>();
        if (curve_ == "line") {
            a_ = vec2(p.at("a"));
            b_ = vec2(p.at("b"));
        } else if (curve_ == "arc") {
            a_ = vec2(p.at("center"));
            radius_ = p.at("radius").get<double>();
            th0_ = p.at("theta0").get<double>();
            th1_ = p.at("theta1").get<double>();
        } else if (curve_ == "projected_line") {
            a_ = vec2(p.at("a"));
            b_ = vec2(p.at("b"));
            radius_ = p.at("radius").get<double>();
        } else if (curve_ == "poly") {
            f_ = poly1_from_json(p.at("h"));
            g_ = poly1_from_json(p.at("g"));
        } else if (curve_ == "polar") {
            f_ = poly1_from_json(p.at("r"));
            g_ = poly1_from_json(p.at("theta"));
        } else
            throw error("unknown curve type '" + curve_ + "'");
        place_ = placement::from(p);
    }
    std::string kind() const override { return "parametrized_segment"; }

    template <class T>
    void eval(const T* u, T* x) const
    {
        using std::cos;
        using std::sin;
        using std::sqrt;
        const T& t = u[0];
        if (curve_ == "line") {
            x[0] = a_[0] + t * (b_[0] - a_[0]);
            x[1] = a_[1] + t * (b_[1] - a_[1]);
        } else if (curve_ == "arc") {
            T th = th0_ + t * (th1_ - th0_);
            x[0] = a_[0] + radius_ * cos(th);
            x[1] = a_[1] + radius_ * sin(th);
        } else if (curve_ == "projected_line") {
            // central projection of a chord onto the circle of given radius
            T px = a_[0] + t * (b_[0] - a_[0]), py = a_[1] + t * (b_[1] - a_[1]);
            T n = sqrt(px * px + py * py);
            x[0] = radius_ * px / n;
            x[1] = radius_ * py / n;
        } else if (curve_ == "poly") {
            place_.apply(f_(t), g_(t), x);
        } else {
            T r = f_(t), th = g_(t);
            place_.apply(T(r * cos(th)), T(r * sin(th)), x);
        }
    }

private:
    std::string curve_;
    Eigen::Vector2d a_, b_;
    double radius_ = 1, th0_ = 0, th1_ = 0;
    poly1 f_, g_;
    placement place_;
};

class polygon_param : public smooth_param<polygon_param> {
public:
    explicit polygon_param(const json& p)
    {
        params_ = p;
        for (const auto& v : p.at("vertices"))
            verts_.push_back(vec2(v));
        if (verts_.size() < 3)
            throw error("flat_polygon needs at least 3 vertices");
        box_ = p.value("box", false);
        if (box_) {
            lo_ = verts_[0];
            hi_ = verts_[2];
            domain_ = ref_domain::rectangle({0, 0}, {1, 1});
            if (verts_.size() != 4 || !(hi_.x() > lo_.x() && hi_.y() > lo_.y()))
                throw error("flat_polygon box needs an axis-aligned ccw rectangle");
        } else {
            c_.setZero();
            for (const auto& v : verts_)
                c_ += v;
            c_ /= double(verts_.size());
            s_ = 0;
            for (const auto& v : verts_)
                s_ = std::max(s_, (v - c_).norm());
            std::vector<Eigen::Vector2d> ref;
            for (const auto& v : verts_)
                ref.push_back((v - c_) / s_);
            domain_ = ref_domain::polygon(ref);
        }
    }
    std::string kind() const override { return "flat_polygon"; }

    template <class T>
    void eval(const T* u, T* x) const
    {
        if (box_) {
            x[0] = lo_[0] + u[0] * (hi_[0] - lo_[0]);
            x[1] = lo_[1] + u[1] * (hi_[1] - lo_[1]);
        } else {
            x[0] = c_[0] + s_ * u[0];
            x[1] = c_[1] + s_ * u[1];
        }
    }

    Eigen::VectorXd inverse(const Eigen::Vector2d& x) const override
    {
        if (box_)
            return ((x - lo_).array() / (hi_ - lo_).array()).matrix();
        return (x - c_) / s_;
    }

private:
    std::vector<Eigen::Vector2d> verts_;
    bool box_ = false;
    Eigen::Vector2d lo_, hi_, c_;
    double s_ = 1;
};

// Boundary-layer cell between a chord of the first ring and the unit circle.
class layer_cone_param : public smooth_param<layer_cone_param> {
public:
    explicit layer_cone_param(const json& p)
    {
        params_ = p;
        domain_ = ref_domain::rectangle({-0.5, 0}, {0.5, 1});
        double rho1 = p.at("rho1").get<double>();
        double alpha = p.at("alpha").get<double>();
        double da = p.at("dalpha").get<double>();
        double half = 0.5 * (pi - da);
        xb_ = rho1 * std::cos(half);
        yb_ = rho1 * std::sin(half);
        beta_ = alpha - half;
        if (!(rho1 > 0 && rho1 < 1 && da > 0 && da < pi))
            throw error("cone_section: parameters out of range");
    }
    std::string kind() const override { return "cone_section"; }

    template <class T>
    void eval(const T* u, T* x) const
    {
        using std::sqrt;
        const T &t = u[0], &p = u[1];
        T a = 2.0 * t * xb_;
        T r = sqrt(yb_ * yb_ + a * a);
        T rho = p + (1.0 - p) * r;
        T s = rho * a / r, c = rho * yb_ / r;
        double cb = std::cos(beta_), sb = std::sin(beta_);
        x[0] = cb * s - sb * c;
        x[1] = sb * s + cb * c;
    }

    Eigen::VectorXd inverse(const Eigen::Vector2d& x) const override
    {
        double cb = std::cos(beta_), sb = std::sin(beta_);
        double a = cb * x[0] + sb * x[1], b = -sb * x[0] + cb * x[1];
        double n = x.norm();
        double t = a / b * yb_ / (2 * xb_);
        double r = yb_ * n / b;
        return Eigen::Vector2d(t, (n - r) / (1 - r));
    }

private:
    double xb_, yb_, beta_;
};

// Cone section in polar coordinates: r = p g1(t) + (1-p) g3(t), theta = h(t).
class polar_cone_param : public smooth_param<polar_cone_param> {
public:
    explicit polar_cone_param(const json& p)
    {
        params_ = p;
        domain_ = ref_domain::rectangle({0, 0}, {1, 1});
        g1_ = poly1_from_json(p.at("g1"));
        g3_ = poly1_from_json(p.at("g3"));
        h_ = poly1_from_json(p.at("h"));
        place_ = placement::from(p);
        for (int i = 0; i <= 16; ++i) {
            double t = i / 16.0;
            if (!(g1_(t) - g3_(t) > 0))
                throw error("cone_section: g1 - g3 must be strictly positive");
            if (!(h_.derivative(t) > 0))
                throw error("cone_section: h must be strictly increasing");
        }
    }
    std::string kind() const override { return "cone_section"; }

    template <class T>
    void eval(const T* u, T* x) const
    {
        using std::cos;
        using std::sin;
        const T &t = u[0], &p = u[1];
        T r = p * g1_(t) + (1.0 - p) * g3_(t);
        T th = h_(t);
        place_.apply(T(r * cos(th)), T(r * sin(th)), x);
    }

    Eigen::VectorXd inverse(const Eigen::Vector2d& xc) const override
    {
        Eigen::Vector2d x = place_.unapply(xc);
        double th = std::atan2(x[1], x[0]);
        double mid = h_(0.5);
        while (th < mid - pi)
            th += 2 * pi;
        while (th > mid + pi)
            th -= 2 * pi;
        double t = h_.inverse(th);
        double r = x.norm();
        return Eigen::Vector2d(t, (r - g3_(t)) / (g1_(t) - g3_(t)));
    }

private:
    poly1 g1_, g3_, h_;
    placement place_;
};

class quad_curved_param : public smooth_param<quad_curved_param> {
public:
    explicit quad_curved_param(const json& p)
    {
        params_ = p;
        domain_ = ref_domain::rectangle({0, 0}, {1, 1});
        for (int i = 0; i < 4; ++i) {
            h_[i] = poly1_from_json(p.at("h" + std::to_string(i + 1)));
            g_[i] = poly1_from_json(p.at("g" + std::to_string(i + 1)));
        }
        a_ = p.at("a").get<double>();
        b_ = p.at("b").get<double>();
        place_ = placement::from(p);
        check();
    }
    std::string kind() const override { return "quad_four_curved"; }

    template <class T>
    void eval(const T* u, T* x) const
    {
        const T &t = u[0], &p = u[1];
        T s = p * h_[2](t) / a_ + (1.0 - p) * h_[0](t);
        T X = s * h_[1](p) + (1.0 - s) * h_[3](p);
        T q = t * g_[1](p) / b_ + (1.0 - t) * g_[3](p);
        T Y = q * g_[2](t) + (1.0 - q) * g_[0](t);
        place_.apply(X, Y, x);
    }

private:
    void check() const
    {
        auto near = [](double a, double b) { return std::abs(a - b) < 1e-12; };
        bool ok = near(h_[0](0.0), 0) && near(g_[0](0.0), 0) && near(h_[0](1.0), 1) && near(g_[0](1.0), 0)
            && near(h_[1](0.0), 1) && near(g_[1](0.0), 0) && near(h_[1](1.0), a_) && near(g_[1](1.0), b_)
            && near(h_[2](0.0), 0) && near(g_[2](0.0), 1) && near(h_[2](1.0), a_) && near(g_[2](1.0), b_)
            && near(h_[3](0.0), 0) && near(g_[3](0.0), 0) && near(h_[3](1.0), 0) && near(g_[3](1.0), 1);
        if (!ok)
            throw error("quad_four_curved: endpoint conditions violated");
        int sign = 0;
        for (int i = 0; i <= 8; ++i)
            for (int j = 0; j <= 8; ++j) {
                double det = jacobian(Eigen::Vector2d(i / 8.0, j / 8.0)).determinant();
                int s = det > 0 ? 1 : det < 0 ? -1 : 0;
                if (s == 0 || (sign && s != sign))
                    throw error("quad_four_curved: Jacobian determinant changes sign");
                sign = s;
            }
    }

    poly1 h_[4], g_[4];
    double a_ = 1, b_ = 1;
    placement place_;
};

// Triangle with two curved edges, given through the inverse map J_f.
class tri_curved_param : public parametrization {
public:
    explicit tri_curved_param(const json& p)
    {
        params_ = p;
        domain_ = ref_domain::polygon({{0, 0}, {1, 0}, {0, 1}});
        h1_ = poly1_from_json(p.at("h1"));
        g1_ = poly1_from_json(p.at("g1"));
        h2_ = poly1_from_json(p.at("h2"));
        g2_ = poly1_from_json(p.at("g2"));
        place_ = placement::from(p);
        check();
    }
    std::string kind() const override { return "triangle_two_curved"; }

    template <class T>
    void J(const T& x, const T& y, T* out) const
    {
        T i1 = poly_inverse(h1_, x), i2 = poly_inverse(h2_, x);
        T G1 = g1_(i1), G2 = g2_(i2);
        T den = G2 - G1;
        out[0] = ((y - G1) * i2 + (G2 - y) * i1) / den;
        out[1] = (y - G1) * (1.0 - i2) / den;
    }

    Eigen::VectorXd inverse(const Eigen::Vector2d& xc) const override
    {
        Eigen::Vector2d x = place_.unapply(xc);
        // both curved edges meet at (1,0) where the formula degenerates to 0/0
        if (x[0] >= 1 - 1e-14)
            return Eigen::Vector2d(1, 0);
        double out[2];
        J(x[0], x[1], out);
        return Eigen::Vector2d(out[0], out[1]);
    }

    Eigen::Vector2d point(const Eigen::VectorXd& u) const override
    {
        Eigen::Vector2d x = local(u);
        Eigen::Vector2d r;
        place_.apply(x[0], x[1], r.data());
        return r;
    }

    Eigen::MatrixXd jacobian(const Eigen::VectorXd& u) const override
    {
        Eigen::Vector2d x = local(u);
        return place_.A * DJ(x).inverse();
    }

private:
    Eigen::Matrix2d DJ(const Eigen::Vector2d& x) const
    {
        ad X(x[0], Eigen::Vector2d::Unit(0)), Y(x[1], Eigen::Vector2d::Unit(1));
        ad out[2];
        J(X, Y, out);
        Eigen::Matrix2d D;
        D.row(0) = out[0].derivatives().transpose();
        D.row(1) = out[1].derivatives().transpose();
        return D;
    }

    // Newton solve of J_f(x) = u in normalized coordinates.
    Eigen::Vector2d local(const Eigen::VectorXd& u) const
    {
        Eigen::Vector2d target(u[0], u[1]);
        // the straight-sided triangle is a good start
        Eigen::Vector2d x(u[0], u[1]);
        x[0] = std::clamp(x[0], 1e-14, 1 - 1e-14);
        for (int it = 0; it < 60; ++it) {
            double out[2];
            J(x[0], x[1], out);
            Eigen::Vector2d res(out[0] - target[0], out[1] - target[1]);
            if (res.norm() < 1e-15)
                break;
            Eigen::Vector2d dx = DJ(x).lu().solve(res);
            double step = 1;
            while (x[0] - step * dx[0] >= 1 && step > 1e-6)
                step *= 0.5;
            x -= step * dx;
            if (dx.norm() < 1e-16)
                break;
        }
        return x;
    }

    void check() const
    {
        auto near = [](double a, double b) { return std::abs(a - b) < 1e-12; };
        bool ok = near(h1_(0.0), 0) && near(h1_(1.0), 1) && near(h2_(0.0), 0) && near(h2_(1.0), 1)
            && near(g1_(0.0), 0) && near(g1_(1.0), 0) && near(g2_(0.0), 1) && near(g2_(1.0), 0);
        if (!ok)
            throw error("triangle_two_curved: endpoint conditions violated");
        for (int i = 0; i <= 16; ++i) {
            double t = i / 16.0;
            if (!(h1_.derivative(t) > 0 && h2_.derivative(t) > 0))
                throw error("triangle_two_curved: h_i must be strictly increasing");
        }
        int sign = 0;
        for (int i = 0; i <= 8; ++i)
            for (int j = 0; j + i <= 8; ++j) {
                Eigen::Vector2d u(0.02 + 0.96 * i / 8.0 * (1 - 0.02), 0.02 + 0.96 * j / 8.0);
                if (u.sum() >= 0.98)
                    continue;
                double det = DJ(local(u)).determinant();
                int s = det > 0 ? 1 : det < 0 ? -1 : 0;
                if (s == 0 || (sign && s != sign))
                    throw error("triangle_two_curved: Jacobian determinant changes sign");
                sign = s;
            }
    }

    poly1 h1_, g1_, h2_, g2_;
    placement place_;
};

} // namespace

Eigen::VectorXd parametrization::inverse(const Eigen::Vector2d& x) const
{
    Eigen::VectorXd u = domain_.centroid();
    if (u.size() == 0)
        return u;
    for (int it = 0; it < 100; ++it) {
        Eigen::Vector2d r = point(u) - x;
        Eigen::MatrixXd J = jacobian(u);
        Eigen::VectorXd du = (J.transpose() * J).ldlt().solve(J.transpose() * r);
        u -= du;
        if (du.norm() < 1e-15)
            break;
    }
    return u;
}

param_ptr make_parametrization(const std::string& kind, const json& params)
{
    if (kind == "vertex")
        return std::make_shared<vertex_param>(params);
    if (kind == "parametrized_segment")
        return std::make_shared<segment_param>(params);
    if (kind == "flat_polygon")
        return std::make_shared<polygon_param>(params);
    if (kind == "cone_section") {
        std::string v = params.value("variant", "polar");
        if (v == "layer")
            return std::make_shared<layer_cone_param>(params);
        if (v == "polar")
            return std::make_shared<polar_cone_param>(params);
        throw error("cone_section: unknown variant '" + v + "'");
    }
    if (kind == "triangle_two_curved")
        return std::make_shared<tri_curved_param>(params);
    if (kind == "quad_four_curved")
        return std::make_shared<quad_curved_param>(params);
    throw error("unknown cell kind '" + kind + "'");
}

// ---- atlas ----

Eigen::Matrix2d atlas::metric(int chart, const Eigen::Vector2d& x) const
{
    if (chart < 0 || chart >= int(charts.size()))
        throw error("atlas: unknown chart");
    if (charts[chart].metric == metric_kind::flat)
        return Eigen::Matrix2d::Identity();
    double s = 1 + x.squaredNorm();
    return (4.0 / (s * s)) * Eigen::Matrix2d::Identity();
}

Eigen::Vector2d atlas::transition(int from, int to, const Eigen::Vector2d& x, const Eigen::Vector2d& hint) const
{
    if (from == to) {
        const auto& per = charts.at(from).period;
        if (per.empty())
            return x;
        Eigen::Vector2d y = x;
        for (int i = 0; i < 2; ++i)
            y[i] += per[i] * std::round((hint[i] - x[i]) / per[i]);
        return y;
    }
    if (manifold == "sphere" && charts.size() == 2) {
        double n2 = x.squaredNorm();
        if (n2 == 0)
            throw error("atlas: point at the chart pole");
        return x / n2;
    }
    throw error("atlas: no transition between charts " + std::to_string(from) + " and " + std::to_string(to));
}

Eigen::Matrix2d atlas::transition_jacobian(int from, int to, const Eigen::Vector2d& x) const
{
    if (from == to)
        return Eigen::Matrix2d::Identity();
    double n2 = x.squaredNorm();
    return (Eigen::Matrix2d::Identity() * n2 - 2 * x * x.transpose()) / (n2 * n2);
}

json atlas::to_json() const
{
    json j = json::array();
    for (const auto& c : charts) {
        json e{{"name", c.name}, {"metric", c.metric == metric_kind::flat ? "flat" : "stereographic"},
            {"orientation", c.orientation}};
        if (!c.period.empty())
            e["period"] = c.period;
        j.push_back(e);
    }
    return j;
}

atlas atlas::from_json(const json& j)
{
    atlas A;
    for (const auto& e : j) {
        chart_info c;
        c.name = e.value("name", "");
        std::string m = e.value("metric", "flat");
        if (m == "flat")
            c.metric = metric_kind::flat;
        else if (m == "stereographic")
            c.metric = metric_kind::stereographic;
        else
            throw error("unknown chart metric '" + m + "'");
        c.orientation = e.value("orientation", 1);
        if (e.contains("period"))
            c.period = e["period"].get<std::vector<double>>();
        A.charts.push_back(c);
    }
    return A;
}

atlas atlas::sphere()
{
    atlas A;
    A.manifold = "sphere";
    A.charts = {{"north", metric_kind::stereographic, 1, {}}, {"south", metric_kind::stereographic, -1, {}}};
    return A;
}

atlas atlas::torus()
{
    atlas A;
    A.manifold = "torus";
    A.charts = {{"periodic", metric_kind::flat, 1, {1.0, 1.0}}};
    return A;
}

// ---- cell geometry ----

cell_geometry::cell_geometry(param_ptr p, const atlas* A, int chart) : param_(std::move(p)), atlas_(A), chart_(chart)
{
}

frame cell_geometry::at(const Eigen::VectorXd& u) const
{
    frame f;
    f.x = param_->point(u);
    f.DI = param_->jacobian(u);
    Eigen::Matrix2d g = atlas_->metric(chart_, f.x);
    f.G = f.DI.transpose() * g * f.DI;
    f.sqrtg = f.G.size() ? std::sqrt(f.G.determinant()) : 1.0;
    return f;
}

double cell_geometry::measure(int degree) const
{
    quad_rule q = rule(degree);
    double s = 0;
    for (int i = 0; i < q.size(); ++i)
        s += q.weights[i] * at(q.points.col(i)).sqrtg;
    return s;
}

double cell_geometry::size(int degree) const
{
    if (dim() == 0)
        return 1;
    return std::pow(measure(degree), 1.0 / dim());
}

alt_value pullback_sample(const frame& fr, const alt_value& v)
{
    alt_value r(int(fr.DI.cols()), v.degree);
    r.c = pullback_matrix(fr.DI, v.degree) * v.c;
    return r;
}

alt_value eval_form(const rform& f, const Eigen::VectorXd& u)
{
    alt_value v(f.dim(), f.form_degree());
    for (const auto& [k, c] : f.terms()) {
        double m = c.get_d();
        for (int i = 0; i < f.dim(); ++i)
            m *= std::pow(u[i], k.exp[i]);
        v.c[index_set_position(f.dim(), k.idx)] += m;
    }
    return v;
}

namespace {

double pair_value(const frame& fr, const alt_value& a, const alt_value& b, pair_mode mode)
{
    if (mode == pair_mode::wedge)
        return wedge_at(a, b).c[0];
    if (a.degree != b.degree)
        throw error("integrate_pair: wedge_star needs equal degrees");
    if (fr.G.size() == 0)
        return a.c.dot(b.c);
    metric_at_point g(fr.G);
    return a.c.dot(form_inner_matrix(g, a.degree) * b.c) * fr.sqrtg;
}

} // namespace

double integrate_pair(const cell_geometry& g, const quad_rule& q, const chart_sampler& a, const chart_sampler& b,
    pair_mode mode)
{
    double s = 0;
    for (int i = 0; i < q.size(); ++i) {
        frame fr = g.at(q.points.col(i));
        s += q.weights[i] * pair_value(fr, pullback_sample(fr, a(fr.x)), pullback_sample(fr, b(fr.x)), mode);
    }
    return s;
}

Eigen::MatrixXd gram_matrix(const cell_geometry& g, const quad_rule& q, const span_basis& A, const span_basis& B,
    pair_mode mode)
{
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(A.size(), B.size());
    if (A.size() == 0 || B.size() == 0)
        return M;
    for (int n = 0; n < q.size(); ++n) {
        Eigen::VectorXd u = q.points.col(n);
        frame fr = g.at(u);
        std::vector<alt_value> va, vb;
        for (const auto& f : A.forms)
            va.push_back(eval_form(f, u));
        for (const auto& f : B.forms)
            vb.push_back(eval_form(f, u));
        for (std::size_t i = 0; i < A.size(); ++i)
            for (std::size_t j = 0; j < B.size(); ++j)
                M(i, j) += q.weights[n] * pair_value(fr, va[i], vb[j], mode);
    }
    return M;
}

Eigen::VectorXd l2_project(const cell_geometry& g, const quad_rule& q, const span_basis& target,
    const chart_sampler& s)
{
    Eigen::MatrixXd M = gram_matrix(g, q, target, target, pair_mode::wedge_star);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(target.size());
    for (int n = 0; n < q.size(); ++n) {
        Eigen::VectorXd u = q.points.col(n);
        frame fr = g.at(u);
        alt_value v = pullback_sample(fr, s(fr.x));
        for (std::size_t i = 0; i < target.size(); ++i)
            b[i] += q.weights[n] * pair_value(fr, eval_form(target.forms[i], u), v, pair_mode::wedge_star);
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
    if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 0))
        throw error("l2_project: singular Gram matrix");
    return ldlt.solve(b);
}

} // namespace ddr
