#include "ddr/verify.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace ddr {

namespace {

using std::numbers::pi;

Eigen::VectorXd random_vector(int n, unsigned seed)
{
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> U(-1, 1);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i)
        v[i] = U(gen);
    return v;
}

double inf_norm(const sparse& A)
{
    Eigen::VectorXd s = Eigen::VectorXd::Zero(A.rows());
    for (int j = 0; j < A.outerSize(); ++j)
        for (sparse::InnerIterator it(A, j); it; ++it)
            s[it.row()] += std::abs(it.value());
    return s.size() ? s.maxCoeff() : 0.0;
}

alt_value val(int k, std::initializer_list<double> c)
{
    alt_value a(2, k);
    int i = 0;
    for (double x : c)
        a.c[i++] = x;
    return a;
}

// height function of the embedded sphere in either stereographic map
struct embed_val {
    double v, dX, dY;
};
embed_val height(int chart, const Eigen::Vector2d& x)
{
    double s = 1 + x.squaredNorm();
    double sg = chart == 0 ? 1 : -1;
    return {sg * (2 - s) / s, -sg * 4 * x[0] / (s * s), -sg * 4 * x[1] / (s * s)};
}
embed_val first_coord(const Eigen::Vector2d& x)
{
    double s = 1 + x.squaredNorm();
    return {2 * x[0] / s, 2 * (s - 2 * x[0] * x[0]) / (s * s), -4 * x[0] * x[1] / (s * s)};
}

} // namespace

double complex_checks::max() const { return std::max({dd, projection, link, stokes}); }

complex_checks check_complex(const de_rham_complex& c, unsigned seed)
{
    const mesh& m = c.get_mesh();
    complex_checks r;
    sparse P = c.derivative(1) * c.derivative(0);
    double scale = inf_norm(c.derivative(1)) * inf_norm(c.derivative(0));
    double pmax = 0;
    for (int j = 0; j < P.outerSize(); ++j)
        for (sparse::InnerIterator it(P, j); it; ++it)
            pmax = std::max(pmax, std::abs(it.value()));
    r.dd = scale > 0 ? pmax / scale : pmax;

    for (int k = 0; k <= 2; ++k) {
        Eigen::VectorXd x = random_vector(c.ndofs(k), seed + 11 + k);
        for (int d = k; d <= 2; ++d)
            for (std::size_t id = 0; id < m.count(d); ++id)
                r.projection = std::max(r.projection, c.projection_residual(k, d, int(id), x));
        if (k >= 1) {
            Eigen::VectorXd y = random_vector(c.ndofs(k - 1), seed + 23 + k);
            for (int d = k; d <= 2; ++d)
                for (std::size_t id = 0; id < m.count(d); ++id)
                    r.link = std::max(r.link, c.link_residual(k, d, int(id), y));
        }
    }
    Eigen::VectorXd x0 = random_vector(c.ndofs(0), seed + 5);
    for (std::size_t id = 0; id < m.count(2); ++id)
        r.stokes = std::max(r.stokes, c.stokes_residual(int(id), x0));
    return r;
}

test_forms smooth_test_forms(const mesh& m)
{
    test_forms t;
    if (m.charts.manifold == "sphere") {
        t.w[0] = [](int c, const Eigen::Vector2d& x) { return val(0, {height(c, x).v}); };
        t.dw[0] = [](int c, const Eigen::Vector2d& x) {
            auto h = height(c, x);
            return val(1, {h.dX, h.dY});
        };
        // z dx
        t.w[1] = [](int c, const Eigen::Vector2d& x) {
            auto h = height(c, x);
            auto f = first_coord(x);
            return val(1, {h.v * f.dX, h.v * f.dY});
        };
        t.dw[1] = [](int c, const Eigen::Vector2d& x) {
            auto h = height(c, x);
            auto f = first_coord(x);
            return val(2, {h.dX * f.dY - h.dY * f.dX});
        };
        return t;
    }
    // periodic on the unit torus, and smooth anywhere else
    const double w = 2 * pi;
    t.w[0] = [w](int, const Eigen::Vector2d& x) { return val(0, {std::sin(w * x[0]) * std::cos(w * x[1])}); };
    t.dw[0] = [w](int, const Eigen::Vector2d& x) {
        return val(1, {w * std::cos(w * x[0]) * std::cos(w * x[1]), -w * std::sin(w * x[0]) * std::sin(w * x[1])});
    };
    t.w[1] = [w](int, const Eigen::Vector2d& x) { return val(1, {std::sin(w * x[0]) * std::cos(w * x[1]), std::cos(w * x[0])}); };
    t.dw[1] = [w](int, const Eigen::Vector2d& x) {
        double s = std::sin(w * x[0]);
        return val(2, {-w * s + w * s * std::sin(w * x[1])});
    };
    return t;
}

bool commutation_check::ok(double factor, double floor) const
{
    return residual <= factor * std::abs(residual - residual_fine) + floor;
}

std::vector<commutation_check> check_commutation(const mesh& m, int r, int extra)
{
    de_rham_complex a(m, r);
    de_rham_complex b(m, r, a.quad_degree() + extra);
    test_forms t = smooth_test_forms(m);
    auto res = [](const de_rham_complex& c, int k, const form_field& w, const form_field& dw) {
        Eigen::VectorXd u = c.derivative(k) * c.interpolate(k, w);
        Eigen::VectorXd v = c.interpolate(k + 1, dw);
        return (u - v).cwiseAbs().maxCoeff() / std::max(1.0, v.cwiseAbs().maxCoeff());
    };
    std::vector<commutation_check> out;
    for (int k = 0; k <= 1; ++k) {
        commutation_check cc;
        cc.k = k;
        cc.residual = res(a, k, t.w[k], t.dw[k]);
        cc.residual_fine = res(b, k, t.w[k], t.dw[k]);
        out.push_back(cc);
    }
    return out;
}

double fit_rate(const std::vector<double>& h, const std::vector<double>& e)
{
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < std::min(h.size(), e.size()); ++i) {
        if (!(h[i] > 0) || !(e[i] > 0) || !std::isfinite(h[i]) || !std::isfinite(e[i]))
            continue;
        double x = std::log(h[i]), y = std::log(e[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    double den = n * sxx - sx * sx;
    if (n < 2 || std::abs(den) < 1e-300)
        return std::numeric_limits<double>::quiet_NaN();
    return (n * sxy - sx * sy) / den;
}

std::vector<double> pairwise_rates(const std::vector<double>& h, const std::vector<double>& e)
{
    std::vector<double> r;
    for (std::size_t i = 1; i < std::min(h.size(), e.size()); ++i)
        r.push_back(fit_rate({h[i - 1], h[i]}, {e[i - 1], e[i]}));
    return r;
}

} // namespace ddr
