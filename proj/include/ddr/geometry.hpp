#pragma once

#include "ddr/exterior.hpp"
#include "ddr/polyspace.hpp"

#include "json.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace ddr {

using json = nlohmann::json;

// ---- quadrature ----

struct quad_rule {
    int dim = 0;
    Eigen::MatrixXd points; // dim x n
    Eigen::VectorXd weights;
    int exactness = 0;

    int size() const { return int(weights.size()); }
};

// n-point Gauss-Legendre rule on [0,1].
quad_rule gauss_legendre(int n);
// Tensor Gauss-Legendre on [0,1]^d exact for the given total degree.
quad_rule make_quadrature(int d, int degree);

struct ref_domain {
    enum class shape { point, interval, polygon } type = shape::point;
    double a = 0, b = 1;                   // interval
    std::vector<Eigen::Vector2d> vertices; // polygon, counter-clockwise
    bool box = false;                      // polygon is an axis-aligned rectangle

    int dim() const { return type == shape::point ? 0 : type == shape::interval ? 1 : 2; }
    double measure() const;
    Eigen::VectorXd centroid() const;

    static ref_domain point();
    static ref_domain interval(double a, double b);
    static ref_domain rectangle(Eigen::Vector2d lo, Eigen::Vector2d hi);
    static ref_domain polygon(std::vector<Eigen::Vector2d> v);
};

// Rectangles use tensor rules, other polygons a fan of collapsed triangles.
quad_rule domain_quadrature(const ref_domain& D, int degree);

// ---- parametrizations: reference domain -> chart coordinates ----

class parametrization {
public:
    virtual ~parametrization() = default;

    virtual std::string kind() const = 0;
    virtual const json& params() const { return params_; }
    const ref_domain& domain() const { return domain_; }
    int dim() const { return domain_.dim(); }

    virtual Eigen::Vector2d point(const Eigen::VectorXd& u) const = 0;
    // 2 x dim
    virtual Eigen::MatrixXd jacobian(const Eigen::VectorXd& u) const = 0;
    // Reference coordinates of a chart point on the cell (Newton by default).
    virtual Eigen::VectorXd inverse(const Eigen::Vector2d& x) const;

protected:
    json params_;
    ref_domain domain_;
};

using param_ptr = std::shared_ptr<const parametrization>;

// Builds a parametrization from a construction kind and its parameters.
param_ptr make_parametrization(const std::string& kind, const json& params);

// ---- atlas ----

enum class metric_kind { flat, stereographic };

struct chart_info {
    std::string name;
    metric_kind metric = metric_kind::flat;
    int orientation = 1;
    std::vector<double> period; // non-empty for periodic flat charts
};

class atlas {
public:
    std::string manifold = "custom";
    std::vector<chart_info> charts;

    Eigen::Matrix2d metric(int chart, const Eigen::Vector2d& x) const;
    // Expresses x (given in chart `from`) in chart `to`; periodic charts
    // return the image closest to `hint`.
    Eigen::Vector2d transition(int from, int to, const Eigen::Vector2d& x, const Eigen::Vector2d& hint) const;
    Eigen::Matrix2d transition_jacobian(int from, int to, const Eigen::Vector2d& x) const;

    json to_json() const;
    static atlas from_json(const json& j);
    static atlas sphere();
    static atlas torus();
};

// ---- cell geometry ----

struct frame {
    Eigen::Vector2d x;  // chart point
    Eigen::MatrixXd DI; // 2 x d
    Eigen::MatrixXd G;  // d x d induced metric
    double sqrtg = 1;
};

class cell_geometry {
public:
    cell_geometry(param_ptr p, const atlas* A, int chart);

    int dim() const { return param_->dim(); }
    int chart() const { return chart_; }
    const parametrization& param() const { return *param_; }
    const atlas& charts() const { return *atlas_; }

    frame at(const Eigen::VectorXd& u) const;
    quad_rule rule(int degree) const { return domain_quadrature(param_->domain(), degree); }
    double measure(int degree = 12) const;
    // |f|^{1/d}, or 1 for points
    double size(int degree = 12) const;

private:
    param_ptr param_;
    const atlas* atlas_;
    int chart_;
};

// Pointwise k-form in chart coordinates.
using chart_sampler = std::function<alt_value(const Eigen::Vector2d& x)>;

enum class pair_mode { wedge, wedge_star };

// Integral of a^b (degrees k, d-k) or a^*b (both degree k) over the cell.
double integrate_pair(const cell_geometry& g, const quad_rule& q, const chart_sampler& a, const chart_sampler& b,
    pair_mode mode);

// Pulls a chart-coordinate sample back to the reference domain at u.
alt_value pullback_sample(const frame& fr, const alt_value& v);

// Value at u of a reference-coordinate polynomial form (double coefficients).
alt_value eval_form(const rform& f, const Eigen::VectorXd& u);

Eigen::MatrixXd gram_matrix(const cell_geometry& g, const quad_rule& q, const span_basis& A, const span_basis& B,
    pair_mode mode);

// Coefficients of the L2 projection of a chart sampler onto a reference basis.
Eigen::VectorXd l2_project(const cell_geometry& g, const quad_rule& q, const span_basis& target,
    const chart_sampler& s);

// Real-coefficient polynomial in one variable, power basis.
struct poly1 {
    std::vector<double> c;

    template <class T>
    T operator()(const T& t) const
    {
        T r(0);
        for (std::size_t i = c.size(); i-- > 0;)
            r = r * t + T(c[i]);
        return r;
    }
    double derivative(double t) const;
    // Inverse of a strictly monotone polynomial on [lo,hi] by safeguarded Newton.
    double inverse(double y, double lo = 0, double hi = 1) const;
};

poly1 poly1_from_json(const json& j);

} // namespace ddr
