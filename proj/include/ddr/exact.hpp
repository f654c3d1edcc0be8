#pragma once

#include "ddr/exterior.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace ddr {

enum class field { E, Bp, J, rho, dE };

// Closed-form solution of the stationary 2+1 Maxwell system, per chart.
class exact_case {
public:
    virtual ~exact_case() = default;

    virtual std::string name() const = 0;
    virtual std::string manifold() const = 0;
    virtual bool vacuum() const { return false; }
    // metric = factor * identity in every chart
    virtual double metric_factor(int chart, const Eigen::Vector2d& x) const = 0;

    // E, J: 1-forms; Bp, dE: 2-forms; rho: 0-form (all in chart coordinates)
    virtual alt_value eval(field f, int chart, const Eigen::Vector2d& x, double t) const = 0;

    // Time factors phi_j with f(x,t) = sum_j phi_j(t) f_j(x); empty if not separable.
    virtual std::vector<std::function<double(double)>> time_basis(field) const { return {}; }
};

// sphere_smooth, sphere_c0, sphere_c0_printed, torus_c0, torus_c0_literal
std::unique_ptr<exact_case> make_exact_case(const std::string& name);
std::vector<std::string> exact_case_names();

// Residuals of dE + dB'/dt, delta B' - J - dE/dt and -delta E - rho at (chart, x, t)
// by central differences (step h); max abs component.
struct equation_residual {
    double faraday = 0, ampere = 0, gauss = 0;
};
equation_residual check_equations(const exact_case& c, int chart, const Eigen::Vector2d& x, double t, double h = 1e-5);

} // namespace ddr
