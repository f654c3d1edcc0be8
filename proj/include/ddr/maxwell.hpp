#pragma once

#include "ddr/ddr.hpp"
#include "ddr/exact.hpp"

#include <memory>
#include <string>
#include <vector>

namespace ddr {

struct maxwell_operators {
    sparse M1, M2; // stabilized products on X^1, X^2
    sparse D0, D1; // global derivatives
    sparse K;      // M2 * D1
};

maxwell_operators assemble_maxwell(const de_rham_complex& c);

enum class time_scheme { crank_nicolson, implicit_euler };

time_scheme parse_time_scheme(const std::string& s);
std::string to_string(time_scheme s);

struct maxwell_state {
    Eigen::VectorXd E, B; // B holds the density B'
    double t = 0;
};

// Theta scheme (theta = 1/2 or 1) for M1 E' = K^T B - F, M2 B' = -K E with F
// the discrete source functional v -> <J, v>,
// written as one symmetric quasi-definite system factored once.
class maxwell_stepper {
public:
    maxwell_stepper(const maxwell_operators& ops, double dt, time_scheme scheme);

    double dt() const { return dt_; }
    double theta() const { return theta_; }
    // time at which the source is sampled within [t, t+dt]
    double source_time(double t) const { return t + theta_ * dt_; }

    // F: source functional at source_time(s.t); empty for vacuum
    void step(maxwell_state& s, const Eigen::VectorXd& F) const;

    double energy(const maxwell_state& s) const;

private:
    const maxwell_operators* ops_;
    double dt_, theta_;
    sparse A_;
    Eigen::SimplicialLDLT<sparse> solver_;
};

// Tracks D0^T M1 (E(t) - E(0)) + dt sum_m D0^T F^m, which vanishes for the
// discrete scheme.
class constraint_monitor {
public:
    constraint_monitor(const maxwell_operators& ops, const Eigen::VectorXd& E0);
    void add_source(double dt, const Eigen::VectorXd& F);
    // max-norm of the residual for the current field
    double residual(const Eigen::VectorXd& E) const;

private:
    const maxwell_operators* ops_;
    Eigen::VectorXd base_, acc_;
};

// How the current enters: `load` tests J against the cell potentials
// (sum over 2-cells of the integral of <J, P^1 v>); `interpolate` uses M1 I^1 J,
// which is off by O(1) near interfaces where the trace of J jumps.
enum class source_mode { load, interpolate };

source_mode parse_source_mode(const std::string& s);
std::string to_string(source_mode m);

struct run_config {
    double dt = 1e-3;
    double tmax = 6.283185307179586;
    time_scheme scheme = time_scheme::crank_nicolson;
    source_mode source = source_mode::load;
    // keep time series of energy / constraint every n steps (0: none)
    int series_every = 0;
};

struct run_report {
    double h = 0;
    int ndof = 0;
    int steps = 0;
    double dt = 0; // effective step
    double err_E = 0, err_dE = 0, err_B = 0;
    double energy0 = 0, energy_min = 0, energy_max = 0;
    double energy_drift = 0; // max |energy - energy0| / energy0
    double constraint_max = 0;
    std::vector<double> series_t, series_energy, series_constraint;
};

// Interpolates the exact solution, steps to tmax and accumulates space-time
// errors (trapezoid rule in time, discrete products in space).
run_report run_case(const de_rham_complex& c, const exact_case& ex, const run_config& cfg);

// Interpolation of a field at time t, using precomputed separable parts when
// the case provides a time basis.
class field_interpolator {
public:
    // with as_load the result is the functional v -> <f, v> (de_rham_complex::load)
    field_interpolator(const de_rham_complex& c, const exact_case& ex, field f, bool as_load = false);
    Eigen::VectorXd at(double t) const;

private:
    Eigen::VectorXd at_direct(double t) const;

    const de_rham_complex* c_;
    const exact_case* ex_;
    field f_;
    int k_;
    bool load_ = false;
    std::vector<std::function<double(double)>> phi_;
    std::vector<Eigen::VectorXd> parts_;
};

} // namespace ddr
