#include "ddr/maxwell.hpp"

#include <cmath>

namespace ddr {

maxwell_operators assemble_maxwell(const de_rham_complex& c)
{
    maxwell_operators o;
    o.M1 = c.mass(1);
    o.M2 = c.mass(2);
    o.D0 = c.derivative(0);
    o.D1 = c.derivative(1);
    o.K = o.M2 * o.D1;
    return o;
}

time_scheme parse_time_scheme(const std::string& s)
{
    if (s == "crank_nicolson" || s == "cn")
        return time_scheme::crank_nicolson;
    if (s == "implicit_euler" || s == "ie")
        return time_scheme::implicit_euler;
    throw error("unknown time scheme '" + s + "'");
}

std::string to_string(time_scheme s)
{
    return s == time_scheme::crank_nicolson ? "crank_nicolson" : "implicit_euler";
}

source_mode parse_source_mode(const std::string& s)
{
    if (s == "load")
        return source_mode::load;
    if (s == "interpolate")
        return source_mode::interpolate;
    throw error("unknown source mode '" + s + "'");
}

std::string to_string(source_mode m)
{
    return m == source_mode::load ? "load" : "interpolate";
}

maxwell_stepper::maxwell_stepper(const maxwell_operators& ops, double dt, time_scheme scheme)
    : ops_(&ops), dt_(dt), theta_(scheme == time_scheme::crank_nicolson ? 0.5 : 1.0)
{
    if (!(dt > 0))
        throw error("maxwell: time step must be positive");
    const int n1 = int(ops.M1.rows()), n2 = int(ops.M2.rows());
    std::vector<Eigen::Triplet<double>> trip;
    auto put = [&](const sparse& S, int r0, int c0, double f) {
        for (int j = 0; j < S.outerSize(); ++j)
            for (sparse::InnerIterator it(S, j); it; ++it)
                trip.emplace_back(r0 + int(it.row()), c0 + int(it.col()), f * it.value());
    };
    const double a = theta_ * dt;
    put(ops.M1, 0, 0, 1);
    put(ops.M2, n1, n1, -1);
    put(ops.K, n1, 0, -a);
    put(sparse(ops.K.transpose()), 0, n1, -a);
    A_.resize(n1 + n2, n1 + n2);
    A_.setFromTriplets(trip.begin(), trip.end());
    solver_.compute(A_);
    if (solver_.info() != Eigen::Success)
        throw numeric_error("maxwell: factorization of the step matrix failed");
}

void maxwell_stepper::step(maxwell_state& s, const Eigen::VectorXd& F) const
{
    const auto& o = *ops_;
    const int n1 = int(o.M1.rows()), n2 = int(o.M2.rows());
    const double b = (1 - theta_) * dt_;
    Eigen::VectorXd rhs(n1 + n2);
    Eigen::VectorXd m1e = o.M1 * s.E;
    rhs.head(n1) = m1e;
    rhs.tail(n2) = -(o.M2 * s.B);
    if (b != 0) {
        rhs.head(n1) += b * (o.K.transpose() * s.B);
        rhs.tail(n2) += b * (o.K * s.E);
    }
    if (F.size())
        rhs.head(n1) -= dt_ * F;
    Eigen::VectorXd x = solver_.solve(rhs);
    // one refinement step keeps the invariants at roundoff over long runs
    Eigen::VectorXd res = rhs - A_ * x;
    x += solver_.solve(res);
    if (!x.allFinite())
        throw numeric_error("maxwell: solver breakdown at t = " + std::to_string(s.t));
    s.E = x.head(n1);
    s.B = x.tail(n2);
    s.t += dt_;
}

double maxwell_stepper::energy(const maxwell_state& s) const
{
    return s.E.dot(ops_->M1 * s.E) + s.B.dot(ops_->M2 * s.B);
}

constraint_monitor::constraint_monitor(const maxwell_operators& ops, const Eigen::VectorXd& E0) : ops_(&ops)
{
    base_ = ops.D0.transpose() * (ops.M1 * E0);
    acc_ = Eigen::VectorXd::Zero(base_.size());
}

void constraint_monitor::add_source(double dt, const Eigen::VectorXd& F)
{
    if (F.size())
        acc_ += dt * (ops_->D0.transpose() * F);
}

double constraint_monitor::residual(const Eigen::VectorXd& E) const
{
    Eigen::VectorXd r = ops_->D0.transpose() * (ops_->M1 * E) - base_ + acc_;
    return r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
}

namespace {

int form_degree(field f)
{
    switch (f) {
    case field::rho:
        return 0;
    case field::E:
    case field::J:
        return 1;
    default:
        return 2;
    }
}

} // namespace

field_interpolator::field_interpolator(const de_rham_complex& c, const exact_case& ex, field f, bool as_load)
    : c_(&c), ex_(&ex), f_(f), k_(form_degree(f)), load_(as_load)
{
    phi_ = ex.time_basis(f);
    const int m = int(phi_.size());
    if (m == 0)
        return;
    // recover the spatial parts from samples at fixed times
    Eigen::MatrixXd Phi(m, m);
    std::vector<double> ts(m);
    for (int i = 0; i < m; ++i) {
        ts[i] = 0.3 + 0.7 * i;
        for (int j = 0; j < m; ++j)
            Phi(i, j) = phi_[j](ts[i]);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(Phi);
    if (!lu.isInvertible() || lu.rcond() < 1e-8)
        throw error("field_interpolator: degenerate time samples");
    Eigen::MatrixXd inv = lu.inverse();
    std::vector<Eigen::VectorXd> samples;
    for (int i = 0; i < m; ++i)
        samples.push_back(at_direct(ts[i]));
    for (int j = 0; j < m; ++j) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(c.ndofs(k_));
        for (int i = 0; i < m; ++i)
            v += inv(j, i) * samples[i];
        parts_.push_back(v);
    }
}

Eigen::VectorXd field_interpolator::at_direct(double t) const
{
    const exact_case* ex = ex_;
    field f = f_;
    form_field w = [ex, f, t](int chart, const Eigen::Vector2d& x) { return ex->eval(f, chart, x, t); };
    return load_ ? c_->load(k_, w) : c_->interpolate(k_, w);
}

Eigen::VectorXd field_interpolator::at(double t) const
{
    if (parts_.empty())
        return at_direct(t);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(c_->ndofs(k_));
    for (std::size_t j = 0; j < parts_.size(); ++j)
        v += phi_[j](t) * parts_[j];
    return v;
}

run_report run_case(const de_rham_complex& c, const exact_case& ex, const run_config& cfg)
{
    if (ex.manifold() != c.get_mesh().charts.manifold)
        throw error("run_case: case '" + ex.name() + "' needs a " + ex.manifold() + " mesh");
    if (!(cfg.dt > 0) || !(cfg.tmax > 0))
        throw error("run_case: dt and tmax must be positive");
    // tmax is rarely a multiple of dt (2 pi); the step is shrunk to the nearest one
    const int steps = std::max(1, int(std::ceil(cfg.tmax / cfg.dt - 1e-9)));
    const double dt = cfg.tmax / steps;

    maxwell_operators ops = assemble_maxwell(c);
    maxwell_stepper stepper(ops, dt, cfg.scheme);
    field_interpolator IE(c, ex, field::E), IB(c, ex, field::Bp);
    std::unique_ptr<field_interpolator> IJ;
    if (!ex.vacuum())
        IJ = std::make_unique<field_interpolator>(c, ex, field::J, cfg.source == source_mode::load);

    maxwell_state s;
    s.E = IE.at(0);
    s.B = IB.at(0);
    constraint_monitor cm(ops, s.E);

    run_report rep;
    rep.h = c.get_mesh().meshsize();
    rep.ndof = c.ndofs(1) + c.ndofs(2);
    rep.steps = steps;
    rep.dt = dt;
    rep.energy0 = stepper.energy(s);
    rep.energy_min = rep.energy_max = rep.energy0;

    // squared errors at the current time
    auto errors = [&](const maxwell_state& st) {
        Eigen::VectorXd eE = IE.at(st.t) - st.E;
        Eigen::VectorXd eB = IB.at(st.t) - st.B;
        Eigen::VectorXd edE = ops.D1 * eE;
        return Eigen::Vector3d(eE.dot(ops.M1 * eE), edE.dot(ops.M2 * edE), eB.dot(ops.M2 * eB));
    };
    auto record = [&](int n, const maxwell_state& st, double cres, double en) {
        if (cfg.series_every > 0 && n % cfg.series_every == 0) {
            rep.series_t.push_back(st.t);
            rep.series_energy.push_back(en);
            rep.series_constraint.push_back(cres);
        }
    };

    Eigen::Vector3d acc = 0.5 * dt * errors(s);
    record(0, s, 0, rep.energy0);
    for (int n = 1; n <= steps; ++n) {
        Eigen::VectorXd F;
        if (IJ) {
            F = IJ->at(stepper.source_time(s.t));
            if (cfg.source == source_mode::interpolate)
                F = ops.M1 * F;
            cm.add_source(dt, F);
        }
        stepper.step(s, F);
        s.t = n * dt;
        double en = stepper.energy(s);
        rep.energy_min = std::min(rep.energy_min, en);
        rep.energy_max = std::max(rep.energy_max, en);
        double cres = cm.residual(s.E);
        rep.constraint_max = std::max(rep.constraint_max, cres);
        acc += (n == steps ? 0.5 : 1.0) * dt * errors(s);
        record(n, s, cres, en);
    }
    rep.err_E = std::sqrt(std::max(0.0, acc[0]));
    rep.err_dE = std::sqrt(std::max(0.0, acc[1]));
    rep.err_B = std::sqrt(std::max(0.0, acc[2]));
    rep.energy_drift = rep.energy0 > 0
        ? std::max(rep.energy_max - rep.energy0, rep.energy0 - rep.energy_min) / rep.energy0
        : rep.energy_max;
    return rep;
}

} // namespace ddr
