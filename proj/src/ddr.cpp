#include "ddr/ddr.hpp"
#include "ddr/parallel.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/SparseExtra>

#include <algorithm>
#include <cmath>
#include <map>

namespace ddr {

namespace {

Eigen::MatrixXd coeffs(const std::vector<rform>& forms, int d, int l, int R)
{
    if (l < 0 || l > d)
        return Eigen::MatrixXd(0, forms.size());
    return master_coefficients(forms, d, l, R);
}

std::vector<rform> differentiate(const std::vector<rform>& forms)
{
    std::vector<rform> r;
    for (const auto& f : forms)
        r.push_back(ext_d(f));
    return r;
}

const std::vector<rform>& no_forms()
{
    static const std::vector<rform> e;
    return e;
}

double sign_pow(int k) { return k % 2 ? -1.0 : 1.0; }

Eigen::MatrixXd star_inverse(const Eigen::MatrixXd& G, int k)
{
    metric_at_point g(G);
    return hodge_matrix(g, k).inverse();
}

double scale_of(const Eigen::VectorXd& a, const Eigen::VectorXd& b)
{
    double s = 1;
    if (a.size())
        s = std::max(s, a.cwiseAbs().maxCoeff());
    if (b.size())
        s = std::max(s, b.cwiseAbs().maxCoeff());
    return s;
}

} // namespace

Eigen::MatrixXd master_values(int d, int l, int R, const Eigen::VectorXd& u)
{
    auto mons = monomials(d, R);
    int nc = int(binomial(d, l));
    Eigen::MatrixXd V = Eigen::MatrixXd::Zero(nc, mons.size() * nc);
    for (std::size_t m = 0; m < mons.size(); ++m) {
        double v = 1;
        for (int i = 0; i < d; ++i)
            for (int p = 0; p < mons[m][i]; ++p)
                v *= u[i];
        for (int I = 0; I < nc; ++I)
            V(I, m * nc + I) = v;
    }
    return V;
}

de_rham_complex::de_rham_complex(const mesh& msh, int r, int quad_degree)
    : mesh_(std::make_shared<const mesh>(msh)), r_(r)
{
    const mesh& m = *mesh_;
    if (r < 0)
        throw error("de_rham_complex: negative degree");
    if (!m.finalized())
        throw error("de_rham_complex: mesh not finalized");
    q_ = quad_degree >= 0 ? quad_degree : 2 * r + 6;
    build_bases();
    build_layout();
    build_interfaces();
    for (int d = 0; d <= 2; ++d) {
        cells_[d].resize(m.count(d));
        parallel_for(int(m.count(d)), [&](int id) { build_cell_cache(d, id); });
    }
    for (int k = 0; k <= 2; ++k)
        for (int d = k; d <= 2; ++d) {
            local_[k][d].resize(m.count(d));
            parallel_for(int(m.count(d)), [&](int id) { build_local(k, d, id); });
        }
    build_global();
}

int de_rham_complex::block_size(int k, int d) const
{
    if (d < k)
        return 0;
    return int(bm_[d][d - k].trimmed.cols());
}

void de_rham_complex::build_bases()
{
    const int R = r_ + 1;
    for (int d = 0; d <= 2; ++d)
        for (int l = 0; l <= d; ++l) {
            auto& b = bm_[d][l];
            const auto& full = basis_full(d, r_, l).forms;
            const auto& trim = basis_trimmed(d, r_, l).forms;
            b.full = coeffs(full, d, l, R);
            b.trimmed = coeffs(trim, d, l, R);
            b.to_full = b.full.colPivHouseholderQr().solve(b.trimmed);
            if (b.trimmed.size() && (b.full * b.to_full - b.trimmed).cwiseAbs().maxCoeff() > 1e-12)
                throw error("de_rham_complex: trimmed basis not contained in the full space");
            b.d_full = coeffs(differentiate(full), d, l + 1, R);
            const auto& kos = l >= 1 ? basis_koszul(d, r_, l).forms : no_forms();
            b.kos = coeffs(kos, d, l - 1, R);
            b.d_kos = coeffs(differentiate(kos), d, l, R);
            const auto& low = (r_ >= 1 && l + 1 <= d) ? basis_koszul(d, r_ - 1, l + 1).forms : no_forms();
            b.kos_lower = coeffs(low, d, l, R);
        }
}

void de_rham_complex::build_layout()
{
    const mesh& m = *mesh_;
    for (int k = 0; k <= 2; ++k) {
        int n = 0;
        for (int d = 0; d <= 2; ++d) {
            offsets_[k][d].assign(m.count(d), -1);
            if (d < k)
                continue;
            for (std::size_t id = 0; id < m.count(d); ++id) {
                offsets_[k][d][id] = n;
                n += block_size(k, d);
            }
        }
        ndofs_[k] = n;
    }
}

void de_rham_complex::build_interfaces()
{
    const mesh& m = *mesh_;
    for (int d = 0; d < 2; ++d)
        interface_[d].assign(m.count(d), {});
    auto note = [&](int d, int id, int f) {
        auto& v = interface_[d][id];
        for (int g : v)
            if (m.at(2, g).chart == m.at(2, f).chart)
                return;
        v.push_back(f);
    };
    for (int f = 0; f < int(m.count(2)); ++f)
        for (const auto& e : m.at(2, f).boundary) {
            note(1, e.sub, f);
            for (const auto& v : m.at(1, e.sub).boundary)
                note(0, v.sub, f);
        }
    for (int d = 0; d < 2; ++d)
        for (auto& v : interface_[d])
            if (v.size() < 2)
                v.clear();
}

alt_value de_rham_complex::sample(const form_field& w, int k, int d, int id, const Eigen::Vector2d& x) const
{
    const mesh& m = *mesh_;
    const int chart = m.at(d, id).chart;
    if (d == 2 || interface_[d][id].empty())
        return w(chart, x);
    alt_value sum(2, k);
    for (int f : interface_[d][id]) {
        const cell& F = m.at(2, f);
        alt_value v = w(F.chart, m.to_chart_of(F, chart, x));
        // pull back from the chart of F to the chart of the cell
        Eigen::Matrix2d J = m.charts.transition_jacobian(chart, F.chart, x);
        if (k == 1)
            v.c = J.transpose() * v.c;
        else if (k == 2)
            v.c *= J.determinant();
        sum.c += v.c;
    }
    sum.c /= double(interface_[d][id].size());
    return sum;
}

void de_rham_complex::build_cell_cache(int d, int id)
{
    auto& c = cells_[d][id];
    cell_geometry g = mesh_->geometry(d, id);
    c.q = g.rule(q_);
    c.frames.clear();
    double area = 0;
    for (int n = 0; n < c.q.size(); ++n) {
        c.frames.push_back(g.at(c.q.points.col(n)));
        area += c.q.weights[n] * c.frames.back().sqrtg;
    }
    c.h = d ? std::pow(area, 1.0 / d) : 1.0;
    const int R = r_ + 1;
    for (int l = 0; l <= d; ++l) {
        int ms = master_size(d, l, R);
        Eigen::MatrixXd Gm = Eigen::MatrixXd::Zero(ms, ms);
        for (int n = 0; n < c.q.size(); ++n) {
            const frame& fr = c.frames[n];
            metric_at_point mg(fr.G);
            Eigen::MatrixXd H = form_inner_matrix(mg, l);
            Eigen::MatrixXd V = master_values(d, l, R, c.q.points.col(n));
            Gm.noalias() += (c.q.weights[n] * fr.sqrtg) * (V.transpose() * H * V);
        }
        c.gram[l] = Gm;
    }
}

Eigen::MatrixXd de_rham_complex::trace_master(int d, const affine_d& T, int l) const
{
    const int R = r_ + 1;
    const int ds = d - 1;
    Eigen::MatrixXd Tr = Eigen::MatrixXd::Zero(master_size(ds, l, R), master_size(d, l, R));
    if (Tr.rows() == 0)
        return Tr;
    auto mons = monomials(d, R);
    auto smons = monomials(ds, R);
    std::map<std::vector<int>, int> pos;
    for (std::size_t i = 0; i < smons.size(); ++i)
        pos[smons[i]] = int(i);
    const auto& sets = index_sets(d, l);
    int nc = int(sets.size()), snc = int(binomial(ds, l));
    for (std::size_t m = 0; m < mons.size(); ++m)
        for (int I = 0; I < nc; ++I) {
            auto f = poly_form<double>::monomial(mons[m], sets[I], 1.0);
            auto t = pullback_affine(T, f);
            for (const auto& [key, c] : t.terms())
                Tr(pos.at(key.exp) * snc + index_set_position(ds, key.idx), m * nc + I) += c;
        }
    return Tr;
}

Eigen::MatrixXd de_rham_complex::embed(int k, int d, int id, int dsub, int sub, const Eigen::MatrixXd& A) const
{
    const auto& dofs = local_[k][d][id].dofs;
    const auto& sdofs = local_[k][dsub][sub].dofs;
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(A.rows(), dofs.size());
    for (std::size_t j = 0; j < sdofs.size(); ++j) {
        auto it = std::find(dofs.begin(), dofs.end(), sdofs[j]);
        if (it == dofs.end())
            throw error("de_rham_complex: subcell dof outside the cell closure");
        B.col(it - dofs.begin()) += A.col(j);
    }
    return B;
}

Eigen::MatrixXd de_rham_complex::projection_to_trimmed(int d, int id, int l) const
{
    const auto& b = bm_[d][l];
    const auto& G = cells_[d][id].gram[l];
    Eigen::MatrixXd Mt = b.trimmed.transpose() * G * b.trimmed;
    return Mt.ldlt().solve(b.trimmed.transpose() * G * b.full);
}

void de_rham_complex::build_local(int k, int d, int id)
{
    const mesh& m = *mesh_;
    auto& lo = local_[k][d][id];
    lo.dofs.clear();
    for (const auto& e : m.closure(d, id)) {
        if (e.dim < k)
            continue;
        int o = offsets_[k][e.dim][e.id];
        for (int j = 0; j < block_size(k, e.dim); ++j)
            lo.dofs.push_back(o + j);
    }
    const int nloc = int(lo.dofs.size());
    const int nb = block_size(k, d);
    const auto& cc = cells_[d][id];
    const double sk = sign_pow(k + 1);

    if (d == k) {
        lo.P = bm_[d][0].to_full;
        return;
    }

    // derivative, tested against P_r (d-k-1)-forms
    const int lp = d - k - 1;
    const auto& B = bm_[d][lp];
    Eigen::MatrixXd M = B.full.transpose() * cc.gram[lp] * B.full;
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(B.full.cols(), nloc);
    if (nb)
        rhs.leftCols(nb) = sk * B.d_full.transpose() * cc.gram[lp + 1] * bm_[d][d - k].trimmed;
    const auto& cell = m.at(d, id);
    std::vector<Eigen::MatrixXd> traces; // per boundary entry, master(d-1, lp) <- master(d, lp)
    for (const auto& inc : cell.boundary) {
        Eigen::MatrixXd Tr = trace_master(d, inc.T, lp);
        traces.push_back(Tr);
        const auto& sub = local_[k][d - 1][inc.sub];
        const auto& sc = cells_[d - 1][inc.sub];
        Eigen::MatrixXd Psub = embed(k, d, id, d - 1, inc.sub, sub.P);
        rhs += double(inc.sign) * (Tr * B.full).transpose() * sc.gram[lp] * bm_[d - 1][lp].full * Psub;
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
    if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 0))
        throw error("de_rham_complex: singular pairing matrix on cell " + std::to_string(id) + " (dim "
            + std::to_string(d) + ", k=" + std::to_string(k) + ")");
    lo.D = ldlt.solve(rhs);

    // potential, tested against d(kappa P_r L^{d-k}) + kappa P_{r-1} L^{d-k+1}
    const int l = d - k;
    const auto& C = bm_[d][l];
    const int nmu = int(C.d_kos.cols()), nnu = int(C.kos_lower.cols());
    Eigen::MatrixXd tests(C.d_kos.rows(), nmu + nnu);
    tests << C.d_kos, C.kos_lower;
    Eigen::MatrixXd A = sk * tests.transpose() * cc.gram[l] * C.full;
    if (A.rows() != A.cols())
        throw error("de_rham_complex: potential system is not square (k=" + std::to_string(k)
            + ", r=" + std::to_string(r_) + ")");
    Eigen::MatrixXd prhs = Eigen::MatrixXd::Zero(nmu + nnu, nloc);
    prhs.topRows(nmu) = C.kos.transpose() * cc.gram[l - 1] * B.full * lo.D;
    for (std::size_t i = 0; i < cell.boundary.size(); ++i) {
        const auto& inc = cell.boundary[i];
        const auto& sub = local_[k][d - 1][inc.sub];
        const auto& sc = cells_[d - 1][inc.sub];
        Eigen::MatrixXd Psub = embed(k, d, id, d - 1, inc.sub, sub.P);
        prhs.topRows(nmu) -= double(inc.sign) * (traces[i] * C.kos).transpose() * sc.gram[l - 1]
            * bm_[d - 1][l - 1].full * Psub;
    }
    if (nnu && nb)
        prhs.bottomRows(nnu).leftCols(nb) = sk * C.kos_lower.transpose() * cc.gram[l] * C.trimmed;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (!lu.isInvertible() || lu.rcond() < 1e-14)
        throw error("de_rham_complex: rank-deficient potential system on cell " + std::to_string(id) + " (dim "
            + std::to_string(d) + ", k=" + std::to_string(k) + ", r=" + std::to_string(r_) + ")");
    lo.P = lu.solve(prhs);
}

void de_rham_complex::build_global()
{
    const mesh& m = *mesh_;
    // derivatives
    for (int k = 0; k <= 1; ++k) {
        std::vector<Eigen::Triplet<double>> trip;
        for (int d = k + 1; d <= 2; ++d) {
            std::vector<Eigen::MatrixXd> blocks(m.count(d));
            parallel_for(int(m.count(d)), [&](int id) {
                blocks[id] = projection_to_trimmed(d, id, d - k - 1) * local_[k][d][id].D;
            });
            for (std::size_t id = 0; id < m.count(d); ++id) {
                const auto& dofs = local_[k][d][id].dofs;
                int row0 = offsets_[k + 1][d][id];
                const auto& Bk = blocks[id];
                for (int i = 0; i < Bk.rows(); ++i)
                    for (int j = 0; j < Bk.cols(); ++j)
                        if (Bk(i, j) != 0)
                            trip.emplace_back(row0 + i, dofs[j], Bk(i, j));
            }
        }
        D_[k].resize(ndofs_[k + 1], ndofs_[k]);
        D_[k].setFromTriplets(trip.begin(), trip.end());
    }

    // stabilized products
    const int R = r_ + 1;
    for (int k = 0; k <= 2; ++k) {
        std::vector<Eigen::MatrixXd> blocks(m.count(2));
        parallel_for(int(m.count(2)), [&](int id) {
            const auto& lo = local_[k][2][id];
            const auto& cc = cells_[2][id];
            const auto& Bf = bm_[2][2 - k];
            Eigen::MatrixXd Mloc = lo.P.transpose() * (Bf.full.transpose() * cc.gram[2 - k] * Bf.full) * lo.P;
            cell_geometry gf = m.geometry(2, id);
            for (const auto& e : m.closure(2, id)) {
                if (e.dim < k || e.dim > 1)
                    continue;
                const auto& ec = cells_[e.dim][e.id];
                Eigen::MatrixXd Pe = embed(k, 2, id, e.dim, e.id, local_[k][e.dim][e.id].P);
                Eigen::MatrixXd A(2, e.dim);
                for (int i = 0; i < 2; ++i)
                    for (int j = 0; j < e.dim; ++j)
                        A(i, j) = e.T.a(i, j);
                Eigen::MatrixXd pull = pullback_matrix(A, k);
                double wscale = std::pow(cc.h, 2 - e.dim);
                for (int n = 0; n < ec.q.size(); ++n) {
                    const frame& fe = ec.frames[n];
                    Eigen::VectorXd ue = ec.q.points.col(n);
                    Eigen::MatrixXd ve = star_inverse(fe.G, k)
                        * (master_values(e.dim, e.dim - k, R, ue) * bm_[e.dim][e.dim - k].full * Pe);
                    Eigen::VectorXd u = apply(e.T, ue);
                    frame ff = gf.at(u);
                    Eigen::MatrixXd vf = pull * star_inverse(ff.G, k)
                        * (master_values(2, 2 - k, R, u) * Bf.full * lo.P);
                    Eigen::MatrixXd diff = ve - vf;
                    metric_at_point ge(fe.G);
                    Mloc.noalias() += (wscale * ec.q.weights[n] * fe.sqrtg)
                        * (diff.transpose() * form_inner_matrix(ge, k) * diff);
                }
            }
            blocks[id] = 0.5 * (Mloc + Mloc.transpose());
        });
        std::vector<Eigen::Triplet<double>> trip;
        for (std::size_t id = 0; id < m.count(2); ++id) {
            const auto& dofs = local_[k][2][id].dofs;
            const auto& Bk = blocks[id];
            for (int i = 0; i < Bk.rows(); ++i)
                for (int j = 0; j < Bk.cols(); ++j)
                    trip.emplace_back(dofs[i], dofs[j], Bk(i, j));
        }
        M_[k].resize(ndofs_[k], ndofs_[k]);
        M_[k].setFromTriplets(trip.begin(), trip.end());
    }
}

Eigen::VectorXd de_rham_complex::interpolate(int k, const form_field& w) const
{
    const mesh& m = *mesh_;
    const int R = r_ + 1;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(ndofs_[k]);
    for (int d = k; d <= 2; ++d) {
        const auto& B = bm_[d][d - k];
        if (B.trimmed.cols() == 0)
            continue;
        parallel_for(int(m.count(d)), [&](int id) {
            const auto& cc = cells_[d][id];
            Eigen::VectorXd b = Eigen::VectorXd::Zero(B.trimmed.cols());
            for (int n = 0; n < cc.q.size(); ++n) {
                const frame& fr = cc.frames[n];
                alt_value tw = pullback_sample(fr, sample(w, k, d, id, fr.x));
                Eigen::MatrixXd phi = master_values(d, d - k, R, cc.q.points.col(n)) * B.trimmed;
                alt_value p(d, d - k);
                for (int i = 0; i < phi.cols(); ++i) {
                    p.c = phi.col(i);
                    b[i] += cc.q.weights[n] * wedge_at(tw, p).c[0];
                }
            }
            Eigen::MatrixXd Mt = B.trimmed.transpose() * cc.gram[d - k] * B.trimmed;
            x.segment(offsets_[k][d][id], b.size()) = Mt.ldlt().solve(b);
        });
    }
    return x;
}

Eigen::VectorXd de_rham_complex::load(int k, const form_field& w) const
{
    const mesh& m = *mesh_;
    const int R = r_ + 1;
    std::vector<Eigen::VectorXd> loc(m.count(2));
    parallel_for(int(m.count(2)), [&](int id) {
        const auto& cc = cells_[2][id];
        Eigen::MatrixXd P = bm_[2][2 - k].full * local_[k][2][id].P;
        int chart = m.at(2, id).chart;
        Eigen::VectorXd l = Eigen::VectorXd::Zero(P.cols());
        for (int n = 0; n < cc.q.size(); ++n) {
            const frame& fr = cc.frames[n];
            Eigen::MatrixXd V = star_inverse(fr.G, k) * (master_values(2, 2 - k, R, cc.q.points.col(n)) * P);
            Eigen::VectorXd tw = pullback_sample(fr, w(chart, fr.x)).c;
            metric_at_point g(fr.G);
            l += cc.q.weights[n] * fr.sqrtg * (V.transpose() * (form_inner_matrix(g, k) * tw));
        }
        loc[id] = l;
    });
    Eigen::VectorXd b = Eigen::VectorXd::Zero(ndofs_[k]);
    for (int id = 0; id < int(m.count(2)); ++id) {
        const auto& dofs = local_[k][2][id].dofs;
        for (std::size_t i = 0; i < dofs.size(); ++i)
            b[dofs[i]] += loc[id][i];
    }
    return b;
}

Eigen::VectorXd de_rham_complex::restrict(int k, int d, int id, const Eigen::VectorXd& x) const
{
    const auto& dofs = local_[k][d][id].dofs;
    Eigen::VectorXd v(dofs.size());
    for (std::size_t i = 0; i < dofs.size(); ++i)
        v[i] = x[dofs[i]];
    return v;
}

alt_value de_rham_complex::potential_value(int k, int id, const Eigen::VectorXd& local, const Eigen::VectorXd& u) const
{
    cell_geometry g = mesh_->geometry(2, id);
    frame fr = g.at(u);
    Eigen::VectorXd p = master_values(2, 2 - k, r_ + 1, u) * (bm_[2][2 - k].full * (local_[k][2][id].P * local));
    alt_value v(2, k);
    v.c = star_inverse(fr.G, k) * p;
    return v;
}

double de_rham_complex::potential_error(int k, const Eigen::VectorXd& x, const form_field& w) const
{
    const mesh& m = *mesh_;
    const int R = r_ + 1;
    std::vector<double> err(m.count(2), 0.0);
    parallel_for(int(m.count(2)), [&](int id) {
        const auto& cc = cells_[2][id];
        Eigen::VectorXd p = bm_[2][2 - k].full * (local_[k][2][id].P * restrict(k, 2, id, x));
        int chart = m.at(2, id).chart;
        double s = 0;
        for (int n = 0; n < cc.q.size(); ++n) {
            const frame& fr = cc.frames[n];
            Eigen::VectorXd v = star_inverse(fr.G, k) * (master_values(2, 2 - k, R, cc.q.points.col(n)) * p);
            Eigen::VectorXd e = v - pullback_sample(fr, w(chart, fr.x)).c;
            metric_at_point g(fr.G);
            s += cc.q.weights[n] * fr.sqrtg * e.dot(form_inner_matrix(g, k) * e);
        }
        err[id] = s;
    });
    double s = 0;
    for (double e : err)
        s += e;
    return std::sqrt(s);
}

double de_rham_complex::projection_residual(int k, int d, int id, const Eigen::VectorXd& x) const
{
    Eigen::VectorXd loc = restrict(k, d, id, x);
    int nb = block_size(k, d);
    Eigen::VectorXd proj = projection_to_trimmed(d, id, d - k) * (local_[k][d][id].P * loc);
    Eigen::VectorXd own = loc.head(nb);
    if (nb == 0)
        return 0;
    return (proj - own).cwiseAbs().maxCoeff() / scale_of(proj, own);
}

double de_rham_complex::link_residual(int k, int d, int id, const Eigen::VectorXd& y) const
{
    if (k < 1 || d < k)
        throw error("link_residual: need 1 <= k <= d");
    Eigen::VectorXd dy = D_[k - 1] * y;
    Eigen::VectorXd lhs = local_[k][d][id].P * restrict(k, d, id, dy);
    Eigen::VectorXd rhs = local_[k - 1][d][id].D * restrict(k - 1, d, id, y);
    // both in full-basis coefficients of P_r (d-k)-forms
    if (lhs.size() == 0)
        return 0;
    return (lhs - rhs).cwiseAbs().maxCoeff() / scale_of(lhs, rhs);
}

double de_rham_complex::stokes_residual(int id, const Eigen::VectorXd& x0) const
{
    const mesh& m = *mesh_;
    const int R = r_ + 1;
    const auto& cc = cells_[2][id];
    // alpha runs over all monomials of degree <= r+1 (identity in master coordinates)
    std::vector<rform> alpha;
    for (const auto& e : monomials(2, R))
        alpha.push_back(rform::monomial(e, {}, 1));
    Eigen::MatrixXd dalpha = coeffs(differentiate(alpha), 2, 1, R);
    Eigen::VectorXd pd = bm_[2][1].full * (local_[0][2][id].D * restrict(0, 2, id, x0));
    Eigen::VectorXd lhs = dalpha.transpose() * cc.gram[1] * pd;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(lhs.size());
    for (const auto& inc : m.at(2, id).boundary) {
        Eigen::MatrixXd Tr = trace_master(2, inc.T, 0);
        Eigen::VectorXd pe = bm_[1][0].full * (local_[0][1][inc.sub].D * restrict(0, 1, inc.sub, x0));
        rhs -= double(inc.sign) * Tr.transpose() * cells_[1][inc.sub].gram[0] * pe;
    }
    return (lhs - rhs).cwiseAbs().maxCoeff() / scale_of(lhs, rhs);
}

// ---- cohomology ----

namespace {

struct sv_info {
    int rank = 0;
    int kernel = 0;      // dim ker A (columns)
    double gap = INFINITY; // smallest retained / largest discarded
};

// Singular values of a dense matrix.
Eigen::VectorXd dense_singular_values(const sparse& A)
{
    Eigen::MatrixXd Ad(A);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(Ad);
    return svd.singularValues();
}

double largest_singular_value(const sparse& A)
{
    Eigen::VectorXd v = Eigen::VectorXd::Ones(A.cols()).normalized();
    double s = 0;
    for (int it = 0; it < 200; ++it) {
        Eigen::VectorXd w = A.transpose() * (A * v);
        double ns = std::sqrt(w.norm());
        v = w.normalized();
        if (std::abs(ns - s) < 1e-10 * ns)
            break;
        s = ns;
    }
    return (A * v).norm();
}

// Smallest singular values of A (by columns) via shift-invert subspace
// iteration on A^T A.
Eigen::VectorXd smallest_singular_values(const sparse& A, double smax, int nvec)
{
    const int n = int(A.cols());
    sparse N = A.transpose() * A;
    sparse I(n, n);
    I.setIdentity();
    sparse S = N + (1e-12 * smax * smax) * I;
    Eigen::SimplicialLDLT<sparse> ldlt(S);
    if (ldlt.info() != Eigen::Success)
        throw error("cohomology_betti: factorization failed");
    Eigen::MatrixXd X(n, nvec);
    // deterministic start
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < nvec; ++j)
            X(i, j) = std::sin(1.0 + 0.7 * i + 1.3 * j * (i % 7 + 1));
    for (int it = 0; it < 60; ++it) {
        X = ldlt.solve(X);
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
        X = qr.householderQ() * Eigen::MatrixXd::Identity(n, nvec);
    }
    Eigen::MatrixXd AX = A * X;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(AX.transpose() * AX);
    Eigen::MatrixXd V = X * es.eigenvectors();
    Eigen::VectorXd s(nvec);
    for (int j = 0; j < nvec; ++j)
        s[j] = (A * V.col(j)).norm();
    std::sort(s.data(), s.data() + nvec);
    return s;
}

sv_info analyse(const sparse& A, double thr)
{
    sv_info r;
    const int n = int(A.cols());
    if (A.rows() == 0 || n == 0) {
        r.kernel = n;
        return r;
    }
    if (std::max(A.rows(), A.cols()) <= 3000) {
        Eigen::VectorXd s = dense_singular_values(A);
        double smax = s.size() ? s[0] : 0;
        double lowest_kept = INFINITY, highest_dropped = 0;
        for (int i = 0; i < s.size(); ++i) {
            if (s[i] > thr * smax) {
                ++r.rank;
                lowest_kept = std::min(lowest_kept, s[i]);
            } else
                highest_dropped = std::max(highest_dropped, s[i]);
        }
        r.kernel = n - r.rank;
        r.gap = lowest_kept / std::max(highest_dropped, 1e-300);
        if (r.rank == int(s.size()))
            r.gap = lowest_kept / (thr * smax);
        return r;
    }
    double smax = largest_singular_value(A);
    int nvec = 8;
    for (;;) {
        Eigen::VectorXd s = smallest_singular_values(A, smax, std::min(nvec, n));
        int dropped = 0;
        double highest_dropped = 0, lowest_kept = INFINITY;
        for (int i = 0; i < s.size(); ++i) {
            if (s[i] <= thr * smax) {
                ++dropped;
                highest_dropped = std::max(highest_dropped, s[i]);
            } else
                lowest_kept = std::min(lowest_kept, s[i]);
        }
        if (dropped == s.size() && nvec < n) {
            nvec *= 2;
            continue;
        }
        r.kernel = dropped;
        r.rank = n - dropped;
        r.gap = dropped ? lowest_kept / std::max(highest_dropped, 1e-300) : lowest_kept / (thr * smax);
        return r;
    }
}

} // namespace

betti_result cohomology_betti(const de_rham_complex& c, double rel_threshold, double min_gap)
{
    betti_result b;
    const sparse& d0 = c.derivative(0);
    const sparse& d1 = c.derivative(1);
    sv_info a0 = analyse(d0, rel_threshold);
    // rank of d1 through its transpose so the kernel search runs on the small side
    sparse d1t = d1.transpose();
    sv_info a1 = analyse(d1t, rel_threshold);
    int n0 = c.ndofs(0), n1 = c.ndofs(1), n2 = c.ndofs(2);
    b.rank = {n0 - a0.kernel, n2 - a1.kernel};
    b.betti = {a0.kernel, n1 - b.rank[0] - b.rank[1], a1.kernel};
    b.gap = std::min(a0.gap, a1.gap);
    b.gap_ok = b.gap >= min_gap;
    return b;
}

void export_market(const sparse& A, const std::string& path)
{
    if (!Eigen::saveMarket(A, path))
        throw error("cannot write '" + path + "'");
}

} // namespace ddr
