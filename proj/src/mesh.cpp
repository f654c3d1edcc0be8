#include "ddr/mesh.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace ddr {

affine_d compose(const affine_d& outer, const affine_d& inner)
{
    if (outer.source_dim != inner.target_dim)
        throw error("compose: shape mismatch");
    affine_d r(outer.target_dim, inner.source_dim);
    for (int i = 0; i < outer.target_dim; ++i) {
        r.b[i] = outer.b[i];
        for (int k = 0; k < outer.source_dim; ++k)
            r.b[i] += outer.a(i, k) * inner.b[k];
        for (int j = 0; j < inner.source_dim; ++j)
            for (int k = 0; k < outer.source_dim; ++k)
                r.a(i, j) += outer.a(i, k) * inner.a(k, j);
    }
    return r;
}

Eigen::VectorXd apply(const affine_d& T, const Eigen::VectorXd& u)
{
    Eigen::VectorXd y(T.target_dim);
    for (int i = 0; i < T.target_dim; ++i) {
        y[i] = T.b[i];
        for (int j = 0; j < T.source_dim; ++j)
            y[i] += T.a(i, j) * u[j];
    }
    return y;
}

int mesh::add_cell(int dim, const std::string& kind, const json& params, int chart)
{
    if (dim < 0 || dim > 2)
        throw error("add_cell: dimension out of range");
    if (chart < 0 || chart >= int(charts.charts.size()))
        throw error("add_cell: unknown chart");
    cell c;
    c.dim = dim;
    c.kind = kind;
    c.params = params;
    c.chart = chart;
    c.param = make_parametrization(kind, params);
    if (c.param->dim() != dim)
        throw error("add_cell: construction '" + kind + "' has the wrong dimension");
    c.center = c.param->point(c.param->domain().centroid());
    cells_[dim].push_back(std::move(c));
    finalized_ = false;
    return int(cells_[dim].size()) - 1;
}

int mesh::add_vertex(const Eigen::Vector2d& x, int chart)
{
    return add_cell(0, "vertex", json{{"x", {x[0], x[1]}}}, chart);
}

Eigen::Vector2d mesh::to_chart_of(const cell& target, int from_chart, const Eigen::Vector2d& x) const
{
    return charts.transition(from_chart, target.chart, x, target.center);
}

incidence mesh::compute_incidence(int d, int id, int sub) const
{
    const cell& c = at(d, id);
    const cell& s = at(d - 1, sub);
    incidence inc;
    inc.sub = sub;
    if (d == 1) {
        Eigen::VectorXd u = c.param->inverse(to_chart_of(c, s.chart, s.param->point(Eigen::VectorXd(0))));
        const auto& D = c.param->domain();
        inc.T = affine_d(1, 0);
        inc.T.b[0] = u[0];
        inc.sign = std::abs(u[0] - D.a) < std::abs(u[0] - D.b) ? -1 : 1;
        return inc;
    }
    auto ref = [&](double t) {
        return Eigen::Vector2d(c.param->inverse(to_chart_of(c, s.chart, s.param->point(Eigen::VectorXd::Constant(1, t)))));
    };
    Eigen::Vector2d P0 = ref(0), P1 = ref(1);
    inc.T = affine_d(2, 1);
    for (int i = 0; i < 2; ++i) {
        inc.T.b[i] = P0[i];
        inc.T.a(i, 0) = P1[i] - P0[i];
    }
    const auto& V = c.param->domain().vertices;
    int n = int(V.size());
    double scale = (V[1] - V[0]).norm();
    for (int i = 0; i < n; ++i) {
        const auto &a = V[i], &b = V[(i + 1) % n];
        if ((P0 - a).norm() < 1e-8 * scale && (P1 - b).norm() < 1e-8 * scale) {
            inc.sign = 1;
            return inc;
        }
        if ((P0 - b).norm() < 1e-8 * scale && (P1 - a).norm() < 1e-8 * scale) {
            inc.sign = -1;
            return inc;
        }
    }
    throw error("compute_incidence: edge " + std::to_string(sub) + " does not match a side of cell "
        + std::to_string(id));
}

void mesh::set_boundary(int d, int id, const std::vector<int>& subs)
{
    auto& c = at_mut(d, id);
    c.boundary.clear();
    for (int s : subs)
        c.boundary.push_back(compute_incidence(d, id, s));
    finalized_ = false;
}

void mesh::finalize()
{
    for (int d = 0; d <= 2; ++d) {
        closure_[d].assign(count(d), {});
        for (std::size_t i = 0; i < count(d); ++i) {
            cell& c = cells_[d][i];
            if (!c.param)
                c.param = make_parametrization(c.kind, c.params);
            c.center = c.param->point(c.param->domain().centroid());
            c.orientation = 1;
            if (d == 2) {
                double det = c.param->jacobian(c.param->domain().centroid()).determinant();
                c.orientation = det > 0 ? 1 : -1;
            }
            for (const auto& inc : c.boundary)
                if (inc.sub < 0 || inc.sub >= int(count(d - 1)))
                    throw error("mesh: boundary references unknown cell");
        }
    }
    for (int d = 0; d <= 2; ++d)
        for (std::size_t i = 0; i < count(d); ++i) {
            auto& cl = closure_[d][i];
            cl.push_back({d, int(i), affine_d::identity(d)});
            const cell& c = cells_[d][i];
            for (const auto& inc : c.boundary)
                cl.push_back({d - 1, inc.sub, inc.T});
            if (d == 2) {
                std::map<int, bool> seen;
                for (const auto& inc : c.boundary)
                    for (const auto& vinc : cells_[1][inc.sub].boundary) {
                        if (seen[vinc.sub])
                            continue;
                        seen[vinc.sub] = true;
                        cl.push_back({0, vinc.sub, compose(inc.T, vinc.T)});
                    }
            }
        }
    edge_faces_.assign(count(1), {});
    for (std::size_t f = 0; f < count(2); ++f)
        for (const auto& inc : cells_[2][f].boundary)
            edge_faces_[inc.sub].push_back(int(f));
    finalized_ = true;
}

double mesh::meshsize() const
{
    double h = 0;
    for (std::size_t f = 0; f < count(2); ++f)
        h = std::max(h, geometry(2, int(f)).size());
    return h;
}

double mesh::mean_meshsize() const
{
    double area = 0;
    for (std::size_t f = 0; f < count(2); ++f)
        area += geometry(2, int(f)).measure();
    return std::sqrt(area / double(count(2)));
}

// ---- validation ----

validation_report validate_mesh(const mesh& m, double tol)
{
    validation_report rep;
    auto fail = [&](const std::string& s) {
        rep.ok = false;
        if (rep.problems.size() < 50)
            rep.problems.push_back(s);
    };
    if (!m.finalized()) {
        fail("mesh not finalized");
        return rep;
    }
    rep.euler = m.euler_characteristic();
    if (m.charts.manifold == "sphere" && rep.euler != 2)
        fail("Euler characteristic " + std::to_string(rep.euler) + " != 2");
    if (m.charts.manifold == "torus" && rep.euler != 0)
        fail("Euler characteristic " + std::to_string(rep.euler) + " != 0");

    // edges: two endpoints with opposite signs
    for (std::size_t e = 0; e < m.count(1); ++e) {
        const auto& b = m.at(1, int(e)).boundary;
        if (b.size() != 2 || b[0].sign + b[1].sign != 0)
            fail("edge " + std::to_string(e) + ": expected two endpoints of opposite sign");
    }
    // faces: closed boundary chain, each edge used once
    for (std::size_t f = 0; f < m.count(2); ++f) {
        const auto& c = m.at(2, int(f));
        if (c.boundary.size() < 2)
            fail("face " + std::to_string(f) + ": boundary too short");
        std::map<int, int> chain, used;
        for (const auto& inc : c.boundary) {
            if (used[inc.sub]++)
                fail("face " + std::to_string(f) + ": edge " + std::to_string(inc.sub) + " repeated");
            for (const auto& v : m.at(1, inc.sub).boundary)
                chain[v.sub] += inc.sign * v.sign;
        }
        for (auto [v, s] : chain)
            if (s != 0)
                fail("face " + std::to_string(f) + ": boundary of boundary nonzero at vertex " + std::to_string(v));
    }
    // two incident faces with opposite induced orientations
    bool closed = m.charts.manifold != "custom";
    const auto& ef = m.edge_faces();
    for (std::size_t e = 0; e < m.count(1); ++e) {
        const auto& fs = ef[e];
        if (fs.empty() || fs.size() > 2 || (closed && fs.size() != 2)) {
            fail("edge " + std::to_string(e) + ": " + std::to_string(fs.size()) + " incident faces");
            continue;
        }
        if (fs.size() != 2)
            continue;
        int s = 0;
        for (int f : fs) {
            const auto& c = m.at(2, f);
            for (const auto& inc : c.boundary)
                if (inc.sub == int(e))
                    s += m.charts.charts[c.chart].orientation * c.orientation * inc.sign;
        }
        if (s != 0)
            fail("edge " + std::to_string(e) + ": incident faces induce the same orientation");
    }

    // affine compatibility
    for (int d = 1; d <= 2; ++d)
        for (std::size_t id = 0; id < m.count(d); ++id) {
            const cell& c = m.at(d, int(id));
            for (const auto& inc : c.boundary) {
                const cell& s = m.at(d - 1, inc.sub);
                incidence fresh;
                try {
                    fresh = m.compute_incidence(d, int(id), inc.sub);
                } catch (const error& ex) {
                    fail(ex.what());
                    continue;
                }
                if (fresh.sign != inc.sign)
                    fail("cell " + std::to_string(id) + " (dim " + std::to_string(d) + "): wrong sign for subcell "
                        + std::to_string(inc.sub));
                if (d == 1) {
                    rep.map_mismatch = std::max(rep.map_mismatch, std::abs(fresh.T.b[0] - inc.T.b[0]));
                    continue;
                }
                // affine interpolant through the endpoints
                const int ns = 9;
                Eigen::MatrixXd Y(2, ns);
                for (int k = 0; k < ns; ++k) {
                    double t = k / double(ns - 1);
                    Eigen::Vector2d x = m.to_chart_of(c, s.chart, s.param->point(Eigen::VectorXd::Constant(1, t)));
                    Y.col(k) = c.param->inverse(x);
                }
                for (int k = 0; k < ns; ++k) {
                    double t = k / double(ns - 1);
                    Eigen::VectorXd fit = Y.col(0) + t * (Y.col(ns - 1) - Y.col(0));
                    Eigen::VectorXd stored = apply(inc.T, Eigen::VectorXd::Constant(1, t));
                    rep.affine_residual = std::max(rep.affine_residual, (Y.col(k) - fit).cwiseAbs().maxCoeff());
                    rep.map_mismatch = std::max(rep.map_mismatch, (fit - stored).cwiseAbs().maxCoeff());
                }
                double hf = m.geometry(d, int(id)).size(), hs = m.geometry(d - 1, inc.sub).size();
                rep.max_size_ratio = std::max(rep.max_size_ratio, hf / hs);
            }
        }
    if (rep.affine_residual > tol)
        fail("trace composite not affine, residual " + std::to_string(rep.affine_residual));
    if (rep.map_mismatch > tol)
        fail("stored trace map differs from the fitted one by " + std::to_string(rep.map_mismatch));

    // closure maps of vertices agree with direct embeddings
    for (std::size_t f = 0; f < m.count(2); ++f) {
        const cell& c = m.at(2, int(f));
        for (const auto& e : m.closure(2, int(f))) {
            if (e.dim != 0)
                continue;
            const cell& v = m.at(0, e.id);
            Eigen::VectorXd direct = c.param->inverse(m.to_chart_of(c, v.chart, v.param->point(Eigen::VectorXd(0))));
            rep.composition_residual = std::max(rep.composition_residual, (direct - apply(e.T, Eigen::VectorXd(0))).cwiseAbs().maxCoeff());
        }
    }
    if (rep.composition_residual > tol)
        fail("composed trace maps disagree with vertex embeddings by " + std::to_string(rep.composition_residual));

    // metric sanity
    rep.min_det = INFINITY;
    for (int d = 1; d <= 2; ++d)
        for (std::size_t id = 0; id < m.count(d); ++id) {
            cell_geometry g = m.geometry(d, int(id));
            quad_rule q = g.rule(8);
            const cell& c = m.at(d, int(id));
            for (int i = 0; i < q.size(); ++i) {
                frame fr = g.at(q.points.col(i));
                double det = fr.G.determinant();
                rep.min_det = std::min(rep.min_det, det);
                if (!(det > 0))
                    fail("cell " + std::to_string(id) + " (dim " + std::to_string(d) + "): degenerate metric");
                if (d == 2 && fr.DI.determinant() * c.orientation <= 0)
                    fail("face " + std::to_string(id) + ": Jacobian changes sign");
            }
        }
    return rep;
}

std::function<Eigen::Vector2d(double)> chart_transition_edge(const mesh& m, int edge, int from_chart, int to_chart)
{
    const cell& e = m.at(1, edge);
    const auto& fs = m.edge_faces().at(edge);
    const cell* in_to = nullptr;
    bool has_from = false;
    for (int f : fs) {
        const cell& c = m.at(2, f);
        if (c.chart == from_chart)
            has_from = true;
        if (c.chart == to_chart)
            in_to = &c;
    }
    if (from_chart == to_chart && !m.charts.charts.at(from_chart).period.empty() && fs.size() == 2) {
        // periodic seam: the two faces see different images of the edge
        const cell& a = m.at(2, fs[0]);
        const cell& b = m.at(2, fs[1]);
        Eigen::Vector2d mid = e.param->point(Eigen::VectorXd::Constant(1, 0.5));
        Eigen::Vector2d pa = m.to_chart_of(a, e.chart, mid), pb = m.to_chart_of(b, e.chart, mid);
        if ((pa - pb).norm() < 1e-12)
            throw error("chart_transition_edge: edge is not on a periodic seam");
        const cell* target = (pa - mid).norm() > 1e-12 ? &a : &b;
        return [&m, &e, target](double t) {
            return m.to_chart_of(*target, e.chart, e.param->point(Eigen::VectorXd::Constant(1, t)));
        };
    }
    if (from_chart == to_chart || !has_from || !in_to)
        throw error("chart_transition_edge: edge is not on an interface between the given charts");
    return [&m, &e, in_to, from_chart](double t) {
        Eigen::Vector2d x = e.param->point(Eigen::VectorXd::Constant(1, t));
        Eigen::Vector2d y = m.charts.transition(e.chart, from_chart, x, x);
        return m.charts.transition(from_chart, in_to->chart, y, in_to->center);
    };
}

// ---- JSON ----

namespace {

json affine_to_json(const affine_d& T)
{
    json A = json::array();
    for (int i = 0; i < T.target_dim; ++i) {
        json row = json::array();
        for (int j = 0; j < T.source_dim; ++j)
            row.push_back(T.a(i, j));
        A.push_back(row);
    }
    return json{{"A", A}, {"b", T.b}};
}

affine_d affine_from_json(const json& j, int target, int source)
{
    affine_d T(target, source);
    for (int i = 0; i < target; ++i) {
        T.b[i] = j.at("b").at(i).get<double>();
        for (int k = 0; k < source; ++k)
            T.a(i, k) = j.at("A").at(i).at(k).get<double>();
    }
    return T;
}

} // namespace

json mesh_to_json(const mesh& m)
{
    json j;
    j["format"] = 1;
    j["manifold"] = m.charts.manifold;
    j["charts"] = m.charts.to_json();
    json cells = json::array(), inc = json::array();
    for (int d = 0; d <= 2; ++d) {
        json cs = json::array(), is = json::array();
        for (const auto& c : m.cells(d)) {
            cs.push_back(json{{"kind", c.kind}, {"params", c.params}, {"chart", c.chart}});
            json b = json::array();
            for (const auto& i : c.boundary) {
                json e = affine_to_json(i.T);
                e["sub"] = i.sub;
                e["sign"] = i.sign;
                b.push_back(e);
            }
            is.push_back(b);
        }
        cells.push_back(cs);
        inc.push_back(is);
    }
    j["cells"] = cells;
    j["incidence"] = inc;
    return j;
}

mesh mesh_from_json(const json& j)
{
    if (j.value("format", 0) != 1)
        throw error("mesh file: unsupported format version");
    mesh m;
    m.charts = atlas::from_json(j.at("charts"));
    m.charts.manifold = j.value("manifold", "custom");
    const auto& cells = j.at("cells");
    const auto& inc = j.at("incidence");
    if (cells.size() != 3 || inc.size() != 3)
        throw error("mesh file: expected cells and incidence for dimensions 0, 1, 2");
    for (int d = 0; d <= 2; ++d)
        for (const auto& c : cells[d])
            m.add_cell(d, c.at("kind").get<std::string>(), c.at("params"), c.value("chart", 0));
    for (int d = 1; d <= 2; ++d) {
        if (inc[d].size() != m.count(d))
            throw error("mesh file: incidence list length mismatch");
        for (std::size_t id = 0; id < m.count(d); ++id) {
            auto& c = m.at_mut(d, int(id));
            for (const auto& e : inc[d][id]) {
                incidence i;
                i.sub = e.at("sub").get<int>();
                i.sign = e.at("sign").get<int>();
                i.T = affine_from_json(e, d, d - 1);
                c.boundary.push_back(i);
            }
        }
    }
    m.finalize();
    return m;
}

void save_mesh(const mesh& m, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw error("cannot write '" + path + "'");
    out << mesh_to_json(m).dump(1) << "\n";
}

mesh load_mesh(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw error("cannot read '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& ex) {
        throw error("mesh file '" + path + "': " + ex.what());
    }
    try {
        return mesh_from_json(j);
    } catch (const json::exception& ex) {
        throw error("mesh file '" + path + "': " + ex.what());
    }
}

} // namespace ddr
