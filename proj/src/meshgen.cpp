#include "ddr/meshgen.hpp"

#include <cmath>
#include <map>
#include <numbers>

namespace ddr {

namespace {

using std::numbers::pi;

json pt(const Eigen::Vector2d& x) { return json::array({x[0], x[1]}); }

json line(const Eigen::Vector2d& a, const Eigen::Vector2d& b)
{
    return json{{"curve", "line"}, {"a", pt(a)}, {"b", pt(b)}};
}

// Edges between existing vertices, shared by key.
struct edge_table {
    mesh& m;
    std::map<std::pair<int, int>, int> ids;

    int get(int va, int vb, int chart)
    {
        auto key = std::minmax(va, vb);
        auto it = ids.find(key);
        if (it != ids.end())
            return it->second;
        Eigen::Vector2d a = m.at(0, key.first).param->point(Eigen::VectorXd(0));
        Eigen::Vector2d b = m.at(0, key.second).param->point(Eigen::VectorXd(0));
        a = m.charts.transition(m.at(0, key.first).chart, chart, a, a);
        b = m.charts.transition(m.at(0, key.second).chart, chart, b, b);
        int e = m.add_cell(1, "parametrized_segment", line(a, b), chart);
        m.set_boundary(1, e, {key.first, key.second});
        ids[key] = e;
        return e;
    }
};

int add_polygon(mesh& m, edge_table& et, const std::vector<int>& verts, int chart)
{
    json vs = json::array();
    for (int v : verts)
        vs.push_back(pt(m.at(0, v).param->point(Eigen::VectorXd(0))));
    int f = m.add_cell(2, "flat_polygon", json{{"vertices", vs}}, chart);
    std::vector<int> edges;
    for (std::size_t i = 0; i < verts.size(); ++i)
        edges.push_back(et.get(verts[i], verts[(i + 1) % verts.size()], chart));
    m.set_boundary(2, f, edges);
    return f;
}

Eigen::Vector2d polar(double r, double th) { return {r * std::cos(th), r * std::sin(th)}; }

void build_hemisphere(mesh& m, int chart, double rs, const std::vector<int>& eq, const std::vector<int>& arcs)
{
    const int N1 = int(eq.size());
    const double da = 2 * pi / N1;
    const int K = int(std::floor(1 / rs));
    edge_table et{m, {}};

    std::vector<std::vector<int>> rings;
    for (int i = 1; i <= K; ++i) {
        double rho = 1 - i * rs;
        int n = i == 1 ? N1 : int(std::floor(2 * pi * rho / rs));
        if (n < 3)
            continue;
        std::vector<int> ring;
        for (int k = 0; k < n; ++k)
            ring.push_back(m.add_vertex(polar(rho, 2 * pi * k / n), chart));
        rings.push_back(ring);
    }

    // curved boundary layer
    const double rho1 = 1 - rs;
    const auto& r1 = rings[0];
    for (int j = 0; j < N1; ++j) {
        int jn = (j + 1) % N1;
        json p{{"variant", "layer"}, {"rho1", rho1}, {"alpha", j * da}, {"dalpha", da}};
        int f = m.add_cell(2, "cone_section", p, chart);
        m.set_boundary(2, f, {et.get(r1[j], r1[jn], chart), et.get(r1[j], eq[j], chart), arcs[j],
                                 et.get(r1[jn], eq[jn], chart)});
    }

    // annuli between consecutive rings
    for (std::size_t a = 0; a + 1 < rings.size(); ++a) {
        const auto& out = rings[a];
        const auto& in = rings[a + 1];
        int no = int(out.size()), ni = int(in.size());
        std::vector<int> tgt(ni);
        for (int k = 0; k < ni; ++k) {
            Eigen::Vector2d x = m.at(0, in[k]).param->point(Eigen::VectorXd(0));
            double best = INFINITY;
            for (int q = 0; q < no; ++q) {
                // strict comparison keeps the smaller angle on ties
                double d = (m.at(0, out[q]).param->point(Eigen::VectorXd(0)) - x).squaredNorm();
                if (d < best) {
                    best = d;
                    tgt[k] = q;
                }
            }
        }
        for (int k = 0; k < ni; ++k) {
            int A = tgt[k], B = tgt[(k + 1) % ni];
            int j = ((B - A) % no + no) % no;
            std::vector<int> verts{in[k]};
            for (int s = 0; s <= j; ++s)
                verts.push_back(out[(A + s) % no]);
            verts.push_back(in[(k + 1) % ni]);
            add_polygon(m, et, verts, chart);
        }
    }

    // central fan
    const auto& last = rings.back();
    int c = m.add_vertex({0, 0}, chart);
    for (std::size_t k = 0; k < last.size(); ++k)
        add_polygon(m, et, {c, last[k], last[(k + 1) % last.size()]}, chart);
}

mesh single_cell(const std::string& kind, const json& params, const std::vector<json>& edges)
{
    mesh m;
    m.charts.charts = {{"plane", metric_kind::flat, 1, {}}};
    m.charts.manifold = "custom";
    std::vector<Eigen::Vector2d> pts;
    auto vertex = [&](const Eigen::Vector2d& x) {
        for (std::size_t i = 0; i < pts.size(); ++i)
            if ((pts[i] - x).norm() < 1e-12)
                return int(i);
        pts.push_back(x);
        return m.add_vertex(x, 0);
    };
    std::vector<int> eids;
    for (const auto& ep : edges) {
        int e = m.add_cell(1, "parametrized_segment", ep, 0);
        const auto& p = *m.at(1, e).param;
        int a = vertex(p.point(Eigen::VectorXd::Constant(1, 0.0)));
        int b = vertex(p.point(Eigen::VectorXd::Constant(1, 1.0)));
        m.set_boundary(1, e, {a, b});
        eids.push_back(e);
    }
    int f = m.add_cell(2, kind, params, 0);
    m.set_boundary(2, f, eids);
    m.finalize();
    return m;
}

json with_placement(json e, const json& params)
{
    if (params.contains("placement"))
        e["placement"] = params["placement"];
    return e;
}

} // namespace

mesh gen_torus(int n)
{
    if (n < 2)
        throw error("gen_torus: n must be at least 2");
    mesh m;
    m.charts = atlas::torus();
    const double h = 1.0 / n;
    auto vid = [n](int i, int j) { return ((j % n + n) % n) * n + ((i % n + n) % n); };
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            m.add_vertex({i * h, j * h}, 0);
    // horizontal edges first, then vertical
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            int e = m.add_cell(1, "parametrized_segment", line({i * h, j * h}, {(i + 1) * h, j * h}), 0);
            m.set_boundary(1, e, {vid(i, j), vid(i + 1, j)});
        }
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            int e = m.add_cell(1, "parametrized_segment", line({i * h, j * h}, {i * h, (j + 1) * h}), 0);
            m.set_boundary(1, e, {vid(i, j), vid(i, j + 1)});
        }
    auto hor = [&](int i, int j) { return vid(i, j); };
    auto ver = [&](int i, int j) { return n * n + vid(i, j); };
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            json vs = json::array({pt({i * h, j * h}), pt({(i + 1) * h, j * h}), pt({(i + 1) * h, (j + 1) * h}),
                pt({i * h, (j + 1) * h})});
            int f = m.add_cell(2, "flat_polygon", json{{"vertices", vs}, {"box", true}}, 0);
            m.set_boundary(2, f, {hor(i, j), ver(i + 1, j), hor(i, j + 1), ver(i, j)});
        }
    m.finalize();
    return m;
}

mesh gen_sphere(double rs)
{
    int N1 = rs > 0 ? int(std::floor(2 * pi * (1 - rs) / rs)) : 0;
    if (rs > 0 && N1 < 3)
        throw error("gen_sphere: segment count < 3");
    if (!(rs > 0 && rs < 0.5))
        throw error("gen_sphere: r_s must lie in (0, 1/2)");
    mesh m;
    m.charts = atlas::sphere();
    const double da = 2 * pi / N1;
    std::vector<int> eq, arcs;
    for (int j = 0; j < N1; ++j)
        eq.push_back(m.add_vertex(polar(1, j * da), 0));
    for (int j = 0; j < N1; ++j) {
        // same parametrization as the top side of the layer cells
        json p{{"curve", "projected_line"}, {"a", pt(polar(1, j * da))}, {"b", pt(polar(1, (j + 1) * da))},
            {"radius", 1.0}};
        int e = m.add_cell(1, "parametrized_segment", p, 0);
        m.set_boundary(1, e, {eq[j], eq[(j + 1) % N1]});
        arcs.push_back(e);
    }
    build_hemisphere(m, 0, rs, eq, arcs);
    build_hemisphere(m, 1, rs, eq, arcs);
    m.finalize();
    return m;
}

std::vector<double> sphere_sequence(int levels)
{
    std::vector<double> r;
    double rs = 0.3;
    for (int i = 0; i < levels; ++i, rs *= 0.5)
        r.push_back(rs);
    return r;
}

sphere_census census(const mesh& m)
{
    sphere_census c;
    for (const auto& f : m.cells(2)) {
        if (f.kind == "cone_section") {
            ++c.boundary;
            continue;
        }
        switch (f.boundary.size()) {
        case 3: ++c.triangles; break;
        case 4: ++c.quads; break;
        case 5: ++c.pentagons; break;
        default: ++c.other;
        }
    }
    return c;
}

mesh cone_cell(const json& params)
{
    json p = params;
    if (!p.contains("variant"))
        p["variant"] = "polar";
    if (p["variant"] != "polar")
        throw error("cone_cell: only the polar variant forms a standalone cell");
    make_parametrization("cone_section", p); // hypothesis checks
    poly1 g1 = poly1_from_json(p.at("g1")), g3 = poly1_from_json(p.at("g3")), h = poly1_from_json(p.at("h"));
    auto radial = [&](double t) {
        return with_placement(json{{"curve", "polar"}, {"r", {g3(t), g1(t) - g3(t)}}, {"theta", {h(t)}}}, p);
    };
    std::vector<json> edges{
        with_placement(json{{"curve", "polar"}, {"r", p["g3"]}, {"theta", p["h"]}}, p),
        radial(1.0),
        with_placement(json{{"curve", "polar"}, {"r", p["g1"]}, {"theta", p["h"]}}, p),
        radial(0.0),
    };
    return single_cell("cone_section", p, edges);
}

mesh tri_two_curved(const json& params)
{
    std::vector<json> edges{
        with_placement(json{{"curve", "poly"}, {"h", params.at("h1")}, {"g", params.at("g1")}}, params),
        with_placement(json{{"curve", "poly"}, {"h", params.at("h2")}, {"g", params.at("g2")}}, params),
        with_placement(json{{"curve", "poly"}, {"h", {0.0}}, {"g", {0.0, 1.0}}}, params),
    };
    return single_cell("triangle_two_curved", params, edges);
}

mesh quad_four_curved(const json& params)
{
    std::vector<json> edges;
    for (int i = 1; i <= 4; ++i) {
        std::string s = std::to_string(i);
        edges.push_back(
            with_placement(json{{"curve", "poly"}, {"h", params.at("h" + s)}, {"g", params.at("g" + s)}}, params));
    }
    return single_cell("quad_four_curved", params, edges);
}

} // namespace ddr
