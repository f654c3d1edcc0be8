// Command-line driver: mesh generation, verification, Maxwell runs and
// convergence studies. Talks to the library only through the C interface.
#include "ddr/ddr_c.h"

#include "CLI11.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int exit_ok = 0, exit_check = 1, exit_usage = 2;

struct cli_error {
    int code;
    std::string msg;
};

// throws with the library message when a call fails
void ck(ddr_status s, const std::string& what)
{
    if (s == DDR_OK)
        return;
    int code = (s == DDR_ERR_ARGUMENT || s == DDR_ERR_INVALID || s == DDR_ERR_IO) ? exit_usage : exit_check;
    throw cli_error{code, what + ": " + ddr_last_error()};
}

struct mesh_del {
    void operator()(ddr_mesh* m) const { ddr_mesh_free(m); }
};
struct complex_del {
    void operator()(ddr_complex* c) const { ddr_complex_free(c); }
};
struct run_del {
    void operator()(ddr_run* r) const { ddr_run_free(r); }
};
using mesh_ptr = std::unique_ptr<ddr_mesh, mesh_del>;
using complex_ptr = std::unique_ptr<ddr_complex, complex_del>;
using run_ptr = std::unique_ptr<ddr_run, run_del>;

std::string num(double v)
{
    if (!std::isfinite(v))
        return "NaN";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string timestamp()
{
    std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

mesh_ptr load(const std::string& path)
{
    ddr_mesh* m = nullptr;
    ck(ddr_mesh_load(path.c_str(), &m), "loading " + path);
    return mesh_ptr(m);
}

mesh_ptr generate(const std::string& manifold, double rs, int n)
{
    ddr_mesh* m = nullptr;
    if (manifold == "sphere")
        ck(ddr_mesh_sphere(rs, &m), "sphere mesh");
    else if (manifold == "torus")
        ck(ddr_mesh_torus(n, &m), "torus mesh");
    else
        throw cli_error{exit_usage, "unknown manifold '" + manifold + "'"};
    return mesh_ptr(m);
}

complex_ptr build(const ddr_mesh* m, int r, int q)
{
    ddr_complex* c = nullptr;
    ck(ddr_complex_create(m, r, q, &c), "building the complex (r = " + std::to_string(r) + ")");
    return complex_ptr(c);
}

std::ostream& open_out(const std::string& path, std::ofstream& f)
{
    if (path.empty() || path == "-")
        return std::cout;
    f.open(path);
    if (!f)
        throw cli_error{exit_usage, "cannot write '" + path + "'"};
    return f;
}

// ---- meshgen ----

struct meshgen_opts {
    std::string manifold, out;
    double rs = 0.3;
    int n = 4;
};

int cmd_meshgen(const meshgen_opts& o)
{
    mesh_ptr m = generate(o.manifold, o.rs, o.n);
    ddr_mesh_info i;
    ck(ddr_mesh_get_info(m.get(), &i), "mesh info");
    if (!o.out.empty())
        ck(ddr_mesh_save(m.get(), o.out.c_str()), "saving");
    std::cout << "vertices " << i.vertices << " edges " << i.edges << " faces " << i.faces << " euler " << i.euler << "\n";
    if (i.manifold == DDR_MANIFOLD_SPHERE)
        std::cout << "boundary " << i.boundary_cells << " triangles " << i.triangles << " quads " << i.quads
                  << " pentagons " << i.pentagons << " other " << i.other_cells << "\n";
    std::cout << "h " << num(i.h_max) << " h_mean " << num(i.h_mean) << "\n";
    return exit_ok;
}

// ---- verify ----

struct verify_opts {
    std::string mesh;
    std::vector<int> degrees{0, 1};
    int quad = -1;
    double tol = 1e-10;
    double check_tol = 1e-10;
};

int cmd_verify(const verify_opts& o)
{
    mesh_ptr m = load(o.mesh);
    bool all = true;
    auto line = [&](bool ok, const std::string& what) {
        std::cout << (ok ? "PASS " : "FAIL ") << what << "\n";
        all = all && ok;
    };
    ddr_validation v;
    ck(ddr_mesh_validate(m.get(), o.tol, &v), "validation");
    line(v.ok, "validate_mesh affine=" + num(v.affine_residual) + " euler=" + std::to_string(v.euler)
            + (v.problem_count ? " (" + std::string(v.first_problem) + ")" : ""));
    if (!v.ok)
        return exit_check;
    ddr_mesh_info info;
    ck(ddr_mesh_get_info(m.get(), &info), "mesh info");

    for (int r : o.degrees) {
        complex_ptr c = build(m.get(), r, o.quad);
        std::string tag = "r=" + std::to_string(r) + " ";
        ddr_complex_checks k;
        ck(ddr_complex_check(c.get(), 1, &k), "complex checks");
        line(k.dd <= o.check_tol, tag + "d1*d0 = " + num(k.dd));
        line(k.projection <= o.check_tol, tag + "projection identity " + num(k.projection));
        line(k.link <= o.check_tol, tag + "potential/derivative link " + num(k.link));
        line(k.stokes <= o.check_tol, tag + "discrete Stokes " + num(k.stokes));
        ddr_commutation cm;
        ck(ddr_complex_commutation(c.get(), &cm), "commutation");
        for (int kk = 0; kk < 2; ++kk)
            line(cm.ok[kk], tag + "commutation k=" + std::to_string(kk) + " residual " + num(cm.residual[kk])
                    + " quadrature estimate " + num(std::abs(cm.residual[kk] - cm.residual_fine[kk])));
        ddr_betti b;
        ck(ddr_complex_betti(c.get(), &b), "cohomology");
        std::string bs = "(" + std::to_string(b.betti[0]) + "," + std::to_string(b.betti[1]) + "," + std::to_string(b.betti[2]) + ")";
        bool expect = true;
        if (info.manifold == DDR_MANIFOLD_SPHERE)
            expect = b.betti[0] == 1 && b.betti[1] == 0 && b.betti[2] == 1;
        else if (info.manifold == DDR_MANIFOLD_TORUS)
            expect = b.betti[0] == 1 && b.betti[1] == 2 && b.betti[2] == 1;
        line(expect && b.gap_ok, tag + "Betti " + bs + " gap " + num(b.gap));
    }
    return all ? exit_ok : exit_check;
}

// ---- Maxwell ----

struct run_opts {
    std::string case_name = "sphere_smooth";
    std::string scheme = "cn";
    std::string source = "load";
    double dt = 1e-3;
    double tmax = 2 * M_PI;
    int quad = -1;
    bool no_timestamp = false;
};

ddr_run_config make_config(const run_opts& o, int series_every)
{
    ddr_run_config cfg;
    ddr_run_config_default(&cfg);
    cfg.dt = o.dt;
    cfg.tmax = o.tmax;
    if (o.scheme == "cn" || o.scheme == "crank_nicolson")
        cfg.scheme = DDR_CRANK_NICOLSON;
    else if (o.scheme == "ie" || o.scheme == "implicit_euler")
        cfg.scheme = DDR_IMPLICIT_EULER;
    else
        throw cli_error{exit_usage, "unknown scheme '" + o.scheme + "'"};
    if (o.source == "load")
        cfg.source = DDR_SOURCE_LOAD;
    else if (o.source == "interpolate")
        cfg.source = DDR_SOURCE_INTERPOLATE;
    else
        throw cli_error{exit_usage, "unknown source mode '" + o.source + "'"};
    cfg.series_every = series_every;
    return cfg;
}

ddr_run_report run_one(const ddr_complex* c, const run_opts& o, int series_every, run_ptr* keep = nullptr)
{
    ddr_run_config cfg = make_config(o, series_every);
    ddr_run* r = nullptr;
    ck(ddr_run_case(c, o.case_name.c_str(), &cfg, &r), "maxwell run");
    run_ptr rp(r);
    ddr_run_report rep;
    ck(ddr_run_get_report(r, &rep), "report");
    if (keep)
        *keep = std::move(rp);
    return rep;
}

const char* csv_header = "case,r,h,ndof,err_E,err_dE,err_B,energy_drift,constraint_max,rate_E,rate_dE,rate_B";

struct maxwell_opts : run_opts {
    std::string mesh, manifold, out, series;
    double rs = 0.3;
    int n = 4;
    int degree = 0;
    int series_every = 100;
};

int cmd_maxwell(const maxwell_opts& o)
{
    mesh_ptr m;
    if (!o.mesh.empty())
        m = load(o.mesh);
    else {
        std::string manifold = o.manifold;
        if (manifold.empty())
            manifold = ddr_case_manifold(o.case_name.c_str()) == DDR_MANIFOLD_TORUS ? "torus" : "sphere";
        m = generate(manifold, o.rs, o.n);
    }
    complex_ptr c = build(m.get(), o.degree, o.quad);
    run_ptr run;
    ddr_run_report rep = run_one(c.get(), o, o.series.empty() ? 0 : o.series_every, &run);

    std::ofstream f;
    std::ostream& out = open_out(o.out, f);
    if (!o.no_timestamp)
        out << "# generated " << timestamp() << "\n";
    out << csv_header << "\n";
    out << o.case_name << "," << o.degree << "," << num(rep.h) << "," << rep.ndof << "," << num(rep.err_E) << ","
        << num(rep.err_dE) << "," << num(rep.err_B) << "," << num(rep.energy_drift) << "," << num(rep.constraint_max)
        << ",NaN,NaN,NaN\n";

    if (!o.series.empty()) {
        std::ofstream s(o.series);
        if (!s)
            throw cli_error{exit_usage, "cannot write '" + o.series + "'"};
        size_t n = 0;
        const double *t, *e, *k;
        ck(ddr_run_series(run.get(), &n, &t, &e, &k), "series");
        s << "# t energy constraint\n";
        for (size_t i = 0; i < n; ++i)
            s << num(t[i]) << " " << num(e[i]) << " " << num(k[i]) << "\n";
    }
    return exit_ok;
}

// ---- convergence ----

struct convergence_opts : run_opts {
    std::string manifold, out, dat;
    std::vector<int> degrees{0, 1};
    std::vector<double> rs;
    std::vector<int> ns;
    std::vector<std::string> meshes;
    int levels = 3;
};

int cmd_convergence(const convergence_opts& o)
{
    // the mesh list: files, explicit parameters, or the default sequence
    std::vector<mesh_ptr> meshes;
    int mc = ddr_case_manifold(o.case_name.c_str());
    if (mc == 0)
        throw cli_error{exit_usage, "unknown case '" + o.case_name + "'"};
    std::string manifold = o.manifold.empty() ? (mc == DDR_MANIFOLD_SPHERE ? "sphere" : "torus") : o.manifold;
    if (!o.meshes.empty()) {
        for (const auto& p : o.meshes)
            meshes.push_back(load(p));
    } else if (manifold == "sphere") {
        std::vector<double> rs = o.rs;
        if (rs.empty()) {
            rs.resize(o.levels);
            ck(ddr_sphere_sequence(o.levels, rs.data()), "sphere sequence");
        }
        for (double v : rs)
            meshes.push_back(generate("sphere", v, 0));
    } else {
        std::vector<int> ns = o.ns;
        if (ns.empty())
            for (int i = 0, n = 4; i < o.levels; ++i, n *= 2)
                ns.push_back(n);
        for (int n : ns)
            meshes.push_back(generate("torus", 0, n));
    }

    struct row {
        int r;
        ddr_run_report rep;
    };
    std::vector<row> rows;
    for (int r : o.degrees)
        for (auto& m : meshes) {
            complex_ptr c = build(m.get(), r, o.quad);
            rows.push_back({r, run_one(c.get(), o, 0)});
            std::cerr << "r=" << r << " h=" << num(rows.back().rep.h) << " err_E=" << num(rows.back().rep.err_E) << "\n";
        }

    std::ofstream f;
    std::ostream& out = open_out(o.out, f);
    if (!o.no_timestamp)
        out << "# generated " << timestamp() << "\n";
    out << csv_header << "\n";
    std::ostringstream summary;
    for (int r : o.degrees) {
        std::vector<double> h, e[3];
        std::vector<const row*> rr;
        for (const auto& w : rows)
            if (w.r == r) {
                rr.push_back(&w);
                h.push_back(w.rep.h);
                e[0].push_back(w.rep.err_E);
                e[1].push_back(w.rep.err_dE);
                e[2].push_back(w.rep.err_B);
            }
        for (std::size_t i = 0; i < rr.size(); ++i) {
            const auto& p = rr[i]->rep;
            out << o.case_name << "," << r << "," << num(p.h) << "," << p.ndof << "," << num(p.err_E) << ","
                << num(p.err_dE) << "," << num(p.err_B) << "," << num(p.energy_drift) << "," << num(p.constraint_max);
            for (int j = 0; j < 3; ++j) {
                double rate = i == 0 ? NAN : ddr_fit_rate(&h[i - 1], &e[j][i - 1], 2);
                out << "," << num(rate);
            }
            out << "\n";
        }
        summary << "# least-squares r=" << r;
        const char* names[3] = {"E", "dE", "B"};
        for (int j = 0; j < 3; ++j)
            summary << " rate_" << names[j] << "=" << num(ddr_fit_rate(h.data(), e[j].data(), h.size()));
        summary << "\n";

        if (!o.dat.empty()) {
            std::string path = o.dat + "_r" + std::to_string(r) + ".dat";
            std::ofstream d(path);
            if (!d)
                throw cli_error{exit_usage, "cannot write '" + path + "'"};
            d << "# h ndof err_E err_dE err_B\n";
            for (const auto* w : rr)
                d << num(w->rep.h) << " " << w->rep.ndof << " " << num(w->rep.err_E) << " " << num(w->rep.err_dE) << " "
                  << num(w->rep.err_B) << "\n";
        }
    }
    out << summary.str();
    return exit_ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Discrete de Rham complexes on 2D manifolds and a 2+1 Maxwell solver"};
    app.set_config("--config", "", "TOML-style key = value file; command-line flags win");
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "Worker threads (default: DDR_THREADS or all cores)")->check(CLI::NonNegativeNumber);
    app.set_version_flag("--version", std::string(ddr_version()));

    meshgen_opts mg;
    auto* smg = app.add_subcommand("meshgen", "Generate a sphere or torus mesh");
    smg->add_option("--manifold", mg.manifold, "sphere or torus")->required()->check(CLI::IsMember({"sphere", "torus"}));
    smg->add_option("--rs", mg.rs, "Sphere ring spacing r_s");
    smg->add_option("--n", mg.n, "Torus cells per direction");
    smg->add_option("-o,--output", mg.out, "Mesh file (JSON)");

    verify_opts vo;
    auto* sv = app.add_subcommand("verify", "Validate a mesh and check the discrete complex");
    sv->add_option("--mesh", vo.mesh, "Mesh file")->required();
    sv->add_option("-r,--degree", vo.degrees, "Polynomial degrees, comma separated")->delimiter(',')->check(CLI::Range(0, 4));
    sv->add_option("--quad-degree", vo.quad, "Quadrature degree (default 2r+6)");
    sv->add_option("--tol", vo.tol, "Mesh validation tolerance");
    sv->add_option("--check-tol", vo.check_tol, "Tolerance on the complex identities");

    maxwell_opts mo;
    auto* sm = app.add_subcommand("maxwell", "Single Maxwell run against an exact solution");
    sm->add_option("--mesh", mo.mesh, "Mesh file (otherwise generated)");
    sm->add_option("--manifold", mo.manifold, "Generated mesh: sphere or torus");
    sm->add_option("--rs", mo.rs, "Sphere ring spacing r_s");
    sm->add_option("--n", mo.n, "Torus cells per direction");
    sm->add_option("-r,--degree", mo.degree, "Polynomial degree")->check(CLI::Range(0, 4));
    sm->add_option("--case", mo.case_name, "Exact solution");
    sm->add_option("--dt", mo.dt, "Time step")->check(CLI::PositiveNumber);
    sm->add_option("--tmax", mo.tmax, "Final time")->check(CLI::PositiveNumber);
    sm->add_option("--scheme", mo.scheme, "cn or ie");
    sm->add_option("--source", mo.source, "load or interpolate");
    sm->add_option("--quad-degree", mo.quad, "Quadrature degree (default 2r+6)");
    sm->add_option("-o,--output", mo.out, "CSV report (default stdout)");
    sm->add_option("--series", mo.series, "Energy/constraint time series (.dat)");
    sm->add_option("--series-every", mo.series_every, "Series stride in steps")->check(CLI::PositiveNumber);
    sm->add_flag("--no-timestamp", mo.no_timestamp, "Omit the timestamp header line");

    convergence_opts co;
    auto* sc = app.add_subcommand("convergence", "Maxwell runs over a mesh sequence with fitted rates");
    sc->add_option("--case", co.case_name, "Exact solution");
    sc->add_option("--manifold", co.manifold, "sphere or torus (default: from the case)");
    sc->add_option("-r,--degree", co.degrees, "Polynomial degrees, comma separated")->delimiter(',')->check(CLI::Range(0, 4));
    sc->add_option("--mesh", co.meshes, "Mesh files, coarsest first")->delimiter(',');
    sc->add_option("--rs", co.rs, "Sphere r_s values")->delimiter(',');
    sc->add_option("--n", co.ns, "Torus sizes")->delimiter(',');
    sc->add_option("--levels", co.levels, "Default sequence length")->check(CLI::Range(1, 8));
    sc->add_option("--dt", co.dt, "Time step")->check(CLI::PositiveNumber);
    sc->add_option("--tmax", co.tmax, "Final time")->check(CLI::PositiveNumber);
    sc->add_option("--scheme", co.scheme, "cn or ie");
    sc->add_option("--source", co.source, "load or interpolate");
    sc->add_option("--quad-degree", co.quad, "Quadrature degree (default 2r+6)");
    sc->add_option("-o,--output", co.out, "CSV report (default stdout)");
    sc->add_option("--dat", co.dat, "Prefix for per-degree .dat series");
    sc->add_flag("--no-timestamp", co.no_timestamp, "Omit the timestamp header line");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? exit_ok : exit_usage;
    }
    ddr_set_threads(threads);

    try {
        if (*smg)
            return cmd_meshgen(mg);
        if (*sv)
            return cmd_verify(vo);
        if (*sm)
            return cmd_maxwell(mo);
        if (*sc)
            return cmd_convergence(co);
    } catch (const cli_error& e) {
        std::cerr << "error: " << e.msg << "\n";
        return e.code;
    }
    return exit_usage;
}
