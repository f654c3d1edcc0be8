#include "ddr/ddr_c.h"

#include "ddr/maxwell.hpp"
#include "ddr/meshgen.hpp"
#include "ddr/parallel.hpp"
#include "ddr/verify.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <new>

#ifndef DDR_VERSION_STRING
#define DDR_VERSION_STRING "0.0.0"
#endif

struct ddr_mesh {
    ddr::mesh m;
};

struct ddr_complex {
    std::unique_ptr<ddr::de_rham_complex> c;
};

struct ddr_run {
    ddr::run_report rep;
};

namespace {

thread_local std::string last_error;

ddr_status fail(ddr_status s, const std::string& msg)
{
    last_error = msg;
    return s;
}

// Runs f, translating exceptions into status codes.
template <class F>
ddr_status guard(F&& f)
{
    try {
        f();
        last_error.clear();
        return DDR_OK;
    } catch (const ddr::numeric_error& e) {
        return fail(DDR_ERR_NUMERIC, e.what());
    } catch (const ddr::error& e) {
        return fail(DDR_ERR_INVALID, e.what());
    } catch (const std::bad_alloc&) {
        return fail(DDR_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(DDR_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(DDR_ERR_INTERNAL, "unknown exception");
    }
}

#define DDR_REQUIRE(cond, msg)                      \
    do {                                            \
        if (!(cond))                                \
            return fail(DDR_ERR_ARGUMENT, (msg));   \
    } while (0)

int manifold_code(const std::string& s)
{
    if (s == "sphere")
        return DDR_MANIFOLD_SPHERE;
    if (s == "torus")
        return DDR_MANIFOLD_TORUS;
    return DDR_MANIFOLD_CUSTOM;
}

bool known_case(const char* name)
{
    if (!name)
        return false;
    for (const auto& n : ddr::exact_case_names())
        if (n == name)
            return true;
    return false;
}

} // namespace

extern "C" {

const char* ddr_version(void) { return DDR_VERSION_STRING; }

const char* ddr_last_error(void) { return last_error.c_str(); }

const char* ddr_status_string(ddr_status s)
{
    switch (s) {
    case DDR_OK: return "ok";
    case DDR_ERR_ARGUMENT: return "invalid argument";
    case DDR_ERR_IO: return "i/o error";
    case DDR_ERR_INVALID: return "invalid data";
    case DDR_ERR_NUMERIC: return "numerical failure";
    case DDR_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

void ddr_set_threads(int n) { ddr::set_thread_count(n); }

// ---- meshes ----

ddr_status ddr_mesh_torus(int n, ddr_mesh** out)
{
    DDR_REQUIRE(out, "ddr_mesh_torus: null output");
    DDR_REQUIRE(n >= 1, "ddr_mesh_torus: n must be >= 1");
    return guard([&] { *out = new ddr_mesh{ddr::gen_torus(n)}; });
}

ddr_status ddr_mesh_sphere(double rs, ddr_mesh** out)
{
    DDR_REQUIRE(out, "ddr_mesh_sphere: null output");
    ddr_status s = guard([&] { *out = new ddr_mesh{ddr::gen_sphere(rs)}; });
    // parameter errors of the generator are argument errors here
    return s == DDR_ERR_INVALID ? DDR_ERR_ARGUMENT : s;
}

ddr_status ddr_mesh_load(const char* path, ddr_mesh** out)
{
    DDR_REQUIRE(path && out, "ddr_mesh_load: null argument");
    if (!std::ifstream(path))
        return fail(DDR_ERR_IO, std::string("cannot read '") + path + "'");
    return guard([&] { *out = new ddr_mesh{ddr::load_mesh(path)}; });
}

ddr_status ddr_mesh_save(const ddr_mesh* m, const char* path)
{
    DDR_REQUIRE(m && path, "ddr_mesh_save: null argument");
    if (!std::ofstream(path))
        return fail(DDR_ERR_IO, std::string("cannot write '") + path + "'");
    return guard([&] { ddr::save_mesh(m->m, path); });
}

void ddr_mesh_free(ddr_mesh* m) { delete m; }

ddr_status ddr_mesh_get_info(const ddr_mesh* m, ddr_mesh_info* out)
{
    DDR_REQUIRE(m && out, "ddr_mesh_get_info: null argument");
    return guard([&] {
        ddr_mesh_info i{};
        i.manifold = manifold_code(m->m.charts.manifold);
        i.vertices = long(m->m.count(0));
        i.edges = long(m->m.count(1));
        i.faces = long(m->m.count(2));
        i.euler = m->m.euler_characteristic();
        auto c = ddr::census(m->m);
        i.boundary_cells = c.boundary;
        i.triangles = c.triangles;
        i.quads = c.quads;
        i.pentagons = c.pentagons;
        i.other_cells = c.other;
        i.h_max = m->m.meshsize();
        i.h_mean = m->m.mean_meshsize();
        *out = i;
    });
}

ddr_status ddr_mesh_validate(const ddr_mesh* m, double tol, ddr_validation* out)
{
    DDR_REQUIRE(m && out, "ddr_mesh_validate: null argument");
    DDR_REQUIRE(tol > 0, "ddr_mesh_validate: tolerance must be positive");
    return guard([&] {
        auto r = ddr::validate_mesh(m->m, tol);
        ddr_validation v{};
        v.ok = r.ok ? 1 : 0;
        v.affine_residual = r.affine_residual;
        v.map_mismatch = r.map_mismatch;
        v.composition_residual = r.composition_residual;
        v.min_det = r.min_det;
        v.max_size_ratio = r.max_size_ratio;
        v.euler = r.euler;
        v.problem_count = int(r.problems.size());
        if (!r.problems.empty())
            std::strncpy(v.first_problem, r.problems.front().c_str(), sizeof(v.first_problem) - 1);
        *out = v;
    });
}

ddr_status ddr_sphere_sequence(int levels, double* out)
{
    DDR_REQUIRE(out, "ddr_sphere_sequence: null output");
    DDR_REQUIRE(levels >= 1, "ddr_sphere_sequence: levels must be >= 1");
    return guard([&] {
        auto s = ddr::sphere_sequence(levels);
        std::copy(s.begin(), s.end(), out);
    });
}

// ---- complex ----

ddr_status ddr_complex_create(const ddr_mesh* m, int r, int quad_degree, ddr_complex** out)
{
    DDR_REQUIRE(m && out, "ddr_complex_create: null argument");
    DDR_REQUIRE(r >= 0 && r <= 4, "ddr_complex_create: degree must be in 0..4");
    return guard([&] {
        auto c = std::make_unique<ddr::de_rham_complex>(m->m, r, quad_degree);
        *out = new ddr_complex{std::move(c)};
    });
}

void ddr_complex_free(ddr_complex* c) { delete c; }

ddr_status ddr_complex_ndofs(const ddr_complex* c, int k, int* out)
{
    DDR_REQUIRE(c && out, "ddr_complex_ndofs: null argument");
    DDR_REQUIRE(k >= 0 && k <= 2, "ddr_complex_ndofs: k must be in 0..2");
    *out = c->c->ndofs(k);
    return DDR_OK;
}

ddr_status ddr_complex_check(const ddr_complex* c, unsigned seed, ddr_complex_checks* out)
{
    DDR_REQUIRE(c && out, "ddr_complex_check: null argument");
    return guard([&] {
        auto r = ddr::check_complex(*c->c, seed);
        *out = {r.dd, r.projection, r.link, r.stokes};
    });
}

ddr_status ddr_complex_commutation(const ddr_complex* c, ddr_commutation* out)
{
    DDR_REQUIRE(c && out, "ddr_complex_commutation: null argument");
    return guard([&] {
        auto v = ddr::check_commutation(c->c->get_mesh(), c->c->degree());
        ddr_commutation r{};
        for (const auto& cc : v) {
            r.residual[cc.k] = cc.residual;
            r.residual_fine[cc.k] = cc.residual_fine;
            r.ok[cc.k] = cc.ok() ? 1 : 0;
        }
        *out = r;
    });
}

ddr_status ddr_complex_betti(const ddr_complex* c, ddr_betti* out)
{
    DDR_REQUIRE(c && out, "ddr_complex_betti: null argument");
    return guard([&] {
        auto b = ddr::cohomology_betti(*c->c);
        ddr_betti r{};
        for (int i = 0; i < 3; ++i)
            r.betti[i] = b.betti[i];
        r.rank[0] = b.rank[0];
        r.rank[1] = b.rank[1];
        r.gap = b.gap;
        r.gap_ok = b.gap_ok ? 1 : 0;
        *out = r;
    });
}

ddr_status ddr_complex_potential_error(const ddr_complex* c, const char* case_name, double t, double* out)
{
    DDR_REQUIRE(c && out, "ddr_complex_potential_error: null argument");
    DDR_REQUIRE(known_case(case_name), "ddr_complex_potential_error: unknown case");
    return guard([&] {
        auto ex = ddr::make_exact_case(case_name);
        if (ex->manifold() != c->c->get_mesh().charts.manifold)
            throw ddr::error("case '" + ex->name() + "' needs a " + ex->manifold() + " mesh");
        ddr::form_field w = [&](int ch, const Eigen::Vector2d& x) { return ex->eval(ddr::field::E, ch, x, t); };
        *out = c->c->potential_error(1, c->c->interpolate(1, w), w);
    });
}

ddr_status ddr_complex_export(const ddr_complex* c, const char* dir)
{
    DDR_REQUIRE(c && dir, "ddr_complex_export: null argument");
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir))
        return fail(DDR_ERR_IO, std::string("not a directory: '") + dir + "'");
    return guard([&] {
        fs::path d(dir);
        ddr::export_market(c->c->derivative(0), (d / "D0.mtx").string());
        ddr::export_market(c->c->derivative(1), (d / "D1.mtx").string());
        for (int k = 0; k <= 2; ++k)
            ddr::export_market(c->c->mass(k), (d / ("M" + std::to_string(k) + ".mtx")).string());
    });
}

// ---- exact solutions ----

int ddr_case_count(void) { return int(ddr::exact_case_names().size()); }

const char* ddr_case_name(int i)
{
    static const std::vector<std::string> names = ddr::exact_case_names();
    if (i < 0 || i >= int(names.size()))
        return nullptr;
    return names[i].c_str();
}

int ddr_case_manifold(const char* name)
{
    if (!known_case(name))
        return 0;
    return manifold_code(ddr::make_exact_case(name)->manifold());
}

ddr_status ddr_case_residuals(const char* name, int chart, double x, double y, double t, double out[3])
{
    DDR_REQUIRE(out, "ddr_case_residuals: null output");
    DDR_REQUIRE(known_case(name), "ddr_case_residuals: unknown case");
    return guard([&] {
        auto ex = ddr::make_exact_case(name);
        auto r = ddr::check_equations(*ex, chart, Eigen::Vector2d(x, y), t);
        out[0] = r.faraday;
        out[1] = r.ampere;
        out[2] = r.gauss;
    });
}

// ---- Maxwell ----

void ddr_run_config_default(ddr_run_config* cfg)
{
    if (!cfg)
        return;
    ddr::run_config d;
    cfg->dt = d.dt;
    cfg->tmax = d.tmax;
    cfg->scheme = DDR_CRANK_NICOLSON;
    cfg->series_every = d.series_every;
    cfg->source = DDR_SOURCE_LOAD;
}

ddr_status ddr_run_case(const ddr_complex* c, const char* case_name, const ddr_run_config* cfg, ddr_run** out)
{
    DDR_REQUIRE(c && cfg && out, "ddr_run_case: null argument");
    DDR_REQUIRE(known_case(case_name), "ddr_run_case: unknown case");
    DDR_REQUIRE(cfg->dt > 0 && cfg->tmax > 0, "ddr_run_case: dt and tmax must be positive");
    DDR_REQUIRE(cfg->scheme == DDR_CRANK_NICOLSON || cfg->scheme == DDR_IMPLICIT_EULER, "ddr_run_case: unknown scheme");
    DDR_REQUIRE(cfg->series_every >= 0, "ddr_run_case: series_every must be >= 0");
    DDR_REQUIRE(cfg->source == DDR_SOURCE_LOAD || cfg->source == DDR_SOURCE_INTERPOLATE, "ddr_run_case: unknown source mode");
    return guard([&] {
        ddr::run_config rc;
        rc.dt = cfg->dt;
        rc.tmax = cfg->tmax;
        rc.scheme = cfg->scheme == DDR_CRANK_NICOLSON ? ddr::time_scheme::crank_nicolson : ddr::time_scheme::implicit_euler;
        rc.series_every = cfg->series_every;
        rc.source = cfg->source == DDR_SOURCE_LOAD ? ddr::source_mode::load : ddr::source_mode::interpolate;
        auto ex = ddr::make_exact_case(case_name);
        auto run = std::make_unique<ddr_run>();
        run->rep = ddr::run_case(*c->c, *ex, rc);
        *out = run.release();
    });
}

void ddr_run_free(ddr_run* r) { delete r; }

ddr_status ddr_run_get_report(const ddr_run* r, ddr_run_report* out)
{
    DDR_REQUIRE(r && out, "ddr_run_get_report: null argument");
    const auto& p = r->rep;
    *out = {p.h, p.ndof, p.steps, p.dt, p.err_E, p.err_dE, p.err_B, p.energy0, p.energy_min, p.energy_max,
        p.energy_drift, p.constraint_max};
    return DDR_OK;
}

ddr_status ddr_run_series(const ddr_run* r, size_t* n, const double** t, const double** energy, const double** constraint)
{
    DDR_REQUIRE(r && n, "ddr_run_series: null argument");
    *n = r->rep.series_t.size();
    if (t)
        *t = r->rep.series_t.data();
    if (energy)
        *energy = r->rep.series_energy.data();
    if (constraint)
        *constraint = r->rep.series_constraint.data();
    return DDR_OK;
}

double ddr_fit_rate(const double* h, const double* e, size_t n)
{
    if (!h || !e)
        return std::numeric_limits<double>::quiet_NaN();
    return ddr::fit_rate(std::vector<double>(h, h + n), std::vector<double>(e, e + n));
}

} // extern "C"
