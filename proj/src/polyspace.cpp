#include "ddr/polyspace.hpp"

#include <mutex>
#include <tuple>

namespace ddr {

namespace {

struct echelon {
    // rows in reduced form keyed by pivot term
    std::vector<std::pair<term_key, std::map<term_key, rational>>> rows;

    // Reduces v in place; returns true if v became zero.
    bool reduce(std::map<term_key, rational>& v) const
    {
        for (const auto& [piv, row] : rows) {
            auto it = v.find(piv);
            if (it == v.end())
                continue;
            rational f = it->second;
            for (const auto& [k, c] : row) {
                auto& x = v[k];
                x -= f * c;
                if (x == 0)
                    v.erase(k);
            }
        }
        return v.empty();
    }

    bool insert(const rform& f)
    {
        std::map<term_key, rational> v(f.terms().begin(), f.terms().end());
        if (reduce(v))
            return false;
        auto piv = v.begin()->first;
        rational s = v.begin()->second;
        for (auto& [k, c] : v)
            c /= s;
        for (auto& [p, row] : rows) {
            auto it = row.find(piv);
            if (it == row.end())
                continue;
            rational f2 = it->second;
            for (const auto& [k, c] : v) {
                auto& x = row[k];
                x -= f2 * c;
                if (x == 0)
                    row.erase(k);
            }
        }
        rows.emplace_back(piv, std::move(v));
        return true;
    }
};

using cache_key = std::tuple<int, int, int, int>;

std::mutex& cache_mutex()
{
    static std::mutex m;
    return m;
}

std::map<cache_key, span_basis>& cache()
{
    static std::map<cache_key, span_basis> c;
    return c;
}

span_basis make_full(int d, int r, int l)
{
    span_basis b{{d, r, l, space_kind::full}, {}};
    if (l < 0 || l > d)
        return b;
    for (const auto& m : monomials(d, r))
        for (const auto& I : index_sets(d, l))
            b.forms.push_back(rform::monomial(m, I));
    return b;
}

span_basis make_homogeneous(int d, int s, int l)
{
    span_basis b{{d, s, l, space_kind::homogeneous}, {}};
    if (l < 0 || l > d)
        return b;
    for (const auto& m : monomials_homogeneous(d, s))
        for (const auto& I : index_sets(d, l))
            b.forms.push_back(rform::monomial(m, I));
    return b;
}

std::vector<rform> pruned(const std::vector<rform>& gens)
{
    std::vector<rform> out;
    for (auto i : independent_subset(gens))
        out.push_back(gens[i]);
    return out;
}

span_basis make_koszul(int d, int r, int l)
{
    span_basis b{{d, r, l, space_kind::koszul}, {}};
    if (l < 1 || l > d || r < 0)
        return b;
    std::vector<rform> gens;
    for (const auto& f : basis_full(d, r, l).forms)
        gens.push_back(koszul(f));
    b.forms = pruned(gens);
    return b;
}

span_basis make_trimmed(int d, int r, int l)
{
    span_basis b{{d, r, l, space_kind::trimmed}, {}};
    if (l < 0 || l > d || r < 0)
        return b;
    if (l == 0) {
        b.forms = basis_full(d, r, 0).forms;
        return b;
    }
    std::vector<rform> gens;
    for (const auto& f : basis_full(d, r, l - 1).forms)
        gens.push_back(ext_d(f));
    if (r >= 1 && l + 1 <= d)
        for (const auto& f : basis_full(d, r - 1, l + 1).forms)
            gens.push_back(koszul(f));
    b.forms = pruned(gens);
    return b;
}

const span_basis& cached(space_kind kind, int d, int r, int l)
{
    std::lock_guard<std::mutex> lock(cache_mutex());
    cache_key key{int(kind), d, r, l};
    auto it = cache().find(key);
    if (it != cache().end())
        return it->second;
    span_basis b;
    switch (kind) {
    case space_kind::full: b = make_full(d, r, l); break;
    case space_kind::homogeneous: b = make_homogeneous(d, r, l); break;
    default: break;
    }
    return cache().emplace(key, std::move(b)).first->second;
}

// trimmed and koszul builders call basis_full, so they are built outside the lock
const span_basis& cached_derived(space_kind kind, int d, int r, int l)
{
    cache_key key{int(kind), d, r, l};
    {
        std::lock_guard<std::mutex> lock(cache_mutex());
        auto it = cache().find(key);
        if (it != cache().end())
            return it->second;
    }
    span_basis b = kind == space_kind::trimmed ? make_trimmed(d, r, l) : make_koszul(d, r, l);
    std::lock_guard<std::mutex> lock(cache_mutex());
    return cache().emplace(key, std::move(b)).first->second;
}

} // namespace

const span_basis& basis_full(int d, int r, int l) { return cached(space_kind::full, d, r, l); }
const span_basis& basis_homogeneous(int d, int s, int l) { return cached(space_kind::homogeneous, d, s, l); }
const span_basis& basis_trimmed(int d, int r, int l) { return cached_derived(space_kind::trimmed, d, r, l); }
const span_basis& basis_koszul(int d, int r, int l) { return cached_derived(space_kind::koszul, d, r, l); }

long full_dimension(int d, int r, int l)
{
    if (r < 0 || l < 0 || l > d)
        return 0;
    return binomial(r + d, d) * binomial(d, l);
}

long trimmed_dimension(int d, int r, int l)
{
    if (r < 0 || l < 0 || l > d)
        return 0;
    if (l == 0)
        return binomial(r + d, d);
    return binomial(r + d, r + l) * binomial(r + l - 1, l);
}

rform trace_form(const affine_map<rational>& T, const rform& a) { return pullback_affine(T, a); }

std::vector<std::pair<int, rform>> homogeneous_decompose(const rform& a)
{
    std::map<int, rform> parts;
    for (const auto& [k, c] : a.terms()) {
        int s = k.total_degree();
        auto it = parts.find(s);
        if (it == parts.end())
            it = parts.emplace(s, rform(a.dim(), a.form_degree())).first;
        it->second.add(k.exp, k.idx, c);
    }
    return {parts.begin(), parts.end()};
}

std::vector<std::size_t> independent_subset(const std::vector<rform>& forms)
{
    echelon e;
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < forms.size(); ++i)
        if (e.insert(forms[i]))
            keep.push_back(i);
    return keep;
}

std::size_t exact_rank(const std::vector<rform>& forms) { return independent_subset(forms).size(); }

bool in_span(const std::vector<rform>& basis, const rform& f)
{
    echelon e;
    for (const auto& b : basis)
        e.insert(b);
    std::map<term_key, rational> v(f.terms().begin(), f.terms().end());
    return e.reduce(v);
}

int master_size(int d, int l, int R)
{
    if (l < 0 || l > d || R < 0)
        return 0;
    return int(binomial(R + d, d) * binomial(d, l));
}

Eigen::MatrixXd master_coefficients(const std::vector<rform>& forms, int d, int l, int R)
{
    auto mons = monomials(d, R);
    std::map<std::vector<int>, int> pos;
    for (std::size_t i = 0; i < mons.size(); ++i)
        pos[mons[i]] = int(i);
    int nc = int(binomial(d, l));
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(master_size(d, l, R), forms.size());
    for (std::size_t j = 0; j < forms.size(); ++j) {
        if (forms[j].dim() != d || forms[j].form_degree() != l)
            throw error("master_coefficients: form shape mismatch");
        for (const auto& [k, c] : forms[j].terms()) {
            auto it = pos.find(k.exp);
            if (it == pos.end())
                throw error("master_coefficients: degree exceeds master degree");
            M(it->second * nc + index_set_position(d, k.idx), j) = c.get_d();
        }
    }
    return M;
}

} // namespace ddr
