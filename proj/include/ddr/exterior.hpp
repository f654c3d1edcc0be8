#pragma once

#include <gmpxx.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace ddr {

using rational = mpq_class;

class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// solver or factorization breakdown
class numeric_error : public error {
public:
    using error::error;
};

long binomial(int n, int k);

// Strictly increasing subsets of {0..d-1} with k elements, lexicographic.
const std::vector<std::vector<int>>& index_sets(int d, int k);
int index_set_position(int d, const std::vector<int>& set);

// Exponent vectors of total degree <= r (or == s), graded lexicographic:
// degree ascending, then x-heavy first, e.g. 1, x, y, x^2, xy, y^2.
std::vector<std::vector<int>> monomials(int d, int r);
std::vector<std::vector<int>> monomials_homogeneous(int d, int s);

// Sign of the permutation sorting the concatenation a|b, 0 if they overlap.
int shuffle_sign(const std::vector<int>& a, const std::vector<int>& b);

struct term_key {
    std::vector<int> exp;
    std::vector<int> idx;

    int total_degree() const
    {
        int s = 0;
        for (int e : exp)
            s += e;
        return s;
    }

    bool operator<(const term_key& o) const
    {
        int a = total_degree(), b = o.total_degree();
        if (a != b)
            return a < b;
        if (exp != o.exp)
            return exp > o.exp;
        return idx < o.idx;
    }
    bool operator==(const term_key& o) const { return exp == o.exp && idx == o.idx; }
};

template <class S>
struct affine_map {
    int target_dim = 0, source_dim = 0;
    std::vector<S> A; // row-major target x source
    std::vector<S> b;

    affine_map() = default;
    affine_map(int t, int s) : target_dim(t), source_dim(s), A(std::size_t(t) * s, S(0)), b(t, S(0)) { }

    S& a(int i, int j) { return A[std::size_t(i) * source_dim + j]; }
    const S& a(int i, int j) const { return A[std::size_t(i) * source_dim + j]; }

    static affine_map identity(int d)
    {
        affine_map T(d, d);
        for (int i = 0; i < d; ++i)
            T.a(i, i) = S(1);
        return T;
    }
};

template <class S>
bool is_zero_value(const S& v)
{
    return v == S(0);
}

template <class S>
class poly_form {
public:
    using map_type = std::map<term_key, S>;

    poly_form() = default;
    poly_form(int dim, int form_degree) : dim_(dim), deg_(form_degree) { }

    static poly_form constant(int dim, const S& c)
    {
        poly_form p(dim, 0);
        p.add(std::vector<int>(dim, 0), {}, c);
        return p;
    }

    static poly_form monomial(const std::vector<int>& exp, const std::vector<int>& idx, const S& c = S(1))
    {
        poly_form p(int(exp.size()), int(idx.size()));
        p.add(exp, idx, c);
        return p;
    }

    int dim() const { return dim_; }
    int form_degree() const { return deg_; }
    bool empty_degree() const { return deg_ < 0 || deg_ > dim_; }
    const map_type& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    int poly_degree() const
    {
        int s = -1;
        for (auto& [k, c] : terms_)
            s = std::max(s, k.total_degree());
        return s;
    }

    void add(const std::vector<int>& exp, const std::vector<int>& idx, const S& c)
    {
        if (int(exp.size()) != dim_ || int(idx.size()) != deg_)
            throw error("poly_form: term shape mismatch");
        for (std::size_t i = 1; i < idx.size(); ++i)
            if (idx[i] <= idx[i - 1])
                throw error("poly_form: index set not increasing");
        if (is_zero_value(c))
            return;
        term_key k{exp, idx};
        auto it = terms_.find(k);
        if (it == terms_.end()) {
            terms_.emplace(std::move(k), c);
            return;
        }
        it->second += c;
        if (is_zero_value(it->second))
            terms_.erase(it);
    }

    S coefficient(const std::vector<int>& exp, const std::vector<int>& idx) const
    {
        auto it = terms_.find(term_key{exp, idx});
        return it == terms_.end() ? S(0) : it->second;
    }

    poly_form& operator+=(const poly_form& o)
    {
        check_same(o);
        for (auto& [k, c] : o.terms_)
            add(k.exp, k.idx, c);
        return *this;
    }
    poly_form& operator-=(const poly_form& o)
    {
        check_same(o);
        for (auto& [k, c] : o.terms_)
            add(k.exp, k.idx, S(-c));
        return *this;
    }
    poly_form& operator*=(const S& s)
    {
        if (is_zero_value(s)) {
            terms_.clear();
            return *this;
        }
        for (auto& [k, c] : terms_)
            c *= s;
        return *this;
    }

    friend poly_form operator+(poly_form a, const poly_form& b) { return a += b; }
    friend poly_form operator-(poly_form a, const poly_form& b) { return a -= b; }
    friend poly_form operator*(const S& s, poly_form a) { return a *= s; }
    bool operator==(const poly_form& o) const { return dim_ == o.dim_ && deg_ == o.deg_ && terms_ == o.terms_; }

    template <class T>
    poly_form<T> cast() const
    {
        poly_form<T> r(dim_, deg_);
        for (auto& [k, c] : terms_)
            r.add(k.exp, k.idx, convert<T>(c));
        return r;
    }

private:
    template <class T>
    static T convert(const S& c)
    {
        if constexpr (std::is_same_v<S, rational> && std::is_same_v<T, double>)
            return c.get_d();
        else
            return T(c);
    }

    void check_same(const poly_form& o) const
    {
        if (o.dim_ != dim_ || o.deg_ != deg_)
            throw error("poly_form: dimension or degree mismatch");
    }

    int dim_ = 0, deg_ = 0;
    map_type terms_;
};

using rform = poly_form<rational>;

template <class S>
poly_form<S> wedge(const poly_form<S>& a, const poly_form<S>& b)
{
    if (a.dim() != b.dim())
        throw error("wedge: dimension mismatch");
    int d = a.dim();
    poly_form<S> r(d, a.form_degree() + b.form_degree());
    if (r.empty_degree())
        return r;
    std::vector<int> exp(d), idx;
    for (auto& [ka, ca] : a.terms())
        for (auto& [kb, cb] : b.terms()) {
            int s = shuffle_sign(ka.idx, kb.idx);
            if (s == 0)
                continue;
            for (int i = 0; i < d; ++i)
                exp[i] = ka.exp[i] + kb.exp[i];
            idx = ka.idx;
            idx.insert(idx.end(), kb.idx.begin(), kb.idx.end());
            std::sort(idx.begin(), idx.end());
            S c = ca * cb;
            if (s < 0)
                c = -c;
            r.add(exp, idx, c);
        }
    return r;
}

template <class S>
poly_form<S> ext_d(const poly_form<S>& a)
{
    int d = a.dim();
    poly_form<S> r(d, a.form_degree() + 1);
    if (r.empty_degree())
        return r;
    for (auto& [k, c] : a.terms())
        for (int j = 0; j < d; ++j) {
            if (k.exp[j] == 0)
                continue;
            if (std::find(k.idx.begin(), k.idx.end(), j) != k.idx.end())
                continue;
            int before = 0;
            for (int i : k.idx)
                before += (i < j);
            std::vector<int> exp = k.exp;
            exp[j] -= 1;
            std::vector<int> idx = k.idx;
            idx.insert(idx.begin() + before, j);
            S v = c * S(k.exp[j]);
            if (before % 2)
                v = -v;
            r.add(exp, idx, v);
        }
    return r;
}

template <class S>
poly_form<S> koszul(const poly_form<S>& a)
{
    int d = a.dim();
    poly_form<S> r(d, a.form_degree() - 1);
    if (a.form_degree() == 0)
        return r;
    for (auto& [k, c] : a.terms())
        for (std::size_t m = 0; m < k.idx.size(); ++m) {
            std::vector<int> exp = k.exp;
            exp[k.idx[m]] += 1;
            std::vector<int> idx = k.idx;
            idx.erase(idx.begin() + m);
            r.add(exp, idx, m % 2 ? S(-c) : c);
        }
    return r;
}

namespace detail {

template <class S>
using poly_map = std::map<std::vector<int>, S>;

template <class S>
poly_map<S> poly_mul(const poly_map<S>& a, const poly_map<S>& b)
{
    poly_map<S> r;
    for (auto& [ea, ca] : a)
        for (auto& [eb, cb] : b) {
            std::vector<int> e(ea.size());
            for (std::size_t i = 0; i < e.size(); ++i)
                e[i] = ea[i] + eb[i];
            auto& v = r[e];
            v += ca * cb;
        }
    for (auto it = r.begin(); it != r.end();)
        it = is_zero_value(it->second) ? r.erase(it) : std::next(it);
    return r;
}

template <class S>
S minor_det(std::vector<std::vector<S>> m)
{
    int n = int(m.size());
    S det(1);
    for (int c = 0; c < n; ++c) {
        int p = -1;
        for (int i = c; i < n; ++i)
            if (!is_zero_value(m[i][c])) {
                p = i;
                break;
            }
        if (p < 0)
            return S(0);
        if (p != c) {
            std::swap(m[p], m[c]);
            det = -det;
        }
        det *= m[c][c];
        for (int i = c + 1; i < n; ++i) {
            if (is_zero_value(m[i][c]))
                continue;
            S f = m[i][c] / m[c][c];
            for (int j = c; j < n; ++j)
                m[i][j] -= f * m[c][j];
        }
    }
    return det;
}

} // namespace detail

// (T^* a) for x = A y + b.
template <class S>
poly_form<S> pullback_affine(const affine_map<S>& T, const poly_form<S>& a)
{
    if (T.target_dim != a.dim())
        throw error("pullback_affine: shape mismatch");
    int dt = T.target_dim, ds = T.source_dim, l = a.form_degree();
    poly_form<S> r(ds, l);
    if (l > ds)
        return r;

    // coordinate functions x_i(y) as polynomials in y
    std::vector<detail::poly_map<S>> coord(dt);
    for (int i = 0; i < dt; ++i) {
        std::vector<int> e(ds, 0);
        if (!is_zero_value(T.b[i]))
            coord[i][e] = T.b[i];
        for (int j = 0; j < ds; ++j)
            if (!is_zero_value(T.a(i, j))) {
                e.assign(ds, 0);
                e[j] = 1;
                coord[i][e] = T.a(i, j);
            }
    }
    // powers[i][p] = x_i(y)^p
    int maxp = std::max(0, a.poly_degree());
    std::vector<std::vector<detail::poly_map<S>>> powers(dt, std::vector<detail::poly_map<S>>(maxp + 1));
    for (int i = 0; i < dt; ++i) {
        powers[i][0][std::vector<int>(ds, 0)] = S(1);
        for (int p = 1; p <= maxp; ++p)
            powers[i][p] = detail::poly_mul(powers[i][p - 1], coord[i]);
    }

    const auto& targets = index_sets(ds, l);
    for (auto& [k, c] : a.terms()) {
        detail::poly_map<S> poly;
        poly[std::vector<int>(ds, 0)] = c;
        for (int i = 0; i < dt; ++i)
            if (k.exp[i] > 0)
                poly = detail::poly_mul(poly, powers[i][k.exp[i]]);
        if (poly.empty())
            continue;
        for (const auto& K : targets) {
            std::vector<std::vector<S>> m(l, std::vector<S>(l));
            for (int p = 0; p < l; ++p)
                for (int q = 0; q < l; ++q)
                    m[p][q] = T.a(k.idx[p], K[q]);
            S det = detail::minor_det(m);
            if (is_zero_value(det))
                continue;
            for (auto& [e, v] : poly)
                r.add(e, K, v * det);
        }
    }
    return r;
}

// ---- pointwise metric-dependent algebra ----

struct alt_value {
    int dim = 0, degree = 0;
    Eigen::VectorXd c;

    alt_value() = default;
    alt_value(int d, int k) : dim(d), degree(k), c(Eigen::VectorXd::Zero(k < 0 || k > d ? 0 : binomial(d, k))) { }
};

struct metric_at_point {
    Eigen::MatrixXd g, inv;
    double det = 0;

    explicit metric_at_point(const Eigen::MatrixXd& m);
};

// Matrix of the induced inner product on k-covectors: H(I,J) = det(g^{-1}[I,J]).
Eigen::MatrixXd form_inner_matrix(const metric_at_point& g, int k);

// Matrix of the Hodge star from k-covectors to (d-k)-covectors.
Eigen::MatrixXd hodge_matrix(const metric_at_point& g, int k);

alt_value hodge_star_at(const metric_at_point& g, const alt_value& v);
alt_value interior_product_at(const Eigen::VectorXd& X, const alt_value& v);
alt_value wedge_at(const alt_value& a, const alt_value& b);
double inner_at(const metric_at_point& g, const alt_value& a, const alt_value& b);

// Pullback of a k-covector on R^n through the linear map A (n x m).
Eigen::MatrixXd pullback_matrix(const Eigen::MatrixXd& A, int k);

} // namespace ddr
