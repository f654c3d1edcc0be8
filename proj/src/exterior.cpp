#include "ddr/exterior.hpp"

#include <mutex>

namespace ddr {

long binomial(int n, int k)
{
    if (k < 0 || n < 0 || k > n)
        return 0;
    long r = 1;
    for (int i = 1; i <= k; ++i)
        r = r * (n - k + i) / i;
    return r;
}

namespace {

void collect_sets(int d, int k, int start, std::vector<int>& cur, std::vector<std::vector<int>>& out)
{
    if (int(cur.size()) == k) {
        out.push_back(cur);
        return;
    }
    for (int i = start; i < d; ++i) {
        cur.push_back(i);
        collect_sets(d, k, i + 1, cur, out);
        cur.pop_back();
    }
}

void collect_homogeneous(int d, int s, int pos, std::vector<int>& cur, std::vector<std::vector<int>>& out)
{
    if (pos == d - 1) {
        cur[pos] = s;
        out.push_back(cur);
        return;
    }
    for (int e = s; e >= 0; --e) {
        cur[pos] = e;
        collect_homogeneous(d, s - e, pos + 1, cur, out);
    }
}

} // namespace

const std::vector<std::vector<int>>& index_sets(int d, int k)
{
    static std::mutex mtx;
    static std::map<std::pair<int, int>, std::vector<std::vector<int>>> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto key = std::make_pair(d, k);
    auto it = cache.find(key);
    if (it != cache.end())
        return it->second;
    std::vector<std::vector<int>> out;
    if (k >= 0 && k <= d) {
        std::vector<int> cur;
        collect_sets(d, k, 0, cur, out);
    }
    return cache.emplace(key, std::move(out)).first->second;
}

int index_set_position(int d, const std::vector<int>& set)
{
    const auto& sets = index_sets(d, int(set.size()));
    auto it = std::lower_bound(sets.begin(), sets.end(), set);
    if (it == sets.end() || *it != set)
        throw error("index_set_position: not a valid index set");
    return int(it - sets.begin());
}

std::vector<std::vector<int>> monomials_homogeneous(int d, int s)
{
    std::vector<std::vector<int>> out;
    if (s < 0)
        return out;
    if (d == 0) {
        if (s == 0)
            out.emplace_back();
        return out;
    }
    std::vector<int> cur(d, 0);
    collect_homogeneous(d, s, 0, cur, out);
    return out;
}

std::vector<std::vector<int>> monomials(int d, int r)
{
    std::vector<std::vector<int>> out;
    for (int s = 0; s <= r; ++s) {
        auto h = monomials_homogeneous(d, s);
        out.insert(out.end(), h.begin(), h.end());
    }
    return out;
}

int shuffle_sign(const std::vector<int>& a, const std::vector<int>& b)
{
    int inv = 0;
    for (int x : a)
        for (int y : b) {
            if (x == y)
                return 0;
            inv += (x > y);
        }
    return inv % 2 ? -1 : 1;
}

metric_at_point::metric_at_point(const Eigen::MatrixXd& m) : g(m)
{
    det = g.size() ? g.determinant() : 1.0;
    if (!(det > 0) || (g.size() && g.llt().info() != Eigen::Success))
        throw error("metric is not positive definite");
    inv = g.size() ? Eigen::MatrixXd(g.inverse()) : g;
}

Eigen::MatrixXd form_inner_matrix(const metric_at_point& g, int k)
{
    int d = int(g.g.rows());
    const auto& sets = index_sets(d, k);
    int n = int(sets.size());
    Eigen::MatrixXd H(n, n);
    Eigen::MatrixXd sub(k, k);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            for (int p = 0; p < k; ++p)
                for (int q = 0; q < k; ++q)
                    sub(p, q) = g.inv(sets[i][p], sets[j][q]);
            H(i, j) = k ? sub.determinant() : 1.0;
        }
    return H;
}

Eigen::MatrixXd hodge_matrix(const metric_at_point& g, int k)
{
    int d = int(g.g.rows());
    const auto& src = index_sets(d, k);
    const auto& dst = index_sets(d, d - k);
    Eigen::MatrixXd H = form_inner_matrix(g, k);
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(dst.size(), src.size());
    double sq = std::sqrt(g.det);
    for (std::size_t j = 0; j < dst.size(); ++j) {
        std::vector<int> comp;
        for (int i = 0; i < d; ++i)
            if (std::find(dst[j].begin(), dst[j].end(), i) == dst[j].end())
                comp.push_back(i);
        int pos = index_set_position(d, comp);
        int s = shuffle_sign(comp, dst[j]);
        S.row(j) = sq * s * H.row(pos);
    }
    return S;
}

alt_value hodge_star_at(const metric_at_point& g, const alt_value& v)
{
    if (v.dim != g.g.rows())
        throw error("hodge_star_at: dimension mismatch");
    alt_value r(v.dim, v.dim - v.degree);
    r.c = hodge_matrix(g, v.degree) * v.c;
    return r;
}

alt_value interior_product_at(const Eigen::VectorXd& X, const alt_value& v)
{
    if (X.size() != v.dim)
        throw error("interior_product_at: dimension mismatch");
    if (v.degree == 0)
        return alt_value(v.dim, -1);
    alt_value r(v.dim, v.degree - 1);
    const auto& sets = index_sets(v.dim, v.degree);
    for (std::size_t i = 0; i < sets.size(); ++i)
        for (int m = 0; m < v.degree; ++m) {
            std::vector<int> rest = sets[i];
            rest.erase(rest.begin() + m);
            double s = m % 2 ? -1.0 : 1.0;
            r.c[index_set_position(v.dim, rest)] += s * X[sets[i][m]] * v.c[i];
        }
    return r;
}

alt_value wedge_at(const alt_value& a, const alt_value& b)
{
    if (a.dim != b.dim)
        throw error("wedge_at: dimension mismatch");
    alt_value r(a.dim, a.degree + b.degree);
    if (r.c.size() == 0)
        return r;
    const auto& sa = index_sets(a.dim, a.degree);
    const auto& sb = index_sets(a.dim, b.degree);
    for (std::size_t i = 0; i < sa.size(); ++i)
        for (std::size_t j = 0; j < sb.size(); ++j) {
            int s = shuffle_sign(sa[i], sb[j]);
            if (!s)
                continue;
            std::vector<int> u = sa[i];
            u.insert(u.end(), sb[j].begin(), sb[j].end());
            std::sort(u.begin(), u.end());
            r.c[index_set_position(a.dim, u)] += s * a.c[i] * b.c[j];
        }
    return r;
}

double inner_at(const metric_at_point& g, const alt_value& a, const alt_value& b)
{
    return a.c.dot(form_inner_matrix(g, a.degree) * b.c);
}

Eigen::MatrixXd pullback_matrix(const Eigen::MatrixXd& A, int k)
{
    int n = int(A.rows()), m = int(A.cols());
    const auto& src = index_sets(n, k);
    const auto& dst = index_sets(m, k);
    Eigen::MatrixXd P(dst.size(), src.size());
    Eigen::MatrixXd sub(k, k);
    for (std::size_t K = 0; K < dst.size(); ++K)
        for (std::size_t I = 0; I < src.size(); ++I) {
            for (int p = 0; p < k; ++p)
                for (int q = 0; q < k; ++q)
                    sub(p, q) = A(src[I][p], dst[K][q]);
            P(K, I) = k ? sub.determinant() : 1.0;
        }
    return P;
}

} // namespace ddr
