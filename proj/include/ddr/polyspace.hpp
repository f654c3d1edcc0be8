#pragma once

#include "ddr/exterior.hpp"

#include <utility>
#include <vector>

namespace ddr {

enum class space_kind { full, homogeneous, trimmed, koszul };

struct basis_spec {
    int dim = 0, r = 0, l = 0;
    space_kind kind = space_kind::full;
};

struct span_basis {
    basis_spec spec;
    std::vector<rform> forms;

    std::size_t size() const { return forms.size(); }
};

// Cached; returned references stay valid for the program lifetime.
const span_basis& basis_full(int d, int r, int l);
const span_basis& basis_homogeneous(int d, int s, int l);
const span_basis& basis_trimmed(int d, int r, int l);
// kappa P_r Lambda^l, a space of (l-1)-forms of degree r+1.
const span_basis& basis_koszul(int d, int r, int l);

long full_dimension(int d, int r, int l);
long trimmed_dimension(int d, int r, int l);

rform trace_form(const affine_map<rational>& T, const rform& a);
std::vector<std::pair<int, rform>> homogeneous_decompose(const rform& a);

std::size_t exact_rank(const std::vector<rform>& forms);
bool in_span(const std::vector<rform>& basis, const rform& f);
// Greedy pruning in list order; returns indices of retained forms.
std::vector<std::size_t> independent_subset(const std::vector<rform>& forms);

// Numeric coordinates in the master basis of P_R Lambda^l on R^d.
// Row index = monomial position * binomial(d,l) + index-set position.
Eigen::MatrixXd master_coefficients(const std::vector<rform>& forms, int d, int l, int R);
int master_size(int d, int l, int R);

} // namespace ddr
