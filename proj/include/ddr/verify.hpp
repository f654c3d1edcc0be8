#pragma once

#include "ddr/ddr.hpp"

#include <vector>

namespace ddr {

// Complex identities on random dof vectors; all residuals are relative.
struct complex_checks {
    double dd = 0;         // max |D1 D0| / (|D1|_inf |D0|_inf)
    double projection = 0; // trimmed projection of the potential vs the cell block
    double link = 0;       // potential of a discrete derivative vs the local derivative
    double stokes = 0;     // discrete Stokes formula for 0-forms
    double max() const;
};

complex_checks check_complex(const de_rham_complex& c, unsigned seed = 1);

// Smooth test forms w_k and d w_k (k = 0, 1) chosen from the manifold of the
// mesh (torus, sphere, or a single flat chart).
struct test_forms {
    form_field w[2], dw[2];
};
test_forms smooth_test_forms(const mesh& m);

// d_h I^k w - I^{k+1} dw, relative max-norm, at the default quadrature and at
// quad_degree + extra; the difference estimates the quadrature error.
struct commutation_check {
    int k = 0;
    double residual = 0;
    double residual_fine = 0;
    // residual <= factor * |residual - residual_fine| + floor
    bool ok(double factor = 10, double floor = 1e-12) const;
};
std::vector<commutation_check> check_commutation(const mesh& m, int r, int extra = 4);

// Least-squares slope of log e against log h; NaN with fewer than two usable points.
double fit_rate(const std::vector<double>& h, const std::vector<double>& e);
// Slopes between consecutive points (size n-1).
std::vector<double> pairwise_rates(const std::vector<double>& h, const std::vector<double>& e);

} // namespace ddr
