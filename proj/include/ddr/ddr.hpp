#pragma once

#include "ddr/mesh.hpp"

#include <Eigen/Sparse>

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace ddr {

using sparse = Eigen::SparseMatrix<double>;

// k-form in chart coordinates, evaluated in the given chart.
using form_field = std::function<alt_value(int chart, const Eigen::Vector2d& x)>;

// Discrete de Rham complex of degree r on a finalized 2D mesh.
//
// A block of X^k on a d-cell f holds the coefficients of the L2 projection of
// *tr_f w onto the trimmed space of (d-k)-forms (reference coordinates), so the
// discrete form itself is *^{-1} of that polynomial. Local derivatives and
// potentials are returned in the full space P_r of (d-k-1)- resp. (d-k)-forms,
// acting on the dofs of the closure of f listed by local_dofs().
class de_rham_complex {
public:
    de_rham_complex(const mesh& m, int r, int quad_degree = -1);

    const mesh& get_mesh() const { return *mesh_; }
    int degree() const { return r_; }
    int quad_degree() const { return q_; }

    int block_size(int k, int d) const;
    int offset(int k, int d, int id) const { return offsets_[k][d][id]; }
    int ndofs(int k) const { return ndofs_[k]; }

    const std::vector<int>& local_dofs(int k, int d, int id) const { return local_[k][d][id].dofs; }
    // empty for d == k
    const Eigen::MatrixXd& local_derivative(int k, int d, int id) const { return local_[k][d][id].D; }
    const Eigen::MatrixXd& local_potential(int k, int d, int id) const { return local_[k][d][id].P; }

    // On vertices and edges shared by 2-cells of several charts the sampler is
    // evaluated in each of those charts and the pulled-back values averaged, so
    // fields whose trace jumps across a chart interface get the mean trace.
    Eigen::VectorXd interpolate(int k, const form_field& w) const;
    // Functional v -> sum over 2-cells of the integral of <w, P^k_f v>, with w
    // sampled inside each cell (one-sided at interfaces).
    Eigen::VectorXd load(int k, const form_field& w) const;
    // Global derivative X^k -> X^{k+1}, k = 0, 1.
    const sparse& derivative(int k) const { return D_.at(k); }
    // Stabilized discrete L2 product on X^k.
    const sparse& mass(int k) const { return M_.at(k); }

    // Restriction of a global vector to the local dofs of a cell.
    Eigen::VectorXd restrict(int k, int d, int id, const Eigen::VectorXd& x) const;

    // Pointwise value of P^k_f x at reference point u of the 2-cell f, as a
    // k-form in reference coordinates.
    alt_value potential_value(int k, int id, const Eigen::VectorXd& local, const Eigen::VectorXd& u) const;

    // sqrt(sum over 2-cells of ||P^k_f x - w||^2), by quadrature.
    double potential_error(int k, const Eigen::VectorXd& x, const form_field& w) const;

    // Identities checked on global dof vectors for one cell; each returns the
    // max residual scaled by the size of the compared terms.
    // projection of P^k_f x onto the trimmed space returns the cell block
    double projection_residual(int k, int d, int id, const Eigen::VectorXd& x) const;
    // P^k_f (d^{k-1}_h y) = d^{k-1}_f y
    double link_residual(int k, int d, int id, const Eigen::VectorXd& y) const;
    // discrete Stokes on a 2-cell for k = 0 against all alpha in P_{r+1}
    double stokes_residual(int id, const Eigen::VectorXd& x0) const;

    // Master monomial-form Gram matrix of cell (d,id) for l-forms (L2 with metric).
    const Eigen::MatrixXd& master_gram(int d, int id, int l) const { return cells_[d][id].gram[l]; }

private:
    struct local_ops {
        std::vector<int> dofs;
        Eigen::MatrixXd D, P;
    };
    struct cell_cache {
        quad_rule q;
        std::vector<frame> frames;
        std::array<Eigen::MatrixXd, 3> gram;
        double h = 1;
    };

    // master coordinates of the reference bases on a d-cell for l-forms
    struct basis_mats {
        Eigen::MatrixXd full, trimmed, to_full; // to_full: trimmed -> full coefficients
        Eigen::MatrixXd d_full;                 // d of the full basis, (l+1)-forms
        Eigen::MatrixXd kos, d_kos;             // kappa P_r L^l ((l-1)-forms) and its d
        Eigen::MatrixXd kos_lower;              // kappa P_{r-1} L^{l+1} (l-forms)
    };

    void build_bases();
    void build_layout();
    void build_cell_cache(int d, int id);
    void build_local(int k, int d, int id);
    void build_global();
    void build_interfaces();
    alt_value sample(const form_field& w, int k, int d, int id, const Eigen::Vector2d& x) const;
    Eigen::MatrixXd trace_master(int d, const affine_d& T, int l) const;
    Eigen::MatrixXd embed(int k, int d, int id, int dsub, int sub, const Eigen::MatrixXd& A) const;
    Eigen::MatrixXd projection_to_trimmed(int d, int id, int l) const;

    std::shared_ptr<const mesh> mesh_; // own copy
    int r_, q_;
    std::array<std::array<std::vector<int>, 3>, 3> offsets_;
    std::array<int, 3> ndofs_{};
    std::array<std::array<std::vector<local_ops>, 3>, 3> local_;
    std::array<std::vector<cell_cache>, 3> cells_;
    std::array<std::array<basis_mats, 3>, 3> bm_;
    std::array<sparse, 2> D_;
    std::array<sparse, 3> M_;
    // for d < 2: one adjacent 2-cell per chart, empty unless several charts meet
    std::array<std::vector<std::vector<int>>, 2> interface_;
};

// Values of the master monomial basis of l-forms at u: binom(d,l) x master_size.
Eigen::MatrixXd master_values(int d, int l, int R, const Eigen::VectorXd& u);

struct betti_result {
    std::array<int, 3> betti{};
    std::array<int, 2> rank{};
    // smallest ratio retained/discarded singular value at the threshold
    double gap = 0;
    bool gap_ok = false;
};

// Ranks of d0, d1 with a relative threshold and gap check.
betti_result cohomology_betti(const de_rham_complex& c, double rel_threshold = 1e-10, double min_gap = 1e3);

void export_market(const sparse& A, const std::string& path);

} // namespace ddr
