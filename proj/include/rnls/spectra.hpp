#ifndef RNLS_SPECTRA_HPP
#define RNLS_SPECTRA_HPP

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "rnls/ground_state.hpp"
#include "rnls/params.hpp"

namespace rnls {

enum class Boundary { periodic_1d, radial_regular };

// Dense symmetric discretization of L_a = -Lap + omega - a*phi_omega.
// Periodic 1-D uses the spectral Laplacian (circulant); radial dims use
// cell-centered finite differences symmetrized with the r^{dim-1} weight.
struct ScalarOperator {
    double a = 0.0;
    double omega = 1.0;
    int dim = 1;
    Boundary boundary = Boundary::periodic_1d;
    Eigen::MatrixXd matrix;
    Eigen::VectorXd weight;  // quadrature weight per node
    Eigen::VectorXd sqrtw;   // similarity scaling (all ones for periodic)
    double spacing = 0.0;
};

enum class BlockKind { LR, LI };

struct BlockOperator {
    BlockKind kind = BlockKind::LR;
    double alpha = 0.0, beta = 0.0;
    int n = 0;  // nodes per component; matrix is 2n x 2n
    Eigen::MatrixXd matrix;
    Eigen::VectorXd weight;  // per component node
    Eigen::VectorXd sqrtw;
    double spacing = 0.0;
};

struct OperatorSpectrum {
    std::vector<double> eigenvalues;  // ascending, lowest k
    Eigen::MatrixXd eigenvectors;     // nodal values, one column per pair
    int negative_count = 0;
    int kernel_dim = 0;
    double kernel_tol = 0.0;
    std::vector<double> residuals;
};

ScalarOperator assemble_La(double a, const ScalarProfile& phi, const Grid& grid);

OperatorSpectrum eig_low(const ScalarOperator& op, int k);
OperatorSpectrum eig_low(const BlockOperator& op, int k);

std::pair<BlockOperator, BlockOperator> assemble_blocks(const BranchPoint& bp,
                                                        const CouplingParams& p,
                                                        const ScalarProfile& phi);

struct DiagonalizationReport {
    double orthogonality = 0.0;   // max of |A^T A - I|, |B^T B - I|
    double offdiag_R = 0.0;       // sup-norm of the off-diagonal blocks of A LR A^T
    double offdiag_I = 0.0;
    double eig_err_R = 0.0;       // max eigenvalue gap vs merged scalar spectra
    double eig_err_I = 0.0;
};

DiagonalizationReport verify_diagonalization(const BranchPoint& bp, const CouplingParams& p,
                                             const ScalarProfile& phi, int k);

double quadratic_form(const ScalarOperator& op, const Eigen::VectorXd& v);
double quadratic_form(const BlockOperator& op, const Eigen::VectorXd& v);

// apply in nodal (physical) coordinates
Eigen::VectorXd apply(const ScalarOperator& op, const Eigen::VectorXd& v);
Eigen::VectorXd apply(const BlockOperator& op, const Eigen::VectorXd& v);

enum class CoercivityKind { Lr1, Lr2, Li1 };

// minimal Rayleigh quotient <L v, v>/|v|_X^2 over random trial fields
// projected on the constraint set of the corresponding lemma
double coercivity_probe(CoercivityKind kind, const BranchPoint& bp, const CouplingParams& p,
                        const ScalarProfile& phi, int trials, std::uint64_t seed = 0);

std::string spectrum_json(const OperatorSpectrum& s, double a, double omega, const Grid& grid);

}  // namespace rnls

#endif
