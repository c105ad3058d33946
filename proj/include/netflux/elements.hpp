#pragma once

#include <Eigen/Dense>

namespace netflux {

/// Reference-element operator set for P1 bulk/trace spaces with P0 or P1
/// flux, pre-computed in closed form on [0,1] and scaled analytically to
/// the physical element length h.
///
/// Conventions (nodal hat basis phi0 = 1-x, phi1 = x):
///   M(i,j)    = int phi_i phi_j
///   D(i,j)    = int phi_j' phi_i
///   Ntilde    = bulk endpoint evaluation (row 0: left, row 1: right)
///   Nhat      = trace endpoint selector (identity for nodal P1)
///   Gb        = signed endpoint evaluation, implements [. nu]|dK
///   Mb        = unsigned endpoint sum, implements [.]|dK
///   T         = unit-weight endpoint operator; assembly multiplies by tau
///   Av        = row of mean values of the basis functions
///   Q(i,k)    = w_k phi_i(x_k)  (row sums = int phi_i)
/// Flux-space companions:
///   Mq        = flux mass, Nq = flux endpoint evaluation (rows L/R)
///   Cuq(i,j)  = int psi_j phi_i'   (u-rows, flux column space)
///   Cqu(j,i)  = int phi_i psi_j'   (q-rows, bulk column space)
struct ElementMatrices {
    Eigen::Matrix2d M, Minv, D;
    Eigen::Matrix2d Ntilde, Nhat, Gb, Mb, T;
    Eigen::RowVector2d Av;
    Eigen::MatrixXd Q;          // 2 x n_quad
    Eigen::VectorXd quad_nodes;  // physical coordinates in [0, h]
    Eigen::VectorXd quad_weights;

    Eigen::MatrixXd Mq;   // nq x nq
    Eigen::MatrixXd Nq;   // 2 x nq (row 0: left, row 1: right)
    Eigen::MatrixXd Cuq;  // 2 x nq
    Eigen::MatrixXd Cqu;  // nq x 2

    int flux_order = 1;
    double h = 1.0;

    int n_flux() const { return flux_order == 0 ? 1 : 2; }
};

/// Closed-form operator set on the reference element [0,1].
/// Throws SolverError for flux_order outside {0,1}.
ElementMatrices reference_matrices(int flux_order);

/// Analytic scaling to physical length h > 0: mass-type entries x h,
/// differentiation-type entries invariant, quadrature weights x h with
/// affinely mapped nodes.
ElementMatrices scale_to_physical(const ElementMatrices& ref, double h);

/// Shared cache keyed by (flux_order, h); safe under concurrent reads with
/// internal synchronisation on insert.
const ElementMatrices& cached_matrices(int flux_order, double h);

}  // namespace netflux
