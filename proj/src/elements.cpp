#include "netflux/elements.hpp"

#include <map>
#include <mutex>

#include "netflux/errors.hpp"

namespace netflux {

namespace {

// 5-point Gauss-Legendre on [0,1]; exact through degree 9, enough for
// products of P1 functions with the sampled nonlinearities.
constexpr int kQuad = 5;
const double kNodes[kQuad] = {
    0.046910077030668004, 0.23076534494715845, 0.5,
    0.76923465505284155, 0.953089922969332,
};
const double kWeights[kQuad] = {
    0.11846344252809454, 0.23931433524968324, 0.28444444444444444,
    0.23931433524968324, 0.11846344252809454,
};

}  // namespace

ElementMatrices reference_matrices(int flux_order) {
    if (flux_order != 0 && flux_order != 1)
        throw SolverError("unsupported flux order " + std::to_string(flux_order));

    ElementMatrices e;
    e.flux_order = flux_order;
    e.h = 1.0;

    e.M << 1.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0;
    e.Minv << 4.0, -2.0, -2.0, 4.0;
    e.D << -0.5, 0.5, -0.5, 0.5;

    e.Ntilde = Eigen::Matrix2d::Identity();
    e.Nhat = Eigen::Matrix2d::Identity();
    e.Gb << -1.0, 0.0, 0.0, 1.0;
    e.Mb = Eigen::Matrix2d::Identity();
    e.T = Eigen::Matrix2d::Identity();
    e.Av << 0.5, 0.5;

    e.quad_nodes.resize(kQuad);
    e.quad_weights.resize(kQuad);
    e.Q.resize(2, kQuad);
    for (int k = 0; k < kQuad; ++k) {
        e.quad_nodes[k] = kNodes[k];
        e.quad_weights[k] = kWeights[k];
        e.Q(0, k) = kWeights[k] * (1.0 - kNodes[k]);
        e.Q(1, k) = kWeights[k] * kNodes[k];
    }

    if (flux_order == 0) {
        e.Mq = Eigen::MatrixXd::Ones(1, 1);
        e.Nq = Eigen::MatrixXd::Ones(2, 1);
        e.Cuq.resize(2, 1);
        e.Cuq << -1.0, 1.0;  // int psi0 phi_i'
        e.Cqu = Eigen::MatrixXd::Zero(1, 2);
    } else {
        e.Mq = e.M;
        e.Nq = Eigen::Matrix2d::Identity();
        e.Cuq.resize(2, 2);
        e.Cuq << -0.5, -0.5, 0.5, 0.5;  // int psi_j phi_i'
        e.Cqu = e.Cuq;                  // same closed form with roles swapped
    }
    return e;
}

ElementMatrices scale_to_physical(const ElementMatrices& ref, double h) {
    if (h <= 0.0) throw SolverError("non-positive element length");
    ElementMatrices e = ref;
    e.h = h * ref.h;
    e.M *= h;
    e.Minv /= h;
    e.Mq *= h;
    // D, Cuq, Cqu, trace/endpoint operators and Av are scale-invariant.
    e.quad_nodes *= h;
    e.quad_weights *= h;
    e.Q *= h;
    return e;
}

const ElementMatrices& cached_matrices(int flux_order, double h) {
    static std::map<std::pair<int, double>, ElementMatrices> cache;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    auto key = std::make_pair(flux_order, h);
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, scale_to_physical(reference_matrices(flux_order), h)).first;
    return it->second;
}

}  // namespace netflux
