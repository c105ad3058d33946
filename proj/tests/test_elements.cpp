#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <functional>

#include "doctest.h"
#include "netflux/elements.hpp"
#include "netflux/errors.hpp"

using namespace netflux;

namespace {

// Independent oracle: composite Simpson on [0,1], 2000 panels.
double integrate(const std::function<double(double)>& f) {
    const int n = 2000;
    const double h = 1.0 / n;
    double sum = f(0.0) + f(1.0);
    for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(i * h);
    return sum * h / 3.0;
}

double hat(int i, double x) { return i == 0 ? 1.0 - x : x; }
double dhat(int i) { return i == 0 ? -1.0 : 1.0; }

}  // namespace

TEST_CASE("reference matrices match quadrature oracles (P1 flux)") {
    const auto E = reference_matrices(1);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            CHECK(E.M(i, j) ==
                  doctest::Approx(integrate([&](double x) { return hat(i, x) * hat(j, x); }))
                      .epsilon(1e-12));
            CHECK(E.D(i, j) ==
                  doctest::Approx(integrate([&](double x) { return dhat(j) * hat(i, x); }))
                      .epsilon(1e-12));
            CHECK(E.Cuq(i, j) ==
                  doctest::Approx(integrate([&](double x) { return hat(j, x) * dhat(i); }))
                      .epsilon(1e-12));
            CHECK(E.Cqu(j, i) ==
                  doctest::Approx(integrate([&](double x) { return hat(i, x) * dhat(j); }))
                      .epsilon(1e-12));
            CHECK(E.Mq(i, j) == doctest::Approx(E.M(i, j)));
        }
    CHECK((E.M * E.Minv - Eigen::Matrix2d::Identity()).norm() < 1e-14);
    // endpoint evaluations
    CHECK(E.Nq(0, 0) == 1.0);
    CHECK(E.Nq(0, 1) == 0.0);
    CHECK(E.Nq(1, 0) == 0.0);
    CHECK(E.Nq(1, 1) == 1.0);
    CHECK(E.Gb(0, 0) == -1.0);
    CHECK(E.Gb(1, 1) == 1.0);
    CHECK(E.Av(0) == doctest::Approx(0.5));
    CHECK(E.Av(1) == doctest::Approx(0.5));
}

TEST_CASE("P0 flux companions") {
    const auto E = reference_matrices(0);
    CHECK(E.n_flux() == 1);
    CHECK(E.Mq(0, 0) == doctest::Approx(1.0));
    // int psi phi_i' with psi = 1
    CHECK(E.Cuq(0, 0) == doctest::Approx(-1.0));
    CHECK(E.Cuq(1, 0) == doctest::Approx(1.0));
    // int phi_i psi' = 0 for constant psi
    CHECK(E.Cqu(0, 0) == 0.0);
    CHECK(E.Cqu(0, 1) == 0.0);
    CHECK(E.Nq(0, 0) == 1.0);
    CHECK(E.Nq(1, 0) == 1.0);
    CHECK_THROWS_AS(reference_matrices(2), SolverError);
    CHECK_THROWS_AS(reference_matrices(-1), SolverError);
}

TEST_CASE("quadrature is exact to degree 9") {
    const auto E = reference_matrices(1);
    REQUIRE(E.quad_nodes.size() == 5);
    for (int p = 0; p <= 9; ++p) {
        double q = 0.0;
        for (int k = 0; k < 5; ++k) q += E.quad_weights[k] * std::pow(E.quad_nodes[k], p);
        CHECK(q == doctest::Approx(1.0 / (p + 1)).epsilon(1e-13));
    }
    // Q rows sum to the basis integrals
    CHECK(E.Q.row(0).sum() == doctest::Approx(0.5));
    CHECK(E.Q.row(1).sum() == doctest::Approx(0.5));
}

TEST_CASE("physical scaling") {
    const double h = 3.25;
    const auto R = reference_matrices(1);
    const auto E = scale_to_physical(R, h);
    CHECK(E.h == h);
    CHECK(E.M(0, 0) == doctest::Approx(h / 3.0));
    CHECK(E.Minv(0, 0) == doctest::Approx(R.Minv(0, 0) / h));
    CHECK(E.Mq(1, 0) == doctest::Approx(h / 6.0));
    // differentiation couplings are scale-invariant in 1d
    CHECK(E.D == R.D);
    CHECK(E.Cuq == R.Cuq);
    CHECK(E.Cqu == R.Cqu);
    CHECK(E.Nq == R.Nq);
    // quadrature maps affinely
    CHECK(E.quad_weights.sum() == doctest::Approx(h));
    CHECK(E.quad_nodes.minCoeff() > 0.0);
    CHECK(E.quad_nodes.maxCoeff() < h);
    // a linear function integrates exactly: int_0^h x dx = h^2/2
    double q = 0.0;
    for (int k = 0; k < 5; ++k) q += E.quad_weights[k] * E.quad_nodes[k];
    CHECK(q == doctest::Approx(h * h / 2.0));
    CHECK_THROWS_AS(scale_to_physical(R, 0.0), SolverError);
}

TEST_CASE("cache returns a stable reference per key") {
    const auto& a = cached_matrices(1, 2.0);
    const auto& b = cached_matrices(1, 2.0);
    CHECK(&a == &b);
    const auto& c = cached_matrices(0, 2.0);
    CHECK(&a != &c);
    CHECK(a.M(0, 0) == doctest::Approx(2.0 / 3.0));
}
