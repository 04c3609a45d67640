#include <numbers>
#include <unsupported/Eigen/MatrixFunctions>

#include "doctest.h"
#include "helpers.hpp"
#include "tclgen/model.hpp"

using namespace tclgen;

TEST_CASE("interaction picture coupling") {
  const double w = 1.3;
  const SystemModel m(0.5 * w * th::sz(), th::sx(), 0.1);
  CHECK(max_abs(m.interaction_picture_A(0.0) - th::sx()) < 1e-15);
  CHECK(max_abs(m.interaction_picture_A(std::numbers::pi / w) + th::sx()) < 1e-12);
  const SystemModel deph(0.5 * w * th::sz(), th::sz(), 0.1);
  for (double t : {0.3, 2.0, 17.0}) CHECK(max_abs(deph.interaction_picture_A(t) - th::sz()) < 1e-14);

  std::mt19937_64 rng(5);
  const Operator h = th::random_hermitian(rng, 3), a = th::random_hermitian(rng, 3);
  const SystemModel r(h, a, 1.0);
  const double t = 0.77;
  const Operator ih = Complex(0, 1) * h * t;
  const Operator direct = ih.exp() * a * (-ih).exp();
  CHECK(max_abs(r.interaction_picture_A(t) - direct) < 1e-12);
  Eigen::SelfAdjointEigenSolver<Operator> e0(a), e1(r.interaction_picture_A(t));
  CHECK((e0.eigenvalues() - e1.eigenvalues()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(max_abs(r.free_propagator(t) - (-ih).exp()) < 1e-12);
}

TEST_CASE("model validation") {
  Operator nh = th::sx();
  nh(0, 1) = 2.0;
  CHECK_THROWS(SystemModel(nh, th::sz(), 0.1));
  CHECK_THROWS(SystemModel(th::sz(), nh, 0.1));
  CHECK_THROWS(SystemModel(th::sz(), th::sz(), -0.1));
  CHECK_THROWS(SystemModel(th::sz(), th::id(3), 0.1));
}

TEST_CASE("ordered products") {
  std::mt19937_64 rng(6);
  const SystemModel m(th::random_hermitian(rng, 3), th::random_hermitian(rng, 3), 1.0);
  CHECK(max_abs(ordered_product(m, {}, false) - th::id(3)) == 0.0);
  const std::vector<double> one{0.4};
  CHECK(max_abs(ordered_product(m, one, true) - m.interaction_picture_A(0.4)) < 1e-15);
  const std::vector<double> two{0.9, 0.2};
  CHECK(max_abs(ordered_product(m, two, true) - ordered_product(m, two, false).adjoint()) < 1e-13);
  const std::vector<double> same{0.5, 0.5, 0.5};
  const Operator a = m.interaction_picture_A(0.5);
  CHECK(max_abs(ordered_product(m, same, false) - a * a * a) < 1e-12);
}

TEST_CASE("maximally mixed average") {
  CHECK(maximally_mixed_average(th::id(2)) == Complex(1.0));
  CHECK(maximally_mixed_average(th::sz()) == Complex(0.0));
  Operator x = Operator::Zero(2, 2);
  x(0, 0) = 2.0;
  CHECK(maximally_mixed_average(x) == Complex(1.0));
}
