#include <doctest.h>

#include "dqrb/dualquat.hpp"
#include "oracles.hpp"

using namespace dqrb;

namespace {

// Printed closed form of exp for a pure twist (w parts zero), kept as an
// independent oracle: the library computes exp through dual-number lifting.
DualQuaternion exp_pure_twist_closed_form(const DualQuaternion& t) {
  Eigen::Vector3d q = q_vec(t.real);
  Eigen::Vector3d qe = q_vec(t.dual);
  double phi = q.norm();
  double m = q.dot(qe);
  double sinc, g;
  if (phi < 1e-4) {
    double p2 = phi * phi;
    sinc = 1.0 - p2 / 6.0 + p2 * p2 / 120.0 - p2 * p2 * p2 / 5040.0;
    g = -1.0 / 3.0 + p2 / 30.0 - p2 * p2 / 840.0 + p2 * p2 * p2 / 45360.0;
  } else {
    sinc = std::sin(phi) / phi;
    g = (std::cos(phi) - sinc) / (phi * phi);
  }
  Eigen::Vector3d dual_vec = sinc * qe + g * m * q;
  return {{std::cos(phi), sinc * q.x(), sinc * q.y(), sinc * q.z()},
          {-m * sinc, dual_vec.x(), dual_vec.y(), dual_vec.z()}};
}

// Printed closed form of log on a unit dual quaternion, with the alpha
// coefficient exactly as printed (closed form away from zero, series near it).
DualQuaternion log_unit_closed_form(const DualQuaternion& d) {
  double q0 = d.real.w;
  Eigen::Vector3d q = q_vec(d.real);
  double qe0 = d.dual.w;
  Eigen::Vector3d qe = q_vec(d.dual);
  double n2 = q0 * q0 + q.squaredNorm();
  double n = std::sqrt(n2);
  double r = q.norm();
  double phi = std::atan2(r, q0);
  double m = q.dot(qe);
  double phi_over_r, alpha;
  if (phi < 1e-4) {
    double p2 = phi * phi;
    phi_over_r = (1.0 + p2 / 6.0 + 7.0 * p2 * p2 / 360.0 + 31.0 * p2 * p2 * p2 / 15120.0) / n;
    alpha = (-2.0 / 3.0 - p2 / 5.0 - 17.0 * p2 * p2 / 420.0 - 29.0 * p2 * p2 * p2 / 4200.0) / n;
  } else {
    phi_over_r = phi / r;
    double sp = std::sin(phi);
    alpha = (std::cos(phi) / (sp * sp) - phi / (sp * sp * sp)) / n;
  }
  Eigen::Vector3d dual_vec = ((m * alpha - qe0) / n2) * q + phi_over_r * qe;
  return {{std::log(n), phi_over_r * q.x(), phi_over_r * q.y(), phi_over_r * q.z()},
          {(m + q0 * qe0) / n2, dual_vec.x(), dual_vec.y(), dual_vec.z()}};
}

}  // namespace

TEST_CASE("dq_mul matches both 8x8 matrix forms on random pairs") {
  Rng rng(201);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    DualQuaternion p = oracle::random_dq(rng);
    DualQuaternion q = oracle::random_dq(rng);
    Vec8 direct = dq_to_vec8(dq_mul(p, q));
    worst = std::max(worst, (direct - dq_matrix_left(p) * dq_to_vec8(q)).cwiseAbs().maxCoeff());
    worst = std::max(worst, (direct - dq_matrix_right(q) * dq_to_vec8(p)).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("conjugate matrix variants are the matrices of the conjugates") {
  Rng rng(202);
  for (int i = 0; i < 200; ++i) {
    DualQuaternion q = oracle::random_dq(rng);
    CHECK((dq_matrix_left_conj(q) - dq_matrix_left(dq_conj(q))).cwiseAbs().maxCoeff() == 0.0);
    CHECK((dq_matrix_right_conj(q) - dq_matrix_right(dq_conj(q))).cwiseAbs().maxCoeff() == 0.0);
    CHECK((dq_matrix_left_dual_conj(q) - dq_matrix_left(dq_dual_conj(q))).cwiseAbs().maxCoeff() == 0.0);
    CHECK((dq_matrix_right_dual_conj(q) - dq_matrix_right(dq_dual_conj(q))).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("dual conjugate flips only the dual sign under quaternion conjugation") {
  DualQuaternion q{{1, 0, 0, 0}, {0, 1, 2, 3}};
  DualQuaternion d = dq_dual_conj(q);
  CHECK(oracle::max_abs_diff(d.real, Quat{1, 0, 0, 0}) == 0.0);
  CHECK(oracle::max_abs_diff(d.dual, Quat{0, 1, 2, 3}) == 0.0);
}

TEST_CASE("dual norm: squared form, multiplicativity, zero input") {
  Rng rng(203);
  for (int i = 0; i < 10000; ++i) {
    DualQuaternion p = oracle::random_dq(rng);
    DualQuaternion q = oracle::random_dq(rng);

    Dual n = dq_norm(q);
    Dual n2 = dq_norm_sq(q);
    CHECK(std::abs(n.re * n.re - n2.re) < 1e-12 * std::max(1.0, n2.re));
    CHECK(std::abs(2.0 * n.re * n.du - n2.du) < 1e-12 * std::max(1.0, std::abs(n2.du)));

    Dual lhs = dq_norm(dq_mul(p, q));
    Dual rhs = dq_norm(p) * dq_norm(q);
    CHECK(std::abs(lhs.re - rhs.re) < 1e-12 * std::max(1.0, std::abs(rhs.re)));
    CHECK(std::abs(lhs.du - rhs.du) < 1e-11 * std::max(1.0, std::abs(rhs.du)));
  }
  Dual z = dq_norm(DualQuaternion{{0, 0, 0, 0}, {1, 2, 3, 4}});
  CHECK(z.re == 0.0);
  CHECK(z.du == 0.0);
}

TEST_CASE("normalization scales the real part and projects the dual part") {
  // Pinned example: the dual part is not divided by the norm.
  DualQuaternion q{{2, 0, 0, 0}, {0, 1, 0, 0}};
  DualQuaternion n = dq_normalize(q);
  CHECK(oracle::max_abs_diff(n.real, Quat{1, 0, 0, 0}) == 0.0);
  CHECK(oracle::max_abs_diff(n.dual, Quat{0, 1, 0, 0}) == 0.0);

  Rng rng(204);
  for (int i = 0; i < 10000; ++i) {
    DualQuaternion d = oracle::random_dq(rng);
    if (q_norm(d.real) < 1e-6) continue;
    DualQuaternion u = dq_normalize(d);
    CHECK(std::abs(q_norm(u.real) - 1.0) < 1e-9);
    CHECK(std::abs(q_dot(u.real, u.dual)) < 1e-9);
    CHECK(oracle::max_abs_diff(dq_normalize(u), u) < 1e-9);
  }
  CHECK_THROWS_AS(dq_normalize(DualQuaternion{{0, 0, 0, 0}, {1, 0, 0, 0}}), DegenerateInput);
}

TEST_CASE("exp matches the printed closed form on pure twists and is unit") {
  Rng rng(205);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    DualQuaternion twist{q_pure(rng.vec3(-3, 3)), q_pure(rng.vec3(-3, 3))};
    if (i % 7 == 0) {  // exercise the small-angle branch as well
      twist.real = q_pure(rng.vec3(-1e-5, 1e-5));
    }
    DualQuaternion e = dq_exp(twist);
    worst = std::max(worst, oracle::max_abs_diff(e, exp_pure_twist_closed_form(twist)));
    CHECK(dq_is_unit(e, 1e-9));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("exp of a pure translation half is the unit translation carrier") {
  DualQuaternion t{{0, 0, 0, 0}, {0, 0.5, 1.0, -0.25}};
  DualQuaternion e = dq_exp(t);
  CHECK(oracle::max_abs_diff(e.real, Quat{1, 0, 0, 0}) == 0.0);
  CHECK(oracle::max_abs_diff(e.dual, t.dual) == 0.0);
}

TEST_CASE("log matches the printed alpha closed form on unit dual quaternions") {
  Rng rng(206);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    DualQuaternion d = oracle::random_unit_dq(rng);
    if (d.real.w < 0.0) { d.real = q_neg(d.real); d.dual = q_neg(d.dual); }
    if (d.real.w < 0.01) continue;  // stay clear of the branch cut
    worst = std::max(worst, oracle::max_abs_diff(dq_log(d), log_unit_closed_form(d)));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("exp(log(d)) == d and log(exp(t)) == t within 1e-8") {
  Rng rng(207);
  double worst_el = 0.0, worst_le = 0.0;
  for (int i = 0; i < 10000; ++i) {
    DualQuaternion d = oracle::random_unit_dq(rng);
    if (d.real.w < 0.0) { d.real = q_neg(d.real); d.dual = q_neg(d.dual); }
    if (d.real.w < 0.01) continue;  // stay clear of the branch cut
    worst_el = std::max(worst_el, oracle::max_abs_diff(dq_exp(dq_log(d)), d));

    DualQuaternion t{q_pure(rng.vec3(-1, 1)), q_pure(rng.vec3(-2, 2))};
    double vn = q_vec_norm(t.real);
    if (vn > 0.45 * M_PI) t.real = q_scale(t.real, 0.45 * M_PI / vn);
    worst_le = std::max(worst_le, oracle::max_abs_diff(dq_log(dq_exp(t)), t));
  }
  CHECK(worst_el < 1e-8);
  CHECK(worst_le < 1e-8);
}

TEST_CASE("log taylor continuity across the threshold") {
  Eigen::Vector3d dir = Eigen::Vector3d(2, -1, 1).normalized();
  DualQuaternion prev;
  bool first = true;
  for (double phi = 0.5e-4; phi <= 2.0e-4; phi += 1e-6) {
    DualQuaternion d = dq_from_rot_trans(q_from_axis_angle(dir, 2.0 * phi),
                                         Eigen::Vector3d(0.3, -0.2, 0.1));
    DualQuaternion l = dq_log(d);
    if (!first) CHECK(oracle::max_abs_diff(l, prev) < 1e-6);
    prev = l;
    first = false;
  }
}

TEST_CASE("log requires the principal branch") {
  CHECK_THROWS_AS(dq_log(DualQuaternion{{-1, 0, 0, 0}, {0, 0, 0, 0}}), BranchCut);
  CHECK_THROWS_AS(dq_log(DualQuaternion{{0, 1, 0, 0}, {0, 0, 0, 0}}), BranchCut);
}

TEST_CASE("unit poses satisfy Qd conj(Qd) == 1") {
  Rng rng(208);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    DualQuaternion d = oracle::random_unit_dq(rng);
    worst = std::max(worst, oracle::max_abs_diff(dq_mul(d, dq_conj(d)), dq_identity()));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("point transform matches the homogeneous matrix oracle") {
  Rng rng(209);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    Quat r = oracle::random_unit_quat(rng);
    Eigen::Vector3d t = rng.vec3(-2, 2);
    Eigen::Vector3d p = rng.vec3(-3, 3);

    Eigen::Matrix4d h = oracle::homogeneous(oracle::rotation_matrix(r), t);
    Eigen::Vector3d got = dq_transform_point(dq_from_rot_trans(r, t), p);
    worst = std::max(worst, (got - oracle::apply_homogeneous(h, p)).cwiseAbs().maxCoeff());

    // translate-then-rotate equals homogeneous (R, R t)
    Eigen::Matrix4d h2 = oracle::homogeneous(oracle::rotation_matrix(r),
                                             oracle::rotation_matrix(r) * t);
    Eigen::Vector3d got2 = dq_transform_point(dq_from_trans_rot(r, t), p);
    worst = std::max(worst, (got2 - oracle::apply_homogeneous(h2, p)).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("pose composition equals homogeneous composition") {
  Rng rng(210);
  double worst = 0.0;
  for (int i = 0; i < 2000; ++i) {
    Quat r1 = oracle::random_unit_quat(rng), r2 = oracle::random_unit_quat(rng);
    Eigen::Vector3d t1 = rng.vec3(-2, 2), t2 = rng.vec3(-2, 2);
    Eigen::Vector3d p = rng.vec3(-3, 3);
    DualQuaternion composed = dq_mul(dq_from_rot_trans(r1, t1), dq_from_rot_trans(r2, t2));
    Eigen::Matrix4d h = oracle::homogeneous(oracle::rotation_matrix(r1), t1) *
                        oracle::homogeneous(oracle::rotation_matrix(r2), t2);
    worst = std::max(worst,
                     (dq_transform_point(composed, p) - oracle::apply_homogeneous(h, p))
                         .cwiseAbs()
                         .maxCoeff());
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("translation extraction inverts both pose constructions") {
  Rng rng(211);
  for (int i = 0; i < 2000; ++i) {
    Quat r = oracle::random_unit_quat(rng);
    Eigen::Vector3d t = rng.vec3(-2, 2);
    Eigen::Vector3d e1 =
        dq_extract_translation(dq_from_rot_trans(r, t), TranslationConvention::kRotTrans);
    Eigen::Vector3d e2 =
        dq_extract_translation(dq_from_trans_rot(r, t), TranslationConvention::kTransRot);
    CHECK((e1 - t).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((e2 - t).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("sandwich-transforming a pose is not a pose transform (negative result)") {
  // Rotating/translating a body pose must compose as Qd * Bd. The sandwich
  // Qd Bd dual_conj(Qd) rotates the orientation as R O R* and garbles the
  // translation; assert it stays far from the correct pose.
  const double s = 1.0 / std::sqrt(3.0);
  Quat r = q_from_axis_angle(Eigen::Vector3d(s, s, s), M_PI / 2.0);
  Eigen::Vector3d t(1.0, 1.5, -1.0);
  DualQuaternion qd = dq_from_rot_trans(r, t);

  Quat o = q_from_axis_angle(Eigen::Vector3d(0, 0, 1), 0.7);
  Eigen::Vector3d p(0.4, -0.2, 0.3);
  DualQuaternion body = dq_from_rot_trans(o, p);

  DualQuaternion sandwich = dq_mul(dq_mul(qd, body), dq_dual_conj(qd));
  DualQuaternion correct = dq_mul(qd, body);

  CHECK(oracle::max_abs_diff(sandwich, correct) > 1e-3);
  // The real part of the sandwich is R O R*, not the composed orientation R O.
  Quat conjugated = q_mul(q_mul(r, o), q_conj(r));
  CHECK(oracle::max_abs_diff(sandwich.real, conjugated) < 1e-12);
  CHECK(oracle::max_abs_diff(sandwich.real, q_mul(r, o)) > 1e-3);
}

TEST_CASE("error dual quaternion is identity iff poses match") {
  Rng rng(212);
  DualQuaternion a = oracle::random_unit_dq(rng);
  DualQuaternion b = oracle::random_unit_dq(rng);
  CHECK(oracle::max_abs_diff(dq_error(a, a), dq_identity()) < 1e-12);
  CHECK(oracle::max_abs_diff(dq_error(a, b), dq_identity()) > 1e-3);
  CHECK(dq_is_unit(dq_error(a, b), 1e-9));
  CHECK_THROWS_AS(dq_error(DualQuaternion{{2, 0, 0, 0}, {}}, a), DegenerateInput);
}

TEST_CASE("construction requires unit rotations") {
  CHECK_THROWS_AS(dq_from_rot_trans(Quat{2, 0, 0, 0}, Eigen::Vector3d::Zero()), DegenerateInput);
  CHECK_THROWS_AS(dq_from_trans_rot(Quat{0.5, 0, 0, 0}, Eigen::Vector3d::Zero()), DegenerateInput);
}
