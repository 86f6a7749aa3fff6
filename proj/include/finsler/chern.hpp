#pragma once

// Covariant derivatives along the linear connection whose one-form acts only
// through dx (coefficients Gamma from the Frame), the two connection axioms
// as residual checks, and the horizontal/vertical exterior differentials and
// Lie derivatives built on the lifted brackets.

#include <functional>
#include <vector>

#include "finsler/ehresmann.hpp"
#include "finsler/report.hpp"

namespace finsler {

// scalar-valued tensor closures over fiber fields
using Form1 = std::function<Jet(const JVec&)>;
using Form2 = std::function<Jet(const JVec&, const JVec&)>;
using Endo = std::function<JVec(const JVec&)>;

// (nabla_V Y)^i = V(Y^i) + Gamma^i_jk a^j Y^k, a = dx-part of V.
// Differentiating a pointwise (order-0) component raises OrderError: only
// genuine fields admit covariant derivatives.
inline JVec nabla_vec(const Frame& fr, const TTField& V, const JVec& Y) {
    const int m = fr.m();
    JVec r(m);
    for (int i = 0; i < m; ++i) {
        Jet s = fr.apply(V, Y(i));
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k) s += fr.Gamma()(i, j, k) * V.a(j) * Y(k);
        r(i) = s;
    }
    return r;
}

// (nabla_V T)(X) for a scalar-valued 1-slot tensor (covector) by Leibniz
inline Jet nabla_form1(const Frame& fr, const TTField& V, const Form1& T, const JVec& X) {
    return fr.apply(V, T(X)) - T(nabla_vec(fr, V, X));
}

// (nabla_V T)(X, Y) for a 2-slot tensor
inline Jet nabla_form2(const Frame& fr, const TTField& V, const Form2& T, const JVec& X,
                       const JVec& Y) {
    return fr.apply(V, T(X, Y)) - T(nabla_vec(fr, V, X), Y) - T(X, nabla_vec(fr, V, Y));
}

// (nabla_V phi)(X) for a (1,1)-tensor given as an endomorphism closure
inline JVec nabla_endo(const Frame& fr, const TTField& V, const Endo& phi, const JVec& X) {
    JVec a = nabla_vec(fr, V, phi(X));
    JVec b = phi(nabla_vec(fr, V, X));
    JVec r(fr.m());
    for (int i = 0; i < fr.m(); ++i) r(i) = a(i) - b(i);
    return r;
}

// ---- connection axioms as residuals ----

// Symmetry: nabla_X pi_* Y - nabla_Y pi_* X - pi_*[X, Y] for arbitrary TM0
// fields X, Y. Returns the max component value of the residual fiber field.
inline double chern_symmetry_residual(const Frame& fr, const TTField& X, const TTField& Y) {
    JVec lhs1 = nabla_vec(fr, X, fr.project_pi(Y));
    JVec lhs2 = nabla_vec(fr, Y, fr.project_pi(X));
    JVec br = fr.project_pi(fr.bracket(X, Y));
    double r = 0.0;
    for (int i = 0; i < fr.m(); ++i)
        r = std::fmax(r, std::fabs(lhs1(i).value() - lhs2(i).value() - br(i).value()));
    return r;
}

// Almost g-compatibility: (nabla_X g)(Y, Z) - 2 A(theta(X), Y, Z).
inline double chern_metricity_residual(const Frame& fr, const TTField& X, const JVec& Y,
                                       const JVec& Z) {
    Form2 gform = [&fr](const JVec& a, const JVec& b) { return fr.pair_g(a, b); };
    Jet lhs = nabla_form2(fr, X, gform, Y, Z);
    Jet rhs = fr.cartan(fr.theta_apply(X), Y, Z) * 2.0;
    return std::fabs(lhs.value() - rhs.value());
}

// Both axioms over a batch of probe fields at one point.
inline std::vector<CheckEntry> verify_chern_axioms(const Frame& fr, const JVec& Xbar,
                                                   const JVec& Ybar, const JVec& Zbar,
                                                   double tol) {
    std::vector<CheckEntry> out;
    const BasePoint& p = fr.point();

    TTField XH = fr.lift_H(Xbar), YH = fr.lift_H(Ybar);
    TTField XV = fr.lift_V(Xbar), YV = fr.lift_V(Ybar);

    double sym = std::fmax(chern_symmetry_residual(fr, XH, YH),
                           std::fmax(chern_symmetry_residual(fr, XV, YV),
                                     chern_symmetry_residual(fr, XH, YV)));
    out.push_back(make_entry("chern-symmetry",
                             "torsion-freeness of the connection against the projected bracket",
                             p, sym, tol));

    double metH = chern_metricity_residual(fr, XH, Ybar, Zbar);
    out.push_back(make_entry("chern-metricity-horizontal",
                             "metric derivative along horizontal directions vanishes", p, metH,
                             tol));
    double metV = chern_metricity_residual(fr, XV, Ybar, Zbar);
    out.push_back(make_entry("chern-metricity-vertical",
                             "metric derivative along vertical directions equals twice the Cartan tensor",
                             p, metV, tol));
    return out;
}

// ---- exterior differentials ----
//
// d^H T(X_1..X_{p+1}) = 1/(p+1) [ sum_i (-1)^{i+1} X_i^H(T(..no i..))
//                                + sum_{i<j} (-1)^{i+j} T(pi_*[X_i^H, X_j^H], ..no i,j..) ]
// and d^V likewise with vertical lifts and theta-projected brackets. The
// first sum differentiates the evaluated scalar field.

inline Jet ext_diff_H(const Frame& fr, const Jet& f, const JVec& X) {
    return fr.lift_H_apply(X, f);
}

inline Jet ext_diff_V(const Frame& fr, const Jet& f, const JVec& X) {
    return fr.lift_V_apply(X, f);
}

inline Jet ext_diff_H(const Frame& fr, const Form1& T, const JVec& X, const JVec& Y) {
    Jet s = fr.lift_H_apply(X, T(Y)) - fr.lift_H_apply(Y, T(X)) - T(fr.bracket_HH(X, Y));
    return s * 0.5;
}

inline Jet ext_diff_V(const Frame& fr, const Form1& T, const JVec& X, const JVec& Y) {
    Jet s = fr.lift_V_apply(X, T(Y)) - fr.lift_V_apply(Y, T(X)) - T(fr.bracket_VV_theta(X, Y));
    return s * 0.5;
}

inline Jet ext_diff_H(const Frame& fr, const Form2& T, const JVec& X, const JVec& Y,
                      const JVec& Z) {
    Jet s = fr.lift_H_apply(X, T(Y, Z)) - fr.lift_H_apply(Y, T(X, Z)) +
            fr.lift_H_apply(Z, T(X, Y));
    s -= T(fr.bracket_HH(X, Y), Z);
    s += T(fr.bracket_HH(X, Z), Y);
    s -= T(fr.bracket_HH(Y, Z), X);
    return s * (1.0 / 3.0);
}

inline Jet ext_diff_V(const Frame& fr, const Form2& T, const JVec& X, const JVec& Y,
                      const JVec& Z) {
    Jet s = fr.lift_V_apply(X, T(Y, Z)) - fr.lift_V_apply(Y, T(X, Z)) +
            fr.lift_V_apply(Z, T(X, Y));
    s -= T(fr.bracket_VV_theta(X, Y), Z);
    s += T(fr.bracket_VV_theta(X, Z), Y);
    s -= T(fr.bracket_VV_theta(Y, Z), X);
    return s * (1.0 / 3.0);
}

// ---- Lie derivatives ----

inline Jet lie_H(const Frame& fr, const JVec& X, const Jet& f) {
    return fr.lift_H_apply(X, f);
}

inline Jet lie_V(const Frame& fr, const JVec& X, const Jet& f) {
    return fr.lift_V_apply(X, f);
}

inline JVec lie_H(const Frame& fr, const JVec& X, const JVec& Y) {
    return fr.bracket_HH(X, Y);
}

inline JVec lie_V(const Frame& fr, const JVec& X, const JVec& Y) {
    return fr.bracket_VV_theta(X, Y);
}

// (L^H_X T)(Y) for a covector closure
inline Jet lie_H(const Frame& fr, const JVec& X, const Form1& T, const JVec& Y) {
    return fr.lift_H_apply(X, T(Y)) - T(fr.bracket_HH(X, Y));
}

inline Jet lie_V(const Frame& fr, const JVec& X, const Form1& T, const JVec& Y) {
    return fr.lift_V_apply(X, T(Y)) - T(fr.bracket_VV_theta(X, Y));
}

// (L^H_X T)(Y, Z) for a 2-slot closure
inline Jet lie_H(const Frame& fr, const JVec& X, const Form2& T, const JVec& Y, const JVec& Z) {
    return fr.lift_H_apply(X, T(Y, Z)) - T(fr.bracket_HH(X, Y), Z) - T(Y, fr.bracket_HH(X, Z));
}

inline Jet lie_V(const Frame& fr, const JVec& X, const Form2& T, const JVec& Y, const JVec& Z) {
    return fr.lift_V_apply(X, T(Y, Z)) - T(fr.bracket_VV_theta(X, Y), Z) -
           T(Y, fr.bracket_VV_theta(X, Z));
}

// (L^H_X phi)(Y) for an endomorphism closure
inline JVec lie_H(const Frame& fr, const JVec& X, const Endo& phi, const JVec& Y) {
    JVec a = fr.bracket_HH(X, phi(Y));
    JVec b = phi(fr.bracket_HH(X, Y));
    JVec r(fr.m());
    for (int i = 0; i < fr.m(); ++i) r(i) = a(i) - b(i);
    return r;
}

inline JVec lie_V(const Frame& fr, const JVec& X, const Endo& phi, const JVec& Y) {
    JVec a = fr.bracket_VV_theta(X, phi(Y));
    JVec b = phi(fr.bracket_VV_theta(X, Y));
    JVec r(fr.m());
    for (int i = 0; i < fr.m(); ++i) r(i) = a(i) - b(i);
    return r;
}

} // namespace finsler
