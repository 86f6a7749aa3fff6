#pragma once

// Curvature layer: the curvature operator of the linear connection on the
// pulled-back bundle, its component form, g-orthonormal fiber bases (plain
// and phi-adapted), the horizontal Ricci trace, the two second-derivative
// displays tying h, phi and the curvature together, and flag curvature with
// the distinguished section as transverse edge.
//
// Conventions pinned here and verified by the dual-route tests:
//   * R(X, Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_{[X,Y]} Z for
//     arbitrary fields X, Y on the slit bundle. The bracket of two
//     horizontal lifts has a vertical part; it acts through the connection's
//     vertical action (plain derivative of the components).
//   * Component form: (R(X^H, Y^H)Z)^i = R^i_{jkl} Z^j X^k Y^l with the
//     stored values R^i_{jkl} from the frame.
//   * The Ricci trace is taken in the middle slot,
//     ric(Z, V) = sum_a g(R(V, e_a^H)Z, e_a) over a g-orthonormal basis.
//     With this convention the reference structure has ric(xi, xi^H) = -2n
//     while its flag curvature is +1; the sign differs from the common
//     Riemannian Ricci convention and is recorded in reports.

#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "finsler/contact.hpp"

namespace finsler {

inline JVec curv_op(const Frame& fr, const TTField& X, const TTField& Y, const JVec& Z) {
    JVec a = nabla_vec(fr, X, nabla_vec(fr, Y, Z));
    JVec b = nabla_vec(fr, Y, nabla_vec(fr, X, Z));
    JVec c = nabla_vec(fr, fr.bracket(X, Y), Z);
    return a - b - c;
}

// curvature on two horizontal lifts, the form every identity below uses
inline JVec hh_curvature(const Frame& fr, const JVec& X, const JVec& Y, const JVec& Z) {
    return curv_op(fr, fr.lift_H(X), fr.lift_H(Y), Z);
}

// value-level contraction of the stored component tensor
inline Vec hh_apply_components(const Frame& fr, const Vec& Z, const Vec& X, const Vec& Y) {
    int m = fr.m();
    Vec out(m, 0.0);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k)
                for (int l = 0; l < m; ++l) out(i) += fr.R()(i, j, k, l) * Z(j) * X(k) * Y(l);
    return out;
}

// max |R^i_jkl + R^i_jlk| over all indices; the component tensor is
// antisymmetric in its last pair by construction of any curvature
inline double antisymmetry_residual(const Rank4& R) {
    double w = 0.0;
    int m = R.n;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k)
                for (int l = 0; l < m; ++l) w = std::fmax(w, std::fabs(R(i, j, k, l) + R(i, j, l, k)));
    return w;
}

namespace curvature_detail {

inline Mat g_values(const Frame& fr) {
    int m = fr.m();
    Mat g(m, m, 0.0);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) g(i, j) = fr.g()(i, j).value();
    return g;
}

inline double g_dot(const Mat& g, const Vec& a, const Vec& b) {
    double s = 0.0;
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j) s += g(i, j) * a(i) * b(j);
    return s;
}

} // namespace curvature_detail

// g-orthonormal fiber basis built by Gram-Schmidt from the coordinate basis
inline std::vector<Vec> orthonormal_basis(const Frame& fr) {
    int m = fr.m();
    Mat g = curvature_detail::g_values(fr);
    std::vector<Vec> basis;
    for (int c = 0; c < m; ++c) {
        Vec u(m, 0.0);
        u(c) = 1.0;
        for (const Vec& w : basis) {
            double d = curvature_detail::g_dot(g, u, w);
            for (int i = 0; i < m; ++i) u(i) -= d * w(i);
        }
        double n2 = curvature_detail::g_dot(g, u, u);
        if (n2 <= 0.0) throw StructureError("fundamental tensor not positive definite", n2);
        double inv = 1.0 / std::sqrt(n2);
        for (int i = 0; i < m; ++i) u(i) *= inv;
        basis.push_back(std::move(u));
    }
    return basis;
}

// the adapted basis {X_i, phi X_i, xi}: n unit sections of ker eta together
// with their phi-images and the distinguished section itself
struct PhiBasis {
    std::vector<Vec> x;     // n vectors with eta = 0, g-unit
    std::vector<Vec> xstar; // their phi-images
    Vec xi;                 // the distinguished section (values)

    std::vector<Vec> all() const {
        std::vector<Vec> v = x;
        v.insert(v.end(), xstar.begin(), xstar.end());
        v.push_back(xi);
        return v;
    }
};

inline PhiBasis phi_basis(const Frame& fr, const ContactData& D) {
    int m = fr.m();
    int n = (m - 1) / 2;
    Mat g = curvature_detail::g_values(fr);
    Mat phiv(m, m, 0.0);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) phiv(i, j) = D.phi(i, j).value();
    PhiBasis B;
    B.xi = Frame::values(D.xi);

    std::vector<Vec> acc{B.xi};
    auto project_out = [&](Vec& u) {
        for (const Vec& w : acc) {
            double d = curvature_detail::g_dot(g, u, w) / curvature_detail::g_dot(g, w, w);
            for (int i = 0; i < m; ++i) u(i) -= d * w(i);
        }
    };
    for (int c = 0; c < m && static_cast<int>(B.x.size()) < n; ++c) {
        Vec u(m, 0.0);
        u(c) = 1.0;
        project_out(u);
        double n2 = curvature_detail::g_dot(g, u, u);
        if (n2 < kRankCutoff * kRankCutoff) continue;
        double inv = 1.0 / std::sqrt(n2);
        for (int i = 0; i < m; ++i) u(i) *= inv;
        Vec star(m, 0.0);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) star(i) += phiv(i, j) * u(j);
        B.x.push_back(u);
        B.xstar.push_back(std::move(star));
        acc.push_back(B.x.back());
        acc.push_back(B.xstar.back());
    }
    if (static_cast<int>(B.x.size()) < n)
        throw StructureError("adapted basis construction ran out of independent directions",
                             static_cast<double>(B.x.size()));

    // span test: the 2n+1 vectors must fill the fiber
    Eigen::MatrixXd M(m, m);
    std::vector<Vec> all = B.all();
    for (int c = 0; c < m; ++c)
        for (int r = 0; r < m; ++r) M(r, c) = all[static_cast<std::size_t>(c)](r);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    double smin = svd.singularValues()(m - 1);
    if (smin <= kRankCutoff)
        throw StructureError("adapted basis is degenerate", smin);
    return B;
}

// trace of Y -> R(V, Y^H)Z over an explicit g-orthonormal basis
inline double ricci_trace(const Frame& fr, const JVec& Z, const TTField& V,
                          const std::vector<Vec>& basis) {
    double s = 0.0;
    for (const Vec& e : basis) {
        JVec Ef = fr.constant_field(e);
        s += fr.pair_g(curv_op(fr, V, fr.lift_H(Ef), Z), Ef).value();
    }
    return s;
}

inline double ricci_H(const Frame& fr, const JVec& Z, const TTField& V) {
    return ricci_trace(fr, Z, V, orthonormal_basis(fr));
}

// curvature components and the basis they were sampled with
struct CurvatureSample {
    Rank4 R;
    std::vector<Vec> basis;
};

inline CurvatureSample curvature_sample(const Frame& fr, const ContactData* D = nullptr) {
    CurvatureSample s{fr.R(), {}};
    s.basis = D ? phi_basis(fr, *D).all() : orthonormal_basis(fr);
    return s;
}

// The two displays relating the derivative of h along the horizontal lift of
// the distinguished section to phi, h^2, the curvature and Cartan terms:
//   (nabla_{xi^H} h) X = phi X - h^2 phi X + phi R(xi^H, X^H) xi
//                        + phi A#(theta[xi^H, X^H], xi, .)
//   (R(xi^H, X^H)xi - phi R(xi^H, (phi X)^H)xi)/2
//       = h^2 X + phi^2 A#(theta[xi^H, X^H], xi, .)/2 + phi^2 X
//         + phi A#(theta[xi^H, (phi X)^H], xi, .)/2
struct ProricResiduals {
    double first = 0.0;
    double second = 0.0;
};

inline ProricResiduals proric_residuals(const Frame& fr, const ContactData& D, const JVec& Xbar) {
    JMat h = h_matrix(fr, D);
    Endo he = [&h](const JVec& W) { return mat_apply(h, W); };
    TTField xiH = fr.lift_H(D.xi);
    TTField XH = fr.lift_H(Xbar);
    JVec phiX = apply_phi(D, Xbar);
    JVec th1 = fr.theta_apply(fr.bracket(xiH, XH));
    JVec A1 = fr.cartan_sharp(th1, D.xi);

    JVec lhs1 = nabla_endo(fr, xiH, he, Xbar);
    JVec rhs1 = phiX - mat_apply(h, mat_apply(h, phiX)) +
                apply_phi(D, curv_op(fr, xiH, XH, D.xi)) + apply_phi(D, A1);

    TTField pXH = fr.lift_H(phiX);
    JVec th2 = fr.theta_apply(fr.bracket(xiH, pXH));
    JVec A2 = fr.cartan_sharp(th2, D.xi);
    JVec lhs2 = scaled(curv_op(fr, xiH, XH, D.xi) - apply_phi(D, curv_op(fr, xiH, pXH, D.xi)), 0.5);
    JVec rhs2 = mat_apply(h, mat_apply(h, Xbar)) +
                scaled(apply_phi(D, apply_phi(D, A1)), 0.5) +
                apply_phi(D, apply_phi(D, Xbar)) + scaled(apply_phi(D, A2), 0.5);

    return {max_abs(Frame::values(lhs1 - rhs1)), max_abs(Frame::values(lhs2 - rhs2))};
}

namespace curvature_detail {

// project to ker eta and g-normalize; throws when the edge degenerates
inline Vec normalize_edge(const Frame& fr, const ContactData& D, Vec l) {
    int m = fr.m();
    double pre = 0.0;
    for (int i = 0; i < m; ++i) pre += l(i) * l(i);
    if (std::sqrt(pre) <= kRankCutoff)
        throw StructureError("flag edge is numerically zero", std::sqrt(pre));
    double el = 0.0;
    for (int i = 0; i < m; ++i) el += D.eta(i).value() * l(i);
    Vec xiv = Frame::values(D.xi);
    for (int i = 0; i < m; ++i) l(i) -= el * xiv(i);
    Mat g = g_values(fr);
    double n2 = g_dot(g, l, l);
    if (std::sqrt(std::fmax(n2, 0.0)) <= kRankCutoff)
        throw StructureError("flag edge is parallel to the distinguished section",
                             std::sqrt(std::fmax(n2, 0.0)));
    double inv = 1.0 / std::sqrt(n2);
    for (int i = 0; i < m; ++i) l(i) *= inv;
    return l;
}

} // namespace curvature_detail

// K(l, xi) = g(R(l^H, xi^H) xi, l) for the normalized transverse edge l
inline double flag_curvature(const Frame& fr, const ContactData& D, Vec l) {
    l = curvature_detail::normalize_edge(fr, D, std::move(l));
    JVec L = fr.constant_field(l);
    return fr.pair_g(curv_op(fr, fr.lift_H(L), fr.lift_H(D.xi), D.xi), L).value();
}

// flag curvature of the span (y, l) with the pole along the base direction:
// K = g(R(l^H, u^H) u, l) for u = y/F and l projected g-orthogonal to u and
// g-normalized. Uses the component tensor, so it needs no structure triple.
inline double flag_curvature_span(const Frame& fr, Vec l) {
    int m = fr.m();
    double pre = 0.0;
    for (int i = 0; i < m; ++i) pre += l(i) * l(i);
    if (std::sqrt(pre) <= kRankCutoff)
        throw StructureError("flag edge is numerically zero", std::sqrt(pre));
    Mat g = curvature_detail::g_values(fr);
    Vec u = Frame::values(fr.unit_field());
    double du = curvature_detail::g_dot(g, l, u); // g(u, u) = 1 by construction
    for (int i = 0; i < m; ++i) l(i) -= du * u(i);
    double n2 = curvature_detail::g_dot(g, l, l);
    if (std::sqrt(std::fmax(n2, 0.0)) <= kRankCutoff)
        throw StructureError("flag edge is parallel to the base direction",
                             std::sqrt(std::fmax(n2, 0.0)));
    double inv = 1.0 / std::sqrt(n2);
    for (int i = 0; i < m; ++i) l(i) *= inv;
    Vec rz = hh_apply_components(fr, u, l, u);
    return curvature_detail::g_dot(g, rz, l);
}

// g(phi^2 A#(theta[xi^H, l^H], xi, .), l): the Cartan correction the flag
// computation drops; evaluated separately so its size is always visible
inline double flag_cartan_term(const Frame& fr, const ContactData& D, Vec l) {
    l = curvature_detail::normalize_edge(fr, D, std::move(l));
    JVec L = fr.constant_field(l);
    JVec th = fr.theta_apply(fr.bracket(fr.lift_H(D.xi), fr.lift_H(L)));
    JVec t = apply_phi(D, apply_phi(D, fr.cartan_sharp(th, D.xi)));
    return fr.pair_g(t, L).value();
}

// Both closed forms proposed for ric(xi, xi^H), evaluated against the trace:
//   weighted: -2n + 2 tr h^2 + (1/2) sum_i { A(theta[xi^H, X_i^H], xi, X_i)
//                                  - A(theta[xi^H, (phi X_i)^H], xi, phi X_i) }
//   plain:    -2n + sum_i { same Cartan terms, full weight }
// The two differ unless the Cartan sum vanishes; both are reported.
struct RicciIdentityReport {
    double trace = 0.0;          // ric(xi, xi^H) over the plain orthonormal basis
    double trace_phi_basis = 0.0; // the same trace over the adapted basis
    double rhs_weighted = 0.0;
    double rhs_plain = 0.0;
    double trace_h2 = 0.0;
    double cartan_sum = 0.0;
};

inline RicciIdentityReport k_contact_identity(const Frame& fr, const ContactData& D) {
    int n = (fr.m() - 1) / 2;
    PhiBasis B = phi_basis(fr, D);
    RicciIdentityReport r;
    TTField xiH = fr.lift_H(D.xi);
    r.trace = ricci_trace(fr, D.xi, xiH, orthonormal_basis(fr));
    r.trace_phi_basis = ricci_trace(fr, D.xi, xiH, B.all());

    JMat h = h_matrix(fr, D);
    for (int i = 0; i < fr.m(); ++i)
        for (int k = 0; k < fr.m(); ++k) r.trace_h2 += h(i, k).value() * h(k, i).value();

    for (int i = 0; i < n; ++i) {
        JVec Xi = fr.constant_field(B.x[static_cast<std::size_t>(i)]);
        JVec Xs = fr.constant_field(B.xstar[static_cast<std::size_t>(i)]);
        JVec th_i = fr.theta_apply(fr.bracket(xiH, fr.lift_H(Xi)));
        JVec th_s = fr.theta_apply(fr.bracket(xiH, fr.lift_H(Xs)));
        r.cartan_sum += fr.cartan(th_i, D.xi, Xi).value() - fr.cartan(th_s, D.xi, Xs).value();
    }
    r.rhs_weighted = -2.0 * n + 2.0 * r.trace_h2 + 0.5 * r.cartan_sum;
    r.rhs_plain = -2.0 * n + r.cartan_sum;
    return r;
}

} // namespace finsler
