#pragma once

// Almost contact structures (phi, eta, xi) carried by the pulled-back
// bundle: axiom and compatibility checks, the contact condition, Nijenhuis
// torsion and the normality tensors, the h and v operators, the
// covariant-derivative identities for phi and xi, and a gated
// classification.
//
// Convention note. The exterior differentials here carry the alternating
// 1/(p+1) weights (see chern.hpp). Under that convention the reference
// structure below satisfies the contact condition with factor 1,
// Phi = d^H eta; the factor-2 form corresponds to the unweighted
// differential. contact_condition() measures both factors and reports the
// one that holds.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "finsler/chern.hpp"
#include "finsler/ehresmann.hpp"
#include "finsler/expression.hpp"
#include "finsler/metric.hpp"
#include "finsler/report.hpp"

namespace finsler {

inline constexpr double kRankCutoff = 1e-8; // singular values below are zero

// Component functions of a candidate structure. phi is a (1,1) block
// phi^i_j, eta a covector, xi a vector; all may depend on x and y.
class ContactTriple {
  public:
    using PhiFn = std::function<JMat(const JetVars&)>;
    using VecFn = std::function<JVec(const JetVars&)>;

    ContactTriple(std::string name, int dim, PhiFn phi, VecFn eta, VecFn xi)
        : name_(std::move(name)), m_(dim), phi_(std::move(phi)), eta_(std::move(eta)),
          xi_(std::move(xi)) {
        if (m_ < 3 || m_ % 2 == 0)
            throw ConfigError("contact structures need odd dimension >= 3");
    }

    const std::string& name() const { return name_; }
    int dim() const { return m_; }
    JMat phi(const JetVars& v) const { return phi_(v); }
    JVec eta(const JetVars& v) const { return eta_(v); }
    JVec xi(const JetVars& v) const { return xi_(v); }

    // eta = (dx3 - x2 dx1)/2, xi = 2 d/dx3, phi e1 = -e2,
    // phi e2 = e1 + x2 e3, phi e3 = 0
    static ContactTriple heisenberg3() {
        auto phi = [](const JetVars& v) {
            JMat f(3, 3, v.constant(0.0));
            f(1, 0) = v.constant(-1.0);
            f(0, 1) = v.constant(1.0);
            f(2, 1) = v.x(1);
            return f;
        };
        auto eta = [](const JetVars& v) {
            JVec e(3, v.constant(0.0));
            e(0) = v.x(1) * (-0.5);
            e(2) = v.constant(0.5);
            return e;
        };
        auto xi = [](const JetVars& v) {
            JVec s(3, v.constant(0.0));
            s(2) = v.constant(2.0);
            return s;
        };
        return ContactTriple("heisenberg3", 3, phi, eta, xi);
    }

    // constant structure adapted to the flat metric; d eta = 0, so the
    // contact condition fails by construction
    static ContactTriple flat3() {
        auto phi = [](const JetVars& v) {
            JMat f(3, 3, v.constant(0.0));
            f(1, 0) = v.constant(-1.0);
            f(0, 1) = v.constant(1.0);
            return f;
        };
        auto eta = [](const JetVars& v) {
            JVec e(3, v.constant(0.0));
            e(2) = v.constant(1.0);
            return e;
        };
        auto xi = [](const JetVars& v) {
            JVec s(3, v.constant(0.0));
            s(2) = v.constant(1.0);
            return s;
        };
        return ContactTriple("flat3", 3, phi, eta, xi);
    }

    // Orthonormalizes (e_m, e_1, e_2, ...) against the fundamental tensor
    // with a fixed pivot order and pairs the transverse directions into a
    // rotation. Every step is smooth in (x, y), so the triple is
    // jet-evaluable; on a non-Riemannian metric it is genuinely
    // y-dependent.
    static ContactTriple adapted(const FinslerMetric& fm) {
        int m = fm.dim();
        auto frame_of = [fm, m](const JetVars& v) {
            Jet f2 = fm.F2(v);
            JMat g(m, m);
            for (int i = 0; i < m; ++i)
                for (int j = i; j < m; ++j) {
                    g(i, j) = f2.derivative(m + i).derivative(m + j) * 0.5;
                    if (j != i) g(j, i) = g(i, j);
                }
            auto dot = [&g, m](const JVec& a, const JVec& b) {
                Jet acc = a(0) * g(0, 0) * b(0);
                for (int i = 0; i < m; ++i)
                    for (int j = 0; j < m; ++j) {
                        if (i == 0 && j == 0) continue;
                        acc += a(i) * g(i, j) * b(j);
                    }
                return acc;
            };
            std::vector<JVec> basis;
            auto push_unit = [&](JVec w) {
                for (const JVec& u : basis) {
                    Jet c = dot(w, u);
                    for (int i = 0; i < m; ++i) w(i) -= c * u(i);
                }
                Jet inv = recip(sqrt(dot(w, w)));
                for (int i = 0; i < m; ++i) w(i) = w(i) * inv;
                basis.push_back(w);
            };
            auto axis = [&v, m](int k) {
                JVec w(m, v.constant(0.0));
                w(k) = v.constant(1.0);
                return w;
            };
            push_unit(axis(m - 1)); // Reeb direction first
            for (int k = 0; k + 1 < m; ++k) push_unit(axis(k));
            return std::pair<JMat, std::vector<JVec>>(g, basis);
        };
        auto phi = [frame_of, m](const JetVars& v) {
            auto [g, basis] = frame_of(v);
            JMat f(m, m, v.constant(0.0));
            auto flat = [&g, m](const JVec& u) { return mat_apply(g, u); };
            for (int k = 0; 2 * k + 2 < m + 1; ++k) {
                const JVec& a = basis[1 + 2 * k];
                const JVec& b = basis[2 + 2 * k];
                JVec af = flat(a), bf = flat(b);
                for (int i = 0; i < m; ++i)
                    for (int j = 0; j < m; ++j) f(i, j) += b(i) * af(j) - a(i) * bf(j);
            }
            return f;
        };
        auto eta = [frame_of, m](const JetVars& v) {
            auto [g, basis] = frame_of(v);
            return mat_apply(g, basis[0]);
        };
        auto xi = [frame_of](const JetVars& v) {
            (void)v;
            return frame_of(v).second[0];
        };
        return ContactTriple("adapted-" + fm.name(), m, phi, eta, xi);
    }

    // component functions given as expression strings in x1..xm, y1..ym;
    // phi is row-major
    static ContactTriple from_expressions(const std::string& name,
                                          const std::vector<std::string>& phi_rows,
                                          const std::vector<std::string>& eta_comps,
                                          const std::vector<std::string>& xi_comps, int m) {
        if (static_cast<int>(phi_rows.size()) != m * m ||
            static_cast<int>(eta_comps.size()) != m || static_cast<int>(xi_comps.size()) != m)
            throw ConfigError("contact triple component count does not match dimension");
        std::vector<Expression> phi_e, eta_e, xi_e;
        for (const auto& s : phi_rows) phi_e.push_back(Expression::parse(s, m));
        for (const auto& s : eta_comps) eta_e.push_back(Expression::parse(s, m));
        for (const auto& s : xi_comps) xi_e.push_back(Expression::parse(s, m));
        auto phi = [phi_e, m](const JetVars& v) {
            JMat f(m, m);
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) f(i, j) = phi_e[static_cast<std::size_t>(i * m + j)].eval(v);
            return f;
        };
        auto eta = [eta_e, m](const JetVars& v) {
            JVec e(m);
            for (int i = 0; i < m; ++i) e(i) = eta_e[static_cast<std::size_t>(i)].eval(v);
            return e;
        };
        auto xi = [xi_e, m](const JetVars& v) {
            JVec s(m);
            for (int i = 0; i < m; ++i) s(i) = xi_e[static_cast<std::size_t>(i)].eval(v);
            return s;
        };
        return ContactTriple(name, m, phi, eta, xi);
    }

  private:
    std::string name_;
    int m_;
    PhiFn phi_;
    VecFn eta_;
    VecFn xi_;
};

// triple components evaluated once at a frame's jet variables
struct ContactData {
    JMat phi;
    JVec eta;
    JVec xi;
};

inline ContactData eval_triple(const Frame& fr, const ContactTriple& t) {
    if (t.dim() != fr.m()) throw ConfigError("contact triple dimension does not match metric");
    return ContactData{t.phi(fr.vars()), t.eta(fr.vars()), t.xi(fr.vars())};
}

inline JVec apply_phi(const ContactData& D, const JVec& X) { return mat_apply(D.phi, X); }

inline Jet eta_of(const ContactData& D, const JVec& X) {
    Jet acc = D.eta(0) * X(0);
    for (int i = 1; i < X.size(); ++i) acc += D.eta(i) * X(i);
    return acc;
}

inline Form1 eta_form(const ContactData& D) {
    return [&D](const JVec& X) { return eta_of(D, X); };
}

inline Endo phi_endo(const ContactData& D) {
    return [&D](const JVec& X) { return apply_phi(D, X); };
}

// Phi(X, Y) = g(X, phi Y)
inline Jet two_form_apply(const Frame& fr, const ContactData& D, const JVec& X, const JVec& Y) {
    return fr.pair_g(X, apply_phi(D, Y));
}

inline Form2 two_form(const Frame& fr, const ContactData& D) {
    return [&fr, &D](const JVec& X, const JVec& Y) { return two_form_apply(fr, D, X, Y); };
}

// ------------------------------------------------------------------
// axiom layer

inline std::vector<CheckEntry> verify_almost_contact(const Frame& fr, const ContactData& D,
                                                     double tol) {
    int m = fr.m();
    double sq = 0.0;
    JMat phi2 = mat_mul(D.phi, D.phi);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            double target = -(i == j ? 1.0 : 0.0) + D.xi(i).value() * D.eta(j).value();
            sq = std::max(sq, std::fabs(phi2(i, j).value() - target));
        }
    double reeb = std::fabs(eta_of(D, D.xi).value() - 1.0);
    std::vector<CheckEntry> out;
    out.push_back(make_entry("contact-axiom-phi-square",
                             "phi squared equals minus identity plus eta tensor xi", fr.point(),
                             sq, tol));
    out.push_back(make_entry("contact-axiom-reeb-normalization",
                             "eta evaluated on xi equals one", fr.point(), reeb, tol));
    return out;
}

inline std::vector<CheckEntry> derived_identities(const Frame& fr, const ContactData& D,
                                                  double tol) {
    int m = fr.m();
    double phixi = max_abs(Frame::values(apply_phi(D, D.xi)));
    double etaphi = 0.0;
    for (int j = 0; j < m; ++j) {
        double acc = 0.0;
        for (int i = 0; i < m; ++i) acc += D.eta(i).value() * D.phi(i, j).value();
        etaphi = std::max(etaphi, std::fabs(acc));
    }
    Eigen::MatrixXd P(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) P(i, j) = D.phi(i, j).value();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(P);
    int rank = 0;
    for (int i = 0; i < m; ++i)
        if (svd.singularValues()(i) > kRankCutoff) ++rank;
    std::vector<CheckEntry> out;
    out.push_back(make_entry("contact-phi-kills-reeb", "phi applied to xi vanishes", fr.point(),
                             phixi, tol));
    out.push_back(make_entry("contact-eta-annihilates-phi-range",
                             "eta composed with phi vanishes", fr.point(), etaphi, tol));
    CheckEntry r = make_entry("contact-phi-rank", "phi has rank one less than the dimension",
                              fr.point(), std::fabs(static_cast<double>(rank - (m - 1))), 0.0);
    r.witness["rank"] = rank;
    for (int i = 0; i < m; ++i) r.witness["singular_values"].push_back(svd.singularValues()(i));
    out.push_back(std::move(r));
    return out;
}

// max |g(phi X, phi Y) - g(X, Y) + eta(X) eta(Y)| over the supplied pairs
inline double compatibility_residual(const Frame& fr, const ContactData& D,
                                     const std::vector<std::pair<Vec, Vec>>& pairs) {
    double worst = 0.0;
    for (const auto& [xc, yc] : pairs) {
        JVec X = fr.constant_field(xc), Y = fr.constant_field(yc);
        Jet r = fr.pair_g(apply_phi(D, X), apply_phi(D, Y)) - fr.pair_g(X, Y) +
                eta_of(D, X) * eta_of(D, Y);
        worst = std::max(worst, std::fabs(r.value()));
    }
    return worst;
}

inline std::vector<std::pair<Vec, Vec>> basis_pairs(int m) {
    std::vector<std::pair<Vec, Vec>> out;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            Vec a(m, 0.0), b(m, 0.0);
            a(i) = 1.0;
            b(j) = 1.0;
            out.emplace_back(a, b);
        }
    return out;
}

// ------------------------------------------------------------------
// contact condition

struct ContactConditionResult {
    double res_h_factor1 = 0.0; // max |Phi - d^H eta|
    double res_h_factor2 = 0.0; // max |Phi - 2 d^H eta|
    double res_v_factor1 = 0.0;
    double res_v_factor2 = 0.0;
    int factor_h = 0; // 1 or 2 when the condition holds horizontally, else 0
    int factor_v = 0;
    double scale = 0.0; // max |Phi| seen, for conditioning the report
};

inline ContactConditionResult contact_condition(const Frame& fr, const ContactData& D,
                                                double tol) {
    ContactConditionResult r;
    Form1 ef = eta_form(D);
    for (const auto& [xc, yc] : basis_pairs(fr.m())) {
        JVec X = fr.constant_field(xc), Y = fr.constant_field(yc);
        double phi2f = two_form_apply(fr, D, X, Y).value();
        double dh = ext_diff_H(fr, ef, X, Y).value();
        double dv = ext_diff_V(fr, ef, X, Y).value();
        r.res_h_factor1 = std::max(r.res_h_factor1, std::fabs(phi2f - dh));
        r.res_h_factor2 = std::max(r.res_h_factor2, std::fabs(phi2f - 2.0 * dh));
        r.res_v_factor1 = std::max(r.res_v_factor1, std::fabs(phi2f - dv));
        r.res_v_factor2 = std::max(r.res_v_factor2, std::fabs(phi2f - 2.0 * dv));
        r.scale = std::max(r.scale, std::fabs(phi2f));
    }
    if (r.res_h_factor1 < tol)
        r.factor_h = 1;
    else if (r.res_h_factor2 < tol)
        r.factor_h = 2;
    if (r.res_v_factor1 < tol)
        r.factor_v = 1;
    else if (r.res_v_factor2 < tol)
        r.factor_v = 2;
    return r;
}

// ------------------------------------------------------------------
// Nijenhuis torsion and the normality tensors

inline JVec nijenhuis_H(const Frame& fr, const JMat& T, const JVec& X, const JVec& Y) {
    JVec TX = mat_apply(T, X), TY = mat_apply(T, Y);
    JVec b = fr.bracket_HH(X, Y);
    return mat_apply(T, mat_apply(T, b)) + fr.bracket_HH(TX, TY) -
           mat_apply(T, fr.bracket_HH(TX, Y)) - mat_apply(T, fr.bracket_HH(X, TY));
}

inline JVec nijenhuis_V(const Frame& fr, const JMat& T, const JVec& X, const JVec& Y) {
    JVec TX = mat_apply(T, X), TY = mat_apply(T, Y);
    JVec b = fr.bracket_VV_theta(X, Y);
    return mat_apply(T, mat_apply(T, b)) + fr.bracket_VV_theta(TX, TY) -
           mat_apply(T, fr.bracket_VV_theta(TX, Y)) - mat_apply(T, fr.bracket_VV_theta(X, TY));
}

inline JVec normality1_H(const Frame& fr, const ContactData& D, const JVec& X, const JVec& Y) {
    Form1 ef = eta_form(D);
    return nijenhuis_H(fr, D.phi, X, Y) + scaled(D.xi, ext_diff_H(fr, ef, X, Y) * 2.0);
}

inline JVec normality1_V(const Frame& fr, const ContactData& D, const JVec& X, const JVec& Y) {
    Form1 ef = eta_form(D);
    return nijenhuis_V(fr, D.phi, X, Y) + scaled(D.xi, ext_diff_V(fr, ef, X, Y) * 2.0);
}

inline Jet normality2_H(const Frame& fr, const ContactData& D, const JVec& X, const JVec& Y) {
    Form1 ef = eta_form(D);
    return lie_H(fr, apply_phi(D, X), ef, Y) - lie_H(fr, apply_phi(D, Y), ef, X);
}

inline Jet normality2_V(const Frame& fr, const ContactData& D, const JVec& X, const JVec& Y) {
    Form1 ef = eta_form(D);
    return lie_V(fr, apply_phi(D, X), ef, Y) - lie_V(fr, apply_phi(D, Y), ef, X);
}

inline JVec normality3_H(const Frame& fr, const ContactData& D, const JVec& X) {
    return lie_H(fr, D.xi, phi_endo(D), X);
}

inline JVec normality3_V(const Frame& fr, const ContactData& D, const JVec& X) {
    return lie_V(fr, D.xi, phi_endo(D), X);
}

inline Jet normality4_H(const Frame& fr, const ContactData& D, const JVec& X) {
    return lie_H(fr, D.xi, eta_form(D), X);
}

inline Jet normality4_V(const Frame& fr, const ContactData& D, const JVec& X) {
    return lie_V(fr, D.xi, eta_form(D), X);
}

// ------------------------------------------------------------------
// the h and v operators (half the Lie derivative of phi along the lifts
// of xi), assembled as matrices from constant basis columns; both are
// tensorial, so columns determine them

inline JMat h_matrix(const Frame& fr, const ContactData& D) {
    int m = fr.m();
    JMat h(m, m);
    for (int j = 0; j < m; ++j) {
        Vec e(m, 0.0);
        e(j) = 1.0;
        JVec col = normality3_H(fr, D, fr.constant_field(e));
        for (int i = 0; i < m; ++i) h(i, j) = col(i) * 0.5;
    }
    return h;
}

inline JMat v_matrix(const Frame& fr, const ContactData& D) {
    int m = fr.m();
    JMat v(m, m);
    for (int j = 0; j < m; ++j) {
        Vec e(m, 0.0);
        e(j) = 1.0;
        JVec col = normality3_V(fr, D, fr.constant_field(e));
        for (int i = 0; i < m; ++i) v(i, j) = col(i) * 0.5;
    }
    return v;
}

// max |(L_xi g)(X, Y)| over the supplied constant pairs; part 'H' or 'V'
inline double killing_residual(const Frame& fr, const ContactData& D, char part,
                               const std::vector<std::pair<Vec, Vec>>& pairs) {
    Form2 gf = [&fr](const JVec& a, const JVec& b) { return fr.pair_g(a, b); };
    double worst = 0.0;
    for (const auto& [xc, yc] : pairs) {
        JVec X = fr.constant_field(xc), Y = fr.constant_field(yc);
        Jet r = (part == 'H') ? lie_H(fr, D.xi, gf, X, Y) : lie_V(fr, D.xi, gf, X, Y);
        worst = std::max(worst, std::fabs(r.value()));
    }
    return worst;
}

// ------------------------------------------------------------------
// covariant-derivative identities

// Both sides of the identity expressing 2 g((nabla_V phi) Y, Z) through
// the differential of the two-form, the normality tensors, the
// differential of eta, and the Cartan corrections. The identity holds for
// every almost contact metric structure, so the residual is a direct
// consistency check of the whole tower.
struct PhiDerivativeTerms {
    double lhs = 0.0;
    double d_two_form_twisted = 0.0; // 3 d^H Phi(pi V, phi Y, phi Z)
    double d_two_form_plain = 0.0;   // -3 d^H Phi(pi V, Y, Z)
    double normality1 = 0.0;         // g(N1_H(Y, Z), phi pi V)
    double normality2 = 0.0;         // N2_H(Y, Z) eta(pi V)
    double d_eta_y = 0.0;            // 2 d^H eta(phi Y, pi V) eta(Z)
    double d_eta_z = 0.0;            // -2 d^H eta(phi Z, pi V) eta(Y)
    double cartan_y = 0.0;           // -2 A(theta V, phi Y, Z)
    double cartan_z = 0.0;           // -2 A(theta V, Y, phi Z)
    double rhs = 0.0;
    double residual = 0.0;
};

inline PhiDerivativeTerms phi_derivative_terms(const Frame& fr, const ContactData& D,
                                               const TTField& V, const JVec& Y, const JVec& Z) {
    PhiDerivativeTerms t;
    Endo pe = phi_endo(D);
    t.lhs = 2.0 * fr.pair_g(nabla_endo(fr, V, pe, Y), Z).value();
    const JVec& piV = V.a;
    Form2 Phi = two_form(fr, D);
    Form1 ef = eta_form(D);
    JVec phiY = apply_phi(D, Y), phiZ = apply_phi(D, Z);
    t.d_two_form_twisted = 3.0 * ext_diff_H(fr, Phi, piV, phiY, phiZ).value();
    t.d_two_form_plain = -3.0 * ext_diff_H(fr, Phi, piV, Y, Z).value();
    t.normality1 = fr.pair_g(normality1_H(fr, D, Y, Z), apply_phi(D, piV)).value();
    t.normality2 = (normality2_H(fr, D, Y, Z) * eta_of(D, piV)).value();
    t.d_eta_y = 2.0 * (ext_diff_H(fr, ef, phiY, piV) * eta_of(D, Z)).value();
    t.d_eta_z = -2.0 * (ext_diff_H(fr, ef, phiZ, piV) * eta_of(D, Y)).value();
    JVec th = fr.theta_apply(V);
    t.cartan_y = -2.0 * fr.cartan(th, phiY, Z).value();
    t.cartan_z = -2.0 * fr.cartan(th, Y, phiZ).value();
    t.rhs = t.d_two_form_twisted + t.d_two_form_plain + t.normality1 + t.normality2 + t.d_eta_y +
            t.d_eta_z + t.cartan_y + t.cartan_z;
    t.residual = std::fabs(t.lhs - t.rhs);
    return t;
}

inline double phi_derivative_residual(const Frame& fr, const ContactData& D, const TTField& V,
                                      const JVec& Y, const JVec& Z) {
    return phi_derivative_terms(fr, D, V, Y, Z).residual;
}

// residual of (nabla_V phi) Y against the characterization
// g(pi V, Y) xi - eta(Y) pi V + phi Asharp(theta V, Y, .) - Asharp(theta V, phi Y, .)
inline double sasakian_residual(const Frame& fr, const ContactData& D, const TTField& V,
                                const JVec& Y) {
    Endo pe = phi_endo(D);
    JVec lhs = nabla_endo(fr, V, pe, Y);
    const JVec& piV = V.a;
    JVec th = fr.theta_apply(V);
    JVec rhs = scaled(D.xi, fr.pair_g(piV, Y)) - scaled(piV, eta_of(D, Y)) +
               apply_phi(D, fr.cartan_sharp(th, Y)) - fr.cartan_sharp(th, apply_phi(D, Y));
    double worst = 0.0;
    for (int i = 0; i < fr.m(); ++i)
        worst = std::max(worst, std::fabs(lhs(i).value() - rhs(i).value()));
    return worst;
}

// nabla_V xi and its residual against
// -phi h(pi V) - phi(pi V) + Asharp(theta V, xi, .) - 2 A(theta V, xi, xi) xi
struct ReebDerivative {
    Vec value;
    double residual = 0.0;
};

inline ReebDerivative nabla_xi(const Frame& fr, const ContactData& D, const JMat& h,
                               const TTField& V) {
    JVec lhs = nabla_vec(fr, V, D.xi);
    const JVec& piV = V.a;
    JVec th = fr.theta_apply(V);
    Jet a_xx = fr.cartan(th, D.xi, D.xi);
    JVec rhs = scaled(apply_phi(D, mat_apply(h, piV)), -1.0) -
               apply_phi(D, piV) + fr.cartan_sharp(th, D.xi) - scaled(D.xi, a_xx * 2.0);
    ReebDerivative out;
    out.value = Frame::values(lhs);
    for (int i = 0; i < fr.m(); ++i)
        out.residual = std::max(out.residual, std::fabs(lhs(i).value() - rhs(i).value()));
    return out;
}

// ------------------------------------------------------------------
// h spectrum structure: anti-commutation with phi, vanishing g-trace,
// eigenvalues in +/- pairs

inline std::vector<CheckEntry> anticommutation_and_trace(const Frame& fr, const ContactData& D,
                                                         const JMat& h, double tol) {
    int m = fr.m();
    JMat hp = mat_mul(h, D.phi);
    JMat ph = mat_mul(D.phi, h);
    double anti = 0.0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            anti = std::max(anti, std::fabs(hp(i, j).value() + ph(i, j).value()));
    double tr = 0.0;
    for (int i = 0; i < m; ++i) tr += h(i, i).value();

    Eigen::MatrixXd H(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) H(i, j) = h(i, j).value();
    Eigen::EigenSolver<Eigen::MatrixXd> es(H);
    std::vector<std::complex<double>> ev(static_cast<std::size_t>(m)),
        nev(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        ev[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
        nev[static_cast<std::size_t>(i)] = -es.eigenvalues()(i);
    }
    auto lex = [](const std::complex<double>& a, const std::complex<double>& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    };
    std::sort(ev.begin(), ev.end(), lex);
    std::sort(nev.begin(), nev.end(), lex);
    double pairing = 0.0;
    for (int i = 0; i < m; ++i)
        pairing = std::max(pairing, std::abs(ev[static_cast<std::size_t>(i)] -
                                             nev[static_cast<std::size_t>(i)]));

    std::vector<CheckEntry> out;
    out.push_back(make_entry("contact-h-anticommutes-phi",
                             "the operator h anti-commutes with phi", fr.point(), anti, tol));
    out.push_back(make_entry("contact-h-traceless", "the operator h has vanishing trace",
                             fr.point(), std::fabs(tr), tol));
    CheckEntry pe = make_entry("contact-h-spectrum-paired",
                               "eigenvalues of h come in opposite-sign pairs", fr.point(),
                               pairing, tol);
    for (int i = 0; i < m; ++i) {
        pe.witness["eigenvalues_re"].push_back(ev[static_cast<std::size_t>(i)].real());
        pe.witness["eigenvalues_im"].push_back(ev[static_cast<std::size_t>(i)].imag());
    }
    out.push_back(std::move(pe));
    return out;
}

// ------------------------------------------------------------------
// classification

struct StructureFlag {
    std::string name;
    bool value = false;
    bool determined = false; // false when gating blocked the evaluation
    double residual = 0.0;
    double tolerance = 0.0;
    Json detail;
};

struct Classification {
    std::vector<StructureFlag> flags;
    const StructureFlag* find(const std::string& n) const {
        for (const auto& f : flags)
            if (f.name == n) return &f;
        return nullptr;
    }
};

// Runs the gated pipeline: axioms, then compatibility, then the contact
// condition, normality, Killing and Sasakian layers. tol1 guards
// first-derivative-level identities, tol2 the second-derivative level.
inline Classification classify(const Frame& fr, const ContactData& D, double tol1, double tol2) {
    Classification c;
    int m = fr.m();
    auto flag = [&c](std::string n, bool v, double r, double tol, Json detail = Json::object()) {
        c.flags.push_back(StructureFlag{std::move(n), v, true, r, tol, std::move(detail)});
    };
    auto blocked = [&c](std::string n, const std::string& why) {
        StructureFlag f;
        f.name = std::move(n);
        f.determined = false;
        f.detail["blocked_on"] = why;
        c.flags.push_back(std::move(f));
    };

    double ax = 0.0;
    for (const auto& e : verify_almost_contact(fr, D, tol1)) ax = std::max(ax, e.residual);
    bool almost = ax < tol1;
    flag("almost-contact", almost, ax, tol1);
    const char* rest[] = {"compatible-metric", "contact-metric-horizontal",
                          "contact-metric-vertical", "normal-horizontal", "normal-vertical",
                          "k-contact-horizontal", "k-contact-vertical", "sasakian-horizontal",
                          "sasakian-vertical"};
    if (!almost) {
        for (const char* n : rest) blocked(n, "almost-contact");
        return c;
    }

    auto pairs = basis_pairs(m);
    double compat = compatibility_residual(fr, D, pairs);
    bool compatible = compat < tol1;
    flag("compatible-metric", compatible, compat, tol1);
    if (!compatible) {
        for (int i = 1; i < 9; ++i) blocked(rest[i], "compatible-metric");
        return c;
    }

    ContactConditionResult cc = contact_condition(fr, D, tol1);
    Json hdet{{"factor", cc.factor_h},
              {"residual_factor1", cc.res_h_factor1},
              {"residual_factor2", cc.res_h_factor2}};
    Json vdet{{"factor", cc.factor_v},
              {"residual_factor1", cc.res_v_factor1},
              {"residual_factor2", cc.res_v_factor2}};
    bool contact_h = cc.factor_h != 0, contact_v = cc.factor_v != 0;
    flag("contact-metric-horizontal", contact_h,
         std::min(cc.res_h_factor1, cc.res_h_factor2), tol1, hdet);
    flag("contact-metric-vertical", contact_v,
         std::min(cc.res_v_factor1, cc.res_v_factor2), tol1, vdet);

    double n1h = 0.0, n1v = 0.0;
    for (const auto& [xc, yc] : pairs) {
        JVec X = fr.constant_field(xc), Y = fr.constant_field(yc);
        n1h = std::max(n1h, max_abs(Frame::values(normality1_H(fr, D, X, Y))));
        n1v = std::max(n1v, max_abs(Frame::values(normality1_V(fr, D, X, Y))));
    }
    flag("normal-horizontal", n1h < tol2, n1h, tol2);
    flag("normal-vertical", n1v < tol2, n1v, tol2);

    double kh = killing_residual(fr, D, 'H', pairs);
    double kv = killing_residual(fr, D, 'V', pairs);
    flag("k-contact-horizontal", contact_h && kh < tol1, kh, tol1,
         Json{{"requires", "contact-metric-horizontal"}});
    flag("k-contact-vertical", contact_v && kv < tol1, kv, tol1,
         Json{{"requires", "contact-metric-vertical"}});

    flag("sasakian-horizontal", contact_h && n1h < tol2, n1h, tol2,
         Json{{"requires", "contact-metric-horizontal"}});
    flag("sasakian-vertical", contact_v && n1v < tol2, n1v, tol2,
         Json{{"requires", "contact-metric-vertical"}});
    return c;
}

} // namespace finsler
