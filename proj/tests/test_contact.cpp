// Structure tensors on the reference example and the adapted construction.
// Frozen rationals below (1/4, 1/2, -1/8, ...) were hand-derived from the
// closed-form metric and confirmed by an independent numerical probe; the
// vertical-part values are genuine counterexamples and are pinned so a
// regression cannot silently turn them into passes.

#include <gtest/gtest.h>

#include <cmath>

#include "finsler/contact.hpp"

using namespace finsler;

namespace {

const BasePoint kGeneric{{0.3, -0.7, 0.5}, {0.9, 0.4, -0.6}};
const BasePoint kSpecial{{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}};

JVec unit_field(const Frame& fr, int k) {
    Vec e(fr.m(), 0.0);
    e(k) = 1.0;
    return fr.constant_field(e);
}

} // namespace

TEST(ContactTest, HeisenbergAxiomsExact) {
    FinslerMetric fm = FinslerMetric::heisenberg3();
    ContactTriple t = ContactTriple::heisenberg3();
    for (const BasePoint& p : {kGeneric, kSpecial}) {
        Frame fr(fm, p);
        ContactData D = eval_triple(fr, t);
        for (const auto& e : verify_almost_contact(fr, D, 1e-12))
            EXPECT_LT(e.residual, 1e-15) << e.name;
        auto derived = derived_identities(fr, D, 1e-12);
        for (const auto& e : derived) EXPECT_TRUE(e.pass) << e.name;
        EXPECT_EQ(derived.back().witness["rank"], 2);
    }
}

TEST(ContactTest, AdaptedTripleSatisfiesAxioms) {
    for (auto fm : {FinslerMetric::randers3(), FinslerMetric::euclidean(3),
                    FinslerMetric::heisenberg3()}) {
        ContactTriple t = ContactTriple::adapted(fm);
        Frame fr(fm, kGeneric);
        ContactData D = eval_triple(fr, t);
        for (const auto& e : verify_almost_contact(fr, D, 1e-12))
            EXPECT_LT(e.residual, 1e-13) << fm.name() << " " << e.name;
        EXPECT_LT(compatibility_residual(fr, D, basis_pairs(3)), 1e-13) << fm.name();
        for (const auto& e : derived_identities(fr, D, 1e-10))
            EXPECT_TRUE(e.pass) << fm.name() << " " << e.name;
    }
}

TEST(ContactTest, CompatibilityAndTwoForm) {
    FinslerMetric fm = FinslerMetric::heisenberg3();
    Frame fr(fm, kGeneric);
    ContactData D = eval_triple(fr, ContactTriple::heisenberg3());
    EXPECT_LT(compatibility_residual(fr, D, basis_pairs(3)), 1e-15);
    JVec E1 = unit_field(fr, 0), E2 = unit_field(fr, 1);
    // frozen: Phi(e1, e2) = 1/4 everywhere on this structure
    EXPECT_NEAR(two_form_apply(fr, D, E1, E2).value(), 0.25, 1e-15);
    // antisymmetry and phi-image orthogonal to xi, both consequences of
    // compatibility
    for (int i = 0; i < 3; ++i) {
        JVec X = unit_field(fr, i);
        EXPECT_NEAR(two_form_apply(fr, D, X, X).value(), 0.0, 1e-15);
        EXPECT_NEAR(two_form_apply(fr, D, D.xi, X).value(), 0.0, 1e-14);
        for (int j = 0; j < 3; ++j) {
            JVec Y = unit_field(fr, j);
            EXPECT_NEAR(two_form_apply(fr, D, X, Y).value(),
                        -two_form_apply(fr, D, Y, X).value(), 1e-15);
        }
    }
    // mismatched metric: the same triple is not compatible with the flat
    // metric, residual 3/4 at this point
    FinslerMetric eu = FinslerMetric::euclidean(3);
    Frame fe(eu, kGeneric);
    ContactData Dm = eval_triple(fe, ContactTriple::heisenberg3());
    EXPECT_NEAR(compatibility_residual(fe, Dm, basis_pairs(3)), 0.75, 1e-12);
}

TEST(ContactTest, ContactConditionHoldsWithFactorOne) {
    FinslerMetric fm = FinslerMetric::heisenberg3();
    ContactTriple t = ContactTriple::heisenberg3();
    for (const BasePoint& p : {kGeneric, kSpecial}) {
        Frame fr(fm, p);
        ContactData D = eval_triple(fr, t);
        JVec E1 = unit_field(fr, 0), E2 = unit_field(fr, 1);
        Form1 ef = eta_form(D);
        EXPECT_NEAR(ext_diff_H(fr, ef, E1, E2).value(), 0.25, 1e-15);
        ContactConditionResult cc = contact_condition(fr, D, 1e-9);
        EXPECT_EQ(cc.factor_h, 1);
        EXPECT_LT(cc.res_h_factor1, 1e-14);
        EXPECT_NEAR(cc.res_h_factor2, 0.25, 1e-12); // the doubled form fails
        EXPECT_EQ(cc.factor_v, 0);                   // not vertically contact
        EXPECT_GT(cc.res_v_factor1, 0.2);
        EXPECT_GT(cc.res_v_factor2, 0.2);
    }
}

TEST(ContactTest, FlatTripleIsNotContact) {
    FinslerMetric eu = FinslerMetric::euclidean(3);
    Frame fr(eu, kGeneric);
    ContactData D = eval_triple(fr, ContactTriple::flat3());
    // d eta = 0, so the residual equals the norm of the two-form itself
    ContactConditionResult cc = contact_condition(fr, D, 1e-9);
    EXPECT_EQ(cc.factor_h, 0);
    EXPECT_NEAR(cc.res_h_factor1, 1.0, 1e-14);
    EXPECT_NEAR(cc.scale, 1.0, 1e-14);
    // scaling eta scales its differential linearly
    FinslerMetric fm = FinslerMetric::heisenberg3();
    Frame fh(fm, kGeneric);
    ContactData Dh = eval_triple(fh, ContactTriple::heisenberg3());
    ContactData D2 = Dh;
    D2.eta = scaled(Dh.eta, 2.0);
    JVec E1 = unit_field(fh, 0), E2 = unit_field(fh, 1);
    EXPECT_NEAR(ext_diff_H(fh, eta_form(D2), E1, E2).value(),
                2.0 * ext_diff_H(fh, eta_form(Dh), E1, E2).value(), 1e-14);
}

TEST(ContactTest, NijenhuisIdentityAndAntisymmetry) {
    FinslerMetric fm = FinslerMetric::heisenberg3();
    Frame fr(fm, kGeneric);
    ContactData D = eval_triple(fr, ContactTriple::heisenberg3());
    JMat id(3, 3, fr.zero());
    for (int i = 0; i < 3; ++i) id(i, i) = fr.constant(1.0);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            JVec X = unit_field(fr, i), Y = unit_field(fr, j);
            EXPECT_LT(max_abs(Frame::values(nijenhuis_H(fr, id, X, Y))), 1e-15);
            EXPECT_LT(max_abs(Frame::values(nijenhuis_V(fr, id, X, Y))), 1e-13);
            Vec a = Frame::values(nijenhuis_H(fr, D.phi, X, Y));
            Vec b = Frame::values(nijenhuis_H(fr, D.phi, Y, X));
            for (int k = 0; k < 3; ++k) EXPECT_NEAR(a(k), -b(k), 1e-14);
        }
}

TEST(ContactTest, NijenhuisBracketFormMatchesCovariantForm) {
    // for a symmetric connection the torsion of phi can be rewritten with
    // covariant derivatives:
    //   N(X, Y) = phi (nabla_{Y^H} phi) X - phi (nabla_{X^H} phi) Y
    //           + (nabla_{(phi X)^H} phi) Y - (nabla_{(phi Y)^H} phi) X
    FinslerMetric fm = FinslerMetric::heisenberg3();
    Frame fr(fm, kGeneric);
    ContactData D = eval_triple(fr, ContactTriple::heisenberg3());
    Endo pe = phi_endo(D);
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) {
            JVec X = unit_field(fr, i), Y = unit_field(fr, j);
            JVec covariant =
                apply_phi(D, nabla_endo(fr, fr.lift_H(Y), pe, X)) -
                apply_phi(D, nabla_endo(fr, fr.lift_H(X), pe, Y)) +
                nabla_endo(fr, fr.lift_H(apply_phi(D, X)), pe, Y) -
                nabla_endo(fr, fr.lift_H(apply_phi(D, Y)), pe, X);
            Vec direct = Frame::values(nijenhuis_H(fr, D.phi, X, Y));
            for (int k = 0; k < 3; ++k)
                EXPECT_NEAR(direct(k), covariant(k).value(), 1e-12) << i << j << k;
        }
}

TEST(ContactTest, HorizontalNormalityVanishes) {
    FinslerMetric fm = FinslerMetric::heisenberg3();
    ContactTriple t = ContactTriple::heisenberg3();
    for (const BasePoint& p : {kGeneric, kSpecial}) {
        Frame fr(fm, p);
        ContactData D = eval_triple(fr, t);
        for (const auto& [xc, yc] : basis_pairs(3)) {
            JVec X = fr.constant_field(xc), Y = fr.constant_field(yc);
            EXPECT_LT(max_abs(Frame::values(normality1_H(fr, D, X, Y))), 1e-14);
            EXPECT_LT(std::fabs(normality2_H(fr, D, X, Y).value()), 1e-14);
        }
        for (int i = 0; i < 3; ++i) {
            JVec X = unit_field(fr, i);
            EXPECT_LT(max_abs(Frame::values(normality3_H(fr, D, X))), 1e-14);
            EXPECT_LT(std::fabs(normality4_H(fr, D, X).value()), 1e-14);
        }
    }
}

TEST(ContactTest, VerticalNormalityCounterexampleValues) {
    // The vertical analogues do not vanish on this structure: it is not
    // vertically contact, and the vertical conclusions fail with exact
    // rational witnesses. These are regression-pinned measurements.
    FinslerMetric fm = FinslerMetric::heisenberg3();
    Frame fr(fm, kSpecial);
    ContactData D = eval_triple(fr, ContactTriple::heisenberg3());
    JVec E1 = unit_field(fr, 0), E2 = unit_field(fr, 1), E3 = unit_field(fr, 2);
    EXPECT_NEAR(normality4_V(fr, D, E1).value(), 0.5, 1e-14);
    EXPECT_NEAR(normality2_V(fr, D, E2, E3).value(), -0.25, 1e-14);
    // no rescaling of the vertical differential can rescue the condition:
    // d^V eta(e1, e2) = 0 while Phi(e1, e2) = 1/4 at this point
    EXPECT_NEAR(ext_diff_V(fr, eta_form(D), E1, E2).value(), 0.0, 1e-15);
    EXPECT_NEAR(two_form_apply(fr, D, E1, E2).value(), 0.25, 1e-15);
    // xi is horizontally Killing but not vertically Killing
    EXPECT_LT(killing_residual(fr, D, 'H', basis_pairs(3)), 1e-14);
    EXPECT_NEAR(killing_residual(fr, D, 'V', basis_pairs(3)), 0.25, 1e-13);
}

TEST(ContactTest, HOperatorVanishesAndIsWellBehaved) {
    FinslerMetric fm = FinslerMetric::heisenberg3();
    ContactTriple t = ContactTriple::heisenberg3();
    for (const BasePoint& p : {kGeneric, kSpecial}) {
        Frame fr(fm, p);
        ContactData D = eval_triple(fr, t);
        JMat h = h_matrix(fr, D), v = v_matrix(fr, D);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) EXPECT_LT(std::fabs(h(i, j).value()), 1e-14);
        EXPECT_LT(max_abs(Frame::values(mat_apply(h, D.xi))), 1e-14);
        EXPECT_LT(max_abs(Frame::values(mat_apply(v, D.xi))), 1e-13);
        for (const auto& e : anticommutation_and_trace(fr, D, h, 1e-9))
            EXPECT_TRUE(e.pass) << e.name << " " << e.residual;
    }
}

TEST(ContactTest, VOperatorAsymmetryMeasured) {
    // v is not symmetric here; the imbalance is pinned, not asserted away
    FinslerMetric fm = FinslerMetric::heisenberg3();
    Frame fr(fm, kSpecial);
    ContactData D = eval_triple(fr, ContactTriple::heisenberg3());
    JMat v = v_matrix(fr, D);
    JVec E2 = unit_field(fr, 1), E3 = unit_field(fr, 2);
    EXPECT_NEAR(fr.pair_g(mat_apply(v, E2), E3).value(), -0.125, 1e-14);
    EXPECT_NEAR(fr.pair_g(mat_apply(v, E3), E2).value(), 0.0, 1e-14);
}

TEST(ContactTest, HIsTensorial) {
    // columns from constant basis fields determine h: applying the defining
    // Lie expression to a function-scaled field gives the scaled column
    FinslerMetric fm = FinslerMetric::heisenberg3();
    Frame fr(fm, kGeneric);
    ContactData D = eval_triple(fr, ContactTriple::heisenberg3());
    JVec X = unit_field(fr, 0);
    JVec fX(3);
    for (int i = 0; i < 3; ++i) fX(i) = fr.vars().x(1) * X(i);
    Vec a = Frame::values(normality3_H(fr, D, fX));
    Vec b = Frame::values(normality3_H(fr, D, X));
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(a(i), kGeneric.x[1] * b(i), 1e-13);
}

TEST(ContactTest, NonKillingFieldIsFlagged) {
    FinslerMetric fm = FinslerMetric::heisenberg3();
    Frame fr(fm, kGeneric);
    ContactData D = eval_triple(fr, ContactTriple::heisenberg3());
    ContactData Dbad = D;
    Dbad.xi = scaled(D.xi, fr.vars().x(0)); // coordinate-scaled Reeb field
    EXPECT_GT(killing_residual(fr, Dbad, 'H', basis_pairs(3)), 1e-2);
}

TEST(ContactTest, PhiDerivativeIdentityHorizontal) {
    // the full display holds to machine precision for horizontal directions
    // on both a Riemannian and a genuinely Finslerian structure
    {
        FinslerMetric fm = FinslerMetric::heisenberg3();
        Frame fr(fm, kGeneric);
        ContactData D = eval_triple(fr, ContactTriple::heisenberg3());
        for (const auto& [xc, yc] : basis_pairs(3))
            for (int k = 0; k < 3; ++k) {
                JVec X = fr.constant_field(xc), Y = fr.constant_field(yc);
                PhiDerivativeTerms t =
                    phi_derivative_terms(fr, D, fr.lift_H(X), Y, unit_field(fr, k));
                EXPECT_LT(t.residual, 1e-13);
            }
    }
    {
        FinslerMetric fm = FinslerMetric::randers3();
        Frame fr(fm, kGeneric);
        ContactData D = eval_triple(fr, ContactTriple::adapted(fm));
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                PhiDerivativeTerms t = phi_derivative_terms(
                    fr, D, fr.lift_H(unit_field(fr, i)), unit_field(fr, j), unit_field(fr, 2));
                EXPECT_LT(t.residual, 1e-12) << i << j;
            }
    }
}

TEST(ContactTest, PhiDerivativeVerticalIsNotAnIdentity) {
    // vertical directions: exact on the x-dependent Riemannian structure,
    // but genuinely violated for a y-dependent triple; the imbalance is
    // measured, not asserted
    FinslerMetric heis = FinslerMetric::heisenberg3();
    Frame fh(heis, kGeneric);
    ContactData Dh = eval_triple(fh, ContactTriple::heisenberg3());
    double worst_h = 0.0;
    for (int i = 0; i < 3; ++i)
        worst_h = std::max(worst_h, phi_derivative_residual(fh, Dh, fh.lift_V(unit_field(fh, i)),
                                                            unit_field(fh, 1), unit_field(fh, 2)));
    EXPECT_LT(worst_h, 1e-13);

    FinslerMetric rd = FinslerMetric::randers3();
    Frame fr(rd, kGeneric);
    ContactData D = eval_triple(fr, ContactTriple::adapted(rd));
    double worst = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            worst = std::max(worst, phi_derivative_residual(fr, D, fr.lift_V(unit_field(fr, i)),
                                                            unit_field(fr, j), unit_field(fr, 2)));
    EXPECT_GT(worst, 1e-3); // the vertical display constrains the triple
}

TEST(ContactTest, SasakianCharacterizationHeisenberg) {
    FinslerMetric fm = FinslerMetric::heisenberg3();
    ContactTriple t = ContactTriple::heisenberg3();
    for (const BasePoint& p : {kGeneric, kSpecial}) {
        Frame fr(fm, p);
        ContactData D = eval_triple(fr, t);
        JMat h = h_matrix(fr, D);
        for (const auto& [xc, yc] : basis_pairs(3)) {
            JVec X = fr.constant_field(xc), Y = fr.constant_field(yc);
            EXPECT_LT(sasakian_residual(fr, D, fr.lift_H(X), Y), 1e-13);
            EXPECT_LT(sasakian_residual(fr, D, fr.lift_V(X), Y), 1e-13);
        }
        // nabla_V xi = -phi pi(V) here (h = 0, no Cartan part)
        for (int i = 0; i < 3; ++i) {
            TTField V = fr.lift_H(unit_field(fr, i));
            ReebDerivative r = nabla_xi(fr, D, h, V);
            EXPECT_LT(r.residual, 1e-13);
            Vec expect = Frame::values(apply_phi(D, V.a));
            for (int k = 0; k < 3; ++k) EXPECT_NEAR(r.value(k), -expect(k), 1e-13);
            EXPECT_LT(nabla_xi(fr, D, h, fr.lift_V(unit_field(fr, i))).residual, 1e-13);
        }
        // the Reeb direction is parallel along its own horizontal lift and
        // phi is parallel along it
        TTField xiH = fr.lift_H(D.xi);
        EXPECT_LT(nabla_xi(fr, D, h, xiH).residual, 1e-13);
        EXPECT_LT(max_abs(Frame::values(nabla_vec(fr, xiH, D.xi))), 1e-13);
        for (int i = 0; i < 3; ++i)
            EXPECT_LT(max_abs(Frame::values(
                          nabla_endo(fr, xiH, phi_endo(D), unit_field(fr, i)))),
                      1e-13);
    }
}

TEST(ContactTest, ClassificationFlags) {
    FinslerMetric heis = FinslerMetric::heisenberg3();
    Frame fr(heis, kGeneric);
    Classification c =
        classify(fr, eval_triple(fr, ContactTriple::heisenberg3()), 1e-6, 1e-5);
    auto expect_flag = [&c](const std::string& n, bool v) {
        const StructureFlag* f = c.find(n);
        ASSERT_NE(f, nullptr) << n;
        EXPECT_TRUE(f->determined) << n;
        EXPECT_EQ(f->value, v) << n;
    };
    expect_flag("almost-contact", true);
    expect_flag("compatible-metric", true);
    expect_flag("contact-metric-horizontal", true);
    expect_flag("contact-metric-vertical", false);
    expect_flag("normal-horizontal", true);
    expect_flag("normal-vertical", false);
    expect_flag("k-contact-horizontal", true);
    expect_flag("k-contact-vertical", false);
    expect_flag("sasakian-horizontal", true);
    expect_flag("sasakian-vertical", false);
    EXPECT_EQ(c.find("contact-metric-horizontal")->detail["factor"], 1);

    // flat counterexample: almost contact and compatible but not contact
    FinslerMetric eu = FinslerMetric::euclidean(3);
    Frame fe(eu, kGeneric);
    Classification cf = classify(fe, eval_triple(fe, ContactTriple::flat3()), 1e-6, 1e-5);
    EXPECT_TRUE(cf.find("almost-contact")->value);
    EXPECT_TRUE(cf.find("compatible-metric")->value);
    EXPECT_FALSE(cf.find("contact-metric-horizontal")->value);
    EXPECT_NEAR(cf.find("contact-metric-horizontal")->residual, 1.0, 1e-12);
    EXPECT_FALSE(cf.find("k-contact-horizontal")->value);

    // mismatched pair: compatibility fails and the rest is blocked
    Classification cm =
        classify(fe, eval_triple(fe, ContactTriple::heisenberg3()), 1e-6, 1e-5);
    EXPECT_TRUE(cm.find("almost-contact")->value);
    EXPECT_FALSE(cm.find("compatible-metric")->value);
    EXPECT_NEAR(cm.find("compatible-metric")->residual, 0.75, 1e-12);
    EXPECT_FALSE(cm.find("sasakian-horizontal")->determined);
    EXPECT_EQ(cm.find("sasakian-horizontal")->detail["blocked_on"], "compatible-metric");
}

TEST(ContactTest, BrokenTriplesAreFlagged) {
    FinslerMetric fm = FinslerMetric::heisenberg3();
    Frame fr(fm, kGeneric);
    ContactData D = eval_triple(fr, ContactTriple::heisenberg3());
    // rescaled Reeb vector: eta(xi) lands at 2, residual exactly 1
    ContactData Dscaled = D;
    Dscaled.xi = scaled(D.xi, 2.0);
    auto entries = verify_almost_contact(fr, Dscaled, 1e-12);
    EXPECT_NEAR(entries[1].residual, 1.0, 1e-15);
    EXPECT_FALSE(entries[1].pass);
    // zeroed phi cannot satisfy the square axiom in dimension > 1
    ContactData Dzero = D;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) Dzero.phi(i, j) = fr.zero();
    auto z = verify_almost_contact(fr, Dzero, 1e-12);
    EXPECT_GE(z[0].residual, 1.0);
    // a killed column drops the rank below 2n and the rank check fails
    ContactData Dcol = D;
    for (int i = 0; i < 3; ++i) Dcol.phi(i, 0) = fr.zero();
    auto de = derived_identities(fr, Dcol, 1e-12);
    EXPECT_EQ(de.back().witness["rank"], 1);
    EXPECT_FALSE(de.back().pass);
}

TEST(ContactTest, ExpressionTripleMatchesBuiltin) {
    std::vector<std::string> phi = {"0", "1", "0",
                                    "0 - 1", "0", "0",
                                    "0", "x2", "0"};
    std::vector<std::string> eta = {"0 - x2/2", "0", "1/2"};
    std::vector<std::string> xi = {"0", "0", "2"};
    ContactTriple t = ContactTriple::from_expressions("custom", phi, eta, xi, 3);
    FinslerMetric fm = FinslerMetric::heisenberg3();
    Frame fr(fm, kGeneric);
    ContactData A = eval_triple(fr, t);
    ContactData B = eval_triple(fr, ContactTriple::heisenberg3());
    for (int i = 0; i < 3; ++i) {
        EXPECT_DOUBLE_EQ(A.eta(i).value(), B.eta(i).value());
        EXPECT_DOUBLE_EQ(A.xi(i).value(), B.xi(i).value());
        for (int j = 0; j < 3; ++j)
            EXPECT_DOUBLE_EQ(A.phi(i, j).value(), B.phi(i, j).value());
    }
    EXPECT_THROW(ContactTriple::from_expressions("bad", phi, eta, xi, 5), ConfigError);
    EXPECT_THROW(ContactTriple("even", 4, nullptr, nullptr, nullptr), ConfigError);
}
