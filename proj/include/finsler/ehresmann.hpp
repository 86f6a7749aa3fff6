#pragma once

// The horizontal/vertical machinery over one base point: fundamental tensor,
// spray, nonlinear connection, connection coefficients and hh-curvature, all
// carried as jet fields so that any later operator can still differentiate
// them.
//
// Order bookkeeping (jet budget 5 for F^2):
//   g    = (1/2) d^2 F^2 / dy dy            -> order 3
//   A    = (F/4) d^3 F^2 / dy dy dy         -> order 2
//   G^i  = (1/4) g^{il}(2 d_k g_{jl} - d_l g_{jk}) y^j y^k  -> order 2
//   N^i_j = dG^i/dy^j                        -> order 1
//   Gamma^i_jk = (1/2) g^{is}(dlt_j g_sk + dlt_k g_sj - dlt_s g_jk) -> order 1
//   R^i_{j kl} = dlt_k Gamma^i_jl - dlt_l Gamma^i_jk + [Gamma,Gamma] -> values
// where dlt_j = d/dx^j - N^k_j d/dy^k is the horizontal basis derivative.

#include <vector>

#include "finsler/jet.hpp"
#include "finsler/linalg.hpp"
#include "finsler/metric.hpp"

namespace finsler {

using JVec = VecT<Jet>;
using JMat = MatT<Jet>;
using JCube = CubeT<Jet>;

// A tangent vector field on TM0 in coordinate components: a^j d/dx^j + b^k d/dy^k.
struct TTField {
    JVec a, b;
};

class Frame {
public:
    Frame(const FinslerMetric& fm, const BasePoint& p, int jet_order = kMaxJetOrder)
        : fm_(&fm), p_(p), m_(fm.dim()), jv_(make_jet_vars(p, jet_order)) {
        if (jet_order < kMinJetOrder)
            throw OrderError("the connection tower needs jet order >= " +
                             std::to_string(kMinJetOrder) + ", got " + std::to_string(jet_order));
        build();
    }

    int m() const { return m_; }
    const BasePoint& point() const { return p_; }
    const FinslerMetric& metric() const { return *fm_; }
    const JetVars& vars() const { return jv_; }
    int jet_order() const { return jv_.order; }

    // Derivative budget thresholds. The tower g -> spray -> N -> Gamma
    // consumes four derivative levels of the squared norm; the curvature
    // (one more horizontal derivative of Gamma, and likewise the nested
    // covariant derivatives of the operator form) consumes a fifth.
    static constexpr int kMinJetOrder = 4;
    static constexpr int kOrderForCurvature = 5;
    bool has_curvature() const { return jet_order() >= kOrderForCurvature; }

    const Jet& F2() const { return F2_; }
    const Jet& F() const { return F_; }
    const JMat& g() const { return g_; }
    const JMat& ginv() const { return ginv_; }
    const JCube& A() const { return A_; }
    const JVec& spray() const { return G_; }
    const JMat& N() const { return N_; }
    const JCube& Gamma() const { return Gamma_; }

    // hh-curvature values at the base point.
    const Rank4& R() const {
        if (!has_curvature())
            throw OrderError("curvature needs jet order >= " +
                             std::to_string(kOrderForCurvature) + ", frame was built at " +
                             std::to_string(jet_order()));
        return R_;
    }

    // ---- scalar-field calculus ----

    Jet dx(const Jet& s, int j) const { return s.derivative(j); }
    Jet dy(const Jet& s, int j) const { return s.derivative(m_ + j); }

    // horizontal basis derivative: dlt_j s = ds/dx^j - N^k_j ds/dy^k
    Jet delta(const Jet& s, int j) const {
        Jet r = s.derivative(j);
        for (int k = 0; k < m_; ++k) r -= N_(k, j) * s.derivative(m_ + k);
        return r;
    }

    Jet zero() const { return jv_.constant(0.0); }
    Jet constant(double v) const { return jv_.constant(v); }

    JVec zero_field() const {
        JVec z(m_);
        for (int i = 0; i < m_; ++i) z(i) = zero();
        return z;
    }

    JVec constant_field(const Vec& v) const {
        JVec r(m_);
        for (int i = 0; i < m_; ++i) r(i) = constant(v(i));
        return r;
    }

    // the canonical fiber coordinate field y^i and the unit section l = y/F
    JVec y_field() const {
        JVec r(m_);
        for (int i = 0; i < m_; ++i) r(i) = jv_.y(i);
        return r;
    }

    JVec unit_field() const {
        JVec r(m_);
        Jet invF = recip(F_);
        for (int i = 0; i < m_; ++i) r(i) = jv_.y(i) * invF;
        return r;
    }

    // ---- lifts, projections, brackets ----

    // X^H(s) = X^i dlt_i s  (derivation along the horizontal lift)
    Jet lift_H_apply(const JVec& X, const Jet& s) const {
        Jet r = zero();
        for (int i = 0; i < m_; ++i) r += X(i) * delta(s, i);
        return r;
    }

    // X^V(s) = F X^i ds/dy^i  (derivation along the vertical lift)
    Jet lift_V_apply(const JVec& X, const Jet& s) const {
        Jet r = zero();
        for (int i = 0; i < m_; ++i) r += X(i) * dy(s, i);
        return F_ * r;
    }

    // coordinate components of the lifts as TM0 vector fields
    TTField lift_H(const JVec& X) const {
        TTField v;
        v.a = X;
        v.b = JVec(m_);
        for (int k = 0; k < m_; ++k) {
            Jet s = zero();
            for (int j = 0; j < m_; ++j) s += N_(k, j) * X(j);
            v.b(k) = -s;
        }
        return v;
    }

    TTField lift_V(const JVec& X) const {
        TTField v;
        v.a = zero_field();
        v.b = JVec(m_);
        for (int k = 0; k < m_; ++k) v.b(k) = F_ * X(k);
        return v;
    }

    // pi_*(a d/dx + b d/dy) = a
    JVec project_pi(const TTField& v) const { return v.a; }

    // theta(a d/dx + b d/dy)^i = (1/F)(b^i + N^i_j a^j)
    JVec theta_apply(const TTField& v) const {
        JVec r(m_);
        Jet invF = recip(F_);
        for (int i = 0; i < m_; ++i) {
            Jet s = v.b(i);
            for (int j = 0; j < m_; ++j) s += N_(i, j) * v.a(j);
            r(i) = invF * s;
        }
        return r;
    }

    // derivation along an arbitrary TM0 field: V(s) = a^j ds/dx^j + b^k ds/dy^k
    Jet apply(const TTField& v, const Jet& s) const {
        Jet r = zero();
        for (int j = 0; j < m_; ++j) r += v.a(j) * s.derivative(j);
        for (int k = 0; k < m_; ++k) r += v.b(k) * s.derivative(m_ + k);
        return r;
    }

    // raw coordinate Lie bracket on TM0: [X, Y] = (X.d)Y - (Y.d)X over all
    // 2m components; lifted brackets are this pushed through pi_* or theta.
    TTField bracket(const TTField& X, const TTField& Y) const {
        TTField r;
        r.a = JVec(m_);
        r.b = JVec(m_);
        for (int i = 0; i < m_; ++i) {
            r.a(i) = apply(X, Y.a(i)) - apply(Y, X.a(i));
            r.b(i) = apply(X, Y.b(i)) - apply(Y, X.b(i));
        }
        return r;
    }

    // pi_*[X^H, Y^H]
    JVec bracket_HH(const JVec& X, const JVec& Y) const {
        return project_pi(bracket(lift_H(X), lift_H(Y)));
    }

    // theta[X^V, Y^V]
    JVec bracket_VV_theta(const JVec& X, const JVec& Y) const {
        return theta_apply(bracket(lift_V(X), lift_V(Y)));
    }

    // ---- metric pairings on fiber fields ----

    Jet pair_g(const JVec& X, const JVec& Y) const {
        Jet r = zero();
        for (int i = 0; i < m_; ++i)
            for (int j = 0; j < m_; ++j) r += g_(i, j) * X(i) * Y(j);
        return r;
    }

    Jet cartan(const JVec& X, const JVec& Y, const JVec& Z) const {
        Jet r = zero();
        for (int i = 0; i < m_; ++i)
            for (int j = 0; j < m_; ++j)
                for (int k = 0; k < m_; ++k) r += A_(i, j, k) * X(i) * Y(j) * Z(k);
        return r;
    }

    // A#(X, Y, .)^i = g^{is} A_sjk X^j Y^k  (index raised on the first slot)
    JVec cartan_sharp(const JVec& X, const JVec& Y) const {
        JVec r(m_);
        for (int i = 0; i < m_; ++i) {
            Jet s = zero();
            for (int t = 0; t < m_; ++t)
                for (int j = 0; j < m_; ++j)
                    for (int k = 0; k < m_; ++k) s += ginv_(i, t) * A_(t, j, k) * X(j) * Y(k);
            r(i) = s;
        }
        return r;
    }

    // ---- value extraction at the base point ----

    static Vec values(const JVec& v) {
        Vec r(v.size());
        for (int i = 0; i < v.size(); ++i) r(i) = v(i).value();
        return r;
    }

    static Mat values(const JMat& v) {
        Mat r(v.n, v.m);
        for (int i = 0; i < v.n; ++i)
            for (int j = 0; j < v.m; ++j) r(i, j) = v(i, j).value();
        return r;
    }

    static Cube values(const JCube& v) {
        Cube r(v.n);
        for (int i = 0; i < v.n; ++i)
            for (int j = 0; j < v.n; ++j)
                for (int k = 0; k < v.n; ++k) r(i, j, k) = v(i, j, k).value();
        return r;
    }

private:
    void build() {
        F2_ = fm_->F2(jv_);
        if (!(F2_.value() > 0.0))
            throw DomainError("F^2 must be positive on the slit bundle");
        F_ = sqrt(F2_);

        // fundamental tensor as an order-3 jet field
        g_ = JMat(m_, m_);
        for (int i = 0; i < m_; ++i) {
            Jet di = F2_.derivative(m_ + i);
            for (int j = i; j < m_; ++j) {
                Jet v = di.derivative(m_ + j) * 0.5;
                g_(i, j) = v;
                g_(j, i) = v;
            }
        }
        {
            Mat g0 = values(g_);
            double lo = min_eigenvalue_sym(g0);
            if (lo < kPosDefThreshold)
                throw StructureError("fundamental tensor is not positive definite", lo);
        }
        ginv_ = inverse(g_);

        // Cartan tensor as an order-2 jet field
        A_ = JCube(m_);
        Jet Ftr = F_.truncated(2);
        for (int i = 0; i < m_; ++i)
            for (int j = i; j < m_; ++j) {
                Jet dij = F2_.derivative(m_ + i).derivative(m_ + j);
                for (int k = j; k < m_; ++k) {
                    Jet v = Ftr * dij.derivative(m_ + k) * 0.25;
                    A_(i, j, k) = v;
                    A_(i, k, j) = v;
                    A_(j, i, k) = v;
                    A_(j, k, i) = v;
                    A_(k, i, j) = v;
                    A_(k, j, i) = v;
                }
            }

        // spray G^i = (1/4) g^{il}(2 d_k g_{jl} - d_l g_{jk}) y^j y^k
        std::vector<JMat> dgdx;
        dgdx.reserve(static_cast<std::size_t>(m_));
        for (int k = 0; k < m_; ++k) {
            JMat d(m_, m_);
            for (int i = 0; i < m_; ++i)
                for (int j = 0; j < m_; ++j) d(i, j) = g_(i, j).derivative(k);
            dgdx.push_back(std::move(d));
        }
        G_ = JVec(m_);
        JVec rhs(m_); // rhs_l = (2 d_k g_{jl} - d_l g_{jk}) y^j y^k
        for (int l = 0; l < m_; ++l) {
            Jet s = zero();
            for (int j = 0; j < m_; ++j)
                for (int k = 0; k < m_; ++k) {
                    Jet t = dgdx[static_cast<std::size_t>(k)](j, l) * 2.0 -
                            dgdx[static_cast<std::size_t>(l)](j, k);
                    s += t * jv_.y(j) * jv_.y(k);
                }
            rhs(l) = s;
        }
        for (int i = 0; i < m_; ++i) {
            Jet s = zero();
            for (int l = 0; l < m_; ++l) s += ginv_(i, l) * rhs(l);
            G_(i) = s * 0.25;
        }

        // nonlinear connection N^i_j = dG^i/dy^j
        N_ = JMat(m_, m_);
        for (int i = 0; i < m_; ++i)
            for (int j = 0; j < m_; ++j) N_(i, j) = G_(i).derivative(m_ + j);

        // Chern coefficients via horizontal derivatives of g
        JCube dl_g(m_); // dl_g(j, s, k) = dlt_j g_sk
        for (int j = 0; j < m_; ++j)
            for (int s = 0; s < m_; ++s)
                for (int k = 0; k < m_; ++k) dl_g(j, s, k) = delta(g_(s, k), j);
        Gamma_ = JCube(m_);
        for (int i = 0; i < m_; ++i)
            for (int j = 0; j < m_; ++j)
                for (int k = 0; k < m_; ++k) {
                    Jet s = zero();
                    for (int t = 0; t < m_; ++t)
                        s += ginv_(i, t) * (dl_g(j, t, k) + dl_g(k, t, j) - dl_g(t, j, k));
                    Gamma_(i, j, k) = s * 0.5;
                }

        // hh-curvature values:
        // R^i_{j kl} = dlt_k Gamma^i_jl - dlt_l Gamma^i_jk
        //              + Gamma^i_km Gamma^m_jl - Gamma^i_lm Gamma^m_jk
        // (skipped below the derivative budget; R() then refuses access)
        if (!has_curvature()) return;
        R_ = Rank4(m_);
        for (int i = 0; i < m_; ++i)
            for (int j = 0; j < m_; ++j)
                for (int k = 0; k < m_; ++k)
                    for (int l = 0; l < m_; ++l) {
                        double v = delta(Gamma_(i, j, l), k).value() -
                                   delta(Gamma_(i, j, k), l).value();
                        for (int mm = 0; mm < m_; ++mm)
                            v += Gamma_(i, k, mm).value() * Gamma_(mm, j, l).value() -
                                 Gamma_(i, l, mm).value() * Gamma_(mm, j, k).value();
                        R_(i, j, k, l) = v;
                    }
    }

    const FinslerMetric* fm_;
    BasePoint p_;
    int m_;
    JetVars jv_;
    Jet F2_, F_;
    JMat g_, ginv_, N_;
    JCube A_, Gamma_;
    JVec G_;
    Rank4 R_;
};

// Connection data at a point, extracted for reporting.
struct ConnectionData {
    Vec G;
    Mat N;
    Cube Gamma;
};

inline ConnectionData connection_data(const Frame& fr) {
    ConnectionData cd;
    cd.G = Frame::values(fr.spray());
    cd.N = Frame::values(fr.N());
    cd.Gamma = Frame::values(fr.Gamma());
    return cd;
}

} // namespace finsler
