#pragma once

// Finsler structure catalog: built-in metrics, user expressions, and the
// fundamental / Cartan tensors with their structure checks.
//
// Every metric carries one algebraic definition instantiated twice, over
// plain doubles and over jets, so the value path and the derivative path can
// never drift apart.

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "finsler/errors.hpp"
#include "finsler/expression.hpp"
#include "finsler/jet.hpp"
#include "finsler/linalg.hpp"
#include "finsler/point.hpp"
#include "finsler/report.hpp"

namespace finsler {

enum class MetricKind { Euclidean, Riemannian, Randers, Expr };

inline const char* to_string(MetricKind k) {
    switch (k) {
        case MetricKind::Euclidean: return "euclidean";
        case MetricKind::Riemannian: return "riemannian";
        case MetricKind::Randers: return "randers";
        case MetricKind::Expr: return "expression";
    }
    return "?";
}

// Threshold below which the fundamental tensor counts as degenerate.
inline constexpr double kPosDefThreshold = 1e-10;

class FinslerMetric {
public:
    int dim() const { return m_; }
    MetricKind kind() const { return kind_; }
    const std::string& name() const { return name_; }

    // Multiplier applied to identity tolerances for this metric (genuinely
    // Finslerian examples burn more jet depth, so residuals run larger).
    double tol_factor() const { return tol_factor_; }

    double F(const BasePoint& p) const {
        validate_point(p);
        return f_val_(p);
    }
    Jet F(const JetVars& jv) const { return f_jet_(jv); }

    double F2(const BasePoint& p) const {
        validate_point(p);
        return f2_val_(p);
    }
    Jet F2(const JetVars& jv) const { return f2_jet_(jv); }

    // Component functions g_ij(x) when the metric is Riemannian; used by the
    // x-only reduction oracle. Empty otherwise.
    const std::function<Mat(const std::vector<double>&)>& metric_components() const {
        return g_of_x_;
    }

    const std::string& expression_source() const { return expr_src_; }

    // ---- built-ins ----

    static FinslerMetric euclidean(int m) {
        FinslerMetric fm(m, MetricKind::Euclidean, "euclidean");
        fm.install(
            [m](const auto& vars) {
                auto q = quad_y(vars, m);
                using std::sqrt;
                return sqrt(q);
            },
            [m](const auto& vars) { return quad_y(vars, m); });
        return fm;
    }

    // Riemannian metric from templated component builder g(x) (m x m).
    template <typename GFn>
    static FinslerMetric riemannian(int m, std::string name, GFn g) {
        FinslerMetric fm(m, MetricKind::Riemannian, std::move(name));
        fm.install(
            [m, g](const auto& vars) {
                auto q = riem_quad(vars, m, g);
                using std::sqrt;
                return sqrt(q);
            },
            [m, g](const auto& vars) { return riem_quad(vars, m, g); });
        fm.g_of_x_ = [m, g](const std::vector<double>& x) -> Mat { return g(x); };
        return fm;
    }

    // The canonical 3-dimensional testbed: g = (1/4)((dx1)^2 + (dx2)^2) + eta (x) eta
    // with eta = (1/2)(dx3 - x2 dx1), so the triple below is its natural
    // contact structure.
    static FinslerMetric heisenberg3() {
        auto g = [](const auto& x) {
            using T = std::decay_t<decltype(x[0])>;
            const T& b = x[1];
            MatT<T> gm(3, 3);
            T zero = b * 0.0;
            T quarter = zero + 0.25;
            gm(0, 0) = (b * b + 1.0) * 0.25;
            gm(0, 1) = zero;
            gm(0, 2) = b * (-0.25);
            gm(1, 0) = zero;
            gm(1, 1) = quarter;
            gm(1, 2) = zero;
            gm(2, 0) = b * (-0.25);
            gm(2, 1) = zero;
            gm(2, 2) = quarter;
            return gm;
        };
        return riemannian(3, "heisenberg3", g);
    }

    // Flat Randers metric F = |y| + 0.1 y^1: nonvanishing Cartan tensor,
    // x-independent (so spray and curvature vanish identically).
    static FinslerMetric randers3() {
        Mat alpha(3, 3, 0.0);
        alpha(0, 0) = alpha(1, 1) = alpha(2, 2) = 1.0;
        Vec beta(3, 0.0);
        beta(0) = 0.1;
        FinslerMetric fm = randers(alpha, beta);
        fm.name_ = "randers3";
        return fm;
    }

    // F = sqrt(y . alpha . y) + beta . y with constant matrices.
    static FinslerMetric randers(const Mat& alpha, const Vec& beta) {
        int m = alpha.n;
        if (alpha.m != m || beta.size() != m)
            throw ConfigError("randers: alpha must be square and beta of matching size");
        FinslerMetric fm(m, MetricKind::Randers, "randers");
        fm.tol_factor_ = 2.0;
        auto f = [m, alpha, beta](const auto& vars) {
            using T = std::decay_t<decltype(vars[0])>;
            T q = vars[0] * 0.0;
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j)
                    q = q + vars[static_cast<std::size_t>(m + i)] *
                                vars[static_cast<std::size_t>(m + j)] * alpha(i, j);
            using std::sqrt;
            T r = sqrt(q);
            for (int i = 0; i < m; ++i)
                r = r + vars[static_cast<std::size_t>(m + i)] * beta(i);
            return r;
        };
        fm.install(f, [f](const auto& vars) {
            auto v = f(vars);
            return v * v;
        });
        return fm;
    }

    // User expression in x1..xm, y1..ym.
    static FinslerMetric from_expression(const std::string& src, int m) {
        FinslerMetric fm(m, MetricKind::Expr, "expression");
        Expression ex = Expression::parse(src, m);
        fm.expr_src_ = src;
        fm.f_val_ = [ex](const BasePoint& p) { return ex.eval(p); };
        fm.f_jet_ = [ex](const JetVars& jv) { return ex.eval(jv); };
        fm.f2_val_ = [ex](const BasePoint& p) {
            double v = ex.eval(p);
            return v * v;
        };
        fm.f2_jet_ = [ex](const JetVars& jv) {
            Jet v = ex.eval(jv);
            return v * v;
        };
        return fm;
    }

private:
    FinslerMetric(int m, MetricKind k, std::string name)
        : m_(m), kind_(k), name_(std::move(name)) {
        if (m < 1) throw ConfigError("metric dimension must be positive");
    }

    template <typename Vars>
    static auto quad_y(const Vars& vars, int m) {
        auto q = vars[0] * 0.0;
        for (int i = 0; i < m; ++i)
            q = q + vars[static_cast<std::size_t>(m + i)] * vars[static_cast<std::size_t>(m + i)];
        return q;
    }

    template <typename Vars, typename GFn>
    static auto riem_quad(const Vars& vars, int m, const GFn& g) {
        using T = std::decay_t<decltype(vars[0])>;
        std::vector<T> x(vars.begin(), vars.begin() + m);
        auto gm = g(x);
        T q = vars[0] * 0.0;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                q = q + gm(i, j) * vars[static_cast<std::size_t>(m + i)] *
                            vars[static_cast<std::size_t>(m + j)];
        return q;
    }

    // Instantiate one templated definition over both scalar types.
    template <typename FFn, typename F2Fn>
    void install(FFn f, F2Fn f2) {
        int m = m_;
        f_val_ = [f, m](const BasePoint& p) { return f(pack(p, m)); };
        f_jet_ = [f](const JetVars& jv) { return f(jv.v); };
        f2_val_ = [f2, m](const BasePoint& p) { return f2(pack(p, m)); };
        f2_jet_ = [f2](const JetVars& jv) { return f2(jv.v); };
    }

    static std::vector<double> pack(const BasePoint& p, int m) {
        std::vector<double> vars;
        vars.reserve(static_cast<std::size_t>(2 * m));
        for (double v : p.x) vars.push_back(v);
        for (double v : p.y) vars.push_back(v);
        return vars;
    }

    int m_;
    MetricKind kind_;
    std::string name_;
    double tol_factor_ = 1.0;
    std::string expr_src_;
    std::function<double(const BasePoint&)> f_val_, f2_val_;
    std::function<Jet(const JetVars&)> f_jet_, f2_jet_;
    std::function<Mat(const std::vector<double>&)> g_of_x_;
};

inline FinslerMetric parse_metric(const std::string& src, int m) {
    return FinslerMetric::from_expression(src, m);
}

// g_ij = (1/2) d^2(F^2)/dy^i dy^j; throws StructureError when the smallest
// eigenvalue falls below the degeneracy threshold.
inline Mat fundamental_tensor(const FinslerMetric& fm, const BasePoint& p) {
    const int m = fm.dim();
    Jet f2 = jet_eval([&](const JetVars& jv) { return fm.F2(jv); }, p, 2);
    Mat g(m, m);
    std::vector<int> alpha(static_cast<std::size_t>(2 * m), 0);
    for (int i = 0; i < m; ++i) {
        for (int j = i; j < m; ++j) {
            alpha.assign(static_cast<std::size_t>(2 * m), 0);
            alpha[static_cast<std::size_t>(m + i)] += 1;
            alpha[static_cast<std::size_t>(m + j)] += 1;
            double v = 0.5 * f2.partial(alpha);
            g(i, j) = v;
            g(j, i) = v;
        }
    }
    double lo = min_eigenvalue_sym(g);
    if (lo < kPosDefThreshold)
        throw StructureError("fundamental tensor is not positive definite", lo);
    return g;
}

// A_ijk = (F/4) d^3(F^2)/dy^i dy^j dy^k, totally symmetric by construction.
inline Cube cartan_tensor(const FinslerMetric& fm, const BasePoint& p) {
    const int m = fm.dim();
    Jet f2 = jet_eval([&](const JetVars& jv) { return fm.F2(jv); }, p, 3);
    double fval = std::sqrt(f2.value());
    Cube A(m);
    std::vector<int> alpha;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k) {
                alpha.assign(static_cast<std::size_t>(2 * m), 0);
                alpha[static_cast<std::size_t>(m + i)] += 1;
                alpha[static_cast<std::size_t>(m + j)] += 1;
                alpha[static_cast<std::size_t>(m + k)] += 1;
                A(i, j, k) = 0.25 * fval * f2.partial(alpha);
            }
    return A;
}

struct MetricData {
    Mat g;
    Mat ginv;
    Cube A;
};

inline MetricData metric_data(const FinslerMetric& fm, const BasePoint& p) {
    MetricData md;
    md.g = fundamental_tensor(fm, p);
    md.ginv = inverse(md.g);
    md.A = cartan_tensor(fm, p);
    return md;
}

// Structure-axiom probes: positivity of F, positive homogeneity in y, and
// positive definiteness of g. Failures come back as report entries, never
// exceptions, so a degenerate probe point is flagged rather than fatal.
inline std::vector<CheckEntry> check_finsler(const FinslerMetric& fm, const BasePoint& p,
                                             const std::vector<double>& lambdas = {0.5, 2.0, 3.0}) {
    std::vector<CheckEntry> out;
    const double fv = fm.F(p);
    {
        CheckEntry e = make_entry("finsler-positivity", "the Finsler norm is positive away from the zero section",
                                  p, fv > 0.0 ? 0.0 : std::fmax(1e-300, -fv), 0.0);
        e.pass = fv > 0.0;
        e.witness = Json{{"F", fv}};
        out.push_back(std::move(e));
    }
    for (double lam : lambdas) {
        BasePoint q = p;
        for (double& v : q.y) v *= lam;
        double res = std::fabs(fm.F(q) - lam * fv);
        out.push_back(make_entry("finsler-homogeneity",
                                 "positive 1-homogeneity of the Finsler norm in y", p, res,
                                 1e-12 * std::fmax(1.0, std::fabs(lam * fv))));
        out.back().witness = Json{{"lambda", lam}};
    }
    {
        double lo;
        try {
            Mat g = fundamental_tensor(fm, p);
            lo = min_eigenvalue_sym(g);
        } catch (const StructureError& se) {
            lo = se.witness;
        }
        CheckEntry e = make_entry("metric-positive-definite",
                                  "positive definiteness of the fundamental tensor", p,
                                  std::fmax(0.0, kPosDefThreshold - lo), 0.0);
        e.witness = Json{{"min_eigenvalue", lo}};
        out.push_back(std::move(e));
    }
    return out;
}

} // namespace finsler
