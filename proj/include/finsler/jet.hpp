#pragma once

// Truncated multivariate Taylor arithmetic ("jets") in the 2m coordinates
// (x^1..x^m, y^1..y^m) of the slit tangent bundle, up to total order 5.
//
// A Jet stores the Taylor coefficients c_alpha = (d^alpha f)(p) / alpha! of a
// scalar function at a fixed expansion point, for all multi-indices with
// |alpha| <= order. Arithmetic propagates coefficients exactly (up to
// rounding), so every derivative the geometry needs comes out of one forward
// evaluation instead of nested numerical differencing.
//
// Variable layout: index i in [0, m) is x^{i+1}, index m + i is y^{i+1}.

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "finsler/errors.hpp"
#include "finsler/point.hpp"

namespace finsler {

// Hard budget: everything downstream is sized so that one order-5 expansion
// of F^2 feeds the full tower (metric -> spray -> connection -> curvature).
inline constexpr int kMaxJetOrder = 5;

namespace detail {
inline std::uint64_t binom(int n, int k) {
    if (k < 0 || k > n) return 0;
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / i;
    return r;
}
} // namespace detail

// Shared immutable tables for one variable count: the graded-lex multi-index
// enumeration, the multiplication pairing, and per-variable differentiation
// maps. Built once per nvars and cached process-wide.
class JetSpace {
public:
    static std::shared_ptr<const JetSpace> get(int nvars) {
        static std::mutex mu;
        static std::unordered_map<int, std::shared_ptr<const JetSpace>> cache;
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(nvars);
        if (it != cache.end()) return it->second;
        auto sp = std::shared_ptr<const JetSpace>(new JetSpace(nvars));
        cache.emplace(nvars, sp);
        return sp;
    }

    int nvars() const { return nvars_; }

    // Number of coefficients of a jet truncated at `order`.
    int ncoeff(int order) const { return deg_offset_[static_cast<std::size_t>(order) + 1]; }

    int degree_of(int idx) const { return degree_[static_cast<std::size_t>(idx)]; }

    const std::uint8_t* exponents(int idx) const {
        return exps_.data() + static_cast<std::size_t>(idx) * nvars_;
    }

    // Graded-lex rank of a multi-index; -1 if |alpha| > kMaxJetOrder.
    int index_of(const std::vector<int>& alpha) const {
        int total = 0;
        for (int a : alpha) total += a;
        if (total > kMaxJetOrder) return -1;
        // rank within the degree block: count multi-indices of the same total
        // degree that precede alpha in lex order.
        int rank = 0;
        int rem = total;
        for (int v = 0; v < nvars_ - 1; ++v) {
            for (int e = rem; e > alpha[static_cast<std::size_t>(v)]; --e)
                rank += static_cast<int>(detail::binom(rem - e + nvars_ - v - 2, nvars_ - v - 2));
            rem -= alpha[static_cast<std::size_t>(v)];
        }
        return deg_offset_[static_cast<std::size_t>(total)] + rank;
    }

    struct MulTriple { std::int32_t a, b, dst; };

    // Multiplication pairs with result degree d live in
    // mul_[mul_offset_[d] .. mul_offset_[d+1]).
    const std::vector<MulTriple>& mul_triples() const { return mul_; }
    int mul_end(int order) const { return mul_offset_[static_cast<std::size_t>(order) + 1]; }

    struct DiffEntry { std::int32_t dst, src; double factor; };

    // Differentiation entries for variable v, sorted by dst degree; entries
    // with dst < diff_end(v, order) produce a jet truncated at `order`.
    const std::vector<DiffEntry>& diff(int v) const { return diff_[static_cast<std::size_t>(v)]; }

private:
    explicit JetSpace(int nvars) : nvars_(nvars) {
        if (nvars < 1) throw ConfigError("jet space needs at least one variable");
        // enumerate multi-indices by total degree, lex order inside a degree
        deg_offset_.assign(kMaxJetOrder + 2, 0);
        std::vector<int> alpha(static_cast<std::size_t>(nvars), 0);
        for (int d = 0; d <= kMaxJetOrder; ++d) {
            deg_offset_[static_cast<std::size_t>(d)] = static_cast<int>(degree_.size());
            enumerate_degree(d, 0, alpha);
        }
        deg_offset_[kMaxJetOrder + 1] = static_cast<int>(degree_.size());

        build_mul_table();
        build_diff_tables();
    }

    void enumerate_degree(int degree, int var, std::vector<int>& alpha) {
        if (var == nvars_ - 1) {
            alpha[static_cast<std::size_t>(var)] = degree;
            for (int v = 0; v < nvars_; ++v)
                exps_.push_back(static_cast<std::uint8_t>(alpha[static_cast<std::size_t>(v)]));
            int total = 0;
            for (int v = 0; v < nvars_; ++v) total += alpha[static_cast<std::size_t>(v)];
            degree_.push_back(static_cast<std::uint8_t>(total));
            alpha[static_cast<std::size_t>(var)] = 0;
            return;
        }
        for (int e = degree; e >= 0; --e) {
            alpha[static_cast<std::size_t>(var)] = e;
            enumerate_degree(degree - e, var + 1, alpha);
        }
        alpha[static_cast<std::size_t>(var)] = 0;
    }

    void build_mul_table() {
        const int n = static_cast<int>(degree_.size());
        std::vector<int> sum(static_cast<std::size_t>(nvars_));
        std::vector<std::vector<MulTriple>> buckets(kMaxJetOrder + 1);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                int d = degree_[static_cast<std::size_t>(i)] + degree_[static_cast<std::size_t>(j)];
                if (d > kMaxJetOrder) continue;
                const std::uint8_t* ei = exponents(i);
                const std::uint8_t* ej = exponents(j);
                for (int v = 0; v < nvars_; ++v)
                    sum[static_cast<std::size_t>(v)] = ei[v] + ej[v];
                int dst = index_of(sum);
                buckets[static_cast<std::size_t>(d)].push_back({i, j, dst});
            }
        }
        mul_offset_.assign(kMaxJetOrder + 2, 0);
        for (int d = 0; d <= kMaxJetOrder; ++d) {
            mul_offset_[static_cast<std::size_t>(d)] = static_cast<int>(mul_.size());
            for (const auto& t : buckets[static_cast<std::size_t>(d)]) mul_.push_back(t);
        }
        mul_offset_[kMaxJetOrder + 1] = static_cast<int>(mul_.size());
    }

    void build_diff_tables() {
        const int n = static_cast<int>(degree_.size());
        diff_.resize(static_cast<std::size_t>(nvars_));
        std::vector<int> alpha(static_cast<std::size_t>(nvars_));
        for (int v = 0; v < nvars_; ++v) {
            std::vector<DiffEntry> entries;
            // dst runs over indices of degree <= kMaxJetOrder - 1; Taylor
            // coefficients differentiate as c'_beta = (beta_v + 1) c_{beta+e_v}.
            for (int dst = 0; dst < n; ++dst) {
                if (degree_[static_cast<std::size_t>(dst)] >= kMaxJetOrder) continue;
                const std::uint8_t* e = exponents(dst);
                for (int w = 0; w < nvars_; ++w) alpha[static_cast<std::size_t>(w)] = e[w];
                alpha[static_cast<std::size_t>(v)] += 1;
                int src = index_of(alpha);
                entries.push_back({dst, src, static_cast<double>(alpha[static_cast<std::size_t>(v)])});
            }
            diff_[static_cast<std::size_t>(v)] = std::move(entries);
        }
    }

    int nvars_;
    std::vector<std::uint8_t> exps_;    // nvars entries per index
    std::vector<std::uint8_t> degree_;  // total degree per index
    std::vector<int> deg_offset_;       // block starts per degree, +1 sentinel
    std::vector<MulTriple> mul_;
    std::vector<int> mul_offset_;
    std::vector<std::vector<DiffEntry>> diff_;
};

class Jet {
public:
    Jet() = default;

    static Jet constant(std::shared_ptr<const JetSpace> sp, int order, double v) {
        Jet j(std::move(sp), order);
        j.c_[0] = v;
        return j;
    }

    static Jet variable(std::shared_ptr<const JetSpace> sp, int order, int var, double center) {
        Jet j(std::move(sp), order);
        j.c_[0] = center;
        if (order >= 1) {
            std::vector<int> alpha(static_cast<std::size_t>(j.sp_->nvars()), 0);
            alpha[static_cast<std::size_t>(var)] = 1;
            j.c_[static_cast<std::size_t>(j.sp_->index_of(alpha))] = 1.0;
        }
        return j;
    }

    const std::shared_ptr<const JetSpace>& space() const { return sp_; }
    int order() const { return ord_; }
    double value() const { return c_.empty() ? 0.0 : c_[0]; }

    // Taylor coefficient c_alpha (0 when |alpha| exceeds the stored order,
    // which only happens for exact-polynomial reads; OrderError is reserved
    // for partial()).
    double coeff(const std::vector<int>& alpha) const {
        int idx = sp_->index_of(alpha);
        if (idx < 0 || idx >= static_cast<int>(c_.size())) return 0.0;
        return c_[static_cast<std::size_t>(idx)];
    }

    // The partial derivative value d^alpha f = alpha! * c_alpha.
    double partial(const std::vector<int>& alpha) const {
        int total = 0;
        double fact = 1.0;
        for (int a : alpha) {
            total += a;
            for (int i = 2; i <= a; ++i) fact *= i;
        }
        if (total > ord_)
            throw OrderError("partial of order " + std::to_string(total) +
                             " requested from an order-" + std::to_string(ord_) + " jet");
        return coeff(alpha) * fact;
    }

    // First-order coefficient of variable v (the gradient entry).
    double grad(int v) const {
        if (ord_ < 1) throw OrderError("gradient requested from an order-0 jet");
        // degree-1 block starts at index 1 and is ordered x^n-1 lex:
        // variable v has exponent vector e_v; its rank within the block makes
        // index 1 + v only for lex order where earlier vars rank first.
        return c_[static_cast<std::size_t>(grad_index(v))];
    }

    Jet& operator+=(const Jet& o) { return apply_add(o, 1.0); }
    Jet& operator-=(const Jet& o) { return apply_add(o, -1.0); }
    Jet& operator+=(double s) { c_[0] += s; return *this; }
    Jet& operator-=(double s) { c_[0] -= s; return *this; }
    Jet& operator*=(double s) { for (double& v : c_) v *= s; return *this; }
    Jet& operator/=(double s) { for (double& v : c_) v /= s; return *this; }

    friend Jet operator+(Jet a, const Jet& b) { a += b; return a; }
    friend Jet operator-(Jet a, const Jet& b) { a -= b; return a; }
    friend Jet operator+(Jet a, double s) { a += s; return a; }
    friend Jet operator+(double s, Jet a) { a += s; return a; }
    friend Jet operator-(Jet a, double s) { a -= s; return a; }
    friend Jet operator-(double s, const Jet& a) { Jet r = -a; r += s; return r; }
    friend Jet operator*(Jet a, double s) { a *= s; return a; }
    friend Jet operator*(double s, Jet a) { a *= s; return a; }
    friend Jet operator/(Jet a, double s) { a /= s; return a; }

    Jet operator-() const {
        Jet r = *this;
        for (double& v : r.c_) v = -v;
        return r;
    }

    friend Jet operator*(const Jet& a, const Jet& b) {
        int t = std::min(a.ord_, b.ord_);
        Jet r(a.sp_, t);
        const auto& triples = a.sp_->mul_triples();
        const int end = a.sp_->mul_end(t);
        for (int i = 0; i < end; ++i) {
            const auto& tr = triples[static_cast<std::size_t>(i)];
            r.c_[static_cast<std::size_t>(tr.dst)] +=
                a.c_[static_cast<std::size_t>(tr.a)] * b.c_[static_cast<std::size_t>(tr.b)];
        }
        return r;
    }

    friend Jet operator/(const Jet& a, const Jet& b) { return a * recip(b); }
    friend Jet operator/(double s, const Jet& b) { return recip(b) * s; }

    // Truncate to a lower order (used when mixing derived quantities).
    Jet truncated(int order) const {
        if (order >= ord_) return *this;
        Jet r(sp_, order);
        for (std::size_t i = 0; i < r.c_.size(); ++i) r.c_[i] = c_[i];
        return r;
    }

    // d/dvar as a jet one order lower.
    Jet derivative(int var) const {
        if (ord_ < 1) throw OrderError("derivative of an order-0 jet");
        Jet r(sp_, ord_ - 1);
        const auto& entries = sp_->diff(var);
        const int limit = static_cast<int>(r.c_.size());
        for (const auto& e : entries) {
            if (e.dst >= limit) continue;
            if (e.src >= static_cast<int>(c_.size())) continue;
            r.c_[static_cast<std::size_t>(e.dst)] = c_[static_cast<std::size_t>(e.src)] * e.factor;
        }
        return r;
    }

    // Composition with an analytic function given its scaled derivatives
    // coeffs[k] = f^{(k)}(value)/k!; evaluates by Horner in the nilpotent part.
    Jet analytic(const std::vector<double>& coeffs) const {
        Jet n = *this;
        n.c_[0] = 0.0;
        Jet r = Jet::constant(sp_, ord_, coeffs[static_cast<std::size_t>(ord_)]);
        for (int k = ord_ - 1; k >= 0; --k) {
            r = r * n;
            r.c_[0] += coeffs[static_cast<std::size_t>(k)];
        }
        return r;
    }

    friend Jet recip(const Jet& b) {
        double b0 = b.value();
        if (std::abs(b0) < 1e-300) throw DomainError("division by a jet with vanishing value");
        std::vector<double> cf(static_cast<std::size_t>(b.ord_) + 1);
        double p = 1.0 / b0;
        for (int k = 0; k <= b.ord_; ++k) {
            cf[static_cast<std::size_t>(k)] = p;
            p *= -1.0 / b0;
        }
        return b.analytic(cf);
    }

    friend Jet sqrt(const Jet& b) {
        double b0 = b.value();
        if (!(b0 > 0.0)) throw DomainError("sqrt of a jet with non-positive value");
        std::vector<double> cf(static_cast<std::size_t>(b.ord_) + 1);
        double c = std::sqrt(b0);
        for (int k = 0; k <= b.ord_; ++k) {
            cf[static_cast<std::size_t>(k)] = c;
            c *= (0.5 - k) / (static_cast<double>(k) + 1.0) / b0;
        }
        return b.analytic(cf);
    }

    friend Jet log(const Jet& b) {
        double b0 = b.value();
        if (!(b0 > 0.0)) throw DomainError("log of a jet with non-positive value");
        std::vector<double> cf(static_cast<std::size_t>(b.ord_) + 1);
        cf[0] = std::log(b0);
        double p = 1.0 / b0;
        for (int k = 1; k <= b.ord_; ++k) {
            cf[static_cast<std::size_t>(k)] = ((k % 2 == 1) ? 1.0 : -1.0) * p / k;
            p /= b0;
        }
        return b.analytic(cf);
    }

    friend Jet exp(const Jet& b) {
        std::vector<double> cf(static_cast<std::size_t>(b.ord_) + 1);
        double c = std::exp(b.value());
        double fact = 1.0;
        for (int k = 0; k <= b.ord_; ++k) {
            if (k > 0) fact *= k;
            cf[static_cast<std::size_t>(k)] = c / fact;
        }
        return b.analytic(cf);
    }

    friend Jet sin(const Jet& b) {
        double s = std::sin(b.value()), c = std::cos(b.value());
        const double cyc[4] = {s, c, -s, -c};
        std::vector<double> cf(static_cast<std::size_t>(b.ord_) + 1);
        double fact = 1.0;
        for (int k = 0; k <= b.ord_; ++k) {
            if (k > 0) fact *= k;
            cf[static_cast<std::size_t>(k)] = cyc[k % 4] / fact;
        }
        return b.analytic(cf);
    }

    friend Jet cos(const Jet& b) {
        double s = std::sin(b.value()), c = std::cos(b.value());
        const double cyc[4] = {c, -s, -c, s};
        std::vector<double> cf(static_cast<std::size_t>(b.ord_) + 1);
        double fact = 1.0;
        for (int k = 0; k <= b.ord_; ++k) {
            if (k > 0) fact *= k;
            cf[static_cast<std::size_t>(k)] = cyc[k % 4] / fact;
        }
        return b.analytic(cf);
    }

    // Integer powers by repeated multiplication: exact for polynomials and
    // valid for non-positive bases, unlike a log/exp route.
    friend Jet pow_int(const Jet& b, int n) {
        if (n < 0) return recip(pow_int(b, -n));
        Jet r = Jet::constant(b.sp_, b.ord_, 1.0);
        Jet base = b;
        int e = n;
        while (e > 0) {
            if (e & 1) r = r * base;
            base = (e > 1) ? base * base : base;
            e >>= 1;
        }
        return r;
    }

private:
    Jet(std::shared_ptr<const JetSpace> sp, int order)
        : sp_(std::move(sp)), ord_(order),
          c_(static_cast<std::size_t>(sp_->ncoeff(order)), 0.0) {}

    int grad_index(int v) const {
        // degree-1 block: lex order puts e_0 first, then e_1, ...
        return 1 + v;
    }

    Jet& apply_add(const Jet& o, double sign) {
        if (o.ord_ < ord_) {
            Jet t = truncated(o.ord_);
            t.apply_add(o, sign);
            *this = std::move(t);
            return *this;
        }
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += sign * o.c_[i];
        return *this;
    }

    std::shared_ptr<const JetSpace> sp_;
    int ord_ = 0;
    std::vector<double> c_{0.0};
};

// The 2m coordinate jets at a base point, order k: the standard seed for
// evaluating any scalar function of (x, y) as a jet.
struct JetVars {
    std::shared_ptr<const JetSpace> sp;
    int order = 0;
    BasePoint p;
    std::vector<Jet> v; // x^1..x^m then y^1..y^m

    int m() const { return p.dim(); }
    const Jet& x(int i) const { return v[static_cast<std::size_t>(i)]; }
    const Jet& y(int i) const { return v[static_cast<std::size_t>(p.dim() + i)]; }
    Jet constant(double val) const { return Jet::constant(sp, order, val); }
};

inline JetVars make_jet_vars(const BasePoint& p, int order) {
    if (order < 0 || order > kMaxJetOrder)
        throw OrderError("jet order " + std::to_string(order) + " outside the compiled budget [0, " +
                         std::to_string(kMaxJetOrder) + "]");
    validate_point(p);
    JetVars jv;
    jv.sp = JetSpace::get(2 * p.dim());
    jv.order = order;
    jv.p = p;
    jv.v.reserve(static_cast<std::size_t>(2 * p.dim()));
    for (int i = 0; i < p.dim(); ++i)
        jv.v.push_back(Jet::variable(jv.sp, order, i, p.x[static_cast<std::size_t>(i)]));
    for (int i = 0; i < p.dim(); ++i)
        jv.v.push_back(Jet::variable(jv.sp, order, p.dim() + i, p.y[static_cast<std::size_t>(i)]));
    return jv;
}

// Evaluate a scalar program at p with all partials up to total order k.
template <typename Fn>
Jet jet_eval(Fn&& f, const BasePoint& p, int k) {
    JetVars jv = make_jet_vars(p, k);
    return f(jv);
}

} // namespace finsler
