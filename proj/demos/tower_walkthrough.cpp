// Library tour: build every layer of the geometry at one point of the
// reference structure and print the headline quantities.  This is the
// programmatic equivalent of `finsler eval` for each tensor in turn.

#include <cstdio>

#include "finsler/contact.hpp"
#include "finsler/curvature.hpp"
#include "finsler/ehresmann.hpp"
#include "finsler/metric.hpp"

using namespace finsler;

namespace {

void print_mat(const char* label, const Mat& m) {
    std::printf("%s\n", label);
    for (int i = 0; i < m.n; ++i) {
        std::printf("   ");
        for (int j = 0; j < m.m; ++j) std::printf(" % .6f", m(i, j));
        std::printf("\n");
    }
}

} // namespace

int main() {
    FinslerMetric fm = FinslerMetric::heisenberg3();
    BasePoint p{{0.3, -0.4, 0.2}, {0.9, 0.5, -0.3}};

    // The frame bundles the full derivative tower at (x, y): fundamental
    // tensor, Cartan tensor, spray, nonlinear connection, linear connection
    // coefficients and the hh-curvature.
    Frame fr(fm, p);

    std::printf("metric: %s at x = (%.1f, %.1f, %.1f), y = (%.1f, %.1f, %.1f)\n\n", fm.name().c_str(),
                p.x[0], p.x[1], p.x[2], p.y[0], p.y[1], p.y[2]);
    std::printf("F(x, y)  = %.9f\n", fm.F(p));
    std::printf("F2(x, y) = %.9f\n\n", fr.F2().value());

    print_mat("fundamental tensor g_ij:", Frame::values(fr.g()));
    std::printf("\nCartan tensor sup-norm |A| = %.3e  (zero: the metric is Riemannian)\n\n",
                max_abs(Frame::values(fr.A())));

    print_mat("nonlinear connection N^i_j:", Frame::values(fr.N()));
    std::printf("\nconnection coefficient Gamma^1_{12} = % .6f\n", fr.Gamma()(0, 0, 1).value());
    std::printf("hh-curvature component R^1_{212}    = % .6f\n\n", fr.R()(0, 1, 0, 1));

    // Attach the natural contact structure and read off its invariants.
    ContactData D = eval_triple(fr, ContactTriple::heisenberg3());
    ContactConditionResult cc = contact_condition(fr, D, 1e-6);
    std::printf("contact condition |Phi - d^H eta| = %.3e (factor %d convention)\n",
                cc.res_h_factor1, cc.factor_h);

    RicciIdentityReport ric = k_contact_identity(fr, D);
    std::printf("ric(xi, xi^H) = % .9f   (closed form: % .9f)\n", ric.trace, ric.rhs_weighted);

    Vec l(3, 0.0);
    l(0) = 0.7;
    l(1) = -0.2;
    l(2) = 0.4;
    std::printf("flag curvature K(l, xi) = %.9f for a transverse edge l\n",
                flag_curvature(fr, D, l));
    return 0;
}
