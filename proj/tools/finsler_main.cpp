// Command-line front end: run the identity suite against a configured
// geometry (check), print a single computed quantity at one point (eval),
// or list the built-in metrics and structure triples (list).

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "finsler/curvature.hpp"
#include "finsler/suite.hpp"

namespace {

using namespace finsler;

RunConfig resolve_config(const std::string& config_path, const std::string& metric_name,
                         std::optional<std::uint64_t> seed, std::optional<int> points,
                         double tol_scale, std::optional<int> jet_order) {
    RunConfig cfg;
    if (!config_path.empty()) {
        cfg = load_config(config_path);
    } else {
        Json j;
        j["metric"] = metric_name.empty() ? "heisenberg3" : metric_name;
        cfg = config_from_json(j);
    }
    if (seed) cfg.sampler.seed = *seed;
    if (points) {
        if (*points < 1) throw ConfigError("--points must be positive");
        cfg.sampler.count = *points;
        cfg.points.clear(); // the flag overrides an explicit point list
    }
    if (tol_scale != 1.0) {
        if (tol_scale <= 0.0) throw ConfigError("--tol-scale must be positive");
        cfg.tol.level1 *= tol_scale;
        cfg.tol.level2 *= tol_scale;
    }
    if (jet_order) {
        if (*jet_order < Frame::kMinJetOrder || *jet_order > kMaxJetOrder)
            throw ConfigError("--jet-order must be between " +
                              std::to_string(Frame::kMinJetOrder) + " and " +
                              std::to_string(kMaxJetOrder));
        cfg.jet_order = *jet_order;
    }
    // reflect effective settings in the echoed config so the report header
    // describes the run that actually happened
    cfg.echo["effective"] = Json{{"seed", cfg.sampler.seed},
                                 {"count", cfg.sampler.count},
                                 {"tolerances", Json{{"level1", cfg.tol.level1},
                                                     {"level2", cfg.tol.level2}}},
                                 {"jet_order", cfg.jet_order}};
    return cfg;
}

void print_summary(const Report& rep) {
    int passed = 0, failed = 0, na = 0, blocked = 0;
    for (const auto& e : rep.entries) {
        std::string st = e.witness.is_object() && e.witness.contains("status")
                             ? e.witness.at("status").get<std::string>()
                             : std::string();
        if (st == "not-applicable")
            ++na;
        else if (st == "blocked")
            ++blocked;
        else if (e.pass)
            ++passed;
        else
            ++failed;
    }
    std::printf("entries: %zu   passed: %d   failed: %d   blocked: %d   not-applicable: %d\n",
                rep.entries.size(), passed, failed, blocked, na);
    if (failed > 0 || blocked > 0) {
        std::printf("worst offenders:\n");
        int shown = 0;
        for (const auto& e : rep.entries) {
            if (e.pass) continue;
            std::string st = e.witness.is_object() && e.witness.contains("status")
                                 ? e.witness.at("status").get<std::string>()
                                 : std::string();
            if (st == "blocked") {
                std::printf("  %-40s blocked on %s\n", e.name.c_str(),
                            e.witness.value("reason", std::string("prerequisite")).c_str());
                if (++shown >= 10) break;
                continue;
            }
            std::printf("  %-40s residual %-12.5g tol %-10.3g at x=(", e.name.c_str(), e.residual,
                        e.tolerance);
            for (std::size_t i = 0; i < e.point.x.size(); ++i)
                std::printf("%s%.4g", i ? "," : "", e.point.x[i]);
            std::printf(") y=(");
            for (std::size_t i = 0; i < e.point.y.size(); ++i)
                std::printf("%s%.4g", i ? "," : "", e.point.y[i]);
            std::printf(")\n");
            if (++shown >= 10) break;
        }
    }
    std::printf("overall: %s\n", rep.all_pass() ? "PASS" : "FAIL");
}

void print_matrix(const char* label, const JMat& mat) {
    int m = mat.n;
    std::printf("%s =\n", label);
    for (int i = 0; i < m; ++i) {
        std::printf("  ");
        for (int j = 0; j < m; ++j) std::printf("% .10f ", mat(i, j).value());
        std::printf("\n");
    }
}

int run_eval(const std::string& quantity, const std::string& metric_name,
             const std::vector<double>& xs, const std::vector<double>& ys, int jet_order,
             bool as_json) {
    Json j;
    j["metric"] = metric_name;
    RunConfig cfg = config_from_json(j);
    FinslerMetric fm = make_metric(cfg);
    BasePoint p;
    p.x = xs;
    p.y = ys;
    if (static_cast<int>(p.x.size()) != fm.dim() || static_cast<int>(p.y.size()) != fm.dim())
        throw ConfigError("point needs " + std::to_string(fm.dim()) + " coordinates per slot");
    Frame fr(fm, p, jet_order);
    int m = fr.m();

    Json out;
    out["metric"] = metric_name;
    out["quantity"] = quantity;
    out["point"] = Json{{"x", p.x}, {"y", p.y}};

    if (quantity == "g") {
        Json rows = Json::array();
        for (int i = 0; i < m; ++i) {
            Json row = Json::array();
            for (int jj = 0; jj < m; ++jj) row.push_back(fr.g()(i, jj).value());
            rows.push_back(row);
        }
        out["value"] = rows;
        if (!as_json) print_matrix("g", fr.g());
    } else if (quantity == "A") {
        Json cube = Json::array();
        for (int i = 0; i < m; ++i) {
            Json rows = Json::array();
            for (int jj = 0; jj < m; ++jj) {
                Json row = Json::array();
                for (int k = 0; k < m; ++k) row.push_back(fr.A()(i, jj, k).value());
                rows.push_back(row);
            }
            cube.push_back(rows);
        }
        out["value"] = cube;
        if (!as_json) {
            for (int i = 0; i < m; ++i) {
                std::printf("A(%d,:,:) =\n", i + 1);
                for (int jj = 0; jj < m; ++jj) {
                    std::printf("  ");
                    for (int k = 0; k < m; ++k) std::printf("% .10f ", fr.A()(i, jj, k).value());
                    std::printf("\n");
                }
            }
        }
    } else if (quantity == "G") {
        Json vec = Json::array();
        for (int i = 0; i < m; ++i) vec.push_back(fr.spray()(i).value());
        out["value"] = vec;
        if (!as_json) {
            std::printf("G = (");
            for (int i = 0; i < m; ++i) std::printf("%s%.10f", i ? ", " : "", fr.spray()(i).value());
            std::printf(")\n");
        }
    } else if (quantity == "N") {
        Json rows = Json::array();
        for (int i = 0; i < m; ++i) {
            Json row = Json::array();
            for (int jj = 0; jj < m; ++jj) row.push_back(fr.N()(i, jj).value());
            rows.push_back(row);
        }
        out["value"] = rows;
        if (!as_json) print_matrix("N", fr.N());
    } else if (quantity == "Gamma") {
        Json cube = Json::array();
        for (int i = 0; i < m; ++i) {
            Json rows = Json::array();
            for (int jj = 0; jj < m; ++jj) {
                Json row = Json::array();
                for (int k = 0; k < m; ++k) row.push_back(fr.Gamma()(i, jj, k).value());
                rows.push_back(row);
            }
            cube.push_back(rows);
        }
        out["value"] = cube;
        if (!as_json) {
            for (int i = 0; i < m; ++i) {
                std::printf("Gamma(%d,:,:) =\n", i + 1);
                for (int jj = 0; jj < m; ++jj) {
                    std::printf("  ");
                    for (int k = 0; k < m; ++k)
                        std::printf("% .10f ", fr.Gamma()(i, jj, k).value());
                    std::printf("\n");
                }
            }
        }
    } else if (quantity == "R") {
        const Rank4& R = fr.R();
        Json t = Json::array();
        for (int i = 0; i < m; ++i) {
            Json a = Json::array();
            for (int jj = 0; jj < m; ++jj) {
                Json b = Json::array();
                for (int k = 0; k < m; ++k) {
                    Json c = Json::array();
                    for (int l = 0; l < m; ++l) c.push_back(R(i, jj, k, l));
                    b.push_back(c);
                }
                a.push_back(b);
            }
            t.push_back(a);
        }
        out["value"] = t;
        if (!as_json) {
            for (int i = 0; i < m; ++i)
                for (int jj = 0; jj < m; ++jj) {
                    std::printf("R(%d,%d,:,:) =\n", i + 1, jj + 1);
                    for (int k = 0; k < m; ++k) {
                        std::printf("  ");
                        for (int l = 0; l < m; ++l) std::printf("% .10f ", R(i, jj, k, l));
                        std::printf("\n");
                    }
                }
        }
    } else if (quantity == "Ric") {
        // middle-slot trace against the distinguished direction y/F
        JVec u = fr.unit_field();
        double ric = ricci_H(fr, u, fr.lift_H(u));
        out["value"] = ric;
        if (!as_json) std::printf("Ric(u, u^H) = %.10f   (u = y/F)\n", ric);
    } else if (quantity == "flag") {
        // flag curvature of the (y, e_k) planes for each coordinate edge
        Json vals = Json::array();
        if (!as_json) std::printf("flag curvature K(y, e_k):\n");
        for (int k = 0; k < m; ++k) {
            Vec l(m, 0.0);
            l(k) = 1.0;
            try {
                double kv = flag_curvature_span(fr, l);
                vals.push_back(kv);
                if (!as_json) std::printf("  k=%d: % .10f\n", k + 1, kv);
            } catch (const StructureError&) {
                vals.push_back(nullptr);
                if (!as_json) std::printf("  k=%d: degenerate edge\n", k + 1);
            }
        }
        out["value"] = vals;
    } else {
        throw ConfigError("unknown quantity: " + quantity +
                          " (expected g, A, G, N, Gamma, R, Ric, flag)");
    }
    if (as_json) std::printf("%s\n", out.dump(2).c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"finsler: residual checks for a Finsler connection tower and its"
                 " contact/curvature identities"};
    app.require_subcommand(1);

    // check
    auto* check = app.add_subcommand("check", "run the configured check suite");
    std::string config_path, metric_name, out_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> points;
    std::optional<int> jet_order;
    double tol_scale = 1.0;
    bool as_json = false;
    check->add_option("--config", config_path, "JSON config file");
    check->add_option("--metric", metric_name, "built-in metric when no config is given");
    check->add_option("--seed", seed, "override the sampler seed");
    check->add_option("--points", points, "override the sampled point count");
    check->add_option("--tol-scale", tol_scale, "multiply both tolerance levels");
    check->add_option("--jet-order", jet_order, "derivative budget (4 or 5)");
    check->add_option("--out", out_path, "write the JSON report to this path");
    check->add_flag("--json", as_json, "print the JSON report to stdout");

    // eval
    auto* eval = app.add_subcommand("eval", "print one computed quantity at one point");
    std::string quantity = "g", eval_metric = "heisenberg3";
    std::vector<double> xs, ys;
    int eval_order = kMaxJetOrder;
    bool eval_json = false;
    eval->add_option("quantity", quantity, "one of g, A, G, N, Gamma, R, Ric, flag");
    eval->add_option("--metric", eval_metric, "built-in metric name");
    eval->add_option("--x", xs, "base coordinates")->expected(-1);
    eval->add_option("--y", ys, "direction coordinates")->expected(-1);
    eval->add_option("--jet-order", eval_order, "derivative budget (4 or 5)");
    eval->add_flag("--json", eval_json, "emit JSON instead of formatted text");

    // list
    auto* list = app.add_subcommand("list", "list built-in metrics and structure triples");

    CLI11_PARSE(app, argc, argv);

    try {
        if (list->parsed()) {
            std::printf("metrics:\n");
            std::printf("  euclidean     flat norm in any odd dimension >= 3\n");
            std::printf("  randers3      flat y-asymmetric norm |y| + 0.1 y1, dimension 3\n");
            std::printf("  heisenberg3   x-dependent norm carrying the reference structure\n");
            std::printf("triples:\n");
            std::printf("  heisenberg3   the structure adapted to the heisenberg3 metric\n");
            std::printf("  flat3         constant triple on the flat metric (not contact)\n");
            std::printf("  adapted       triple built from the metric by orthonormalization\n");
            std::printf("  {phi,eta,xi}  component expressions supplied in the config\n");
            return 0;
        }
        if (eval->parsed()) {
            if (xs.empty() && ys.empty()) {
                xs = {0.0, 0.0, 0.0};
                ys = {1.0, 0.25, -0.5};
            }
            return run_eval(quantity, eval_metric, xs, ys, eval_order, eval_json);
        }
        // check
        RunConfig cfg =
            resolve_config(config_path, metric_name, seed, points, tol_scale, jet_order);
        Report rep = run_suite(cfg);
        if (!out_path.empty()) write_report(rep, out_path);
        if (as_json)
            std::printf("%s\n", rep.to_json().dump(2).c_str());
        else
            print_summary(rep);
        return rep.all_pass() ? 0 : 1;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
