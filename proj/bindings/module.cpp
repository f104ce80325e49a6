#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "spikelab/harness.hpp"
#include "spikelab/model.hpp"
#include "spikelab/ridge.hpp"

namespace py = pybind11;
using namespace spikelab;

namespace {

ExperimentConfig config_from_dict(const py::dict& d) {
    ExperimentConfig cfg;
    std::string text;
    for (const auto& item : d) {
        text += py::str(item.first).cast<std::string>() + " = " +
                py::str(item.second).cast<std::string>() + "\n";
    }
    cfg = apply_config_text(cfg, text);
    cfg.validate();
    return cfg;
}

py::dict fixed_point_to_dict(const FixedPoint& fp) {
    py::dict d;
    d["m1"] = fp.m1;
    d["m2"] = fp.m2;
    d["m1_prime"] = fp.m1_prime;
    d["m2_prime"] = fp.m2_prime;
    d["residual"] = py::make_tuple(fp.residual[0], fp.residual[1]);
    return d;
}

py::dict theory_to_dict(const TheoryPoint& tp) {
    py::dict d;
    d["fixed_point"] = fixed_point_to_dict(tp.fp);
    d["alignment"] = tp.alignment;
    py::dict deltas, lambdas;
    for (const auto& [l, v] : tp.delta) deltas[py::int_(l)] = v;
    for (const auto& [l, v] : tp.lambda_gap) lambdas[py::int_(l)] = v;
    d["delta"] = deltas;
    d["lambda_gap"] = lambdas;
    return d;
}

py::dict record_to_dict(const RunRecord& rec) {
    py::dict d;
    d["ok"] = rec.ok;
    d["seed"] = rec.seed;
    d["alpha"] = rec.alpha;
    d["config_hash"] = rec.config_hash;
    py::dict ms;
    for (const auto& [k, m] : rec.measured) {
        py::dict e;
        e["value"] = m.value;
        e["std_err"] = m.std_err;
        e["estimator"] = m.estimator;
        e["count"] = m.count;
        ms[py::str(k)] = e;
    }
    d["measured"] = ms;
    if (rec.theory) d["theory"] = theory_to_dict(*rec.theory);
    return d;
}

}  // namespace

PYBIND11_MODULE(_spikelab, m) {
    m.doc() = "one-step feature learning laboratory (C++ core)";

    m.def("hermite_eval", &hermite_eval, py::arg("k"), py::arg("x"),
          "probabilist's Hermite polynomial H_k(x)");
    m.def("monomial_to_hermite", &monomial_to_hermite, py::arg("p"),
          "row xi_{p,.} with x^p = sum_i xi_{p,i} H_i(x)");
    m.def(
        "activation_coeffs",
        [](const std::string& spec, int truncation) {
            const Activation a = Activation::parse(spec, truncation);
            return a.coeffs().coeffs;
        },
        py::arg("spec"), py::arg("truncation") = 16,
        "Hermite coefficients of a named activation or hermite_combo:...");
    m.def(
        "activation_norms",
        [](const std::string& spec, int truncation) {
            const Activation a = Activation::parse(spec, truncation);
            return py::make_tuple(a.c_total(), a.c_gt1());
        },
        py::arg("spec"), py::arg("truncation") = 16, "(c_total, c_gt1) of an activation");

    m.def(
        "solve_fixed_point",
        [](double phi, double psi, double lambda, double c1, double c_gt1) {
            return fixed_point_to_dict(solve_fixed_point(phi, psi, lambda, c1, c_gt1));
        },
        py::arg("phi"), py::arg("psi"), py::arg("lambda"), py::arg("c1"), py::arg("c_gt1"));
    m.def("alignment_limit", &alignment_limit, py::arg("c_star1"), py::arg("c_star"),
          py::arg("sigma_eps"), py::arg("phi"));
    m.def("predicted_ell", &predicted_ell, py::arg("alpha"));
    m.def("test_moment_aleph", &test_moment_aleph, py::arg("k"), py::arg("beta_norm_sq"));

    m.def(
        "theory_point",
        [](const py::dict& cfg) { return theory_to_dict(theory_point(config_from_dict(cfg))); },
        py::arg("config"), "fixed point, alignment limit and error improvements for a config");

    m.def("principal_angle_distance", &principal_angle_distance, py::arg("U1"), py::arg("U2"));
    m.def("singular_values", &singular_values, py::arg("M"), py::arg("scale_by_sqrt_n") = false);
    m.def("operator_norm", &operator_norm, py::arg("M"), py::arg("rel_tol") = 1e-8,
          py::arg("max_iter") = 1000);

    m.def(
        "run_single",
        [](const py::dict& cfg, long n_test, bool spectrum) {
            RunOptions opts;
            opts.n_test = n_test;
            opts.compute_test_error = n_test > 0;
            opts.compute_spectrum = spectrum;
            return record_to_dict(run_single(config_from_dict(cfg), opts));
        },
        py::arg("config"), py::arg("n_test") = 20000, py::arg("spectrum") = true,
        "one full experiment cell; returns a dict of measured values and theory");

    m.attr("__version__") = "0.1.0";
}
