#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pfl/cases.hpp"
#include "pfl/extensions.hpp"
#include "pfl/report_json.hpp"

namespace py = pybind11;
using namespace pfl;

namespace {

py::object json_to_py(const Json& j) {
    switch (j.type()) {
        case Json::value_t::null: return py::none();
        case Json::value_t::boolean: return py::bool_(j.get<bool>());
        case Json::value_t::number_integer: return py::int_(j.get<long long>());
        case Json::value_t::number_unsigned: return py::int_(j.get<unsigned long long>());
        case Json::value_t::number_float: return py::float_(j.get<double>());
        case Json::value_t::string: return py::str(j.get<std::string>());
        case Json::value_t::array: {
            py::list out;
            for (const auto& item : j) out.append(json_to_py(item));
            return out;
        }
        case Json::value_t::object: {
            py::dict out;
            for (auto it = j.begin(); it != j.end(); ++it)
                out[py::str(it.key())] = json_to_py(it.value());
            return out;
        }
        default: return py::none();
    }
}

CaseParams make_params(const std::string& family, const std::string& lambda, const std::string& mu,
                       const std::string& nu) {
    return CaseParams{parse_family(family), parse_rational(lambda), parse_rational(mu),
                      parse_rational(nu)};
}

BaseSystem make_base(const std::string& name, const std::string& parameter) {
    if (name == "ppp2") return ppp2_base(parse_rational(parameter));
    if (name == "pmm2") return pmm2_base(parse_rational(parameter));
    if (name == "mpp2") return mpp2_base(parse_rational(parameter));
    throw Error(Errc::config_error, "unknown base family: " + name);
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "piecewise fractional-linear interval maps: duals, densities, jump extensions";

    static py::exception<Error> exc(m, "PflError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            exc(py::str("{}: {}").format(errc_name(e.code()), e.what()).cast<std::string>().c_str());
        }
    });

    py::class_<MoebiusBranch>(m, "Branch")
        .def(py::init([](const std::string& a, const std::string& b, const std::string& c,
                         const std::string& d) {
                 return MoebiusBranch(parse_quad(a), parse_quad(b), parse_quad(c), parse_quad(d));
             }),
             py::arg("a"), py::arg("b"), py::arg("c"), py::arg("d"),
             "matrix (a b; c d) acting as x -> (c + d x)/(a + b x)")
        .def("eval_exact",
             [](const MoebiusBranch& v, const std::string& x) {
                 return v.eval(parse_scalar(x)).str();
             })
        .def("eval", [](const MoebiusBranch& v, double x) {
            double den = v.a().to_double() + v.b().to_double() * x;
            return (v.c().to_double() + v.d().to_double() * x) / den;
        })
        .def("jacobian",
             [](const MoebiusBranch& v, const std::string& x, bool absolute) {
                 return v.jacobian(parse_quad(x), absolute).str();
             },
             py::arg("x"), py::arg("absolute") = false)
        .def("compose", [](const MoebiusBranch& v, const MoebiusBranch& w) { return compose(v, w); })
        .def("iterate", [](const MoebiusBranch& v, unsigned long n) { return iterate(v, n); })
        .def("adjoint", &MoebiusBranch::adjoint)
        .def("inverse", &MoebiusBranch::inverse)
        .def("det", [](const MoebiusBranch& v) { return v.det().str(); })
        .def("fixed_points",
             [](const MoebiusBranch& v) {
                 FixedPoints fps = fixed_points(v);
                 std::vector<std::string> out;
                 for (const auto& p : fps.points) out.push_back(p.str());
                 return out;
             })
        .def("equivalent", &MoebiusBranch::equivalent)
        .def("__repr__", [](const MoebiusBranch& v) { return v.str(); });

    m.def("scalar_str", [](const std::string& text) { return parse_scalar(text).str(); },
          "parse and re-render an exact scalar");
    m.def("scalar_float", [](const std::string& text) { return parse_scalar(text).to_double(); });
    m.def("sqrt_adjoin", [](const std::string& x) { return sqrt_adjoin(parse_rational(x)).str(); });
    m.def("sign", [](const std::string& x) { return parse_quad(x).sign(); });

    m.def(
        "classify",
        [](const std::string& family, const std::string& lam, const std::string& mu,
           const std::string& nu, std::size_t grid, std::size_t max_terms, double tolerance) {
            ClassificationReport report = classify(make_params(family, lam, mu, nu),
                                                   TruncationPolicy{max_terms, tolerance}, grid);
            return json_to_py(classification_json(report));
        },
        py::arg("family"), py::arg("lam"), py::arg("mu"), py::arg("nu"), py::arg("grid") = 101,
        py::arg("max_terms") = 1000, py::arg("tolerance") = 1e-10);

    m.def("build_map",
          [](const std::string& family, const std::string& lam, const std::string& mu,
             const std::string& nu) {
              return json_to_py(map_json(build_map(make_params(family, lam, mu, nu))));
          });

    m.def("validate_map", [](const py::object& map_obj) {
        Json j = Json::parse(py::str(py::module_::import("json").attr("dumps")(map_obj))
                                 .cast<std::string>());
        return json_to_py(validation_json(validate(map_from_json(j))));
    });

    m.def(
        "invariance",
        [](const std::string& family, const std::string& lam, const std::string& mu,
           const std::string& nu, std::size_t grid, std::size_t max_terms, double tolerance) {
            ClassificationReport report = classify(make_params(family, lam, mu, nu),
                                                   TruncationPolicy{max_terms, tolerance}, grid);
            if (!report.certificate) throw Error(Errc::config_error, "no density for these parameters");
            return json_to_py(residual_json(*report.certificate));
        },
        py::arg("family"), py::arg("lam"), py::arg("mu"), py::arg("nu"), py::arg("grid") = 101,
        py::arg("max_terms") = 1000, py::arg("tolerance") = 1e-10);

    m.def(
        "extend",
        [](const std::string& base, const std::string& parameter, unsigned steps, std::size_t grid,
           std::size_t max_terms, double tolerance) {
            BaseSystem system = make_base(base, parameter);
            ExtensionResult result = n_step_extension(system, steps);
            Json j = extension_json(result);
            j["residual"] = residual_json(invariance_residual(
                result.map, result.density, default_grid(grid), TruncationPolicy{max_terms, tolerance}));
            return json_to_py(j);
        },
        py::arg("base"), py::arg("parameter"), py::arg("steps") = 1, py::arg("grid") = 101,
        py::arg("max_terms") = 1000, py::arg("tolerance") = 1e-10);

    m.def(
        "lemma1",
        [](const std::string& base, const std::string& parameter, std::size_t grid,
           std::size_t max_terms, double tolerance) {
            BaseSystem system = make_base(base, parameter);
            std::size_t jump_index = system.map.labels[0] == system.jump_label ? 0 : 1;
            Density series(SeriesDensity(system.density, system.map.branches[jump_index], 2));
            return json_to_py(residual_json(verify_lemma1(system, series, default_grid(grid),
                                                          TruncationPolicy{max_terms, tolerance})));
        },
        py::arg("base"), py::arg("parameter"), py::arg("grid") = 101, py::arg("max_terms") = 1000,
        py::arg("tolerance") = 1e-10);

    m.def(
        "orbit_histogram",
        [](const std::string& family, const std::string& lam, const std::string& mu,
           const std::string& nu, double x0, std::size_t iterations, std::size_t bins,
           std::size_t burn_in) {
            Histogram h = orbit_histogram(build_map(make_params(family, lam, mu, nu)), x0,
                                          iterations, bins, burn_in);
            return h.mass;
        },
        py::arg("family"), py::arg("lam"), py::arg("mu"), py::arg("nu"), py::arg("x0") = 0.3183098861837907,
        py::arg("iterations") = 100000, py::arg("bins") = 10, py::arg("burn_in") = 1000);

    m.def(
        "density_table",
        [](const std::string& family, const std::string& lam, const std::string& mu,
           const std::string& nu, std::size_t grid, std::size_t max_terms, double tolerance) {
            ClassificationReport report = classify(make_params(family, lam, mu, nu),
                                                   TruncationPolicy{max_terms, tolerance}, 11);
            if (!report.density) throw Error(Errc::config_error, "no density for these parameters");
            py::list rows;
            for (const QuadExt& x : default_grid(grid)) {
                try {
                    DensityValue v = report.density->eval(x.to_double(),
                                                          TruncationPolicy{max_terms, tolerance});
                    rows.append(py::make_tuple(x.str(), v.value, v.tail_bound));
                } catch (const Error&) {
                }
            }
            return rows;
        },
        py::arg("family"), py::arg("lam"), py::arg("mu"), py::arg("nu"), py::arg("grid") = 101,
        py::arg("max_terms") = 1000, py::arg("tolerance") = 1e-10);

    m.def("fibonacci_iterate_check", &fibonacci_iterate_check, py::arg("n_max") = 20);

    m.def("dual", [](const std::string& family, const std::string& lam, const std::string& mu,
                     const std::string& nu) {
        CaseParams params = make_params(family, lam, mu, nu);
        py::list out;
        for (const auto& v : dual_map(params)) out.append(v.str("y"));
        return out;
    });
}
