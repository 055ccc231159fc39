#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "evcond/limit_sim.hpp"
#include "evcond/models.hpp"
#include "evcond/report.hpp"

namespace py = pybind11;
using namespace evcond;

namespace {

BivariateSample sample_from_array(
    const py::array_t<double, py::array::c_style | py::array::forcecast>& values) {
    if (values.ndim() != 2 || values.shape(1) != 2)
        throw std::invalid_argument("expected an (n, 2) array");
    const auto view = values.unchecked<2>();
    BivariateSample sample;
    const py::ssize_t n = values.shape(0);
    sample.x.reserve(n);
    sample.y.reserve(n);
    for (py::ssize_t i = 0; i < n; ++i) {
        sample.x.push_back(view(i, 0));
        sample.y.push_back(view(i, 1));
    }
    validate_sample(sample);
    return sample;
}

py::array_t<double> sample_to_array(const BivariateSample& sample) {
    py::array_t<double> out({static_cast<py::ssize_t>(sample.size()), py::ssize_t{2}});
    auto view = out.mutable_unchecked<2>();
    for (int i = 0; i < sample.size(); ++i) {
        view(i, 0) = sample.x[i];
        view(i, 1) = sample.y[i];
    }
    return out;
}

TestConfig make_config(int k, double beta, double alpha, int reps, int grid, int theta_grid,
                       std::uint64_t seed) {
    TestConfig config;
    config.k = k;
    config.beta = beta;
    config.alpha = alpha;
    config.reps = reps;
    config.quad_cells = grid;
    config.theta_cells = theta_grid;
    config.seed = seed;
    return config;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Rank-based test of bivariate extreme-value dependence with simulated "
              "critical values";

    py::class_<BivariateSample>(m, "BivariateSample")
        .def(py::init(&sample_from_array), py::arg("values"))
        .def_property_readonly("values", &sample_to_array)
        .def("__len__", &BivariateSample::size);

    py::class_<RankData>(m, "RankData")
        .def_readonly("rx", &RankData::rx)
        .def_readonly("ry", &RankData::ry)
        .def_readonly("n", &RankData::n)
        .def_readonly("ties_x", &RankData::ties_x)
        .def_readonly("ties_y", &RankData::ties_y);

    py::class_<SpectralCdf>(m, "SpectralCdf")
        .def("eval", &SpectralCdf::eval, py::arg("theta"))
        .def_property_readonly("total", &SpectralCdf::total)
        .def_property_readonly("atom_count", &SpectralCdf::atom_count)
        .def_readonly("angles", &SpectralCdf::angles);

    py::class_<AtomMeasure>(m, "AtomMeasure")
        .def_readonly("k", &AtomMeasure::k)
        .def_readonly("n", &AtomMeasure::n)
        .def_property_readonly("total_mass", &AtomMeasure::total_mass)
        .def("box_mass", &box_mass, py::arg("x"), py::arg("y"))
        .def("strip_mass", &strip_mass, py::arg("x_lo"), py::arg("x_hi"), py::arg("y_lo"),
             py::arg("y_hi"));

    py::class_<QuantileTable>(m, "QuantileTable")
        .def_readonly("probs", &QuantileTable::probs)
        .def_readonly("quantiles", &QuantileTable::quantiles)
        .def_readonly("reps", &QuantileTable::reps)
        .def_readonly("k", &QuantileTable::k)
        .def_readonly("beta", &QuantileTable::beta)
        .def_readonly("seed", &QuantileTable::seed)
        .def("at", &QuantileTable::at, py::arg("p"))
        .def("to_csv", &QuantileTable::to_csv)
        .def("to_json", &QuantileTable::to_json);

    py::class_<TestReport>(m, "TestReport")
        .def_readonly("n", &TestReport::n)
        .def_readonly("k", &TestReport::k)
        .def_readonly("beta", &TestReport::beta)
        .def_readonly("alpha", &TestReport::alpha)
        .def_readonly("kln", &TestReport::kln)
        .def_readonly("quantile", &TestReport::quantile)
        .def_readonly("reject", &TestReport::reject)
        .def_readonly("reps", &TestReport::reps)
        .def_readonly("seed", &TestReport::seed)
        .def_readonly("ties", &TestReport::ties)
        .def("to_json", &TestReport::to_json, py::arg("include_timing") = false);

    m.def("load_sample",
          [](const std::string& path, bool skip_header) {
              LoadOptions opts;
              opts.skip_header = skip_header;
              return load_sample_file(path, opts);
          },
          py::arg("path"), py::arg("skip_header") = false);
    m.def("save_sample",
          [](const std::string& path, const BivariateSample& sample) {
              save_sample_file(path, sample);
          },
          py::arg("path"), py::arg("sample"));

    m.def("compute_ranks", &compute_ranks, py::arg("sample"));
    m.def("spectral_cdf", &spectral_cdf, py::arg("ranks"), py::arg("k"));
    m.def("stdf_rank", &stdf_rank, py::arg("ranks"), py::arg("k"), py::arg("x"), py::arg("y"));
    m.def("stdf_spectral", &stdf_spectral, py::arg("phi"), py::arg("x"), py::arg("y"));
    m.def("exponent_measure", &exponent_measure, py::arg("ranks"), py::arg("k"));

    m.def("test_statistic",
          [](const RankData& ranks, int k, double beta, int grid) {
              return test_statistic(ranks, k, beta, QuadSpec{grid});
          },
          py::arg("ranks"), py::arg("k"), py::arg("beta") = 2.0, py::arg("grid") = 200);

    m.def("k_scan",
          [](const BivariateSample& sample, const std::vector<int>& ks, double beta, int grid) {
              const ScanCurve curve = k_scan(sample, ks, beta, QuadSpec{grid});
              std::vector<std::pair<int, double>> out;
              out.reserve(curve.entries.size());
              for (const auto& e : curve.entries) out.emplace_back(e.k, e.kln);
              return out;
          },
          py::arg("sample"), py::arg("k_values"), py::arg("beta") = 2.0, py::arg("grid") = 200);

    m.def("limit_quantiles",
          [](const BivariateSample& sample, int k, double beta, int reps,
             const std::vector<double>& probs, int grid, int theta_grid, std::uint64_t seed) {
              const RankData ranks = compute_ranks(sample);
              const AtomMeasure atoms = exponent_measure(ranks, k);
              const ControlMeasure measure = control_from_atoms(atoms);
              const SmoothedFunctionals fn = SmoothedFunctionals::estimated(atoms);
              py::gil_scoped_release release;
              return limit_quantiles(measure, fn, beta, reps, probs, QuadSpec{grid}, theta_grid,
                                     seed);
          },
          py::arg("sample"), py::arg("k"), py::arg("beta") = 2.0, py::arg("reps") = 10000,
          py::arg("probs") = std::vector<double>{0.5, 0.9, 0.95, 0.99}, py::arg("grid") = 200,
          py::arg("theta_grid") = 200, py::arg("seed") = 1);

    m.def("cauchy_limit_quantiles",
          [](double beta, int reps, const std::vector<double>& probs, int cells,
             double strip_extent, int grid, int theta_grid, std::uint64_t seed) {
              const AnalyticMeasure cauchy = cauchy_analytic();
              MeshSpec mesh;
              mesh.cells_per_unit = cells;
              mesh.strip_extent = strip_extent;
              const ControlMeasure measure = discretize_analytic(cauchy, mesh);
              const SmoothedFunctionals fn = SmoothedFunctionals::analytic(cauchy);
              py::gil_scoped_release release;
              return limit_quantiles(measure, fn, beta, reps, probs, QuadSpec{grid}, theta_grid,
                                     seed);
          },
          py::arg("beta") = 2.0, py::arg("reps") = 10000,
          py::arg("probs") = std::vector<double>{0.5, 0.9, 0.95, 0.99}, py::arg("cells") = 200,
          py::arg("strip_extent") = 100.0, py::arg("grid") = 200, py::arg("theta_grid") = 200,
          py::arg("seed") = 1);

    m.def("run_test",
          [](const BivariateSample& sample, int k, double beta, double alpha, int reps, int grid,
             int theta_grid, std::uint64_t seed) {
              const TestConfig config =
                  make_config(k, beta, alpha, reps, grid, theta_grid, seed);
              config.validate(sample.size());
              py::gil_scoped_release release;
              return run_test(sample, config);
          },
          py::arg("sample"), py::arg("k"), py::arg("beta") = 2.0, py::arg("alpha") = 0.05,
          py::arg("reps") = 10000, py::arg("grid") = 200, py::arg("theta_grid") = 200,
          py::arg("seed") = 1);

    m.def("gen_cauchy",
          [](int n, std::uint64_t seed) {
              RngStream stream(seed, stream_ids::generator);
              return sample_to_array(sample_cauchy(n, stream));
          },
          py::arg("n"), py::arg("seed") = 1);
    m.def("gen_gumbel",
          [](int n, double theta, std::uint64_t seed) {
              RngStream stream(seed, stream_ids::generator);
              return sample_to_array(sample_gumbel(n, theta, stream));
          },
          py::arg("n"), py::arg("theta") = 10.0, py::arg("seed") = 1);
    m.def("gen_alternative",
          [](int n, std::uint64_t seed) {
              RngStream stream(seed, stream_ids::generator);
              return sample_to_array(sample_alternative(n, stream));
          },
          py::arg("n"), py::arg("seed") = 1);
}
