#include "nmrcage/error.hpp"
#include "nmrcage/fid.hpp"
#include "nmrcage/model.hpp"
#include "nmrcage/specfun.hpp"
#include "nmrcage/spectrum.hpp"
#include "nmrcage/stochastic.hpp"

#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

namespace py = pybind11;
using namespace nmrcage;

namespace {

py::array_t<double> to_array(const std::vector<double>& v)
{
    return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

py::array_t<double> times_of(const FidSeries& s)
{
    std::vector<double> t(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) {
        t[k] = s.time(k);
    }
    return to_array(t);
}

Quadrature quadrature_from(const std::string& name)
{
    if (name == "filon") {
        return Quadrature::FilonCosine;
    }
    if (name == "trapezoid") {
        return Quadrature::TrapezoidDense;
    }
    throw DomainError("quadrature must be 'filon' or 'trapezoid'");
}

} // namespace

PYBIND11_MODULE(_nmrcage, m)
{
    m.doc() = "NMR free induction decay and line shapes of spin-1/2 gas in fluctuating nano-containers.";
    m.attr("__version__") = NMRCAGE_VERSION;

    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);

    // model
    py::class_<ContainerGeometry>(m, "ContainerGeometry")
        .def(py::init<double, double, double, double>(), py::arg("gamma2hbar"), py::arg("form_factor"),
             py::arg("volume"), py::arg("theta"))
        .def_property_readonly("gamma2hbar", &ContainerGeometry::gamma2hbar)
        .def_property_readonly("form_factor", &ContainerGeometry::form_factor)
        .def_property_readonly("volume", &ContainerGeometry::volume)
        .def_property_readonly("theta", &ContainerGeometry::theta);

    py::class_<SpinEnsemble>(m, "SpinEnsemble")
        .def(py::init<int>(), py::arg("n_spins"))
        .def_property_readonly("n_spins", &SpinEnsemble::n_spins);

    py::class_<GaussianFluctuationModel>(m, "GaussianFluctuationModel")
        .def(py::init([](double mean_d, double variance, double tau_c) {
                 return GaussianFluctuationModel(mean_d, variance, tau_c);
             }),
             py::arg("mean_d"), py::arg("variance"), py::arg("tau_c"))
        .def_static("from_alpha", &GaussianFluctuationModel::from_alpha, py::arg("mean_d"), py::arg("alpha"),
                    py::arg("tau_c"))
        .def_property_readonly("mean_d", &GaussianFluctuationModel::mean_d)
        .def_property_readonly("variance", &GaussianFluctuationModel::variance)
        .def_property_readonly("tau_c", &GaussianFluctuationModel::tau_c)
        .def_property_readonly("frozen", &GaussianFluctuationModel::frozen)
        .def_property_readonly("alpha", &GaussianFluctuationModel::alpha);

    py::class_<VibrationModel>(m, "VibrationModel")
        .def(py::init<double, double, double>(), py::arg("mean_d"), py::arg("epsilon"), py::arg("omega"))
        .def_property_readonly("mean_d", &VibrationModel::mean_d)
        .def_property_readonly("epsilon", &VibrationModel::epsilon)
        .def_property_readonly("omega", &VibrationModel::omega);

    py::class_<FrequencyDistribution>(m, "FrequencyDistribution")
        .def(py::init<double, double>(), py::arg("omega0"), py::arg("delta"))
        .def_property_readonly("omega0", &FrequencyDistribution::omega0)
        .def_property_readonly("delta", &FrequencyDistribution::delta)
        .def_property_readonly("a0", &FrequencyDistribution::a0);

    m.def("hz_to_angular", py::vectorize(&hz_to_angular), py::arg("hz"));
    m.def("angular_to_hz", py::vectorize(&angular_to_hz), py::arg("rad_per_s"));
    m.def("coupling_from_geometry", &coupling_from_geometry, py::arg("geometry"));
    m.def("nu", &nmrcage::nu, py::arg("mean_d"), py::arg("ensemble"));
    m.def("second_moment", &second_moment, py::arg("ensemble"), py::arg("model"));

    // specfun
    m.def("erfcx", py::vectorize(py::overload_cast<std::complex<double>>(&specfun::erfcx)), py::arg("z"),
          "Scaled complementary error function exp(z^2) erfc(z) for complex z.");
    m.def("bessel_k0", py::vectorize(&specfun::bessel_k0), py::arg("x"));
    m.def("bessel_k0_scaled", py::vectorize(&specfun::bessel_k0_scaled), py::arg("x"));

    // fid
    m.def("fid_exact", py::vectorize([](double phi, SpinEnsemble e) { return fid_exact(phi, e); }),
          py::arg("phi"), py::arg("ensemble"));
    m.def("fid_large_n", py::vectorize([](double phi, SpinEnsemble e) { return fid_large_n(phi, e); }),
          py::arg("phi"), py::arg("ensemble"));
    m.def("t2_correlation", py::vectorize(&t2_correlation), py::arg("t"), py::arg("tau_c"));
    m.def("fid_gaussian",
          py::vectorize([](double t, SpinEnsemble e, GaussianFluctuationModel model) {
              return fid_gaussian(t, e, model);
          }),
          py::arg("t"), py::arg("ensemble"), py::arg("model"));
    m.def("fid_fast_fluct_regime", py::vectorize(&fid_fast_fluct_regime), py::arg("t"), py::arg("alpha"),
          py::arg("tau_c"), py::arg("nu"));
    m.def("fid_static_disorder_regime", py::vectorize(&fid_static_disorder_regime), py::arg("t"),
          py::arg("alpha"), py::arg("nu"));
    m.def("fid_vibration",
          py::vectorize([](double t, double nu_value, double epsilon, double omega) {
              return fid_vibration(t, nu_value, epsilon, omega);
          }),
          py::arg("t"), py::arg("nu"), py::arg("epsilon"), py::arg("omega"));
    m.def("fid_vibration_ensemble",
          py::vectorize([](double t, double nu_value, double epsilon, FrequencyDistribution dist) {
              return fid_vibration_ensemble(t, nu_value, epsilon, dist);
          }),
          py::arg("t"), py::arg("nu"), py::arg("epsilon"), py::arg("distribution"));
    m.def(
        "phase_shift",
        [](const std::vector<double>& d_values, double dt, double t0) {
            return to_array(phase_shift(CouplingTrajectory(t0, dt, d_values)));
        },
        py::arg("d_values"), py::arg("dt"), py::arg("t0") = 0.0);

    // spectrum
    m.def(
        "cosine_transform",
        [](const std::vector<double>& values, double dt, double omega_max, std::size_t n_omega, double omega_min,
           const std::string& quadrature, unsigned threads) {
            FidSeries fid{0.0, dt, values};
            TransformPlan plan;
            plan.omega_min = omega_min;
            plan.omega_max = omega_max;
            plan.n_omega = n_omega;
            plan.t_max = fid.time(fid.size() - 1);
            plan.quadrature = quadrature_from(quadrature);
            py::gil_scoped_release release;
            const auto s = cosine_transform(fid, plan, threads);
            py::gil_scoped_acquire acquire;
            return py::make_tuple(to_array(s.omegas), to_array(s.intensities));
        },
        py::arg("values"), py::arg("dt"), py::arg("omega_max"), py::arg("n_omega"), py::arg("omega_min") = 0.0,
        py::arg("quadrature") = "filon", py::arg("threads") = 1,
        "Line shape (1/pi) int F(t) cos(omega t) dt of F sampled from t = 0; returns (omegas, intensities).");
    m.def("gaussian_line", py::vectorize(&gaussian_line), py::arg("omega"), py::arg("nu"));
    m.def("lineshape_fast_fluct", py::vectorize(&lineshape_fast_fluct), py::arg("omega"), py::arg("alpha"),
          py::arg("tau_c"), py::arg("nu"));
    m.def("lorentzian_core", py::vectorize(&lorentzian_core), py::arg("omega"), py::arg("alpha"), py::arg("tau_c"));
    m.def("wing_tail",
          py::vectorize([](double omega, SpinEnsemble e, GaussianFluctuationModel model) {
              return wing_tail(omega, e, model);
          }),
          py::arg("omega"), py::arg("ensemble"), py::arg("model"));
    m.def("lineshape_static_disorder", py::vectorize(&lineshape_static_disorder), py::arg("omega"),
          py::arg("alpha"), py::arg("nu"));
    m.def("lineshape_satellites",
          py::vectorize([](double omega, double epsilon, double omega_vib, double nu_value) {
              return lineshape_satellites(omega, epsilon, omega_vib, nu_value);
          }),
          py::arg("omega"), py::arg("epsilon"), py::arg("omega_vib"), py::arg("nu"));
    m.def("frequency_density",
          py::vectorize([](double w, FrequencyDistribution d) { return frequency_density(w, d); }),
          py::arg("omega_vib"), py::arg("distribution"));
    m.def("lineshape_inhomogeneous",
          py::vectorize([](double omega, double epsilon, double nu_value, FrequencyDistribution d) {
              return lineshape_inhomogeneous(omega, epsilon, nu_value, d);
          }),
          py::arg("omega"), py::arg("epsilon"), py::arg("nu"), py::arg("distribution"));

    // stochastic
    m.def("exact_trace_fid", py::vectorize(&exact_trace_fid), py::arg("phi"), py::arg("n_spins"));
    m.def(
        "mc_average_fid",
        [](GaussianFluctuationModel model, SpinEnsemble e, double dt, std::size_t n_times,
           std::size_t n_trajectories, std::uint64_t seed, unsigned threads, bool exact) {
            McConfig cfg;
            cfg.n_trajectories = n_trajectories;
            cfg.seed = seed;
            cfg.grid = TimeGrid{0.0, dt, n_times};
            cfg.threads = threads;
            cfg.form = exact ? AveragedForm::Exact : AveragedForm::LargeN;
            McResult r;
            {
                py::gil_scoped_release release;
                r = mc_average_fid(model, e, cfg);
            }
            return py::make_tuple(times_of(r.mean), to_array(r.mean.values), to_array(r.std_error));
        },
        py::arg("model"), py::arg("ensemble"), py::arg("dt"), py::arg("n_times"), py::arg("n_trajectories"),
        py::arg("seed") = 0, py::arg("threads") = 1, py::arg("exact") = false,
        "Monte Carlo FID average; returns (t, mean, standard_error).");
}
