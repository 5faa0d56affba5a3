#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "wqst/cli.hpp"
#include "wqst/error.hpp"
#include "wqst/eval.hpp"
#include "wqst/geo.hpp"
#include "wqst/models/model.hpp"
#include "wqst/preprocess.hpp"
#include "wqst/products.hpp"
#include "wqst/synth.hpp"
#include "wqst/version.hpp"

namespace py = pybind11;
using namespace wqst;

namespace {

py::dict importance_dict(const ImportanceReport& r) {
  py::dict d;
  for (const auto& e : r.entries) d[py::str(e.feature)] = e.importance;
  return d;
}

synth::SynthSpec synth_spec(std::size_t n_stations, std::size_t samples, std::uint64_t seed,
                            const std::map<std::string, std::string>& fields) {
  synth::SynthSpec spec;
  spec.n_stations = n_stations;
  spec.samples_per_station = samples;
  spec.seed = seed;
  for (const auto& [k, v] : fields) spec.set(k, v);
  spec.validate();
  return spec;
}

}  // namespace

PYBIND11_MODULE(_wqst, m) {
  m.doc() = "Water-quality regression toolkit";
  m.attr("__version__") = std::string(kVersion);

  static py::exception<Error> error_type(m, "WqstError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error_type, (std::string(error_code_name(e.code())) + ": " + e.what()).c_str());
    }
  });

  m.def("rmse", &rmse, py::arg("pred"), py::arg("obs"));
  m.def("r_squared", &r_squared, py::arg("pred"), py::arg("obs"));

  m.def(
      "haversine_km",
      [](double lat1, double lon1, double lat2, double lon2) { return geo::haversine_km({lat1, lon1}, {lat2, lon2}); },
      py::arg("lat1"), py::arg("lon1"), py::arg("lat2"), py::arg("lon2"));
  m.def(
      "classify_distance", [](double km) { return std::string(geotype_name(geo::classify_distance(km))); },
      py::arg("distance_km"));
  m.def(
      "major_of", [](const std::string& code) { return std::string(1, major_of(code)); }, py::arg("sub_climate"));

  m.def("model_kinds", [] {
    std::vector<std::string> out;
    for (ModelKind k : kAllModelKinds) out.emplace_back(model_kind_key(k));
    return out;
  });
  m.def(
      "default_hyperparameters",
      [](const std::string& kind) { return ModelSpec{parse_model_kind(kind), {}, 0}.resolved(); }, py::arg("kind"));

  py::class_<TrainedModel>(m, "Model")
      .def_property_readonly("kind", [](const TrainedModel& t) { return std::string(model_kind_key(t.kind())); })
      .def_property_readonly("seed", [](const TrainedModel& t) { return t.spec().seed; })
      .def_property_readonly("hyperparameters", [](const TrainedModel& t) { return t.spec().resolved(); })
      .def_property_readonly("column_names", [](const TrainedModel& t) { return t.schema().column_names; })
      .def_property_readonly("warnings", &TrainedModel::warnings)
      .def_property_readonly("n_train", [](const TrainedModel& t) { return t.summary().n_train; })
      .def_property_readonly("in_sample_rmse", [](const TrainedModel& t) { return t.summary().in_sample_rmse; })
      .def_property_readonly("cv_rmse", [](const TrainedModel& t) { return t.summary().cv_rmse; })
      .def(
          "predict", [](const TrainedModel& t, const Eigen::MatrixXd& X) { return t.predict(X); }, py::arg("X"))
      .def(
          "save", [](const TrainedModel& t, const std::string& path) { save_model(path, t); }, py::arg("path"))
      .def("to_text", [](const TrainedModel& t) {
        std::ostringstream os;
        save_model(os, t);
        return os.str();
      });

  m.def(
      "fit",
      [](const std::string& kind, const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Hyperparameters& hp,
         std::uint64_t seed, std::optional<std::vector<std::string>> column_names) {
        FeatureSchema schema = FeatureSchema::numeric(static_cast<std::size_t>(X.cols()));
        if (column_names) schema.column_names = *column_names;
        return fit(ModelSpec{parse_model_kind(kind), hp, seed}, X, y, schema);
      },
      py::arg("kind"), py::arg("X"), py::arg("y"), py::arg("hyperparameters") = Hyperparameters{},
      py::arg("seed") = 0, py::arg("column_names") = std::nullopt);
  m.def(
      "load_model", [](const std::string& path) { return load_model(path); }, py::arg("path"));
  m.def(
      "model_from_text",
      [](const std::string& text) {
        std::istringstream in(text);
        return load_model(in);
      },
      py::arg("text"));

  m.def(
      "cross_validated_rmse",
      [](const std::string& kind, const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Hyperparameters& hp,
         std::size_t folds, std::uint64_t seed) {
        return cross_validated_rmse(ModelSpec{parse_model_kind(kind), hp, seed}, X, y,
                                    FeatureSchema::numeric(static_cast<std::size_t>(X.cols())), folds, seed);
      },
      py::arg("kind"), py::arg("X"), py::arg("y"), py::arg("hyperparameters") = Hyperparameters{},
      py::arg("folds") = 5, py::arg("seed") = 0);

  m.def(
      "synthetic_records",
      [](std::size_t n_stations, std::size_t samples, std::uint64_t seed,
         const std::map<std::string, std::string>& fields) {
        const auto ds = synth::generate(synth_spec(n_stations, samples, seed, fields));
        const auto n = static_cast<Eigen::Index>(ds.records.size());
        Eigen::VectorXd lat(n), lon(n), ph(n), dox(n), sc(n), wt(n);
        std::vector<std::int64_t> ids, year, month;
        std::vector<std::string> climate, geotype;
        for (Eigen::Index i = 0; i < n; ++i) {
          const auto& r = ds.records[static_cast<std::size_t>(i)];
          ids.push_back(r.station_id);
          year.push_back(r.year);
          month.push_back(r.month);
          lat(i) = r.latitude;
          lon(i) = r.longitude;
          ph(i) = r.ph;
          dox(i) = r.dissolved_oxygen;
          sc(i) = r.specific_conductance;
          wt(i) = r.water_temperature;
          climate.emplace_back(koppen_code(*r.climate_zone));
          geotype.emplace_back(geotype_name(*r.geographical_type));
        }
        py::dict d;
        d["station_id"] = ids;
        d["year"] = year;
        d["month"] = month;
        d["latitude"] = lat;
        d["longitude"] = lon;
        d["ph"] = ph;
        d["dissolved_oxygen"] = dox;
        d["specific_conductance"] = sc;
        d["water_temperature"] = wt;
        d["climate_zone"] = climate;
        d["geographical_type"] = geotype;
        return d;
      },
      py::arg("n_stations") = 1000, py::arg("samples_per_station") = 50, py::arg("seed") = 0,
      py::arg("fields") = std::map<std::string, std::string>{});

  m.def(
      "synthetic_design",
      [](const std::string& target, const std::string& regime, std::size_t n_stations, std::size_t samples,
         std::uint64_t seed, const std::map<std::string, std::string>& fields) {
        const auto ds = synth::generate(synth_spec(n_stations, samples, seed, fields));
        const auto dm = assemble(ds.records, FeatureRegime{parse_regime(regime), parse_indicator(target),
                                                           ClimateEncoding::MAJOR});
        return py::make_tuple(dm.X, dm.y, dm.schema.column_names);
      },
      py::arg("target"), py::arg("regime") = "st", py::arg("n_stations") = 200, py::arg("samples_per_station") = 20,
      py::arg("seed") = 0, py::arg("fields") = std::map<std::string, std::string>{});

  m.def(
      "spatio_temporal_row",
      [](int month, int year, double lat, double lon) {
        return Eigen::RowVectorXd(spatio_temporal_row(month, year, lat, lon));
      },
      py::arg("month"), py::arg("year"), py::arg("lat"), py::arg("lon"));

  m.def(
      "importance_gain", [](const TrainedModel& t) { return importance_dict(importance_gain(t)); }, py::arg("model"));
  m.def(
      "importance_permutation",
      [](const TrainedModel& t, const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::uint64_t seed,
         std::size_t repeats) { return importance_dict(importance_permutation(t, X, y, seed, repeats)); },
      py::arg("model"), py::arg("X"), py::arg("y"), py::arg("seed") = 0, py::arg("repeats") = 5);

  m.def(
      "forecast",
      [](const TrainedModel& t, double lat, double lon, int start_year, int end_year) {
        ForecastOptions opt;
        opt.start_year = start_year;
        opt.end_year = end_year;
        const auto s = forecast_point(t, {lat, lon}, opt);
        const auto n = static_cast<Eigen::Index>(s.rows.size());
        Eigen::MatrixXd out(n, 5);
        for (Eigen::Index i = 0; i < n; ++i) {
          const auto& r = s.rows[static_cast<std::size_t>(i)];
          out.row(i) << r.year, r.month, r.prediction, r.lo, r.hi;
        }
        return out;
      },
      py::arg("model"), py::arg("lat"), py::arg("lon"), py::arg("start_year") = 1975, py::arg("end_year") = 2070);

  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "wqst");
        std::vector<char*> argv;
        for (auto& a : args) argv.push_back(a.data());
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
