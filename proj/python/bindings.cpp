#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "ecodrive/advisor/advisor.hpp"
#include "ecodrive/cli/compare.hpp"
#include "ecodrive/energy/energy.hpp"
#include "ecodrive/error.hpp"
#include "ecodrive/geomap/geo.hpp"
#include "ecodrive/geomap/map_graph.hpp"
#include "ecodrive/simtruck/scenario_config.hpp"
#include "ecodrive/simtruck/scenario_runner.hpp"
#include "ecodrive/simtruck/trajectory_log.hpp"
#include "ecodrive/spatnet/spat.hpp"

namespace py = pybind11;
using namespace ecodrive;

namespace {

geomap::GeoPoint point(const std::pair<double, double>& p) { return {p.first, p.second}; }

py::dict band_dict(const advisor::SpeedBand& b) {
  py::dict d;
  d["v_lower_mps"] = b.v_lower_mps;
  d["v_upper_mps"] = b.v_upper_mps;
  d["gating"] = std::string(advisor::to_string(b.gating));
  return d;
}

py::dict fuel_dict(const energy::FuelSummary& f) {
  py::dict d;
  d["total_g"] = f.total_g;
  d["idle_g"] = f.idle_g;
  d["moving_g"] = f.moving_g;
  d["distance_m"] = f.distance_m;
  d["duration_s"] = f.duration_s;
  d["stops_count"] = f.stops_count;
  return d;
}

/// Column-oriented view of a log, easy to hand to numpy or pandas.
py::dict log_dict(const simtruck::TrajectoryLog& log) {
  py::dict header;
  header["scenario"] = log.header.scenario;
  header["driver"] = log.header.driver;
  header["config_digest"] = log.header.config_digest;
  header["seed"] = log.header.seed;
  header["dt_s"] = log.header.dt_s;
  header["channel"] = log.header.channel;
  header["diagnostic"] = log.header.diagnostic;

  py::list t, lat, lon, speed, accel, d_sig, phase, lo, hi, gating, fuel, odo;
  for (const auto& r : log.rows) {
    t.append(r.t_s);
    lat.append(r.position.lat);
    lon.append(r.position.lon);
    speed.append(r.speed_mps);
    accel.append(r.accel_mps2);
    d_sig.append(r.d_sig_m ? py::object(py::float_(*r.d_sig_m)) : py::none());
    phase.append(r.phase ? py::object(py::str(std::string(spatnet::to_string(*r.phase)))) : py::none());
    lo.append(r.band.v_lower_mps);
    hi.append(r.band.v_upper_mps);
    gating.append(std::string(advisor::to_string(r.band.gating)));
    fuel.append(r.fuel_rate_gps);
    odo.append(r.odometer_m);
  }
  py::dict rows;
  rows["t_s"] = t;
  rows["lat"] = lat;
  rows["lon"] = lon;
  rows["speed_mps"] = speed;
  rows["accel_mps2"] = accel;
  rows["d_sig_m"] = d_sig;
  rows["phase"] = phase;
  rows["v_lower_mps"] = lo;
  rows["v_upper_mps"] = hi;
  rows["gating"] = gating;
  rows["fuel_rate_gps"] = fuel;
  rows["odometer_m"] = odo;

  py::dict out;
  out["header"] = header;
  out["rows"] = rows;
  out["csv"] = simtruck::to_csv(log);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Connected eco-driving core: map matching, SPaT, speed advisory, truck simulation, fuel.";
  m.attr("__version__") = ECODRIVE_VERSION;

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<LoadError>(m, "LoadError", base.ptr());
  py::register_exception<NoMatchError>(m, "NoMatchError", base.ptr());
  py::register_exception<NoSignalError>(m, "NoSignalError", base.ptr());
  py::register_exception<cli::ComparisonRefused>(m, "ComparisonRefused", base.ptr());

  m.attr("EARTH_RADIUS_M") = geomap::kEarthRadiusM;

  m.def("haversine_distance",
        [](std::pair<double, double> a, std::pair<double, double> b) {
          return geomap::haversine_distance(point(a), point(b));
        },
        py::arg("a"), py::arg("b"), "Great-circle distance in meters between (lat, lon) pairs.");

  m.def("project_onto_segment",
        [](std::pair<double, double> truck, std::pair<double, double> n1, std::pair<double, double> n2) {
          const auto p = geomap::project_onto_segment(point(truck), point(n1), point(n2));
          return py::make_tuple(p.lateral_error_m, p.remaining_to_n2_m, p.out_of_segment());
        },
        py::arg("truck"), py::arg("n1"), py::arg("n2"),
        "(lateral_error_m, remaining_to_n2_m, out_of_segment) of the truck against segment n1->n2.");

  py::class_<geomap::MapGraph, std::shared_ptr<geomap::MapGraph>>(m, "MapGraph")
      .def_static("load",
                  [](const std::filesystem::path& path) {
                    return std::make_shared<geomap::MapGraph>(geomap::load_map_file(path));
                  },
                  py::arg("path"))
      .def_static("parse",
                  [](const std::string& text) { return std::make_shared<geomap::MapGraph>(geomap::load_map(text)); },
                  py::arg("text"))
      .def_property_readonly("segment_ids",
                             [](const geomap::MapGraph& g) {
                               std::vector<std::string> ids;
                               for (const auto& s : g.segments()) ids.push_back(s.id);
                               return ids;
                             })
      .def_property_readonly("signals",
                             [](const geomap::MapGraph& g) {
                               std::vector<std::tuple<std::string, int, int>> out;
                               for (const auto& s : g.signals()) {
                                 out.emplace_back(s.node_id, s.ref.intersection_id, s.ref.signal_group_id);
                               }
                               return out;
                             })
      .def("serialize", [](const geomap::MapGraph& g) { return geomap::serialize_map(g); })
      .def("match",
           [](const geomap::MapGraph& g, std::pair<double, double> truck, double heading_deg) {
             const auto r = geomap::match_to_map(point(truck), heading_deg, g);
             py::dict d;
             d["segment_id"] = r.segment_id;
             d["lateral_error_m"] = r.lateral_error_m;
             d["d_sig_m"] = r.distance_to_signal_m;
             d["speed_limit_mps"] = r.speed_limit_mps;
             d["intersection_id"] = r.signal.ref.intersection_id;
             d["signal_group_id"] = r.signal.ref.signal_group_id;
             return d;
           },
           py::arg("truck"), py::arg("heading_deg"));

  m.def("controller_state",
        [](const std::vector<std::pair<std::string, double>>& plan, double offset_s, double t_s) {
          std::vector<spatnet::PhaseInterval> iv;
          for (const auto& [c, d] : plan) iv.push_back({spatnet::phase_from_string(c), d});
          const auto s = spatnet::controller_state(spatnet::PhasePlan(std::move(iv), offset_s), t_s);
          return py::make_tuple(std::string(spatnet::to_string(s.phase)), s.time_remaining_s);
        },
        py::arg("plan"), py::arg("cycle_offset_s"), py::arg("t_s"),
        "Phase and floor-quantized residual of a fixed-time plan such as [('GREEN', 30), ('AMBER', 4), ('RED', 26)].");

  m.def("reference_speed", &advisor::reference_speed, py::arg("d_sig_m"), py::arg("t_current_s"));

  m.def("time_to_collision",
        [](double gap_m, double closing_mps) {
          return advisor::time_to_collision({gap_m, 0.0, closing_mps});
        },
        py::arg("gap_m"), py::arg("closing_mps"));

  m.def("advise",
        [](double d_sig_m, const std::string& phase, double t_current_s, double v_lim_mps, double ego_speed_mps,
           std::optional<std::tuple<double, double, double>> lead, double spat_age_ms, double following_red_s,
           double ttc_threshold_s, double staleness_s) {
          advisor::AdvisoryInput in;
          in.d_sig_m = d_sig_m;
          in.phase = spatnet::phase_from_string(phase);
          in.t_current_s = t_current_s;
          in.v_lim_mps = v_lim_mps;
          in.ego_speed_mps = ego_speed_mps;
          in.spat_age_ms = spat_age_ms;
          in.following_red_s = following_red_s;
          if (lead) in.lead = advisor::LeadVehicleObservation{std::get<0>(*lead), std::get<1>(*lead), std::get<2>(*lead)};
          advisor::AdvisorConfig cfg;
          cfg.ttc_threshold_s = ttc_threshold_s;
          cfg.staleness_s = staleness_s;
          return band_dict(advisor::advise(in, cfg));
        },
        py::arg("d_sig_m"), py::arg("phase"), py::arg("t_current_s"), py::arg("v_lim_mps"),
        py::arg("ego_speed_mps") = 0.0, py::arg("lead") = py::none(), py::arg("spat_age_ms") = 0.0,
        py::arg("following_red_s") = 0.0, py::arg("ttc_threshold_s") = 4.0, py::arg("staleness_s") = 2.5,
        "Speed band for one input; lead is (gap_m, lead_speed_mps, closing_mps).");

  m.def("tractive_power",
        [](double v, double a, double grade) { return energy::tractive_power(v, a, grade, {}); },
        py::arg("speed_mps"), py::arg("accel_mps2"), py::arg("grade_rad") = 0.0);
  m.def("fuel_rate", [](double p) { return energy::fuel_rate(p, {}); }, py::arg("power_w"));

  m.def("run_scenario",
        [](const std::filesystem::path& config, std::optional<std::uint64_t> seed) {
          auto cfg = simtruck::load_scenario(config);
          if (seed) cfg.seed = *seed;
          simtruck::TrajectoryLog log;
          {
            py::gil_scoped_release release;
            log = simtruck::run_scenario(cfg);
          }
          return log_dict(log);
        },
        py::arg("config"), py::arg("seed") = py::none(),
        "Runs a scenario file; returns {'header', 'rows' (columns), 'csv'}.");

  m.def("read_log", [](const std::filesystem::path& path) { return log_dict(simtruck::read_csv_file(path)); },
        py::arg("path"));

  m.def("trip_fuel", [](const std::filesystem::path& path) { return fuel_dict(cli::trip_fuel(simtruck::read_csv_file(path))); },
        py::arg("log_path"));

  m.def("compare",
        [](const std::filesystem::path& baseline, const std::filesystem::path& eco, std::pair<double, double> window) {
          const auto report =
              cli::compare_logs(simtruck::read_csv_file(baseline), simtruck::read_csv_file(eco), window);
          return py::module_::import("json").attr("loads")(cli::to_json(report));
        },
        py::arg("baseline"), py::arg("eco"), py::arg("window") = std::pair{2.0, 25.0},
        "Fuel comparison report of a baseline and an eco log of the same scenario.");
}
