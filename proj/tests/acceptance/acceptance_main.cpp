// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <fmt/format.h>

#include "../support/oracles.hpp"
#include "ecodrive/advisor/advisor.hpp"
#include "ecodrive/cli/commands.hpp"
#include "ecodrive/cli/compare.hpp"
#include "ecodrive/geomap/geo.hpp"
#include "ecodrive/geomap/map_graph.hpp"
#include "ecodrive/simtruck/scenario_runner.hpp"

namespace {

using namespace ecodrive;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

const geomap::SignalRef kFixtureSignal{203, 2};

simtruck::TrajectoryLog run_fixture(const std::string& name) {
  return simtruck::run_scenario(simtruck::load_scenario(oracle::fixture(name)));
}

// ---------------------------------------------------------------------------

Outcome band_oracle() {
  std::mt19937_64 rng(0xBA4D);
  std::uniform_real_distribution<double> d_dist(0.0, 1000.0), t_dist(0.1, 120.0), lim_dist(5.0, 31.9),
      red_dist(5.0, 60.0);
  std::uniform_int_distribution<int> phase_dist(0, 2);
  constexpr double kStep = 0.01;
  constexpr double kRel = 1e-12;

  std::size_t violations = 0;
  std::string first;
  const auto start = std::chrono::steady_clock::now();
  constexpr int kSamples = 10000;
  for (int i = 0; i < kSamples; ++i) {
    advisor::AdvisoryInput in;
    in.d_sig_m = d_dist(rng);
    in.t_current_s = t_dist(rng);
    in.v_lim_mps = lim_dist(rng);
    in.phase = static_cast<advisor::PhaseColor>(phase_dist(rng));
    in.following_red_s = red_dist(rng);
    const auto band = advisor::advise(in);
    const double d = in.d_sig_m;

    bool ok = band.gating == advisor::Gating::Active;
    if (in.phase == advisor::PhaseColor::Green) {
      const double t = in.t_current_s;
      if (band.v_lower_mps == 0.0 && band.v_upper_mps == 0.0 && d > 0.0) {
        // Wait band: no admissible speed clears the line in time.
        for (double v = kStep; v <= in.v_lim_mps + 1e-12; v += kStep) ok &= oracle::arrival_time(d, v) > t;
        ok &= oracle::arrival_time(d, in.v_lim_mps) > t;
      } else {
        ok &= band.v_upper_mps == in.v_lim_mps;
        for (double v = band.v_lower_mps; v <= band.v_upper_mps + 1e-12; v += kStep) {
          ok &= oracle::arrival_time(d, v) <= t * (1 + kRel);
        }
        ok &= oracle::arrival_time(d, band.v_upper_mps) <= t * (1 + kRel);
        if (band.v_lower_mps >= kStep) ok &= oracle::arrival_time(d, band.v_lower_mps - kStep) > t;
      }
    } else {
      const double t = in.t_current_s + (in.phase == advisor::PhaseColor::Amber ? in.following_red_s : 0.0);
      ok &= band.v_lower_mps == 0.0 && band.v_upper_mps <= in.v_lim_mps;
      for (double v = kStep; v <= band.v_upper_mps + 1e-12; v += kStep) {
        ok &= oracle::arrival_time(d, v) >= t * (1 - kRel);
      }
      ok &= oracle::arrival_time(d, band.v_upper_mps) >= t * (1 - kRel);
      if (band.v_upper_mps + kStep <= in.v_lim_mps) ok &= oracle::arrival_time(d, band.v_upper_mps + kStep) < t;
    }
    if (!ok && violations++ == 0) {
      first = fmt::format("d={} t={} v_lim={} phase={} -> [{}, {}]", d, in.t_current_s, in.v_lim_mps,
                          spatnet::to_string(in.phase), band.v_lower_mps, band.v_upper_mps);
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {violations == 0 && secs < 5.0,
          fmt::format("{} samples, {} violations, {:.2f} s{}", kSamples, violations, secs,
                      first.empty() ? "" : "; first: " + first)};
}

Outcome drift_invariance() {
  const auto map = geomap::load_map_file(oracle::source_dir() / "data/maps/carson_demo_corridor.json");
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < map.segments().size(); ++i) {
    if (map.next_signal(i)) candidates.push_back(i);
  }
  std::mt19937_64 rng(0xD41F7);
  std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
  std::uniform_real_distribution<double> frac(0.02, 0.98), lateral(-3.0, 3.0);

  std::size_t violations = 0;
  double worst = 0.0;
  constexpr int kSamples = 1000;
  for (int i = 0; i < kSamples; ++i) {
    const auto& seg = map.segments()[candidates[pick(rng)]];
    const auto on_lane =
        geomap::interpolate(map.node(seg.from).position, map.node(seg.to).position, frac(rng));
    const double off = lateral(rng);
    const double h = seg.heading_deg * geomap::kDegToRad;
    const auto shifted = geomap::offset_by(on_lane, off * std::cos(h), -off * std::sin(h));
    const double d0 = geomap::match_to_map(on_lane, seg.heading_deg, map).distance_to_signal_m;
    const double d1 = geomap::match_to_map(shifted, seg.heading_deg, map).distance_to_signal_m;
    const double dev = std::abs(d1 - d0);
    worst = std::max(worst, dev);
    if (!(dev < 0.05)) ++violations;
  }
  return {violations == 0,
          fmt::format("{} positions, {} violations, max deviation {:.2e} m", kSamples, violations, worst)};
}

Outcome geometry_oracles() {
  std::mt19937_64 rng(0x6E0);
  std::uniform_real_distribution<double> lat(-80.0, 80.0), lon(-180.0, 180.0), local(-0.05, 0.05);
  double worst_rel = 0.0;
  std::size_t hav_bad = 0;
  for (int i = 0; i < 10000; ++i) {
    const geomap::GeoPoint a{lat(rng), lon(rng)};
    // Half global pairs, half within a few kilometres.
    geomap::GeoPoint b = i % 2 == 0 ? geomap::GeoPoint{lat(rng), lon(rng)}
                                    : geomap::GeoPoint{a.lat + local(rng), a.lon + local(rng)};
    if (b.lon > 180.0) b.lon -= 360.0;
    if (b.lon < -180.0) b.lon += 360.0;
    const double ref = oracle::central_angle_distance(a.lat, a.lon, b.lat, b.lon);
    const double got = geomap::haversine_distance(a, b);
    const double rel = ref > 0 ? std::abs(got - ref) / ref : std::abs(got);
    worst_rel = std::max(worst_rel, rel);
    if (!(rel <= 1e-6)) ++hav_bad;
  }

  std::uniform_real_distribution<double> near(-250.0, 250.0);
  double worst_m = 0.0;
  std::size_t heron_bad = 0;
  std::size_t compared = 0;
  for (int i = 0; i < 10000; ++i) {
    const geomap::GeoPoint n1{33.80 + local(rng), -118.23 + local(rng)};
    const auto n2 = geomap::offset_by(n1, near(rng), near(rng));
    const auto t = geomap::offset_by(n1, near(rng), near(rng));
    if (geomap::haversine_distance(n1, n2) < 1.0) continue;
    const auto p = geomap::project_onto_segment(t, n1, n2);
    const auto o = oracle::planar_projection(t.lat, t.lon, n1.lat, n1.lon, n2.lat, n2.lon);
    const double len = geomap::haversine_distance(n1, n2);
    const double along = len - o.remaining_m;
    if (std::abs(along) < 1e-3 || std::abs(along - len) < 1e-3) continue;  // on a classification boundary
    ++compared;
    double err = 0.0;
    if (o.beyond_end) {
      err = p.side == geomap::SegmentSide::BeyondEnd ? std::abs(p.remaining_to_n2_m) : INFINITY;
    } else if (o.before_start) {
      err = p.side == geomap::SegmentSide::BeforeStart ? std::abs(p.remaining_to_n2_m - len) : INFINITY;
    } else {
      err = p.side == geomap::SegmentSide::Interior
                ? std::max(std::abs(p.lateral_error_m - o.lateral_m), std::abs(p.remaining_to_n2_m - o.remaining_m))
                : INFINITY;
    }
    worst_m = std::max(worst_m, err);
    if (!(err <= 1e-3)) ++heron_bad;
  }
  return {hav_bad == 0 && heron_bad == 0 && compared > 9000,
          fmt::format("haversine: 10000 pairs, {} over 1e-6 (max rel {:.1e}); projection: {} triangles, {} over "
                      "1e-3 m (max {:.1e} m)",
                      hav_bad, worst_rel, compared, heron_bad, worst_m)};
}

// Rows on the approach to the fixture signal, up to and including the last one before the line.
std::vector<const simtruck::LogRow*> approach(const simtruck::TrajectoryLog& log) {
  std::vector<const simtruck::LogRow*> out;
  for (const auto& r : log.rows) {
    if (r.true_signal && *r.true_signal == kFixtureSignal) out.push_back(&r);
  }
  return out;
}

struct Crossing {
  double t_s = 0.0;
  double speed_mps = 0.0;
};

std::optional<Crossing> crossing(const simtruck::TrajectoryLog& log) {
  for (std::size_t i = 0; i + 1 < log.rows.size(); ++i) {
    const auto& a = log.rows[i];
    const auto& b = log.rows[i + 1];
    if (a.true_signal == kFixtureSignal && b.true_signal != kFixtureSignal) {
      const double moved = b.odometer_m - a.odometer_m;
      const double frac = moved > 0 ? std::clamp(*a.true_d_sig_m / moved, 0.0, 1.0) : 0.0;
      return Crossing{a.t_s + frac * (b.t_s - a.t_s), a.speed_mps + frac * (b.speed_mps - a.speed_mps)};
    }
  }
  return std::nullopt;
}

bool stopped_at_line_on_red(const simtruck::TrajectoryLog& log) {
  for (const auto* r : approach(log)) {
    if (r->speed_mps < 0.1 && r->true_d_sig_m && *r->true_d_sig_m <= 5.0 && r->true_state &&
        r->true_state->phase == spatnet::PhaseColor::Red) {
      return true;
    }
  }
  return false;
}

double min_approach_speed(const simtruck::TrajectoryLog& log) {
  double v = INFINITY;
  for (const auto* r : approach(log)) v = std::min(v, r->speed_mps);
  return v;
}

int compare_exit_code(const simtruck::TrajectoryLog& base, const simtruck::TrajectoryLog& eco,
                      const std::string& window, const std::string& tag) {
  const auto dir = fs::temp_directory_path() / fmt::format("ecodrive_acceptance_{}", ::getpid());
  fs::create_directories(dir);
  const auto b = dir / (tag + "_baseline.csv");
  const auto e = dir / (tag + "_eco.csv");
  simtruck::write_csv_file(base, b);
  simtruck::write_csv_file(eco, e);
  const std::string bs = b.string(), es = e.string();
  const char* argv[] = {"ecodrive", "compare", bs.c_str(), es.c_str(), "--window", window.c_str(), "--check"};
  std::ostringstream out, err;
  const int code = cli::run_cli(7, argv, out, err);
  fs::remove_all(dir);
  return code;
}

Outcome fig4_reproduction() {
  const auto base = run_fixture("accel_baseline.json");
  const auto eco = run_fixture("accel_eco.json");
  const bool same_digest = base.header.config_digest == eco.header.config_digest;
  const bool base_stop = stopped_at_line_on_red(base);
  const auto cross_b = crossing(base);
  const auto cross_e = crossing(eco);
  const double v_min = min_approach_speed(eco);
  const bool eco_ok = cross_e && v_min > 3.0;
  const bool repeat = simtruck::to_csv(base) == simtruck::to_csv(run_fixture("accel_baseline.json")) &&
                      simtruck::to_csv(eco) == simtruck::to_csv(run_fixture("accel_eco.json"));
  const int code = compare_exit_code(base, eco, "2,25", "accel");
  return {same_digest && base_stop && cross_b && eco_ok && repeat && code == 0,
          fmt::format("digest match {}, baseline stops on red at line {}, eco min approach speed {:.2f} m/s, "
                      "eco crosses at t={:.1f} s, deterministic {}, compare --check exit {}",
                      same_digest, base_stop, v_min, cross_e ? cross_e->t_s : NAN, repeat, code)};
}

Outcome fig5_reproduction() {
  const auto config = simtruck::load_scenario(oracle::fixture("decel_eco.json"));
  const auto base = run_fixture("decel_baseline.json");
  const auto eco = simtruck::run_scenario(config);

  // Green onsets of the fixture signal, from the plan data.
  const auto* ctrl = spatnet::find_controller(config.signals, kFixtureSignal);
  const double cycle = ctrl->plan.cycle_length_s();
  double green_offset = 0.0;  // start of the first GREEN within a cycle
  for (const auto& i : ctrl->plan.intervals()) {
    if (i.color == spatnet::PhaseColor::Green) break;
    green_offset += i.duration_s;
  }
  const auto cross = crossing(eco);
  double after_green = NAN;
  if (cross) {
    const double pos = cross->t_s + ctrl->plan.cycle_offset_s() - green_offset;
    after_green = pos - std::floor(pos / cycle) * cycle;
  }
  const bool eco_ok = cross && after_green >= 0.0 && after_green <= 2.0 && cross->speed_mps > 1.0;
  const bool base_stop = stopped_at_line_on_red(base);
  const int code = compare_exit_code(base, eco, "1,15", "decel");
  return {eco_ok && base_stop && code == 0,
          fmt::format("eco crosses {:.2f} s after green onset at {:.2f} m/s, baseline stops on red {}, "
                      "compare --check exit {}",
                      after_green, cross ? cross->speed_mps : NAN, base_stop, code)};
}

Outcome fuel_savings() {
  const auto accel = cli::compare_logs(run_fixture("accel_baseline.json"), run_fixture("accel_eco.json"), {2, 25});
  const auto decel = cli::compare_logs(run_fixture("decel_baseline.json"), run_fixture("decel_eco.json"), {1, 15});
  const bool pass = accel.flags.eco_saves_fuel && accel.flags.savings_in_window && decel.flags.eco_saves_fuel &&
                    decel.flags.savings_in_window;
  return {pass, fmt::format("acceleration {:.2f}% (window 2..25, {:.1f} g vs {:.1f} g), deceleration {:.2f}% "
                            "(window 1..15, {:.1f} g vs {:.1f} g)",
                            accel.savings_percent, accel.eco.fuel.total_g, accel.baseline.fuel.total_g,
                            decel.savings_percent, decel.eco.fuel.total_g, decel.baseline.fuel.total_g)};
}

// Band checked against the controller's true state. Reported and true phase
// may disagree right after a transition; those rows must lie within the
// staleness window of one.
struct LatencyCheck {
  std::size_t checked = 0;
  std::size_t transition_rows = 0;
  std::size_t violations = 0;
  std::string first;
};

bool green_at(const spatnet::PhasePlan& plan, double t) {
  return spatnet::controller_state_exact(plan, t).phase == spatnet::PhaseColor::Green;
}

LatencyCheck check_bands(const simtruck::ScenarioConfig& config, const simtruck::TrajectoryLog& log) {
  constexpr double kQuantS = 1.0;
  LatencyCheck c;
  for (const auto& r : log.rows) {
    if (r.band.gating != advisor::Gating::Active || !r.phase || !r.signal || !r.true_signal ||
        *r.signal != *r.true_signal || !r.true_state || !r.true_d_sig_m) {
      continue;
    }
    const auto* ctrl = spatnet::find_controller(config.signals, *r.true_signal);
    const auto& plan = ctrl->plan;
    const auto& st = *r.true_state;
    const bool true_green = st.phase == spatnet::PhaseColor::Green;
    const bool reported_green = *r.phase == spatnet::PhaseColor::Green;
    const double d = *r.true_d_sig_m;
    if (true_green != reported_green) {
      const double window = config.advisor.staleness_s;
      bool recent = false;
      for (double back = 0.0; back <= window + 1e-9; back += 0.05) recent |= green_at(plan, r.t_s - back) != true_green;
      ++c.transition_rows;
      if (!recent && c.violations++ == 0) c.first = fmt::format("t={:.1f}: stale phase outside window", r.t_s);
      continue;
    }
    ++c.checked;
    bool ok = true;
    if (true_green) {
      const double t_end = st.time_remaining_s;
      if (r.band.v_upper_mps == 0.0) {
        ok = oracle::arrival_time(d, r.v_lim_mps) > t_end - kQuantS;
      } else if (r.band.v_lower_mps > 0.0) {
        ok = oracle::arrival_time(d, r.band.v_lower_mps) <= t_end + kQuantS;
      }
    } else {
      // Time until the next green from the plan intervals.
      const auto iv = plan.intervals();
      double t_green = st.time_remaining_s;
      for (std::size_t k = (st.interval_index + 1) % iv.size(); iv[k].color != spatnet::PhaseColor::Green;
           k = (k + 1) % iv.size()) {
        t_green += iv[k].duration_s;
      }
      ok = oracle::arrival_time(d, r.band.v_upper_mps) >= t_green - kQuantS;
    }
    if (!ok && c.violations++ == 0) {
      c.first = fmt::format("t={:.1f} d={:.2f} phase={} true remaining {:.2f} band [{:.3f}, {:.3f}]", r.t_s, d,
                            spatnet::to_string(st.phase), st.time_remaining_s, r.band.v_lower_mps,
                            r.band.v_upper_mps);
    }
  }
  return c;
}

Outcome latency_robustness() {
  std::vector<std::string> parts;
  bool pass = true;
  for (const char* name : {"accel_eco_lossy.json", "decel_eco_lossy.json"}) {
    const auto config = simtruck::load_scenario(oracle::fixture(name));
    const bool channel_ok = config.channel.latency_ms == 100 && config.channel.jitter_ms == 50 &&
                            config.channel.drop_probability == 0.05;
    const auto log = simtruck::run_scenario(config);
    const auto cross = crossing(log);
    const auto fuel = cli::trip_fuel(log);
    const auto c = check_bands(config, log);
    const bool ok = channel_ok && cross && fuel.stops_count == 0 && min_approach_speed(log) > 0.1 &&
                    c.violations == 0 && c.checked > 0;
    pass &= ok;
    parts.push_back(fmt::format("{}: crosses {} without stop {}, {} bands checked, {} near transitions, {} "
                                "violations{}",
                                config.name, cross.has_value(), fuel.stops_count == 0, c.checked,
                                c.transition_rows, c.violations, c.first.empty() ? "" : " (" + c.first + ")"));
  }
  return {pass, fmt::format("{}; {}", parts[0], parts[1])};
}

Outcome determinism() {
  std::vector<fs::path> fixtures;
  for (const auto& e : fs::directory_iterator(oracle::source_dir() / "fixtures")) {
    if (e.path().extension() == ".json") fixtures.push_back(e.path());
  }
  std::sort(fixtures.begin(), fixtures.end());
  std::size_t identical = 0;
  std::string differing;
  for (const auto& f : fixtures) {
    const auto a = simtruck::to_csv(simtruck::run_scenario(simtruck::load_scenario(f)));
    const auto b = simtruck::to_csv(simtruck::run_scenario(simtruck::load_scenario(f)));
    if (a == b) {
      ++identical;
    } else {
      differing += " " + f.filename().string();
    }
  }
  return {identical == fixtures.size() && !fixtures.empty(),
          fmt::format("{}/{} fixtures byte-identical across two runs{}", identical, fixtures.size(),
                      differing.empty() ? "" : "; differ:" + differing)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"band-algorithm oracle equivalence", band_oracle},
      {"map-matching drift invariance", drift_invariance},
      {"geometry oracles", geometry_oracles},
      {"scenario reproduction, acceleration", fig4_reproduction},
      {"scenario reproduction, deceleration", fig5_reproduction},
      {"fuel savings direction and magnitude", fuel_savings},
      {"latency robustness", latency_robustness},
      {"determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    std::printf("[%s] %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d/%zu acceptance criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
