#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tsim/common.hpp"
#include "tsim/vehicle.hpp"

namespace tsim {

// Unit constants: 3600 kJ per kWh, 146520 kJ per diesel-equivalent gallon.
namespace units {
inline constexpr double kJ_per_kWh = 3600.0;
inline constexpr double kJ_per_deg = 146520.0;
inline constexpr double m_per_mile = 1609.344;
} // namespace units

/// Wheel power in watts for longitudinal motion on flat grade:
///   P = m*a*v + m*g*Cr*v + 0.5*rho*CdA*v^3
/// Negative under hard deceleration (braking power available for recovery).
inline double tractive_power(double speed_mps, double accel_mps2, const VehicleType& vehicle,
                             double air_density = 1.2, double gravity = 9.81) {
    double v = speed_mps;
    return vehicle.mass_kg * accel_mps2 * v +
           vehicle.mass_kg * gravity * vehicle.rolling_Cr * v +
           0.5 * air_density * vehicle.frontal_drag_CdA_m2 * v * v * v;
}

namespace detail {

inline double electric_step_kJ(double p_wheel_W, const PowertrainParams& pp, double dt) {
    double traction = std::max(p_wheel_W, 0.0) / pp.drivetrain_efficiency;
    double recovered = pp.regen_efficiency * std::max(-p_wheel_W, 0.0);
    return (traction - recovered + pp.auxiliary_power_kW * 1000.0) * dt / 1000.0;
}

inline double diesel_step_kJ(double p_wheel_W, const PowertrainParams& pp, double dt) {
    double traction =
        std::max(p_wheel_W, 0.0) / (pp.drivetrain_efficiency * pp.engine_efficiency);
    return (traction + (pp.idle_power_kW + pp.auxiliary_power_kW) * 1000.0) * dt / 1000.0;
}

} // namespace detail

/// Energy drawn in one second, in kJ. Electric seconds may be net negative
/// (regeneration); diesel braking earns no credit; hybrid blends the two
/// formulas with weight hybrid_blend on the diesel side.
inline double consumption_step(double p_wheel_W, const PowertrainParams& params, double dt = 1.0) {
    switch (params.propulsion) {
        case Propulsion::electric:
            return detail::electric_step_kJ(p_wheel_W, params, dt);
        case Propulsion::diesel:
            return detail::diesel_step_kJ(p_wheel_W, params, dt);
        case Propulsion::hybrid:
            return params.hybrid_blend * detail::diesel_step_kJ(p_wheel_W, params, dt) +
                   (1.0 - params.hybrid_blend) * detail::electric_step_kJ(p_wheel_W, params, dt);
    }
    return 0.0;
}

struct EnergyReport {
    std::string trip_id;
    std::string route_id;
    Propulsion propulsion = Propulsion::diesel;
    double distance_m = 0.0;
    double energy_kJ = 0.0;
    std::optional<double> economy_mi_per_deg;  // absent when energy <= 0

    double energy_kWh() const { return energy_kJ / units::kJ_per_kWh; }
};

inline std::optional<double> economy_mi_per_deg(double distance_m, double energy_kJ) {
    if (energy_kJ <= 0.0) return std::nullopt;
    return (distance_m / units::m_per_mile) / (energy_kJ / units::kJ_per_deg);
}

/// One second of a bus trajectory, as consumed by the energy model.
struct MotionSample {
    long t_s = 0;
    double speed_mps = 0.0;
    double accel_mps2 = 0.0;
};

/// Aggregate a contiguous 1 Hz trajectory into a trip report. Distance is the
/// odometer integral of the per-second speeds, which equals the along-path
/// position deltas the simulator produces.
inline EnergyReport estimate_trip(const std::string& trip_id, const std::string& route_id,
                                  const std::vector<MotionSample>& trajectory,
                                  const VehicleType& vehicle, const PowertrainParams& params) {
    if (trajectory.empty()) throw ModelError("trip '" + trip_id + "': trajectory has no records");
    EnergyReport rep;
    rep.trip_id = trip_id;
    rep.route_id = route_id;
    rep.propulsion = params.propulsion;
    long prev_t = trajectory.front().t_s - 1;
    for (const auto& s : trajectory) {
        if (s.t_s != prev_t + 1)
            throw ModelError("trip '" + trip_id + "': gap in trajectory at t=" +
                             std::to_string(s.t_s));
        prev_t = s.t_s;
        rep.distance_m += s.speed_mps * 1.0;
        rep.energy_kJ += consumption_step(tractive_power(s.speed_mps, s.accel_mps2, vehicle), params);
    }
    rep.economy_mi_per_deg = economy_mi_per_deg(rep.distance_m, rep.energy_kJ);
    return rep;
}

// ---------------------------------------------------------------------------
// Scenario comparison
// ---------------------------------------------------------------------------

struct ComparisonRow {
    std::string route_id;
    std::string trip_id;
    std::string scenario;
    std::optional<Propulsion> propulsion;           // absent cell when missing
    std::optional<double> economy_mi_per_deg;
};

/// Long-format table aligned on (route, trip) across scenarios. Missing
/// (route, trip) cells in a scenario become rows with absent values.
inline std::vector<ComparisonRow> compare_scenarios(
    const std::map<std::string, std::vector<EnergyReport>>& reports) {
    std::set<std::pair<std::string, std::string>> keys;
    for (const auto& [scenario, list] : reports)
        for (const auto& r : list) keys.insert({r.route_id, r.trip_id});
    std::vector<ComparisonRow> rows;
    for (const auto& [route, trip] : keys) {
        for (const auto& [scenario, list] : reports) {
            ComparisonRow row;
            row.route_id = route;
            row.trip_id = trip;
            row.scenario = scenario;
            for (const auto& r : list) {
                if (r.route_id == route && r.trip_id == trip) {
                    row.propulsion = r.propulsion;
                    row.economy_mi_per_deg = r.economy_mi_per_deg;
                    break;
                }
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

} // namespace tsim
