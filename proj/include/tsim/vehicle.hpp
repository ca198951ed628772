#pragma once

#include <fstream>
#include <map>
#include <string>

#include "tsim/common.hpp"

#include <nlohmann/json.hpp>

namespace tsim {

enum class Propulsion { diesel, hybrid, electric };

inline const char* propulsion_name(Propulsion p) {
    switch (p) {
        case Propulsion::diesel: return "diesel";
        case Propulsion::hybrid: return "hybrid";
        case Propulsion::electric: return "electric";
    }
    return "?";
}

inline Propulsion parse_propulsion(const std::string& s, const std::string& context) {
    if (s == "diesel") return Propulsion::diesel;
    if (s == "hybrid") return Propulsion::hybrid;
    if (s == "electric") return Propulsion::electric;
    throw ModelError(context + ": unknown propulsion '" + s + "'");
}

/// Powertrain efficiency surrogate parameters. Consumed by the energy module.
struct PowertrainParams {
    Propulsion propulsion = Propulsion::diesel;
    double drivetrain_efficiency = 0.90;  // eta_d, (0,1]
    double regen_efficiency = 0.0;        // eta_r, [0,1); 0 for diesel
    double engine_efficiency = 0.40;      // eta_e, (0,1]; fuel-burning modes
    double idle_power_kW = 0.0;
    double auxiliary_power_kW = 0.0;
    double hybrid_blend = 0.5;            // beta: diesel share of the hybrid mix
};

inline PowertrainParams default_powertrain(Propulsion p) {
    PowertrainParams pp;
    pp.propulsion = p;
    pp.drivetrain_efficiency = 0.90;
    pp.engine_efficiency = 0.40;
    pp.auxiliary_power_kW = 5.0;
    pp.hybrid_blend = 0.5;
    switch (p) {
        case Propulsion::diesel:
            pp.regen_efficiency = 0.0;
            pp.idle_power_kW = 8.0;
            break;
        case Propulsion::hybrid:
            pp.regen_efficiency = 0.60;
            pp.idle_power_kW = 8.0;
            break;
        case Propulsion::electric:
            pp.regen_efficiency = 0.60;
            pp.idle_power_kW = 0.0;
            break;
    }
    return pp;
}

struct VehicleType {
    std::string id;
    Propulsion propulsion = Propulsion::diesel;
    double max_speed_mps = 30.0;
    double accel_mps2 = 1.2;
    double decel_mps2 = 4.0;
    double min_gap_m = 2.5;
    double length_m = 12.0;
    int passenger_capacity = 1;
    double mass_kg = 12000.0;
    double frontal_drag_CdA_m2 = 6.0;
    double rolling_Cr = 0.008;
    PowertrainParams powertrain;
    bool is_bus = false;
    bool is_default = false;
};

/// Vehicle types keyed by id; exactly one bus type is the default for
/// unassigned trips. Background modes (car/truck/trailer) are always present,
/// either from the catalog file or as built-ins.
class VehicleCatalog {
public:
    std::map<std::string, VehicleType> types;
    std::string default_type_id;

    const VehicleType* find(const std::string& id) const {
        auto it = types.find(id);
        return it == types.end() ? nullptr : &it->second;
    }

    const VehicleType& at(const std::string& id) const {
        auto* t = find(id);
        if (!t) throw ModelError("unknown vehicle type '" + id + "'");
        return *t;
    }

    const VehicleType& default_type() const { return at(default_type_id); }
};

namespace detail {

inline VehicleType background_type(const std::string& id, double length, double accel,
                                   double decel, double max_speed) {
    VehicleType t;
    t.id = id;
    t.length_m = length;
    t.accel_mps2 = accel;
    t.decel_mps2 = decel;
    t.max_speed_mps = max_speed;
    t.min_gap_m = 2.5;
    t.passenger_capacity = 1;
    t.is_bus = false;
    t.powertrain = default_powertrain(Propulsion::diesel);
    return t;
}

} // namespace detail

inline void add_builtin_background_types(VehicleCatalog& cat) {
    if (!cat.types.count("car")) cat.types["car"] = detail::background_type("car", 4.5, 2.0, 4.5, 38.0);
    if (!cat.types.count("truck")) cat.types["truck"] = detail::background_type("truck", 9.0, 1.3, 3.5, 28.0);
    if (!cat.types.count("trailer")) cat.types["trailer"] = detail::background_type("trailer", 16.0, 0.9, 3.0, 25.0);
}

/// Catalog JSON: { "type_id": { "propulsion": ..., "max_speed_mps": ..., ... ,
/// "powertrain": { ... }, "default": true }, ... }
inline VehicleCatalog parse_vehicle_catalog(const nlohmann::json& j, const std::string& source) {
    VehicleCatalog cat;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& id = it.key();
        const auto& entry = it.value();
        std::string ctx = source + ": type '" + id + "'";
        VehicleType t;
        t.id = id;
        t.is_bus = entry.value("bus", true);
        t.propulsion = parse_propulsion(entry.value("propulsion", std::string("diesel")), ctx);
        t.max_speed_mps = entry.value("max_speed_mps", t.max_speed_mps);
        t.accel_mps2 = entry.value("accel_mps2", t.accel_mps2);
        t.decel_mps2 = entry.value("decel_mps2", t.decel_mps2);
        t.min_gap_m = entry.value("min_gap_m", t.min_gap_m);
        t.length_m = entry.value("length_m", t.length_m);
        t.passenger_capacity = entry.value("passenger_capacity", 40);
        t.mass_kg = entry.value("mass_kg", t.mass_kg);
        t.frontal_drag_CdA_m2 = entry.value("frontal_drag_CdA_m2", t.frontal_drag_CdA_m2);
        t.rolling_Cr = entry.value("rolling_Cr", t.rolling_Cr);
        t.is_default = entry.value("default", false);
        t.powertrain = default_powertrain(t.propulsion);
        if (entry.contains("powertrain")) {
            const auto& pw = entry.at("powertrain");
            t.powertrain.drivetrain_efficiency = pw.value("drivetrain_efficiency", t.powertrain.drivetrain_efficiency);
            t.powertrain.regen_efficiency = pw.value("regen_efficiency", t.powertrain.regen_efficiency);
            t.powertrain.engine_efficiency = pw.value("engine_efficiency", t.powertrain.engine_efficiency);
            t.powertrain.idle_power_kW = pw.value("idle_power_kW", t.powertrain.idle_power_kW);
            t.powertrain.auxiliary_power_kW = pw.value("auxiliary_power_kW", t.powertrain.auxiliary_power_kW);
            t.powertrain.hybrid_blend = pw.value("hybrid_blend", t.powertrain.hybrid_blend);
        }
        if (t.max_speed_mps <= 0 || t.accel_mps2 <= 0 || t.decel_mps2 <= 0 || t.min_gap_m <= 0 ||
            t.length_m <= 0 || t.mass_kg <= 0)
            throw ModelError(ctx + ": kinematic parameters must be positive");
        if (t.is_bus && t.passenger_capacity < 1)
            throw ModelError(ctx + ": bus capacity must be at least 1");
        if (t.is_default) {
            if (!cat.default_type_id.empty())
                throw ModelError(source + ": more than one default vehicle type ('" +
                                 cat.default_type_id + "' and '" + id + "')");
            cat.default_type_id = id;
        }
        cat.types[id] = std::move(t);
    }
    if (cat.default_type_id.empty())
        throw ModelError(source + ": no vehicle type is marked \"default\": true");
    add_builtin_background_types(cat);
    return cat;
}

inline VehicleCatalog load_vehicle_catalog(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open vehicle catalog '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ModelError("vehicle catalog '" + path + "': " + e.what());
    }
    return parse_vehicle_catalog(j, path);
}

} // namespace tsim
