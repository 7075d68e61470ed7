#pragma once

// Text and binary serialization of results. Floating-point values are
// written with 12 significant digits everywhere.

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "epend/averaging.hpp"
#include "epend/continuation.hpp"
#include "epend/explore.hpp"
#include "epend/orbits.hpp"

namespace epend::io {

using nlohmann::json;

std::string fmt(double x);
/// x rounded to 12 significant digits, for storing in json values.
double round12(double x);

json to_json(const PendulumParams& params);

/// Reads {"gamma","p","omega","e","alpha"} (missing keys keep the values of
/// `defaults`) or a "physical" object {"m","l","c","a","b","Omega","g"},
/// but not both. Throws Error(invalid_argument) on unknown keys or wrong types.
PendulumParams params_from_json(const json& doc, const PendulumParams& defaults = {});

PhysicalParams physical_from_json(const json& doc);

json to_json(const PeriodicOrbit& orbit);
json to_json(const BifurcationPoint& point);
json to_json(const AveragedPrediction& prediction);
json to_json(const TongueDiagram& diagram);
json legend_json(const BasinGrid& grid);

void write_states_csv(std::ostream& out, const std::vector<State>& states);
void write_branch_csv(std::ostream& out, const Branch& branch);
void write_tongue_csv(std::ostream& out, const TongueDiagram& diagram);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);
void write_basin_csv(std::ostream& out, const BasinGrid& grid);

/// Binary PGM, top row at v_max, gray level = attractor id.
void write_basin_pgm(std::ostream& out, const BasinGrid& grid);

}  // namespace epend::io
