#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ylr/types.hpp"

namespace ylr {

struct CsvVehicle {
    std::string vehicle_id;
    Trajectory trajectory;
};

// Header is exactly `vehicle_id,t,x,y,v,a,psi`, one row per sample, '.'
// decimal separator, nine decimals.
void write_trajectory_csv(const std::filesystem::path& path, const std::vector<CsvVehicle>& vehicles);

// Vehicles come back in first-appearance order. Malformed headers, rows with
// non-numeric or non-finite values, and unsorted timestamps raise
// IngestionError naming the offending row.
std::vector<CsvVehicle> read_trajectory_csv(const std::filesystem::path& path);

}  // namespace ylr
