#include "ylr/trajectory_csv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ylr/errors.hpp"

namespace ylr {

namespace {

const char* kHeader = "vehicle_id,t,x,y,v,a,psi";

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_number(const std::string& field, const std::string& column, std::size_t row) {
    try {
        std::size_t used = 0;
        const double value = std::stod(field, &used);
        if (used != field.size()) throw std::invalid_argument(field);
        return value;
    } catch (const std::exception&) {
        throw IngestionError("row " + std::to_string(row) + ": column '" + column +
                             "' is not a number: '" + field + "'");
    }
}

}  // namespace

void write_trajectory_csv(const std::filesystem::path& path, const std::vector<CsvVehicle>& vehicles) {
    std::ofstream out(path);
    if (!out) throw IngestionError("cannot open for writing: " + path.string());
    out << kHeader << '\n';
    char buf[256];
    for (const auto& vehicle : vehicles) {
        for (const auto& p : vehicle.trajectory.points) {
            std::snprintf(buf, sizeof(buf), "%s,%.9f,%.9f,%.9f,%.9f,%.9f,%.9f\n",
                          vehicle.vehicle_id.c_str(), p.t, p.x, p.y, p.v, p.a, p.psi);
            out << buf;
        }
    }
    if (!out) throw IngestionError("write failed: " + path.string());
}

std::vector<CsvVehicle> read_trajectory_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IngestionError("cannot open: " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw IngestionError("empty file: " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const std::vector<std::string> expected = split_csv(kHeader);
    const std::vector<std::string> header = split_csv(line);
    for (const auto& column : expected) {
        if (std::find(header.begin(), header.end(), column) == header.end())
            throw IngestionError("missing column '" + column + "' in " + path.string());
    }
    std::vector<std::size_t> index(expected.size());
    for (std::size_t c = 0; c < expected.size(); ++c)
        index[c] = static_cast<std::size_t>(
            std::find(header.begin(), header.end(), expected[c]) - header.begin());

    std::vector<CsvVehicle> vehicles;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() < header.size())
            throw IngestionError("row " + std::to_string(row) + ": expected " +
                                 std::to_string(header.size()) + " fields, got " +
                                 std::to_string(fields.size()));
        const std::string& id = fields[index[0]];
        TrajectoryPoint p;
        p.t = parse_number(fields[index[1]], "t", row);
        p.x = parse_number(fields[index[2]], "x", row);
        p.y = parse_number(fields[index[3]], "y", row);
        p.v = parse_number(fields[index[4]], "v", row);
        p.a = parse_number(fields[index[5]], "a", row);
        p.psi = parse_number(fields[index[6]], "psi", row);
        if (!is_finite(p))
            throw IngestionError("row " + std::to_string(row) + ": non-finite value");

        auto it = std::find_if(vehicles.begin(), vehicles.end(),
                               [&](const CsvVehicle& v) { return v.vehicle_id == id; });
        if (it == vehicles.end()) {
            vehicles.push_back({id, {}});
            it = std::prev(vehicles.end());
        } else if (!it->trajectory.points.empty() && p.t <= it->trajectory.points.back().t) {
            throw IngestionError("row " + std::to_string(row) + ": unsorted timestamp for vehicle '" +
                                 id + "'");
        }
        it->trajectory.points.push_back(p);
    }
    for (auto& vehicle : vehicles) {
        auto& traj = vehicle.trajectory;
        traj.dt = traj.size() >= 2 ? traj.points[1].t - traj.points[0].t : 0.1;
    }
    return vehicles;
}

}  // namespace ylr
