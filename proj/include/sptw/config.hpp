// SPDX-License-Identifier: Apache-2.0

// JSON mappings for the configuration types. Missing keys keep their defaults; unknown keys
// are rejected so that typos do not silently fall back to defaults.
#pragma once

#include "sptw/dataset.hpp"
#include "sptw/error.hpp"
#include "sptw/scenario.hpp"
#include "sptw/waveforms.hpp"

#include "json.hpp"

#include <filesystem>

namespace sptw::waveforms {
void to_json(nlohmann::json& j, const RadarParams& p);
void from_json(const nlohmann::json& j, RadarParams& p);
void to_json(nlohmann::json& j, const CellularParams& p);
void from_json(const nlohmann::json& j, CellularParams& p);
} // namespace sptw::waveforms

namespace sptw::scenario {
void to_json(nlohmann::json& j, const Vec3& v);
void from_json(const nlohmann::json& j, Vec3& v);
void to_json(nlohmann::json& j, const Node& n);
void from_json(const nlohmann::json& j, Node& n);
void to_json(nlohmann::json& j, const Trajectory& t);
void from_json(const nlohmann::json& j, Trajectory& t);
void to_json(nlohmann::json& j, const ScenarioSpec& s);
void from_json(const nlohmann::json& j, ScenarioSpec& s);
} // namespace sptw::scenario

namespace sptw::dataset {
void to_json(nlohmann::json& j, const DatasetConfig& c);
void from_json(const nlohmann::json& j, DatasetConfig& c);
} // namespace sptw::dataset

namespace sptw::config {

/// Parses a JSON file. Throws MalformedFile on I/O or syntax errors.
nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const nlohmann::json& j, const std::filesystem::path& path);

/// Throws InvalidParams naming the first key of `j` not in `allowed`.
void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed, const char* what);

/// Converts with nlohmann, mapping its type errors to InvalidParams.
template <class T>
T parse(const nlohmann::json& j)
{
    try {
        return j.get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidParams, e.what());
    }
}

template <class T>
T load(const std::filesystem::path& path)
{
    return parse<T>(read_json(path));
}

} // namespace sptw::config
