#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rfsurface/experiments.hpp"
#include "rfsurface/field.hpp"
#include "rfsurface/langevin.hpp"

// Serialization: ScalingTable CSV, ExponentFit JSON, field binary/CSV, and
// time-environment records. All floating-point text uses %.17g so re-reading
// reproduces the exact double; beta = infinity round-trips as "inf".

namespace rfs {

std::string format_double(double x);
double parse_double(const std::string& s);

std::string scaling_table_csv(const ScalingTable& table);
void write_scaling_csv(const std::filesystem::path& path, const ScalingTable& table);
ScalingTable read_scaling_csv(const std::filesystem::path& path);

std::string exponent_fit_json(const ExponentFit& fit);

struct FieldMeta {
    int d = 0;
    int L = 0;
    std::string distribution = "none";
    std::uint64_t base_seed = 0;
};

// values in site_index order (full box including boundary)
struct StoredField {
    FieldMeta meta;
    std::vector<double> values;
};

void write_field_csv(const std::filesystem::path& path, const Field& f, const FieldMeta& meta);
void write_field_binary(const std::filesystem::path& path, const Field& f, const FieldMeta& meta);
StoredField read_field_csv(const std::filesystem::path& path);
StoredField read_field_binary(const std::filesystem::path& path);
Field restore_field(const StoredField& stored, const Lattice& lat);

void write_environment_binary(const std::filesystem::path& path, const TimeEnvironment& env);
TimeEnvironment read_environment_binary(const std::filesystem::path& path);

}  // namespace rfs
