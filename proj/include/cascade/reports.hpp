// SPDX-License-Identifier: Apache-2.0
//
// CSV and JSON artifacts. Every command produces a list of flat records;
// the CSV view puts the schema version in the first header field and the
// record kind in the first column of each row.
#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cascade/estimators.hpp"
#include "cascade/herz.hpp"
#include "cascade/picard.hpp"
#include "cascade/sampler_validation.hpp"

namespace cascade {

using Json = nlohmann::ordered_json;

inline constexpr const char* kSchemaVersion = "cascade-ns/1";

/// Shortest decimal that round-trips; "inf", "-inf" and "nan" otherwise.
std::string format_number(double x);

/// A number, or its string form when not finite (JSON has no infinity).
Json num(double x);

/// Empty record of the given kind.
Json record(const std::string& kind);

/// Records as CSV. Columns are the union of keys in first-seen order.
void write_csv(const Json& records, std::ostream& os);

/// {"schema": ..., "command": ..., "records": [...], extra fields...}
Json document(const std::string& command, const Json& records);

void write_json(const Json& doc, std::ostream& os);

// Record builders ------------------------------------------------------------

Json estimate_record(std::uint64_t seed, const SimConfig& cfg, std::size_t n, const EstimateReport& rep);

Json compare_records(std::uint64_t seed, const SimConfig& cfg, std::size_t n, const CompareReport& rep);

/// One record per (cap, horizon) cell.
Json explosion_records(std::uint64_t seed, const KernelSpec& kernel, const RealVec& xi, const ExplosionTable& tab);
Json scaling_record(std::uint64_t seed, const std::string& kernel, const RealVec& xi, double t, std::size_t n,
                    int depth_cap, const ScalingReport& rep);

Json majorize_record(std::uint64_t seed, const SimConfig& cfg, const MajorizeReport& rep);
Json generalized_record(std::uint64_t seed, const SimConfig& cfg, const ScalarTransform& f, const JensenReport& rep);
Json holder_record(std::uint64_t seed, const SimConfig& cfg, const HolderReport& rep);
Json jensen_iterate_record(const std::string& kernel, const ScalarTransform& f, const JensenIterateReport& rep);

/// One record per (r, t) node of each listed iterate.
Json picard_grid_records(const PicardResult& res, const std::vector<int>& iterates);
Json picard_log(const PicardResult& res);

Json herz_records(const HerzReport& rep);
Json herz_json(const HerzReport& rep);

Json convolution_record(const std::string& kernel, double r, const ConvolutionCheck& c);
Json gof_record(const std::string& kernel, double r, std::uint64_t seed, const std::string& variant,
                const GoFReport& rep);

}  // namespace cascade
