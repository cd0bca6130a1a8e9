// Copyright 2026 The cpcad Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "cpca/model.hpp"

namespace cpca::io {

/// 17 significant digits, '.' decimal separator.
std::string format_double(double v);

/// Observation table: optional header row (detected by a non-numeric first token)
/// followed by numeric rows, ',' separated.
struct CsvTable {
    std::vector<std::string> header;
    RowMatrix data;
};

/// Reads a numeric CSV. When `expected_columns` is nonzero every data row must have
/// exactly that many fields; otherwise all rows must match the first one.
/// Errors name the 0-based data row.
CsvTable read_csv(const std::filesystem::path& path, std::size_t expected_columns = 0);

void write_csv(const std::filesystem::path& path, std::span<const std::string> header,
               const Eigen::Ref<const RowMatrix>& data);

/// Parses "a,b,c" or "start:stop:step" (inclusive stop) into a list of doubles.
std::vector<double> parse_grid(const std::string& text);

/// FNV-1a, 64-bit.
std::uint64_t fnv1a64(std::span<const unsigned char> bytes);
std::string hex64(std::uint64_t v);

/// On-disk model: `metadata.json` plus `basis.f64le`, the p x k leading basis as
/// little-endian float64 in row-major order. metadata["checksum"] holds
/// "fnv1a64:<16 hex digits>" of the blob.
struct ModelArtifact {
    nlohmann::json metadata;
    Matrix basis;
};

inline constexpr const char* kArtifactFormatVersion = "1.0";
inline constexpr const char* kMetadataFile = "metadata.json";
inline constexpr const char* kBasisFile = "basis.f64le";

std::vector<unsigned char> encode_basis(const Matrix& basis);
Matrix decode_basis(std::span<const unsigned char> blob, std::size_t rows, std::size_t cols);

/// Writes both files; fills metadata["checksum"] and metadata["basis"].
void save_artifact(const std::filesystem::path& dir, ModelArtifact& artifact);

/// Reads both files, checks the format major version and the checksum.
ModelArtifact load_artifact(const std::filesystem::path& dir);

nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace cpca::io
