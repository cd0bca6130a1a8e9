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

#include "cpca/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "cpca/error.hpp"

namespace cpca::io {

namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

bool parse_number(std::string_view token, double& out) {
    if (token.empty()) return false;
    if (token.front() == '+') token.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
    return ec == std::errc() && ptr == token.data() + token.size();
}

std::vector<unsigned char> read_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string(), "FILE_UNREADABLE");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf, static_cast<std::size_t>(n));
}

CsvTable read_csv(const fs::path& path, std::size_t expected_columns) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string(), "FILE_UNREADABLE");
    CsvTable table;
    std::vector<double> values;
    std::size_t width = expected_columns;
    std::size_t rows = 0;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        const std::string_view view = trim(line);
        if (view.empty()) continue;
        const auto fields = split(view);
        double probe = 0.0;
        if (first) {
            first = false;
            if (!parse_number(fields.front(), probe)) {
                for (auto f : fields) table.header.emplace_back(f);
                continue;
            }
        }
        if (width == 0) width = fields.size();
        if (fields.size() != width) {
            std::ostringstream msg;
            msg << path.string() << ": row " << rows << ": expected " << width << " columns, found "
                << fields.size();
            throw DataError(msg.str(), "COLUMN_MISMATCH");
        }
        for (std::size_t i = 0; i < fields.size(); ++i) {
            double v = 0.0;
            if (!parse_number(fields[i], v)) {
                std::ostringstream msg;
                msg << path.string() << ": row " << rows << ", column " << i << ": not a number: '" << fields[i]
                    << "'";
                throw DataError(msg.str(), "BAD_NUMBER");
            }
            values.push_back(v);
        }
        ++rows;
    }
    if (expected_columns != 0 && !table.header.empty() && table.header.size() != expected_columns) {
        std::ostringstream msg;
        msg << path.string() << ": header: expected " << expected_columns << " columns, found "
            << table.header.size();
        throw DataError(msg.str(), "COLUMN_MISMATCH");
    }
    if (width == 0) width = table.header.size();
    table.data = RowMatrix(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(width));
    if (!values.empty()) std::memcpy(table.data.data(), values.data(), values.size() * sizeof(double));
    return table;
}

void write_csv(const fs::path& path, std::span<const std::string> header, const Eigen::Ref<const RowMatrix>& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string(), "FILE_UNWRITABLE");
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    if (!header.empty()) out << '\n';
    for (Eigen::Index r = 0; r < data.rows(); ++r) {
        for (Eigen::Index c = 0; c < data.cols(); ++c) out << (c ? "," : "") << format_double(data(r, c));
        out << '\n';
    }
}

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> out;
    const std::string_view view = trim(text);
    if (view.find(':') != std::string_view::npos) {
        std::vector<double> parts;
        std::size_t start = 0;
        while (true) {
            const std::size_t pos = view.find(':', start);
            double v = 0.0;
            const auto token = trim(view.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
            if (!parse_number(token, v)) throw ValidationError("bad grid '" + text + "'", "USAGE");
            parts.push_back(v);
            if (pos == std::string_view::npos) break;
            start = pos + 1;
        }
        if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0])
            throw ValidationError("grid range must be start:stop:step with step > 0 and stop >= start", "USAGE");
        const auto steps = static_cast<long>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
        for (long i = 0; i <= steps; ++i) out.push_back(parts[0] + static_cast<double>(i) * parts[2]);
        return out;
    }
    for (auto token : split(view)) {
        double v = 0.0;
        if (!parse_number(token, v)) throw ValidationError("bad grid entry '" + std::string(token) + "'", "USAGE");
        out.push_back(v);
    }
    return out;
}

std::uint64_t fnv1a64(std::span<const unsigned char> bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::vector<unsigned char> encode_basis(const Matrix& basis) {
    std::vector<unsigned char> blob;
    blob.reserve(static_cast<std::size_t>(basis.size()) * 8);
    for (Eigen::Index r = 0; r < basis.rows(); ++r)
        for (Eigen::Index c = 0; c < basis.cols(); ++c) {
            const auto bits = std::bit_cast<std::uint64_t>(basis(r, c));
            for (int b = 0; b < 8; ++b) blob.push_back(static_cast<unsigned char>(bits >> (8 * b)));
        }
    return blob;
}

Matrix decode_basis(std::span<const unsigned char> blob, std::size_t rows, std::size_t cols) {
    if (blob.size() != rows * cols * 8) {
        std::ostringstream msg;
        msg << "basis blob has " << blob.size() << " bytes, expected " << rows * cols * 8;
        throw DataError(msg.str(), "ARTIFACT_CORRUPT");
    }
    Matrix basis(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    std::size_t offset = 0;
    for (Eigen::Index r = 0; r < basis.rows(); ++r)
        for (Eigen::Index c = 0; c < basis.cols(); ++c) {
            std::uint64_t bits = 0;
            for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(blob[offset++]) << (8 * b);
            basis(r, c) = std::bit_cast<double>(bits);
        }
    return basis;
}

void save_artifact(const fs::path& dir, ModelArtifact& artifact) {
    fs::create_directories(dir);
    const auto blob = encode_basis(artifact.basis);
    artifact.metadata["basis"] = {{"file", kBasisFile},
                                  {"rows", artifact.basis.rows()},
                                  {"cols", artifact.basis.cols()},
                                  {"dtype", "float64-le"},
                                  {"layout", "row-major"}};
    artifact.metadata["checksum"] = "fnv1a64:" + hex64(fnv1a64(blob));
    {
        std::ofstream out(dir / kBasisFile, std::ios::binary);
        if (!out) throw DataError("cannot write " + (dir / kBasisFile).string(), "FILE_UNWRITABLE");
        out.write(reinterpret_cast<const char*>(blob.data()), static_cast<std::streamsize>(blob.size()));
    }
    std::ofstream meta(dir / kMetadataFile, std::ios::binary);
    if (!meta) throw DataError("cannot write " + (dir / kMetadataFile).string(), "FILE_UNWRITABLE");
    meta << artifact.metadata.dump(2) << '\n';
}

nlohmann::json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string(), "FILE_UNREADABLE");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(path.string() + ": " + e.what(), "CONFIG_SYNTAX");
    }
}

ModelArtifact load_artifact(const fs::path& dir) {
    ModelArtifact artifact;
    artifact.metadata = read_json(dir / kMetadataFile);
    const auto& meta = artifact.metadata;
    try {
        const std::string version = meta.at("format_version").get<std::string>();
        const std::string major = version.substr(0, version.find('.'));
        const std::string ours = std::string(kArtifactFormatVersion).substr(0, 1);
        if (major != ours)
            throw DataError("unsupported artifact format version " + version, "ARTIFACT_VERSION");
        const auto rows = meta.at("basis").at("rows").get<std::size_t>();
        const auto cols = meta.at("basis").at("cols").get<std::size_t>();
        const auto blob = read_bytes(dir / meta.at("basis").at("file").get<std::string>());
        const std::string expected = meta.at("checksum").get<std::string>();
        const std::string actual = "fnv1a64:" + hex64(fnv1a64(blob));
        if (expected != actual)
            throw DataError("basis checksum mismatch: metadata " + expected + ", blob " + actual, "ARTIFACT_CHECKSUM");
        artifact.basis = decode_basis(blob, rows, cols);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed artifact metadata: ") + e.what(), "ARTIFACT_CORRUPT");
    }
    return artifact;
}

}  // namespace cpca::io
