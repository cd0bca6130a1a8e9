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

#include <stdexcept>
#include <string>
#include <utility>

namespace cpca {

/// Base of every error the library throws. Each error carries a stable
/// machine-readable code and the process exit status the CLI maps it to.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message, int exit_status)
        : std::runtime_error(message), code_(std::move(code)), exit_status_(exit_status) {}

    const std::string& code() const noexcept { return code_; }
    int exit_status() const noexcept { return exit_status_; }

private:
    std::string code_;
    int exit_status_;
};

/// Bad arguments, configs or plans.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& message, std::string code = "VALIDATION")
        : Error(std::move(code), message, 2) {}
};

/// Malformed or inconsistent input data (CSV rows, artifacts, training files).
class DataError : public Error {
public:
    explicit DataError(const std::string& message, std::string code = "DATA")
        : Error(std::move(code), message, 3) {}
};

/// A numerical routine failed (eigensolver, factorization, indefinite covariance).
class NumericError : public Error {
public:
    explicit NumericError(const std::string& message, std::string code = "NUMERIC")
        : Error(std::move(code), message, 4) {}
};

}  // namespace cpca
