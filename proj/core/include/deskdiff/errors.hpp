// Copyright 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace deskdiff {

// Process exit codes used by the CLI. Library code throws the typed
// errors below; main() maps them to these codes.
enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 2,    // bad arguments, bad config, missing inputs
    kExitNumeric = 3,  // non-finite values, solver failures
    kExitGate = 4,     // acceptance gates (classifier accuracy, verify)
};

class Error : public std::runtime_error {
  public:
    Error(std::string kind, const std::string& message, int exit_code)
        : std::runtime_error(message), kind_(std::move(kind)), exit_code_(exit_code) {}

    const std::string& kind() const { return kind_; }
    int exit_code() const { return exit_code_; }

  private:
    std::string kind_;
    int exit_code_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& msg, const std::string& kind = "config")
        : Error(kind, msg, kExitUsage) {}
};

struct NumericError : Error {
    explicit NumericError(const std::string& msg) : Error("numeric", msg, kExitNumeric) {}
};

struct GateError : Error {
    explicit GateError(const std::string& msg, const std::string& kind = "gate")
        : Error(kind, msg, kExitGate) {}
};

}  // namespace deskdiff
