/*
 * Copyright 2026 The distreg Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <stdexcept>
#include <string>

namespace distreg {

/// Base of every error thrown by the library. The CLI maps each subclass
/// to a process exit code (see exit_code()).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual int exit_code() const noexcept = 0;
};

/// Malformed or inconsistent data: dimension mismatch, empty bag, bad file.
class InputError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 2; }
};

/// Filesystem failures (unreadable input, unwritable output).
class IoError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 2; }
};

/// Invalid parameters (lambda <= 0, unknown family, bad schedule params).
class ConfigError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
};

/// A legal request for an operation whose preconditions the kernel does
/// not meet, e.g. KRR with an indefinite outer kernel.
class ContractError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
};

/// Factorization failure or exhausted sampling budget.
class NumericalError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 4; }
};

}  // namespace distreg
