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

#include <iosfwd>
#include <string>
#include <vector>

namespace distreg::cli {

/// Exit codes: 0 success, 2 I/O or input error, 3 config or contract error,
/// 4 numerical failure.
enum ExitCode : int { kOk = 0, kIo = 2, kConfig = 3, kNumerical = 4 };

/// Runs one command line (without the program name). Normal output goes to
/// `out`, diagnostics to `err`; nothing is written to the process streams.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace distreg::cli
