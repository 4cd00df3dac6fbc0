// Copyright 2026 The feme authors
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

#ifndef FEME_ERRORS_HPP
#define FEME_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace feme {

/// Base class for all feme-specific failures.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent run configuration (bad keys, bad values).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Numerical breakdown during a computation (non-finite values, failed fits).
class NumericError : public Error {
public:
    using Error::Error;
};

/// Filesystem / output failures. The message carries the offending path.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace feme

#endif // FEME_ERRORS_HPP
