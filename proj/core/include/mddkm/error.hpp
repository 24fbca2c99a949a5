/*
 * Copyright 2026 The mddkm Authors
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

namespace mddkm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent caller input (dimension mismatch, empty data, bad config value).
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// A matrix could not be made well-conditioned on the regularization ladder.
class ConditioningError : public Error {
public:
    using Error::Error;
};

/// Roundoff beyond tolerance or a factorization that should not fail.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Every optimizer start was infeasible.
class TrainingError : public Error {
public:
    using Error::Error;
};

/// A serialized artifact or config document does not match the expected schema.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// File system or stream failure.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace mddkm
