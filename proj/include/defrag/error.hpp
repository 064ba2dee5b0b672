/*
 * Copyright 2026 The defrag Authors. All Rights Reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file except in compliance
 * with the License. You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software distributed under the License is distributed
 * on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the License for
 * the specific language governing permissions and limitations under the License.
 */

#ifndef DEFRAG_ERROR_HPP
#define DEFRAG_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace defrag {

// Bad arguments: dimension mismatches, out-of-range parameters.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Malformed or inconsistent input data.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public DataError {
public:
    ParseError(std::size_t line, const std::string& what)
        : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// A structural invariant failed to hold on a produced object.
class InvariantError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

namespace detail {

inline void require(bool cond, const char* msg) {
    if (!cond) throw InvalidArgument(msg);
}

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw InvalidArgument(msg);
}

}  // namespace detail
}  // namespace defrag

#endif  // DEFRAG_ERROR_HPP
