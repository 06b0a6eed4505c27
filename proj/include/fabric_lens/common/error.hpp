// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace fabric_lens {

// Exception carrying a module-specific error code. Each module defines its
// own code enum and an alias, e.g. `using FabricError = CodedError<FabricErrc>`.
template <typename Code>
class CodedError : public std::runtime_error {
public:
    CodedError(Code code, std::string message)
        : std::runtime_error(std::move(message)), code_(code) {}

    Code code() const noexcept { return code_; }

private:
    Code code_;
};

}  // namespace fabric_lens
