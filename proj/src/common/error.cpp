// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "romforge/common/error.hpp"

namespace romforge
{

std::string describe_shapes(const std::string &context, const std::string &expected,
                            const std::string &actual)
{
  return context + ": expected " + expected + ", got " + actual;
}

}  // namespace romforge
