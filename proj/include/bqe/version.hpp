// SPDX-License-Identifier: Apache-2.0

#ifndef BQE_VERSION_HPP
#define BQE_VERSION_HPP

namespace bqe {

inline constexpr const char* kVersion = "0.1.0";

}

#endif
