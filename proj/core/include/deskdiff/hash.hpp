// Copyright 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace deskdiff {

inline std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v);

template <typename T>
std::uint64_t fnv1a64_span(const T* data, std::size_t count, std::uint64_t h = 0xcbf29ce484222325ULL) {
    return fnv1a64(data, count * sizeof(T), h);
}

}  // namespace deskdiff
