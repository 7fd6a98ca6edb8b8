/*
 * Copyright (C) 2026 The apkbayes Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

#include "apkbayes/error.hpp"

namespace apkbayes {

using ByteView = std::span<const std::uint8_t>;

/// Bounds-checked little-endian cursor. Any read that would leave the view
/// throws `Error` with the kind supplied at construction, so each format
/// reports overruns in its own vocabulary (Truncated, BadManifest, ...).
class ByteReader {
public:
    ByteReader(ByteView data, ErrorKind overrun_kind)
        : data_(data), overrun_kind_(overrun_kind)
    {
    }

    std::size_t size() const noexcept { return data_.size(); }
    std::size_t pos() const noexcept { return pos_; }
    std::size_t remaining() const noexcept { return data_.size() - pos_; }

    void seek(std::size_t pos)
    {
        if (pos > data_.size()) {
            fail("seek to " + std::to_string(pos) + " beyond "
                 + std::to_string(data_.size()));
        }
        pos_ = pos;
    }

    void skip(std::size_t n) { seek(checked_end(n)); }

    std::uint8_t u8()
    {
        require(1);
        return data_[pos_++];
    }

    std::uint16_t u16()
    {
        require(2);
        auto v = static_cast<std::uint16_t>(data_[pos_] | (data_[pos_ + 1] << 8));
        pos_ += 2;
        return v;
    }

    std::uint32_t u32()
    {
        require(4);
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i) {
            v = (v << 8) | data_[pos_ + static_cast<std::size_t>(i)];
        }
        pos_ += 4;
        return v;
    }

    /// Reads an unsigned LEB128 value of at most five bytes (DEX uleb128).
    std::uint32_t uleb128()
    {
        std::uint32_t result = 0;
        for (int shift = 0; shift < 35; shift += 7) {
            auto byte = u8();
            result |= static_cast<std::uint32_t>(byte & 0x7f) << shift;
            if ((byte & 0x80) == 0) {
                return result;
            }
        }
        fail("uleb128 longer than five bytes");
    }

    ByteView bytes(std::size_t n)
    {
        auto start = pos_;
        seek(checked_end(n));
        return data_.subspan(start, n);
    }

    /// View of [offset, offset + n) without moving the cursor.
    ByteView slice(std::size_t offset, std::size_t n) const
    {
        if (offset > data_.size() || n > data_.size() - offset) {
            fail("slice [" + std::to_string(offset) + ", +" + std::to_string(n)
                 + ") beyond " + std::to_string(data_.size()));
        }
        return data_.subspan(offset, n);
    }

    [[noreturn]] void fail(const std::string& what) const
    {
        throw Error(overrun_kind_, what);
    }

private:
    void require(std::size_t n) const
    {
        if (n > remaining()) {
            fail("need " + std::to_string(n) + " bytes at offset "
                 + std::to_string(pos_) + ", have " + std::to_string(remaining()));
        }
    }

    std::size_t checked_end(std::size_t n) const
    {
        require(n);
        return pos_ + n;
    }

    ByteView data_;
    std::size_t pos_ = 0;
    ErrorKind overrun_kind_;
};

}  // namespace apkbayes
