#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

namespace nlest {

// 64-bit FNV-1a over raw bytes.
class Fnv1a {
public:
    void add_bytes(const void* data, std::size_t n)
    {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h_ ^= p[i];
            h_ *= 0x100000001b3ULL;
        }
    }
    void add(std::string_view s) { add_bytes(s.data(), s.size()); }
    void add(int v) { add_bytes(&v, sizeof v); }
    void add(double v) { add_bytes(&v, sizeof v); }
    std::uint64_t value() const { return h_; }

private:
    std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

inline std::uint64_t fnv1a(std::string_view s)
{
    Fnv1a h;
    h.add(s);
    return h.value();
}

std::string hex64(std::uint64_t v);

}  // namespace nlest
