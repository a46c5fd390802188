#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace lgae {

// Incremental SHA-256 (FIPS 180-4). Used for dataset manifests and
// preprocessing cache keys.
class Sha256 {
public:
    Sha256();

    void update(const void* bytes, std::size_t len);
    void update(const std::string& s) { update(s.data(), s.size()); }

    // Lowercase hex digest; finalizes a copy, so update() may continue.
    std::string hex_digest() const;

private:
    void process_block(const std::uint8_t* block);

    std::uint32_t state_[8];
    std::uint64_t total_len_ = 0;
    std::uint8_t buffer_[64];
    std::size_t buffer_len_ = 0;
};

std::string sha256_hex(const void* bytes, std::size_t len);
std::string sha256_hex(const std::string& s);

// Digest of a whole file; throws IoError when unreadable.
std::string sha256_file_hex(const std::string& path);

} // namespace lgae
