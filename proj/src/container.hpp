#pragma once

// Little-endian "COLA" record container shared by activation matrices and
// layer banks. Layout:
//   "COLA" | u32 version | u32 n | u32 L | L x u32 dims | n x (u16 id_len | id | f32 payload)
// The payload length of each record is decided by the caller from the dims.

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace cola::detail {

inline constexpr char k_magic[4] = {'C', 'O', 'L', 'A'};
inline constexpr std::uint32_t k_version = 1;

struct ContainerRecord {
    std::string id;
    std::vector<float> payload;
};

struct Container {
    std::vector<std::uint32_t> dims;
    std::vector<ContainerRecord> records;
};

std::string encode_container(const std::vector<std::uint32_t> & dims,
                             std::size_t n,
                             const std::function<std::string_view(std::size_t)> & id_of,
                             const std::function<const float *(std::size_t)> & payload_of,
                             const std::function<std::size_t(std::size_t)> & payload_len);

Container decode_container(std::string_view bytes,
                           const std::function<std::size_t(const std::vector<std::uint32_t> &, std::uint32_t n,
                                                           std::size_t record)> & payload_len);

} // namespace cola::detail
