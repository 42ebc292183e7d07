#pragma once

#include <iosfwd>
#include <string>

#include "fep/lattice.hpp"
#include "fep/renewal.hpp"

namespace fep {

std::string base64_encode(const uint8_t* data, size_t len);
std::vector<uint8_t> base64_decode(const std::string& text);

/// bit payload, little-endian bytes, (size+7)/8 of them
std::string bits_to_base64(const BitArray& bits);
BitArray bits_from_base64(const std::string& text, uint64_t nbits);

// Compact window record:
// {"delta":..,"L":..,"left_context":0|1,"occupancy":"<base64>",
//  "first_renewal_position":int|null}
std::string window_record(const WindowSample& w);
WindowSample window_from_record(const std::string& json_line);

// Binary ensemble container, little-endian:
//   magic "FEPENS1\0", u32 version, u64 N, f64 rho, u8 rule, u32 replicas,
//   u64 master seed; per replica: u64 index, u8 status, u64 events,
//   f64 freeze_time, occupancy words.
void save_ensemble(const FrozenEnsemble& ens, const std::string& path);
FrozenEnsemble load_ensemble(const std::string& path);

} // namespace fep
