#pragma once

#include "cola/compression.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace cola {

enum class Band { low = 0, mid = 1, high = 2 };

// Normalized frequencies (Nyquist = 1) and row-averaged DFT magnitudes of
// the non-negative half, bins j = 0 .. floor(c / 2), frequency 2j / c.
struct Spectrum {
    std::vector<double> frequency;
    std::vector<double> magnitude;
};

// Band of bin j for a transform of length c: low [0, 0.2), mid [0.2, 0.6),
// high [0.6, 1]. Decided in integer arithmetic.
Band band_of_bin(std::size_t j, std::size_t c);

// Row-wise DFT along the input dimension, no window. Needs cols >= 2.
Spectrum weight_spectrum(const LinearLayer & layer);

struct BandEnergies {
    std::array<double, 3> energy{};   // sum of magnitude^2 per band
    std::array<double, 3> fraction{}; // energy / total
    double total = 0.0;
};

// The spectrum's frequency axis decides the band of each bin.
BandEnergies band_energies(const Spectrum & spectrum);

using BandRatio = std::array<std::optional<double>, 3>;

// Mean bin magnitude of `compressed` over that of `original`, per band;
// absent where the original band mean is zero.
BandRatio compression_ratio(const LinearLayer & original, const LinearLayer & compressed);

struct SpectrumReport {
    std::string layer_name;
    Spectrum spectrum;
    BandEnergies bands;
    std::optional<BandRatio> ratio;
};

SpectrumReport spectrum_report(const LinearLayer & original, const LinearLayer * compressed = nullptr);
nlohmann::json to_json(const SpectrumReport & r);

} // namespace cola
