#include "cola/spectral.hpp"

#include "cola/errors.hpp"

#include <fftw3.h>

#include <cmath>
#include <memory>
#include <mutex>

namespace cola {

namespace {

// FFTW planning is not thread-safe; execution on distinct buffers is.
std::mutex & planner_mutex() {
    static std::mutex mu;
    return mu;
}

class RealFft {
public:
    explicit RealFft(std::size_t n)
        : n_(n),
          in_(static_cast<double *>(fftw_malloc(sizeof(double) * n))),
          out_(static_cast<fftw_complex *>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)))) {
        if (!in_ || !out_) {
            throw std::bad_alloc();
        }
        std::lock_guard lock(planner_mutex());
        plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_.get(), out_.get(), FFTW_ESTIMATE);
        if (!plan_) {
            throw NumericalError("FFTW could not plan a transform of length " + std::to_string(n));
        }
    }
    ~RealFft() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan_);
    }
    RealFft(const RealFft &) = delete;
    RealFft & operator=(const RealFft &) = delete;

    double * input() { return in_.get(); }
    void execute() { fftw_execute(plan_); }
    double magnitude(std::size_t j) const { return std::hypot(out_.get()[j][0], out_.get()[j][1]); }
    std::size_t bins() const { return n_ / 2 + 1; }

private:
    struct FftwFree {
        void operator()(void * p) const { fftw_free(p); }
    };
    std::size_t n_;
    std::unique_ptr<double, FftwFree> in_;
    std::unique_ptr<fftw_complex, FftwFree> out_;
    fftw_plan plan_ = nullptr;
};

} // namespace

Band band_of_bin(std::size_t j, std::size_t c) {
    // f = 2j / c; f < 1/5  <=>  10 j < c;  f < 3/5  <=>  10 j < 3 c.
    if (10 * j < c) return Band::low;
    if (10 * j < 3 * c) return Band::mid;
    return Band::high;
}

Spectrum weight_spectrum(const LinearLayer & layer) {
    const auto c = static_cast<std::size_t>(layer.cols());
    if (c < 2) {
        throw ArgumentError("weight_spectrum: layer '" + layer.name + "' needs at least 2 columns");
    }
    if (layer.rows() < 1) {
        throw ArgumentError("weight_spectrum: layer '" + layer.name + "' has no rows");
    }
    RealFft fft(c);
    Spectrum s;
    s.magnitude.assign(fft.bins(), 0.0);
    s.frequency.resize(fft.bins());
    for (std::size_t j = 0; j < fft.bins(); ++j) {
        s.frequency[j] = 2.0 * static_cast<double>(j) / static_cast<double>(c);
    }
    for (Eigen::Index r = 0; r < layer.rows(); ++r) {
        for (std::size_t t = 0; t < c; ++t) {
            fft.input()[t] = layer.weights(r, static_cast<Eigen::Index>(t));
        }
        fft.execute();
        for (std::size_t j = 0; j < fft.bins(); ++j) {
            s.magnitude[j] += fft.magnitude(j);
        }
    }
    for (double & m : s.magnitude) {
        m /= static_cast<double>(layer.rows());
    }
    return s;
}

namespace {

Band band_of_frequency(double f) {
    if (f < 0.2) return Band::low;
    if (f < 0.6) return Band::mid;
    return Band::high;
}

} // namespace

BandEnergies band_energies(const Spectrum & spectrum) {
    if (spectrum.magnitude.empty() || spectrum.magnitude.size() != spectrum.frequency.size()) {
        throw ArgumentError("band_energies: empty or inconsistent spectrum");
    }
    BandEnergies out;
    for (std::size_t j = 0; j < spectrum.magnitude.size(); ++j) {
        const double e = spectrum.magnitude[j] * spectrum.magnitude[j];
        out.energy[static_cast<std::size_t>(band_of_frequency(spectrum.frequency[j]))] += e;
        out.total += e;
    }
    if (!(out.total > 0.0)) {
        throw ArgumentError("band_energies: spectrum has zero energy");
    }
    const double sum = out.energy[0] + out.energy[1] + out.energy[2];
    for (std::size_t b = 0; b < 3; ++b) {
        out.fraction[b] = out.energy[b] / sum;
    }
    return out;
}

BandRatio compression_ratio(const LinearLayer & original, const LinearLayer & compressed) {
    if (original.rows() != compressed.rows() || original.cols() != compressed.cols()) {
        throw ShapeError("compression_ratio: layers differ in shape");
    }
    const auto so = weight_spectrum(original);
    const auto sc = weight_spectrum(compressed);
    const auto c = static_cast<std::size_t>(original.cols());
    std::array<double, 3> mo{}, mc{};
    std::array<std::size_t, 3> bins{};
    for (std::size_t j = 0; j < so.magnitude.size(); ++j) {
        const auto b = static_cast<std::size_t>(band_of_bin(j, c));
        mo[b] += so.magnitude[j];
        mc[b] += sc.magnitude[j];
        ++bins[b];
    }
    BandRatio ratio;
    for (std::size_t b = 0; b < 3; ++b) {
        if (bins[b] == 0 || mo[b] == 0.0) {
            continue;
        }
        // Same bin count on both sides, so the ratio of sums is the ratio of means.
        ratio[b] = mc[b] / mo[b];
    }
    return ratio;
}

SpectrumReport spectrum_report(const LinearLayer & original, const LinearLayer * compressed) {
    SpectrumReport r;
    r.layer_name = original.name;
    r.spectrum = weight_spectrum(original);
    r.bands = band_energies(r.spectrum);
    if (compressed) {
        r.ratio = compression_ratio(original, *compressed);
    }
    return r;
}

nlohmann::json to_json(const SpectrumReport & r) {
    nlohmann::json j = nlohmann::json::object();
    j["layer_name"] = r.layer_name;
    j["frequency"] = r.spectrum.frequency;
    j["spectrum"] = r.spectrum.magnitude;
    j["band_energy"] = r.bands.energy;
    j["band_fraction"] = r.bands.fraction;
    if (r.ratio) {
        nlohmann::json ratio = nlohmann::json::array();
        for (const auto & v : *r.ratio) {
            ratio.push_back(v ? nlohmann::json(*v) : nlohmann::json(nullptr));
        }
        j["ratio"] = ratio;
    } else {
        j["ratio"] = nullptr;
    }
    return j;
}

} // namespace cola
