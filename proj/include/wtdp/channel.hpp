#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "wtdp/model.hpp"
#include "wtdp/rng.hpp"

namespace wtdp {

enum class FadingKind { Rayleigh, Rician };

struct ChannelParams {
    double snr0_db = 15.0;    // mean one-hop SNR
    double eta = 3.5;         // path-loss exponent
    int reuse = 1;            // F: frequency reuse period in hops
    double rate = 1.5;        // R, bits/sec/Hz
    FadingKind fading = FadingKind::Rayleigh;
    double k_factor = 0.0;    // Rician LOS/diffuse power ratio (linear)
    double speed_kmh = 0.0;   // train speed, drives the Doppler spread
    double slot_ms = 100.0;
    double carrier_ghz = 5.8;

    double snr0_lin() const { return std::pow(10.0, snr0_db / 10.0); }

    // maximum Doppler shift f_d = v / lambda
    double doppler_hz() const {
        return (speed_kmh / 3.6) * (carrier_ghz * 1e9) / 299792458.0;
    }

    void validate() const {
        if (!std::isfinite(snr0_db)) throw std::invalid_argument("snr0_db must be finite");
        if (eta <= 0.0) throw std::invalid_argument("eta must be > 0");
        if (reuse < 1) throw std::invalid_argument("F must be >= 1");
        if (rate <= 0.0) throw std::invalid_argument("R must be > 0");
        if (k_factor < 0.0) throw std::invalid_argument("k_factor must be >= 0");
        if (slot_ms <= 0.0) throw std::invalid_argument("slot_ms must be > 0");
    }
};

// Sector antenna: unit gain inside the mainbeam, a flat L dB loss out to
// broadside, nothing behind the antenna.
struct AntennaPattern {
    double theta = 1.0471975511965976;  // mainbeam width, radians (default pi/3)
    double sidelobe_db = 6.0;

    void validate() const {
        if (theta <= 0.0 || theta > 3.14159265358979323846)
            throw std::invalid_argument("theta must be in (0, pi]");
        if (sidelobe_db < 0.0) throw std::invalid_argument("sidelobe_db must be >= 0");
    }
};

// Attenuation of a same-frequency transmitter k hops away: 1/(1+(k-1)F)^eta.
inline double path_gain_hops(int k, int reuse, double eta) {
    assert(k >= 1);
    return 1.0 / std::pow(1.0 + static_cast<double>(k - 1) * reuse, eta);
}

// angle is measured off boresight, normalized to [0, pi]. Boundary angles go
// to the stronger gain: exactly theta/2 is mainlobe, exactly pi/2 sidelobe.
inline double antenna_gain(double angle, const AntennaPattern& pattern) {
    if (angle <= pattern.theta / 2.0) return 1.0;
    if (angle <= 1.5707963267948966) return std::pow(10.0, -pattern.sidelobe_db / 10.0);
    return 0.0;
}

struct LinkGain {
    double avg_snr_lin = 0.0;  // mean received SNR incl. path loss and antenna gains
    double h2 = 1.0;           // unit-mean instantaneous fading power
};

// One frame decodes iff log2(1 + SINR) >= R, with every concurrent
// transmission contributing interference. Several frames may be captured in
// the same slot; the boundary is inclusive.
inline std::vector<std::size_t> decode_slot(std::span<const LinkGain> transmitters,
                                            double rate) {
    std::vector<std::size_t> decoded;
    if (transmitters.empty()) return decoded;
    double total = 0.0;
    for (const LinkGain& g : transmitters) total += g.avg_snr_lin * g.h2;
    const double capacity_threshold = std::exp2(rate);
    for (std::size_t j = 0; j < transmitters.size(); ++j) {
        const double s = transmitters[j].avg_snr_lin * transmitters[j].h2;
        const double sinr = s / (1.0 + (total - s));
        if (1.0 + sinr >= capacity_threshold) decoded.push_back(j);
    }
    return decoded;
}

inline std::vector<Frame> decode_slot(
    std::span<const std::pair<LinkGain, Frame>> transmitters, double rate) {
    std::vector<LinkGain> gains;
    gains.reserve(transmitters.size());
    for (const auto& [g, f] : transmitters) gains.push_back(g);
    std::vector<Frame> out;
    for (std::size_t j : decode_slot(std::span<const LinkGain>(gains), rate))
        out.push_back(transmitters[j].second);
    return out;
}

// Per-directed-link fading process.
//
// Rayleigh draws a fresh unit-mean exponential power every slot (block fading,
// independent across slots). Rician combines a line-of-sight phasor with a
// diffuse sum of 16 sinusoids whose Doppler frequencies follow the Jakes
// spectrum. The sinusoid coefficients are complex Gaussian, so the diffuse
// part is exactly CN(0,1) at every instant and K=0 reproduces Rayleigh
// statistics; v=0 freezes the process for the whole trial.
class FadingProcess {
public:
    static FadingProcess rayleigh() { return FadingProcess(); }

    static FadingProcess rician(const ChannelParams& params, Rng& rng) {
        FadingProcess f;
        f.rayleigh_ = false;
        const double k = params.k_factor;
        if (std::isinf(k)) {
            f.los_amp_ = 1.0;
            f.diffuse_scale_ = 0.0;
        } else {
            f.los_amp_ = std::sqrt(k / (k + 1.0));
            f.diffuse_scale_ = std::sqrt(1.0 / (k + 1.0));
        }
        const double omega_slot =
            2.0 * 3.14159265358979323846 * params.doppler_hz() * params.slot_ms / 1000.0;
        f.los_phase_ = 2.0 * 3.14159265358979323846 * rng.uniform();
        f.los_omega_ = omega_slot * std::cos(2.0 * 3.14159265358979323846 * rng.uniform());
        const double sigma = std::sqrt(0.5 / kOscillators);
        f.osc_.resize(kOscillators);
        for (Oscillator& o : f.osc_) {
            o.omega = omega_slot * std::cos(2.0 * 3.14159265358979323846 * rng.uniform());
            o.re = sigma * rng.normal();
            o.im = sigma * rng.normal();
        }
        return f;
    }

    // Instantaneous |h|^2 for the given slot; constant within a slot.
    double sample(long slot, Rng& rng) {
        if (rayleigh_) return rng.exponential();
        const double t = static_cast<double>(slot);
        double re = los_amp_ * std::cos(los_phase_ + los_omega_ * t);
        double im = los_amp_ * std::sin(los_phase_ + los_omega_ * t);
        double dre = 0.0, dim = 0.0;
        for (const Oscillator& o : osc_) {
            const double c = std::cos(o.omega * t);
            const double s = std::sin(o.omega * t);
            dre += o.re * c - o.im * s;
            dim += o.re * s + o.im * c;
        }
        re += diffuse_scale_ * dre;
        im += diffuse_scale_ * dim;
        return re * re + im * im;
    }

    static constexpr int kOscillators = 16;

private:
    struct Oscillator {
        double re, im, omega;
    };

    bool rayleigh_ = true;
    double los_amp_ = 0.0, diffuse_scale_ = 1.0;
    double los_phase_ = 0.0, los_omega_ = 0.0;
    std::vector<Oscillator> osc_;
};

inline FadingProcess make_fading(const ChannelParams& params, Rng& rng) {
    return params.fading == FadingKind::Rayleigh ? FadingProcess::rayleigh()
                                                 : FadingProcess::rician(params, rng);
}

}  // namespace wtdp
