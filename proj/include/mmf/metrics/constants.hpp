#pragma once

// Every tunable constant of the metric battery, in one place. Values are on
// the unit pixel scale unless a metric rescales internally (noted per entry).

#include <array>

namespace mmf::metrics::constants {

// PSNR: 10*log10(1/MSE), capped.
inline constexpr double kPsnrCapDb = 100.0;
inline constexpr double kPsnrMinMse = 1e-10;

// TV ratio: TV(a) / (TV(b) + eps); both below eps -> 1.
inline constexpr double kTvEps = 1e-8;

// SSIM (shared by MS-SSIM and the SSIM error map).
inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimC1 = 0.01 * 0.01;
inline constexpr double kSsimC2 = 0.03 * 0.03;

// MS-SSIM scale exponents, finest first.
inline constexpr std::array<double, 5> kMsSsimWeights = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};

// GMSD: 170/255^2 on the unit scale.
inline constexpr double kGmsdC = 0.0026;

// NLPD.
inline constexpr int kNlpdLevels = 6;
inline constexpr int kNlpdMinLevels = 3;
inline constexpr double kNlpdSigma0 = 0.17;

// Spatial VIF.
inline constexpr int kVifScales = 4;
inline constexpr int kVifWindow = 3;
inline constexpr double kVifNoiseVar = 2.0 / (255.0 * 255.0);
inline constexpr double kVifGainEps = 1e-10;

// FSIM: computed on 0..255 luma internally. T1 applies to phase congruency,
// which is scale-free, so it is not rescaled; T2 = 160 on the byte scale.
inline constexpr double kFsimT1 = 0.85;
inline constexpr double kFsimT2 = 160.0;

// Phase congruency (log-Gabor bank).
inline constexpr int kPcScales = 4;
inline constexpr int kPcOrientations = 4;
inline constexpr double kPcMinWavelength = 6.0;
inline constexpr double kPcMult = 2.0;
inline constexpr double kPcSigmaOnf = 0.55;
inline constexpr double kPcDThetaOnSigma = 1.2;
inline constexpr double kPcNoiseK = 2.0;
inline constexpr double kPcEpsilon = 1e-4;

// VSI: computed on 0..255 RGB internally.
inline constexpr double kVsiConstVs = 1.27;
inline constexpr double kVsiConstGm = 386.0;
inline constexpr double kVsiConstChrom = 130.0;
inline constexpr double kVsiAlpha = 0.40;
inline constexpr double kVsiLambda = 0.020;
inline constexpr double kVsiSigmaF = 1.34;
inline constexpr double kVsiOmega0 = 0.0210;
inline constexpr double kVsiSigmaD = 145.0;  // pixels at 256x256
inline constexpr double kVsiSigmaC = 0.001;

// Minimum image side for metrics with large supports.
inline constexpr int kMinSideVif = 64;
inline constexpr int kMinSideFsim = 64;
inline constexpr int kMinSideVsi = 64;
inline constexpr int kMinSideNlpd = 32;

}  // namespace mmf::metrics::constants
