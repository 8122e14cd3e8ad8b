#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "mrfmoco/encoding.hpp"
#include "mrfmoco/phantom.hpp"
#include "mrfmoco/recon.hpp"
#include "mrfmoco/registration.hpp"
#include "mrfmoco/sequence.hpp"
#include "mrfmoco/simulate.hpp"

namespace mrfmoco {

struct BinningConfig {
  int M = 5;
  double alpha = 0.35;
  double tau = 0.5;
  double search_window_mm = 40.0;
  bool subvoxel = true;
};

struct ScheduleConfig {
  std::string mrf_file;  // optional external FA/TE/TR table
  int n_contrasts = 175;
  int spokes_per_contrast = 8;
  double recovery_ms = 1000.0;
  double motion_fa_deg = 9.0;
  double motion_te_ms = 1.65;
  double motion_tr_ms = 3.87;
};

struct AcqConfig {
  int samples_per_spoke = 64;
  int navigator_every = 28;
  int navigator_samples = 256;
  int n_coils = 4;
  int motion_repetitions = 2;
  int mrf_repetitions = 4;
  int partition_undersampling = 1;
};

struct MetricsConfig {
  double ssim_k1 = 0.01;
  double ssim_k2 = 0.03;
  double ssim_sigma = 1.5;
  bool ssim_slicewise = true;
};

struct IoConfig {
  std::uint64_t seed = 1234;
  bool deterministic = true;
  std::string out_dir = "out";
  double noise_sigma = 0.0;
  int jobs = 1;
};

struct PipelineConfig {
  PhantomConfig phantom;
  BreathingModel breathing;
  ScheduleConfig schedule;
  AcqConfig trajectory;
  DictGridSpec dictionary;
  BinningConfig binning;
  RegistrationConfig registration;
  MotionReconConfig recon_motion;
  MrfReconConfig recon_mrf;
  GriddingConfig gridding;
  MetricsConfig metrics;
  IoConfig io;
};

PipelineConfig default_config();

// Strict parser: unknown keys anywhere in the document are configuration
// errors. Round-trips with serialize_config.
PipelineConfig parse_config(const std::string &json_text);
PipelineConfig load_config(const std::string &path);
std::string serialize_config(const PipelineConfig &config);

}  // namespace mrfmoco
