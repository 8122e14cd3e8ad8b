#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mrfmoco/config.hpp"
#include "mrfmoco/io.hpp"
#include "mrfmoco/matching.hpp"
#include "mrfmoco/metrics.hpp"
#include "mrfmoco/recon.hpp"

namespace mrfmoco {

// Stage names in execution order.
extern const std::vector<std::string> kStageOrder;

// Runs one stage, reading upstream artifacts from config.io.out_dir and
// writing its own artifacts plus a <stage>.manifest.json. Missing upstream
// artifacts raise DataError naming the stage to run first.
void run_stage(const std::string &name, const PipelineConfig &config);

// All stages in order.
void run_pipeline(const PipelineConfig &config);

// Artifact paths for a given output directory.
struct ArtifactPaths {
  std::string dir;
  std::string phantom_labels() const { return dir + "/phantom_labels.qmap"; }
  std::string phantom_map(const std::string &p) const {
    return dir + "/phantom_" + p + ".qmap";
  }
  std::string dictionary() const { return dir + "/dictionary.dict"; }
  std::string motion_kspace() const { return dir + "/motion.kspc"; }
  std::string mrf_kspace() const { return dir + "/mrf.kspc"; }
  std::string motion_nav() const { return dir + "/motion.knav"; }
  std::string mrf_nav() const { return dir + "/mrf.knav"; }
  std::string bins() const { return dir + "/bins.json"; }
  std::string motion_trace_csv() const { return dir + "/displacement_motion.csv"; }
  std::string mrf_trace_csv() const { return dir + "/displacement_mrf.csv"; }
  std::string motion_volume(int phase) const {
    return dir + "/motion_phase" + std::to_string(phase) + ".qmap";
  }
  std::string field(int from, int to) const {
    return dir + "/field_" + std::to_string(from) + "_to_" + std::to_string(to) +
           ".dfld";
  }
  std::string singular(const std::string &method, int k) const {
    return dir + "/singular_" + method + "_" + std::to_string(k) + ".qmap";
  }
  std::string maps_stem(const std::string &method) const { return "maps_" + method; }
  std::string metrics_csv() const { return dir + "/metrics.csv"; }
  std::string metrics_txt() const { return dir + "/metrics.txt"; }
  std::string solver_trace_csv(const std::string &which) const {
    return dir + "/trace_" + which + ".csv";
  }
  std::string manifest(const std::string &stage) const {
    return dir + "/" + stage + ".manifest.json";
  }
};

// In-memory end-to-end run used by tests; mirrors what the staged pipeline
// produces without touching disk.
struct PipelineResult {
  TissueMap phantom;
  CompressedDictionary dictionary;
  BinningResult bins;
  std::vector<Volume3D> motion_volumes;
  std::vector<std::vector<DeformationField>> fields;
  SingularVolumes moco;
  SingularVolumes uncorrected;
  ParametricMaps moco_maps;
  ParametricMaps uncorrected_maps;
  std::vector<double> nrmse_unregistered;  // phases 2..M vs phase 1
  std::vector<double> nrmse_registered;
  std::vector<double> ssim_unregistered;
  std::vector<double> ssim_registered;
};

PipelineResult run_in_memory(const PipelineConfig &config);

RoiSet phantom_rois(const TissueMap &phantom);

}  // namespace mrfmoco
