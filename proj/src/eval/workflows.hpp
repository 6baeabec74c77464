#pragma once

#include <string>
#include <vector>

#include "diffusion/ddpm.hpp"
#include "eval/config.hpp"
#include "gan/train.hpp"

namespace dgp {

// Sorted *.ppm / *.pgm files of a directory.
std::vector<Image> load_dataset_dir(const std::string& dir);

// Writes <dir>/train/NNNNN.ppm and <dir>/test/NNNNN.ppm.
void write_dataset(const RunConfig& cfg, const std::string& dir);

// From <data_dir>/<split> (or <data_dir> itself) when given; generated from
// the config otherwise.
std::vector<Image> training_images(const RunConfig& cfg, const std::string& data_dir);
std::vector<Image> test_images(const RunConfig& cfg, const std::string& data_dir);

std::vector<float> run_train_ddpm(const RunConfig& cfg, const std::vector<Image>& data, const std::string& out_path,
                                  const ProgressFn& progress = {});
std::vector<GanLosses> run_train_gan(const RunConfig& cfg, const std::vector<Image>& data, const std::string& out_path,
                                     const GanProgressFn& progress = {});

EpsilonNet make_epsilon_net(const RunConfig& cfg, int channels);
Generator make_generator(const RunConfig& cfg, int channels);
Discriminator make_discriminator(const RunConfig& cfg, int channels);

// Sampler stream used by the inpaint commands.
Rng inpaint_rng(const RunConfig& cfg);

}  // namespace dgp
